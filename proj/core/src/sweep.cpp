#include "ecomb/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <thread>
#include <utility>

#include "ecomb/errors.hpp"
#include "ecomb/lattice.hpp"
#include "ecomb/observables.hpp"

namespace ecomb {

using nlohmann::json;

namespace {

std::vector<double> axis_values(const json& a) {
  if (a.contains("values")) return a.at("values").get<std::vector<double>>();
  const double start = a.at("start").get<double>();
  const double stop = a.at("stop").get<double>();
  const int count = a.at("count").get<int>();
  if (count < 1) throw ConfigError("sweep axis needs count >= 1");
  const bool log_spacing = a.value("spacing", "linear") == "log";
  if (log_spacing && !(start > 0.0 && stop > 0.0)) {
    throw ConfigError("log-spaced sweep axis needs positive endpoints");
  }
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    v[i] = log_spacing ? start * std::pow(stop / start, f) : start + (stop - start) * f;
  }
  return v;
}

struct ObservableSpec {
  enum class Kind { sigma, resonant_weight, nonresonant_weight, doc_max, doc_argmax };
  Kind kind = Kind::sigma;
  int m = 1;
};

ObservableSpec parse_observable(const std::string& name) {
  ObservableSpec spec;
  if (name == "sigma") {
    spec.kind = ObservableSpec::Kind::sigma;
  } else if (name == "resonant_weight") {
    spec.kind = ObservableSpec::Kind::resonant_weight;
  } else if (name == "nonresonant_weight") {
    spec.kind = ObservableSpec::Kind::nonresonant_weight;
  } else if (name.rfind("doc", 0) == 0) {
    const auto sep = name.find('_');
    if (sep == std::string::npos) throw ConfigError("unknown observable " + name);
    spec.m = std::stoi(name.substr(3, sep - 3));
    const std::string tail = name.substr(sep + 1);
    if (tail == "max") spec.kind = ObservableSpec::Kind::doc_max;
    else if (tail == "argmax") spec.kind = ObservableSpec::Kind::doc_argmax;
    else throw ConfigError("unknown observable " + name);
    if (spec.m < 1) throw ConfigError("doc order must be positive in " + name);
  } else {
    throw ConfigError("unknown observable " + name);
  }
  return spec;
}

double read_talbot(const json& params) {
  if (!params.contains("talbot_over_z0")) return std::numeric_limits<double>::infinity();
  const auto& t = params.at("talbot_over_z0");
  if (t.is_string()) {
    if (t.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("talbot_over_z0 must be a number or \"inf\"");
  }
  return t.get<double>();
}

DimensionlessProblem problem_from_params(const json& params) {
  SolverNumerics num;
  num.span_over_z0 = params.value("span_over_z0", 20.0);
  num.slice_count = params.value("slice_count", 0);
  num.ell_max = params.value("ell_max", 0);
  return matched_problem(params.at("v_over_c").get<double>(),
                         params.at("beta_abs").get<double>(), read_talbot(params),
                         params.value("z0_omega_over_v", 50.0), num);
}

EvolveOptions options_from_params(const json& params) {
  EvolveOptions opts;
  const std::string backend = params.value("backend", "strang");
  if (backend == "krylov") opts.backend = PropagatorBackend::krylov;
  else if (backend == "dense") opts.backend = PropagatorBackend::dense_pade;
  else if (backend == "strang") opts.backend = PropagatorBackend::strang_split;
  else throw ConfigError("unknown backend " + backend);
  const std::string mismatch = params.value("mismatch", "detuning_sum");
  if (mismatch == "detuning_sum") opts.mismatch = MismatchForm::detuning_sum;
  else if (mismatch == "index_difference") opts.mismatch = MismatchForm::index_difference;
  else throw ConfigError("unknown mismatch form " + mismatch);
  return opts;
}

struct PointFailure {
  int code = 0; // exit-code convention: 2 config, 3 convergence, 4 io
  std::string message;
};

} // namespace

SweepConfig parse_sweep_config(const json& j) {
  if (j.value("schema_version", dataset_schema_version) != dataset_schema_version) {
    throw ConfigError("unsupported sweep config schema");
  }
  SweepConfig cfg;
  cfg.name = j.value("name", "sweep");
  cfg.solver = j.value("solver", "lattice");
  if (cfg.solver != "lattice" && cfg.solver != "analytic") {
    throw ConfigError("sweep solver must be \"lattice\" or \"analytic\"");
  }
  cfg.base = j.value("base", json::object());
  if (!j.contains("axes") || !j.at("axes").is_array() || j.at("axes").empty()) {
    throw ConfigError("sweep config needs a nonempty axes array");
  }
  for (const auto& a : j.at("axes")) {
    SweepAxis axis;
    axis.name = a.at("name").get<std::string>();
    axis.values = axis_values(a);
    if (axis.values.empty()) throw ConfigError("sweep axis " + axis.name + " is empty");
    cfg.axes.push_back(std::move(axis));
  }
  cfg.observables = j.value("observables", std::vector<std::string>{"sigma"});
  if (cfg.observables.empty()) throw ConfigError("sweep config needs observables");
  cfg.workers = j.value("workers", 1);
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path + " for reading");
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_sweep_config(j);
}

void parallel_for_indexed(std::size_t count, int workers,
                          const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t nthreads =
      std::min<std::size_t>(count, workers <= 1 ? 1 : static_cast<std::size_t>(workers));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

SweepOutcome run_sweep(const SweepConfig& cfg) {
  std::vector<ObservableSpec> specs;
  specs.reserve(cfg.observables.size());
  for (const auto& name : cfg.observables) specs.push_back(parse_observable(name));

  std::size_t count = 1;
  for (const auto& axis : cfg.axes) count *= axis.values.size();

  SweepOutcome out;
  out.dataset.name = cfg.name;
  for (const auto& axis : cfg.axes) out.dataset.columns.push_back(axis.name);
  for (const auto& name : cfg.observables) out.dataset.columns.push_back(name);
  out.dataset.meta = {{"solver", cfg.solver}, {"base", cfg.base}};
  out.dataset.rows.assign(count, {});
  out.problems.assign(count, json());

  std::vector<std::optional<PointFailure>> failures(count);
  const auto run_point = [&](std::size_t index) {
    try {
      json params = cfg.base;
      std::vector<double> axis_vals(cfg.axes.size());
      std::size_t rem = index;
      for (std::size_t a = cfg.axes.size(); a-- > 0;) {
        const auto& axis = cfg.axes[a];
        const std::size_t k = rem % axis.values.size();
        rem /= axis.values.size();
        axis_vals[a] = axis.values[k];
        params[axis.name] = axis.values[k];
      }
      const DimensionlessProblem problem = problem_from_params(params);
      SidebandSpectrum spectrum;
      double resonant = 1.0, nonresonant = 0.0;
      if (cfg.solver == "analytic") {
        spectrum = comb_coefficients(std::complex<double>(0.0, std::abs(problem.beta())),
                                     problem.ell_max);
      } else {
        const EvolveResult run = evolve(problem, options_from_params(params));
        ResonantExtraction ex = extract_resonant(run.final_state);
        spectrum = std::move(ex.spectrum);
        resonant = ex.resonant_weight;
        nonresonant = ex.nonresonant_weight;
      }
      std::vector<double> row = axis_vals;
      for (const auto& spec : specs) {
        switch (spec.kind) {
          case ObservableSpec::Kind::sigma:
            row.push_back(sideband_sigma(spectrum));
            break;
          case ObservableSpec::Kind::resonant_weight:
            row.push_back(resonant);
            break;
          case ObservableSpec::Kind::nonresonant_weight:
            row.push_back(nonresonant);
            break;
          case ObservableSpec::Kind::doc_max:
            row.push_back(max_doc_over_distance(spectrum, spec.m).value);
            break;
          case ObservableSpec::Kind::doc_argmax:
            row.push_back(max_doc_over_distance(spectrum, spec.m).d_over_zT);
            break;
        }
      }
      out.dataset.rows[index] = std::move(row);
      out.problems[index] = problem;
    } catch (const ConfigError& e) {
      failures[index] = PointFailure{2, e.what()};
    } catch (const json::exception& e) {
      failures[index] = PointFailure{2, e.what()};
    } catch (const ConvergenceError& e) {
      failures[index] = PointFailure{3, e.what()};
    } catch (const std::exception& e) {
      failures[index] = PointFailure{3, e.what()};
    }
  };
  parallel_for_indexed(count, cfg.workers, run_point);

  for (std::size_t i = 0; i < count; ++i) {
    if (failures[i]) {
      const std::string msg =
          "sweep point " + std::to_string(i) + ": " + failures[i]->message;
      if (failures[i]->code == 2) throw ConfigError(msg);
      throw ConvergenceError(msg);
    }
  }
  return out;
}

} // namespace ecomb
