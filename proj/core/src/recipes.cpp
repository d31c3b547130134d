#include "ecomb/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <utility>

#include "ecomb/constants.hpp"
#include "ecomb/errors.hpp"
#include "ecomb/kinematics.hpp"
#include "ecomb/lattice.hpp"
#include "ecomb/observables.hpp"

namespace ecomb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double desk_homega1_eV = 2.0;
// Grid-scan operating point for the compression-enhancement figures at
// z_T/z0 = 13.3; chosen as the coupling whose optimum post-exit DOC_1 tops
// the scan (0.668 at a drift of 0.32 z_T).
constexpr double compression_zT_over_z0 = 13.3;
constexpr double compression_coupling = 1.6;

struct RecipeOutput {
  Dataset ds;
  json config;
  std::vector<json> problems;
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1.0);
  }
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = n == 1 ? a : a * std::pow(b / a, i / (n - 1.0));
  }
  return v;
}

// Equal-power phase-matched pair; beam-2 frequency from the Doppler
// condition, beam-2 aperture from the shared Rayleigh range.
LabConfig matched_lab(double e0_keV, double homega1_eV, double na1,
                      double p_over_kW_per_eV) {
  LabConfig lab;
  lab.kinetic_energy_eV = e0_keV * 1e3;
  const Kinematics kin = electron_kinematics(lab.kinetic_energy_eV);
  const PhaseMatch pm = phase_matched_omega2(homega1_eV, kin.v_over_c);
  const double power_W = p_over_kW_per_eV * homega1_eV * 1e3;
  lab.beam1 = {homega1_eV, na1, power_W, 0.0, +1};
  lab.beam2 = {pm.omega2_eV, 0.0, power_W, 0.0, -1};
  return lab;
}

template <typename Fn>
void run_points(std::size_t count, int workers, const Fn& fn) {
  std::vector<int> codes(count, 0);
  std::vector<std::string> errors(count);
  parallel_for_indexed(count, workers, [&](std::size_t i) {
    try {
      fn(i);
    } catch (const ConfigError& e) {
      codes[i] = 2;
      errors[i] = e.what();
    } catch (const std::exception& e) {
      codes[i] = 3;
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < count; ++i) {
    if (codes[i] == 0) continue;
    const std::string msg = "grid point " + std::to_string(i) + ": " + errors[i];
    if (codes[i] == 2) throw ConfigError(msg);
    throw ConvergenceError(msg);
  }
}

RecipeOutput recipe_fig2a(const RecipeRequest& req) {
  const int n = req.full_scale ? 128 : 32;
  const double na1 = 0.2, p_over = 2.0;
  const std::vector<double> e0 = linspace(5.0, 200.0, n);
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"kinetic_energy_keV", "v_over_c", "beta_abs"};
  out.config = {{"photon_energy_eV", desk_homega1_eV},
                {"numerical_aperture", na1},
                {"p_over_homega1_kW_per_eV", p_over},
                {"kinetic_energy_keV", e0}};
  out.ds.rows.resize(e0.size());
  out.problems.resize(e0.size());
  run_points(e0.size(), req.workers, [&](std::size_t i) {
    const LabConfig lab = matched_lab(e0[i], desk_homega1_eV, na1, p_over);
    const Kinematics kin = electron_kinematics(lab.kinetic_energy_eV);
    out.ds.rows[i] = {e0[i], kin.v_over_c, std::abs(coupling_beta(lab))};
    out.problems[i] = reduce_to_dimensionless(lab);
  });
  return out;
}

RecipeOutput recipe_fig2b(const RecipeRequest& req) {
  const int n = req.full_scale ? 121 : 61;
  const std::vector<double> betas = linspace(0.0, 15.0, n);
  const int lmax = default_ell_max(15.0);
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"beta_abs", "ell", "prob"};
  out.config = {{"beta_abs", betas}, {"ell_max", lmax}};
  for (double beta : betas) {
    const SidebandSpectrum s =
        comb_coefficients(std::complex<double>(0.0, beta), lmax);
    for (int ell = -lmax; ell <= lmax; ++ell) {
      out.ds.rows.push_back({beta, static_cast<double>(ell), s.prob(ell)});
    }
    out.problems.push_back({{"beta_abs", beta}, {"ell_max", lmax}});
  }
  return out;
}

RecipeOutput recipe_fig2c(const RecipeRequest& req) {
  const int nd = req.full_scale ? 241 : 121;
  const int profile_points = 96;
  const double beta = 1.0;
  const SidebandSpectrum s = comb_coefficients(std::complex<double>(0.0, beta));
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"d_over_zT", "t_over_tau", "density"};
  out.config = {{"beta_abs", beta},
                {"ell_max", s.ell_max},
                {"distance_points", nd},
                {"profile_points", profile_points}};
  for (double d : linspace(0.0, 1.0, nd)) {
    const DensityProfile dp = density_profile(propagate_comb(s, d), profile_points);
    for (int k = 0; k < profile_points; ++k) {
      out.ds.rows.push_back({d, dp.x(k) / (2.0 * M_PI), dp.value[static_cast<std::size_t>(k)]});
    }
  }
  out.problems.push_back({{"beta_abs", beta}, {"ell_max", s.ell_max}});
  return out;
}

RecipeOutput recipe_fig3ab(const RecipeRequest& req) {
  const double beta = 12.5, v = 1.0 / 3.0;
  const double zT_cases[2] = {0.0, 50.0}; // 0 encodes recoil off
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"zT_over_z0", "position_over_z0", "ell", "prob"};
  out.config = {{"beta_abs", beta}, {"v_over_c", v}, {"zT_over_z0", {0.0, 50.0}}};
  std::vector<std::vector<std::vector<double>>> blocks(2);
  out.problems.resize(2);
  run_points(2, std::min(req.workers, 2), [&](std::size_t i) {
    const double talbot =
        zT_cases[i] > 0.0 ? zT_cases[i] : std::numeric_limits<double>::infinity();
    const DimensionlessProblem p = matched_problem(v, beta, talbot);
    EvolveOptions opts;
    opts.record_stride = std::max(1, p.slice_count / 64);
    const EvolveResult run = evolve(p, opts);
    for (const auto& rec : run.trajectory) {
      const int lmax = rec.resonant.ell_max;
      for (int ell = -lmax; ell <= lmax; ++ell) {
        blocks[i].push_back({zT_cases[i], rec.position_over_z0,
                             static_cast<double>(ell),
                             rec.resonant.prob(ell) * rec.resonant_weight});
      }
    }
    out.problems[i] = p;
  });
  for (auto& block : blocks) {
    for (auto& row : block) out.ds.rows.push_back(std::move(row));
  }
  return out;
}

RecipeOutput recipe_fig3d(const RecipeRequest& req) {
  const double na1 = 0.011;
  std::vector<double> p_over = {1.5, 2.9};
  if (req.full_scale) p_over.push_back(5.8);
  const std::vector<double> e0 = linspace(10.0, 120.0, req.full_scale ? 24 : 12);
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"p_over_homega1_kW_per_eV", "kinetic_energy_keV", "beta_abs",
                    "sigma",  "sqrt2_beta",          "sqrt_zT_over_z0",
                    "zT_over_z0"};
  out.config = {{"photon_energy_eV", desk_homega1_eV},
                {"numerical_aperture", na1},
                {"p_over_homega1_kW_per_eV", p_over},
                {"kinetic_energy_keV", e0}};
  const std::size_t count = p_over.size() * e0.size();
  out.ds.rows.resize(count);
  out.problems.resize(count);
  run_points(count, req.workers, [&](std::size_t i) {
    const double pw = p_over[i / e0.size()];
    const double energy = e0[i % e0.size()];
    const LabConfig lab = matched_lab(energy, desk_homega1_eV, na1, pw);
    const DimensionlessProblem p = reduce_to_dimensionless(lab);
    const EvolveResult run = evolve(p);
    const ResonantExtraction ex = extract_resonant(run.final_state);
    const double beta_abs = std::abs(p.beta());
    out.ds.rows[i] = {pw,
                      energy,
                      beta_abs,
                      sideband_sigma(ex.spectrum),
                      std::sqrt(2.0) * beta_abs,
                      std::sqrt(p.talbot_over_z0),
                      p.talbot_over_z0};
    out.problems[i] = p;
  });
  return out;
}

RecipeOutput recipe_fig4a(const RecipeRequest& req) {
  const double v = 1.0 / 3.0;
  const std::vector<double> betas = linspace(1.0, 6.0, req.full_scale ? 11 : 8);
  const std::vector<double> zts = {5.0, 10.0, compression_zT_over_z0, 20.0, 50.0, 100.0};
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"beta_abs", "zT_over_z0", "doc1_max", "d_at_max_over_zT"};
  out.config = {{"v_over_c", v}, {"beta_abs", betas}, {"zT_over_z0", zts}};
  const std::size_t count = betas.size() * zts.size();
  out.ds.rows.resize(count);
  out.problems.resize(count);
  run_points(count, req.workers, [&](std::size_t i) {
    const double beta = betas[i / zts.size()];
    const double zt = zts[i % zts.size()];
    const DimensionlessProblem p = matched_problem(v, beta, zt);
    const EvolveResult run = evolve(p);
    const ResonantExtraction ex = extract_resonant(run.final_state);
    const DocMax best = max_doc_over_distance(ex.spectrum, 1);
    out.ds.rows[i] = {beta, zt, best.value, best.d_over_zT};
    out.problems[i] = p;
  });
  return out;
}

RecipeOutput recipe_fig4b(const RecipeRequest& req) {
  const double v = 1.0 / 3.0;
  const DimensionlessProblem p =
      matched_problem(v, compression_coupling, compression_zT_over_z0);
  const EvolveResult run = evolve(p);
  const ResonantExtraction fin = extract_resonant(run.final_state);
  const int profile_points = 128;
  const int nd = req.full_scale ? 241 : 121;
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"d_over_zT", "t_over_tau", "density"};
  out.config = {{"v_over_c", v},
                {"beta_abs", compression_coupling},
                {"zT_over_z0", compression_zT_over_z0},
                {"profile_points", profile_points},
                {"distance_points", nd}};
  out.problems.push_back(p);
  for (int j = 0; j < nd; ++j) {
    const double d = static_cast<double>(j) / (nd - 1);
    const DensityProfile dp = density_profile(propagate_comb(fin.spectrum, d), profile_points);
    for (int k = 0; k < profile_points; ++k) {
      out.ds.rows.push_back({d, dp.x(k) / (2.0 * M_PI), dp.value[static_cast<std::size_t>(k)]});
    }
  }
  return out;
}

RecipeOutput recipe_fig4cd(const RecipeRequest& req) {
  const double beta = 3.0, na1 = 0.011;
  const std::vector<double> e0 = linspace(15.0, 120.0, req.full_scale ? 16 : 10);
  const std::vector<double> zts = logspace(5.0, 2000.0, req.full_scale ? 12 : 8);
  const std::vector<int> orders = {1, 2, 3, 4, 5, 6};
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"panel", "axis_value", "zT_over_z0", "m", "doc_max", "d_at_max_over_zT"};
  out.config = {{"beta_abs", beta},
                {"photon_energy_eV", desk_homega1_eV},
                {"numerical_aperture", na1},
                {"kinetic_energy_keV", e0},
                {"zT_over_z0", zts},
                {"orders", orders}};
  const std::size_t count = e0.size() + zts.size();
  std::vector<std::vector<std::vector<double>>> blocks(count);
  out.problems.resize(count);
  run_points(count, req.workers, [&](std::size_t i) {
    DimensionlessProblem p;
    double panel, axis;
    if (i < e0.size()) {
      panel = 0.0;
      axis = e0[i];
      p = matched_problem_for_geometry(axis * 1e3, desk_homega1_eV, na1, beta);
    } else {
      panel = 1.0;
      axis = zts[i - e0.size()];
      p = matched_problem(1.0 / 3.0, beta, axis);
    }
    const EvolveResult run = evolve(p);
    const ResonantExtraction ex = extract_resonant(run.final_state);
    for (int m : orders) {
      const DocMax best = max_doc_over_distance(ex.spectrum, m);
      blocks[i].push_back({panel, axis, p.talbot_over_z0, static_cast<double>(m),
                           best.value, best.d_over_zT});
    }
    out.problems[i] = p;
  });
  for (auto& block : blocks) {
    for (auto& row : block) out.ds.rows.push_back(std::move(row));
  }
  return out;
}

RecipeOutput recipe_figS1(const RecipeRequest& req) {
  const double v = 1.0 / 3.0;
  const std::vector<double> betas = {1.4746, 2.9492}; // 1 and 2 kW/eV at v = c/3
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"beta_abs", "position_over_z0", "resonant_weight", "nonresonant_weight"};
  out.config = {{"v_over_c", v}, {"beta_abs", betas}, {"z0_Omega_over_v", 50.0}};
  std::vector<std::vector<std::vector<double>>> blocks(betas.size());
  out.problems.resize(betas.size());
  run_points(betas.size(), req.workers, [&](std::size_t i) {
    const DimensionlessProblem p =
        matched_problem(v, betas[i], std::numeric_limits<double>::infinity());
    EvolveOptions opts;
    opts.record_stride = 2;
    const EvolveResult run = evolve(p, opts);
    for (const auto& rec : run.trajectory) {
      blocks[i].push_back(
          {betas[i], rec.position_over_z0, rec.resonant_weight, rec.nonresonant_weight});
    }
    out.problems[i] = p;
  });
  for (auto& block : blocks) {
    for (auto& row : block) out.ds.rows.push_back(std::move(row));
  }
  return out;
}

RecipeOutput recipe_figS2(const RecipeRequest& req) {
  const double beta = 5.0, v = 1.0 / 3.0;
  const std::vector<double> zts = {0.0, 1000.0, 250.0, 50.0, 10.0}; // 0 encodes recoil off
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"zT_over_z0", "ell", "prob"};
  out.config = {{"beta_abs", beta}, {"v_over_c", v}, {"zT_over_z0", zts}};
  std::vector<std::vector<std::vector<double>>> blocks(zts.size());
  out.problems.resize(zts.size());
  run_points(zts.size(), req.workers, [&](std::size_t i) {
    const double talbot = zts[i] > 0.0 ? zts[i] : std::numeric_limits<double>::infinity();
    const DimensionlessProblem p = matched_problem(v, beta, talbot);
    const EvolveResult run = evolve(p);
    const ResonantExtraction ex = extract_resonant(run.final_state);
    for (int ell = -p.ell_max; ell <= p.ell_max; ++ell) {
      blocks[i].push_back({zts[i], static_cast<double>(ell),
                           ex.spectrum.prob(ell) * ex.resonant_weight});
    }
    out.problems[i] = p;
  });
  for (auto& block : blocks) {
    for (auto& row : block) out.ds.rows.push_back(std::move(row));
  }
  return out;
}

RecipeOutput recipe_figS3(const RecipeRequest& req) {
  const double e0_keV = 34.0, p_over = 0.5;
  const std::vector<double> nas = logspace(0.03, 0.5, req.full_scale ? 32 : 16);
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"numerical_aperture", "z0_k1", "delta_mismatch",
                    "supp_resonant",      "beta_abs", "beta_eff_abs"};
  out.config = {{"kinetic_energy_keV", e0_keV},
                {"photon_energy_eV", desk_homega1_eV},
                {"photon_energy2_eV", desk_homega1_eV / 2.0},
                {"p_over_homega1_kW_per_eV", p_over},
                {"numerical_aperture", nas}};
  out.ds.rows.resize(nas.size());
  out.problems.resize(nas.size());
  run_points(nas.size(), req.workers, [&](std::size_t i) {
    LabConfig lab;
    lab.kinetic_energy_eV = e0_keV * 1e3;
    const double power_W = p_over * desk_homega1_eV * 1e3;
    lab.beam1 = {desk_homega1_eV, nas[i], power_W, 0.0, +1};
    lab.beam2 = {desk_homega1_eV / 2.0, 0.0, power_W, 0.0, -1};
    const DimensionlessProblem p = reduce_to_dimensionless(lab);
    const PhaseIntegralResult pi = phase_integral(p);
    out.ds.rows[i] = {nas[i],
                      p.z0_k1(),
                      std::abs(p.delta1 - p.delta2),
                      pi.supp_resonant,
                      std::abs(p.beta()),
                      std::abs(pi.beta_eff)};
    out.problems[i] = p;
  });
  return out;
}

RecipeOutput recipe_figS5(const RecipeRequest& req) {
  (void)req;
  const double beta = 4.0, v = 1.0 / 3.0, zt = 30.0;
  const DimensionlessProblem p = matched_problem(v, beta, zt);
  const EvolveResult run = evolve(p);
  const ResonantExtraction ex = extract_resonant(run.final_state);
  const PhaseIntegralResult pi = phase_integral(p);
  const SidebandSpectrum analytic = comb_coefficients(
      std::complex<double>(0.0, beta * pi.finite_span_fraction), p.ell_max);
  RecipeOutput out;
  out.ds.name = req.name;
  out.ds.columns = {"ell", "prob_lattice", "prob_analytic_nonrecoil"};
  out.config = {{"beta_abs", beta}, {"v_over_c", v}, {"zT_over_z0", zt}};
  out.ds.meta["nonresonant_weight"] = ex.nonresonant_weight;
  for (int ell = -p.ell_max; ell <= p.ell_max; ++ell) {
    out.ds.rows.push_back({static_cast<double>(ell),
                           ex.spectrum.prob(ell) * ex.resonant_weight, analytic.prob(ell)});
  }
  out.problems.push_back(p);
  return out;
}

using RecipeFn = RecipeOutput (*)(const RecipeRequest&);

const std::vector<std::pair<std::string, RecipeFn>>& recipe_table() {
  static const std::vector<std::pair<std::string, RecipeFn>> table = {
      {"fig2a", recipe_fig2a},   {"fig2b", recipe_fig2b}, {"fig2c", recipe_fig2c},
      {"fig3ab", recipe_fig3ab}, {"fig3d", recipe_fig3d}, {"fig4a", recipe_fig4a},
      {"fig4b", recipe_fig4b},   {"fig4cd", recipe_fig4cd}, {"figS1", recipe_figS1},
      {"figS2", recipe_figS2},   {"figS3", recipe_figS3}, {"figS5", recipe_figS5},
  };
  return table;
}

} // namespace

std::vector<std::string> recipe_names() {
  std::vector<std::string> names;
  names.reserve(recipe_table().size());
  for (const auto& [name, fn] : recipe_table()) names.push_back(name);
  return names;
}

Dataset run_recipe(const RecipeRequest& req) {
  RecipeFn fn = nullptr;
  for (const auto& [name, candidate] : recipe_table()) {
    if (name == req.name) fn = candidate;
  }
  if (fn == nullptr) {
    std::string known;
    for (const auto& [name, candidate] : recipe_table()) {
      known += known.empty() ? name : ", " + name;
    }
    throw ConfigError("unknown recipe " + req.name + " (known: " + known + ")");
  }
  RecipeOutput out = fn(req);
  out.ds.meta["recipe"] = req.name;
  out.ds.meta["parameters"] = out.config;

  std::error_code ec;
  fs::create_directories(req.out_dir, ec);
  const fs::path dir(req.out_dir);
  const std::string csv = req.name + ".csv";
  const std::string records = req.name + ".records.json";
  write_dataset_csv((dir / csv).string(), out.ds);
  write_dataset_records((dir / records).string(), out.ds);

  RunManifest manifest;
  manifest.command = "recipe " + req.name;
  manifest.config = {{"recipe", req.name},
                     {"full_scale", req.full_scale},
                     {"workers", req.workers},
                     {"parameters", out.config},
                     {"problems", out.problems}};
  manifest.outputs = {{csv, 0, ""}, {records, 0, ""}};
  write_manifest((dir / (req.name + ".manifest.json")).string(), manifest);
  return out.ds;
}

} // namespace ecomb
