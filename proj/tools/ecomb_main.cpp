#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecomb/comb.hpp"
#include "ecomb/errors.hpp"
#include "ecomb/io.hpp"
#include "ecomb/kinematics.hpp"
#include "ecomb/lab_config.hpp"
#include "ecomb/lattice.hpp"
#include "ecomb/observables.hpp"
#include "ecomb/oracle.hpp"
#include "ecomb/recipes.hpp"
#include "ecomb/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ProblemFlags {
  std::string problem_path;
  double v_over_c = 1.0 / 3.0;
  double beta_abs = 1.0;
  double zT_over_z0 = 0.0; // 0 leaves recoil off
  double z0_omega_over_v = 50.0;
  ecomb::SolverNumerics numerics;
  double energy_keV = 0.0;
  double photon_eV = 0.0;
  double photon2_eV = 0.0; // 0 picks the phase-matched value
  double aperture = 0.0;
  double power_kW = 0.0;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& pf) {
  cmd->add_option("--problem", pf.problem_path,
                  "JSON file holding a dimensionless problem (the form stored in manifests)");
  cmd->add_option("--v-over-c", pf.v_over_c, "electron velocity / c");
  cmd->add_option("--beta", pf.beta_abs, "dimensionless coupling |beta|")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--zT", pf.zT_over_z0, "Talbot distance in Rayleigh ranges, 0 = recoil off")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--z0-omega-over-v", pf.z0_omega_over_v,
                  "envelope adiabaticity z0 Omega / v for matched problems");
  cmd->add_option("--span", pf.numerics.span_over_z0, "interaction span in Rayleigh ranges");
  cmd->add_option("--slices", pf.numerics.slice_count, "number of envelope slices");
  cmd->add_option("--lmax", pf.numerics.ell_max, "sideband truncation order");
  cmd->add_option("--energy-keV", pf.energy_keV,
                  "electron kinetic energy; switches to the laboratory route");
  cmd->add_option("--photon-eV", pf.photon_eV, "beam-1 photon energy (laboratory route)");
  cmd->add_option("--photon2-eV", pf.photon2_eV,
                  "beam-2 photon energy; omit for the phase-matched value");
  cmd->add_option("--na", pf.aperture, "beam-1 numerical aperture (laboratory route)");
  cmd->add_option("--power-kW", pf.power_kW, "per-beam focal power (laboratory route)");
}

ecomb::DimensionlessProblem resolve_problem(const ProblemFlags& pf) {
  if (!pf.problem_path.empty()) {
    std::ifstream in(pf.problem_path);
    if (!in) throw ecomb::IoError("cannot open problem file " + pf.problem_path);
    json j;
    in >> j;
    return j.get<ecomb::DimensionlessProblem>();
  }
  if (pf.energy_keV > 0.0) {
    if (pf.photon_eV <= 0.0 || pf.aperture <= 0.0 || pf.power_kW <= 0.0) {
      throw ecomb::ConfigError(
          "laboratory route needs --photon-eV, --na and --power-kW along with --energy-keV");
    }
    ecomb::LabConfig lab;
    lab.kinetic_energy_eV = pf.energy_keV * 1e3;
    const ecomb::Kinematics kin = ecomb::electron_kinematics(lab.kinetic_energy_eV);
    const ecomb::PhaseMatch pm = ecomb::phase_matched_omega2(pf.photon_eV, kin.v_over_c);
    const double omega2 = pf.photon2_eV > 0.0 ? pf.photon2_eV : pm.omega2_eV;
    lab.beam1 = {pf.photon_eV, pf.aperture, pf.power_kW * 1e3, 0.0, +1};
    lab.beam2 = {omega2, 0.0, pf.power_kW * 1e3, 0.0, -1};
    return ecomb::reduce_to_dimensionless(lab, pf.numerics);
  }
  const double talbot =
      pf.zT_over_z0 > 0.0 ? pf.zT_over_z0 : std::numeric_limits<double>::infinity();
  return ecomb::matched_problem(pf.v_over_c, pf.beta_abs, talbot, pf.z0_omega_over_v,
                                pf.numerics);
}

struct EvolveFlags {
  std::string backend = "strang";
  std::string mismatch = "detuning-sum";
  int record_stride = 0;
  double krylov_tol = 1e-12;
};

void add_evolve_flags(CLI::App* cmd, EvolveFlags& ef) {
  cmd->add_option("--backend", ef.backend, "propagator backend")
      ->check(CLI::IsMember({"krylov", "dense", "strang"}));
  cmd->add_option("--mismatch", ef.mismatch, "diagonal dephasing form")
      ->check(CLI::IsMember({"detuning-sum", "index-difference"}));
  cmd->add_option("--record-stride", ef.record_stride, "trajectory snapshot stride in slices");
  cmd->add_option("--krylov-tol", ef.krylov_tol, "per-slice Krylov error budget");
}

ecomb::EvolveOptions resolve_evolve(const EvolveFlags& ef) {
  ecomb::EvolveOptions opts;
  if (ef.backend == "dense") opts.backend = ecomb::PropagatorBackend::dense_pade;
  if (ef.backend == "strang") opts.backend = ecomb::PropagatorBackend::strang_split;
  if (ef.mismatch == "index-difference") opts.mismatch = ecomb::MismatchForm::index_difference;
  opts.record_stride = ef.record_stride;
  opts.krylov_tol = ef.krylov_tol;
  return opts;
}

struct OracleFlags {
  int nx = 0;
  double dt = 0.0;
  int window_multiple = 1;
  int max_denominator = 64;
};

void add_oracle_flags(CLI::App* cmd, OracleFlags& of) {
  cmd->add_option("--nx", of.nx, "grid points for the reference solver (0 = automatic)");
  cmd->add_option("--dt", of.dt, "time step for the reference solver (0 = automatic)");
  cmd->add_option("--window", of.window_multiple, "periodic window size in beat periods");
  cmd->add_option("--max-denominator", of.max_denominator,
                  "largest denominator accepted when rationalizing omega2/omega1");
}

ecomb::OracleGrid resolve_oracle(const OracleFlags& of) {
  ecomb::OracleGrid grid;
  grid.spatial_points = of.nx;
  grid.time_step = of.dt;
  grid.window_multiple = of.window_multiple;
  grid.max_denominator = of.max_denominator;
  return grid;
}

void print_spectrum(const ecomb::SidebandSpectrum& s) {
  std::printf("# columns ell re_amp im_amp prob\n");
  for (int ell = -s.ell_max; ell <= s.ell_max; ++ell) {
    const std::complex<double> a = s.at(ell);
    std::printf("%d %.17g %.17g %.17g\n", ell, a.real(), a.imag(), s.prob(ell));
  }
}

void write_point_dataset(const std::string& out_dir, const std::string& name,
                         ecomb::Dataset ds, const std::string& command, json config) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path dir(out_dir);
  ds.name = name;
  const std::string csv = name + ".csv";
  const std::string records = name + ".records.json";
  ecomb::write_dataset_csv((dir / csv).string(), ds);
  ecomb::write_dataset_records((dir / records).string(), ds);
  ecomb::RunManifest manifest;
  manifest.command = command;
  manifest.config = std::move(config);
  manifest.outputs = {{csv, 0, ""}, {records, 0, ""}};
  ecomb::write_manifest((dir / (name + ".manifest.json")).string(), manifest);
}

int run_recipe_cmd(const std::string& name, const std::string& out_dir, int workers,
                   bool full_scale, bool list) {
  if (list) {
    for (const auto& n : ecomb::recipe_names()) std::printf("%s\n", n.c_str());
    return 0;
  }
  if (name.empty()) throw ecomb::ConfigError("recipe name required (or use --list)");
  ecomb::RecipeRequest req;
  req.name = name;
  req.out_dir = out_dir;
  req.workers = workers;
  req.full_scale = full_scale;
  const ecomb::Dataset ds = ecomb::run_recipe(req);
  std::printf("recipe %s: %zu rows -> %s/%s.{csv,records.json,manifest.json}\n", name.c_str(),
              ds.rows.size(), out_dir.c_str(), name.c_str());
  return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir, int workers) {
  std::ifstream in(config_path);
  if (!in) throw ecomb::IoError("cannot open sweep config " + config_path);
  json j;
  in >> j;
  ecomb::SweepConfig cfg = ecomb::parse_sweep_config(j);
  if (workers > 0) cfg.workers = workers;
  const ecomb::SweepOutcome outcome = ecomb::run_sweep(cfg);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path dir(out_dir);
  const std::string csv = cfg.name + ".csv";
  const std::string records = cfg.name + ".records.json";
  ecomb::write_dataset_csv((dir / csv).string(), outcome.dataset);
  ecomb::write_dataset_records((dir / records).string(), outcome.dataset);
  ecomb::RunManifest manifest;
  manifest.command = "sweep " + config_path;
  manifest.config = {{"sweep", j}, {"problems", outcome.problems}};
  manifest.outputs = {{csv, 0, ""}, {records, 0, ""}};
  ecomb::write_manifest((dir / (cfg.name + ".manifest.json")).string(), manifest);
  std::printf("sweep %s: %zu rows -> %s/%s.{csv,records.json,manifest.json}\n",
              cfg.name.c_str(), outcome.dataset.rows.size(), out_dir.c_str(), cfg.name.c_str());
  return 0;
}

int run_oracle_check(const ProblemFlags& pf, const EvolveFlags& ef, const OracleFlags& of,
                     double tol, const std::string& out_dir) {
  const ecomb::DimensionlessProblem p = resolve_problem(pf);
  const ecomb::EvolveResult run = ecomb::evolve(p, resolve_evolve(ef));
  const ecomb::ResonantExtraction lattice = ecomb::extract_resonant(run.final_state);
  const ecomb::OracleResult oracle = ecomb::evolve_reference(p, resolve_oracle(of));
  const ecomb::SpectrumDistance dist =
      ecomb::compare_spectra(lattice.spectrum, oracle.spectrum);

  std::printf("problem: v/c=%.6g |beta|=%.6g zT/z0=%.6g lmax=%d slices=%d span=%g\n",
              p.v_over_c, std::abs(p.beta()), p.talbot_over_z0, p.ell_max, p.slice_count,
              p.span_over_z0);
  std::printf("reference grid: nx=%d nt=%d window ratio %d/%d\n", oracle.spatial_points,
              oracle.time_steps, oracle.ratio_num, oracle.ratio_den);
  std::printf("lattice:   sigma=%.8g resonant=%.8g nonresonant=%.3g\n",
              ecomb::sideband_sigma(lattice.spectrum), lattice.resonant_weight,
              lattice.nonresonant_weight);
  std::printf("reference: sigma=%.8g resonant=%.8g nonresonant=%.3g drift=%.3g\n",
              ecomb::sideband_sigma(oracle.spectrum), oracle.resonant_weight,
              oracle.nonresonant_weight, oracle.norm_drift);
  std::printf("distance:  l2_phase_min=%.6g tv_prob=%.6g max_prob_dev=%.6g\n",
              dist.l2_phase_min, dist.tv_prob, dist.max_prob_dev);

  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path dir(out_dir);
    ecomb::write_spectrum_file((dir / "lattice.spectrum").string(), lattice.spectrum);
    ecomb::write_spectrum_file((dir / "reference.spectrum").string(), oracle.spectrum);
    json report = {{"l2_phase_min", dist.l2_phase_min},
                   {"tv_prob", dist.tv_prob},
                   {"max_prob_dev", dist.max_prob_dev},
                   {"lattice_nonresonant", lattice.nonresonant_weight},
                   {"reference_nonresonant", oracle.nonresonant_weight},
                   {"reference_norm_drift", oracle.norm_drift},
                   {"problem", p}};
    std::ofstream rep(dir / "report.json");
    if (!rep) throw ecomb::IoError("cannot write oracle report");
    rep << report.dump(1, '\t') << "\n";
    ecomb::RunManifest manifest;
    manifest.command = "oracle-check";
    manifest.config = {{"problem", p}};
    manifest.outputs = {{"lattice.spectrum", 0, ""},
                        {"reference.spectrum", 0, ""},
                        {"report.json", 0, ""}};
    ecomb::write_manifest((dir / "oracle-check.manifest.json").string(), manifest);
  }
  if (tol > 0.0 && dist.l2_phase_min > tol) {
    std::printf("FAIL l2_phase_min %.6g exceeds tolerance %.6g\n", dist.l2_phase_min, tol);
    return 1;
  }
  if (tol > 0.0) std::printf("PASS l2_phase_min %.6g within %.6g\n", dist.l2_phase_min, tol);
  return 0;
}

int run_doc_scan(const ProblemFlags& pf, const EvolveFlags& ef, bool analytic, int order,
                 int points, const std::string& out_dir, const std::string& name) {
  ecomb::Dataset ds;
  ds.columns = {"d_over_zT", "m", "doc"};
  json config;
  double best_d = 0.0, best_v = 0.0;
  if (analytic) {
    const int lmax = pf.numerics.ell_max;
    const ecomb::SidebandSpectrum s =
        ecomb::comb_coefficients(std::complex<double>(0.0, pf.beta_abs), lmax);
    for (int k = 0; k < points; ++k) {
      const double d = static_cast<double>(k) / points;
      ds.rows.push_back({d, static_cast<double>(order), ecomb::doc(s, d, order)});
    }
    const ecomb::DocMax mx = ecomb::max_doc_over_distance(s, order, points);
    best_d = mx.d_over_zT;
    best_v = mx.value;
    config = {{"solver", "analytic"}, {"beta_abs", pf.beta_abs}, {"ell_max", s.ell_max}};
  } else {
    const ecomb::DimensionlessProblem p = resolve_problem(pf);
    const ecomb::EvolveResult run = ecomb::evolve(p, resolve_evolve(ef));
    const ecomb::ResonantExtraction ex = ecomb::extract_resonant(run.final_state);
    const ecomb::DocDistanceScan scan = ecomb::doc_after_exit(ex.spectrum, order, points);
    for (std::size_t i = 0; i < scan.d_over_zT.size(); ++i) {
      ds.rows.push_back({scan.d_over_zT[i], static_cast<double>(order), scan.value[i]});
    }
    best_d = scan.best.d_over_zT;
    best_v = scan.best.value;
    config = {{"solver", "lattice"}, {"problem", p}};
  }
  std::printf("max DOC_%d = %.8g at d/z_T = %.8g\n", order, best_v, best_d);
  if (!out_dir.empty()) {
    ds.meta = {{"order", order}, {"config", config}};
    write_point_dataset(out_dir, name, std::move(ds), "doc-scan",
                        {{"order", order}, {"points", points}, {"config", config}});
  }
  return 0;
}

int run_spectrum(const ProblemFlags& pf, const EvolveFlags& ef, const OracleFlags& of,
                 const std::string& solver, const std::string& out_file) {
  ecomb::SidebandSpectrum s;
  if (solver == "analytic") {
    s = ecomb::comb_coefficients(std::complex<double>(0.0, pf.beta_abs), pf.numerics.ell_max);
  } else if (solver == "lattice") {
    const ecomb::DimensionlessProblem p = resolve_problem(pf);
    std::printf("problem: |beta|=%.6g zT/z0=%.6g lmax=%d\n", std::abs(p.beta()),
                p.talbot_over_z0, p.ell_max);
    const ecomb::EvolveResult run = ecomb::evolve(p, resolve_evolve(ef));
    const ecomb::ResonantExtraction ex = ecomb::extract_resonant(run.final_state);
    s = ex.spectrum;
    s.raw_weight = ex.resonant_weight;
    s.provenance = "lattice";
  } else {
    const ecomb::DimensionlessProblem p = resolve_problem(pf);
    std::printf("problem: |beta|=%.6g zT/z0=%.6g lmax=%d\n", std::abs(p.beta()),
                p.talbot_over_z0, p.ell_max);
    s = ecomb::evolve_reference(p, resolve_oracle(of)).spectrum;
  }
  std::printf("sigma = %.10g, sidebands to |l| = %d, captured weight %.10g\n",
              ecomb::sideband_sigma(s), s.ell_max, s.raw_weight);
  if (out_file.empty()) {
    print_spectrum(s);
  } else {
    ecomb::write_spectrum_file(out_file, s);
    std::printf("wrote %s\n", out_file.c_str());
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-space optical modulation of free electrons: comb, lattice and "
               "grid solvers with shared datasets"};
  app.require_subcommand(1);
  int exit_code = 0;

  auto* recipe = app.add_subcommand("recipe", "run a canned experiment and write datasets");
  std::string recipe_name, recipe_out = ".";
  int recipe_workers = 1;
  bool recipe_full = false, recipe_list = false;
  recipe->add_option("name", recipe_name, "experiment name");
  recipe->add_option("--out", recipe_out, "output directory");
  recipe->add_option("--workers", recipe_workers, "worker threads");
  recipe->add_flag("--full-scale", recipe_full, "publication-size grids");
  recipe->add_flag("--list", recipe_list, "list experiment names");
  recipe->callback([&] {
    exit_code = run_recipe_cmd(recipe_name, recipe_out, recipe_workers, recipe_full,
                               recipe_list);
  });

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a JSON config");
  std::string sweep_config, sweep_out = ".";
  int sweep_workers = 0;
  sweep->add_option("config", sweep_config, "sweep configuration file")->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--workers", sweep_workers, "worker threads (overrides config)");
  sweep->callback([&] { exit_code = run_sweep_cmd(sweep_config, sweep_out, sweep_workers); });

  auto* oracle = app.add_subcommand(
      "oracle-check", "compare the slice solver against the independent grid solver");
  ProblemFlags oracle_pf;
  EvolveFlags oracle_ef;
  OracleFlags oracle_of;
  double oracle_tol = 0.0;
  std::string oracle_out;
  add_problem_flags(oracle, oracle_pf);
  add_evolve_flags(oracle, oracle_ef);
  add_oracle_flags(oracle, oracle_of);
  oracle->add_option("--tol", oracle_tol, "fail when the phase-minimized L2 distance exceeds this");
  oracle->add_option("--out", oracle_out, "directory for spectra and the comparison report");
  oracle->callback([&] {
    exit_code = run_oracle_check(oracle_pf, oracle_ef, oracle_of, oracle_tol, oracle_out);
  });

  auto* docscan = app.add_subcommand("doc-scan", "degree of coherence versus drift distance");
  ProblemFlags doc_pf;
  EvolveFlags doc_ef;
  bool doc_analytic = false;
  int doc_order = 1, doc_points = 2048;
  std::string doc_out, doc_name = "doc-scan";
  add_problem_flags(docscan, doc_pf);
  add_evolve_flags(docscan, doc_ef);
  docscan->add_flag("--analytic", doc_analytic, "recoil-free comb instead of the slice solver");
  docscan->add_option("--order", doc_order, "harmonic order m");
  docscan->add_option("--points", doc_points, "scan points per Talbot period");
  docscan->add_option("--out", doc_out, "output directory for the dataset");
  docscan->add_option("--name", doc_name, "dataset name");
  docscan->callback([&] {
    exit_code = run_doc_scan(doc_pf, doc_ef, doc_analytic, doc_order, doc_points, doc_out,
                             doc_name);
  });

  auto* spectrum = app.add_subcommand("spectrum", "compute a sideband spectrum");
  ProblemFlags spec_pf;
  EvolveFlags spec_ef;
  OracleFlags spec_of;
  std::string spec_solver = "analytic", spec_out;
  add_problem_flags(spectrum, spec_pf);
  add_evolve_flags(spectrum, spec_ef);
  add_oracle_flags(spectrum, spec_of);
  spectrum->add_option("--solver", spec_solver, "spectrum source")
      ->check(CLI::IsMember({"analytic", "lattice", "reference"}));
  spectrum->add_option("--out", spec_out, "columnar output file (stdout when omitted)");
  spectrum->callback([&] {
    exit_code = run_spectrum(spec_pf, spec_ef, spec_of, spec_solver, spec_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ecomb::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ecomb::ConvergenceError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const ecomb::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return exit_code;
}
