// End-to-end gate for the simulator: ten numbered checks covering the
// analytic comb, the compression map, the recoil lattice, the reference PDE
// solver, structural invariants, and reproducibility. Each check prints one
// PASS/FAIL line; the process exits nonzero if any fail.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ecomb/comb.hpp"
#include "ecomb/io.hpp"
#include "ecomb/lattice.hpp"
#include "ecomb/observables.hpp"
#include "ecomb/oracle.hpp"
#include "ecomb/propagator.hpp"
#include "ecomb/sweep.hpp"

using namespace ecomb;
using cplx = std::complex<double>;
namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    notes.push_back(std::string(cond ? "    ok   " : "    BAD  ") + buf);
    ok = ok && cond;
  }

  void note(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    notes.push_back(std::string("         ") + buf);
  }
};

SidebandSpectrum lattice_spectrum(const DimensionlessProblem& p,
                                  const EvolveOptions& opts = {}) {
  return extract_resonant(evolve(p, opts).final_state).spectrum;
}

double interp_crossing(const std::vector<double>& x, const std::vector<double>& f,
                       double level) {
  // First upward crossing of f through level, linear between grid points.
  for (std::size_t i = 1; i < x.size(); ++i) {
    if ((f[i - 1] - level) * (f[i] - level) <= 0.0 && f[i] != f[i - 1]) {
      const double t = (level - f[i - 1]) / (f[i] - f[i - 1]);
      return x[i - 1] + t * (x[i] - x[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// 1. Analytic sideband combs: unit norm and width sqrt(2)|beta|.
Check check_comb_widths() {
  Check c;
  const double norm_tol = 1e-10;
  const double sigma_tol = 1e-6;
  for (const double b : {0.5, 1.0, 2.0, 5.0, 12.5}) {
    const SidebandSpectrum s = comb_coefficients(cplx(0.0, b));
    const double norm_defect = std::abs(s.norm_sq() - 1.0);
    const double sigma_defect = std::abs(sideband_sigma(s) - std::sqrt(2.0) * b);
    c.require(norm_defect < norm_tol, "|beta| %-5.3g  norm defect %.2e  (tol %.0e)", b,
              norm_defect, norm_tol);
    c.require(sigma_defect < sigma_tol, "|beta| %-5.3g  width defect %.2e (tol %.0e)", b,
              sigma_defect, sigma_tol);
  }
  return c;
}

// 2. Compression map of the recoil-free comb: location and height of the
// first-harmonic optimum, and the closed form against the defining
// autocorrelation across a coupling/distance/order grid.
Check check_compression_map() {
  Check c;
  const SidebandSpectrum unit = comb_coefficients(cplx(0.0, 1.0));
  const DocMax best = max_doc_over_distance(unit, 1);
  c.require(std::abs(best.value - 0.34) <= 0.01, "peak DOC_1 %.6f within 0.34 +- 0.01",
            best.value);
  c.require(std::abs(best.d_over_zT - 0.076) <= 0.003,
            "optimum at d/z_T %.6f within 0.076 +- 0.003", best.d_over_zT);

  double worst = 0.0;
  for (const double b : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    const SidebandSpectrum s = comb_coefficients(cplx(0.0, b));
    for (const double d : {0.03, 0.076, 0.2, 0.31, 0.45}) {
      for (int m = 1; m <= 3; ++m) {
        worst = std::max(worst,
                         std::abs(doc(s, d, m) - doc_nonrecoil_closed_form(b, d, m)));
      }
    }
  }
  c.require(worst < 1e-8, "closed form vs autocorrelation, worst |diff| %.2e (tol 1e-8)",
            worst);
  return c;
}

// 3. Recoil-free lattice propagation collapses onto the analytic comb once
// the finite envelope span is accounted for.
Check check_lattice_matches_comb() {
  Check c;
  const double tol = 1e-3;
  for (const double b : {1.0, 5.0, 12.5}) {
    const DimensionlessProblem p = matched_problem(1.0 / 3.0, b, inf);
    c.require(p.ell_max <= 40 && p.slice_count >= 400, "|beta| %-5.3g  lmax %d  slices %d",
              b, p.ell_max, p.slice_count);
    const SidebandSpectrum got = lattice_spectrum(p);
    const double frac = phase_integral(p).finite_span_fraction;
    const SidebandSpectrum want = comb_coefficients(cplx(0.0, b * frac), p.ell_max);
    const double l2 = compare_spectra(got, want).l2_phase_min;
    c.require(l2 < tol, "|beta| %-5.3g  phase-min L2 %.2e (tol %.0e)", b, l2, tol);
  }
  return c;
}

// 4. Strong coupling with recoil: the ladder saturates near the recoil
// cutoff instead of spreading to the recoil-free width.
Check check_recoil_truncation() {
  Check c;
  const double beta = 12.5;
  const double talbot = 50.0;
  const DimensionlessProblem p = matched_problem(1.0 / 3.0, beta, talbot);
  const SidebandSpectrum s = lattice_spectrum(p);
  const double sigma = sideband_sigma(s);
  const double free_width = std::sqrt(2.0) * beta;
  c.require(sigma < free_width, "sigma %.4f stays below sqrt(2)|beta| = %.4f", sigma,
            free_width);
  c.note("recoil cutoff sqrt(z_T/z0) = %.3f", std::sqrt(talbot));
  double tail = 0.0;
  for (int l = -s.ell_max; l <= s.ell_max; ++l) {
    if (std::abs(l) > 10) tail += s.prob(l);
  }
  c.require(tail < 0.05, "occupation beyond |l| = 10 is %.2e (tol 0.05)", tail);
  return c;
}

// 5. Energy scan at pinned coupling: the measured width leaves the
// recoil-free value where that value meets the recoil cutoff.
Check check_departure_energy() {
  Check c;
  const double beta = 4.2426406871192848;
  const double free_width = std::sqrt(2.0) * beta;
  const int points = 16;
  std::vector<double> e_keV(points), sigma(points), cutoff(points);
  for (int i = 0; i < points; ++i) {
    e_keV[i] = 10.0 + (120.0 - 10.0) * i / (points - 1);
    const DimensionlessProblem p =
        matched_problem_for_geometry(e_keV[i] * 1e3, 2.0, 0.011, beta);
    sigma[i] = sideband_sigma(lattice_spectrum(p));
    cutoff[i] = std::sqrt(p.talbot_over_z0);
  }
  const double e_predicted = interp_crossing(e_keV, cutoff, free_width);
  const double e_measured = interp_crossing(e_keV, sigma, free_width / M_E);
  c.note("grid %g..%g keV, sigma %.3f..%.3f, cutoff %.3f..%.3f", e_keV.front(),
         e_keV.back(), sigma.front(), sigma.back(), cutoff.front(), cutoff.back());
  c.require(std::isfinite(e_predicted) && std::isfinite(e_measured),
            "cutoff crossing at %.1f keV, width falls to (1/e) sqrt(2)|beta| at %.1f keV",
            e_predicted, e_measured);
  if (std::isfinite(e_predicted) && std::isfinite(e_measured)) {
    const double ratio = std::max(e_measured / e_predicted, e_predicted / e_measured);
    c.require(ratio <= 1.5, "energies agree within factor %.2f (tol 1.5)", ratio);
  }
  return c;
}

// 6. Compression with recoil at z_T/z0 = 13.3: scanning the coupling, the
// post-exit first-harmonic optimum exceeds the recoil-free bound and reaches
// 0.66 +- 0.05 at a drift of 0.31 +- 0.03 Talbot distances.
Check check_recoil_enhanced_compression() {
  Check c;
  const double talbot = 13.3;
  double best_value = -1.0;
  double best_d = 0.0;
  double best_beta = 0.0;
  for (double b = 1.2; b <= 2.2 + 1e-9; b += 0.1) {
    const DimensionlessProblem p = matched_problem(1.0 / 3.0, b, talbot);
    const DocMax peak = max_doc_over_distance(lattice_spectrum(p), 1);
    if (peak.value > best_value) {
      best_value = peak.value;
      best_d = peak.d_over_zT;
      best_beta = b;
    }
  }
  c.note("scan peak at |beta| = %.2f: DOC_1 = %.6f at d/z_T = %.6f", best_beta,
         best_value, best_d);
  c.require(best_value > 0.34, "peak DOC_1 %.4f exceeds the recoil-free optimum 0.34",
            best_value);
  c.require(std::abs(best_value - 0.66) <= 0.05, "peak DOC_1 %.4f within 0.66 +- 0.05",
            best_value);
  c.require(std::abs(best_d - 0.31) <= 0.03, "optimum drift %.4f within 0.31 +- 0.03",
            best_d);
  return c;
}

// 7. Adiabatic envelopes: with z0 Omega / v = 50 the sum-frequency channel
// stays below one percent of the beat channel through the whole passage.
Check check_nonresonant_floor() {
  Check c;
  for (const double b : {1.4746, 2.9492}) {
    DimensionlessProblem p = matched_problem(1.0 / 3.0, b, inf);
    EvolveOptions opts;
    opts.record_stride = std::max(1, p.slice_count / 64);
    const EvolveResult run = evolve(p, opts);
    double worst = 0.0;
    for (const auto& rec : run.trajectory) {
      if (rec.resonant_weight > 0.0) {
        worst = std::max(worst, rec.nonresonant_weight / rec.resonant_weight);
      }
    }
    c.require(worst < 0.01,
              "|beta| %-6.4g  max nonresonant/resonant %.2e over %zu records (tol 0.01)",
              b, worst, run.trajectory.size());
  }
  return c;
}

// 8. Coupled-mode lattice against the split-step reference on three regimes:
// weak coupling, moderate coupling with recoil, and a detuned beam pair.
// Grid refinement on both solvers documents convergence.
Check check_reference_agreement() {
  Check c;
  const double tol = 1e-2;

  struct Point {
    std::string name;
    DimensionlessProblem problem;
  };
  std::vector<Point> points;

  SolverNumerics weak_num;
  weak_num.ell_max = 8;
  points.push_back({"weak coupling", matched_problem(1.0 / 3.0, 0.3, inf, 50.0, weak_num)});
  points.push_back({"recoil", matched_problem(1.0 / 3.0, 2.0, 50.0)});

  LabConfig lab;
  lab.kinetic_energy_eV = 34e3;
  lab.beam1 = {2.0, 0.245, 4000.0, 0.0, +1};
  lab.beam2 = {1.0, 0.0, 4000.0, 0.0, -1};
  points.push_back({"detuned pair", reduce_to_dimensionless(lab)});

  for (const auto& [name, p] : points) {
    const SidebandSpectrum lat = lattice_spectrum(p);
    const OracleResult ref = evolve_reference(p);
    const double l2 = compare_spectra(lat, ref.spectrum).l2_phase_min;
    c.require(l2 < tol, "%-13s phase-min L2 %.2e (tol %.0e)", name.c_str(), l2, tol);

    OracleGrid fine;
    fine.spatial_points = 2 * ref.spatial_points;
    fine.time_step = M_PI / 128.0;
    const OracleResult ref_fine = evolve_reference(p, fine);
    DimensionlessProblem dense_slices = p;
    dense_slices.slice_count = 2 * p.slice_count;
    const SidebandSpectrum lat_fine = lattice_spectrum(dense_slices);
    c.note("%-13s refinement: reference %.2e, lattice %.2e, cross %.2e", name.c_str(),
           compare_spectra(ref_fine.spectrum, ref.spectrum).l2_phase_min,
           compare_spectra(lat_fine, lat).l2_phase_min,
           compare_spectra(lat_fine, ref_fine.spectrum).l2_phase_min);
    const double l2_fine = compare_spectra(lat_fine, ref_fine.spectrum).l2_phase_min;
    c.require(l2_fine < tol, "%-13s refined grids stay within %.2e (tol %.0e)",
              name.c_str(), l2_fine, tol);
  }
  return c;
}

// 9. Structural invariants: Hermitian slice generators, unitary propagators,
// refinement stability, the coherence quadrature identity, and exact
// rephasing periodicity.
Check check_structural_invariants() {
  Check c;

  SolverNumerics op_num;
  op_num.ell_max = 5;
  op_num.slice_count = 240;
  const DimensionlessProblem p = matched_problem(1.0 / 3.0, 1.5, 30.0, 8.0, op_num);
  double herm = 0.0;
  double unit = 0.0;
  for (int n = 0; n < p.slice_count; ++n) {
    const SliceOperator op = build_slice_matrix(p, n);
    const Eigen::MatrixXcd m = op.dense();
    herm = std::max(herm, (m - m.adjoint()).cwiseAbs().maxCoeff());
    const Eigen::MatrixXcd u = hermitian_propagator(m, op.width);
    const int dim = op.shape.dim();
    unit = std::max(unit,
                    (u.adjoint() * u - Eigen::MatrixXcd::Identity(dim, dim)).operatorNorm());
  }
  c.require(herm < 1e-13, "slice generators Hermitian to %.2e over %d slices (tol 1e-13)",
            herm, p.slice_count);
  c.require(unit < 1e-10, "slice propagators unitary to %.2e (tol 1e-10)", unit);

  // Refinement drift must sit well below the 1e-3 and 1e-2 tolerances of the
  // cross-validation checks, so those comparisons cannot hinge on the grid.
  SolverNumerics num;
  num.ell_max = 12;
  num.slice_count = 400;
  const DimensionlessProblem q = matched_problem(1.0 / 3.0, 0.8, 30.0, 50.0, num);
  const SidebandSpectrum base = lattice_spectrum(q);
  DimensionlessProblem fine = q;
  fine.slice_count *= 2;
  const double slice_drift = compare_spectra(lattice_spectrum(fine), base).l2_phase_min;
  c.require(slice_drift < 1e-4, "slice refinement moves the spectrum by %.2e (tol 1e-4)",
            slice_drift);
  SolverNumerics wide_num = num;
  wide_num.ell_max += 5;
  const DimensionlessProblem wide =
      matched_problem(1.0 / 3.0, 0.8, 30.0, 50.0, wide_num);
  const double trunc_drift = compare_spectra(lattice_spectrum(wide), base).l2_phase_min;
  c.require(trunc_drift < 1e-6, "truncation margin moves the spectrum by %.2e (tol 1e-6)",
            trunc_drift);

  std::mt19937 gen(1234);
  std::normal_distribution<double> dist;
  SidebandSpectrum rnd = SidebandSpectrum::zeros(6);
  double norm = 0.0;
  for (auto& a : rnd.amp) {
    a = cplx(dist(gen), dist(gen));
    norm += std::norm(a);
  }
  for (auto& a : rnd.amp) a /= std::sqrt(norm);
  double doc_dev = 0.0;
  for (const double d : {0.05, 0.31, 0.8}) {
    const PropagatedComb pc = propagate_comb(rnd, d);
    const int n = 8 * pc.ell_max + 7;
    const DensityProfile dp = density_profile(pc, n);
    for (int m = 1; m <= 3; ++m) {
      cplx im{0.0, 0.0};
      cplx i0{0.0, 0.0};
      for (int k = 0; k < n; ++k) {
        im += dp.value[k] * std::polar(1.0, m * dp.x(k));
        i0 += dp.value[k];
      }
      doc_dev = std::max(doc_dev, std::abs(doc_from_comb(pc, m) - std::norm(im / i0)));
    }
  }
  c.require(doc_dev < 1e-9, "coherence autocorrelation vs quadrature %.2e (tol 1e-9)",
            doc_dev);

  bool periodic = true;
  const SidebandSpectrum comb = comb_coefficients(cplx(0.0, 1.3), 14);
  for (const int k : {3, 257, 1001}) {
    const PropagatedComb a = propagate_comb(comb, k / 1024.0);
    const PropagatedComb b = propagate_comb(comb, k / 1024.0 + 1.0);
    for (int l = -comb.ell_max; l <= comb.ell_max; ++l) {
      periodic = periodic && (a.at(l) == b.at(l));
    }
  }
  c.require(periodic, "rephasing after one Talbot distance is bitwise exact");
  return c;
}

// 10. Reproducibility: sweep outputs are byte-identical across worker counts
// and across repeated runs.
Check check_sweep_determinism() {
  Check c;
  const nlohmann::json config = {
      {"name", "det"},
      {"solver", "lattice"},
      {"base",
       {{"v_over_c", 1.0 / 3.0}, {"talbot_over_z0", 40.0}, {"ell_max", 8}}},
      {"axes", nlohmann::json::array(
                   {{{"name", "beta_abs"}, {"values", {0.8, 1.3}}},
                    {{"name", "span_over_z0"}, {"values", {20.0, 24.0, 30.0}}}})},
      {"observables", {"sigma", "doc1_max", "nonresonant_weight"}},
  };

  const fs::path dir = fs::temp_directory_path() /
                       ("ecomb_acceptance_" + std::to_string(static_cast<long>(::getpid())));
  fs::remove_all(dir);
  fs::create_directories(dir);

  const auto emit = [&](int workers, const std::string& tag) {
    SweepConfig cfg = parse_sweep_config(config);
    cfg.workers = workers;
    const SweepOutcome out = run_sweep(cfg);
    write_dataset_csv((dir / (tag + ".csv")).string(), out.dataset);
    write_dataset_records((dir / (tag + ".records.json")).string(), out.dataset);
  };
  const auto slurp = [](const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
  };

  emit(1, "serial");
  emit(4, "threaded");
  emit(4, "repeat");
  const bool csv_equal = slurp(dir / "serial.csv") == slurp(dir / "threaded.csv");
  const bool rec_equal =
      slurp(dir / "serial.records.json") == slurp(dir / "threaded.records.json");
  const bool rerun_equal = slurp(dir / "threaded.csv") == slurp(dir / "repeat.csv");
  c.require(csv_equal, "serial and threaded sweeps emit identical csv bytes");
  c.require(rec_equal, "serial and threaded sweeps emit identical record bytes");
  c.require(rerun_equal, "repeated threaded sweep emits identical bytes");
  fs::remove_all(dir);
  return c;
}

} // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Check()> run;
    double budget_s; // 0 disables the wall-clock gate
  };
  const std::vector<Entry> entries = {
      {"analytic comb norm and width", check_comb_widths, 1.0},
      {"compression map closed form", check_compression_map, 5.0},
      {"recoil-free lattice matches comb", check_lattice_matches_comb, 300.0},
      {"recoil truncates strong coupling", check_recoil_truncation, 0.0},
      {"width departure tracks recoil cutoff", check_departure_energy, 0.0},
      {"recoil-enhanced compression scan", check_recoil_enhanced_compression, 0.0},
      {"nonresonant channel stays adiabatic", check_nonresonant_floor, 0.0},
      {"lattice agrees with reference solver", check_reference_agreement, 0.0},
      {"structural invariants", check_structural_invariants, 60.0},
      {"sweep outputs are deterministic", check_sweep_determinism, 60.0},
  };

  int failed = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Check result;
    try {
      result = entries[i].run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.notes.push_back(std::string("    BAD  unhandled error: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (entries[i].budget_s > 0.0) {
      result.require(seconds < entries[i].budget_s, "finished in %.2f s (budget %.0f s)",
                     seconds, entries[i].budget_s);
    }
    std::printf("criterion %2zu %-4s %s (%.1f s)\n", i + 1, result.ok ? "PASS" : "FAIL",
                entries[i].name, seconds);
    for (const auto& line : result.notes) std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failed;
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", entries.size() - failed,
              entries.size());
  return failed == 0 ? 0 : 1;
}
