#include "ecomb/observables.hpp"

#include <algorithm>
#include <cmath>

#include "ecomb/bessel.hpp"
#include "ecomb/errors.hpp"

namespace ecomb {

PropagatedComb propagate_comb(const SidebandSpectrum& s, double d_over_zT) {
  PropagatedComb pc;
  pc.ell_max = s.ell_max;
  pc.d_over_zT = d_over_zT;
  pc.c.resize(s.amp.size());
  for (int l = -s.ell_max; l <= s.ell_max; ++l) {
    // fmod keeps the phase argument small, making d -> d + 1 exact.
    const double turns = std::fmod(static_cast<double>(l) * l * d_over_zT, 1.0);
    pc.c[static_cast<std::size_t>(l + s.ell_max)] =
        s.at(l) * std::polar(1.0, -2.0 * M_PI * turns);
  }
  return pc;
}

DensityProfile density_profile(const PropagatedComb& pc, int grid_points) {
  const int min_points = 4 * pc.ell_max + 1;
  if (grid_points <= 0) grid_points = std::max(256, 8 * pc.ell_max);
  if (grid_points < min_points) {
    throw ConfigError("density_profile: grid_points " + std::to_string(grid_points) +
                      " cannot resolve the comb, need >= " + std::to_string(min_points));
  }
  DensityProfile dp;
  dp.d_over_zT = pc.d_over_zT;
  dp.value.resize(static_cast<std::size_t>(grid_points));
  for (int k = 0; k < grid_points; ++k) {
    const double x = -M_PI + 2.0 * M_PI * k / grid_points;
    std::complex<double> f{0.0, 0.0};
    for (int l = -pc.ell_max; l <= pc.ell_max; ++l) {
      f += pc.at(l) * std::polar(1.0, -l * x);
    }
    dp.value[static_cast<std::size_t>(k)] = std::norm(f);
  }
  return dp;
}

double doc_from_comb(const PropagatedComb& pc, int m) {
  if (m < 0) throw ConfigError("doc_from_comb: harmonic order must be >= 0");
  std::complex<double> im{0.0, 0.0};
  double i0 = 0.0;
  for (int l = -pc.ell_max; l <= pc.ell_max; ++l) {
    i0 += std::norm(pc.at(l));
    if (l + m <= pc.ell_max) im += pc.at(l + m) * std::conj(pc.at(l));
  }
  if (i0 <= 0.0) throw ConfigError("doc_from_comb: empty comb");
  return std::norm(im / i0);
}

double doc(const SidebandSpectrum& s, double d_over_zT, int m) {
  return doc_from_comb(propagate_comb(s, d_over_zT), m);
}

double doc_nonrecoil_closed_form(std::complex<double> beta, double d_over_zT, int m) {
  if (m < 1) throw ConfigError("doc_nonrecoil_closed_form: order must be >= 1");
  const double arg = 4.0 * std::abs(beta) * std::sin(2.0 * M_PI * m * d_over_zT);
  const double jm = bessel_jn(m, std::abs(arg));
  return jm * jm;
}

namespace {

// Golden-section maximization of f on [a, b].
template <typename F>
DocMax golden_max(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

} // namespace

DocMax max_doc_over_distance(const SidebandSpectrum& s, int m, int scan_points,
                             double d_tol) {
  if (scan_points < 16) throw ConfigError("max_doc_over_distance: need >= 16 scan points");
  double best_v = -1.0;
  int best_k = 0;
  for (int k = 0; k < scan_points; ++k) {
    const double d = static_cast<double>(k) / scan_points;
    const double v = doc(s, d, m);
    // Strictly-better wins; the tolerance keeps symmetric twins from
    // stealing the first (smallest-d) maximum by a rounding hair.
    if (v > best_v * (1.0 + 1e-12) + 1e-300) {
      best_v = v;
      best_k = k;
    }
  }
  const double h = 1.0 / scan_points;
  const double center = static_cast<double>(best_k) / scan_points;
  DocMax refined = golden_max([&](double d) { return doc(s, d, m); },
                              center - h, center + h, d_tol);
  if (refined.d_over_zT < 0.0) refined.d_over_zT += 1.0;
  return refined;
}

DocDistanceScan doc_after_exit(const SidebandSpectrum& exit_spectrum, int m,
                               int scan_points) {
  if (scan_points < 16) throw ConfigError("doc_after_exit: need >= 16 scan points");
  DocDistanceScan scan;
  scan.d_over_zT.reserve(static_cast<std::size_t>(scan_points));
  scan.value.reserve(static_cast<std::size_t>(scan_points));
  for (int k = 0; k < scan_points; ++k) {
    const double d = static_cast<double>(k) / scan_points;
    scan.d_over_zT.push_back(d);
    scan.value.push_back(doc(exit_spectrum, d, m));
  }
  scan.best = max_doc_over_distance(exit_spectrum, m, scan_points);
  return scan;
}

DocSeries doc_series(const SidebandSpectrum& s, const std::vector<double>& d_over_zT,
                     const std::vector<int>& orders) {
  DocSeries out;
  out.orders = orders;
  out.d_over_zT = d_over_zT;
  out.values.reserve(d_over_zT.size());
  for (double d : d_over_zT) {
    const PropagatedComb pc = propagate_comb(s, d);
    std::vector<double> row;
    row.reserve(orders.size());
    for (int m : orders) row.push_back(doc_from_comb(pc, m));
    out.values.push_back(std::move(row));
  }
  return out;
}

} // namespace ecomb
