#pragma once

#include <complex>
#include <vector>

#include "ecomb/comb.hpp"
#include "ecomb/lattice.hpp"

namespace ecomb {

// Comb after free propagation by d (in Talbot distances): each amplitude
// picks up exp(-2 pi i l^2 d / z_T). Phases are reduced mod 2 pi before
// evaluation so the profile is exactly periodic in d.
struct PropagatedComb {
  int ell_max = 0;
  std::vector<std::complex<double>> c;
  double d_over_zT = 0.0;

  const std::complex<double>& at(int ell) const {
    return c[static_cast<std::size_t>(ell + ell_max)];
  }
};

PropagatedComb propagate_comb(const SidebandSpectrum& s, double d_over_zT);

// Temporal density over one beat period, sampled at x_k = -pi + 2 pi k / n
// where x = Omega t'. The period average equals 1 for a normalized comb.
struct DensityProfile {
  double d_over_zT = 0.0;
  std::vector<double> value;
  double x(int k) const {
    return -M_PI + 2.0 * M_PI * k / static_cast<double>(value.size());
  }
};

DensityProfile density_profile(const PropagatedComb& pc, int grid_points = 0);

// Degree of coherence at harmonic m of the beat, |I_m / I_0|^2, evaluated
// through the amplitude autocorrelation sum_l c_{l+m} c_l^*.
double doc_from_comb(const PropagatedComb& pc, int m);
double doc(const SidebandSpectrum& s, double d_over_zT, int m);

// Recoil-free closed form J_m^2(4 |beta| sin(2 pi m d / z_T)).
double doc_nonrecoil_closed_form(std::complex<double> beta, double d_over_zT, int m);

struct DocMax {
  double d_over_zT = 0.0;
  double value = 0.0;
};

// Max of doc over one Talbot period: uniform scan plus golden-section
// refinement. Near-degenerate maxima resolve to the smallest d.
DocMax max_doc_over_distance(const SidebandSpectrum& s, int m, int scan_points = 2048,
                             double d_tol = 1e-10);

// DOC_m of an exit spectrum versus field-free drift past the interaction
// region, d in Talbot units measured from the exit plane. The spectrum
// already carries the phases written during the passage, which is what
// shifts and raises the optimum relative to the recoil-free comb.
struct DocDistanceScan {
  std::vector<double> d_over_zT;
  std::vector<double> value;
  DocMax best;
};

DocDistanceScan doc_after_exit(const SidebandSpectrum& exit_spectrum, int m,
                               int scan_points = 2048);

// Degree-of-coherence orders tabulated along a distance axis.
struct DocSeries {
  std::vector<int> orders;
  std::vector<double> d_over_zT;
  std::vector<std::vector<double>> values; // values[i][j] = order orders[j] at d[i]
};

DocSeries doc_series(const SidebandSpectrum& s, const std::vector<double>& d_over_zT,
                     const std::vector<int>& orders);

} // namespace ecomb
