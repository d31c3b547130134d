#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ecomb/lab_config.hpp"

namespace ecomb {

// Complex sideband amplitudes alpha_l on integer l in [-ell_max, ell_max],
// normalized so the probabilities sum to one. raw_weight records the weight
// a solver captured before renormalizing (1 for analytic combs).
struct SidebandSpectrum {
  int ell_max = 0;
  std::vector<std::complex<double>> amp;
  double raw_weight = 1.0;
  std::string provenance = "analytic";

  static SidebandSpectrum zeros(int ell_max);
  std::complex<double>& at(int ell) { return amp[static_cast<std::size_t>(ell + ell_max)]; }
  const std::complex<double>& at(int ell) const {
    return amp[static_cast<std::size_t>(ell + ell_max)];
  }
  double prob(int ell) const { return std::norm(at(ell)); }
  double norm_sq() const;
};

// Energy comb after a phase-matched interaction with coupling beta:
// alpha_l = J_l(2|beta|) exp(i l arg(-beta)).
SidebandSpectrum comb_coefficients(std::complex<double> beta, int ell_max = 0);

// Root-mean-square sideband order; equals sqrt(2) |beta| for the analytic
// comb. Requires a normalized spectrum.
double sideband_sigma(const SidebandSpectrum& s);

// Closed-form traversal integral of the interaction along the electron path
// for a Lorentzian Rayleigh envelope extending to +-infinity.
struct PhaseIntegralResult {
  std::complex<double> beta_eff; // beta attenuated by the beat-note walk-off
  double chi = 0.0;              // global phase 2 pi (B11 + B22) z0
  std::complex<double> a11, a22, a12; // nonresonant exponent amplitudes
  double supp_resonant = 1.0;    // exp(-z0 |delta1 - delta2|)
  double supp_a12 = 0.0, supp_a11 = 0.0, supp_a22 = 0.0;
  double finite_span_fraction = 1.0; // (2/pi) atan(L / 2 z0), coupling captured by a finite span
  bool span_adequate = true;     // span_over_z0 >= 20
};

PhaseIntegralResult phase_integral(const DimensionlessProblem& p);

} // namespace ecomb
