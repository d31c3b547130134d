#pragma once

#include <complex>
#include <utility>

#include "ecomb/comb.hpp"
#include "ecomb/lab_config.hpp"

namespace ecomb {

// Split-step Fourier integration of the envelope equation in the frame
// moving with the electron. The beam carriers are kept explicitly on a
// periodic window, so detuning walk-off and recoil dispersion emerge from
// the dynamics instead of entering through a mode expansion. Serves as an
// independent reference for the coupled-mode solver.
struct OracleGrid {
  int window_multiple = 1;  // window length in units of 2 pi q (q = carrier ratio denominator)
  int spatial_points = 0;   // 0: chosen from ell_max and the carrier ratio
  double time_step = 0.0;   // 0: pi/64 inverse carrier frequencies
  int max_denominator = 64; // limit when rationalizing the carrier ratio
};

struct OracleResult {
  SidebandSpectrum spectrum;
  double resonant_weight = 0.0;
  double nonresonant_weight = 0.0;
  double norm_drift = 0.0;
  int spatial_points = 0;
  int time_steps = 0;
  int ratio_num = 0; // carrier ratio p/q actually used
  int ratio_den = 0;
};

OracleResult evolve_reference(const DimensionlessProblem& problem, const OracleGrid& grid = {});

// Best rational p/q approximating x with q bounded, by continued fractions.
// The reference solver needs commensurate carriers so every photon-exchange
// order lands on an exact Fourier bin of the periodic window.
std::pair<int, int> commensurate_ratio(double x, int max_denominator, double tol = 1e-9);

struct SpectrumDistance {
  double l2_phase_min = 0.0; // L2 distance after one global phase alignment
  double tv_prob = 0.0;      // half the L1 distance between probability combs
  double max_prob_dev = 0.0;
};

SpectrumDistance compare_spectra(const SidebandSpectrum& a, const SidebandSpectrum& b);

} // namespace ecomb
