#include "ecomb/comb.hpp"

#include <cmath>

#include "ecomb/bessel.hpp"
#include "ecomb/errors.hpp"

namespace ecomb {

SidebandSpectrum SidebandSpectrum::zeros(int ell_max) {
  SidebandSpectrum s;
  s.ell_max = ell_max;
  s.amp.assign(2 * static_cast<std::size_t>(ell_max) + 1, {0.0, 0.0});
  return s;
}

double SidebandSpectrum::norm_sq() const {
  double sum = 0.0;
  for (const auto& a : amp) sum += std::norm(a);
  return sum;
}

SidebandSpectrum comb_coefficients(std::complex<double> beta, int ell_max) {
  const double b = std::abs(beta);
  if (ell_max <= 0) ell_max = default_ell_max(b);
  SidebandSpectrum s = SidebandSpectrum::zeros(ell_max);
  s.provenance = "analytic";
  if (b == 0.0) {
    s.at(0) = 1.0;
    return s;
  }
  const double phase0 = std::arg(-beta);
  const std::vector<double> j = bessel_jn_array(ell_max, 2.0 * b);
  for (int l = -ell_max; l <= ell_max; ++l) {
    const int la = std::abs(l);
    const double sign = (l < 0 && la % 2 != 0) ? -1.0 : 1.0;
    s.at(l) = sign * j[la] * std::polar(1.0, phase0 * l);
  }
  const double defect = std::abs(1.0 - s.norm_sq());
  if (defect > 1e-10) {
    throw ConvergenceError("comb_coefficients: ell_max " + std::to_string(ell_max) +
                           " truncates the comb, unitarity defect " + std::to_string(defect));
  }
  return s;
}

double sideband_sigma(const SidebandSpectrum& s) {
  const double n = s.norm_sq();
  if (std::abs(n - 1.0) > 1e-8) {
    throw ConfigError("sideband_sigma: spectrum is not normalized, |sum - 1| = " +
                      std::to_string(std::abs(n - 1.0)));
  }
  double acc = 0.0;
  for (int l = -s.ell_max; l <= s.ell_max; ++l) {
    acc += static_cast<double>(l) * l * s.prob(l);
  }
  return std::sqrt(acc);
}

PhaseIntegralResult phase_integral(const DimensionlessProblem& p) {
  PhaseIntegralResult r;
  const std::complex<double> ipi(0.0, M_PI);
  r.supp_resonant = std::exp(-std::abs(p.delta1 - p.delta2));
  r.supp_a12 = std::exp(-std::abs(p.delta1 + p.delta2));
  r.supp_a11 = std::exp(-2.0 * std::abs(p.delta1));
  r.supp_a22 = std::exp(-2.0 * std::abs(p.delta2));
  r.beta_eff = p.beta() * r.supp_resonant;
  r.chi = 2.0 * M_PI * (p.B11.real() + p.B22.real());
  // Cross terms appear twice in the double sum over beams.
  r.a12 = ipi * 2.0 * p.A12 * r.supp_a12;
  r.a11 = ipi * p.A11 * r.supp_a11;
  r.a22 = ipi * p.A22 * r.supp_a22;
  r.finite_span_fraction = 2.0 / M_PI * std::atan(0.5 * p.span_over_z0);
  r.span_adequate = p.span_over_z0 >= 20.0;
  return r;
}

} // namespace ecomb
