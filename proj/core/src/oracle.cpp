#include "ecomb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

#include "ecomb/errors.hpp"

namespace ecomb {

using std::complex;

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// The interaction is modeled as two real-amplitude carrier fields, so the six
// coupling coefficients must factorize into per-beam amplitudes g1, g2.
struct FieldPair {
  complex<double> g1, g2;
};

FieldPair reconstruct_fields(const DimensionlessProblem& p) {
  const double b11 = p.B11.real();
  const double b22 = p.B22.real();
  if (!(b11 >= 0.0) || !(b22 >= 0.0) || std::abs(p.B11.imag()) > 1e-12 * b11 ||
      std::abs(p.B22.imag()) > 1e-12 * b22) {
    throw ConfigError("evolve_reference: B11 and B22 must be real and nonnegative");
  }
  const double cross = std::sqrt(b11 * b22);
  const double tol = 1e-9 * (cross + std::abs(p.B12));
  if (std::abs(std::abs(p.B12) - cross) > tol || std::abs(std::abs(p.A12) - cross) > tol) {
    throw ConfigError("evolve_reference: couplings do not factorize into beam amplitudes");
  }
  const double ph1 = 0.5 * (std::arg(p.B12) + std::arg(p.A12));
  const double ph2 = 0.5 * (std::arg(p.A12) - std::arg(p.B12));
  if (std::abs(p.A11) > 0.0 && std::abs(wrap_angle(std::arg(p.A11) - 2.0 * ph1)) > 1e-9) {
    throw ConfigError("evolve_reference: A11 phase inconsistent with the cross couplings");
  }
  if (std::abs(p.A22) > 0.0 && std::abs(wrap_angle(std::arg(p.A22) - 2.0 * ph2)) > 1e-9) {
    throw ConfigError("evolve_reference: A22 phase inconsistent with the cross couplings");
  }
  return {std::sqrt(b11) * std::polar(1.0, ph1), std::sqrt(b22) * std::polar(1.0, ph2)};
}

} // namespace

std::pair<int, int> commensurate_ratio(double x, int max_denominator, double tol) {
  if (!(x > 0.0) || !(x < 1.0)) {
    throw ConfigError("commensurate_ratio: ratio must lie in (0, 1)");
  }
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    const double af = std::floor(v);
    const long a = static_cast<long>(af);
    const long p2 = a * p1 + p0;
    const long q2 = a * q1 + q0;
    if (q2 > max_denominator) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double rem = v - af;
    if (rem < 1e-12) break;
    v = 1.0 / rem;
  }
  if (q1 == 0 || std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) > tol) {
    throw ConfigError("commensurate_ratio: no p/q with q <= " + std::to_string(max_denominator) +
                      " approximates " + std::to_string(x));
  }
  return {static_cast<int>(p1), static_cast<int>(q1)};
}

OracleResult evolve_reference(const DimensionlessProblem& prob, const OracleGrid& grid) {
  const double b = prob.v_over_c;
  const int lmax = prob.ell_max;
  if (lmax <= 0) throw ConfigError("evolve_reference: ell_max must be positive");
  if (grid.window_multiple < 1) throw ConfigError("evolve_reference: window_multiple must be >= 1");

  const auto [pn, qd] = commensurate_ratio(prob.omega_ratio, grid.max_denominator);
  const double r = static_cast<double>(pn) / static_cast<double>(qd);
  const double z0 = prob.z0_k1();
  const FieldPair fields = reconstruct_fields(prob);

  const int m = grid.window_multiple;
  const int stride = (pn + qd) * m; // Fourier bins per unit of net photon exchange
  int nx = grid.spatial_points;
  if (nx == 0) {
    nx = next_pow2(std::max(256, 4 * (lmax + 6) * stride));
  } else if (nx < 2 * (lmax + 2) * stride) {
    throw ConfigError("evolve_reference: spatial grid cannot hold the requested sidebands");
  }
  const double window = 2.0 * M_PI * qd * m;
  const double du = window / nx;

  const double total_time = prob.span_over_z0 * z0 / b;
  const double dt_target = grid.time_step > 0.0 ? grid.time_step : M_PI / 64.0;
  const int nt = std::max(16, static_cast<int>(std::ceil(total_time / dt_target)));
  const double dt = total_time / nt;
  const double t0 = -0.5 * total_time;

  double rho = 0.0;
  if (std::isfinite(prob.talbot_over_z0)) {
    const double omega_beat = 1.0 - r;
    rho = 2.0 * M_PI * b * b * b / (prob.talbot_over_z0 * z0 * omega_beat * omega_beat);
  }

  std::vector<complex<double>> carrier1(nx), carrier2(nx), kinetic(nx);
  for (int i = 0; i < nx; ++i) {
    const double u = i * du;
    carrier1[i] = std::polar(1.0, u);
    carrier2[i] = std::polar(1.0, -r * u);
    const int bin = i <= nx / 2 ? i : i - nx;
    const double kappa = bin / static_cast<double>(qd * m);
    kinetic[i] = std::polar(1.0, -rho * kappa * kappa * dt);
  }

  std::vector<complex<double>> psi(nx, complex<double>(1.0, 0.0));
  fftw_complex* buf = reinterpret_cast<fftw_complex*>(psi.data());
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fwd = fftw_plan_dft_1d(nx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(nx, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (fwd == nullptr || bwd == nullptr) throw ConvergenceError("evolve_reference: FFT plan failed");

  const double inv_nx = 1.0 / nx;
  std::vector<complex<double>> vhalf(nx);
  for (int n = 0; n < nt; ++n) {
    const double t_mid = t0 + (n + 0.5) * dt;
    const double zc = b * t_mid / z0;
    const double coef = 4.0 * b / (z0 * (1.0 + zc * zc));
    const complex<double> tau1 = fields.g1 * std::polar(1.0, -(1.0 - b) * t_mid);
    const complex<double> tau2 = fields.g2 * std::polar(1.0, -r * (1.0 + b) * t_mid);
    for (int i = 0; i < nx; ++i) {
      const double f = (tau1 * carrier1[i]).imag() + (tau2 * carrier2[i]).imag();
      vhalf[i] = std::polar(1.0, -0.5 * dt * coef * f * f);
    }
    for (int i = 0; i < nx; ++i) psi[i] *= vhalf[i];
    fftw_execute(fwd);
    for (int i = 0; i < nx; ++i) psi[i] *= kinetic[i] * inv_nx;
    fftw_execute(bwd);
    for (int i = 0; i < nx; ++i) psi[i] *= vhalf[i];
  }

  double norm = 0.0;
  for (int i = 0; i < nx; ++i) norm += std::norm(psi[i]);
  norm *= inv_nx;

  fftw_execute(fwd);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  SidebandSpectrum spec = SidebandSpectrum::zeros(lmax);
  spec.provenance = "split-step";
  const double t_final = 0.5 * total_time;
  double resonant = 0.0;
  for (int ell = -lmax; ell <= lmax; ++ell) {
    const long bin = -static_cast<long>(ell) * stride;
    const int idx = static_cast<int>(((bin % nx) + nx) % nx);
    const complex<double> raw = psi[static_cast<std::size_t>(idx)] * inv_nx;
    const double nu = ell * ((1.0 - b) - r * (1.0 + b));
    spec.at(ell) = raw * std::polar(1.0, -nu * t_final);
    resonant += std::norm(raw);
  }
  if (resonant <= 0.0) throw ConvergenceError("evolve_reference: no resonant weight captured");
  const double inv_amp = 1.0 / std::sqrt(resonant);
  for (auto& a : spec.amp) a *= inv_amp;
  spec.raw_weight = resonant;

  OracleResult out;
  out.spectrum = std::move(spec);
  out.resonant_weight = resonant;
  out.nonresonant_weight = std::max(0.0, norm - resonant);
  out.norm_drift = std::abs(norm - 1.0);
  out.spatial_points = nx;
  out.time_steps = nt;
  out.ratio_num = pn;
  out.ratio_den = qd;
  return out;
}

SpectrumDistance compare_spectra(const SidebandSpectrum& a, const SidebandSpectrum& b) {
  const int lmax = std::max(a.ell_max, b.ell_max);
  double na = 0.0, nb = 0.0, tv = 0.0, maxdev = 0.0;
  complex<double> overlap(0.0, 0.0);
  for (int ell = -lmax; ell <= lmax; ++ell) {
    const complex<double> va = std::abs(ell) <= a.ell_max ? a.at(ell) : complex<double>(0.0);
    const complex<double> vb = std::abs(ell) <= b.ell_max ? b.at(ell) : complex<double>(0.0);
    na += std::norm(va);
    nb += std::norm(vb);
    overlap += va * std::conj(vb);
    const double dev = std::abs(std::norm(va) - std::norm(vb));
    tv += 0.5 * dev;
    maxdev = std::max(maxdev, dev);
  }
  SpectrumDistance d;
  d.l2_phase_min = std::sqrt(std::max(0.0, na + nb - 2.0 * std::abs(overlap)));
  d.tv_prob = tv;
  d.max_prob_dev = maxdev;
  return d;
}

} // namespace ecomb
