#include "ecomb/lab_config.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "ecomb/constants.hpp"
#include "ecomb/errors.hpp"

namespace ecomb {

using std::complex;
namespace cn = constants;

std::complex<double> DimensionlessProblem::beta() const {
  return 2.0 * M_PI * complex<double>(0.0, 1.0) * B12;
}

double DimensionlessProblem::z0_k1() const {
  return delta1 * v_over_c / (1.0 - v_over_c);
}

double DimensionlessProblem::recoil_coeff() const {
  if (!std::isfinite(talbot_over_z0)) return 0.0;
  const double one_minus_r = 1.0 - omega_ratio;
  const double s = v_over_c / one_minus_r;
  return 2.0 * M_PI / talbot_over_z0 * s * s;
}

int default_ell_max(double beta_abs) {
  if (beta_abs < 0.0) throw ConfigError("default_ell_max: |beta| must be >= 0");
  const int tail = std::max(15, static_cast<int>(std::ceil(4.0 * std::sqrt(beta_abs))));
  return static_cast<int>(std::ceil(2.0 * beta_abs)) + tail;
}

namespace {

void validate_beam(const BeamParams& b, const char* name, bool need_na) {
  if (!(b.photon_energy_eV > 0.0))
    throw ConfigError(std::string(name) + ": photon energy must be positive");
  if (!(b.power_W >= 0.0))
    throw ConfigError(std::string(name) + ": power must be >= 0");
  if (need_na && !(b.numerical_aperture > 0.0 && b.numerical_aperture < 1.0))
    throw ConfigError(std::string(name) + ": numerical aperture must lie in (0, 1)");
}

// Photon rate P / (hbar omega) in 1/s.
double photon_rate(const BeamParams& b) {
  return b.power_W / (cn::elementary_charge_C * b.photon_energy_eV);
}

} // namespace

std::complex<double> coupling_beta(const LabConfig& lab) {
  validate_beam(lab.beam1, "beam1", true);
  validate_beam(lab.beam2, "beam2", false);
  const Kinematics kin = electron_kinematics(lab.kinetic_energy_eV);
  const double b = kin.v_over_c;
  const double doppler = (1.0 + b) / (1.0 - b);
  const double omega_ratio = lab.beam2.photon_energy_eV / lab.beam1.photon_energy_eV;
  const double rate1 = photon_rate(lab.beam1);
  const double rate2 = photon_rate(lab.beam2);
  const double mag = 2.0 * M_PI * cn::fine_structure * cn::hbar_over_rest_energy_s *
                     std::sqrt(rate1 * rate2) / (kin.gamma * b) * doppler * omega_ratio;
  const double phase = lab.beam1.phase_rad - lab.beam2.phase_rad;
  return complex<double>(0.0, mag) * std::polar(1.0, phase);
}

DimensionlessProblem reduce_to_dimensionless(const LabConfig& lab,
                                             const SolverNumerics& numerics) {
  validate_beam(lab.beam1, "beam1", true);
  validate_beam(lab.beam2, "beam2", false);
  if (lab.beam1.direction != +1 || lab.beam2.direction != -1)
    throw ConfigError("reduce_to_dimensionless: beam1 must copropagate (+1), beam2 counterpropagate (-1)");

  const double omega1 = lab.beam1.photon_energy_eV;
  const double omega2 = lab.beam2.photon_energy_eV;
  if (!(omega2 < omega1))
    throw ConfigError("reduce_to_dimensionless: omega2 must be below omega1 (Doppler downshift)");

  const Kinematics kin = electron_kinematics(lab.kinetic_energy_eV);
  const double b = kin.v_over_c;

  // Both foci must share one Rayleigh range z0 = 2 c / (omega NA^2).
  const double na1 = lab.beam1.numerical_aperture;
  double na2 = lab.beam2.numerical_aperture;
  if (na2 <= 0.0) {
    na2 = na1 * std::sqrt(omega1 / omega2);
  } else {
    const double z01 = 2.0 * cn::hbar_c_eV_nm / (omega1 * na1 * na1);
    const double z02 = 2.0 * cn::hbar_c_eV_nm / (omega2 * na2 * na2);
    if (std::abs(z01 - z02) > 1e-9 * z01)
      throw ConfigError("reduce_to_dimensionless: beams have inconsistent Rayleigh ranges");
  }

  const double z0_nm = 2.0 * cn::hbar_c_eV_nm / (omega1 * na1 * na1);
  const double z0k1 = 2.0 / (na1 * na1);
  const double z0k2 = z0k1 * omega2 / omega1;

  const double rate1 = photon_rate(lab.beam1);
  const double rate2 = photon_rate(lab.beam2);
  const double scale = cn::fine_structure * cn::hbar_over_rest_energy_s / (kin.gamma * b);

  DimensionlessProblem p;
  p.v_over_c = b;
  p.omega_ratio = omega2 / omega1;
  p.B11 = scale * rate1;
  p.B22 = scale * rate2;
  const double cross = scale * std::sqrt(rate1 * rate2);
  const double ph1 = lab.beam1.phase_rad;
  const double ph2 = lab.beam2.phase_rad;
  p.B12 = cross * std::polar(1.0, ph1 - ph2);
  p.A12 = cross * std::polar(1.0, ph1 + ph2);
  p.A11 = scale * rate1 * std::polar(1.0, 2.0 * ph1);
  p.A22 = scale * rate2 * std::polar(1.0, 2.0 * ph2);

  p.delta1 = z0k1 * (1.0 / b - 1.0);
  p.delta2 = z0k2 * (1.0 / b + 1.0);

  const double Omega = omega1 - omega2;
  p.talbot_over_z0 = talbot_distance_nm(b, Omega) / z0_nm;

  p.span_over_z0 = numerics.span_over_z0 > 0.0 ? numerics.span_over_z0 : 20.0;
  p.slice_count = numerics.slice_count > 0
                      ? numerics.slice_count
                      : static_cast<int>(std::lround(20.0 * p.span_over_z0));
  p.ell_max = numerics.ell_max > 0 ? numerics.ell_max : default_ell_max(std::abs(p.beta()));
  return p;
}

DimensionlessProblem matched_problem(double v_over_c, double beta_abs,
                                     double talbot_over_z0,
                                     double z0_Omega_over_v,
                                     const SolverNumerics& numerics) {
  if (!(v_over_c > 0.0 && v_over_c < 1.0))
    throw ConfigError("matched_problem: v/c must lie in (0, 1)");
  if (!(beta_abs >= 0.0)) throw ConfigError("matched_problem: |beta| must be >= 0");
  if (!(talbot_over_z0 > 0.0))
    throw ConfigError("matched_problem: z_T/z0 must be positive (use infinity to disable recoil)");
  if (!(z0_Omega_over_v > 0.0))
    throw ConfigError("matched_problem: z0 Omega / v must be positive");

  const double b = v_over_c;
  const double r = (1.0 - b) / (1.0 + b);

  DimensionlessProblem p;
  p.v_over_c = b;
  p.omega_ratio = r;
  const double b12 = beta_abs / (2.0 * M_PI);
  p.B12 = b12;                 // real fields: beta lands on the positive imaginary axis
  p.B11 = b12 * std::sqrt(r);  // equal powers P1 = P2
  p.B22 = b12 / std::sqrt(r);
  p.A11 = p.B11;
  p.A22 = p.B22;
  p.A12 = p.B12;

  const double z0k1 = z0_Omega_over_v * b / (1.0 - r);
  p.delta1 = z0k1 * (1.0 / b - 1.0);
  p.delta2 = z0k1 * r * (1.0 / b + 1.0);

  p.talbot_over_z0 = talbot_over_z0;
  p.span_over_z0 = numerics.span_over_z0 > 0.0 ? numerics.span_over_z0 : 20.0;
  p.slice_count = numerics.slice_count > 0
                      ? numerics.slice_count
                      : static_cast<int>(std::lround(20.0 * p.span_over_z0));
  p.ell_max = numerics.ell_max > 0 ? numerics.ell_max : default_ell_max(beta_abs);
  return p;
}

DimensionlessProblem matched_problem_for_geometry(double kinetic_energy_eV,
                                                  double photon_energy_eV,
                                                  double numerical_aperture,
                                                  double beta_abs,
                                                  const SolverNumerics& numerics) {
  if (!(numerical_aperture > 0.0 && numerical_aperture < 1.0))
    throw ConfigError("matched_problem_for_geometry: numerical aperture must lie in (0, 1)");
  const Kinematics kin = electron_kinematics(kinetic_energy_eV);
  const double b = kin.v_over_c;
  const double r = (1.0 - b) / (1.0 + b);
  const double na_sq = numerical_aperture * numerical_aperture;
  const double z0k1 = 2.0 / na_sq;
  const double z0_nm = 2.0 * cn::hbar_c_eV_nm / (photon_energy_eV * na_sq);
  const PhaseMatch pm = phase_matched_omega2(photon_energy_eV, b);
  const double talbot = talbot_distance_nm(b, pm.Omega_eV) / z0_nm;
  return matched_problem(b, beta_abs, talbot, z0k1 * (1.0 - r) / b, numerics);
}

} // namespace ecomb
