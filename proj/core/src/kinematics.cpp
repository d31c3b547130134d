#include "ecomb/kinematics.hpp"

#include <cmath>
#include <string>

#include "ecomb/constants.hpp"
#include "ecomb/errors.hpp"

namespace ecomb {

namespace {
constexpr double kRest = constants::electron_rest_energy_eV;
}

Kinematics electron_kinematics(double kinetic_energy_eV) {
  if (!(kinetic_energy_eV > 0.0)) {
    throw ConfigError("electron_kinematics: kinetic energy must be positive, got " +
                      std::to_string(kinetic_energy_eV));
  }
  Kinematics k;
  k.kinetic_energy_eV = kinetic_energy_eV;
  k.gamma = 1.0 + kinetic_energy_eV / kRest;
  k.v_over_c = std::sqrt((k.gamma - 1.0) * (k.gamma + 1.0)) / k.gamma;
  k.momentum_inv_nm = kRest * k.gamma * k.v_over_c / constants::hbar_c_eV_nm;
  return k;
}

Kinematics kinematics_from_velocity(double v_over_c) {
  if (!(v_over_c > 0.0) || !(v_over_c < 1.0)) {
    throw ConfigError("kinematics_from_velocity: v/c must lie in (0, 1), got " +
                      std::to_string(v_over_c));
  }
  Kinematics k;
  k.v_over_c = v_over_c;
  k.gamma = 1.0 / std::sqrt((1.0 - v_over_c) * (1.0 + v_over_c));
  k.kinetic_energy_eV = kRest * (k.gamma - 1.0);
  k.momentum_inv_nm = kRest * k.gamma * v_over_c / constants::hbar_c_eV_nm;
  return k;
}

PhaseMatch phase_matched_omega2(double omega1_eV, double v_over_c) {
  if (!(omega1_eV > 0.0)) {
    throw ConfigError("phase_matched_omega2: omega1 must be positive");
  }
  if (!(v_over_c >= 0.0) || !(v_over_c < 1.0)) {
    throw ConfigError("phase_matched_omega2: v/c must lie in [0, 1)");
  }
  PhaseMatch pm;
  pm.omega2_eV = omega1_eV * (1.0 - v_over_c) / (1.0 + v_over_c);
  pm.Omega_eV = omega1_eV - pm.omega2_eV;
  return pm;
}

double talbot_distance_nm(double v_over_c, double Omega_eV) {
  if (!(Omega_eV > 0.0)) {
    throw ConfigError("talbot_distance_nm: beat energy Omega must be positive");
  }
  if (!(v_over_c > 0.0) || !(v_over_c < 1.0)) {
    throw ConfigError("talbot_distance_nm: v/c must lie in (0, 1)");
  }
  const double gamma = 1.0 / std::sqrt((1.0 - v_over_c) * (1.0 + v_over_c));
  const double g3 = gamma * gamma * gamma;
  const double b3 = v_over_c * v_over_c * v_over_c;
  // 4 pi (m c^2 / Omega) (v/c)^3 gamma^3 (hbar c / Omega), expressed in nm.
  return 4.0 * M_PI * kRest * b3 * g3 * constants::hbar_c_eV_nm / (Omega_eV * Omega_eV);
}

} // namespace ecomb
