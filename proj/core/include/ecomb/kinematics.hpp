#pragma once

namespace ecomb {

// Relativistic state of the incident electron.
struct Kinematics {
  double kinetic_energy_eV = 0.0;
  double v_over_c = 0.0;
  double gamma = 1.0;
  double momentum_inv_nm = 0.0; // central wavenumber q0 = m v gamma / hbar
};

Kinematics electron_kinematics(double kinetic_energy_eV);
Kinematics kinematics_from_velocity(double v_over_c);

struct PhaseMatch {
  double omega2_eV = 0.0; // photon energy of the counterpropagating beam
  double Omega_eV = 0.0;  // beat energy omega1 - omega2
};

// Photon energy of the backward beam for which the two-beam beat travels at
// the electron velocity: omega2 = omega1 (1 - v/c) / (1 + v/c).
PhaseMatch phase_matched_omega2(double omega1_eV, double v_over_c);

// Distance over which a sideband ladder with spacing Omega rephases:
// z_T = 4 pi m v^3 gamma^3 / (hbar Omega^2).
double talbot_distance_nm(double v_over_c, double Omega_eV);

} // namespace ecomb
