#pragma once

#include <complex>

#include "ecomb/kinematics.hpp"

namespace ecomb {

// One focused beam of the counterpropagating pair. Powers are cycle-averaged
// watts at the focus; phase_rad is the phase of the focal field amplitude.
struct BeamParams {
  double photon_energy_eV = 0.0;
  double numerical_aperture = 0.0; // beam 2 may leave this 0 to share the beam-1 Rayleigh range
  double power_W = 0.0;
  double phase_rad = 0.0;
  int direction = +1; // +1 copropagating with the electron, -1 counterpropagating
};

struct LabConfig {
  double kinetic_energy_eV = 0.0;
  BeamParams beam1; // direction +1
  BeamParams beam2; // direction -1
};

// Numerical controls carried alongside the physics when reducing to
// dimensionless form. Zeros select defaults (span 20 z0, slice width z0/20,
// truncation from the coupling strength).
struct SolverNumerics {
  double span_over_z0 = 20.0;
  int slice_count = 0;
  int ell_max = 0;
};

// Everything the solvers are allowed to see. All couplings carry a factor z0
// so they are dimensionless; detunings are also multiplied by z0. Solver
// output depends on lab parameters only through these fields.
struct DimensionlessProblem {
  double v_over_c = 0.0;
  double omega_ratio = 0.0; // omega2 / omega1

  // Resonant (intensity-beat) couplings B_jj' z0 and nonresonant
  // (sum-frequency) couplings A_jj' z0. B11 and B22 are real.
  std::complex<double> B11, B12, B22;
  std::complex<double> A11, A12, A22;

  double delta1 = 0.0; // z0 (omega1/v - k1)
  double delta2 = 0.0; // z0 (omega2/v + k2)

  double talbot_over_z0 = 0.0; // infinity disables the recoil diagonal

  double span_over_z0 = 20.0;
  int slice_count = 400;
  int ell_max = 0;

  // Sideband coupling parameter beta = 2 pi i B12 z0 (no finite-detuning
  // suppression applied).
  std::complex<double> beta() const;

  // z0 in units of 1/k1, recovered from the beam-1 detuning.
  double z0_k1() const;

  // Recoil phase per unit z0 is recoil_coeff * (l1 - r l2)^2; on the
  // resonant ladder at exact matching this reduces to 2 pi l^2 z0/z_T.
  double recoil_coeff() const;

  double slice_width() const { return span_over_z0 / slice_count; }
  double slice_center(int n) const { return -0.5 * span_over_z0 + (n + 0.5) * slice_width(); }
};

// Truncation order that comfortably contains a coupling-|beta| comb.
int default_ell_max(double beta_abs);

// Closed-form coupling parameter for a phase-matched pair, the route through
// the focal field amplitudes. Agrees with 2 pi i B12 z0 when beam 2 is tuned
// to the matching condition.
std::complex<double> coupling_beta(const LabConfig& lab);

DimensionlessProblem reduce_to_dimensionless(const LabConfig& lab,
                                             const SolverNumerics& numerics = {});

// Equal-power real-amplitude phase-matched problem specified directly by
// dimensionless groups; z0_Omega_over_v sets how adiabatic the envelope is.
DimensionlessProblem matched_problem(double v_over_c, double beta_abs,
                                     double talbot_over_z0,
                                     double z0_Omega_over_v = 50.0,
                                     const SolverNumerics& numerics = {});

// Phase-matched problem at a pinned dimensionless coupling, with the Talbot
// ratio and envelope adiabaticity taken from a concrete geometry instead of
// being chosen freely.
DimensionlessProblem matched_problem_for_geometry(double kinetic_energy_eV,
                                                  double photon_energy_eV,
                                                  double numerical_aperture,
                                                  double beta_abs,
                                                  const SolverNumerics& numerics = {});

} // namespace ecomb
