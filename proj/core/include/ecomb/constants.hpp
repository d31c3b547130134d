#pragma once

// Physical constants (CODATA 2018). All library arithmetic uses eV for
// energies, nm for lengths, and velocities as fractions of c. Laser powers
// enter only through photon rates P/(hbar*omega), which are formed here from
// watts and eV.

namespace ecomb::constants {

inline constexpr double electron_rest_energy_eV = 510998.95;
inline constexpr double hbar_c_eV_nm = 197.3269804;
inline constexpr double fine_structure = 7.2973525693e-3;
inline constexpr double hbar_eV_s = 6.582119569e-16;
inline constexpr double elementary_charge_C = 1.602176634e-19;
inline constexpr double speed_of_light_m_per_s = 299792458.0;

// hbar / (m_e c^2) in seconds, the natural time scale of coupling formulas.
inline constexpr double hbar_over_rest_energy_s = hbar_eV_s / electron_rest_energy_eV;

} // namespace ecomb::constants
