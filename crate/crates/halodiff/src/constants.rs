//! Physical constants and unit conversions.
//!
//! Internal convention: lengths in nm, wave numbers in nm⁻¹ (ħ = 1),
//! masses in atomic mass units, energies in µeV. SI constants appear
//! only here, at the unit boundary.

/// Reduced Planck constant, J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// One electron volt in joules (exact).
pub const EV_J: f64 = 1.602_176_634e-19;

/// Atomic mass unit, kg.
pub const AMU_KG: f64 = 1.660_539_068_92e-27;

/// Atomic mass of ⁴He, u.
pub const HELIUM4_MASS_U: f64 = 4.002_602;

/// Convert a temperature-equivalent energy in mK to µeV (E = k_B·T).
pub fn mk_to_uev(energy_mk: f64) -> f64 {
    energy_mk * 1e-3 * BOLTZMANN_J_PER_K / EV_J * 1e6
}

/// Convert µeV to joules.
pub fn uev_to_joule(energy_uev: f64) -> f64 {
    energy_uev * 1e-6 * EV_J
}

/// Wave number (nm⁻¹) of a particle of mass `mass_u` moving at `speed_m_per_s`.
pub fn wavenumber_from_speed(mass_u: f64, speed_m_per_s: f64) -> f64 {
    let momentum = mass_u * AMU_KG * speed_m_per_s; // kg·m/s
    momentum / HBAR_J_S * 1e-9
}

/// Kinetic energy (µeV) of a particle of mass `mass_u` with wave number
/// `wavenumber_per_nm`.
pub fn kinetic_energy_uev(mass_u: f64, wavenumber_per_nm: f64) -> f64 {
    let momentum = wavenumber_per_nm * 1e9 * HBAR_J_S; // kg·m/s
    momentum * momentum / (2.0 * mass_u * AMU_KG) / EV_J * 1e6
}
