//! Physical constants and unit conversions.
//!
//! Every rate, detuning and Rabi frequency inside this crate is an angular
//! frequency in rad/s. Values read from or written to the outside world are
//! ordinary frequencies in Hz; convert with [`hz`] and [`to_hz`].

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Torr in pascal.
pub const TORR: f64 = 101_325.0 / 760.0;

/// Rubidium-87 data for the D1 line.
pub mod rb87 {
    use super::{ATOMIC_MASS_UNIT, TWO_PI};

    /// Atomic mass, kg.
    pub const MASS: f64 = 86.909_180_527 * ATOMIC_MASS_UNIT;
    /// Vacuum wavelength of the D1 line, m.
    pub const D1_WAVELENGTH: f64 = 794.978_851_156e-9;
    /// Excited-state decay rate of 5P1/2, rad/s (Γ/2π = 5.75 MHz).
    pub const D1_GAMMA: f64 = TWO_PI * 5.75e6;
    /// Reduced dipole matrix element ⟨J=1/2‖er‖J'=1/2⟩, C·m.
    pub const D1_REDUCED_DIPOLE: f64 = 2.537e-29;
    /// Effective dipole moment for isotropic light, reduced element / √3.
    pub const D1_DIPOLE: f64 = D1_REDUCED_DIPOLE * 0.577_350_269_189_625_8;
}

/// Hz → rad/s.
#[inline]
pub fn hz(f: f64) -> f64 {
    TWO_PI * f
}

/// rad/s → Hz.
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}
