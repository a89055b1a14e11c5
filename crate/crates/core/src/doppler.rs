//! Velocity-induced detuning distributions and the Doppler-averaged signal
//! susceptibility.
//!
//! Both fields co-propagate, so an atom's motion shifts the pump detuning Δ
//! while leaving the two-photon detuning δ₂ fixed. The susceptibility is
//! χ_b = (℘/Ω_b) ∫ p(Δ) ρ_ab(Δ, δ₂) dΔ.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;

use crate::atom::{coherence_response, LambdaSystem, POLE_THRESHOLD};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::units::{BOLTZMANN, EPSILON_0, HBAR, TWO_PI};

/// Half-widths covered by the Gaussian integration window.
pub const GAUSSIAN_WINDOW: f64 = 8.0;

/// Doppler half-width W_d (rad/s); 2W_d is the FWHM of the thermal line.
pub fn doppler_width(temperature: f64, wavelength: f64, atom_mass: f64) -> Result<f64> {
    for (name, v) in [
        ("temperature", temperature),
        ("wavelength", wavelength),
        ("atom_mass", atom_mass),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive, got {v}")));
        }
    }
    Ok(TWO_PI / wavelength * (2.0 * LN_2 * BOLTZMANN * temperature / atom_mass).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    /// Maxwell–Boltzmann detuning distribution.
    Gaussian,
    /// Lorentzian with the Gaussian's width and peak; not normalized.
    LorentzianApprox,
}

/// Detuning distribution seen by the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerProfile {
    pub w_d: f64,
    pub shape: ProfileShape,
    pub temperature: Option<f64>,
    pub atom_mass: Option<f64>,
    pub wavelength: Option<f64>,
}

impl DopplerProfile {
    pub fn new(w_d: f64, shape: ProfileShape) -> Result<Self> {
        if !(w_d > 0.0 && w_d.is_finite()) {
            return Err(Error::invalid("w_d", format!("must be positive, got {w_d}")));
        }
        Ok(DopplerProfile {
            w_d,
            shape,
            temperature: None,
            atom_mass: None,
            wavelength: None,
        })
    }

    pub fn thermal(temperature: f64, wavelength: f64, atom_mass: f64, shape: ProfileShape) -> Result<Self> {
        let w_d = doppler_width(temperature, wavelength, atom_mass)?;
        Ok(DopplerProfile {
            w_d,
            shape,
            temperature: Some(temperature),
            atom_mass: Some(atom_mass),
            wavelength: Some(wavelength),
        })
    }

    /// Common peak value √(ln 2)/(W_d √π) of both shapes.
    pub fn peak(&self) -> f64 {
        (LN_2 / PI).sqrt() / self.w_d
    }

    pub fn density(&self, delta: f64) -> f64 {
        profile_density(self, delta)
    }
}

/// p(Δ) in s/rad.
///
/// The Lorentzian shape integrates to √(π ln 2) ≈ 1.4757 rather than one;
/// it is used exactly as the matched-peak approximation of the Gaussian and
/// the closed-form susceptibility carries the same factor.
pub fn profile_density(profile: &DopplerProfile, delta: f64) -> f64 {
    let x = delta / profile.w_d;
    match profile.shape {
        ProfileShape::Gaussian => profile.peak() * (-LN_2 * x * x).exp(),
        ProfileShape::LorentzianApprox => profile.peak() / (1.0 + x * x),
    }
}

/// Buffer gas filling, metadata only.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferGas {
    pub label: String,
    pub pressure_torr: f64,
}

/// Macroscopic medium and beam parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumConfig {
    /// Atomic number density N, m⁻³.
    pub number_density: f64,
    /// Transition dipole moment 𝒟_ab, C·m.
    pub dipole_moment: f64,
    pub cell_length: f64,
    pub beam_diameter: f64,
    pub buffer_gas: BufferGas,
    /// Signal vacuum wavelength λ, m.
    pub signal_wavelength: f64,
}

impl MediumConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("number_density", self.number_density),
            ("dipole_moment", self.dipole_moment),
            ("cell_length", self.cell_length),
            ("beam_diameter", self.beam_diameter),
            ("signal_wavelength", self.signal_wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// ℘ = N 𝒟_ab² / (ħ ε₀), rad/s.
    pub fn coupling_prefactor(&self) -> f64 {
        self.number_density * self.dipole_moment * self.dipole_moment / (HBAR * EPSILON_0)
    }

    /// ω/c = 2π/λ, rad/m.
    pub fn wavenumber(&self) -> f64 {
        TWO_PI / self.signal_wavelength
    }

    pub fn with_number_density(&self, number_density: f64) -> Self {
        MediumConfig {
            number_density,
            ..self.clone()
        }
    }
}

/// Doppler average of a per-unit-Ω_b response, `∫ p(Δ) r(Δ_pump + Δ) dΔ`.
///
/// The Gaussian is integrated over ±8 W_d. The Lorentzian tails fall off
/// too slowly for a finite window, so it is integrated over the whole line
/// through Δ = W_d tan θ, which turns p(Δ) dΔ into the constant √(ln 2/π) dθ.
pub fn doppler_average<F>(
    sys: &LambdaSystem,
    profile: &DopplerProfile,
    quad: &QuadratureConfig,
    mut response: F,
) -> Result<Complex64>
where
    F: FnMut(&LambdaSystem) -> Result<Complex64>,
{
    let offset = sys.delta_pump;
    let w = profile.w_d;
    // the single-atom resonance sits near Δ_pump = δ₂, and off-resonant
    // atoms have a narrow light-shifted Raman line near Δ_pump = −Ω_c²/δ₂
    let resonance = sys.delta2 - offset;
    let raman = if sys.delta2 != 0.0 {
        -sys.omega_c * sys.omega_c / sys.delta2
    } else {
        f64::INFINITY
    };
    let breaks = [0.0, resonance, raman - offset, -raman - offset];
    match profile.shape {
        ProfileShape::Gaussian => {
            let r = integrate(
                |d| Ok(response(&sys.with_pump_detuning(offset + d))? * profile_density(profile, d)),
                -GAUSSIAN_WINDOW * w,
                GAUSSIAN_WINDOW * w,
                &breaks,
                quad,
            )?;
            Ok(r.value)
        }
        ProfileShape::LorentzianApprox => {
            let weight = (LN_2 / PI).sqrt();
            let r = integrate(
                |theta| Ok(response(&sys.with_pump_detuning(offset + w * theta.tan()))? * weight),
                -FRAC_PI_2,
                FRAC_PI_2,
                &breaks.map(|d| (d / w).atan()),
                quad,
            )?;
            Ok(r.value)
        }
    }
}

/// χ_b by numerical Doppler averaging of the single-atom coherence.
///
/// `sys.delta_pump` is an offset of the pump from the Doppler line centre;
/// the closed form assumes it is zero.
pub fn average_susceptibility_numeric(
    sys: &LambdaSystem,
    medium: &MediumConfig,
    profile: &DopplerProfile,
    quad: &QuadratureConfig,
) -> Result<Complex64> {
    sys.validate()?;
    sys.check_weak_signal()?;
    medium.validate()?;
    let avg = doppler_average(sys, profile, quad, coherence_response)?;
    Ok(avg * medium.coupling_prefactor())
}

/// Closed-form χ_b for the Lorentzian profile with the pump at line centre:
///
/// `2℘√(π ln 2) (iγ_bc + δ₂) / [(γ_bc − iδ₂)(Γ + 2W_d − 2iδ₂) + 2Ω_c²]`.
pub fn average_susceptibility_closed(sys: &LambdaSystem, medium: &MediumConfig, w_d: f64) -> Result<Complex64> {
    closed_form(sys, medium, w_d, true)
}

/// The closed form with the 2iδ₂ term dropped from the Doppler factor,
/// valid while the EIT width is far below 2W_d.
pub fn average_susceptibility_closed_narrow(sys: &LambdaSystem, medium: &MediumConfig, w_d: f64) -> Result<Complex64> {
    closed_form(sys, medium, w_d, false)
}

fn closed_form(sys: &LambdaSystem, medium: &MediumConfig, w_d: f64, keep_two_photon_term: bool) -> Result<Complex64> {
    sys.validate()?;
    sys.check_weak_signal()?;
    medium.validate()?;
    if !(w_d > 0.0) {
        return Err(Error::invalid("w_d", format!("must be positive, got {w_d}")));
    }
    let i = Complex64::i();
    let d2 = sys.delta2;
    let doppler = if keep_two_photon_term {
        Complex64::new(sys.gamma() + 2.0 * w_d, -2.0 * d2)
    } else {
        Complex64::new(sys.gamma() + 2.0 * w_d, 0.0)
    };
    let denom = Complex64::new(sys.gamma_bc, -d2) * doppler + 2.0 * sys.omega_c * sys.omega_c;
    if denom.norm() < POLE_THRESHOLD {
        return Err(Error::Pole {
            context: "averaged susceptibility denominator",
            magnitude: denom.norm(),
        });
    }
    let prefactor = 2.0 * medium.coupling_prefactor() * (PI * LN_2).sqrt();
    Ok(prefactor * (i * sys.gamma_bc + d2) / denom)
}
