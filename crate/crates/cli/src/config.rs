//! Run configuration: a TOML file whose keys carry their units.
//!
//! Every field has a default, so an empty file (or no file) is a valid
//! configuration. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use eit_core::doppler::{doppler_width, BufferGas, DopplerProfile, MediumConfig, ProfileShape};
use eit_core::fitting::{PumpConfiguration, SolverConfig};
use eit_core::lineshape::GridSpacing;
use eit_core::propagation::{
    rb_number_density, CellModel, DopplerWidth, LogPressureCoefficients, PowerSweep, ScanGrid, SlopeReference,
    VaporPressureCorrelation, MIN_SLICES,
};
use eit_core::units::{self, rb87, TWO_PI};
use eit_core::{LambdaSystem, QuadratureConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub constants: Constants,
    pub system: SystemSection,
    pub cell: CellSection,
    pub sweep: SweepSection,
    pub numerics: Numerics,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            constants: Constants::default(),
            system: SystemSection::default(),
            cell: CellSection::default(),
            sweep: SweepSection::default(),
            numerics: Numerics::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    /// Fixed at the built-in value; listed so runs record what was used.
    pub hbar_j_s: f64,
    pub epsilon0_f_per_m: f64,
    pub speed_of_light_m_per_s: f64,
    pub boltzmann_j_per_k: f64,
    pub atom_mass_kg: f64,
    pub dipole_moment_c_m: f64,
    pub wavelength_m: f64,
    /// Excited-state decay rate Γ/2π.
    pub gamma_hz: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar_j_s: units::HBAR,
            epsilon0_f_per_m: units::EPSILON_0,
            speed_of_light_m_per_s: units::SPEED_OF_LIGHT,
            boltzmann_j_per_k: units::BOLTZMANN,
            atom_mass_kg: rb87::MASS,
            dipole_moment_c_m: rb87::D1_DIPOLE,
            wavelength_m: rb87::D1_WAVELENGTH,
            gamma_hz: units::to_hz(rb87::D1_GAMMA),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub gamma_bc_hz: f64,
    pub gamma_pe_hz: f64,
    pub signal_rabi_hz: f64,
    pub pump_detuning_hz: f64,
    /// Fraction of Γ that decays into |b⟩.
    pub decay_to_b_fraction: f64,
    pub allow_strong_signal: bool,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            gamma_bc_hz: 1.5e3,
            gamma_pe_hz: 0.0,
            signal_rabi_hz: 0.0,
            pump_detuning_hz: 0.0,
            decay_to_b_fraction: 0.5,
            allow_strong_signal: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    Lorentzian,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigurationName {
    Zeeman,
    Hyperfine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VaporSection {
    pub melting_point_k: f64,
    pub solid_a: f64,
    pub solid_b_k: f64,
    pub solid_c_per_k: f64,
    pub solid_d: f64,
    pub liquid_a: f64,
    pub liquid_b_k: f64,
    pub liquid_c_per_k: f64,
    pub liquid_d: f64,
}

impl Default for VaporSection {
    fn default() -> Self {
        let v = VaporPressureCorrelation::RUBIDIUM;
        VaporSection {
            melting_point_k: v.melting_point,
            solid_a: v.solid.a,
            solid_b_k: v.solid.b,
            solid_c_per_k: v.solid.c,
            solid_d: v.solid.d,
            liquid_a: v.liquid.a,
            liquid_b_k: v.liquid.b,
            liquid_c_per_k: v.liquid.c,
            liquid_d: v.liquid.d,
        }
    }
}

impl VaporSection {
    pub fn correlation(&self) -> VaporPressureCorrelation {
        VaporPressureCorrelation {
            solid: LogPressureCoefficients {
                a: self.solid_a,
                b: self.solid_b_k,
                c: self.solid_c_per_k,
                d: self.solid_d,
            },
            liquid: LogPressureCoefficients {
                a: self.liquid_a,
                b: self.liquid_b_k,
                c: self.liquid_c_per_k,
                d: self.liquid_d,
            },
            melting_point: self.melting_point_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub temperature_k: f64,
    pub length_m: f64,
    pub beam_diameter_m: f64,
    pub buffer_gas: String,
    pub buffer_pressure_torr: f64,
    pub configuration: ConfigurationName,
    /// Effective pump absorption cross-section; 0 disables pump depletion.
    pub pump_cross_section_m2: f64,
    /// Overrides the saturated-vapor density when set.
    pub number_density_per_m3: Option<f64>,
    /// Overrides the thermal Doppler half-width W_d/2π when set.
    pub doppler_width_hz: Option<f64>,
    /// Temperature at which the thermal W_d is evaluated.
    pub doppler_reference_temperature_k: f64,
    /// Recompute W_d at every cell temperature instead of the reference.
    pub doppler_follows_temperature: bool,
    pub profile: ProfileName,
    pub vapor: VaporSection,
}

impl Default for CellSection {
    fn default() -> Self {
        CellSection {
            temperature_k: 333.15,
            length_m: 0.05,
            beam_diameter_m: 0.01,
            buffer_gas: "Ne".into(),
            buffer_pressure_torr: 1.0,
            configuration: ConfigurationName::Zeeman,
            pump_cross_section_m2: 0.0,
            number_density_per_m3: None,
            doppler_width_hz: None,
            doppler_reference_temperature_k: 363.0,
            doppler_follows_temperature: false,
            profile: ProfileName::Lorentzian,
            vapor: VaporSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpacingName {
    Sinh,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeReferenceName {
    Input,
    Transmitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Pump power for single scans.
    pub pump_power_w: f64,
    pub pump_powers_w: Vec<f64>,
    pub temperatures_k: Vec<f64>,
    pub delta2_points: usize,
    /// Half-span of the δ₂ grid in expected FWHMs.
    pub delta2_span_fwhm: f64,
    pub delta2_spacing: SpacingName,
    pub slope_reference: SlopeReferenceName,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            pump_power_w: 1.2e-3,
            pump_powers_w: vec![
                1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4, 7e-4, 8e-4, 9e-4, 1e-3, 1.1e-3, 1.2e-3,
            ],
            temperatures_k: vec![333.15, 343.15, 353.15, 363.15, 373.15],
            delta2_points: 401,
            delta2_span_fwhm: 50.0,
            delta2_spacing: SpacingName::Sinh,
            slope_reference: SlopeReferenceName::Input,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub quad_rel_tol: f64,
    pub quad_max_subdivisions: usize,
    pub n_slices: usize,
    pub fit_step_tol: f64,
    pub fit_max_iterations: usize,
    pub fit_jacobian_step: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        let s = SolverConfig::default();
        Numerics {
            quad_rel_tol: q.rel_tol,
            quad_max_subdivisions: q.max_subdivisions,
            n_slices: eit_core::propagation::DEFAULT_SLICES,
            fit_step_tol: s.step_tol,
            fit_max_iterations: s.max_iterations,
            fit_jacobian_step: s.jacobian_step,
        }
    }
}

fn check(ok: bool, field: &str, msg: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: {msg}")))
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    check(
        v > 0.0 && v.is_finite(),
        field,
        format_args!("must be positive, got {v}"),
    )
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    check(
        v >= 0.0 && v.is_finite(),
        field,
        format_args!("must be non-negative, got {v}"),
    )
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.constants;
        for (field, got, want) in [
            ("constants.hbar_j_s", c.hbar_j_s, units::HBAR),
            ("constants.epsilon0_f_per_m", c.epsilon0_f_per_m, units::EPSILON_0),
            (
                "constants.speed_of_light_m_per_s",
                c.speed_of_light_m_per_s,
                units::SPEED_OF_LIGHT,
            ),
            ("constants.boltzmann_j_per_k", c.boltzmann_j_per_k, units::BOLTZMANN),
        ] {
            check(
                (got / want - 1.0).abs() < 1e-9,
                field,
                format_args!("fundamental constants are fixed at {want:e}"),
            )?;
        }
        positive("constants.atom_mass_kg", c.atom_mass_kg)?;
        positive("constants.dipole_moment_c_m", c.dipole_moment_c_m)?;
        positive("constants.wavelength_m", c.wavelength_m)?;
        positive("constants.gamma_hz", c.gamma_hz)?;

        let s = &self.system;
        non_negative("system.gamma_bc_hz", s.gamma_bc_hz)?;
        non_negative("system.gamma_pe_hz", s.gamma_pe_hz)?;
        non_negative("system.signal_rabi_hz", s.signal_rabi_hz)?;
        check(
            s.pump_detuning_hz.is_finite(),
            "system.pump_detuning_hz",
            "must be finite",
        )?;
        check(
            (0.0..=1.0).contains(&s.decay_to_b_fraction),
            "system.decay_to_b_fraction",
            "must lie in [0, 1]",
        )?;

        let cell = &self.cell;
        check(
            cell.temperature_k > 273.0 && cell.temperature_k < 450.0,
            "cell.temperature_k",
            format_args!("must lie in (273, 450) K, got {}", cell.temperature_k),
        )?;
        positive("cell.length_m", cell.length_m)?;
        positive("cell.beam_diameter_m", cell.beam_diameter_m)?;
        non_negative("cell.buffer_pressure_torr", cell.buffer_pressure_torr)?;
        non_negative("cell.pump_cross_section_m2", cell.pump_cross_section_m2)?;
        if let Some(n) = cell.number_density_per_m3 {
            positive("cell.number_density_per_m3", n)?;
        }
        if let Some(w) = cell.doppler_width_hz {
            positive("cell.doppler_width_hz", w)?;
        }
        positive(
            "cell.doppler_reference_temperature_k",
            cell.doppler_reference_temperature_k,
        )?;
        positive("cell.vapor.melting_point_k", cell.vapor.melting_point_k)?;

        let sw = &self.sweep;
        positive("sweep.pump_power_w", sw.pump_power_w)?;
        check(!sw.pump_powers_w.is_empty(), "sweep.pump_powers_w", "must not be empty")?;
        for &p in &sw.pump_powers_w {
            positive("sweep.pump_powers_w", p)?;
        }
        check(
            sw.pump_powers_w.windows(2).all(|w| w[1] > w[0]),
            "sweep.pump_powers_w",
            "must be strictly increasing",
        )?;
        check(
            !sw.temperatures_k.is_empty(),
            "sweep.temperatures_k",
            "must not be empty",
        )?;
        for &t in &sw.temperatures_k {
            check(
                t > 273.0 && t < 450.0,
                "sweep.temperatures_k",
                format_args!("{t} K outside (273, 450) K"),
            )?;
        }
        check(
            sw.delta2_points >= 16 && sw.delta2_points % 2 == 1,
            "sweep.delta2_points",
            format_args!("must be odd and at least 17, got {}", sw.delta2_points),
        )?;
        positive("sweep.delta2_span_fwhm", sw.delta2_span_fwhm)?;

        let n = &self.numerics;
        positive("numerics.quad_rel_tol", n.quad_rel_tol)?;
        check(
            n.quad_max_subdivisions >= 1,
            "numerics.quad_max_subdivisions",
            "must be at least 1",
        )?;
        check(
            n.n_slices >= MIN_SLICES,
            "numerics.n_slices",
            format_args!("must be at least {MIN_SLICES}, got {}", n.n_slices),
        )?;
        positive("numerics.fit_step_tol", n.fit_step_tol)?;
        check(
            n.fit_max_iterations >= 1,
            "numerics.fit_max_iterations",
            "must be at least 1",
        )?;
        positive("numerics.fit_jacobian_step", n.fit_jacobian_step)?;

        Ok(())
    }

    /// The weak-signal guard for a run whose weakest pump is `omega_c`.
    pub fn check_weak_signal(&self, omega_c: f64) -> Result<(), CliError> {
        self.lambda_system(omega_c)
            .check_weak_signal()
            .map_err(|e| CliError::Config(format!("system.signal_rabi_hz: {e}")))
    }

    pub fn gamma(&self) -> f64 {
        TWO_PI * self.constants.gamma_hz
    }

    /// The Λ system with pump Rabi frequency `omega_c` (rad/s).
    pub fn lambda_system(&self, omega_c: f64) -> LambdaSystem {
        let s = &self.system;
        let gamma = self.gamma();
        LambdaSystem {
            omega_b: TWO_PI * s.signal_rabi_hz,
            omega_c,
            delta_pump: TWO_PI * s.pump_detuning_hz,
            delta2: 0.0,
            gamma_b_decay: gamma * s.decay_to_b_fraction,
            gamma_c_decay: gamma * (1.0 - s.decay_to_b_fraction),
            gamma_bc: TWO_PI * s.gamma_bc_hz,
            gamma_pe: TWO_PI * s.gamma_pe_hz,
            allow_strong_signal: s.allow_strong_signal,
        }
    }

    /// W_d in rad/s at cell temperature `t`.
    pub fn doppler_width_at(&self, t: f64) -> Result<f64, CliError> {
        if let Some(w) = self.cell.doppler_width_hz {
            return Ok(TWO_PI * w);
        }
        let reference = if self.cell.doppler_follows_temperature {
            t
        } else {
            self.cell.doppler_reference_temperature_k
        };
        doppler_width(reference, self.constants.wavelength_m, self.constants.atom_mass_kg).map_err(CliError::numeric)
    }

    pub fn doppler_width(&self) -> Result<f64, CliError> {
        self.doppler_width_at(self.cell.temperature_k)
    }

    pub fn profile(&self) -> Result<DopplerProfile, CliError> {
        let shape = match self.cell.profile {
            ProfileName::Lorentzian => ProfileShape::LorentzianApprox,
            ProfileName::Gaussian => ProfileShape::Gaussian,
        };
        DopplerProfile::new(self.doppler_width()?, shape).map_err(CliError::numeric)
    }

    pub fn medium(&self) -> Result<MediumConfig, CliError> {
        let n = match self.cell.number_density_per_m3 {
            Some(n) => n,
            None => {
                rb_number_density(self.cell.temperature_k, &self.cell.vapor.correlation()).map_err(CliError::numeric)?
            }
        };
        Ok(MediumConfig {
            number_density: n,
            dipole_moment: self.constants.dipole_moment_c_m,
            cell_length: self.cell.length_m,
            beam_diameter: self.cell.beam_diameter_m,
            buffer_gas: BufferGas {
                label: self.cell.buffer_gas.clone(),
                pressure_torr: self.cell.buffer_pressure_torr,
            },
            signal_wavelength: self.constants.wavelength_m,
        })
    }

    pub fn cell_model(&self) -> Result<CellModel, CliError> {
        let doppler = if self.cell.doppler_width_hz.is_none() && self.cell.doppler_follows_temperature {
            DopplerWidth::Thermal {
                atom_mass: self.constants.atom_mass_kg,
            }
        } else {
            DopplerWidth::Fixed(self.doppler_width()?)
        };
        let cell = CellModel {
            medium: self.medium()?,
            temperature: self.cell.temperature_k,
            n_slices: self.numerics.n_slices,
            vapor: self.cell.vapor.correlation(),
            pump_cross_section: self.cell.pump_cross_section_m2,
            doppler,
        };
        cell.validate().map_err(|e| CliError::Config(format!("cell: {e}")))?;
        Ok(cell)
    }

    pub fn configuration(&self) -> PumpConfiguration {
        match self.cell.configuration {
            ConfigurationName::Zeeman => PumpConfiguration::Zeeman,
            ConfigurationName::Hyperfine => PumpConfiguration::Hyperfine,
        }
    }

    pub fn quad(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.numerics.quad_rel_tol,
            abs_tol: 0.0,
            max_subdivisions: self.numerics.quad_max_subdivisions,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.numerics.fit_max_iterations,
            step_tol: self.numerics.fit_step_tol,
            jacobian_step: self.numerics.fit_jacobian_step,
        }
    }

    pub fn scan_grid(&self) -> ScanGrid {
        ScanGrid {
            points: self.sweep.delta2_points,
            span_widths: self.sweep.delta2_span_fwhm,
            spacing: match self.sweep.delta2_spacing {
                SpacingName::Sinh => GridSpacing::Sinh,
                SpacingName::Uniform => GridSpacing::Uniform,
            },
        }
    }

    pub fn power_sweep(&self) -> PowerSweep {
        PowerSweep {
            powers: self.sweep.pump_powers_w.clone(),
            beam_diameter: self.cell.beam_diameter_m,
            dipole_moment: self.constants.dipole_moment_c_m,
        }
    }

    pub fn slope_reference(&self) -> SlopeReference {
        match self.sweep.slope_reference {
            SlopeReferenceName::Input => SlopeReference::Input,
            SlopeReferenceName::Transmitted => SlopeReference::Transmitted,
        }
    }
}
