//! Optically thick vapor cells: saturated Rb density, Beer's-law pump
//! depletion along the cell and the resulting effective lineshape.

use crate::atom::LambdaSystem;
use crate::doppler::{doppler_width, MediumConfig};
use crate::error::{Error, Result};
use crate::fitting::{fit_linear, LinewidthSample, LinewidthSeries, PumpConfiguration};
use crate::lineshape::{fwhm_dephasing, fwhm_numeric, GridSpacing, LineshapeParams, ResonanceScan, ScanKind, ScanMeta};
use crate::units::{BOLTZMANN, EPSILON_0, HBAR, SPEED_OF_LIGHT, TORR};

/// Temperature window over which the density correlation is trusted, K.
pub const DENSITY_RANGE: (f64, f64) = (273.0, 450.0);

pub const DEFAULT_SLICES: usize = 256;
/// Fewest slices accepted from a run configuration. The model itself works
/// down to a single slice.
pub const MIN_SLICES: usize = 16;

/// `log10(P / torr) = a + b/T + c·T + d·log10(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPressureCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LogPressureCoefficients {
    pub fn log10_torr(&self, t: f64) -> f64 {
        self.a + self.b / t + self.c * t + self.d * t.log10()
    }
}

/// Saturated vapor pressure over the solid and liquid phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporPressureCorrelation {
    pub solid: LogPressureCoefficients,
    pub liquid: LogPressureCoefficients,
    pub melting_point: f64,
}

impl VaporPressureCorrelation {
    /// Rubidium (Nesmeyanov form).
    pub const RUBIDIUM: VaporPressureCorrelation = VaporPressureCorrelation {
        solid: LogPressureCoefficients {
            a: -94.048_26,
            b: -1961.258,
            c: -0.037_716_87,
            d: 42.575_26,
        },
        liquid: LogPressureCoefficients {
            a: 15.882_53,
            b: -4529.635,
            c: 0.000_586_63,
            d: -2.991_38,
        },
        melting_point: 312.46,
    };

    /// Saturated vapor pressure in Pa.
    pub fn pressure(&self, t: f64) -> f64 {
        let phase = if t < self.melting_point {
            &self.solid
        } else {
            &self.liquid
        };
        10f64.powf(phase.log10_torr(t)) * TORR
    }
}

impl Default for VaporPressureCorrelation {
    fn default() -> Self {
        Self::RUBIDIUM
    }
}

/// Number density of saturated vapor, atoms/m³.
pub fn rb_number_density(t: f64, vapor: &VaporPressureCorrelation) -> Result<f64> {
    let (min, max) = DENSITY_RANGE;
    if !(t > min && t < max) {
        return Err(Error::Range {
            quantity: "temperature",
            value: t,
            min,
            max,
        });
    }
    Ok(vapor.pressure(t) / (BOLTZMANN * t))
}

/// Rabi frequency of a beam of power `power` (W) spread uniformly over a
/// disk of diameter `beam_diameter` (m).
pub fn rabi_from_power(power: f64, beam_diameter: f64, dipole_moment: f64) -> Result<f64> {
    for (name, v) in [
        ("power", power),
        ("beam_diameter", beam_diameter),
        ("dipole_moment", dipole_moment),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive, got {v}")));
        }
    }
    let radius = beam_diameter / 2.0;
    let intensity = power / (std::f64::consts::PI * radius * radius);
    let field = (2.0 * intensity / (EPSILON_0 * SPEED_OF_LIGHT)).sqrt();
    Ok(dipole_moment * field / HBAR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DopplerWidth {
    /// Held fixed, rad/s.
    Fixed(f64),
    /// Recomputed from the cell temperature for an atom of this mass (kg).
    Thermal { atom_mass: f64 },
}

/// A vapor cell at a given temperature.
///
/// `medium.number_density` starts at the saturated value for `temperature`
/// but may be overridden. The pump is attenuated at α_p = σ·N.
#[derive(Debug, Clone, PartialEq)]
pub struct CellModel {
    pub medium: MediumConfig,
    pub temperature: f64,
    pub n_slices: usize,
    pub vapor: VaporPressureCorrelation,
    /// Effective pump absorption cross-section, m². Zero disables depletion.
    pub pump_cross_section: f64,
    pub doppler: DopplerWidth,
}

impl CellModel {
    pub fn new(medium: MediumConfig, temperature: f64, doppler: DopplerWidth) -> Result<Self> {
        let vapor = VaporPressureCorrelation::default();
        let number_density = rb_number_density(temperature, &vapor)?;
        let cell = CellModel {
            medium: medium.with_number_density(number_density),
            temperature,
            n_slices: DEFAULT_SLICES,
            vapor,
            pump_cross_section: 0.0,
            doppler,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        if self.n_slices == 0 {
            return Err(Error::invalid("n_slices", "need at least one slice"));
        }
        if !(self.pump_cross_section >= 0.0 && self.pump_cross_section.is_finite()) {
            return Err(Error::invalid("pump_cross_section", "must be finite and non-negative"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature", "must be positive"));
        }
        if let DopplerWidth::Fixed(w) = self.doppler {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid("doppler_width", format!("must be positive, got {w}")));
            }
        }
        Ok(())
    }

    /// The same cell heated to `temperature`, with the saturated density.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        let number_density = rb_number_density(temperature, &self.vapor)?;
        Ok(CellModel {
            medium: self.medium.with_number_density(number_density),
            temperature,
            ..self.clone()
        })
    }

    pub fn with_slices(mut self, n_slices: usize) -> Self {
        self.n_slices = n_slices;
        self
    }

    pub fn with_pump_cross_section(mut self, sigma: f64) -> Self {
        self.pump_cross_section = sigma;
        self
    }

    /// Pump intensity absorption coefficient, 1/m.
    pub fn pump_absorption(&self) -> f64 {
        self.pump_cross_section * self.medium.number_density
    }

    pub fn doppler_width(&self) -> Result<f64> {
        match self.doppler {
            DopplerWidth::Fixed(w) => Ok(w),
            DopplerWidth::Thermal { atom_mass } => {
                doppler_width(self.temperature, self.medium.signal_wavelength, atom_mass)
            }
        }
    }
}

/// Ω_c at the `n_slices + 1` slice boundaries z = 0, L/n, …, L.
pub fn pump_profile(cell: &CellModel, omega_c_in: f64) -> Result<Vec<f64>> {
    cell.validate()?;
    if !(omega_c_in > 0.0 && omega_c_in.is_finite()) {
        return Err(Error::invalid("omega_c", format!("must be positive, got {omega_c_in}")));
    }
    let n = cell.n_slices;
    let dz = cell.medium.cell_length / n as f64;
    let decay = cell.pump_absorption() / 2.0;
    Ok((0..=n).map(|i| omega_c_in * (-decay * dz * i as f64).exp()).collect())
}

/// Signal optical depth along the cell at each δ₂, by the trapezoid rule
/// over the local lineshape. `sys.omega_c` is the pump at the entrance.
pub fn optical_depth(cell: &CellModel, sys: &LambdaSystem, grid: &[f64]) -> Result<Vec<f64>> {
    let profile = if sys.omega_c > 0.0 {
        pump_profile(cell, sys.omega_c)?
    } else {
        cell.validate()?;
        vec![0.0; cell.n_slices + 1]
    };
    let w_d = cell.doppler_width()?;
    let n = cell.n_slices;
    let dz = cell.medium.cell_length / n as f64;
    let slices = profile
        .iter()
        .map(|&oc| LineshapeParams::from_system(&sys.with_pump(oc), &cell.medium, w_d))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid
        .iter()
        .map(|&d2| {
            let inner: f64 = slices[1..n].iter().map(|p| p.evaluate(d2)).sum();
            dz * (inner + 0.5 * (slices[0].evaluate(d2) + slices[n].evaluate(d2)))
        })
        .collect())
}

fn meta(cell: &CellModel) -> ScanMeta {
    ScanMeta {
        pump_power: None,
        temperature: Some(cell.temperature),
        cell_length: Some(cell.medium.cell_length),
    }
}

/// Signal transmission exp(−OD) through the cell.
pub fn thick_cell_scan(cell: &CellModel, sys: &LambdaSystem, grid: &[f64]) -> Result<ResonanceScan> {
    let od = optical_depth(cell, sys, grid)?;
    let values = od.iter().map(|d| (-d).exp()).collect();
    Ok(ResonanceScan::new(grid.to_vec(), values, ScanKind::Transmission)?.with_meta(meta(cell)))
}

/// Path-averaged absorption −ln(T)/L, which is what the linewidth is read
/// from: unlike the raw transmission its width does not depend on N.
pub fn thick_cell_absorption(cell: &CellModel, sys: &LambdaSystem, grid: &[f64]) -> Result<ResonanceScan> {
    let length = cell.medium.cell_length;
    let values = optical_depth(cell, sys, grid)?
        .into_iter()
        .map(|d| d / length)
        .collect();
    Ok(ResonanceScan::new(grid.to_vec(), values, ScanKind::Absorption)?.with_meta(meta(cell)))
}

/// Sampling of δ₂ around a resonance of roughly known width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub points: usize,
    /// Half-span in units of the expected FWHM.
    pub span_widths: f64,
    pub spacing: GridSpacing,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            points: 401,
            span_widths: 50.0,
            spacing: GridSpacing::Sinh,
        }
    }
}

impl ScanGrid {
    pub fn around(&self, width: f64) -> Result<Vec<f64>> {
        crate::lineshape::detuning_grid(self.span_widths * width, self.points, self.spacing, width / 2.0)
    }
}

/// Dephasing-law width for the path-averaged pump intensity, used to place
/// the scan grid.
pub fn expected_width(cell: &CellModel, sys: &LambdaSystem) -> Result<f64> {
    let od = cell.pump_absorption() * cell.medium.cell_length;
    let mean_intensity = if od > 1e-12 { (1.0 - (-od).exp()) / od } else { 1.0 };
    let omega = sys.omega_c * mean_intensity.sqrt();
    Ok(fwhm_dephasing(sys.gamma_bc, omega, cell.doppler_width()?, sys.gamma()))
}

/// Linewidth of the cell's path-averaged absorption.
pub fn thick_cell_fwhm(cell: &CellModel, sys: &LambdaSystem, grid: &ScanGrid) -> Result<f64> {
    let width = expected_width(cell, sys)?;
    let scan = thick_cell_absorption(cell, sys, &grid.around(width)?)?;
    fwhm_numeric(&scan)
}

/// Pump powers with the geometry that converts them to Rabi frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweep {
    pub powers: Vec<f64>,
    pub beam_diameter: f64,
    pub dipole_moment: f64,
}

impl PowerSweep {
    pub fn validate(&self) -> Result<()> {
        if self.powers.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::invalid("powers", "must be positive"));
        }
        if self.powers.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("powers", "must be strictly increasing"));
        }
        if !(self.beam_diameter > 0.0) {
            return Err(Error::invalid("beam_diameter", "must be positive"));
        }
        Ok(())
    }

    pub fn rabi_frequencies(&self) -> Result<Vec<f64>> {
        self.validate()?;
        self.powers
            .iter()
            .map(|&p| rabi_from_power(p, self.beam_diameter, self.dipole_moment))
            .collect()
    }

    pub fn with_beam_diameter(&self, beam_diameter: f64) -> Self {
        PowerSweep {
            beam_diameter,
            ..self.clone()
        }
    }
}

/// Thick-cell FWHM at each power of the sweep.
pub fn power_series(
    cell: &CellModel,
    sys: &LambdaSystem,
    sweep: &PowerSweep,
    grid: &ScanGrid,
    configuration: PumpConfiguration,
) -> Result<LinewidthSeries> {
    let rabi = sweep.rabi_frequencies()?;
    let samples = sweep
        .powers
        .iter()
        .zip(&rabi)
        .map(|(&power, &oc)| {
            Ok(LinewidthSample {
                pump_power: power,
                fwhm: thick_cell_fwhm(cell, &sys.with_pump(oc), grid)?,
                fwhm_sigma: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LinewidthSeries::new(
        samples,
        cell.temperature,
        configuration,
        cell.medium.buffer_gas.label.clone(),
    )
}

/// Which pump power the FWHM is plotted against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SlopeReference {
    /// Power entering the cell.
    #[default]
    Input,
    /// Power leaving the cell, P·exp(−α_p L).
    Transmitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePoint {
    pub temperature: f64,
    /// rad/s per W.
    pub slope: f64,
    /// rad/s.
    pub intercept: f64,
}

/// Linear-fit slope of FWHM against pump power at each temperature.
pub fn slope_vs_temperature(
    template: &CellModel,
    sys: &LambdaSystem,
    temperatures: &[f64],
    sweep: &PowerSweep,
    grid: &ScanGrid,
    reference: SlopeReference,
) -> Result<Vec<SlopePoint>> {
    if sweep.powers.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: sweep.powers.len(),
        });
    }
    let configuration = if template.pump_cross_section > 0.0 {
        PumpConfiguration::Hyperfine
    } else {
        PumpConfiguration::Zeeman
    };
    temperatures
        .iter()
        .map(|&t| {
            let cell = template.at_temperature(t)?;
            let mut series = power_series(&cell, sys, sweep, grid, configuration)?;
            if reference == SlopeReference::Transmitted {
                let factor = (-cell.pump_absorption() * cell.medium.cell_length).exp();
                series = series.with_powers_scaled(factor)?;
            }
            let fit = fit_linear(&series)?;
            Ok(SlopePoint {
                temperature: t,
                slope: fit.value("slope").expect("linear fit has a slope"),
                intercept: fit.value("intercept").expect("linear fit has an intercept"),
            })
        })
        .collect()
}
