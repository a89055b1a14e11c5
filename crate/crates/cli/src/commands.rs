//! The subcommands as pure functions from configuration to output files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use eit_core::fitting::{
    compare_models, fit_linear, fit_lorentzian_with, fit_popexchange, ExchangeForward, ExchangeVariant, FitResult,
    LinewidthSample, LinewidthSeries,
};
use eit_core::lineshape::{popexchange_scan_numeric, popexchange_width_estimate, ResonanceScan, ScanKind};
use eit_core::propagation::{expected_width, optical_depth, power_series, rabi_from_power, slope_vs_temperature};
use eit_core::units::TWO_PI;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{self, num, opt_num, Table};

/// One file produced by a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Output {
    fn new(name: &str, bytes: impl Into<Vec<u8>>) -> Self {
        Output {
            name: name.to_string(),
            bytes: bytes.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesModel {
    Linear,
    Exchange,
    ExchangeScaled,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Scan,
    Series,
}

fn hz(w: f64) -> f64 {
    w / TWO_PI
}

/// Clean scan columns: δ₂ (Hz), absorption (1/m), transmission.
struct ScanColumns {
    delta2_hz: Vec<f64>,
    absorption: Vec<f64>,
    transmission: Vec<f64>,
    meta: Table,
}

fn scan_columns(cfg: &RunConfig) -> Result<ScanColumns, CliError> {
    let power = cfg.sweep.pump_power_w;
    let omega_c =
        rabi_from_power(power, cfg.cell.beam_diameter_m, cfg.constants.dipole_moment_c_m).map_err(CliError::numeric)?;
    cfg.check_weak_signal(omega_c)?;
    let sys = cfg.lambda_system(omega_c);
    let cell = cfg.cell_model()?;
    let length = cfg.cell.length_m;

    let (model, grid, od) = if sys.gamma_pe > 0.0 {
        // the exchange lineshape has no closed form; the pump is taken as
        // uniform along the cell
        if cell.pump_cross_section > 0.0 {
            return Err(CliError::Config(
                "cell.pump_cross_section_m2: exchange-model scans assume an undepleted pump".into(),
            ));
        }
        let profile = cfg.profile()?;
        let width = popexchange_width_estimate(&sys, profile.w_d);
        let grid = cfg.scan_grid().around(width).map_err(CliError::numeric)?;
        let scan =
            popexchange_scan_numeric(&sys, &cell.medium, &profile, &grid, &cfg.quad()).map_err(CliError::numeric)?;
        let od = scan.values().iter().map(|a| a * length).collect();
        ("exchange", grid, od)
    } else {
        let width = expected_width(&cell, &sys).map_err(CliError::numeric)?;
        let grid = cfg.scan_grid().around(width).map_err(CliError::numeric)?;
        let od = optical_depth(&cell, &sys, &grid).map_err(CliError::numeric)?;
        ("dephasing", grid, od)
    };

    let meta = Table::new(table::SCAN.columns)
        .meta("model", model)
        .meta("pump_power_w", num(power))
        .meta("omega_c_hz", num(hz(omega_c)))
        .meta("temperature_k", num(cfg.cell.temperature_k))
        .meta("cell_length_m", num(length))
        .meta("number_density_per_m3", num(cell.medium.number_density));
    Ok(ScanColumns {
        delta2_hz: grid.iter().map(|&d| hz(d)).collect(),
        absorption: od.iter().map(|d| d / length).collect(),
        transmission: od.iter().map(|d| (-d).exp()).collect(),
        meta,
    })
}

fn scan_table(cols: &ScanColumns) -> Vec<u8> {
    let mut t = cols.meta.clone();
    for i in 0..cols.delta2_hz.len() {
        t.push(vec![
            num(cols.delta2_hz[i]),
            num(cols.absorption[i]),
            num(cols.transmission[i]),
        ]);
    }
    t.to_bytes(&table::SCAN)
}

pub fn simulate_scan(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let cols = scan_columns(cfg)?;
    Ok(vec![Output::new("scan.csv", scan_table(&cols))])
}

/// FWHM (rad/s) at each configured power, with the Rabi frequencies.
fn linewidths(cfg: &RunConfig) -> Result<(Vec<f64>, LinewidthSeries), CliError> {
    let sweep = cfg.power_sweep();
    let rabi = sweep.rabi_frequencies().map_err(CliError::numeric)?;
    cfg.check_weak_signal(rabi.iter().copied().fold(f64::INFINITY, f64::min))?;
    let sys = cfg.lambda_system(0.0);
    let series = if sys.gamma_pe > 0.0 {
        if cfg.cell.pump_cross_section_m2 > 0.0 {
            return Err(CliError::Config(
                "cell.pump_cross_section_m2: exchange-model sweeps assume an undepleted pump".into(),
            ));
        }
        let mut fwd = ExchangeForward::new(
            sys,
            cfg.profile()?,
            cfg.quad(),
            sweep.beam_diameter,
            sweep.dipole_moment,
        );
        let samples = sweep
            .powers
            .iter()
            .zip(&rabi)
            .map(|(&p, &oc)| {
                Ok(LinewidthSample {
                    pump_power: p,
                    fwhm: fwd.fwhm(sys.gamma_pe, oc).map_err(CliError::numeric)?,
                    fwhm_sigma: None,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        LinewidthSeries::new(
            samples,
            cfg.cell.temperature_k,
            cfg.configuration(),
            cfg.cell.buffer_gas.clone(),
        )
        .map_err(CliError::numeric)?
    } else {
        let cell = cfg.cell_model()?;
        power_series(&cell, &sys, &sweep, &cfg.scan_grid(), cfg.configuration()).map_err(CliError::numeric)?
    };
    Ok((rabi, series))
}

fn series_meta(cfg: &RunConfig, columns: &[&str]) -> Table {
    Table::new(columns)
        .meta("temperature_k", num(cfg.cell.temperature_k))
        .meta("configuration", cfg.configuration().label())
        .meta("cell", &cfg.cell.buffer_gas)
}

pub fn sweep_power(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let (rabi, series) = linewidths(cfg)?;
    let mut t = series_meta(cfg, &table::SERIES.columns[..3]);
    for (s, oc) in series.samples().iter().zip(&rabi) {
        t.push(vec![num(s.pump_power), num(hz(*oc)), num(hz(s.fwhm))]);
    }
    Ok(vec![Output::new("series.csv", t.to_bytes(&table::SERIES))])
}

pub fn sweep_temperature(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    if cfg.system.gamma_pe_hz > 0.0 {
        return Err(CliError::Config(
            "system.gamma_pe_hz: temperature sweeps use the dephasing model".into(),
        ));
    }
    let sweep = cfg.power_sweep();
    let rabi = sweep.rabi_frequencies().map_err(CliError::numeric)?;
    cfg.check_weak_signal(rabi.iter().copied().fold(f64::INFINITY, f64::min))?;
    let points = slope_vs_temperature(
        &cfg.cell_model()?,
        &cfg.lambda_system(0.0),
        &cfg.sweep.temperatures_k,
        &sweep,
        &cfg.scan_grid(),
        cfg.slope_reference(),
    )
    .map_err(CliError::numeric)?;
    let mut t = Table::new(table::SLOPES.columns)
        .meta("configuration", cfg.configuration().label())
        .meta(
            "slope_reference",
            match cfg.sweep.slope_reference {
                crate::config::SlopeReferenceName::Input => "input",
                crate::config::SlopeReferenceName::Transmitted => "transmitted",
            },
        );
    for p in points {
        t.push(vec![num(p.temperature), num(hz(p.slope)), num(hz(p.intercept))]);
    }
    Ok(vec![Output::new("slopes.csv", t.to_bytes(&table::SLOPES))])
}

/// Parameter rows with unit suffixes; `to_hz` marks angular quantities.
fn fit_rows(t: &mut Table, fit: &FitResult, units: &[(&str, &str, bool)]) {
    for p in &fit.params {
        let (suffix, convert) = units
            .iter()
            .find(|(n, _, _)| *n == p.name)
            .map(|(_, s, c)| (*s, *c))
            .unwrap_or(("", false));
        let f = |v: f64| if convert { hz(v) } else { v };
        let name = if suffix.is_empty() {
            p.name.to_string()
        } else {
            format!("{}_{suffix}", p.name)
        };
        t.push(vec![
            fit.model.to_string(),
            name,
            num(f(p.value)),
            opt_num(p.sigma.map(f)),
        ]);
    }
}

fn fit_table(fit: &FitResult) -> Table {
    Table::new(table::FIT.columns)
        .meta("rss", num(fit.rss))
        .meta("dof", fit.dof)
        .meta("iterations", fit.iterations)
}

pub fn fit_scan(cfg: &RunConfig, input: &[u8]) -> Result<Vec<Output>, CliError> {
    let data = Table::parse(input, &table::SCAN)?;
    let scan = ResonanceScan::new(
        data.column("delta2_hz")?,
        data.column("absorption_per_m")?,
        ScanKind::Absorption,
    )
    .map_err(CliError::data)?;
    let fit = fit_lorentzian_with(&scan, None, &cfg.solver()).map_err(CliError::numeric)?;
    let mut t = fit_table(&fit);
    fit_rows(
        &mut t,
        &fit,
        &[
            ("center", "hz", false),
            ("fwhm", "hz", false),
            ("depth", "per_m", false),
            ("baseline", "per_m", false),
        ],
    );
    Ok(vec![Output::new("fit.csv", t.to_bytes(&table::FIT))])
}

/// Reads a linewidth series; widths are converted to rad/s.
pub fn read_series(cfg: &RunConfig, input: &[u8]) -> Result<LinewidthSeries, CliError> {
    let data = Table::parse(input, &table::SERIES)?;
    let powers = data.column("power_w")?;
    let fwhms = data.column("fwhm_hz")?;
    let sigmas = data
        .optional_column("fwhm_sigma_hz")?
        .unwrap_or_else(|| vec![None; powers.len()]);
    let samples = powers
        .iter()
        .zip(&fwhms)
        .zip(&sigmas)
        .map(|((&p, &f), s)| LinewidthSample {
            pump_power: p,
            fwhm: TWO_PI * f,
            fwhm_sigma: s.map(|s| TWO_PI * s),
        })
        .collect();
    let temperature = data.meta_f64("temperature_k").unwrap_or(cfg.cell.temperature_k);
    LinewidthSeries::new(samples, temperature, cfg.configuration(), cfg.cell.buffer_gas.clone()).map_err(CliError::data)
}

fn exchange_forward(cfg: &RunConfig) -> Result<ExchangeForward, CliError> {
    // pure exchange: no ground-state dephasing in the template
    let mut template = cfg.lambda_system(0.0);
    template.gamma_bc = 0.0;
    template.gamma_pe = 0.0;
    template.omega_b = 0.0;
    Ok(ExchangeForward::new(
        template,
        cfg.profile()?,
        cfg.quad(),
        cfg.cell.beam_diameter_m,
        cfg.constants.dipole_moment_c_m,
    ))
}

const LINEAR_UNITS: &[(&str, &str, bool)] = &[
    ("slope", "hz_per_w", true),
    ("intercept", "hz", true),
    ("gamma_bc", "hz", true),
];
const EXCHANGE_UNITS: &[(&str, &str, bool)] = &[("gamma_pe", "hz", true)];

pub fn fit_series(cfg: &RunConfig, input: &[u8], model: SeriesModel) -> Result<Vec<Output>, CliError> {
    let series = read_series(cfg, input)?;
    let mut out = Vec::new();
    let linear = match model {
        SeriesModel::Linear | SeriesModel::Both => {
            let fit = fit_linear(&series).map_err(CliError::numeric)?;
            let mut t = fit_table(&fit);
            fit_rows(&mut t, &fit, LINEAR_UNITS);
            out.push(Output::new("fit_linear.csv", t.to_bytes(&table::FIT)));
            Some(fit)
        }
        _ => None,
    };
    let exchange = match model {
        SeriesModel::Exchange | SeriesModel::ExchangeScaled | SeriesModel::Both => {
            let variant = if model == SeriesModel::ExchangeScaled {
                ExchangeVariant::RateAndScale
            } else {
                ExchangeVariant::RateOnly
            };
            let mut fwd = exchange_forward(cfg)?;
            let fit = fit_popexchange(&series, &mut fwd, variant).map_err(CliError::numeric)?;
            let mut t = fit_table(&fit);
            fit_rows(&mut t, &fit, EXCHANGE_UNITS);
            out.push(Output::new("fit_exchange.csv", t.to_bytes(&table::FIT)));
            Some(fit)
        }
        _ => None,
    };
    if let (Some(lin), Some(exch)) = (&linear, &exchange) {
        let cmp = compare_models(&series, lin, exch, cfg.doppler_width()?, cfg.gamma()).map_err(CliError::numeric)?;
        out.push(Output::new("report.txt", cmp.to_text()));
        out.push(Output::new("report.csv", cmp.to_csv()));
    }
    Ok(out)
}

/// Simulated data with additive Gaussian noise of `noise_pct` percent.
///
/// Scans: σ is a percentage of the largest absorption, and the transmission
/// carries the same perturbation of the optical depth. Series: σ is a
/// percentage of each width and is recorded in `fwhm_sigma_hz`. With zero
/// noise the output equals the matching simulate/sweep output.
pub fn synth(cfg: &RunConfig, kind: SynthKind, noise_pct: f64, seed: u64) -> Result<Vec<Output>, CliError> {
    if !(noise_pct >= 0.0 && noise_pct.is_finite()) {
        return Err(CliError::Config(format!(
            "--noise must be a non-negative percentage, got {noise_pct}"
        )));
    }
    let rel = noise_pct / 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    match kind {
        SynthKind::Scan => {
            let mut cols = scan_columns(cfg)?;
            let sigma = rel * cols.absorption.iter().copied().fold(0.0, f64::max);
            let length = cfg.cell.length_m;
            for (a, t) in cols.absorption.iter_mut().zip(cols.transmission.iter_mut()) {
                let e = sigma * normal();
                *a += e;
                *t *= (-e * length).exp();
            }
            Ok(vec![Output::new("synth_scan.csv", scan_table(&cols))])
        }
        SynthKind::Series => {
            let (rabi, series) = linewidths(cfg)?;
            let mut t = series_meta(cfg, table::SERIES.columns);
            for (s, oc) in series.samples().iter().zip(&rabi) {
                let clean = hz(s.fwhm);
                let noisy = clean * (1.0 + rel * normal());
                let sigma = (rel > 0.0).then_some(rel * clean);
                t.push(vec![num(s.pump_power), num(hz(*oc)), num(noisy), opt_num(sigma)]);
            }
            Ok(vec![Output::new("synth_series.csv", t.to_bytes(&table::SERIES))])
        }
    }
}
