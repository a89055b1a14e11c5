//! EIT absorption profile, linewidth laws for the dephasing and
//! population-exchange models, and FWHM extraction from sampled scans.

use std::f64::consts::{LN_2, PI};

use crate::atom::{bloch_linear_response, LambdaSystem};
use crate::doppler::{doppler_average, DopplerProfile, MediumConfig};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Minimum number of samples a scan needs before it can be fitted.
pub const MIN_FIT_SAMPLES: usize = 16;

/// Lorentzian absorption dip α_max − (α_max − α_min)/(1 + (2(δ₂−c)/FWHM)²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeParams {
    /// Off-resonant absorption, 1/m.
    pub alpha_max: f64,
    /// Absorption at two-photon resonance, 1/m.
    pub alpha_min: f64,
    /// Full width at half depth, rad/s.
    pub fwhm: f64,
    /// Dip centre, rad/s.
    pub center: f64,
}

impl LineshapeParams {
    /// Dephasing-model parameters for a Lorentzian Doppler profile of
    /// half-width `w_d` with the pump at line centre.
    pub fn from_system(sys: &LambdaSystem, medium: &MediumConfig, w_d: f64) -> Result<Self> {
        sys.validate()?;
        sys.check_weak_signal()?;
        medium.validate()?;
        if !(w_d > 0.0) {
            return Err(Error::invalid("w_d", format!("must be positive, got {w_d}")));
        }
        let doppler = 2.0 * w_d + sys.gamma();
        let scale = 2.0 * medium.wavenumber() * medium.coupling_prefactor() * (PI * LN_2).sqrt();
        let pump = sys.omega_c * sys.omega_c;
        // 1/(B + 2Ω²/γ) written so that γ_bc = 0 gives exactly zero
        let alpha_min = scale * sys.gamma_bc / (doppler * sys.gamma_bc + 2.0 * pump);
        if !alpha_min.is_finite() {
            return Err(Error::Pole {
                context: "line-centre absorption",
                magnitude: 0.0,
            });
        }
        Ok(LineshapeParams {
            alpha_max: scale / doppler,
            alpha_min,
            fwhm: fwhm_dephasing(sys.gamma_bc, sys.omega_c, w_d, sys.gamma()),
            center: 0.0,
        })
    }

    pub fn depth(&self) -> f64 {
        self.alpha_max - self.alpha_min
    }

    pub fn evaluate(&self, delta2: f64) -> f64 {
        let x = 2.0 * (delta2 - self.center) / self.fwhm;
        self.alpha_max - self.depth() / (1.0 + x * x)
    }
}

/// Intensity absorption coefficient α(δ₂) = (ω/c) Im χ_b, 1/m.
pub fn absorption_coefficient(delta2: f64, sys: &LambdaSystem, medium: &MediumConfig, w_d: f64) -> Result<f64> {
    let params = LineshapeParams::from_system(sys, medium, w_d)?;
    Ok(params.evaluate(delta2))
}

/// FWHM = 2γ_bc + 4Ω_c²/(2W_d + Γ).
pub fn fwhm_dephasing(gamma_bc: f64, omega_c: f64, w_d: f64, gamma: f64) -> f64 {
    2.0 * gamma_bc + 4.0 * omega_c * omega_c / (2.0 * w_d + gamma)
}

/// High-power limit of the population-exchange linewidth,
/// 4γ_pe W_d/Γ + 2Ω_c²/W_d.
pub fn fwhm_popexchange_asymptote(gamma_pe: f64, omega_c: f64, w_d: f64, gamma: f64) -> f64 {
    4.0 * gamma_pe * w_d / gamma + 2.0 * omega_c * omega_c / w_d
}

/// Ratio of the exchange-model intercept to the dephasing intercept at
/// equal rates, 2W_d/Γ.
pub fn intercept_ratio(w_d: f64, gamma: f64) -> f64 {
    2.0 * w_d / gamma
}

/// Largest exchange rate compatible with an observed zero-power intercept,
/// obtained by attributing the whole intercept to exchange.
pub fn exchange_rate_bound(intercept: f64, w_d: f64, gamma: f64) -> f64 {
    intercept * gamma / (4.0 * w_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    /// Absorption coefficient in 1/m; the resonance is a minimum.
    Absorption,
    /// Dimensionless transmission; the resonance is a maximum.
    Transmission,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScanMeta {
    pub pump_power: Option<f64>,
    pub temperature: Option<f64>,
    pub cell_length: Option<f64>,
}

/// Samples of absorption or transmission against δ₂ (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan {
    delta2: Vec<f64>,
    values: Vec<f64>,
    kind: ScanKind,
    pub meta: ScanMeta,
}

impl ResonanceScan {
    pub fn new(delta2: Vec<f64>, values: Vec<f64>, kind: ScanKind) -> Result<Self> {
        if delta2.len() != values.len() {
            return Err(Error::invalid(
                "values",
                format!("{} detunings but {} values", delta2.len(), values.len()),
            ));
        }
        if delta2.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("delta2", "must be strictly increasing"));
        }
        if delta2.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "must be finite"));
        }
        if kind == ScanKind::Transmission && values.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::invalid("transmission", "must lie in [0, 1]"));
        }
        Ok(ResonanceScan {
            delta2,
            values,
            kind,
            meta: ScanMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: ScanMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn delta2(&self) -> &[f64] {
        &self.delta2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ScanKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.delta2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta2.is_empty()
    }

    /// The same scan with δ₂ → −δ₂.
    pub fn mirrored(&self) -> Self {
        ResonanceScan {
            delta2: self.delta2.iter().rev().map(|d| -d).collect(),
            values: self.values.iter().rev().copied().collect(),
            kind: self.kind,
            meta: self.meta,
        }
    }

    /// The same scan with every δ₂ shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        ResonanceScan {
            delta2: self.delta2.iter().map(|d| d + offset).collect(),
            ..self.clone()
        }
    }

    /// Converts an absorption scan to transmission exp(−αL).
    pub fn to_transmission(&self, length: f64) -> Result<Self> {
        if self.kind != ScanKind::Absorption {
            return Err(Error::invalid("kind", "scan already holds transmission"));
        }
        let values = self.values.iter().map(|a| (-a * length).exp()).collect();
        let mut meta = self.meta;
        meta.cell_length = Some(length);
        Ok(ResonanceScan::new(self.delta2.clone(), values, ScanKind::Transmission)?.with_meta(meta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Uniform,
    /// Samples at `scale·sinh(t)` for uniform t: dense near the centre,
    /// reaching far into the wings.
    Sinh,
}

/// Odd-sized grid symmetric about zero, spanning ±`span`.
pub fn detuning_grid(span: f64, points: usize, spacing: GridSpacing, scale: f64) -> Result<Vec<f64>> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(Error::invalid("points", format!("need an odd count ≥ 3, got {points}")));
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::invalid("span", format!("must be positive, got {span}")));
    }
    let half = (points / 2) as i64;
    let grid = match spacing {
        GridSpacing::Uniform => (-half..=half).map(|k| span * k as f64 / half as f64).collect(),
        GridSpacing::Sinh => {
            if !(scale > 0.0) {
                return Err(Error::invalid("scale", "sinh grid needs a positive scale"));
            }
            let t_max = (span / scale).asinh();
            (-half..=half)
                .map(|k| scale * (t_max * k as f64 / half as f64).sinh())
                .collect()
        }
    };
    Ok(grid)
}

/// FWHM of the resonance, taking the half level midway between the
/// extremum and the opposite extreme of the scan.
pub fn fwhm_numeric(scan: &ResonanceScan) -> Result<f64> {
    let wing = match scan.kind {
        ScanKind::Absorption => scan.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ScanKind::Transmission => scan.values.iter().copied().fold(f64::INFINITY, f64::min),
    };
    fwhm_numeric_with_baseline(scan, wing)
}

/// FWHM with a known off-resonant level, for scans that stop short of the
/// asymptote.
pub fn fwhm_numeric_with_baseline(scan: &ResonanceScan, baseline: f64) -> Result<f64> {
    let n = scan.len();
    if n < 3 {
        return Err(Error::TooFewSamples { need: 3, got: n });
    }
    let v = &scan.values;
    let x = &scan.delta2;
    // orient so the resonance is a minimum
    let sign = match scan.kind {
        ScanKind::Absorption => 1.0,
        ScanKind::Transmission => -1.0,
    };
    let (i0, extremum) =
        v.iter().map(|&y| sign * y).enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, y)| if y < best.1 { (i, y) } else { best },
        );
    let wing = sign * baseline;
    let contrast = wing - extremum;
    if !(contrast > 1e-12 * wing.abs().max(extremum.abs())) {
        return Err(Error::NoDip("no contrast between resonance and wings"));
    }
    if i0 == 0 || i0 == n - 1 {
        return Err(Error::NoDip("extremum at the scan boundary"));
    }
    let half = extremum + 0.5 * contrast;
    let above: Vec<bool> = v.iter().map(|&y| sign * y >= half).collect();
    let crossings: Vec<usize> = (0..n - 1).filter(|&i| above[i] != above[i + 1]).collect();
    if crossings.len() > 2 {
        return Err(Error::Ambiguous {
            crossings: crossings.len(),
        });
    }
    let left = crossings.iter().rev().find(|&&i| i < i0);
    let right = crossings.iter().find(|&&i| i >= i0);
    let (Some(&l), Some(&r)) = (left, right) else {
        return Err(Error::NoDip("half level not reached on both sides"));
    };
    let cross = |i: usize| {
        let (y0, y1) = (sign * v[i], sign * v[i + 1]);
        x[i] + (half - y0) * (x[i + 1] - x[i]) / (y1 - y0)
    };
    Ok(cross(r) - cross(l))
}

/// Dephasing-model absorption sampled on `grid`.
pub fn dephasing_scan(sys: &LambdaSystem, medium: &MediumConfig, w_d: f64, grid: &[f64]) -> Result<ResonanceScan> {
    let params = LineshapeParams::from_system(sys, medium, w_d)?;
    let values = grid.iter().map(|&d| params.evaluate(d)).collect();
    ResonanceScan::new(grid.to_vec(), values, ScanKind::Absorption)
}

/// Absorption scan of the population-exchange model.
///
/// There is no closed form, so at every δ₂ the weak-signal response comes
/// from the linearized master equation (which keeps the population left in
/// |c⟩ and |a⟩ by exchange) and is Doppler-averaged numerically. Pure
/// dephasing is whatever `sys.gamma_bc` holds; the exchange-only model sets
/// it to zero.
pub fn popexchange_scan_numeric(
    sys: &LambdaSystem,
    medium: &MediumConfig,
    profile: &DopplerProfile,
    grid: &[f64],
    quad: &QuadratureConfig,
) -> Result<ResonanceScan> {
    sys.validate()?;
    medium.validate()?;
    let far = grid
        .iter()
        .copied()
        .fold(0.0, |m: f64, d| if d.abs() > m.abs() { d } else { m });
    let quad = &background_tolerance(sys, profile, quad, far)?;
    let scale = medium.wavenumber() * medium.coupling_prefactor();
    let values = grid
        .iter()
        .map(|&d2| {
            let at = sys.with_two_photon_detuning(d2);
            doppler_average(&at, profile, quad, bloch_linear_response).map(|chi| scale * chi.im)
        })
        .collect::<Result<Vec<f64>>>()?;
    ResonanceScan::new(grid.to_vec(), values, ScanKind::Absorption)
}

/// Adds an absolute tolerance tied to the off-resonant response at `far`.
///
/// Near a deep dip the averaged response is a small difference of large
/// contributions, and a purely relative target would chase rounding noise.
fn background_tolerance(
    sys: &LambdaSystem,
    profile: &DopplerProfile,
    quad: &QuadratureConfig,
    far: f64,
) -> Result<QuadratureConfig> {
    let reference = doppler_average(&sys.with_two_photon_detuning(far), profile, quad, bloch_linear_response)?;
    Ok(QuadratureConfig {
        abs_tol: quad.abs_tol.max(quad.rel_tol * reference.norm()),
        ..*quad
    })
}

/// Width scale for a scan grid around the exchange-model resonance.
///
/// The asymptote overshoots badly at weak pump, so the dephasing law with
/// the exchange rate counted as dephasing is taken when it is smaller.
pub fn popexchange_width_estimate(sys: &LambdaSystem, w_d: f64) -> f64 {
    let strong = fwhm_popexchange_asymptote(sys.gamma_pe, sys.omega_c, w_d, sys.gamma()) + 2.0 * sys.gamma_bc;
    let weak = fwhm_dephasing(sys.gamma_bc + sys.gamma_pe, sys.omega_c, w_d, sys.gamma());
    strong.min(weak)
}

/// Detuning, in FWHMs, at which the exchange-model dip is taken to have
/// reached the wings. Further out the Doppler background itself falls off.
pub const WING_FACTOR: f64 = 50.0;

/// Exchange-model FWHM by locating the half-depth point directly.
///
/// The dip is symmetric about δ₂ = 0 for a pump at line centre, so only
/// δ₂ > 0 is searched: the level halfway between α(0) and the wing value is
/// bracketed geometrically and refined by regula falsi. This takes a few
/// dozen Doppler averages where a sampled scan takes hundreds.
pub fn popexchange_fwhm(sys: &LambdaSystem, profile: &DopplerProfile, quad: &QuadratureConfig) -> Result<f64> {
    sys.validate()?;
    if sys.delta_pump != 0.0 {
        return Err(Error::invalid(
            "delta_pump",
            "the half-width search assumes a centred pump",
        ));
    }
    let estimate = popexchange_width_estimate(sys, profile.w_d);
    if !(estimate > 0.0) {
        return Err(Error::NoDip("no pump and no ground-state relaxation"));
    }
    let quad = &background_tolerance(sys, profile, quad, WING_FACTOR * estimate)?;
    let absorption = |d2: f64| -> Result<f64> {
        let at = sys.with_two_photon_detuning(d2);
        Ok(doppler_average(&at, profile, quad, bloch_linear_response)?.im)
    };
    let centre = absorption(0.0)?;
    // the wing point is set from the width itself, so refine until they agree
    let mut width = estimate;
    for _ in 0..8 {
        let wing = absorption(WING_FACTOR * width)?;
        let found = half_depth_width(&absorption, centre, wing, width)?;
        let settled = (found / width - 1.0).abs() < 1e-3;
        width = found;
        if settled {
            break;
        }
    }
    Ok(width)
}

fn half_depth_width<F>(absorption: &F, centre: f64, wing: f64, scale: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let contrast = wing - centre;
    if !(contrast > 1e-9 * wing.abs()) {
        return Err(Error::NoDip("no contrast between resonance and wings"));
    }
    let half = centre + 0.5 * contrast;
    let excess = |a: f64| a - half;

    let mut lo = (0.0, -0.5 * contrast);
    let mut hi = (0.25 * scale, excess(absorption(0.25 * scale)?));
    while hi.1 < 0.0 {
        lo = hi;
        let x = 2.0 * hi.0;
        if x > WING_FACTOR * scale {
            return Err(Error::NoDip("half level not reached before the wings"));
        }
        hi = (x, excess(absorption(x)?));
    }
    // Illinois variant of regula falsi
    let mut side = 0i8;
    for _ in 0..100 {
        if hi.0 - lo.0 <= 1e-9 * hi.0 {
            break;
        }
        let x = hi.0 - hi.1 * (hi.0 - lo.0) / (hi.1 - lo.1);
        let fx = excess(absorption(x)?);
        if fx.abs() <= 1e-12 * contrast {
            return Ok(2.0 * x);
        }
        if fx < 0.0 {
            lo = (x, fx);
            if side == -1 {
                hi.1 *= 0.5;
            }
            side = -1;
        } else {
            hi = (x, fx);
            if side == 1 {
                lo.1 *= 0.5;
            }
            side = 1;
        }
    }
    Ok(lo.0 + hi.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doppler::{average_susceptibility_closed_narrow, BufferGas, ProfileShape};
    use crate::units::{hz, rb87};
    use proptest::prelude::*;

    fn medium() -> MediumConfig {
        MediumConfig {
            number_density: 1e17,
            dipole_moment: rb87::D1_DIPOLE,
            cell_length: 0.05,
            beam_diameter: 0.01,
            buffer_gas: BufferGas {
                label: "Ne".into(),
                pressure_torr: 1.0,
            },
            signal_wavelength: rb87::D1_WAVELENGTH,
        }
    }

    fn sys(omega_c: f64, gamma_bc: f64) -> LambdaSystem {
        LambdaSystem {
            omega_c,
            gamma_bc,
            ..LambdaSystem::rb_d1()
        }
    }

    const W: f64 = 1.727_875_959_474_386_3e9; // 2π·275 MHz

    #[test]
    fn lineshape_landmarks() {
        let s = sys(hz(2e6), hz(1.5e3));
        let p = LineshapeParams::from_system(&s, &medium(), W).unwrap();
        let m = medium();
        let centre = absorption_coefficient(0.0, &s, &m, W).unwrap();
        assert!((centre - p.alpha_min).abs() < 1e-12 * p.alpha_max);
        let half = absorption_coefficient(p.fwhm / 2.0, &s, &m, W).unwrap();
        assert!((half - 0.5 * (p.alpha_max + p.alpha_min)).abs() < 1e-12 * p.alpha_max);
        let wing = absorption_coefficient(1e6 * p.fwhm, &s, &m, W).unwrap();
        assert!((wing / p.alpha_max - 1.0).abs() < 1e-11);
        assert!(p.alpha_max >= p.alpha_min && p.alpha_min >= 0.0);
    }

    #[test]
    fn lineshape_is_narrow_closed_form() {
        let m = medium();
        for (oc, g, d2) in [(2e6, 1.5e3, 3e3), (0.3e6, 10.0, -40e3), (5e6, 20e3, 1e6)] {
            let s = sys(hz(oc), hz(g)).with_two_photon_detuning(hz(d2));
            let via_chi = m.wavenumber() * average_susceptibility_closed_narrow(&s, &m, W).unwrap().im;
            let direct = absorption_coefficient(s.delta2, &s, &m, W).unwrap();
            assert!((via_chi / direct - 1.0).abs() < 1e-12, "{via_chi} {direct}");
        }
    }

    #[test]
    fn three_kilohertz_intercept() {
        let f = fwhm_dephasing(hz(1.5e3), 0.0, W, rb87::D1_GAMMA);
        assert!((f / hz(3e3) - 1.0).abs() < 1e-15);
        let zero = fwhm_dephasing(0.0, hz(1e6), W, rb87::D1_GAMMA);
        assert_eq!(zero, 4.0 * hz(1e6).powi(2) / (2.0 * W + rb87::D1_GAMMA));
    }

    #[test]
    fn dephasing_fwhm_is_affine_in_pump_intensity() {
        let grid: Vec<f64> = (0..12).map(|k| hz(0.5e6) * (1.0 + k as f64).sqrt()).collect();
        let f: Vec<f64> = grid
            .iter()
            .map(|&oc| fwhm_dephasing(hz(1.5e3), oc, W, rb87::D1_GAMMA))
            .collect();
        for w in f.windows(3) {
            let second = w[2] - 2.0 * w[1] + w[0];
            assert!(second.abs() < 1e-9 * w[1], "{second}");
        }
    }

    #[test]
    fn generated_scan_reproduces_dephasing_fwhm() {
        let s = sys(hz(2e6), hz(1.5e3));
        let expect = fwhm_dephasing(s.gamma_bc, s.omega_c, W, s.gamma());
        let grid = detuning_grid(50.0 * expect, 401, GridSpacing::Sinh, expect / 2.0).unwrap();
        let scan = dephasing_scan(&s, &medium(), W, &grid).unwrap();
        let got = fwhm_numeric(&scan).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-3, "{got} {expect}");
    }

    #[test]
    fn asymptote_intercept_ratio_and_slopes() {
        let w = hz(0.55e9) / 2.0;
        let g = rb87::D1_GAMMA;
        assert_eq!(fwhm_popexchange_asymptote(0.0, 3.0, w, g), 18.0 / w);
        let ratio = fwhm_popexchange_asymptote(1.0, 0.0, w, g) / fwhm_dephasing(1.0, 0.0, w, g);
        assert!((ratio - intercept_ratio(w, g)).abs() < 1e-12 * ratio);
        assert!(ratio > 90.0 && ratio < 360.0, "{ratio}");
        let slope_exchange = 2.0 / w;
        let slope_dephasing = 4.0 / (2.0 * w + g);
        assert!((slope_exchange / slope_dephasing - 1.0).abs() < 0.02);
    }

    #[test]
    fn exchange_bound_from_three_kilohertz_intercept() {
        let w = hz(0.55e9) / 2.0;
        let bound = exchange_rate_bound(hz(3e3), w, rb87::D1_GAMMA) / crate::units::TWO_PI;
        assert!(bound > 5.0 && bound < 50.0, "{bound}");
    }

    fn lorentz_peak(fwhm: f64, points: usize, span: f64) -> ResonanceScan {
        let grid = detuning_grid(span, points, GridSpacing::Uniform, 0.0).unwrap();
        let values = grid.iter().map(|d| 0.9 / (1.0 + (2.0 * d / fwhm).powi(2))).collect();
        ResonanceScan::new(grid, values, ScanKind::Transmission).unwrap()
    }

    #[test]
    fn exact_lorentzian_round_trip_with_known_baseline() {
        let fwhm = 1.7e4;
        let scan = lorentz_peak(fwhm, 401, 5.0 * fwhm);
        let got = fwhm_numeric_with_baseline(&scan, 0.0).unwrap();
        assert!((got / fwhm - 1.0).abs() < 1e-4);
        // Dips behave the same way
        let p = LineshapeParams {
            alpha_max: 3.0,
            alpha_min: 1.0,
            fwhm,
            center: 0.0,
        };
        let grid = detuning_grid(5.0 * fwhm, 401, GridSpacing::Uniform, 0.0).unwrap();
        let values = grid.iter().map(|&d| p.evaluate(d)).collect();
        let dip = ResonanceScan::new(grid, values, ScanKind::Absorption).unwrap();
        let got = fwhm_numeric_with_baseline(&dip, 3.0).unwrap();
        assert!((got / fwhm - 1.0).abs() < 1e-4);
    }

    #[test]
    fn truncated_window_biases_scan_baseline() {
        // without the asymptote the half level sits 1/101 of the depth low
        let fwhm = 1.7e4;
        let got = fwhm_numeric(&lorentz_peak(fwhm, 401, 5.0 * fwhm)).unwrap();
        assert!((got / fwhm - 1.0).abs() < 0.011);
    }

    #[test]
    fn flat_and_edge_scans_have_no_dip() {
        let grid: Vec<f64> = (0..20).map(f64::from).collect();
        let flat = ResonanceScan::new(grid.clone(), vec![2.0; 20], ScanKind::Absorption).unwrap();
        assert!(matches!(fwhm_numeric(&flat), Err(Error::NoDip(_))));
        let ramp = ResonanceScan::new(grid.clone(), grid.clone(), ScanKind::Absorption).unwrap();
        assert!(matches!(fwhm_numeric(&ramp), Err(Error::NoDip(_))));
    }

    #[test]
    fn double_dip_is_ambiguous() {
        let grid: Vec<f64> = (-50..=50).map(f64::from).collect();
        let values = grid
            .iter()
            .map(|x| 1.0 - 1.0 / (1.0 + ((x - 20.0) / 3.0f64).powi(2)) - 0.9 / (1.0 + ((x + 20.0) / 3.0f64).powi(2)))
            .collect();
        let scan = ResonanceScan::new(grid, values, ScanKind::Absorption).unwrap();
        assert!(matches!(fwhm_numeric(&scan), Err(Error::Ambiguous { crossings: 4 })));
    }

    #[test]
    fn scan_validation() {
        assert!(ResonanceScan::new(vec![0.0, 0.0], vec![1.0, 1.0], ScanKind::Absorption).is_err());
        assert!(ResonanceScan::new(vec![0.0, 1.0], vec![1.0], ScanKind::Absorption).is_err());
        assert!(ResonanceScan::new(vec![0.0, 1.0], vec![0.5, 1.5], ScanKind::Transmission).is_err());
    }

    #[test]
    fn exchange_scan_reduces_to_dephasing_without_exchange() {
        let m = medium();
        let s = sys(hz(1e6), hz(2e3));
        let profile = DopplerProfile::new(W, ProfileShape::LorentzianApprox).unwrap();
        let expect = fwhm_dephasing(s.gamma_bc, s.omega_c, W, s.gamma());
        let grid = detuning_grid(40.0 * expect, 41, GridSpacing::Sinh, expect / 2.0).unwrap();
        let quad = QuadratureConfig {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let scan = popexchange_scan_numeric(&s, &m, &profile, &grid, &quad).unwrap();
        let narrow = dephasing_scan(&s, &m, W, &grid).unwrap();
        for (&d2, (a, b)) in grid.iter().zip(scan.values().iter().zip(narrow.values())) {
            let exact = m.wavenumber()
                * crate::doppler::average_susceptibility_closed(&s.with_two_photon_detuning(d2), &m, W)
                    .unwrap()
                    .im;
            assert!((a / exact - 1.0).abs() < 1e-7, "{a} {exact}");
            assert!((a / b - 1.0).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn absorption_stays_between_extremes_and_is_even(
            oc_mhz in 0.0f64..6.0,
            g_khz in 0.0f64..20.0,
            d2_khz in -500.0f64..500.0,
        ) {
            let s = sys(hz(oc_mhz * 1e6), hz(g_khz * 1e3));
            prop_assume!(s.gamma_bc > 0.0 || s.omega_c > 0.0);
            let m = medium();
            let p = LineshapeParams::from_system(&s, &m, W).unwrap();
            let a = absorption_coefficient(hz(d2_khz * 1e3), &s, &m, W).unwrap();
            let b = absorption_coefficient(-hz(d2_khz * 1e3), &s, &m, W).unwrap();
            prop_assert!(a >= p.alpha_min * (1.0 - 1e-12) && a <= p.alpha_max * (1.0 + 1e-12));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn mirrored_scan_has_same_fwhm(fwhm in 1e3f64..1e6, shift in -0.3f64..0.3) {
            let grid = detuning_grid(20.0 * fwhm, 201, GridSpacing::Uniform, 0.0).unwrap();
            let values = grid.iter().map(|d| 2.0 - 1.0 / (1.0 + (2.0 * (d - shift * fwhm) / fwhm).powi(2))).collect();
            let scan = ResonanceScan::new(grid, values, ScanKind::Absorption).unwrap();
            let a = fwhm_numeric(&scan).unwrap();
            let b = fwhm_numeric(&scan.mirrored()).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
