//! Acceptance suite. Prints one PASS/FAIL line per criterion, with the
//! individual checks indented below it, and exits non-zero if any fail.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eit_cli::commands::{self, read_series};
use eit_cli::manifest::{Manifest, FILE_NAME};
use eit_cli::{RunConfig, SynthKind};
use eit_core::fitting::{
    compare_models, fit_linear, fit_linear_points, fit_popexchange, ExchangeForward, ExchangeVariant, LinewidthSample,
    LinewidthSeries, PumpConfiguration,
};
use eit_core::lineshape::{fwhm_dephasing, fwhm_popexchange_asymptote, intercept_ratio, popexchange_fwhm};
use eit_core::propagation::{power_series, rabi_from_power, slope_vs_temperature, SlopeReference};
use eit_core::units::{hz, rb87, TWO_PI};
use eit_core::{
    average_susceptibility_closed, average_susceptibility_closed_narrow, average_susceptibility_numeric,
    coherence_response, extrapolated_coherence_response, DopplerProfile, LambdaSystem, ProfileShape, QuadratureConfig,
};

/// Largest |FWHM_gauss / FWHM_lorentz − 1| over the 100 µW–1.2 mW range,
/// 8.36% when calibrated, pinned as a regression bound.
const GAUSSIAN_GAP_BOUND: f64 = 0.085;

struct Check {
    pass: bool,
    line: String,
}

#[derive(Default)]
struct Suite {
    failed: Vec<usize>,
}

impl Suite {
    fn criterion(&mut self, n: usize, title: &str, run: impl FnOnce() -> Vec<Check>) {
        let t0 = Instant::now();
        let checks = run();
        let pass = checks.iter().all(|c| c.pass);
        println!(
            "{} criterion {n}: {title} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        for c in &checks {
            println!("    {} {}", if c.pass { "ok  " } else { "FAIL" }, c.line);
        }
        if !pass {
            self.failed.push(n);
        }
    }
}

fn check(pass: bool, line: String) -> Check {
    Check { pass, line }
}

/// Reported alongside a criterion without deciding it.
fn note(line: String) -> Check {
    Check {
        pass: true,
        line: format!("(info) {line}"),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn default_w_d() -> f64 {
    RunConfig::default().doppler_width().unwrap()
}

fn pump_rabi(power: f64, diameter: f64) -> f64 {
    rabi_from_power(power, diameter, rb87::D1_DIPOLE).unwrap()
}

fn reference_powers() -> Vec<f64> {
    (1..=12).map(|k| 1e-4 * k as f64).collect()
}

fn c1_oracle() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_at = None;
    let mut errors = 0;
    for _ in 0..1000 {
        let gamma = hz(log_uniform(&mut rng, 1e6, 2e7));
        let branch = rng.random_range(0.1..0.9);
        let sys = LambdaSystem {
            omega_c: hz(log_uniform(&mut rng, 1e4, 2e7)),
            delta_pump: hz(rng.random_range(-1e9..1e9)),
            delta2: hz(rng.random_range(-1e6..1e6)),
            gamma_b_decay: gamma * branch,
            gamma_c_decay: gamma * (1.0 - branch),
            gamma_bc: hz(log_uniform(&mut rng, 1.0, 1e5)),
            ..LambdaSystem::rb_d1()
        };
        match (coherence_response(&sys), extrapolated_coherence_response(&sys)) {
            (Ok(closed), Ok(oracle)) => {
                let e = (oracle - closed).norm() / closed.norm();
                if e > worst {
                    worst = e;
                    worst_at = Some(sys);
                }
            }
            _ => errors += 1,
        }
    }
    let at = worst_at
        .map(|s| {
            format!(
                " at Omega_c {:.3e}, Delta {:.3e}, d2 {:.3e}, gamma_bc {:.3e} Hz, Gamma_b/Gamma_c {:.2}",
                s.omega_c / TWO_PI,
                s.delta_pump / TWO_PI,
                s.delta2 / TWO_PI,
                s.gamma_bc / TWO_PI,
                s.gamma_b_decay / s.gamma_c_decay
            )
        })
        .unwrap_or_default();
    vec![check(
        worst <= 1e-3 && errors == 0,
        format!("1000 draws: worst relative error {worst:.2e}{at} (bound 1e-3), {errors} failures"),
    )]
}

fn c2_closed_form() -> Vec<Check> {
    let cfg = RunConfig::default();
    let medium = cfg.medium().unwrap();
    let w_d = default_w_d();
    let profile = DopplerProfile::new(w_d, ProfileShape::LorentzianApprox).unwrap();
    let quad = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for i in 0..20 {
        let delta2 = hz(-2e5 + 4e5 * i as f64 / 19.0);
        for j in 0..20 {
            let sys = LambdaSystem {
                omega_c: hz(1e5 + 4.9e6 * j as f64 / 19.0),
                delta2,
                gamma_bc: hz(1.5e3),
                ..LambdaSystem::rb_d1()
            };
            match (
                average_susceptibility_closed(&sys, &medium, w_d),
                average_susceptibility_numeric(&sys, &medium, &profile, &quad),
            ) {
                (Ok(c), Ok(n)) => worst = worst.max((n - c).norm() / c.norm()),
                _ => errors += 1,
            }
        }
    }
    vec![check(
        worst <= 1e-6 && errors == 0,
        format!("20x20 grid over |d2| <= 200 kHz, Omega_c 0.1-5 MHz: worst {worst:.2e} (bound 1e-6)"),
    )]
}

fn c3_approximations() -> Vec<Check> {
    let w_d = default_w_d();
    let gauss = DopplerProfile::new(w_d, ProfileShape::Gaussian).unwrap();
    let quad = QuadratureConfig::default();
    let mut gap: f64 = 0.0;
    let mut errors = 0;
    for p in reference_powers() {
        let sys = LambdaSystem {
            omega_c: pump_rabi(p, 0.01),
            gamma_bc: hz(1.5e3),
            ..LambdaSystem::rb_d1()
        };
        match popexchange_fwhm(&sys, &gauss, &quad) {
            Ok(g) => gap = gap.max(rel(g, fwhm_dephasing(sys.gamma_bc, sys.omega_c, w_d, sys.gamma()))),
            Err(_) => errors += 1,
        }
    }

    let medium = RunConfig::default().medium().unwrap();
    let mut drop: f64 = 0.0;
    for oc in [0.3, 0.7, 1.5, 2.4] {
        for k in 0..=40 {
            let sys = LambdaSystem {
                omega_c: hz(oc * 1e6),
                delta2: hz(-1e6 + 5e4 * k as f64),
                gamma_bc: hz(1.5e3),
                ..LambdaSystem::rb_d1()
            };
            let full = average_susceptibility_closed(&sys, &medium, w_d).unwrap().im;
            let narrow = average_susceptibility_closed_narrow(&sys, &medium, w_d).unwrap().im;
            drop = drop.max(rel(narrow, full));
        }
    }
    vec![
        check(
            gap <= 0.15 && errors == 0,
            format!(
                "Gaussian vs Lorentzian-approximation FWHM, 100 uW-1.2 mW: max gap {:.2}% (bound 15%)",
                100.0 * gap
            ),
        ),
        check(
            gap <= GAUSSIAN_GAP_BOUND,
            format!(
                "gap within the pinned regression bound {:.2}%",
                100.0 * GAUSSIAN_GAP_BOUND
            ),
        ),
        check(
            drop < 1e-3,
            format!("dropping 2i*d2, |d2| <= 1 MHz: max change of Im chi {drop:.2e} (bound 1e-3)"),
        ),
    ]
}

fn c4_linewidth_law() -> Vec<Check> {
    let cfg = RunConfig::default();
    let cell = cfg.cell_model().unwrap();
    let sys = cfg.lambda_system(0.0);
    let series = power_series(
        &cell,
        &sys,
        &cfg.power_sweep(),
        &cfg.scan_grid(),
        PumpConfiguration::Zeeman,
    )
    .unwrap();
    let rabi = cfg.power_sweep().rabi_frequencies().unwrap();
    let x: Vec<f64> = rabi.iter().map(|o| o * o).collect();
    let y = series.fwhms();
    let fit = fit_linear_points(&x, &y, None).unwrap();
    let (a, b) = (fit.value("intercept").unwrap(), fit.value("slope").unwrap());
    let affine = x.iter().zip(&y).map(|(x, y)| rel(a + b * x, *y)).fold(0.0, f64::max);
    let closed: Vec<f64> = rabi
        .iter()
        .map(|&o| fwhm_dephasing(sys.gamma_bc, o, cell.doppler_width().unwrap(), sys.gamma()))
        .collect();
    let cfit = fit_linear_points(&x, &closed, None).unwrap();
    let intercept_hz = fit_linear(&series).unwrap().value("intercept").unwrap() / TWO_PI;
    vec![
        check(
            affine < 1e-3,
            format!("simulated thin-cell series vs a line in Omega_c^2: max deviation {affine:.2e}"),
        ),
        check(
            cfit.rss.sqrt() < 1e-9 * closed[0],
            format!("closed-form widths: residual {:.2e} rad/s", cfit.rss.sqrt()),
        ),
        check(
            rel(intercept_hz, 3000.0) < 1e-3,
            format!("intercept {intercept_hz:.3} Hz for gamma_bc = 1.5 kHz (target 3 kHz, 1e-3)"),
        ),
    ]
}

fn c5_exchange_asymptote() -> Vec<Check> {
    let w_d = default_w_d();
    let gauss = DopplerProfile::new(w_d, ProfileShape::Gaussian).unwrap();
    let quad = QuadratureConfig::default();
    let gamma_pe = hz(100.0);
    let fwhm = |omega_mhz: f64| {
        let sys = LambdaSystem {
            omega_c: hz(omega_mhz * 1e6),
            gamma_pe,
            ..LambdaSystem::rb_d1()
        };
        let f = popexchange_fwhm(&sys, &gauss, &quad).unwrap();
        (f, fwhm_popexchange_asymptote(gamma_pe, sys.omega_c, w_d, sys.gamma()))
    };
    let mut out = Vec::new();
    for oc in [4.0, 8.0] {
        let (f, a) = fwhm(oc);
        out.push(check(
            rel(f, a) < 0.05,
            format!(
                "Omega_c = {oc} MHz: FWHM {:.1} Hz vs asymptote {:.1} Hz, gap {:.2}% (bound 5%)",
                f / TWO_PI,
                a / TWO_PI,
                100.0 * rel(f, a)
            ),
        ));
    }
    // equal steps in Omega_c^2 (0.01 to 0.04 MHz^2)
    let weak: Vec<f64> = (1..=4).map(|k| fwhm((0.01 * k as f64).sqrt()).0 / TWO_PI).collect();
    let second: Vec<f64> = weak.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    out.push(check(
        second.iter().all(|&s| s > 0.0),
        format!(
            "weak-pump curvature: FWHM {:.0?} Hz at Omega_c^2 = 0.01..0.04 MHz^2, second differences {:.0?} (positive required)",
            weak, second
        ),
    ));
    out
}

/// Exchange fit to widths generated by the dephasing law.
fn c6_model_discrimination() -> Vec<Check> {
    let w_d = default_w_d();
    let gamma_bc = hz(1.5e3);
    let powers: Vec<f64> = (1..=8).map(|k| 1.5e-4 * k as f64).collect();
    let samples = powers
        .iter()
        .map(|&p| LinewidthSample {
            pump_power: p,
            fwhm: fwhm_dephasing(gamma_bc, pump_rabi(p, 0.01), w_d, rb87::D1_GAMMA),
            fwhm_sigma: None,
        })
        .collect();
    let series = LinewidthSeries::new(samples, 353.15, PumpConfiguration::Zeeman, "Ne".into()).unwrap();
    let mut fwd = ExchangeForward::new(
        LambdaSystem::rb_d1(),
        DopplerProfile::new(w_d, ProfileShape::LorentzianApprox).unwrap(),
        QuadratureConfig::default(),
        0.01,
        rb87::D1_DIPOLE,
    );
    let exch = fit_popexchange(&series, &mut fwd, ExchangeVariant::RateOnly).unwrap();
    let lin = fit_linear(&series).unwrap();
    let cmp = compare_models(&series, &lin, &exch, w_d, rb87::D1_GAMMA).unwrap();
    let ratio = exch.value("gamma_pe").unwrap() / gamma_bc;
    let r = intercept_ratio(w_d, rb87::D1_GAMMA);
    vec![
        check(
            ratio < 0.1,
            format!("fitted gamma_pe / gamma_bc = {ratio:.4} (bound 0.1)"),
        ),
        check(
            exch.rss > lin.rss,
            format!("rss exchange {:.3e} vs linear {:.3e}", exch.rss, lin.rss),
        ),
        check(
            cmp.ratio_consistent(),
            format!(
                "intercept ratio 2W_d/Gamma = {r:.1}; within a factor 2 of 180 (off by {:.0}%)",
                100.0 * rel(r, 180.0)
            ),
        ),
    ]
}

fn c7_thick_cell() -> Vec<Check> {
    let cfg = RunConfig::default();
    let base = cfg.cell_model().unwrap();
    let sys = cfg.lambda_system(0.0);
    let grid = cfg.scan_grid();
    let sweep = cfg.power_sweep();
    let temps = [333.15, 343.15, 353.15, 363.15, 373.15];
    let slopes = |sigma: f64, reference| -> Vec<f64> {
        slope_vs_temperature(
            &base.clone().with_pump_cross_section(sigma),
            &sys,
            &temps,
            &sweep,
            &grid,
            reference,
        )
        .unwrap()
        .iter()
        .map(|p| p.slope / TWO_PI)
        .collect()
    };
    let increasing = |s: &[f64]| s.windows(2).all(|w| w[1] > w[0]);

    let hyper = slopes(2e-18, SlopeReference::Input);
    let seen = slopes(2e-18, SlopeReference::Transmitted);
    let zeeman = slopes(0.0, SlopeReference::Input);
    let spread = zeeman.iter().map(|s| rel(*s, zeeman[0])).fold(0.0, f64::max);

    // thin cell, no attenuation: slope at d1 = 10 mm and d2 = 5 mm
    let thin = base.clone();
    let slope_at = |d: f64| {
        let s = power_series(
            &thin,
            &sys,
            &sweep.with_beam_diameter(d),
            &grid,
            PumpConfiguration::Zeeman,
        )
        .unwrap();
        fit_linear(&s).unwrap().value("slope").unwrap()
    };
    let (d1, d2) = (0.01, 0.005);
    let observed = slope_at(d2) / slope_at(d1);
    let fourth = (d1 / d2).powi(4);
    let square = (d1 / d2).powi(2);

    let hz_w = |v: &[f64]| v.iter().map(|s| format!("{s:.4e}")).collect::<Vec<_>>().join(", ");
    vec![
        check(
            increasing(&hyper),
            format!(
                "attenuated pump, slope vs input power at 333-373 K increasing: [{}] Hz/W",
                hz_w(&hyper)
            ),
        ),
        note(format!(
            "same cell, slope vs transmitted power: [{}] Hz/W (increasing: {})",
            hz_w(&seen),
            increasing(&seen)
        )),
        check(
            spread <= 1e-6,
            format!("no attenuation: slope spread {spread:.2e} (bound 1e-6)"),
        ),
        check(
            rel(observed, fourth) < 0.05,
            format!("slope(d2)/slope(d1) = {observed:.4} vs (d1/d2)^4 = {fourth} (5%)"),
        ),
        note(format!("(d1/d2)^2 = {square}, deviation {:.2e}", rel(observed, square))),
    ]
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_eit"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// Every command, with the outputs it writes.
fn cli_session(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    let scan = dir.join("scan.csv");
    let series = dir.join("synth_series.csv");
    let runs: Vec<Vec<&str>> = vec![
        vec!["simulate-scan"],
        vec!["sweep-power"],
        vec!["sweep-temperature"],
        vec!["synth", "--kind", "scan", "--noise", "1", "--seed", "11"],
        vec!["synth", "--kind", "series", "--noise", "5", "--seed", "12"],
        vec!["fit-scan", scan.to_str().unwrap()],
        vec!["fit-series", series.to_str().unwrap(), "--model", "both"],
    ];
    for args in runs {
        run_cli(dir, &args)?;
        let m = Manifest::parse(&std::fs::read_to_string(dir.join(FILE_NAME)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for o in m.outputs {
            let bytes = std::fs::read(dir.join(&o.file)).map_err(|e| e.to_string())?;
            files.push((format!("{} {}", m.command, o.file), bytes));
        }
    }
    Ok(files)
}

fn c8_round_trip() -> Vec<Check> {
    let cfg = RunConfig::default();
    let truth = cfg.system.gamma_bc_hz;
    let mut covered = 0;
    let mut errors = 0;
    for seed in 0..200u64 {
        let out = commands::synth(&cfg, SynthKind::Series, 5.0, seed);
        let fit = out
            .map_err(|e| e.to_string())
            .and_then(|o| read_series(&cfg, &o[0].bytes).map_err(|e| e.to_string()))
            .and_then(|s| fit_linear(&s).map_err(|e| e.to_string()));
        match fit {
            Ok(f) => {
                let g = f.value("gamma_bc").unwrap() / TWO_PI;
                let s = f.sigma("gamma_bc").unwrap() / TWO_PI;
                if (g - truth).abs() <= 3.0 * s {
                    covered += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    let mut out = vec![check(
        covered >= 190 && errors == 0,
        format!("gamma_bc within 3 sigma in {covered}/200 series at 5% noise (need 190)"),
    )];

    let sessions: Result<Vec<_>, String> = (0..2)
        .map(|_| {
            let d = tempfile::tempdir().map_err(|e| e.to_string())?;
            cli_session(d.path())
        })
        .collect();
    match sessions {
        Ok(s) => {
            let differing: Vec<&str> = s[0]
                .iter()
                .zip(&s[1])
                .filter(|(a, b)| a != b)
                .map(|(a, _)| a.0.as_str())
                .collect();
            out.push(check(
                differing.is_empty() && s[0].len() == s[1].len(),
                format!(
                    "{} CLI outputs from two fresh runs, differing: {differing:?}",
                    s[0].len()
                ),
            ));
        }
        Err(e) => out.push(check(false, format!("CLI run failed: {e}"))),
    }
    out
}

fn main() {
    let mut suite = Suite::default();
    suite.criterion(1, "Bloch oracle reproduces the closed-form coherence", c1_oracle);
    suite.criterion(2, "closed-form Doppler average matches quadrature", c2_closed_form);
    suite.criterion(
        3,
        "Gaussian-profile and narrow-resonance approximations",
        c3_approximations,
    );
    suite.criterion(4, "affine linewidth law with a 3 kHz intercept", c4_linewidth_law);
    suite.criterion(
        5,
        "population-exchange asymptote and weak-pump curvature",
        c5_exchange_asymptote,
    );
    suite.criterion(6, "exchange model on dephasing data", c6_model_discrimination);
    suite.criterion(
        7,
        "thick-cell slope against temperature and beam diameter",
        c7_thick_cell,
    );
    suite.criterion(8, "statistical round trip and reproducible CLI outputs", c8_round_trip);
    if suite.failed.is_empty() {
        println!("acceptance: all 8 criteria passed");
    } else {
        println!(
            "acceptance: {} of 8 criteria failed: {:?}",
            suite.failed.len(),
            suite.failed
        );
        std::process::exit(1);
    }
}
