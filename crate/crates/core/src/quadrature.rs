//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

// Kronrod abscissae on [-1, 1] (positive half, descending) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]`, splitting first at any `breakpoints` that
/// fall strictly inside the interval.
///
/// The segment with the largest error estimate is bisected until the summed
/// error is within `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(
            "interval",
            format!("[{a}, {b}] is not a finite, ordered interval"),
        ));
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut left = a;
    for right in cuts.into_iter().chain(std::iter::once(b)) {
        heap.push(kronrod(&mut f, left, right)?);
        left = right;
    }
    let mut evaluations = 15 * heap.len();

    loop {
        let (value, error) = heap
            .iter()
            .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| (v + s.value, e + s.error));
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if error <= tolerance {
            return Ok(QuadratureResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= cfg.max_subdivisions {
            return Err(Error::QuadratureFailure {
                error,
                tolerance,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // segment below floating-point resolution
            return Err(Error::QuadratureFailure {
                error,
                tolerance,
                subdivisions: heap.len() + 1,
            });
        }
        heap.push(kronrod(&mut f, worst.a, mid)?);
        heap.push(kronrod(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}
