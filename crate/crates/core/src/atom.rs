//! Single-atom Λ system: weak-signal linear response and the full
//! optical-Bloch steady state.
//!
//! Levels are ordered (a, b, c): `a` is the excited state, `b` the ground
//! state probed by the signal field and `c` the ground state driven by the
//! pump. In the rotating frame the Hamiltonian is
//!
//! ```text
//! H = -δ|b⟩⟨b| - Δ|c⟩⟨c| - Ω_b(|a⟩⟨b| + h.c.) - Ω_c(|a⟩⟨c| + h.c.)
//! ```
//!
//! with δ = Δ - δ₂ the signal detuning. With this sign convention the first
//! order coherence is exactly
//! `ρ_ab = Ω_b / (Δ - δ₂ + Ω_c²/(iγ_bc + δ₂) - iΓ/2)`.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest denominator magnitude accepted before a result is called a pole.
pub const POLE_THRESHOLD: f64 = 1e-30;

/// Ratio Ω_c/Ω_b below which linear-response results are refused.
pub const WEAK_SIGNAL_RATIO: f64 = 5.0;

/// Rates, detunings and couplings of the three-level atom, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSystem {
    /// Signal Rabi frequency Ω_b (a–b transition).
    pub omega_b: f64,
    /// Pump Rabi frequency Ω_c (a–c transition), real and non-negative.
    pub omega_c: f64,
    /// Pump detuning Δ.
    pub delta_pump: f64,
    /// Two-photon detuning δ₂ = Δ − δ.
    pub delta2: f64,
    /// Spontaneous decay rate a → b.
    pub gamma_b_decay: f64,
    /// Spontaneous decay rate a → c.
    pub gamma_c_decay: f64,
    /// Pure dephasing rate of ρ_bc.
    pub gamma_bc: f64,
    /// Ground-state population exchange rate (b → c and c → b).
    pub gamma_pe: f64,
    /// Accept |Ω_b| > |Ω_c|/5 in linear-response operations.
    pub allow_strong_signal: bool,
}

impl LambdaSystem {
    /// Rb D1 excited-state decay split evenly between the two ground states,
    /// all fields off and all detunings zero.
    pub fn rb_d1() -> Self {
        let half = crate::units::rb87::D1_GAMMA / 2.0;
        LambdaSystem {
            omega_b: 0.0,
            omega_c: 0.0,
            delta_pump: 0.0,
            delta2: 0.0,
            gamma_b_decay: half,
            gamma_c_decay: half,
            gamma_bc: 0.0,
            gamma_pe: 0.0,
            allow_strong_signal: false,
        }
    }

    /// Total excited-state decay rate Γ = Γ_b + Γ_c.
    pub fn gamma(&self) -> f64 {
        self.gamma_b_decay + self.gamma_c_decay
    }

    /// Signal detuning δ = Δ − δ₂.
    pub fn signal_detuning(&self) -> f64 {
        self.delta_pump - self.delta2
    }

    pub fn with_pump_detuning(mut self, delta_pump: f64) -> Self {
        self.delta_pump = delta_pump;
        self
    }

    pub fn with_two_photon_detuning(mut self, delta2: f64) -> Self {
        self.delta2 = delta2;
        self
    }

    pub fn with_pump(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    pub fn with_signal(mut self, omega_b: f64) -> Self {
        self.omega_b = omega_b;
        self
    }

    /// Checks the rate and coupling invariants.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_b", self.omega_b),
            ("omega_c", self.omega_c),
            ("delta_pump", self.delta_pump),
            ("delta2", self.delta2),
            ("gamma_b_decay", self.gamma_b_decay),
            ("gamma_c_decay", self.gamma_c_decay),
            ("gamma_bc", self.gamma_bc),
            ("gamma_pe", self.gamma_pe),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("gamma_b_decay", self.gamma_b_decay),
            ("gamma_c_decay", self.gamma_c_decay),
            ("gamma_bc", self.gamma_bc),
            ("gamma_pe", self.gamma_pe),
            ("omega_c", self.omega_c),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if self.gamma() <= 0.0 {
            return Err(Error::invalid("gamma", "Γ_b + Γ_c must be positive"));
        }
        Ok(())
    }

    /// Rejects a signal that is not weak compared with the pump.
    pub fn check_weak_signal(&self) -> Result<()> {
        let limit = self.omega_c.abs() / WEAK_SIGNAL_RATIO;
        if !self.allow_strong_signal && self.omega_b.abs() > limit {
            return Err(Error::Validity {
                omega_b: self.omega_b.abs(),
                limit,
            });
        }
        Ok(())
    }
}

/// First-order coherence per unit signal Rabi frequency, ∂ρ_ab/∂Ω_b.
///
/// This is the Doppler-averaging kernel; it skips the weak-signal check
/// because the signal amplitude cancels out of the susceptibility.
pub fn coherence_response(sys: &LambdaSystem) -> Result<Complex64> {
    let i = Complex64::i();
    let inner = i * sys.gamma_bc + sys.delta2;
    if inner.norm() < POLE_THRESHOLD {
        return Err(Error::Pole {
            context: "ground-state coherence iγ_bc + δ₂",
            magnitude: inner.norm(),
        });
    }
    let denom = sys.delta_pump - sys.delta2 + sys.omega_c * sys.omega_c / inner - i * (sys.gamma() / 2.0);
    if denom.norm() < POLE_THRESHOLD {
        return Err(Error::Pole {
            context: "optical coherence denominator",
            magnitude: denom.norm(),
        });
    }
    Ok(denom.inv())
}

/// Weak-signal coherence ρ_ab^(1) of a single stationary atom.
pub fn linear_coherence(sys: &LambdaSystem) -> Result<Complex64> {
    sys.validate()?;
    sys.check_weak_signal()?;
    Ok(coherence_response(sys)? * sys.omega_b)
}

/// Index of the three levels in the density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    A = 0,
    B = 1,
    C = 2,
}

/// A 3×3 density matrix over the basis (a, b, c).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix3 {
    elements: Matrix3<Complex64>,
}

impl DensityMatrix3 {
    pub fn from_matrix(elements: Matrix3<Complex64>) -> Self {
        DensityMatrix3 { elements }
    }

    pub fn pure(level: Level) -> Self {
        let mut m = Matrix3::zeros();
        m[(level as usize, level as usize)] = Complex64::new(1.0, 0.0);
        DensityMatrix3 { elements: m }
    }

    pub fn get(&self, row: Level, col: Level) -> Complex64 {
        self.elements[(row as usize, col as usize)]
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.elements
    }

    pub fn population(&self, level: Level) -> f64 {
        self.get(level, level).re
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    /// Largest |ρ_ij − ρ_ji*| relative to the largest element.
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.elements.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let d = self.elements[(r, c)] - self.elements[(c, r)].conj();
                worst = worst.max(d.norm());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

const DIM: usize = 9;
pub type Liouvillian = SMatrix<Complex64, DIM, DIM>;
type StateVector = SVector<Complex64, DIM>;

#[inline]
fn idx(row: usize, col: usize) -> usize {
    3 * row + col
}

/// Superoperator of the rotating-frame master equation acting on the
/// row-major vectorization of ρ.
///
/// Dissipation: decay a → b at Γ_b and a → c at Γ_c; incoherent exchange
/// b ↔ c at γ_pe in both directions (which also damps ρ_bc at γ_pe);
/// phenomenological dephasing of ρ_bc alone at γ_bc.
pub fn liouvillian(sys: &LambdaSystem) -> Liouvillian {
    let i = Complex64::i();
    let mut h = Matrix3::<Complex64>::zeros();
    h[(1, 1)] = (-sys.signal_detuning()).into();
    h[(2, 2)] = (-sys.delta_pump).into();
    h[(0, 1)] = (-sys.omega_b).into();
    h[(1, 0)] = (-sys.omega_b).into();
    h[(0, 2)] = (-sys.omega_c).into();
    h[(2, 0)] = (-sys.omega_c).into();

    let mut l = Liouvillian::zeros();
    // -i(Hρ - ρH)
    for r in 0..3 {
        for c in 0..3 {
            for k in 0..3 {
                l[(idx(r, c), idx(k, c))] -= i * h[(r, k)];
                l[(idx(r, c), idx(r, k))] += i * h[(k, c)];
            }
        }
    }

    let jumps = [
        (0usize, 1usize, sys.gamma_b_decay),
        (0, 2, sys.gamma_c_decay),
        (1, 2, sys.gamma_pe),
        (2, 1, sys.gamma_pe),
    ];
    for (from, to, rate) in jumps {
        if rate == 0.0 {
            continue;
        }
        // J = |to⟩⟨from|: JρJ† feeds ρ_to,to from ρ_from,from, and the
        // anticommutator damps every element with a `from` index.
        l[(idx(to, to), idx(from, from))] += Complex64::from(rate);
        for r in 0..3 {
            for c in 0..3 {
                let hits = (r == from) as u8 + (c == from) as u8;
                if hits > 0 {
                    l[(idx(r, c), idx(r, c))] -= Complex64::from(0.5 * rate * hits as f64);
                }
            }
        }
    }

    l[(idx(1, 2), idx(1, 2))] -= Complex64::from(sys.gamma_bc);
    l[(idx(2, 1), idx(2, 1))] -= Complex64::from(sys.gamma_bc);
    l
}

/// Number of independent stationary states of the master equation.
///
/// Populations form a rate graph: spontaneous decay, exchange, and coherent
/// couplings (which move population both ways). Each closed communicating
/// class of that graph carries one stationary state, so the count of closed
/// classes is the dimension of the Liouvillian null space.
pub fn stationary_dimension(sys: &LambdaSystem) -> usize {
    let mut edge = [[false; 3]; 3];
    edge[0][1] = sys.gamma_b_decay > 0.0 || sys.omega_b != 0.0;
    edge[1][0] = sys.omega_b != 0.0;
    edge[0][2] = sys.gamma_c_decay > 0.0 || sys.omega_c != 0.0;
    edge[2][0] = sys.omega_c != 0.0;
    edge[1][2] = sys.gamma_pe > 0.0;
    edge[2][1] = sys.gamma_pe > 0.0;

    // transitive closure
    let mut reach = edge;
    for k in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                if reach[a][k] && reach[k][b] {
                    reach[a][b] = true;
                }
            }
        }
    }
    for (a, row) in reach.iter_mut().enumerate() {
        row[a] = true;
    }

    let mut seen = [false; 3];
    let mut closed = 0;
    for a in 0..3 {
        if seen[a] {
            continue;
        }
        let class: Vec<usize> = (0..3).filter(|&b| reach[a][b] && reach[b][a]).collect();
        for &b in &class {
            seen[b] = true;
        }
        let leaks = class
            .iter()
            .any(|&b| (0..3).any(|t| reach[b][t] && !class.contains(&t)));
        if !leaks {
            closed += 1;
        }
    }
    closed
}

/// Solves Lρ = 0 with the ρ_aa row replaced by the trace condition.
fn solve_with_trace(l: &Liouvillian, rhs: &StateVector) -> Result<StateVector> {
    let mut a = *l;
    for col in 0..DIM {
        a[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for d in 0..3 {
        a[(0, idx(d, d))] = Complex64::new(1.0, 0.0);
    }
    a.lu().solve(rhs).ok_or(Error::SingularLiouvillian { null_dim: 0 })
}

fn to_density(v: &StateVector) -> DensityMatrix3 {
    let mut m = Matrix3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            m[(r, c)] = v[idx(r, c)];
        }
    }
    DensityMatrix3::from_matrix(m)
}

/// Unique stationary state of the full master equation, to all orders in
/// both fields.
pub fn bloch_steady_state(sys: &LambdaSystem) -> Result<DensityMatrix3> {
    sys.validate()?;
    let null_dim = stationary_dimension(sys);
    if null_dim != 1 {
        return Err(Error::SingularLiouvillian { null_dim });
    }
    let mut rhs = StateVector::zeros();
    rhs[0] = Complex64::new(1.0, 0.0);
    let v = solve_with_trace(&liouvillian(sys), &rhs)?;
    Ok(to_density(&v))
}

/// ∂ρ_ab/∂Ω_b at Ω_b = 0 from the linearized master equation.
///
/// Solves L₀ρ⁽⁰⁾ = 0 and L₀ρ⁽¹⁾ = −L₁ρ⁽⁰⁾ with tr ρ⁽¹⁾ = 0, where L₁ is the
/// derivative of the Liouvillian with respect to Ω_b. Unlike the closed
/// form, the zeroth-order state may have population outside |b⟩, so this is
/// the response used for the population-exchange model.
pub fn bloch_linear_response(sys: &LambdaSystem) -> Result<Complex64> {
    sys.validate()?;
    let base = LambdaSystem { omega_b: 0.0, ..*sys };
    let null_dim = stationary_dimension(&base);
    if null_dim != 1 {
        return Err(Error::SingularLiouvillian { null_dim });
    }
    let l0 = liouvillian(&base);
    let l1 = liouvillian(&LambdaSystem { omega_b: 1.0, ..base }) - l0;

    let mut a = l0;
    for col in 0..DIM {
        a[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for d in 0..3 {
        a[(0, idx(d, d))] = Complex64::new(1.0, 0.0);
    }
    let lu = a.lu();
    let mut rhs = StateVector::zeros();
    rhs[0] = Complex64::new(1.0, 0.0);
    let rho0 = lu.solve(&rhs).ok_or(Error::SingularLiouvillian { null_dim: 0 })?;
    let mut rhs1 = -(l1 * rho0);
    rhs1[0] = Complex64::new(0.0, 0.0);
    let rho1 = lu.solve(&rhs1).ok_or(Error::SingularLiouvillian { null_dim: 0 })?;
    Ok(rho1[idx(0, 1)])
}

/// Weak-signal coherence per unit Ω_b from full steady states, extrapolated
/// to Ω_b → 0.
///
/// Uses Richardson extrapolation on the even function ρ_ab(Ω_b)/Ω_b at
/// steps h and h/2. The first step is Ω_c/100, shrunk when the signal would
/// optically pump population out of |b⟩ faster than the pump returns it
/// (far-detuned pump or unequal branching). Raman transfer can saturate on a
/// scale set by γ_bc rather than Ω_c, so the step keeps shrinking until two
/// successive extrapolations agree.
pub fn extrapolated_coherence_response(sys: &LambdaSystem) -> Result<Complex64> {
    sys.validate()?;
    let gamma = sys.gamma();
    let half = gamma / 2.0;
    let signal_line = sys.signal_detuning().hypot(half);
    let pump_line = sys.delta_pump.hypot(half);
    let branching = if sys.gamma_c_decay > 0.0 {
        (sys.gamma_b_decay / sys.gamma_c_decay).sqrt()
    } else {
        1.0
    };
    let shrink = (branching * signal_line / pump_line).min(1.0);
    let mut h = sys.omega_c / 100.0 * shrink;
    if h <= 0.0 {
        return Err(Error::invalid("omega_c", "extrapolation needs a non-zero pump"));
    }
    let sample = |omega_b: f64| -> Result<Complex64> {
        let rho = bloch_steady_state(&LambdaSystem { omega_b, ..*sys })?;
        Ok(rho.get(Level::A, Level::B) / omega_b)
    };
    let richardson = |h: f64| -> Result<Complex64> { Ok((sample(h / 2.0)? * 4.0 - sample(h)?) / 3.0) };
    let mut previous = richardson(h)?;
    for _ in 0..EXTRAPOLATION_REFINEMENTS {
        h /= 4.0;
        let next = richardson(h)?;
        if (next - previous).norm() <= EXTRAPOLATION_TOL * next.norm() {
            return Ok(next);
        }
        previous = next;
    }
    Err(Error::NoConvergence {
        iterations: EXTRAPOLATION_REFINEMENTS,
    })
}

const EXTRAPOLATION_REFINEMENTS: usize = 30;
const EXTRAPOLATION_TOL: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hz;
    use approx::assert_relative_eq;

    fn generic() -> LambdaSystem {
        LambdaSystem {
            omega_b: hz(0.5e6),
            omega_c: hz(2e6),
            delta_pump: hz(50e6),
            delta2: hz(10e3),
            gamma_bc: hz(1.5e3),
            // Ω_b/Ω_c = 1/4 sits just outside the weak-signal guard
            allow_strong_signal: true,
            ..LambdaSystem::rb_d1()
        }
    }

    #[test]
    fn bare_two_level_response_without_pump() {
        let sys = LambdaSystem {
            omega_b: hz(0.1e6),
            delta_pump: hz(3e6),
            gamma_bc: hz(1e3),
            allow_strong_signal: true,
            ..LambdaSystem::rb_d1()
        };
        let got = linear_coherence(&sys).unwrap();
        let expect = sys.omega_b / Complex64::new(sys.delta_pump, -sys.gamma() / 2.0);
        assert_relative_eq!(got.re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(got.im, expect.im, max_relative = 1e-14);
    }

    #[test]
    fn dark_state_limit_is_transparent() {
        let mut sys = LambdaSystem {
            omega_b: hz(1e3),
            omega_c: hz(1e6),
            ..LambdaSystem::rb_d1()
        };
        let mut last = f64::INFINITY;
        for g in [1e3, 1e1, 1e-1, 1e-3] {
            sys.gamma_bc = hz(g);
            let m = linear_coherence(&sys).unwrap().norm();
            assert!(m < last);
            last = m;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn pole_and_validity_errors() {
        let sys = LambdaSystem {
            omega_c: hz(1e6),
            ..LambdaSystem::rb_d1()
        };
        assert!(matches!(linear_coherence(&sys), Err(Error::Pole { .. })));

        let strong = LambdaSystem {
            omega_b: hz(1e6),
            omega_c: hz(1e6),
            gamma_bc: hz(1e3),
            ..LambdaSystem::rb_d1()
        };
        assert!(matches!(linear_coherence(&strong), Err(Error::Validity { .. })));
        let overridden = LambdaSystem {
            allow_strong_signal: true,
            ..strong
        };
        assert!(linear_coherence(&overridden).is_ok());
    }

    #[test]
    fn rejects_negative_rates() {
        let sys = LambdaSystem {
            gamma_bc: -1.0,
            ..LambdaSystem::rb_d1()
        };
        assert!(matches!(sys.validate(), Err(Error::InvalidParameter { .. })));
        let no_decay = LambdaSystem {
            gamma_b_decay: 0.0,
            gamma_c_decay: 0.0,
            ..LambdaSystem::rb_d1()
        };
        assert!(no_decay.validate().is_err());
    }

    #[test]
    fn uncoupled_system_is_degenerate() {
        let sys = LambdaSystem::rb_d1();
        assert_eq!(
            bloch_steady_state(&sys),
            Err(Error::SingularLiouvillian { null_dim: 2 })
        );
    }

    #[test]
    fn pump_alone_pumps_into_b() {
        let sys = LambdaSystem {
            omega_c: hz(2e6),
            delta_pump: hz(20e6),
            gamma_bc: hz(1.5e3),
            ..LambdaSystem::rb_d1()
        };
        let rho = bloch_steady_state(&sys).unwrap();
        let b = DensityMatrix3::pure(Level::B);
        for r in 0..3 {
            for c in 0..3 {
                assert!((rho.matrix()[(r, c)] - b.matrix()[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn steady_state_is_a_density_matrix() {
        let sys = LambdaSystem {
            omega_b: hz(3e6),
            omega_c: hz(4e6),
            delta_pump: hz(-2e6),
            delta2: hz(0.3e6),
            gamma_bc: hz(10e3),
            gamma_pe: hz(5e3),
            ..LambdaSystem::rb_d1()
        };
        let rho = bloch_steady_state(&sys).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-12);
        assert!(rho.hermiticity_defect() < 1e-12);
        for l in [Level::A, Level::B, Level::C] {
            let p = rho.population(l);
            assert!((0.0..=1.0).contains(&p), "{l:?} population {p}");
        }
    }

    #[test]
    fn oracle_matches_closed_form_at_generic_point() {
        let sys = generic();
        let closed = coherence_response(&sys).unwrap();
        let oracle = extrapolated_coherence_response(&sys).unwrap();
        assert!((oracle - closed).norm() / closed.norm() < 1e-6);
        let linearized = bloch_linear_response(&sys).unwrap();
        assert!((linearized - closed).norm() / closed.norm() < 1e-9);
    }

    #[test]
    fn extrapolation_survives_raman_saturation() {
        // far-detuned strong pump with fast ground dephasing: the signal
        // saturates the Raman transfer long before Ω_b reaches Ω_c/100
        let gamma = crate::units::rb87::D1_GAMMA * 3.0;
        let sys = LambdaSystem {
            omega_c: hz(18.3e6),
            delta_pump: hz(956.7e6),
            delta2: hz(-356e3),
            gamma_b_decay: gamma * 0.225,
            gamma_c_decay: gamma * 0.775,
            gamma_bc: hz(20.4e3),
            ..LambdaSystem::rb_d1()
        };
        let closed = coherence_response(&sys).unwrap();
        let oracle = extrapolated_coherence_response(&sys).unwrap();
        assert!((oracle - closed).norm() / closed.norm() < 1e-6);
    }

    #[test]
    fn richardson_over_fixed_steps() {
        // Ω_b ∈ {Ω_c/100, Ω_c/200} at the generic point.
        let sys = generic();
        let at = |omega_b: f64| {
            bloch_steady_state(&LambdaSystem { omega_b, ..sys })
                .unwrap()
                .get(Level::A, Level::B)
                / omega_b
        };
        let h = sys.omega_c / 100.0;
        let extrapolated = (at(h / 2.0) * 4.0 - at(h)) / 3.0;
        let closed = coherence_response(&sys).unwrap();
        assert!((extrapolated - closed).norm() / closed.norm() < 1e-6);
    }

    #[test]
    fn stationary_dimension_counts_closed_classes() {
        let base = LambdaSystem::rb_d1();
        assert_eq!(stationary_dimension(&base), 2);
        assert_eq!(stationary_dimension(&base.with_pump(1.0)), 1);
        assert_eq!(stationary_dimension(&LambdaSystem { gamma_pe: 1.0, ..base }), 1);
        // pump with decay only back into c leaves b isolated
        let cycling = LambdaSystem {
            gamma_b_decay: 0.0,
            ..base.with_pump(1.0)
        };
        assert_eq!(stationary_dimension(&cycling), 2);
    }
}
