//! The transfer pipeline: prepare `|psi_12> (x) |psi_34>`, evolve with
//! `U(t)`, trace out the source pair and score the target pair.
//!
//! All results come from the numeric pipeline. The analytic reduced states
//! ([`closed_form_rho12_qubit`], [`closed_form_rho12_qutrit`]) are checked
//! against it. The qubit-source one agrees everywhere. The qutrit-source one
//! agrees at `t = 0` and at full periods, but its population `b(t)` departs
//! from the dynamics at generic times (see [`compare_qutrit_closed_form`]).

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::entanglement::{negativity, Negativity, XStateCoeffs};
use crate::error::{Error, Result};
use crate::model::{full_evolution, PropagatorPath, TransferModel};
use crate::qla::{kron, kron_ket, partial_trace, Operator};
use crate::scalar::Real;

/// `cos(theta)|00> + sin(theta)|11>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitPairState<T> {
    pub theta: T,
}

impl<T: Real> QubitPairState<T> {
    pub fn new(theta: T) -> Self {
        QubitPairState { theta }
    }

    pub fn ket(&self) -> Vec<Complex<T>> {
        let z = Complex::new(T::zero(), T::zero());
        vec![
            Complex::new(self.theta.cos(), T::zero()),
            z,
            z,
            Complex::new(self.theta.sin(), T::zero()),
        ]
    }

    pub fn density(&self) -> Operator<T> {
        Operator::from_ket(&self.ket(), &[2, 2]).expect("4-dim ket")
    }
}

/// `k0|00> + k1|11> + k2|22>` with real non-negative amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QutritPairState<T> {
    pub k: [T; 3],
}

impl<T: Real> QutritPairState<T> {
    /// Requires `k0^2 + k1^2 + k2^2 = 1` within 1e-12. Negative amplitudes
    /// are replaced by their magnitudes with a warning.
    pub fn new(k0: T, k1: T, k2: T) -> Result<Self> {
        let norm = k0 * k0 + k1 * k1 + k2 * k2;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if !((norm - T::one()).abs() <= tol) {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        if k0 < T::zero() || k1 < T::zero() || k2 < T::zero() {
            log::warn!("negative qutrit amplitudes replaced by their magnitudes");
        }
        Ok(QutritPairState {
            k: [k0.abs(), k1.abs(), k2.abs()],
        })
    }

    /// Scales the amplitudes to unit norm first.
    pub fn normalized(k0: T, k1: T, k2: T) -> Result<Self> {
        let norm = (k0 * k0 + k1 * k1 + k2 * k2).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        let k = [k0 / norm, k1 / norm, k2 / norm];
        // Re-normalize exactly enough to pass the strict check.
        let n2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        Self::new(k[0] / n2, k[1] / n2, k[2] / n2)
    }

    /// Complex amplitudes are canonicalized to their magnitudes; the
    /// invariant-based analysis only depends on `|k_i|^2`.
    pub fn from_complex(k: [Complex<T>; 3]) -> Result<Self> {
        if k.iter().any(|z| z.im != T::zero()) {
            log::warn!("complex qutrit amplitudes canonicalized to magnitudes");
        }
        Self::new(k[0].norm(), k[1].norm(), k[2].norm())
    }

    /// From squared amplitudes (a point of the probability simplex).
    pub fn from_weights(p: [T; 3]) -> Result<Self> {
        if p.iter().any(|&x| x < T::zero()) {
            return Err(Error::InvalidArgument("negative simplex weight".into()));
        }
        Self::normalized(p[0].sqrt(), p[1].sqrt(), p[2].sqrt())
    }

    /// All three amplitudes equal: the maximally entangled two-qutrit state.
    pub fn maximally_entangled() -> Self {
        let v = T::one() / T::lit(3.0).sqrt();
        QutritPairState { k: [v, v, v] }
    }

    /// `(|00> + |11>)/sqrt 2`.
    pub fn two_term() -> Self {
        let v = T::one() / T::two().sqrt();
        QutritPairState {
            k: [v, v, T::zero()],
        }
    }

    /// `|00>`, a product state.
    pub fn product() -> Self {
        QutritPairState {
            k: [T::one(), T::zero(), T::zero()],
        }
    }

    pub fn weights(&self) -> [T; 3] {
        self.k.map(|x| x * x)
    }

    pub fn ket(&self) -> Vec<Complex<T>> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); 9];
        for (j, &kj) in self.k.iter().enumerate() {
            v[j * 3 + j] = Complex::new(kj, T::zero());
        }
        v
    }
}

/// Initial state of the source pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SourceState<T> {
    Qubit(QubitPairState<T>),
    Qutrit(QutritPairState<T>),
}

impl<T: Real> SourceState<T> {
    pub fn dim(&self) -> usize {
        match self {
            SourceState::Qubit(_) => 2,
            SourceState::Qutrit(_) => 3,
        }
    }

    pub fn ket(&self) -> Vec<Complex<T>> {
        match self {
            SourceState::Qubit(s) => s.ket(),
            SourceState::Qutrit(s) => s.ket(),
        }
    }

    pub fn density(&self) -> Operator<T> {
        let d = self.dim();
        Operator::from_ket(&self.ket(), &[d, d]).expect("ket matches dims")
    }

    pub fn model(&self) -> TransferModel<T> {
        TransferModel::new(self.dim()).expect("source dims are 2 or 3")
    }

    pub fn describe(&self) -> String {
        match self {
            SourceState::Qubit(s) => format!("qubit theta2={}", s.theta),
            SourceState::Qutrit(s) => format!("qutrit k=({},{},{})", s.k[0], s.k[1], s.k[2]),
        }
    }
}

impl<T> From<QubitPairState<T>> for SourceState<T> {
    fn from(s: QubitPairState<T>) -> Self {
        SourceState::Qubit(s)
    }
}

impl<T> From<QutritPairState<T>> for SourceState<T> {
    fn from(s: QutritPairState<T>) -> Self {
        SourceState::Qutrit(s)
    }
}

/// `rho_12(0) (x) rho_34(0)` on `[2, 2, dS, dS]`.
pub fn initial_full_state<T: Real>(tp: &QubitPairState<T>, sp: &SourceState<T>) -> Operator<T> {
    let d = sp.dim();
    Operator::from_ket(&kron_ket(&tp.ket(), &sp.ket()), &[2, 2, d, d]).expect("product ket")
}

/// The full evolution operator at a fixed time, reusable across many initial
/// states.
#[derive(Clone, Debug)]
pub struct FixedTimeEvolution<T> {
    pub model: TransferModel<T>,
    pub t: T,
    pub unitary: Operator<T>,
}

impl<T: Real> FixedTimeEvolution<T> {
    pub fn new(model: TransferModel<T>, t: T) -> Result<Self> {
        let unitary = full_evolution(&model, t, PropagatorPath::Eigen)?;
        Ok(FixedTimeEvolution { model, t, unitary })
    }

    fn check_source(&self, sp: &SourceState<T>) -> Result<()> {
        if sp.dim() != self.model.source_dim {
            return Err(Error::DimensionMismatch(format!(
                "source of dimension {} for a model with dimension {}",
                sp.dim(),
                self.model.source_dim
            )));
        }
        Ok(())
    }

    /// Reduced target state for a pure initial target pair.
    pub fn reduced(&self, tp: &QubitPairState<T>, sp: &SourceState<T>) -> Result<Operator<T>> {
        self.check_source(sp)?;
        let psi = self.unitary.apply(&kron_ket(&tp.ket(), &sp.ket()))?;
        let rho = Operator::from_ket(&psi, &self.model.full_dims)?;
        partial_trace(&rho, &[0, 1])
    }

    /// Reduced target state for an arbitrary (possibly mixed) initial target
    /// density operator coupled to a fresh source pair.
    pub fn reduced_from_density(
        &self,
        rho12: &Operator<T>,
        sp: &SourceState<T>,
    ) -> Result<Operator<T>> {
        self.check_source(sp)?;
        if rho12.dims() != [2, 2] {
            return Err(Error::DimensionMismatch(format!(
                "target state dims {:?}, expected [2, 2]",
                rho12.dims()
            )));
        }
        let full = kron(rho12, &sp.density());
        let evolved = full.conjugate_by(&self.unitary)?;
        partial_trace(&evolved, &[0, 1])
    }
}

/// `rho_12(t) = Tr_34[U(t) rho(0) U(t)^dagger]`.
pub fn evolve_reduced<T: Real>(
    tp: &QubitPairState<T>,
    sp: &SourceState<T>,
    t: T,
) -> Result<Operator<T>> {
    FixedTimeEvolution::new(sp.model(), t)?.reduced(tp, sp)
}

/// Same as [`evolve_reduced`] but starting from a target density operator.
pub fn evolve_reduced_mixed<T: Real>(
    rho12: &Operator<T>,
    sp: &SourceState<T>,
    t: T,
) -> Result<Operator<T>> {
    FixedTimeEvolution::new(sp.model(), t)?.reduced_from_density(rho12, sp)
}

/// Target-pair negativity at time `t`.
pub fn tp_negativity<T: Real>(
    tp: &QubitPairState<T>,
    sp: &SourceState<T>,
    t: T,
) -> Result<Negativity<T>> {
    negativity(&evolve_reduced(tp, sp, t)?, 1)
}

/// Analytic reduced target state for a qubit source pair.
pub fn closed_form_rho12_qubit<T: Real>(theta1: T, theta2: T, t: T) -> XStateCoeffs<T> {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    let sin_half = (t * T::half()).sin();
    let cos_half = (t * T::half()).cos();
    let (ss, cc) = (sin_half * sin_half, cos_half * cos_half);

    let a = (c2 * s1 * ss - s2 * c1 * cc).powi(2) + c1 * c1 * c2 * c2;
    let st = t.sin();
    let sp = (theta1 + theta2).sin();
    let b = T::lit(0.25) * st * st * sp * sp;
    let d = (c2 * s1 * cc - s2 * c1 * ss).powi(2) + s1 * s1 * s2 * s2;

    let e2 = Complex::from_polar(T::one(), T::two() * t);
    let r = |x: T| Complex::new(x, T::zero());
    let f = Complex::from_polar(T::one(), -t)
        * (r(-c2 * s2 * ss) * (r(c1 * c1) + e2 * (s1 * s1))
            + r(c1 * s1 * cc) * (r(c2 * c2) + e2 * (s2 * s2)));

    XStateCoeffs { a, b, c: b, d, f }
}

/// Complex values of the analytic qutrit-source reduced state, reproduced
/// term by term from its published form. `c` equals `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QutritClosedForm<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub d: Complex<T>,
    pub e: Complex<T>,
}

impl<T: Real> QutritClosedForm<T> {
    /// Real parts as X-state coefficients (not validated).
    pub fn coeffs(&self) -> XStateCoeffs<T> {
        XStateCoeffs {
            a: self.a.re,
            b: self.b.re,
            c: self.b.re,
            d: self.d.re,
            f: self.e,
        }
    }
}

pub fn closed_form_rho12_qutrit_complex<T: Real>(
    theta1: T,
    k: &QutritPairState<T>,
    t: T,
) -> QutritClosedForm<T> {
    let [k0, k1, k2] = k.k;
    let (s, c) = theta1.sin_cos();
    let one = Complex::new(T::one(), T::zero());
    let two = Complex::new(T::two(), T::zero());
    let big = Complex::from_polar(T::one(), T::lit(1.5) * t); // e^{3it/2}
    let p = Complex::from_polar(T::one(), T::lit(-3.0) * t); // e^{-3it}
    let f2 = (two + big) * (two + big);
    let f1 = (one + big * T::two()) * (one + big * T::two());
    let m = (big - one) * (big - one);
    let g = m * T::two();
    let n81 = T::lit(81.0);
    let n9 = T::lit(9.0);

    let a = one * (k0 * k0 * c * c)
        + p / n81 * (f2 * (k1 * c) + g * (k0 * s)) * (f1 * (k1 * c) + g * (k0 * s))
        + p / n81 * (f2 * (k2 * c) + g * (k1 * s)) * (f1 * (k2 * c) + g * (k1 * s));

    let b = -(p * T::two()) / n81
        * m
        * (f1 * (k1 * c) + f2 * (k0 * s))
        * (f2 * (k1 * c) + f1 * (k0 * s))
        - (p * T::two()) / n81
            * m
            * (f1 * (k2 * c) + f2 * (k1 * s))
            * (f2 * (k2 * c) + f1 * (k0 * s));

    let d = one * (k2 * k2 * s * s)
        + p / n81 * (g * (k1 * c) + f2 * (k0 * s)) * (g * (k1 * c) + f1 * (k0 * s))
        + p / n81 * (g * (k2 * c) + f2 * (k1 * s)) * (g * (k2 * c) + f1 * (k1 * s));

    let e = p / n9 * (k0 * c) * (g * (k1 * c) + f2 * (k0 * s))
        + one / n9 * (k2 * s) * (f1 * (k2 * c) + g * (k1 * s))
        + p / n81 * (f2 * (k1 * c) + g * (k0 * s)) * (g * (k2 * c) + f1 * (k1 * s));

    QutritClosedForm { a, b, d, e }
}

/// Real-part X-state view of [`closed_form_rho12_qutrit_complex`].
pub fn closed_form_rho12_qutrit<T: Real>(
    theta1: T,
    k: &QutritPairState<T>,
    t: T,
) -> XStateCoeffs<T> {
    closed_form_rho12_qutrit_complex(theta1, k, t).coeffs()
}

/// Entrywise deviation of the analytic qutrit-source state from the numeric
/// pipeline at one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QutritDiscrepancy<T> {
    pub theta1: T,
    pub k: [T; 3],
    pub t: T,
    pub dev_a: T,
    pub dev_b: T,
    pub dev_c: T,
    pub dev_d: T,
    pub dev_e: T,
    pub max: T,
}

pub fn compare_qutrit_closed_form<T: Real>(
    theta1: T,
    k: &QutritPairState<T>,
    t: T,
) -> Result<QutritDiscrepancy<T>> {
    let rho = evolve_reduced(&QubitPairState::new(theta1), &SourceState::Qutrit(*k), t)?;
    let cf = closed_form_rho12_qutrit_complex(theta1, k, t);
    let dev_a = (rho[(0, 0)] - cf.a).norm();
    let dev_b = (rho[(1, 1)] - cf.b).norm();
    let dev_c = (rho[(2, 2)] - cf.b).norm();
    let dev_d = (rho[(3, 3)] - cf.d).norm();
    let dev_e = (rho[(0, 3)] - cf.e).norm();
    let max = [dev_a, dev_b, dev_c, dev_d, dev_e]
        .into_iter()
        .fold(T::zero(), T::max);
    Ok(QutritDiscrepancy {
        theta1,
        k: k.k,
        t,
        dev_a,
        dev_b,
        dev_c,
        dev_d,
        dev_e,
        max,
    })
}

/// Uniform grid including both endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid<T> {
    pub start: T,
    pub stop: T,
    pub points: usize,
}

/// Grid resolution per period used when no grid is given.
pub const DEFAULT_INTERVALS_PER_PERIOD: usize = 600;

impl<T: Real> TimeGrid<T> {
    pub fn new(start: T, stop: T, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs at least 2 points, got {points}"
            )));
        }
        if !(stop > start) {
            return Err(Error::InvalidArgument(format!(
                "time grid stop {stop} must exceed start {start}"
            )));
        }
        Ok(TimeGrid {
            start,
            stop,
            points,
        })
    }

    /// `[0, period]` at 600 intervals.
    pub fn one_period(model: &TransferModel<T>) -> Self {
        TimeGrid {
            start: T::zero(),
            stop: model.period(),
            points: DEFAULT_INTERVALS_PER_PERIOD + 1,
        }
    }

    pub fn step(&self) -> T {
        (self.stop - self.start) / T::lit((self.points - 1) as f64)
    }

    pub fn values(&self) -> Vec<T> {
        let h = self.step();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + h * T::lit(i as f64)
                }
            })
            .collect()
    }
}

/// Target-pair negativity as a function of time for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferTrace<T> {
    pub times: Vec<T>,
    pub negativities: Vec<T>,
    pub theta1: T,
    pub source: String,
}

impl<T: Real> TransferTrace<T> {
    pub fn new(times: Vec<T>, negativities: Vec<T>, theta1: T, source: String) -> Result<Self> {
        if times.len() != negativities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} negativities",
                times.len(),
                negativities.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(TransferTrace {
            times,
            negativities,
            theta1,
            source,
        })
    }

    /// Longest run of consecutive samples with negativity below `threshold`,
    /// measured as the time span between its first and last sample.
    pub fn longest_plateau_below(&self, threshold: T) -> T {
        let mut best = T::zero();
        let mut start: Option<T> = None;
        for (&t, &e) in self.times.iter().zip(&self.negativities) {
            if e < threshold {
                let s = *start.get_or_insert(t);
                best = best.max(t - s);
            } else {
                start = None;
            }
        }
        best
    }
}

/// Negativity on every grid point. Evaluated in parallel; the result is in
/// grid order and independent of scheduling.
pub fn entanglement_curve<T: Real>(
    tp: &QubitPairState<T>,
    sp: &SourceState<T>,
    times: &[T],
) -> Result<TransferTrace<T>> {
    let negativities = times
        .par_iter()
        .map(|&t| tp_negativity(tp, sp, t).map(|n| n.value))
        .collect::<Result<Vec<T>>>()?;
    TransferTrace::new(times.to_vec(), negativities, tp.theta, sp.describe())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{negativity_xstate, x_pattern_defect};
    use crate::qla::permute_subsystems;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn qubit_sp(theta2: f64) -> SourceState<f64> {
        SourceState::Qubit(QubitPairState::new(theta2))
    }

    fn qutrit_a() -> SourceState<f64> {
        SourceState::Qutrit(QutritPairState::maximally_entangled())
    }

    #[test]
    fn initial_state_examples() {
        let r = initial_full_state(&QubitPairState::new(0.0), &qubit_sp(0.0));
        let mut expected = Operator::<f64>::zeros(&[2, 2, 2, 2]);
        expected[(0, 0)] = Complex::new(1.0, 0.0);
        assert_eq!(r.max_abs_diff(&expected), 0.0);

        let r = initial_full_state(&QubitPairState::new(PI / 4.0), &qutrit_a());
        assert_eq!(r.dims(), &[2, 2, 3, 3]);
        assert!((r.trace().re - 1.0).abs() < 1e-14);
        assert!(((&r * &r).trace().re - 1.0).abs() < 1e-14);
        let tp = partial_trace(&r, &[0, 1]).unwrap();
        assert!((negativity(&tp, 1).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qutrit_state_validation() {
        assert!(QutritPairState::new(0.5, 0.5, 0.5).is_err());
        let s = QutritPairState::new(-0.6, 0.8, 0.0).unwrap();
        assert_eq!(s.k, [0.6, 0.8, 0.0]);
        let n = QutritPairState::normalized(1.0, 1.0, 1.0).unwrap();
        assert!((n.k[0] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let z = QutritPairState::from_complex([
            Complex::<f64>::new(0.0, 0.6),
            Complex::new(0.8, 0.0),
            Complex::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((z.k[0] - 0.6).abs() < 1e-15);
        assert!(QutritPairState::<f64>::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn evolve_reduced_at_zero_is_initial_tp_state() {
        let tp = QubitPairState::new(0.3);
        for sp in [qubit_sp(0.7), qutrit_a()] {
            let r = evolve_reduced(&tp, &sp, 0.0).unwrap();
            assert!(r.max_abs_diff(&tp.density()) < 1e-13);
        }
    }

    #[test]
    fn half_period_transfer_examples() {
        let n = tp_negativity(&QubitPairState::new(PI / 6.0), &qubit_sp(PI / 4.0), PI).unwrap();
        assert!((n.value - 1.0).abs() < 1e-9);
        let n = tp_negativity(&QubitPairState::new(PI / 4.0), &qutrit_a(), 2.0 * PI / 3.0).unwrap();
        assert!((n.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduced_state_has_x_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let tp = QubitPairState::new(rng.random_range(0.0..PI));
            let t = rng.random_range(0.0..8.0);
            let p = [
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
            ];
            let sp = SourceState::Qutrit(QutritPairState::from_weights(p).unwrap());
            let r = evolve_reduced(&tp, &sp, t).unwrap();
            assert!(x_pattern_defect(&r) < 1e-10);
            assert!(r.validate_density(1e-10).is_ok());
            let x = XStateCoeffs::from_operator(&r).unwrap();
            assert!((x.b - x.c).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_closed_form_limits() {
        let th: f64 = 0.4;
        let x = closed_form_rho12_qubit(th, 1.1, 0.0);
        assert!((x.a - th.cos().powi(2)).abs() < 1e-15);
        assert!((x.d - th.sin().powi(2)).abs() < 1e-15);
        assert_eq!(x.b, 0.0);
        assert!((x.f - Complex::new(th.cos() * th.sin(), 0.0)).norm() < 1e-15);

        let x = closed_form_rho12_qubit(0.0, PI / 4.0, PI);
        assert!(x.b.abs() < 1e-15);
        assert!((x.f.norm() - 0.5).abs() < 1e-15);
        assert!((negativity_xstate(&x).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_closed_form_matches_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (t1, t2, t) = (
                rng.random_range(0.0..PI),
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
            );
            let x = closed_form_rho12_qubit(t1, t2, t).to_operator();
            let r = evolve_reduced(&QubitPairState::new(t1), &qubit_sp(t2), t).unwrap();
            assert!(x.max_abs_diff(&r) < 1e-10);
        }
    }

    #[test]
    fn qutrit_closed_form_limits() {
        let k = QutritPairState::from_weights([0.5, 0.3, 0.2]).unwrap();
        let th: f64 = 0.4;
        for t in [0.0, 4.0 * PI / 3.0] {
            let x = closed_form_rho12_qutrit(th, &k, t);
            assert!((x.a - th.cos().powi(2)).abs() < 1e-12);
            assert!((x.d - th.sin().powi(2)).abs() < 1e-12);
            assert!(x.b.abs() < 1e-12);
            assert!((x.f.norm() - th.cos() * th.sin()).abs() < 1e-12);
            assert!(compare_qutrit_closed_form(th, &k, t).unwrap().max < 1e-9);
        }
    }

    #[test]
    fn qutrit_closed_form_discrepancy_is_confined_to_b() {
        let k = QutritPairState::from_weights([0.5, 0.3, 0.2]).unwrap();
        let rep = compare_qutrit_closed_form(0.4, &k, 1.0).unwrap();
        assert!(rep.dev_a < 1e-12 && rep.dev_d < 1e-12 && rep.dev_e < 1e-12);
        assert!(rep.dev_b > 1e-2);
    }

    #[test]
    fn periodicity() {
        let tp = QubitPairState::new(0.37);
        for (sp, period) in [(qubit_sp(0.9), 2.0 * PI), (qutrit_a(), 4.0 * PI / 3.0)] {
            for t in [0.2, 1.3, 2.6] {
                let a = tp_negativity(&tp, &sp, t).unwrap().value;
                let b = tp_negativity(&tp, &sp, t + period).unwrap().value;
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exchange_symmetry() {
        // Swapping target labels together with source labels commutes with
        // the dynamics, for any initial state.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in [2usize, 3] {
            let model = TransferModel::<f64>::new(d).unwrap();
            let n = 4 * d * d;
            let psi: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi: Vec<_> = psi.into_iter().map(|z| z / norm).collect();
            let rho = Operator::from_ket(&psi, &model.full_dims).unwrap();
            let swapped = permute_subsystems(&rho, &[1, 0, 3, 2]).unwrap();
            let ev = FixedTimeEvolution::new(model, 1.7).unwrap();
            let a = partial_trace(&rho.conjugate_by(&ev.unitary).unwrap(), &[0, 1]).unwrap();
            let b = partial_trace(&swapped.conjugate_by(&ev.unitary).unwrap(), &[0, 1]).unwrap();
            let na = negativity(&a, 1).unwrap().value;
            let nb = negativity(&b, 1).unwrap().value;
            assert!((na - nb).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_path_agrees_with_pure_path() {
        let tp = QubitPairState::new(0.2);
        for sp in [qubit_sp(0.5), qutrit_a()] {
            let a = evolve_reduced(&tp, &sp, 1.4).unwrap();
            let b = evolve_reduced_mixed(&tp.density(), &sp, 1.4).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn source_dimension_mismatch() {
        let ev = FixedTimeEvolution::new(TransferModel::<f64>::qubit(), 1.0).unwrap();
        assert!(ev.reduced(&QubitPairState::new(0.1), &qutrit_a()).is_err());
    }

    #[test]
    fn time_grid() {
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
        let p = TimeGrid::one_period(&TransferModel::<f64>::qubit());
        assert_eq!(p.points, 601);
        assert_eq!(*p.values().last().unwrap(), 2.0 * PI);
    }

    #[test]
    fn trace_validation_and_plateaus() {
        assert!(TransferTrace::new(vec![0.0, 1.0], vec![0.0], 0.0, String::new()).is_err());
        assert!(TransferTrace::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.0, String::new()).is_err());
        let tr = TransferTrace::<f64>::new(
            vec![0.0, 0.1, 0.2, 0.3, 0.4],
            vec![0.5, 0.0, 0.0, 0.0, 0.5],
            0.0,
            String::new(),
        )
        .unwrap();
        assert!((tr.longest_plateau_below(1e-9) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn curve_values_in_range_and_peaks() {
        let tp = QubitPairState::new(PI / 4.0);
        let sp = qubit_sp(PI / 4.0);
        let times = vec![0.0, PI, 2.0 * PI];
        let tr = entanglement_curve(&tp, &sp, &times).unwrap();
        for v in &tr.negativities {
            assert!((v - 1.0).abs() < 1e-9);
        }
        let grid = TimeGrid::new(0.0, 2.0 * PI, 121).unwrap().values();
        let tr = entanglement_curve(&QubitPairState::new(PI / 6.0), &sp, &grid).unwrap();
        assert!(tr.negativities.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(tr.longest_plateau_below(1e-9) > 0.05);
    }
}
