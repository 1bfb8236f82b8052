//! Qutrit source states: invariants, the physical region, and maximization of
//! the half-period target negativity over the source simplex.
//!
//! A Schmidt-form two-qutrit state `k0|00> + k1|11> + k2|22>` is described by
//! the weights `p_i = k_i^2` on the 2-simplex and summarized by the
//! invariants `I1 = sum p_i^2`, `I2 = sum p_i^3`. Plots use the sheared
//! coordinates `I1' = I1`, `I2' = I2 - 3/2 I1`, in which the region is a thin
//! curved triangle with corners
//!
//! | point | weights             | (I1, I2)   | I2'    |
//! |-------|---------------------|------------|--------|
//! | A     | (1/3, 1/3, 1/3)     | (1/3, 1/9) | -7/18  |
//! | B     | (1/2, 1/2, 0)       | (1/2, 1/4) | -1/2   |
//! | C     | (1, 0, 0)           | (1, 1)     | -1/2   |
//!
//! The AB side is the family `(p, p, 1 - 2p)` for `p` in `[1/3, 1/2]`, the AC
//! side the same family for `p` in `[0, 1/3]`, and BC is the edge `p2 = 0`,
//! along which `I2' = -1/2` exactly.
//!
//! Note that the target negativity is not a function of `(I1, I2)` alone: it
//! changes under permutations of the amplitudes. The search therefore runs
//! over amplitudes and reports the invariants of the winner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entanglement::negativity;
use crate::error::{Error, Result};
use crate::model::TransferModel;
use crate::scalar::Real;
use crate::transfer::{FixedTimeEvolution, QubitPairState, QutritPairState, SourceState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantPoint<T> {
    pub i1: T,
    pub i2: T,
    pub i1p: T,
    pub i2p: T,
}

impl<T: Real> InvariantPoint<T> {
    pub fn from_invariants(i1: T, i2: T) -> Self {
        InvariantPoint {
            i1,
            i2,
            i1p: i1,
            i2p: i2 - T::lit(1.5) * i1,
        }
    }

    pub fn from_weights(p: [T; 3]) -> Self {
        let i1 = p.iter().fold(T::zero(), |s, &x| s + x * x);
        let i2 = p.iter().fold(T::zero(), |s, &x| s + x * x * x);
        Self::from_invariants(i1, i2)
    }
}

pub fn invariants<T: Real>(k: &QutritPairState<T>) -> Result<InvariantPoint<T>> {
    let p = k.weights();
    let norm = p[0] + p[1] + p[2];
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    if !((norm - T::one()).abs() <= tol) {
        return Err(Error::NotNormalized(norm.to_f64_lossy()));
    }
    Ok(InvariantPoint::from_weights(p))
}

/// `I2'` of point A, the top of the region.
pub fn region_i2p_max<T: Real>() -> T {
    T::lit(-7.0 / 18.0)
}

/// `I2'` along the BC edge, the bottom of the region.
pub fn region_i2p_min<T: Real>() -> T {
    T::lit(-0.5)
}

/// Extent of the region along `I2'` (`1/9`).
pub fn region_i2p_range<T: Real>() -> T {
    region_i2p_max::<T>() - region_i2p_min::<T>()
}

/// Straight-line approximation of the AB side:
/// `I2' = -2/3 I1' - 1/6` for `I1'` in `[1/3, 1/2]`.
pub fn frontier_line<T: Real>(i1p: T) -> Result<T> {
    let slack = T::lit(1e-12);
    let (lo, hi) = (T::one() / T::lit(3.0), T::half());
    if !(i1p >= lo - slack && i1p <= hi + slack) {
        return Err(Error::out_of_range(
            "I1'",
            i1p.to_f64_lossy(),
            1.0 / 3.0,
            0.5,
        ));
    }
    Ok(-T::lit(2.0 / 3.0) * i1p - T::one() / T::lit(6.0))
}

/// Quadratic fit of the maximizing `I1` as a function of the target angle:
/// `-0.08756 sin^2(2 theta) - 0.07911 sin(2 theta) + 0.5`.
pub fn fit_i1_of_theta<T: Real>(theta1: T) -> T {
    let s = (T::two() * theta1).sin();
    T::lit(-0.08756) * s * s - T::lit(0.07911) * s + T::half()
}

/// Invariants of the symmetric family `(p, p, 1 - 2p)`.
fn symmetric_family<T: Real>(p: T) -> (T, T) {
    let q = T::one() - T::two() * p;
    (T::two() * p * p + q * q, T::two() * p * p * p + q * q * q)
}

/// Solves `I1(p) = i1` on a monotone stretch of the symmetric family.
fn bisect_family<T: Real>(i1: T, mut lo: T, mut hi: T, increasing: bool) -> T {
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        let below = symmetric_family(mid).0 < i1;
        if below == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::half()
}

fn check_i1<T: Real>(i1: T) -> Result<()> {
    let slack = T::lit(1e-12);
    if !(i1 >= T::one() / T::lit(3.0) - slack && i1 <= T::one() + slack) {
        return Err(Error::out_of_range("I1", i1.to_f64_lossy(), 1.0 / 3.0, 1.0));
    }
    Ok(())
}

/// Lower boundary of the region at `I1' = i1`: the AB side for
/// `i1 <= 1/2`, the BC edge beyond.
pub fn lower_frontier_i2p<T: Real>(i1: T) -> Result<T> {
    check_i1(i1)?;
    if i1 >= T::half() {
        return Ok(region_i2p_min());
    }
    let p = bisect_family(i1, T::one() / T::lit(3.0), T::half(), true);
    let (_, i2) = symmetric_family(p);
    Ok(i2 - T::lit(1.5) * i1)
}

/// Upper boundary of the region at `I1' = i1`: the AC side.
pub fn upper_frontier_i2p<T: Real>(i1: T) -> Result<T> {
    check_i1(i1)?;
    let p = bisect_family(i1, T::zero(), T::one() / T::lit(3.0), false);
    let (_, i2) = symmetric_family(p);
    Ok(i2 - T::lit(1.5) * i1)
}

/// Vertical distance of a point from the lower frontier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrontierDeviation<T> {
    pub frontier_i2p: T,
    pub absolute: T,
    /// `absolute / |frontier I2'|`
    pub relative: T,
    /// `absolute / (I2' range of the region)`
    pub relative_to_range: T,
}

pub fn frontier_deviation<T: Real>(point: &InvariantPoint<T>) -> Result<FrontierDeviation<T>> {
    let frontier = lower_frontier_i2p(point.i1p)?;
    let absolute = (point.i2p - frontier).abs();
    Ok(FrontierDeviation {
        frontier_i2p: frontier,
        absolute,
        relative: absolute / frontier.abs(),
        relative_to_range: absolute / region_i2p_range::<T>(),
    })
}

/// Deterministic coverage of the source simplex: the corner states A, the
/// three B permutations and the three C permutations first, then uniformly
/// distributed weights from a seeded generator. Returns exactly `n` points.
pub fn sample_physical_region<T: Real>(
    n: usize,
    seed: u64,
) -> Result<Vec<(QutritPairState<T>, InvariantPoint<T>)>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let (h, z, o) = (T::half(), T::zero(), T::one());
    let third = T::one() / T::lit(3.0);
    let anchors = [
        [third, third, third],
        [h, h, z],
        [h, z, h],
        [z, h, h],
        [o, z, z],
        [z, o, z],
        [z, z, o],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = if i < anchors.len() {
            anchors[i]
        } else {
            // Flat Dirichlet via normalized exponentials.
            let e: [f64; 3] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
            let s: f64 = e.iter().sum();
            e.map(|x| T::lit(x / s))
        };
        let k = QutritPairState::from_weights(p)?;
        out.push((k, InvariantPoint::from_weights(k.weights())));
    }
    Ok(out)
}

/// Grid-plus-refinement search settings over the two simplex angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBudget {
    /// Points per axis of the coarse grid over `[0, pi/2]^2`.
    pub grid_points: usize,
    /// Number of local refinement rounds.
    pub refinements: usize,
    /// Each round shrinks the local window by this factor.
    pub shrink: f64,
    /// Points per axis of each local grid.
    pub local_points: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            grid_points: 60,
            refinements: 3,
            shrink: 5.0,
            local_points: 11,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 || self.local_points < 2 || !(self.shrink > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "unusable search budget {self:?}"
            )));
        }
        Ok(())
    }
}

/// Outcome of a search over the source simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexSearch<T> {
    pub value: T,
    pub state: QutritPairState<T>,
    pub evaluations: usize,
    pub refinement_depth: usize,
}

/// Amplitudes `(cos a, sin a cos b, sin a sin b)` for angles in `[0, pi/2]`.
fn state_from_angles<T: Real>(a: T, b: T) -> QutritPairState<T> {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    QutritPairState {
        k: [ca.abs(), (sa * cb).abs(), (sa * sb).abs()],
    }
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    value: T,
    a: T,
    b: T,
    key: (T, T),
}

impl<T: Real> Candidate<T> {
    /// Higher value wins; exact ties go to the lexicographically lowest
    /// `(p0, p1)`.
    fn better_than(&self, other: &Self) -> bool {
        if self.value != other.value {
            return self.value > other.value;
        }
        self.key < other.key
    }
}

fn evaluate_points<T: Real, F>(points: Vec<(T, T)>, objective: &F) -> Result<Candidate<T>>
where
    F: Fn(&QutritPairState<T>) -> Result<T> + Sync,
{
    let scored = points
        .into_par_iter()
        .map(|(a, b)| {
            let k = state_from_angles(a, b);
            let p = k.weights();
            objective(&k).map(|value| Candidate {
                value,
                a,
                b,
                key: (p[0], p[1]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = scored[0];
    for c in &scored[1..] {
        if c.better_than(&best) {
            best = *c;
        }
    }
    Ok(best)
}

/// Maximizes `objective` over the source simplex: a coarse grid in the two
/// angles plus the corner states A and B, then `refinements` local grids, each centred on the incumbent and
/// `shrink` times narrower than the last. Deterministic for a fixed budget.
pub fn maximize_over_simplex<T, F>(objective: F, budget: &SearchBudget) -> Result<SimplexSearch<T>>
where
    T: Real,
    F: Fn(&QutritPairState<T>) -> Result<T> + Sync,
{
    budget.validate()?;
    let top = T::FRAC_PI_2();
    let n = budget.grid_points;
    let axis: Vec<T> = (0..n)
        .map(|i| top * T::lit(i as f64) / T::lit((n - 1) as f64))
        .collect();
    let mut coarse: Vec<(T, T)> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect();
    // Corner states A and B sit off the grid.
    let quarter = T::FRAC_PI_4();
    coarse.extend([
        ((T::one() / T::lit(3.0)).sqrt().acos(), quarter),
        (quarter, T::zero()),
        (quarter, top),
        (top, quarter),
    ]);
    let mut evaluations = coarse.len();
    let mut best = evaluate_points(coarse, &objective)?;

    let mut half_width = top / T::lit((n - 1) as f64);
    let m = budget.local_points;
    for _ in 0..budget.refinements {
        let offsets: Vec<T> = (0..m)
            .map(|i| half_width * (T::two() * T::lit(i as f64) / T::lit((m - 1) as f64) - T::one()))
            .collect();
        let clamp = |x: T| x.max(T::zero()).min(top);
        let local: Vec<(T, T)> = offsets
            .iter()
            .flat_map(|&da| offsets.iter().map(move |&db| (da, db)))
            .map(|(da, db)| (clamp(best.a + da), clamp(best.b + db)))
            .collect();
        evaluations += local.len();
        let candidate = evaluate_points(local, &objective)?;
        if candidate.better_than(&best) {
            best = candidate;
        }
        half_width /= T::lit(budget.shrink);
    }

    Ok(SimplexSearch {
        value: best.value,
        state: state_from_angles(best.a, best.b),
        evaluations,
        refinement_depth: budget.refinements,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximizationResult<T> {
    pub theta1: T,
    pub e_max: T,
    pub argmax_state: QutritPairState<T>,
    pub argmax_invariants: InvariantPoint<T>,
    pub evaluations: usize,
    pub refinement_depth: usize,
}

fn check_theta1<T: Real>(theta1: T) -> Result<()> {
    let slack = T::lit(1e-12);
    if !(theta1 >= -slack && theta1 <= T::FRAC_PI_4() + slack) {
        return Err(Error::out_of_range(
            "theta1",
            theta1.to_f64_lossy(),
            0.0,
            std::f64::consts::FRAC_PI_4,
        ));
    }
    Ok(())
}

/// Half-period (`t = 2pi/3`) evaluator for qutrit sources.
pub fn half_period_evolution<T: Real>() -> Result<FixedTimeEvolution<T>> {
    let model = TransferModel::<T>::qutrit();
    let t = model.half_period();
    FixedTimeEvolution::new(model, t)
}

/// Target negativity at `t = 2pi/3` for one qutrit source state.
pub fn half_period_negativity<T: Real>(theta1: T, k: &QutritPairState<T>) -> Result<T> {
    let ev = half_period_evolution()?;
    half_period_negativity_with(&ev, theta1, k)
}

fn half_period_negativity_with<T: Real>(
    ev: &FixedTimeEvolution<T>,
    theta1: T,
    k: &QutritPairState<T>,
) -> Result<T> {
    let rho = ev.reduced(&QubitPairState::new(theta1), &SourceState::Qutrit(*k))?;
    Ok(negativity(&rho, 1)?.value)
}

/// Largest target negativity at `t = 2pi/3` over all qutrit source states for
/// a fixed target angle.
pub fn maximize_e12_half_period<T: Real>(
    theta1: T,
    budget: &SearchBudget,
) -> Result<MaximizationResult<T>> {
    check_theta1(theta1)?;
    let ev = half_period_evolution()?;
    let search = maximize_over_simplex(|k| half_period_negativity_with(&ev, theta1, k), budget)?;
    Ok(MaximizationResult {
        theta1,
        e_max: search.value,
        argmax_invariants: InvariantPoint::from_weights(search.state.weights()),
        argmax_state: search.state,
        evaluations: search.evaluations,
        refinement_depth: search.refinement_depth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxCurve<T> {
    pub results: Vec<MaximizationResult<T>>,
    /// Whether `E_max` is non-decreasing in the initial target negativity.
    /// Reported, not enforced.
    pub monotone: bool,
}

pub fn max_curve<T: Real>(theta1_grid: &[T], budget: &SearchBudget) -> Result<MaxCurve<T>> {
    let results = theta1_grid
        .iter()
        .map(|&th| maximize_e12_half_period(th, budget))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<(T, T)> = results
        .iter()
        .map(|r| ((T::two() * r.theta1).sin().abs(), r.e_max))
        .collect();
    order.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let monotone = order.windows(2).all(|w| w[1].1 >= w[0].1 - T::lit(1e-12));
    Ok(MaxCurve { results, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn special_point_invariants() {
        let a = invariants(&QutritPairState::<f64>::maximally_entangled()).unwrap();
        assert!((a.i1 - 1.0 / 3.0).abs() < 1e-12 && (a.i2 - 1.0 / 9.0).abs() < 1e-12);
        let b = invariants(&QutritPairState::<f64>::two_term()).unwrap();
        assert!((b.i1 - 0.5).abs() < 1e-12 && (b.i2 - 0.25).abs() < 1e-12);
        let c = invariants(&QutritPairState::<f64>::product()).unwrap();
        assert_eq!((c.i1, c.i2), (1.0, 1.0));
        assert!((a.i2p + 7.0 / 18.0).abs() < 1e-12);
        assert!((b.i2p + 0.5).abs() < 1e-12);
        assert!((c.i2p + 0.5).abs() < 1e-12);
    }

    #[test]
    fn invariants_reject_unnormalized() {
        let bad = QutritPairState { k: [0.5, 0.5, 0.5] };
        assert!(matches!(invariants(&bad), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn invariants_are_permutation_invariant() {
        let k = QutritPairState::<f64>::from_weights([0.5, 0.3, 0.2]).unwrap();
        let base = invariants(&k).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]] {
            let q = QutritPairState {
                k: perm.map(|i| k.k[i]),
            };
            let p = invariants(&q).unwrap();
            assert!((p.i1 - base.i1).abs() < 1e-15 && (p.i2 - base.i2).abs() < 1e-15);
        }
    }

    #[test]
    fn frontier_line_agrees_with_corners() {
        assert!((frontier_line(1.0 / 3.0_f64).unwrap() + 7.0 / 18.0).abs() < 1e-15);
        assert!((frontier_line(0.5_f64).unwrap() + 0.5).abs() < 1e-15);
        assert!(frontier_line(0.6_f64).is_err());
        assert!(frontier_line(0.3_f64).is_err());
    }

    #[test]
    fn frontier_line_tracks_ab_side_within_one_percent() {
        let mut worst: f64 = 0.0;
        for i in 0..=100 {
            let i1 = 1.0 / 3.0 + (0.5 - 1.0 / 3.0) * i as f64 / 100.0;
            let exact = lower_frontier_i2p(i1).unwrap();
            worst = worst.max((frontier_line(i1).unwrap() - exact).abs() / exact.abs());
        }
        assert!(worst <= 0.01, "worst relative deviation {worst}");
        assert!(worst > 0.005);
    }

    #[test]
    fn extracted_frontier_hits_the_corners() {
        assert!((lower_frontier_i2p(1.0_f64 / 3.0).unwrap() + 7.0 / 18.0).abs() < 1e-9);
        assert!((lower_frontier_i2p(0.5_f64).unwrap() + 0.5).abs() < 1e-15);
        assert!((lower_frontier_i2p(0.8_f64).unwrap() + 0.5).abs() < 1e-15);
        assert!((upper_frontier_i2p(1.0_f64).unwrap() + 0.5).abs() < 1e-9);
        assert!(lower_frontier_i2p(0.2_f64).is_err());
    }

    #[test]
    fn fit_endpoints() {
        assert!((fit_i1_of_theta(0.0_f64) - 0.5).abs() < 1e-15);
        assert!((fit_i1_of_theta(PI / 4.0) - 0.33333).abs() < 1e-12);
    }

    #[test]
    fn region_samples_stay_inside_the_boundaries() {
        let samples = sample_physical_region::<f64>(3000, 0).unwrap();
        assert_eq!(samples.len(), 3000);
        let mut min_i2p = f64::INFINITY;
        for (k, p) in &samples {
            assert!(p.i1 >= 1.0 / 3.0 - 1e-12 && p.i1 <= 1.0 + 1e-12);
            assert!(p.i2 >= p.i1 * p.i1 - 1e-12 && p.i2 <= p.i1 + 1e-12);
            assert!(p.i2p >= lower_frontier_i2p(p.i1).unwrap() - 1e-9);
            assert!(p.i2p <= upper_frontier_i2p(p.i1).unwrap() + 1e-9);
            let back = InvariantPoint::from_weights(k.weights());
            assert_eq!(back, *p);
            min_i2p = min_i2p.min(p.i2p);
        }
        assert!((min_i2p + 0.5).abs() < 1e-12);
        assert!((samples[0].1.i1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((samples[1].1.i2 - 0.25).abs() < 1e-12);
        assert_eq!(samples[4].1.i1, 1.0);
    }

    #[test]
    fn region_sampling_is_seeded() {
        let a = sample_physical_region::<f64>(50, 9).unwrap();
        let b = sample_physical_region::<f64>(50, 9).unwrap();
        let c = sample_physical_region::<f64>(50, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_physical_region::<f64>(0, 0).is_err());
    }

    #[test]
    fn search_finds_a_known_interior_maximum() {
        let target = [0.45, 0.35, 0.2];
        let f = |k: &QutritPairState<f64>| {
            let p = k.weights();
            Ok(-(0..3).map(|i| (p[i] - target[i]).powi(2)).sum::<f64>())
        };
        let r = maximize_over_simplex(f, &SearchBudget::default()).unwrap();
        let p = r.state.weights();
        for i in 0..3 {
            assert!((p[i] - target[i]).abs() < 1e-3, "{p:?}");
        }
        assert_eq!(r.evaluations, 60 * 60 + 4 + 3 * 121);
    }

    #[test]
    fn search_tie_break_prefers_low_weights() {
        let r = maximize_over_simplex(|_: &QutritPairState<f64>| Ok(1.0), &SearchBudget::default())
            .unwrap();
        let p = r.state.weights();
        assert!(p[0] < 1e-15 && p[1] < 1e-15);
    }

    #[test]
    fn maximization_at_maximal_target_entanglement() {
        let r = maximize_e12_half_period(PI / 4.0, &SearchBudget::default()).unwrap();
        assert!((r.e_max - 1.0).abs() < 1e-6);
        assert!((r.argmax_invariants.i1 - 1.0 / 3.0).abs() < 1e-3);
        assert!((r.argmax_invariants.i2 - 1.0 / 9.0).abs() < 1e-3);
        let again = maximize_e12_half_period(PI / 4.0, &SearchBudget::default()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn maximization_dominates_named_states() {
        let th = 0.1;
        let r = maximize_e12_half_period(th, &SearchBudget::default()).unwrap();
        let ea = half_period_negativity(th, &QutritPairState::maximally_entangled()).unwrap();
        let eb = half_period_negativity(th, &QutritPairState::two_term()).unwrap();
        assert!(r.e_max >= ea && r.e_max >= eb);
        assert!(r.e_max < 1.0 - 1e-3);
    }

    #[test]
    fn maximization_rejects_out_of_range_angle() {
        assert!(maximize_e12_half_period(1.0, &SearchBudget::default()).is_err());
        assert!(maximize_e12_half_period(-0.1, &SearchBudget::default()).is_err());
    }
}
