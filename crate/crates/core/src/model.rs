//! Spin operators, the isotropic exchange Hamiltonian `s_a . s_b`, and the
//! four-particle evolution `U(t) = u_13(t) (x) u_24(t)`.
//!
//! Particles are labelled 0..4 internally: 0 and 1 are the target qubits, 2
//! and 3 the source pair. Target 0 couples to source 2, target 1 to source 3.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qla::{embed_on_subsystems, kron, propagator, Operator};
use crate::scalar::Real;

/// Spin matrices for a single spin of dimension `d = 2s + 1`, in the basis
/// `m = s, s-1, ..., -s`.
#[derive(Clone, Debug)]
pub struct SpinOperators<T> {
    pub dim: usize,
    pub sx: Operator<T>,
    pub sy: Operator<T>,
    pub sz: Operator<T>,
}

pub fn spin_operators<T: Real>(d: usize) -> Result<SpinOperators<T>> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let s = T::lit((d as f64 - 1.0) / 2.0);
    let m = |i: usize| s - T::lit(i as f64);
    // <m+1| s+ |m> = sqrt(s(s+1) - m(m+1))
    let raise = |i: usize, j: usize| -> T {
        if j == i + 1 {
            (s * (s + T::one()) - m(j) * (m(j) + T::one())).sqrt()
        } else {
            T::zero()
        }
    };
    let dims = [d];
    let sx = Operator::from_fn(&dims, |i, j| {
        Complex::new((raise(i, j) + raise(j, i)) * T::half(), T::zero())
    });
    let sy = Operator::from_fn(&dims, |i, j| {
        // (s+ - s-) / 2i
        Complex::new(T::zero(), -(raise(i, j) - raise(j, i)) * T::half())
    });
    let sz = Operator::from_fn(&dims, |i, j| {
        Complex::new(if i == j { m(i) } else { T::zero() }, T::zero())
    });
    Ok(SpinOperators { dim: d, sx, sy, sz })
}

/// `sx (x) sx + sy (x) sy + sz (x) sz` for a spin-1/2 coupled to a spin of
/// dimension `source_dim`. Subsystem dims are `[2, source_dim]`.
pub fn heisenberg_pair<T: Real>(target_dim: usize, source_dim: usize) -> Result<Operator<T>> {
    if target_dim != 2 {
        return Err(Error::UnsupportedDimension(target_dim));
    }
    let a = spin_operators::<T>(target_dim)?;
    let b = spin_operators::<T>(source_dim)?;
    let xx = kron(&a.sx, &b.sx);
    let yy = kron(&a.sy, &b.sy);
    let zz = kron(&a.sz, &b.sz);
    xx.add(&yy)?.add(&zz)
}

/// Which propagator construction to use for the pair evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorPath {
    /// `exp(-iHt)` from the Hermitian eigendecomposition.
    Eigen,
    /// Analytic closed form, kept as a regression check.
    ClosedForm,
}

/// Two target qubits, each coupled to one member of a source pair of qubits
/// or qutrits.
#[derive(Clone, Debug)]
pub struct TransferModel<T> {
    pub target_dim: usize,
    pub source_dim: usize,
    pub pair_hamiltonian: Operator<T>,
    /// `[2, 2, source_dim, source_dim]`
    pub full_dims: Vec<usize>,
}

impl<T: Real> TransferModel<T> {
    pub fn new(source_dim: usize) -> Result<Self> {
        Ok(TransferModel {
            target_dim: 2,
            source_dim,
            pair_hamiltonian: heisenberg_pair(2, source_dim)?,
            full_dims: vec![2, 2, source_dim, source_dim],
        })
    }

    pub fn qubit() -> Self {
        Self::new(2).expect("qubit model")
    }

    pub fn qutrit() -> Self {
        Self::new(3).expect("qutrit model")
    }

    /// Period of the target-pair negativity: 2pi for qubit sources, 4pi/3 for
    /// qutrit sources.
    pub fn period(&self) -> T {
        match self.source_dim {
            2 => T::PI() * T::two(),
            _ => T::PI() * T::lit(4.0 / 3.0),
        }
    }

    /// Time at which the source pair's influence on the targets peaks.
    pub fn half_period(&self) -> T {
        self.period() * T::half()
    }

    /// Expected spectrum of the pair Hamiltonian, ascending.
    pub fn expected_spectrum(&self) -> Vec<T> {
        match self.source_dim {
            2 => vec![T::lit(-0.75), T::lit(0.25), T::lit(0.25), T::lit(0.25)],
            _ => vec![
                T::lit(-1.0),
                T::lit(-1.0),
                T::half(),
                T::half(),
                T::half(),
                T::half(),
            ],
        }
    }

    pub fn pair_propagator(&self, t: T, path: PropagatorPath) -> Result<Operator<T>> {
        match path {
            PropagatorPath::Eigen => propagator(&self.pair_hamiltonian, t),
            PropagatorPath::ClosedForm => Ok(closed_form_propagator(self, t)),
        }
    }
}

fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::from_polar(T::one(), phase)
}

/// Analytic pair propagator `exp(-iHt)`.
///
/// For a qubit source this is `e^{-it/4}` times the identity outside the
/// `{|01>, |10>}` block, which carries `(1 + e^{it})/2` on the diagonal and
/// `(1 - e^{it})/2` off it. For a qutrit source the block entries are
/// `x1 = e^{-it/2}`, `x2 = (e^{it} + 2e^{-it/2})/3`,
/// `x3 = sqrt(2)(e^{-it/2} - e^{it})/3`, `x4 = (2e^{it} + e^{-it/2})/3`.
pub fn closed_form_propagator<T: Real>(model: &TransferModel<T>, t: T) -> Operator<T> {
    match model.source_dim {
        2 => qubit_closed_form(t),
        _ => qutrit_closed_form(t, T::one()),
    }
}

/// Qutrit-source propagator with the opposite sign on the mixing amplitude
/// `x3`. Equals `(sz (x) 1) U (sz (x) 1)` for the true
/// propagator `U`, i.e. the same dynamics in a basis where the target qubit's
/// lower level carries an extra sign. It is not `exp(-iHt)` for
/// [`heisenberg_pair`].
pub fn qutrit_propagator_flipped_mixing<T: Real>(t: T) -> Operator<T> {
    qutrit_closed_form(t, -T::one())
}

fn qubit_closed_form<T: Real>(t: T) -> Operator<T> {
    let g = cis(-t / T::lit(4.0));
    let e = cis(t);
    let one = Complex::new(T::one(), T::zero());
    let diag = (one + e) * T::half();
    let off = -(e - one) * T::half();
    let zero = Complex::new(T::zero(), T::zero());
    let rows = [
        [one, zero, zero, zero],
        [zero, diag, off, zero],
        [zero, off, diag, zero],
        [zero, zero, zero, one],
    ];
    Operator::from_fn(&[2, 2], |i, j| rows[i][j] * g)
}

fn qutrit_closed_form<T: Real>(t: T, mixing_sign: T) -> Operator<T> {
    let third = T::one() / T::lit(3.0);
    let slow = cis(-t * T::half());
    let fast = cis(t);
    let x1 = slow;
    let x2 = (fast + slow * T::two()) * third;
    let x3 = (slow - fast) * (T::two().sqrt() * third * mixing_sign);
    let x4 = (fast * T::two() + slow) * third;
    let z = Complex::new(T::zero(), T::zero());
    let rows = [
        [x1, z, z, z, z, z],
        [z, x2, z, x3, z, z],
        [z, z, x4, z, x3, z],
        [z, x3, z, x4, z, z],
        [z, z, x3, z, x2, z],
        [z, z, z, z, z, x1],
    ];
    Operator::from_fn(&[2, 3], |i, j| rows[i][j])
}

/// `U(t)` on `[2, 2, dS, dS]`: the pair propagator applied to (0, 2) and to
/// (1, 3).
pub fn full_evolution<T: Real>(
    model: &TransferModel<T>,
    t: T,
    path: PropagatorPath,
) -> Result<Operator<T>> {
    let u = model.pair_propagator(t, path)?;
    lift_pair_propagator(model, &u)
}

pub fn lift_pair_propagator<T: Real>(
    model: &TransferModel<T>,
    u: &Operator<T>,
) -> Result<Operator<T>> {
    let first = embed_on_subsystems(u, &[0, 2], &model.full_dims)?;
    let second = embed_on_subsystems(u, &[1, 3], &model.full_dims)?;
    first.matmul(&second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{hermitian_eig, phase_aligned_deviation};
    use std::f64::consts::PI;

    fn commutator(a: &Operator<f64>, b: &Operator<f64>) -> Operator<f64> {
        (a * b).sub(&(b * a)).unwrap()
    }

    #[test]
    fn spin_commutation_and_casimir() {
        for d in [2, 3] {
            let s = spin_operators::<f64>(d).unwrap();
            let i = Complex::new(0.0, 1.0);
            assert!(commutator(&s.sx, &s.sy).max_abs_diff(&s.sz.scale(i)) < 1e-12);
            assert!(commutator(&s.sy, &s.sz).max_abs_diff(&s.sx.scale(i)) < 1e-12);
            assert!(commutator(&s.sz, &s.sx).max_abs_diff(&s.sy.scale(i)) < 1e-12);
            let spin = (d as f64 - 1.0) / 2.0;
            let cas = (&s.sx * &s.sx)
                .add(&(&s.sy * &s.sy))
                .unwrap()
                .add(&(&s.sz * &s.sz))
                .unwrap();
            let expected = Operator::identity(&[d]).scale(Complex::new(spin * (spin + 1.0), 0.0));
            assert!(cas.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn spin_conventions() {
        let half = spin_operators::<f64>(2).unwrap();
        assert_eq!(
            half.sz.max_abs_diff(&Operator::from_diagonal(&[0.5, -0.5])),
            0.0
        );
        let one = spin_operators::<f64>(3).unwrap();
        assert_eq!(
            one.sz
                .max_abs_diff(&Operator::from_diagonal(&[1.0, 0.0, -1.0])),
            0.0
        );
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((one.sx[(0, 1)].re - r).abs() < 1e-15);
        assert!((one.sx[(1, 2)].re - r).abs() < 1e-15);
        assert!(matches!(
            spin_operators::<f64>(4),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn qubit_pair_hamiltonian_entries() {
        let h = heisenberg_pair::<f64>(2, 2).unwrap();
        let expected = Operator::<f64>::from_real_rows(&[
            &[0.25, 0.0, 0.0, 0.0],
            &[0.0, -0.25, 0.5, 0.0],
            &[0.0, 0.5, -0.25, 0.0],
            &[0.0, 0.0, 0.0, 0.25],
        ])
        .unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-12);
        assert!(h.trace().norm() < 1e-15);
    }

    #[test]
    fn qutrit_pair_hamiltonian_entries() {
        let h = heisenberg_pair::<f64>(2, 3).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Operator::<f64>::from_real_rows(&[
            &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, r, 0.0, 0.0],
            &[0.0, 0.0, -0.5, 0.0, r, 0.0],
            &[0.0, r, 0.0, -0.5, 0.0, 0.0],
            &[0.0, 0.0, r, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-12);
        assert!(h.trace().norm() < 1e-15);
        assert!(heisenberg_pair::<f64>(3, 3).is_err());
    }

    #[test]
    fn pair_spectra() {
        for model in [TransferModel::<f64>::qubit(), TransferModel::qutrit()] {
            let e = hermitian_eig(&model.pair_hamiltonian).unwrap();
            for (got, want) in e.eigenvalues.iter().zip(model.expected_spectrum()) {
                assert!((got - want).abs() < 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn closed_forms_match_eigen_path() {
        for model in [TransferModel::<f64>::qubit(), TransferModel::qutrit()] {
            for t in [0.0, 0.3, PI / 2.0, PI, 2.0, 7.5] {
                let a = closed_form_propagator(&model, t);
                let b = model.pair_propagator(t, PropagatorPath::Eigen).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-10, "dS={} t={t}", model.source_dim);
            }
        }
    }

    #[test]
    fn flipped_mixing_is_a_local_sign_change() {
        let model = TransferModel::<f64>::qutrit();
        let z = kron(
            &Operator::from_diagonal(&[1.0, -1.0]),
            &Operator::identity(&[3]),
        );
        for t in [0.4, 1.9, 3.3] {
            let u = closed_form_propagator(&model, t);
            let flipped = qutrit_propagator_flipped_mixing(t);
            assert!((&(&z * &u) * &z).max_abs_diff(&flipped) < 1e-14);
            assert!(u.max_abs_diff(&flipped) > 0.1);
        }
    }

    #[test]
    fn closed_form_periods() {
        let qubit = TransferModel::<f64>::qubit();
        let u = closed_form_propagator(&qubit, 2.0 * PI);
        let phase = Operator::identity(&[2, 2]).scale(Complex::from_polar(1.0, -PI / 2.0));
        assert!(u.max_abs_diff(&phase) < 1e-14);

        let qutrit = TransferModel::<f64>::qutrit();
        let u = closed_form_propagator(&qutrit, 4.0 * PI / 3.0);
        assert!(phase_aligned_deviation(&u, &Operator::identity(&[2, 3])) < 1e-14);
        assert!(u[(1, 3)].norm() < 1e-15);
        assert!((u[(1, 1)] - u[(2, 2)]).norm() < 1e-15);
    }

    #[test]
    fn full_evolution_identity_and_paths() {
        for model in [TransferModel::<f64>::qubit(), TransferModel::qutrit()] {
            let dims = model.full_dims.clone();
            let u0 = full_evolution(&model, 0.0, PropagatorPath::Eigen).unwrap();
            assert!(u0.max_abs_diff(&Operator::identity(&dims)) < 1e-13);
            let a = full_evolution(&model, 1.3, PropagatorPath::Eigen).unwrap();
            let b = full_evolution(&model, 1.3, PropagatorPath::ClosedForm).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10);
            assert!(a.unitarity_defect() < 1e-10);
        }
    }

    #[test]
    fn full_evolution_is_a_one_parameter_group() {
        for model in [TransferModel::<f64>::qubit(), TransferModel::qutrit()] {
            let (t1, t2) = (0.7, 2.9);
            let a = full_evolution(&model, t1, PropagatorPath::Eigen).unwrap();
            let b = full_evolution(&model, t2, PropagatorPath::Eigen).unwrap();
            let ab = full_evolution(&model, t1 + t2, PropagatorPath::Eigen).unwrap();
            assert!((&a * &b).max_abs_diff(&ab) < 1e-9);
        }
    }
}
