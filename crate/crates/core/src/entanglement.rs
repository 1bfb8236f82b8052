//! Negativity of bipartite states.
//!
//! The generic route partially transposes the density operator and sums its
//! negative eigenvalues: `N = -2 * sum(lambda_i < 0)`. For the two-qubit
//! X states produced by the transfer dynamics there is also a closed form,
//! `max(0, sqrt((B - C)^2 + 4|F|^2) - (B + C))`, used as the fast path.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qla::{default_tolerance, hermitian_eigenvalues, partial_transpose_many, Operator};
use crate::scalar::Real;

/// Negativity with both the raw spectral value and the value sanitized to
/// `[0, 1]`. Sanitizing only ever absorbs roundoff: a raw value beyond
/// `1 + 1e-9` is reported as an error rather than clamped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Negativity<T> {
    pub raw: T,
    pub value: T,
}

impl<T: Real> Negativity<T> {
    pub fn from_raw(raw: T) -> Result<Self> {
        let slack = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
        if !(raw >= -slack && raw <= T::one() + slack) {
            return Err(Error::NegativityOutOfRange {
                raw: raw.to_f64_lossy(),
            });
        }
        Ok(Negativity {
            raw,
            value: raw.max(T::zero()).min(T::one()),
        })
    }
}

/// `-2 * sum` of the negative eigenvalues of the partial transpose, without
/// any range check. Subsystems `cut..` form the transposed side.
pub fn negativity_raw<T: Real>(rho: &Operator<T>, cut: usize) -> Result<T> {
    let n = rho.dims().len();
    if cut == 0 || cut >= n {
        return Err(Error::InvalidSubsystems(format!(
            "cut {cut} does not split {n} subsystems into two non-empty parts"
        )));
    }
    rho.validate_density(default_tolerance())?;
    let side: Vec<usize> = (cut..n).collect();
    let pt = partial_transpose_many(rho, &side)?;
    let spectrum = hermitian_eigenvalues(&pt)?;
    let negative_sum = spectrum
        .iter()
        .filter(|&&l| l < T::zero())
        .fold(T::zero(), |s, &l| s + l);
    Ok(-T::two() * negative_sum)
}

/// Negativity across the cut between subsystems `..cut` and `cut..`.
pub fn negativity<T: Real>(rho: &Operator<T>, cut: usize) -> Result<Negativity<T>> {
    Negativity::from_raw(negativity_raw(rho, cut)?)
}

/// Entries of a two-qubit X state in the basis `|00>, |01>, |10>, |11>`:
/// populations `a, b, c, d` and the `|00><11|` coherence `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XStateCoeffs<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub f: Complex<T>,
}

impl<T: Real> XStateCoeffs<T> {
    pub fn new(a: T, b: T, c: T, d: T, f: Complex<T>) -> Result<Self> {
        let x = XStateCoeffs { a, b, c, d, f };
        x.validate()?;
        Ok(x)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
        let sum = self.a + self.b + self.c + self.d;
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidXState(format!("populations sum to {sum}")));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if v < -tol {
                return Err(Error::InvalidXState(format!(
                    "population {name} = {v} is negative"
                )));
            }
        }
        if self.f.norm_sqr() > self.a * self.d + tol {
            return Err(Error::InvalidXState(format!(
                "|f|^2 = {} exceeds a*d = {}",
                self.f.norm_sqr(),
                self.a * self.d
            )));
        }
        Ok(())
    }

    pub fn to_operator(&self) -> Operator<T> {
        let z = Complex::new(T::zero(), T::zero());
        let r = |x: T| Complex::new(x, T::zero());
        let rows = [
            [r(self.a), z, z, self.f],
            [z, r(self.b), z, z],
            [z, z, r(self.c), z],
            [self.f.conj(), z, z, r(self.d)],
        ];
        Operator::from_fn(&[2, 2], |i, j| rows[i][j])
    }

    /// Reads the X-pattern entries of a 4x4 operator. Entries outside the
    /// pattern are ignored; see [`x_pattern_defect`].
    pub fn from_operator(rho: &Operator<T>) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "X state needs a 4x4 operator, got {}x{}",
                rho.dim(),
                rho.dim()
            )));
        }
        Ok(XStateCoeffs {
            a: rho[(0, 0)].re,
            b: rho[(1, 1)].re,
            c: rho[(2, 2)].re,
            d: rho[(3, 3)].re,
            f: rho[(0, 3)],
        })
    }
}

/// Largest modulus among the entries of a 4x4 operator that an X state
/// requires to vanish.
pub fn x_pattern_defect<T: Real>(rho: &Operator<T>) -> T {
    let mut worst = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            let on_pattern = i == j || (i, j) == (0, 3) || (i, j) == (3, 0);
            if !on_pattern {
                worst = worst.max(rho[(i, j)].norm());
            }
        }
    }
    worst
}

/// Closed-form negativity of a two-qubit X state.
pub fn negativity_xstate<T: Real>(x: &XStateCoeffs<T>) -> Result<Negativity<T>> {
    x.validate()?;
    let four = T::lit(4.0);
    let spread = ((x.b - x.c) * (x.b - x.c) + four * x.f.norm_sqr()).sqrt();
    Negativity::from_raw((spread - (x.b + x.c)).max(T::zero()))
}

/// Negativity of `cos(theta)|00> + sin(theta)|11>`: `2|sin(theta) cos(theta)|`.
pub fn schmidt_negativity<T: Real>(theta: T) -> T {
    (T::two() * theta.sin() * theta.cos()).abs()
}

/// The angle in `[0, pi/4]` whose two-term Schmidt state has negativity `e`.
pub fn schmidt_angle_from_negativity<T: Real>(e: T) -> Result<T> {
    if !(e >= T::zero() && e <= T::one()) {
        return Err(Error::out_of_range(
            "negativity",
            e.to_f64_lossy(),
            0.0,
            1.0,
        ));
    }
    Ok(e.asin() * T::half())
}
