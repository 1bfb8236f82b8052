//! Dense complex linear algebra on small composite systems.
//!
//! Everything here works on [`Operator`], a square row-major complex matrix
//! that also records the dimensions of the subsystems it acts on. Basis
//! ordering is lexicographic over subsystem labels with the first subsystem
//! varying slowest, so for two qubits the basis is `|00>, |01>, |10>, |11>`.
//!
//! Matrices here never exceed a few dozen rows, so all routines favour
//! clarity and exactness over asymptotic speed. The Hermitian eigensolver is a
//! cyclic complex Jacobi iteration and the matrix exponential is built from
//! it, which keeps propagators unitary to machine precision.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance used for algebraic identities when the caller does not supply one.
///
/// `1e-10` for `f64`; widened for lower precision scalars.
pub fn default_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

/// Tolerance used for positivity checks (rounding can produce tiny negative
/// eigenvalues).
pub fn positivity_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(1e4))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Operator<T> {
    dims: Vec<usize>,
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> Operator<T> {
    pub fn from_entries(dims: Vec<usize>, entries: Vec<Complex<T>>) -> Result<Self> {
        let dim = checked_product(&dims)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} operator",
                entries.len()
            )));
        }
        Ok(Operator { dims, dim, entries })
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let dim = dims.iter().product::<usize>();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Operator {
            dims: dims.to_vec(),
            dim,
            entries,
        }
    }

    /// Builds a single-subsystem operator from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows are not square".into()));
        }
        Ok(Self::from_fn(&[n], |i, j| {
            Complex::new(T::lit(rows[i][j]), T::zero())
        }))
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::from_fn(dims, |_, _| Complex::new(T::zero(), T::zero()))
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::from_fn(dims, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn from_diagonal(values: &[T]) -> Self {
        Self::from_fn(&[values.len()], |i, j| {
            if i == j {
                Complex::new(values[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// Projector `|psi><psi|` onto a ket with the given subsystem dimensions.
    pub fn from_ket(ket: &[Complex<T>], dims: &[usize]) -> Result<Self> {
        let dim = checked_product(dims)?;
        if ket.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} for dims {dims:?}",
                ket.len()
            )));
        }
        Ok(Self::from_fn(dims, |i, j| ket[i] * ket[j].conj()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Relabels the subsystem structure without touching the entries.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let dim = checked_product(&dims)?;
        if dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} do not multiply to {}",
                self.dim
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Operator {
            dims: self.dims.clone(),
            dim: self.dim,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(&self.dims, |i, j| self.entries[j * n + i].conj())
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        Self::from_fn(&self.dims, |i, j| self.entries[j * n + i])
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Operator {
            dims: self.dims.clone(),
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Operator {
            dims: self.dims.clone(),
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Matrix product; the result keeps the subsystem labels of `self`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; n * n];
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == zero {
                    continue;
                }
                let other_row = &other.entries[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Operator {
            dims: self.dims.clone(),
            dim: n,
            entries: out,
        })
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a {}x{} operator",
                v.len(),
                self.dim,
                self.dim
            )));
        }
        let n = self.dim;
        Ok((0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                        acc + a * b
                    })
            })
            .collect())
    }

    /// `u * self * u^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self.entries[i * self.dim + i]
        })
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.dim != other.dim {
            return T::infinity();
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |M - M^dagger|`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> T {
        match self.adjoint().matmul(self) {
            Ok(p) => p.max_abs_diff(&Self::identity(&self.dims)),
            Err(_) => T::infinity(),
        }
    }

    /// Checks the density-operator contract: Hermitian within `tol`, unit
    /// trace within `tol`, and no eigenvalue below `-positivity_tolerance`.
    pub fn validate_density(&self, tol: T) -> Result<()> {
        let asym = self.hermiticity_defect();
        if asym > tol {
            return Err(Error::NotDensity(format!(
                "not Hermitian (max asymmetry {:e})",
                asym.to_f64_lossy()
            )));
        }
        let tr = self.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NotDensity(format!(
                "trace {} + {}i differs from 1",
                tr.re, tr.im
            )));
        }
        let lowest = hermitian_eigenvalues(self)?[0];
        if lowest < -positivity_tolerance::<T>() {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {:e}",
                lowest.to_f64_lossy()
            )));
        }
        Ok(())
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for Operator<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.entries[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Operator<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.entries[i * self.dim + j]
    }
}

/// Matrix product. Panics on a dimension mismatch; use [`Operator::matmul`]
/// for a fallible version.
impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;

    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        self.matmul(rhs).expect("operator dimensions must agree")
    }
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} must be non-empty and positive"
        )));
    }
    Ok(dims.iter().product())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

#[inline]
fn digit(index: usize, k: usize, dims: &[usize], strides: &[usize]) -> usize {
    (index / strides[k]) % dims[k]
}

fn validate_indices(indices: &[usize], n: usize, what: &str) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::InvalidSubsystems(format!("{what}: empty selection")));
    }
    for (pos, &k) in indices.iter().enumerate() {
        if k >= n {
            return Err(Error::InvalidSubsystems(format!(
                "{what}: subsystem {k} out of range for {n} subsystems"
            )));
        }
        if indices[..pos].contains(&k) {
            return Err(Error::InvalidSubsystems(format!(
                "{what}: subsystem {k} listed twice"
            )));
        }
    }
    Ok(())
}

/// Kronecker product; the result's subsystems are `a`'s followed by `b`'s.
pub fn kron<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Operator<T> {
    let (na, nb) = (a.dim, b.dim);
    let dims: Vec<usize> = a.dims.iter().chain(&b.dims).copied().collect();
    Operator::from_fn(&dims, |i, j| {
        a.entries[(i / nb) * na + j / nb] * b.entries[(i % nb) * nb + j % nb]
    })
}

/// Kronecker product of two kets.
pub fn kron_ket<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenDecomposition<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: Operator<T>,
}

impl<T: Real> EigenDecomposition<T> {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> Complex<T>) -> Operator<T> {
        let v = &self.eigenvectors;
        let n = v.dim;
        let fl: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Operator::from_fn(&v.dims, |i, j| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + v[(i, k)] * fl[k] * v[(j, k)].conj()
            })
        })
    }

    pub fn reconstruct(&self) -> Operator<T> {
        self.reconstruct_with(|l| Complex::new(l, T::zero()))
    }
}

/// Eigendecomposition of a Hermitian operator by cyclic complex Jacobi
/// rotations. Deterministic: identical input gives identical output.
pub fn hermitian_eig<T: Real>(m: &Operator<T>) -> Result<EigenDecomposition<T>> {
    let tol = default_tolerance::<T>() * T::one().max(m.max_abs());
    hermitian_eig_with_tol(m, tol)
}

pub fn hermitian_eig_with_tol<T: Real>(m: &Operator<T>, tol: T) -> Result<EigenDecomposition<T>> {
    let asym = m.hermiticity_defect();
    if !(asym <= tol) {
        return Err(Error::NotHermitian {
            max_asymmetry: asym.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    let (values, vectors) = jacobi(m, true);
    Ok(EigenDecomposition {
        eigenvalues: values,
        eigenvectors: vectors.expect("vectors requested"),
    })
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn hermitian_eigenvalues<T: Real>(m: &Operator<T>) -> Result<Vec<T>> {
    let tol = default_tolerance::<T>() * T::one().max(m.max_abs());
    let asym = m.hermiticity_defect();
    if !(asym <= tol) {
        return Err(Error::NotHermitian {
            max_asymmetry: asym.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(jacobi(m, false).0)
}

const MAX_SWEEPS: usize = 100;

fn jacobi<T: Real>(m: &Operator<T>, want_vectors: bool) -> (Vec<T>, Option<Operator<T>>) {
    let n = m.dim;
    let zero = Complex::new(T::zero(), T::zero());
    // Work on the exactly Hermitian part.
    let mut a: Vec<Complex<T>> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            (m.entries[i * n + j] + m.entries[j * n + i].conj()) * T::half()
        })
        .collect();
    let mut v = want_vectors.then(|| Operator::<T>::identity(&m.dims));

    let frob = a.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
    let threshold = T::epsilon() * frob;

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= threshold || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[p * n + q];
                let babs = b.norm();
                if babs == T::zero() {
                    continue;
                }
                let phase = b / babs; // e^{i phi}
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (T::two() * babs);
                let t = if theta.abs() > T::lit(1e150).min(T::max_value().sqrt()) {
                    T::one() / (T::two() * theta)
                } else {
                    let sgn = if theta < T::zero() {
                        -T::one()
                    } else {
                        T::one()
                    };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let ph_c = phase.conj();

                // A <- A G
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * ph_c * s;
                    a[k * n + q] = akp * s + akq * ph_c * c;
                }
                // A <- G^dagger A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * phase * s;
                    a[q * n + k] = apk * s + aqk * phase * c;
                }
                a[p * n + q] = zero;
                a[q * n + p] = zero;
                a[p * n + p].im = T::zero();
                a[q * n + q].im = T::zero();

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * ph_c * s;
                        v[(k, q)] = vkp * s + vkq * ph_c * c;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .re
            .partial_cmp(&a[j * n + j].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = v.map(|v| Operator::from_fn(&m.dims, |i, j| v[(i, order[j])]));
    (values, vectors)
}

/// `exp(-i h t)` for Hermitian `h`, built from its eigendecomposition.
pub fn propagator<T: Real>(h: &Operator<T>, t: T) -> Result<Operator<T>> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|l| Complex::from_polar(T::one(), -l * t)))
}

/// Traces out every subsystem not listed in `keep`. The surviving subsystems
/// keep their original relative order regardless of the order of `keep`.
pub fn partial_trace<T: Real>(rho: &Operator<T>, keep: &[usize]) -> Result<Operator<T>> {
    let dims = &rho.dims;
    validate_indices(keep, dims.len(), "partial_trace")?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();

    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let full_strides = strides(dims);
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // compose(kept_index, traced_index) -> full index
    let kept_offsets = subsystem_offsets(&kept, &kept_dims, &full_strides);
    let traced_offsets = if traced.is_empty() {
        vec![0]
    } else {
        subsystem_offsets(&traced, &traced_dims, &full_strides)
    };

    let n = rho.dim;
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; dk * dk];
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = zero;
            for &off in traced_offsets.iter().take(dt) {
                acc += rho.entries[(kept_offsets[i] + off) * n + kept_offsets[j] + off];
            }
            out[i * dk + j] = acc;
        }
    }
    Operator::from_entries(kept_dims, out)
}

/// For each local index over the listed subsystems, its offset in the full
/// index space.
fn subsystem_offsets(subs: &[usize], sub_dims: &[usize], full_strides: &[usize]) -> Vec<usize> {
    let local_strides = strides(sub_dims);
    let total: usize = sub_dims.iter().product();
    (0..total)
        .map(|idx| {
            subs.iter()
                .enumerate()
                .map(|(pos, &k)| ((idx / local_strides[pos]) % sub_dims[pos]) * full_strides[k])
                .sum()
        })
        .collect()
}

/// Transposes the listed subsystem.
pub fn partial_transpose<T: Real>(rho: &Operator<T>, subsystem: usize) -> Result<Operator<T>> {
    partial_transpose_many(rho, &[subsystem])
}

/// Transposes every listed subsystem.
pub fn partial_transpose_many<T: Real>(
    rho: &Operator<T>,
    subsystems: &[usize],
) -> Result<Operator<T>> {
    let dims = &rho.dims;
    validate_indices(subsystems, dims.len(), "partial_transpose")?;
    let st = strides(dims);
    let n = rho.dim;
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; n * n];
    for i in 0..n {
        for j in 0..n {
            let (mut ii, mut jj) = (i, j);
            for &k in subsystems {
                let di = digit(i, k, dims, &st);
                let dj = digit(j, k, dims, &st);
                ii = ii - di * st[k] + dj * st[k];
                jj = jj - dj * st[k] + di * st[k];
            }
            out[ii * n + jj] = rho.entries[i * n + j];
        }
    }
    Operator::from_entries(dims.clone(), out)
}

/// Reorders subsystems: subsystem `k` of the result is subsystem `perm[k]` of
/// the input.
pub fn permute_subsystems<T: Real>(op: &Operator<T>, perm: &[usize]) -> Result<Operator<T>> {
    let dims = &op.dims;
    if perm.len() != dims.len() {
        return Err(Error::InvalidSubsystems(format!(
            "permutation {perm:?} for {} subsystems",
            dims.len()
        )));
    }
    validate_indices(perm, dims.len(), "permute_subsystems")?;
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let old_strides = strides(dims);
    let new_strides = strides(&new_dims);
    let n = op.dim;
    // map new index -> old index
    let remap: Vec<usize> = (0..n)
        .map(|idx| {
            (0..perm.len())
                .map(|pos| ((idx / new_strides[pos]) % new_dims[pos]) * old_strides[perm[pos]])
                .sum()
        })
        .collect();
    Ok(Operator::from_fn(&new_dims, |i, j| {
        op.entries[remap[i] * n + remap[j]]
    }))
}

/// Lifts `u`, acting on the subsystems `targets` (in that order), to the full
/// space `full_dims`, acting as the identity elsewhere.
pub fn embed_on_subsystems<T: Real>(
    u: &Operator<T>,
    targets: &[usize],
    full_dims: &[usize],
) -> Result<Operator<T>> {
    checked_product(full_dims)?;
    validate_indices(targets, full_dims.len(), "embed_on_subsystems")?;
    let expected: Vec<usize> = targets.iter().map(|&k| full_dims[k]).collect();
    if u.dims != expected {
        return Err(Error::DimensionMismatch(format!(
            "operator dims {:?} do not match {expected:?} at targets {targets:?}",
            u.dims
        )));
    }
    let st = strides(full_dims);
    let ust = strides(&u.dims);
    let n: usize = full_dims.iter().product();
    let rest: Vec<usize> = (0..full_dims.len())
        .filter(|k| !targets.contains(k))
        .collect();
    let local: Vec<usize> = (0..n)
        .map(|idx| {
            targets
                .iter()
                .enumerate()
                .map(|(pos, &k)| digit(idx, k, full_dims, &st) * ust[pos])
                .sum()
        })
        .collect();
    let spectator: Vec<usize> = (0..n)
        .map(|idx| {
            rest.iter()
                .map(|&k| digit(idx, k, full_dims, &st) * st[k])
                .sum()
        })
        .collect();
    let zero = Complex::new(T::zero(), T::zero());
    let m = u.dim;
    Ok(Operator::from_fn(full_dims, |i, j| {
        if spectator[i] == spectator[j] {
            u.entries[local[i] * m + local[j]]
        } else {
            zero
        }
    }))
}

/// Deviation between two operators after removing the best global phase:
/// `max |e^{i phi} a - b|` with `phi = arg tr(a^dagger b)`.
pub fn phase_aligned_deviation<T: Real>(a: &Operator<T>, b: &Operator<T>) -> T {
    if a.dim != b.dim {
        return T::infinity();
    }
    let overlap = a
        .entries
        .iter()
        .zip(&b.entries)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        });
    let phase = if overlap.norm() > T::zero() {
        overlap / overlap.norm()
    } else {
        Complex::new(T::one(), T::zero())
    };
    a.scale(phase).max_abs_diff(b)
}
