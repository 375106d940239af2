//! Dense Hermitian linear algebra for small dimensions.
//!
//! Everything here works on `nalgebra` column-major complex matrices. The
//! eigensolver is a cyclic complex Jacobi iteration: for the dimensions this
//! crate cares about (states up to `d = 16`, superoperators up to `d² = 144`)
//! it is accurate, unconditionally convergent and has no tuning knobs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
/// Dense complex matrix (column-major).
pub type CMatrix = DMatrix<C64>;

/// Tolerance on `|a_ij - conj(a_ji)|` accepted at construction, relative to
/// the largest entry (floored at 1).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm, relative to `‖A‖_F`, at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not Hermitian: |a_ij - conj(a_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("eigenvalue {eigenvalue:e} is outside the domain of the matrix function")]
    Domain { eigenvalue: f64 },
}

/// A dense `d×d` complex Hermitian matrix.
///
/// The stored matrix is exactly Hermitian: construction symmetrizes the input
/// as `(A + A†)/2` after checking that it was Hermitian up to [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(LinalgError::Empty);
        }
        let deviation = hermitian_deviation(&m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        if deviation > HERMITIAN_TOL * scale || !deviation.is_finite() {
            return Err(LinalgError::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking. Used for matrices that are Hermitian by
    /// construction but carry rounding noise.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        let mut inner = (m + adj) * C64::new(0.5, 0.0);
        for i in 0..inner.nrows() {
            inner[(i, i)].im = 0.0;
        }
        Self { inner }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let d = rows.len();
        if d == 0 {
            return Err(LinalgError::Empty);
        }
        for r in rows {
            if r.len() != d {
                return Err(LinalgError::NotSquare {
                    rows: d,
                    cols: r.len(),
                });
            }
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self { inner: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: CMatrix::zeros(dim, dim),
        }
    }

    /// `V diag(values) V†` for a given unitary (or isometric) `V`.
    pub fn from_spectrum(values: &[f64], vectors: &CMatrix) -> Self {
        let d = vectors.nrows();
        let mut scaled = vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            for i in 0..d {
                scaled[(i, j)] *= v;
            }
        }
        Self::symmetrized(&scaled * vectors.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_inner(self) -> CMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.inner)
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_dim(other)?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_dim(other)?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: &self.inner * C64::new(s, 0.0),
        }
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::symmetrized(u * &self.inner * u.adjoint())
    }

    /// `A + s·I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..inner.nrows() {
            inner[(i, i)].re += s;
        }
        Self { inner }
    }

    fn check_dim(&self, other: &Self) -> Result<(), LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }
}

/// Eigenvalues (descending) with their orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectrum(&self.values, &self.vectors)
    }

    /// Spectral calculus on an existing decomposition: `V f(Λ) V†`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix, LinalgError> {
        let mapped = self
            .values
            .iter()
            .map(|&x| {
                let y = f(x);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(LinalgError::Domain { eigenvalue: x })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HermitianMatrix::from_spectrum(&mapped, &self.vectors))
    }
}

/// Largest `|a_ij - conj(a_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Eigenvalues are returned in descending order, eigenvector `i` in column `i`.
pub fn eigh(a: &HermitianMatrix) -> Result<EigenSystem, LinalgError> {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = CMatrix::identity(n, n);
    let norm = frobenius(&m);
    let target = JACOBI_TOL * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= target || norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q, sweeps);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSystem { values, vectors })
}

/// One Jacobi rotation annihilating `m[(p, q)]`.
///
/// The phase `e^{iφ}` of `m[(p, q)]` is first removed with `diag(1, e^{-iφ})`,
/// which leaves a real symmetric 2×2 block handled by the classical rotation.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, sweep: usize) {
    let n = m.nrows();
    let apq = m[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Late sweeps: drop entries that can no longer move the diagonal.
    if sweep > 4 && app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
        m[(p, q)] = C64::new(0.0, 0.0);
        m[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_infinite() {
        1.0 / (2.0 * theta)
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let g00 = C64::new(c, 0.0);
    let g01 = C64::new(s, 0.0);
    let g10 = -phase.conj() * s;
    let g11 = phase.conj() * c;

    // m ← m G
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g00 + mkq * g10;
        m[(k, q)] = mkp * g01 + mkq * g11;
    }
    // m ← G† m
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g00.conj() * mpk + g10.conj() * mqk;
        m[(q, k)] = g01.conj() * mpk + g11.conj() * mqk;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
    // v ← v G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
}

/// `Σ |λ_i|`, the Schatten-1 norm.
pub fn trace_norm(a: &HermitianMatrix) -> Result<f64, LinalgError> {
    Ok(eigh(a)?.values.iter().map(|x| x.abs()).sum())
}

/// `max |λ_i|`.
pub fn operator_norm(a: &HermitianMatrix) -> Result<f64, LinalgError> {
    Ok(eigh(a)?.values.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}

/// Spectral calculus `V f(Λ) V†`. Fails if `f` is not finite at some eigenvalue.
pub fn mat_func<F: Fn(f64) -> f64>(
    a: &HermitianMatrix,
    f: F,
) -> Result<HermitianMatrix, LinalgError> {
    eigh(a)?.apply(f)
}

/// Checks `|Tr(XYZ)| ≤ ‖X‖_∞ ‖Z‖_∞ Tr|Y|` with `1e-12` slack.
pub fn holder3_check(
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    z: &HermitianMatrix,
) -> Result<bool, LinalgError> {
    if x.dim() != y.dim() || y.dim() != z.dim() {
        return Err(LinalgError::DimensionMismatch(
            x.dim(),
            y.dim().max(z.dim()),
        ));
    }
    let lhs = (x.matrix() * y.matrix() * z.matrix()).trace().norm();
    let rhs = operator_norm(x)? * operator_norm(z)? * trace_norm(y)?;
    Ok(lhs <= rhs + 1e-12)
}

/// Column-stacking vectorization: `vec(X)[i + d·j] = X[i, j]`.
pub fn vec_columns(m: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_columns`] for a `d×d` matrix.
pub fn unvec_columns(v: &DVector<C64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Matrix of `X ↦ A X` under column stacking: `I ⊗ A`.
pub fn left_multiplication(a: &CMatrix) -> CMatrix {
    let d = a.nrows();
    CMatrix::identity(d, d).kronecker(a)
}

/// Matrix of `X ↦ X B` under column stacking: `Bᵀ ⊗ I`.
pub fn right_multiplication(b: &CMatrix) -> CMatrix {
    let d = b.nrows();
    b.transpose().kronecker(&CMatrix::identity(d, d))
}

/// `Tr(A† B)`.
pub fn hilbert_schmidt(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_by_two_symmetric() {
        let a = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let es = eigh(&a).unwrap();
        assert!((es.values[0] - 3.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_has_unit_spectrum() {
        for d in 1..6 {
            let es = eigh(&HermitianMatrix::identity(d)).unwrap();
            assert!(es.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
            let vv = es.vectors.adjoint() * &es.vectors;
            assert!(frobenius(&(vv - CMatrix::identity(d, d))) < 1e-14);
        }
    }

    #[test]
    fn complex_off_diagonal() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0.
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let es = eigh(&HermitianMatrix::new(m).unwrap()).unwrap();
        assert!((es.values[0] - 2.0).abs() < 1e-14);
        assert!(es.values[1].abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(LinalgError::NotHermitian { .. })
        ));
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn trace_norm_examples() {
        let x = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((trace_norm(&x).unwrap() - 2.0).abs() < 1e-14);
        let d = HermitianMatrix::from_real_diagonal(&[1.0, 0.0])
            .sub(&HermitianMatrix::from_real_diagonal(&[0.0, 1.0]))
            .unwrap();
        assert!((trace_norm(&d).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_examples() {
        let d = HermitianMatrix::from_real_diagonal(&[0.2, 0.9]);
        assert!((operator_norm(&d).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(operator_norm(&HermitianMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn mat_func_examples() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, std::f64::consts::E]);
        let l = mat_func(&a, |x| -x.ln()).unwrap();
        assert!(l.matrix()[(0, 0)].re.abs() < 1e-15);
        assert!((l.matrix()[(1, 1)].re + 1.0).abs() < 1e-15);

        let same = mat_func(&a, |x| x).unwrap();
        assert!(frobenius(&(same.matrix() - a.matrix())) < 1e-14);

        let singular = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            mat_func(&singular, f64::ln),
            Err(LinalgError::Domain { .. })
        ));
    }

    #[test]
    fn holder3_trivial_cases() {
        let y = HermitianMatrix::from_real_rows(&[vec![0.3, -0.2], vec![-0.2, -0.7]]).unwrap();
        let i = HermitianMatrix::identity(2);
        assert!(holder3_check(&i, &y, &i).unwrap());
        assert!(holder3_check(&i, &HermitianMatrix::zeros(2), &y).unwrap());
    }

    #[test]
    fn vectorization_identities() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 0.25 * i as f64));
        let x = CMatrix::from_fn(3, 3, |i, j| c(j as f64, i as f64 * 0.1));
        let lhs = vec_columns(&(&a * &x * &b));
        let rhs = right_multiplication(&b) * left_multiplication(&a) * vec_columns(&x);
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(unvec_columns(&vec_columns(&x), 3), x);
    }
}
