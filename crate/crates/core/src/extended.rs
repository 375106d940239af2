//! Double-double complex matrices (about 32 significant digits).
//!
//! Used by the superoperator route, whose `d²×d²` matrix has eigenvalues
//! spread over many orders of magnitude. A double-precision Jacobi pass gives
//! a warm start; the basis is re-orthonormalized and the rotated matrix is
//! finished by Jacobi sweeps in double-double with a relative stopping rule,
//! so small eigenvalues keep their relative accuracy.

use nalgebra::DMatrix;
use num_complex::Complex;
use twofloat::TwoFloat;

use crate::linalg::{eigh, CMatrix, HermitianMatrix, LinalgError, C64};

pub type DD = TwoFloat;
pub type CDD = Complex<TwoFloat>;
pub type DdMatrix = DMatrix<CDD>;

const REL_TOL: f64 = 1e-31;
const MAX_SWEEPS: usize = 30;
const NEWTON_STEPS: usize = 4;

fn dd(x: f64) -> DD {
    TwoFloat::from(x)
}

/// `1/x` to double-double accuracy: one Newton step from the double reciprocal.
/// (`TwoFloat` division itself is only accurate to about double precision.)
pub fn recip(x: DD) -> DD {
    let r0 = dd(1.0 / x.hi());
    r0 + r0 * (dd(1.0) - x * r0)
}

fn zero() -> CDD {
    Complex::new(dd(0.0), dd(0.0))
}

pub fn lift(m: &CMatrix) -> DdMatrix {
    m.map(|z| Complex::new(dd(z.re), dd(z.im)))
}

pub fn lower(m: &DdMatrix) -> CMatrix {
    m.map(|z| C64::new(f64::from(z.re), f64::from(z.im)))
}

pub fn adjoint(m: &DdMatrix) -> DdMatrix {
    DdMatrix::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

pub fn transpose(m: &DdMatrix) -> DdMatrix {
    DdMatrix::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)])
}

pub fn matmul(a: &DdMatrix, b: &DdMatrix) -> DdMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = DdMatrix::from_element(a.nrows(), b.ncols(), zero());
    for j in 0..b.ncols() {
        for k in 0..a.ncols() {
            let bkj = b[(k, j)];
            for i in 0..a.nrows() {
                out[(i, j)] += a[(i, k)] * bkj;
            }
        }
    }
    out
}

/// `A ⊗ B`.
pub fn kronecker(a: &DdMatrix, b: &DdMatrix) -> DdMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DdMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn frobenius(m: &DdMatrix) -> DD {
    m.iter().fold(dd(0.0), |s, z| s + z.norm_sqr()).sqrt()
}

/// Inverse of a nonsingular matrix: LU in double precision, then
/// Newton–Schulz steps `X ← X + X(I − AX)` in double-double.
pub fn inverse(a: &CMatrix) -> Result<DdMatrix, LinalgError> {
    let n = a.nrows();
    let x0 = a
        .clone()
        .try_inverse()
        .ok_or(LinalgError::Domain { eigenvalue: 0.0 })?;
    let a = lift(a);
    let mut x = lift(&x0);
    let id = DdMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(dd(1.0), dd(0.0))
        } else {
            zero()
        }
    });
    for _ in 0..NEWTON_STEPS {
        let r = &id - matmul(&a, &x);
        x = &x + matmul(&x, &r);
    }
    Ok(x)
}

/// Eigendecomposition of a Hermitian matrix in double-double precision.
#[derive(Debug, Clone)]
pub struct DdEigen {
    /// Descending.
    pub values: Vec<DD>,
    pub vectors: DdMatrix,
}

/// Modified Gram–Schmidt, applied twice.
fn orthonormalize(v: &mut DdMatrix) {
    let n = v.ncols();
    for _ in 0..2 {
        for j in 0..n {
            for k in 0..j {
                let mut proj = zero();
                for i in 0..v.nrows() {
                    proj += v[(i, k)].conj() * v[(i, j)];
                }
                for i in 0..v.nrows() {
                    v[(i, j)] = v[(i, j)] - v[(i, k)] * proj;
                }
            }
            let inv = recip(
                (0..v.nrows())
                    .fold(dd(0.0), |s, i| s + v[(i, j)].norm_sqr())
                    .sqrt(),
            );
            for i in 0..v.nrows() {
                v[(i, j)] *= inv;
            }
        }
    }
}

pub fn eigh_dd(a: &DdMatrix) -> Result<DdEigen, LinalgError> {
    let n = a.nrows();
    let warm = eigh(&HermitianMatrix::new(lower(a))?)?;
    let mut v = lift(&warm.vectors);
    orthonormalize(&mut v);
    let mut m = matmul(&adjoint(&v), &matmul(a, &v));
    let floor = frobenius(a) * dd(REL_TOL * 1e-3);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                rotated |= rotate(&mut m, &mut v, p, q, floor);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            let off = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .fold(0.0, |s, (i, j)| s + f64::from(m[(i, j)].norm_sqr()));
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_norm: off.sqrt(),
            });
        }
    }

    let diag: Vec<DD> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        diag[j]
            .partial_cmp(&diag[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = DdMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(DdEigen { values, vectors })
}

/// Annihilates `m[(p, q)]` unless it is negligible relative to the geometric
/// mean of the two diagonal entries. Returns whether a rotation was applied.
fn rotate(m: &mut DdMatrix, v: &mut DdMatrix, p: usize, q: usize, floor: DD) -> bool {
    let n = m.nrows();
    let apq = m[(p, q)];
    let g = apq.norm_sqr().sqrt();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let scale = (app * aqq).abs().sqrt() * dd(REL_TOL);
    if g <= scale || g <= floor {
        return false;
    }
    let phase = apq * recip(g);
    let theta = (aqq - app) * recip(g * dd(2.0));
    let t = if theta.abs() > dd(1e150) {
        dd(0.5) * recip(theta)
    } else {
        let sign = if theta < dd(0.0) { dd(-1.0) } else { dd(1.0) };
        sign * recip(theta.abs() + (theta * theta + dd(1.0)).sqrt())
    };
    let c = recip((t * t + dd(1.0)).sqrt());
    let s = t * c;

    let g00 = Complex::new(c, dd(0.0));
    let g01 = Complex::new(s, dd(0.0));
    let g10 = -phase.conj() * s;
    let g11 = phase.conj() * c;

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g00 + mkq * g10;
        m[(k, q)] = mkp * g01 + mkq * g11;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g00.conj() * mpk + g10.conj() * mqk;
        m[(q, k)] = g01.conj() * mpk + g11.conj() * mqk;
    }
    m[(p, q)] = zero();
    m[(q, p)] = zero();
    m[(p, p)].im = dd(0.0);
    m[(q, q)].im = dd(0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
    true
}
