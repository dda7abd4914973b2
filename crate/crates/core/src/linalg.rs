//! Matrix functions and least-squares helpers.

use faer::traits::ComplexField;
use faer::Mat;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::Operator;
use crate::tol::Tolerances;
use crate::{CMat, CVec, C64};

/// Thin singular value decomposition `m = u·diag(s)·v*`, `s` nonincreasing.
pub struct Svd<T> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

trait Field: ComplexField + nalgebra::Scalar + Copy {
    fn real(self) -> f64;
}

impl Field for f64 {
    fn real(self) -> f64 {
        self
    }
}

impl Field for C64 {
    fn real(self) -> f64 {
        self.re
    }
}

fn to_faer<T: Field>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: Field>(m: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn svd_generic<T: Field>(m: &DMatrix<T>, full: bool) -> Svd<T> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        let zero =
            |n: usize, w: usize| DMatrix::from_fn(n, w, |i, j| if i == j { T::one_impl() } else { T::zero_impl() });
        let (ur, vr) = if full { (r, c) } else { (0, 0) };
        return Svd {
            u: zero(r, ur),
            s: Vec::new(),
            v: zero(c, vr),
        };
    }
    let f = to_faer(m);
    let svd = if full { f.svd() } else { f.thin_svd() }.expect("SVD iteration converges");
    let s = (0..k).map(|i| svd.S()[i].real()).collect();
    Svd {
        u: from_faer(svd.U()),
        s,
        v: from_faer(svd.V()),
    }
}

pub fn svd(m: &CMat) -> Svd<C64> {
    svd_generic(m, false)
}

pub fn svd_real(m: &DMatrix<f64>) -> Svd<f64> {
    svd_generic(m, false)
}

/// Real SVD with square `u` and `v`.
pub fn svd_real_full(m: &DMatrix<f64>) -> Svd<f64> {
    svd_generic(m, true)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd(m).s
}

/// Hermitian eigendecomposition, after checking the relative Hermitian gap.
pub fn hermitian_eigen(p: &CMat, tol: &Tolerances) -> Result<(Vec<f64>, CMat)> {
    let gap = (p - p.adjoint()).norm() / p.norm().max(1.0);
    if gap > tol.residual {
        return Err(Error::NotHermitian { gap });
    }
    let sym = (p + p.adjoint()).scale(0.5);
    if sym.nrows() == 0 {
        return Ok((Vec::new(), sym));
    }
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigenvalue iteration converges");
    let values = (0..sym.nrows()).map(|i| eig.S()[i].re).collect();
    Ok((values, from_faer(eig.U())))
}

/// `p^z` for Hermitian positive definite `p`, via `exp(z·log λ)` on the spectrum.
pub fn pos_power(p: &Operator, z: C64, tol: &Tolerances) -> Result<Operator> {
    let m = pos_power_matrix(p.matrix(), z, tol)?;
    Operator::new(p.space().clone(), m)
}

pub fn pos_power_matrix(p: &CMat, z: C64, tol: &Tolerances) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(p, tol)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min.is_nan() || min <= tol.pd {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let mut scaled = vectors.clone();
    for (k, &lam) in values.iter().enumerate() {
        let f = (z * lam.ln()).exp();
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= f;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Smallest singular value over largest; zero for the zero matrix.
pub fn inverse_condition(m: &CMat) -> f64 {
    let s = singular_values(m);
    let max = s.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    s.iter().copied().fold(f64::INFINITY, f64::min) / max
}

#[derive(Clone, Debug)]
pub struct LsqSolution {
    pub solution: CVec,
    pub residual: f64,
    pub nullity: usize,
}

/// Reusable minimum-norm least-squares solver for a fixed map.
pub struct LsqSolver {
    u: CMat,
    s_inv: Vec<f64>,
    v: CMat,
    map: CMat,
    nullity: usize,
}

impl LsqSolver {
    pub fn new(map: &CMat, tol: &Tolerances) -> Self {
        let Svd { u, s, v } = svd(map);
        let smax = s.iter().copied().fold(0.0, f64::max);
        let cut = tol.rank * smax;
        let mut rank = 0;
        let s_inv = s
            .iter()
            .map(|&s| {
                if smax > 0.0 && s > cut {
                    rank += 1;
                    1.0 / s
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            u,
            s_inv,
            v,
            map: map.clone(),
            nullity: map.ncols() - rank,
        }
    }

    pub fn nullity(&self) -> usize {
        self.nullity
    }

    /// The pseudo-inverse under the rank cutoff.
    pub fn pseudo_inverse(&self) -> CMat {
        let mut v = self.v.clone();
        for (k, s) in self.s_inv.iter().enumerate() {
            v.column_mut(k).scale_mut(*s);
        }
        matmul(&v, &self.u.adjoint())
    }

    pub fn solve(&self, rhs: &CVec) -> LsqSolution {
        let mut c = self.u.ad_mul(rhs);
        for (k, s) in self.s_inv.iter().enumerate() {
            c[k] *= *s;
        }
        let solution = &self.v * c;
        let residual = (&self.map * &solution - rhs).norm();
        LsqSolution {
            solution,
            residual,
            nullity: self.nullity,
        }
    }
}

/// Minimum-norm least-squares solution of `map · x = rhs` via SVD.
pub fn lsq_solve(map: &CMat, rhs: &CVec, tol: &Tolerances) -> LsqSolution {
    LsqSolver::new(map, tol).solve(rhs)
}

const BLOCK: usize = 48;

/// Orthonormal basis of the column span of `m`, with the rank cutoff
/// `σ > rank·σ_max`.
///
/// Columns are first compressed blockwise against the running basis with a
/// loose rejection threshold; the cutoff is then applied to the singular values of
/// the small coefficient matrix, which are those of `m`.
pub fn orthonormal_columns(m: &CMat, tol: &Tolerances) -> CMat {
    let rows = m.nrows();
    let max_norm = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_norm == 0.0 || m.ncols() == 0 {
        return CMat::zeros(rows, 0);
    }
    let reject = 1e-14 * max_norm;
    let mut qm = CMat::zeros(rows, 0);
    let mut start = 0;
    while start < m.ncols() && qm.ncols() < rows {
        let width = BLOCK.min(m.ncols() - start);
        let mut block: CMat = m.columns(start, width).into_owned();
        start += width;
        if qm.ncols() > 0 {
            for _ in 0..2 {
                block -= matmul(&qm, &matmul_adjoint(&qm, &block));
            }
        }
        if block.column_iter().all(|c| c.norm() <= reject) {
            continue;
        }
        let Svd { u, s, .. } = svd(&block);
        let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > reject).collect();
        let room = rows - qm.ncols();
        if keep.is_empty() {
            continue;
        }
        let old = qm.ncols();
        let add = keep.len().min(room);
        qm = qm.resize_horizontally(old + add, C64::new(0.0, 0.0));
        for (t, &k) in keep.iter().take(add).enumerate() {
            qm.set_column(old + t, &u.column(k));
        }
    }
    if qm.ncols() == 0 {
        return CMat::zeros(rows, 0);
    }
    let coeff = matmul_adjoint(&qm, m);
    let Svd { u, s, .. } = svd(&coeff);
    let smax = s.first().copied().unwrap_or(0.0);
    let kept = s.iter().take_while(|&&v| v > tol.rank * smax).count();
    matmul(&qm, &u.columns(0, kept).into_owned())
}

/// Numerical rank of `m` under the relative cutoff.
pub fn rank(m: &CMat, tol: &Tolerances) -> usize {
    orthonormal_columns(m, tol).ncols()
}

/// Stacks real and imaginary parts: a complex `m×k` matrix becomes a real
/// `2m×k` one (as complex entries with zero imaginary part).
pub fn realify(m: &CMat) -> CMat {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, c, |i, j| {
        let z = m[(i % r, j)];
        C64::new(if i < r { z.re } else { z.im }, 0.0)
    })
}

/// Hermitian operators spanning a `*`-closed subspace over the reals,
/// orthonormal for the real Hilbert–Schmidt inner product.
pub fn hermitian_basis(space: &crate::subspace::OperatorSubspace, tol: &Tolerances) -> Vec<Operator> {
    let d = space.space().total_dim();
    let dd = d * d;
    let half = C64::new(0.5, 0.0);
    let minus_half_i = C64::new(0.0, -0.5);
    let mut cols: Vec<Operator> = Vec::new();
    for b in space.basis() {
        let bs = b.adjoint();
        cols.push((&b + &bs).scale(half));
        cols.push((&b - &bs).scale(minus_half_i));
    }
    if cols.is_empty() {
        return Vec::new();
    }
    let real = DMatrix::<f64>::from_fn(2 * dd, cols.len(), |i, k| {
        let z = cols[k].entries()[i % dd];
        if i < dd {
            z.re
        } else {
            z.im
        }
    });
    let Svd { u, s, .. } = svd_real(&real);
    let smax = s.first().copied().unwrap_or(0.0);
    (0..s.len())
        .filter(|&k| smax > 0.0 && s[k] > tol.rank * smax)
        .map(|k| {
            let col = u.column(k);
            let m = CMat::from_fn(d, d, |i, j| C64::new(col[j * d + i], col[dd + j * d + i]));
            let m = (&m + m.adjoint()).scale(0.5);
            Operator::new(space.space().clone(), m).expect("ambient size")
        })
        .collect()
}

fn faer_ref(m: &CMat) -> faer::MatRef<'_, C64> {
    faer::MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn gemm<L: faer::traits::Conjugate<Canonical = C64>>(lhs: faer::MatRef<'_, L>, rhs: faer::MatRef<'_, C64>) -> CMat {
    let (r, c) = (lhs.nrows(), rhs.ncols());
    let mut out = CMat::zeros(r, c);
    let dst = faer::MatMut::from_column_major_slice_mut(out.as_mut_slice(), r, c);
    faer::linalg::matmul::matmul(dst, faer::Accum::Replace, lhs, rhs, C64::new(1.0, 0.0), faer::Par::Seq);
    out
}

/// `a·b`, dispatched to a blocked kernel once the matrices are large enough to benefit.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    if a.nrows().max(a.ncols()).max(b.ncols()) < 24 {
        return a * b;
    }
    gemm(faer_ref(a), faer_ref(b))
}

/// `a*·b`.
pub fn matmul_adjoint(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows(), "inner dimensions differ");
    gemm(faer_ref(a).adjoint(), faer_ref(b))
}
