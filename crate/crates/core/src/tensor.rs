//! Typed tensor spaces and operators on them.
//!
//! Legs are numbered from 1 in every public API, matching the `W₁₃`
//! notation: `embed(&[1, 3], ..)` places the two legs of `W` on the first and
//! third factor of a three-leg space.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMat, C64};

/// Which copy of `Cⁿ` a leg lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    H,
    Hbar,
}

impl Flavor {
    pub fn conj(self) -> Self {
        match self {
            Flavor::H => Flavor::Hbar,
            Flavor::Hbar => Flavor::H,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::H => f.write_str("H"),
            Flavor::Hbar => f.write_str("Hbar"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LegSpec {
    pub dim: usize,
    pub flavor: Flavor,
}

impl LegSpec {
    pub fn new(dim: usize, flavor: Flavor) -> Self {
        assert!(dim >= 1, "leg dimension must be positive");
        Self { dim, flavor }
    }

    pub fn h(dim: usize) -> Self {
        Self::new(dim, Flavor::H)
    }

    pub fn hbar(dim: usize) -> Self {
        Self::new(dim, Flavor::Hbar)
    }

    pub fn conj(self) -> Self {
        Self {
            dim: self.dim,
            flavor: self.flavor.conj(),
        }
    }
}

impl fmt::Display for LegSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.flavor, self.dim)
    }
}

/// Ordered list of legs; the first leg is the most significant index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TensorSpace {
    legs: Vec<LegSpec>,
}

impl TensorSpace {
    pub fn new(legs: Vec<LegSpec>) -> Self {
        assert!(!legs.is_empty(), "a tensor space needs at least one leg");
        Self { legs }
    }

    pub fn single(leg: LegSpec) -> Self {
        Self::new(vec![leg])
    }

    /// `k` copies of `H(n)`.
    pub fn h_power(n: usize, k: usize) -> Self {
        Self::new(vec![LegSpec::h(n); k])
    }

    pub fn from_flavors(n: usize, flavors: &[Flavor]) -> Self {
        Self::new(flavors.iter().map(|&f| LegSpec::new(n, f)).collect())
    }

    pub fn legs(&self) -> &[LegSpec] {
        &self.legs
    }

    pub fn leg(&self, index: usize) -> LegSpec {
        self.legs[index]
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn total_dim(&self) -> usize {
        self.legs.iter().map(|l| l.dim).product()
    }

    pub fn concat(&self, other: &TensorSpace) -> TensorSpace {
        let mut legs = self.legs.clone();
        legs.extend_from_slice(&other.legs);
        TensorSpace { legs }
    }

    pub fn conj(&self) -> TensorSpace {
        TensorSpace {
            legs: self.legs.iter().map(|l| l.conj()).collect(),
        }
    }

    /// Row-major strides: stride of leg `k` is the product of the dims after it.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.legs.len()];
        for k in (0..self.legs.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.legs[k + 1].dim;
        }
        strides
    }
}

impl fmt::Display for TensorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, leg) in self.legs.iter().enumerate() {
            if k > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{leg}")?;
        }
        Ok(())
    }
}

/// Index bookkeeping for an operator placed on a subset of an ambient space.
///
/// Every ambient index decomposes uniquely as `rest[r] + sub[s]`, where `s`
/// indexes the placed legs (in the placed operator's own order) and `r` the
/// remaining legs.
#[derive(Clone, Debug)]
struct LegPlacement {
    sub: Vec<usize>,
    rest: Vec<usize>,
}

impl LegPlacement {
    fn new(op_space: &TensorSpace, legs: &[usize], ambient: &TensorSpace) -> Result<Self> {
        if legs.len() != op_space.num_legs() {
            return Err(Error::WrongStructure {
                expected: format!("{} target legs", op_space.num_legs()),
                found: format!("{} target legs", legs.len()),
            });
        }
        let mut used = vec![false; ambient.num_legs()];
        for (k, &leg) in legs.iter().enumerate() {
            if leg == 0 || leg > ambient.num_legs() {
                return Err(Error::LegMismatch {
                    leg,
                    reason: format!("ambient space {ambient} has no such leg"),
                });
            }
            if used[leg - 1] {
                return Err(Error::LegMismatch {
                    leg,
                    reason: "leg listed twice".into(),
                });
            }
            used[leg - 1] = true;
            let want = op_space.leg(k);
            let have = ambient.leg(leg - 1);
            if want != have {
                return Err(Error::LegMismatch {
                    leg,
                    reason: format!("operator leg is {want}, ambient leg is {have}"),
                });
            }
        }

        let strides = ambient.strides();
        let sub = multi_index_offsets(
            &legs.iter().map(|&l| ambient.leg(l - 1).dim).collect::<Vec<_>>(),
            &legs.iter().map(|&l| strides[l - 1]).collect::<Vec<_>>(),
        );
        let rest_legs: Vec<usize> = (0..ambient.num_legs()).filter(|&k| !used[k]).collect();
        let rest = multi_index_offsets(
            &rest_legs.iter().map(|&k| ambient.leg(k).dim).collect::<Vec<_>>(),
            &rest_legs.iter().map(|&k| strides[k]).collect::<Vec<_>>(),
        );
        Ok(Self { sub, rest })
    }
}

/// Offsets of every multi-index over `dims` (first most significant) under the
/// given strides.
fn multi_index_offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (&d, &s) in dims.iter().zip(strides) {
        let mut next = Vec::with_capacity(out.len() * d);
        for &base in &out {
            for i in 0..d {
                next.push(base + i * s);
            }
        }
        out = next;
    }
    out
}

/// A square complex matrix acting on a typed tensor space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: TensorSpace,
    matrix: CMat,
}

impl Operator {
    pub fn new(space: TensorSpace, matrix: CMat) -> Result<Self> {
        let expected = space.total_dim();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected,
            });
        }
        Ok(Self { space, matrix })
    }

    /// Operator on `k` legs `H(n)` with `n^k` the side of `matrix`.
    pub fn on_h(n: usize, k: usize, matrix: CMat) -> Result<Self> {
        Self::new(TensorSpace::h_power(n, k), matrix)
    }

    /// Real 0/1-style matrix given row by row.
    pub fn from_real_rows(space: TensorSpace, rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                rows: n,
                cols: m,
                expected: space.total_dim(),
            });
        }
        Self::new(space, DMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn identity(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: CMat::identity(d, d),
        }
    }

    pub fn zeros(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: CMat::zeros(d, d),
        }
    }

    /// Matrix unit `e_{ij}` (0-based) on a single leg.
    pub fn matrix_unit(leg: LegSpec, i: usize, j: usize) -> Self {
        let mut op = Self::zeros(TensorSpace::single(leg));
        op.matrix[(i, j)] = C64::new(1.0, 0.0);
        op
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entries in column-major order; the Hilbert–Schmidt inner product is
    /// the Euclidean one on this slice.
    pub fn entries(&self) -> &[C64] {
        self.matrix.as_slice()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Transpose on every leg: plain matrix transpose, each flavor flipped.
    pub fn transpose(&self) -> Self {
        Self {
            space: self.space.conj(),
            matrix: self.matrix.transpose(),
        }
    }

    /// Same matrix, different leg typing. Dimensions must agree.
    pub fn retyped(&self, space: TensorSpace) -> Result<Self> {
        Self::new(space, self.matrix.clone())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * c,
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn frob_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `trace(other* · self)`.
    pub fn hs_inner(&self, other: &Operator) -> C64 {
        self.matrix.dotc(&other.matrix).conj()
    }

    /// `‖self − other‖_F / max(1, ‖self‖_F)`; `self` plays the left-hand side.
    pub fn rel_gap(&self, other: &Operator) -> f64 {
        assert_eq!(self.space, other.space, "comparing operators on different spaces");
        (&self.matrix - &other.matrix).norm() / self.frob_norm().max(1.0)
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: crate::linalg::matmul(&self.matrix, &other.matrix),
        })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.clone(),
                found: other.space.clone(),
            });
        }
        Ok(())
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        kron(self, other)
    }

    /// Acts as `self` on `legs` of `ambient` and as the identity elsewhere.
    pub fn embed(&self, legs: &[usize], ambient: &TensorSpace) -> Result<Operator> {
        let place = LegPlacement::new(&self.space, legs, ambient)?;
        let d = ambient.total_dim();
        let mut out = CMat::zeros(d, d);
        let ds = place.sub.len();
        for &r in &place.rest {
            for si in 0..ds {
                for sj in 0..ds {
                    let v = self.matrix[(si, sj)];
                    if v != C64::new(0.0, 0.0) {
                        out[(r + place.sub[si], r + place.sub[sj])] = v;
                    }
                }
            }
        }
        Operator::new(ambient.clone(), out)
    }

    /// `embed(self, legs) · y` without forming the embedded matrix.
    pub fn apply_on_legs(&self, legs: &[usize], y: &Operator) -> Result<Operator> {
        let place = LegPlacement::new(&self.space, legs, &y.space)?;
        let d = y.dim();
        let ds = place.sub.len();
        let dr = place.rest.len();
        if place.sub.iter().enumerate().all(|(k, &s)| s == k) {
            let stacked = CMat::from_column_slice(ds, dr * d, y.matrix.as_slice());
            let acted = crate::linalg::matmul(&self.matrix, &stacked);
            return Operator::new(y.space.clone(), CMat::from_column_slice(d, d, acted.as_slice()));
        }
        let mut gathered = CMat::zeros(ds, dr * d);
        {
            let src = y.matrix.as_slice();
            let dst = gathered.as_mut_slice();
            for c in 0..d {
                let col = &src[c * d..(c + 1) * d];
                for (ri, &r) in place.rest.iter().enumerate() {
                    let block = &mut dst[(ri + dr * c) * ds..(ri + dr * c + 1) * ds];
                    for (g, &s) in block.iter_mut().zip(&place.sub) {
                        *g = col[r + s];
                    }
                }
            }
        }
        let acted = crate::linalg::matmul(&self.matrix, &gathered);
        let mut out = CMat::zeros(d, d);
        {
            let src = acted.as_slice();
            let dst = out.as_mut_slice();
            for c in 0..d {
                let col = &mut dst[c * d..(c + 1) * d];
                for (ri, &r) in place.rest.iter().enumerate() {
                    let block = &src[(ri + dr * c) * ds..(ri + dr * c + 1) * ds];
                    for (&v, &s) in block.iter().zip(&place.sub) {
                        col[r + s] = v;
                    }
                }
            }
        }
        Operator::new(y.space.clone(), out)
    }

    /// `y · embed(self, legs)`.
    pub fn right_apply_on_legs(&self, legs: &[usize], y: &Operator) -> Result<Operator> {
        Ok(self.adjoint().apply_on_legs(legs, &y.adjoint())?.adjoint())
    }

    pub fn is_hermitian_gap(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm() / self.frob_norm().max(1.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    /// Panics when the spaces differ; use [`Operator::try_mul`] on untrusted input.
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.same_space(rhs).unwrap_or_else(|e| panic!("{e}"));
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Product `F₁·F₂·…·F_k` of leg-placed factors on `ambient`, evaluated right
/// to left without forming the embedded matrices.
pub fn product_on(ambient: &TensorSpace, factors: &[(&Operator, &[usize])]) -> Result<Operator> {
    let Some(((last, last_legs), rest)) = factors.split_last() else {
        return Ok(Operator::identity(ambient.clone()));
    };
    let mut acc = last.embed(last_legs, ambient)?;
    for (op, legs) in rest.iter().rev() {
        acc = op.apply_on_legs(legs, &acc)?;
    }
    Ok(acc)
}

/// Kronecker product; the first factor is the most significant index.
pub fn kron(x: &Operator, y: &Operator) -> Operator {
    Operator {
        space: x.space.concat(&y.space),
        matrix: x.matrix.kronecker(&y.matrix),
    }
}

/// The flip `Σ(e_i ⊗ e_k) = e_k ⊗ e_i` on `leg ⊗ leg`.
pub fn flip(n: usize, flavor: Flavor) -> Operator {
    let leg = LegSpec::new(n, flavor);
    let mut m = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for k in 0..n {
            m[(k * n + i, i * n + k)] = C64::new(1.0, 0.0);
        }
    }
    Operator {
        space: TensorSpace::new(vec![leg, leg]),
        matrix: m,
    }
}

/// Transpose of a single-leg operator (`m^⊤ ξ̄ = conj(m* ξ)`).
pub fn transpose_op(m: &Operator) -> Result<Operator> {
    if m.space.num_legs() != 1 {
        return Err(Error::WrongStructure {
            expected: "single-leg operator".into(),
            found: m.space.to_string(),
        });
    }
    Ok(m.transpose())
}

/// `Σ X* Σ` for a two-leg operator on `leg ⊗ leg`.
pub fn hat(w: &Operator) -> Result<Operator> {
    let legs = w.space.legs();
    if legs.len() != 2 || legs[0] != legs[1] {
        return Err(Error::WrongStructure {
            expected: "operator on leg ⊗ leg".into(),
            found: w.space.to_string(),
        });
    }
    let s = flip(legs[0].dim, legs[0].flavor);
    Ok(&(&s * &w.adjoint()) * &s)
}

/// Conjugates the coordinates of a vector (the `ξ ↦ ξ̄` identification).
pub fn bar(v: &crate::CVec) -> crate::CVec {
    v.map(|z| z.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn w_ex() -> Operator {
        let e = |i, j| Operator::matrix_unit(LegSpec::h(2), i, j);
        &kron(&e(1, 0), &e(0, 0)) + &kron(&e(1, 1), &e(1, 1))
    }

    #[test]
    fn kron_places_rank_one() {
        let e11 = Operator::matrix_unit(LegSpec::h(2), 0, 0);
        let k = kron(&e11, &e11);
        assert_eq!(k.matrix()[(0, 0)], c(1.0));
        assert_eq!(k.frob_norm(), 1.0);
        let i2 = Operator::identity(TensorSpace::h_power(2, 1));
        assert_eq!(kron(&i2, &i2), Operator::identity(TensorSpace::h_power(2, 2)));
    }

    #[test]
    fn example_operator_entries() {
        let w = w_ex();
        for r in 0..4 {
            for col in 0..4 {
                let want = if (r, col) == (2, 0) || (r, col) == (3, 3) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(w.matrix()[(r, col)], c(want));
            }
        }
    }

    #[test]
    fn embed_trailing_and_leading_identity() {
        let w = w_ex();
        let amb = TensorSpace::h_power(2, 3);
        let i2 = Operator::identity(TensorSpace::h_power(2, 1));
        assert_eq!(w.embed(&[1, 2], &amb).unwrap(), kron(&w, &i2));
        assert_eq!(w.embed(&[2, 3], &amb).unwrap(), kron(&i2, &w));
    }

    #[test]
    fn embed_13_matches_brute_force() {
        let w = w_ex();
        let amb = TensorSpace::h_power(2, 3);
        let w13 = w.embed(&[1, 3], &amb).unwrap();
        let n = 2;
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for a2 in 0..n {
                        for b2 in 0..n {
                            for c2 in 0..n {
                                let row = a2 * 4 + b2 * 2 + c2;
                                let col = a * 4 + b * 2 + cc;
                                let want = if b == b2 {
                                    w.matrix()[(a2 * 2 + c2, a * 2 + cc)]
                                } else {
                                    c(0.0)
                                };
                                assert_eq!(w13.matrix()[(row, col)], want);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn embed_rejects_flavor_mismatch() {
        let w = w_ex();
        let amb = TensorSpace::new(vec![LegSpec::hbar(2), LegSpec::h(2), LegSpec::h(2)]);
        assert!(matches!(w.embed(&[1, 2], &amb), Err(Error::LegMismatch { leg: 1, .. })));
        assert!(w.embed(&[2, 3], &amb).is_ok());
        assert!(w.embed(&[0, 1], &amb).is_err());
        assert!(w.embed(&[2, 2], &amb).is_err());
    }

    #[test]
    fn apply_on_legs_agrees_with_dense_product() {
        let w = w_ex();
        let amb = TensorSpace::h_power(2, 3);
        let y = &w.adjoint().embed(&[1, 3], &amb).unwrap() + &w.embed(&[2, 3], &amb).unwrap();
        for legs in [[1, 2], [2, 3], [1, 3], [3, 1]] {
            let dense = &w.embed(&legs, &amb).unwrap() * &y;
            assert_eq!(w.apply_on_legs(&legs, &y).unwrap(), dense);
            let dense_r = &y * &w.embed(&legs, &amb).unwrap();
            assert_eq!(w.right_apply_on_legs(&legs, &y).unwrap(), dense_r);
        }
    }

    #[test]
    fn flip_cases() {
        assert_eq!(flip(1, Flavor::H).matrix()[(0, 0)], c(1.0));
        let s = flip(2, Flavor::H);
        let mut want = CMat::identity(4, 4);
        want.swap_rows(1, 2);
        assert_eq!(s.matrix(), &want);
        let s3 = flip(3, Flavor::H);
        assert_eq!(&s3 * &s3, Operator::identity(TensorSpace::h_power(3, 2)));
    }

    #[test]
    fn transpose_flips_flavor() {
        let e21 = Operator::matrix_unit(LegSpec::h(2), 1, 0);
        let t = transpose_op(&e21).unwrap();
        assert_eq!(t.matrix(), Operator::matrix_unit(LegSpec::hbar(2), 0, 1).matrix());
        assert_eq!(t.space().leg(0).flavor, Flavor::Hbar);
        assert_eq!(transpose_op(&t).unwrap(), e21);
        assert!(transpose_op(&w_ex()).is_err());
    }

    #[test]
    fn mismatched_product_is_an_error() {
        let a = Operator::identity(TensorSpace::single(LegSpec::h(2)));
        let b = Operator::identity(TensorSpace::single(LegSpec::hbar(2)));
        assert!(matches!(a.try_mul(&b), Err(Error::SpaceMismatch { .. })));
        assert!(Operator::new(TensorSpace::h_power(2, 2), CMat::zeros(3, 3)).is_err());
    }

    #[test]
    fn hat_twice_is_identity_map() {
        let w = w_ex();
        assert_eq!(hat(&hat(&w).unwrap()).unwrap(), w);
    }
}
