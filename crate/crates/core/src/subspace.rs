//! Linear spans of operators with a Hilbert–Schmidt orthonormal basis.

use crate::error::{Error, Result};
use crate::linalg::{matmul, matmul_adjoint, orthonormal_columns};
use crate::tensor::{Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::{CMat, CVec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub flag: bool,
    pub residual: f64,
}

/// Orthonormal basis stored as the columns of `vecs`: column `k` is the
/// column-major vectorization of basis operator `k`.
#[derive(Clone, Debug)]
pub struct OperatorSubspace {
    space: TensorSpace,
    vecs: CMat,
}

fn vectorize(x: &Operator) -> CVec {
    CVec::from_column_slice(x.entries())
}

impl OperatorSubspace {
    /// Span of a nonempty family sharing one tensor space.
    pub fn span(family: &[Operator], tol: &Tolerances) -> Result<Self> {
        let first = family.first().ok_or(Error::EmptyFamily)?;
        let space = first.space().clone();
        for x in family {
            if x.space() != &space {
                return Err(Error::SpaceMismatch {
                    expected: space,
                    found: x.space().clone(),
                });
            }
        }
        let cols: Vec<CVec> = family.iter().map(vectorize).collect();
        let stacked = CMat::from_columns(&cols);
        Ok(Self {
            space,
            vecs: orthonormal_columns(&stacked, tol),
        })
    }

    /// The zero subspace of `space`.
    pub fn zero(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            vecs: CMat::zeros(d * d, 0),
        }
    }

    /// All operators on `space`.
    pub fn full(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            vecs: CMat::identity(d * d, d * d),
        }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.vecs.ncols()
    }

    pub fn basis_op(&self, k: usize) -> Operator {
        let d = self.space.total_dim();
        let m = CMat::from_column_slice(d, d, self.vecs.column(k).as_slice());
        Operator::new(self.space.clone(), m).expect("basis vector has the ambient size")
    }

    pub fn basis(&self) -> Vec<Operator> {
        (0..self.dim()).map(|k| self.basis_op(k)).collect()
    }

    fn check_space(&self, x: &Operator) -> Result<()> {
        if x.space() != &self.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.clone(),
                found: x.space().clone(),
            });
        }
        Ok(())
    }

    /// Coordinates of the orthogonal projection of `x`.
    pub fn coords(&self, x: &Operator) -> Result<CVec> {
        self.check_space(x)?;
        let v = vectorize(x);
        let v = CMat::from_column_slice(v.len(), 1, v.as_slice());
        Ok(CVec::from_column_slice(matmul_adjoint(&self.vecs, &v).as_slice()))
    }

    pub fn from_coords(&self, c: &CVec) -> Operator {
        let d = self.space.total_dim();
        let v = &self.vecs * c;
        Operator::new(self.space.clone(), CMat::from_column_slice(d, d, v.as_slice()))
            .expect("coordinate vector has the subspace dimension")
    }

    pub fn project(&self, x: &Operator) -> Result<Operator> {
        Ok(self.from_coords(&self.coords(x)?))
    }

    /// `‖x − proj(x)‖_F / max(1, ‖x‖_F)`.
    pub fn residual(&self, x: &Operator) -> Result<f64> {
        self.check_space(x)?;
        let v = vectorize(x);
        let v = CMat::from_column_slice(v.len(), 1, v.as_slice());
        let p = matmul(&self.vecs, &matmul_adjoint(&self.vecs, &v));
        Ok((v - p).norm() / x.frob_norm().max(1.0))
    }

    /// Coordinates of every member of `family`, one column each, and the
    /// largest [`residual`](Self::residual) among them.
    pub fn coords_family(&self, family: &[Operator]) -> Result<(CMat, f64)> {
        for x in family {
            self.check_space(x)?;
        }
        if family.is_empty() {
            return Ok((CMat::zeros(self.dim(), 0), 0.0));
        }
        let cols: Vec<CVec> = family.iter().map(vectorize).collect();
        let m = CMat::from_columns(&cols);
        let c = matmul_adjoint(&self.vecs, &m);
        let p = matmul(&self.vecs, &c);
        let worst = family
            .iter()
            .enumerate()
            .map(|(k, x)| (m.column(k) - p.column(k)).norm() / x.frob_norm().max(1.0))
            .fold(0.0, f64::max);
        Ok((c, worst))
    }

    /// Largest [`residual`](Self::residual) over `family`, in one pass.
    pub fn max_residual(&self, family: &[Operator]) -> Result<f64> {
        Ok(self.coords_family(family)?.1)
    }

    pub fn contains(&self, x: &Operator, tol: &Tolerances) -> Result<Membership> {
        let residual = self.residual(x)?;
        Ok(Membership {
            flag: tol.passes(residual),
            residual,
        })
    }

    /// Span of `{x ⊗ y}`; the Kronecker products of orthonormal bases are
    /// again orthonormal, so no factorization is needed.
    pub fn tensor(&self, other: &OperatorSubspace) -> OperatorSubspace {
        let space = self.space.concat(&other.space);
        let mut cols = Vec::with_capacity(self.dim() * other.dim());
        for a in self.basis() {
            for b in other.basis() {
                cols.push(vectorize(&a.kron(&b)));
            }
        }
        let d = space.total_dim();
        let vecs = if cols.is_empty() {
            CMat::zeros(d * d, 0)
        } else {
            CMat::from_columns(&cols)
        };
        OperatorSubspace { space, vecs }
    }

    /// Largest residual of a basis element of `self` against `other`;
    /// zero means `self ⊆ other`.
    pub fn inclusion_residual(&self, other: &OperatorSubspace) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                expected: other.space.clone(),
                found: self.space.clone(),
            });
        }
        let mut worst: f64 = 0.0;
        for k in 0..self.dim() {
            worst = worst.max(other.residual(&self.basis_op(k))?);
        }
        Ok(worst)
    }

    /// Both inclusions; equal dimensions are implied when this is small.
    pub fn equality_residual(&self, other: &OperatorSubspace) -> Result<f64> {
        Ok(self.inclusion_residual(other)?.max(other.inclusion_residual(self)?))
    }

    /// Largest residual of an adjoint of a basis element.
    pub fn star_residual(&self) -> f64 {
        self.basis()
            .iter()
            .map(|b| self.residual(&b.adjoint()).expect("same space"))
            .fold(0.0, f64::max)
    }

    /// Largest residual of a product of two basis elements.
    pub fn product_residual(&self) -> f64 {
        let basis = self.basis();
        let mut worst: f64 = 0.0;
        for a in &basis {
            for b in &basis {
                worst = worst.max(self.residual(&(a * b)).expect("same space"));
            }
        }
        worst
    }

    /// Membership of the identity of the ambient space.
    pub fn unit_residual(&self) -> f64 {
        self.residual(&Operator::identity(self.space.clone()))
            .expect("same space")
    }

    /// Projection onto the span of the ranges of all elements. For a
    /// `*`-closed algebra this is its unit.
    pub fn range_projection(&self, tol: &Tolerances) -> CMat {
        let d = self.space.total_dim();
        let basis = self.basis();
        if basis.is_empty() {
            return CMat::zeros(d, d);
        }
        let mut stacked = CMat::zeros(d, d * basis.len());
        for (k, b) in basis.iter().enumerate() {
            stacked.columns_mut(k * d, d).copy_from(b.matrix());
        }
        let q = orthonormal_columns(&stacked, tol);
        &q * q.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::LegSpec;
    use crate::C64;

    fn e(i: usize, j: usize) -> Operator {
        Operator::matrix_unit(LegSpec::h(2), i, j)
    }

    #[test]
    fn span_dimensions() {
        let tol = Tolerances::default();
        assert_eq!(OperatorSubspace::span(&[e(1, 0), e(1, 1)], &tol).unwrap().dim(), 2);
        let i = Operator::identity(TensorSpace::h_power(2, 1));
        assert_eq!(
            OperatorSubspace::span(&[i.clone(), i.scale_re(2.0)], &tol)
                .unwrap()
                .dim(),
            1
        );
        assert!(matches!(OperatorSubspace::span(&[], &tol), Err(Error::EmptyFamily)));
    }

    #[test]
    fn membership_examples() {
        let tol = Tolerances::default();
        let s = OperatorSubspace::span(&[e(1, 0), e(1, 1)], &tol).unwrap();
        let m = s.contains(&e(1, 1), &tol).unwrap();
        assert!(m.flag && m.residual < 1e-15);
        let i = Operator::identity(TensorSpace::h_power(2, 1));
        let m = s.contains(&i, &tol).unwrap();
        assert!(!m.flag);
        assert!((m.residual - 0.5f64.sqrt()).abs() < 1e-14);
        let si = OperatorSubspace::span(std::slice::from_ref(&i), &tol).unwrap();
        let m = si.contains(&i.scale_re(5.0), &tol).unwrap();
        assert!(m.flag && m.residual < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal() {
        let tol = Tolerances::default();
        let fam = vec![
            e(0, 0).scale(C64::new(1.0, 1.0)),
            &e(0, 0) + &e(0, 1),
            e(1, 0),
            &e(1, 0) + &e(0, 0),
        ];
        let s = OperatorSubspace::span(&fam, &tol).unwrap();
        assert_eq!(s.dim(), 3);
        let b = s.basis();
        for (k, x) in b.iter().enumerate() {
            for (l, y) in b.iter().enumerate() {
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((x.hs_inner(y) - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_of_spans() {
        let tol = Tolerances::default();
        let s = OperatorSubspace::span(&[e(1, 0), e(1, 1)], &tol).unwrap();
        let t = s.tensor(&s);
        assert_eq!(t.dim(), 4);
        assert!(t.contains(&e(1, 0).kron(&e(1, 1)), &tol).unwrap().flag);
        assert!(!t.contains(&e(0, 0).kron(&e(1, 1)), &tol).unwrap().flag);
    }

    #[test]
    fn range_projection_of_diagonal_corner() {
        let tol = Tolerances::default();
        let s = OperatorSubspace::span(&[e(1, 1)], &tol).unwrap();
        let p = s.range_projection(&tol);
        assert!((p - e(1, 1).matrix()).norm() < 1e-14);
    }
}
