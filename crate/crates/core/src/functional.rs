//! Functionals on a single leg and the slice maps they induce.

use crate::error::{Error, Result};
use crate::tensor::{LegSpec, Operator, TensorSpace};
use crate::{CMat, CVec, C64};

/// `ω(T) = trace(T·F)` for the density `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    leg: LegSpec,
    density: CMat,
}

/// Which leg of a two-leg operator the functional is applied to.
///
/// `Right` is `(id⊗ω)`, `Left` is `(ω⊗id)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Functional {
    pub fn new(leg: LegSpec, density: CMat) -> Result<Self> {
        if density.nrows() != leg.dim || density.ncols() != leg.dim {
            return Err(Error::DimensionMismatch {
                rows: density.nrows(),
                cols: density.ncols(),
                expected: leg.dim,
            });
        }
        Ok(Self { leg, density })
    }

    /// `ω_{a,b}(T) = ⟨Ta, b⟩`, density `a·b*`.
    pub fn vector(leg: LegSpec, a: &CVec, b: &CVec) -> Result<Self> {
        Self::new(leg, a * b.adjoint())
    }

    /// The functional picking the `(i, j)` entry: `T ↦ T_ij`.
    pub fn matrix_unit(leg: LegSpec, i: usize, j: usize) -> Self {
        let mut density = CMat::zeros(leg.dim, leg.dim);
        density[(j, i)] = C64::new(1.0, 0.0);
        Self { leg, density }
    }

    /// All `n²` entry functionals, `(i, j)` in row-major order.
    pub fn entry_basis(leg: LegSpec) -> Vec<Self> {
        let n = leg.dim;
        (0..n * n).map(|k| Self::matrix_unit(leg, k / n, k % n)).collect()
    }

    pub fn leg(&self) -> LegSpec {
        self.leg
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    pub fn eval(&self, t: &Operator) -> Result<C64> {
        if t.space() != &TensorSpace::single(self.leg) {
            return Err(Error::SpaceMismatch {
                expected: TensorSpace::single(self.leg),
                found: t.space().clone(),
            });
        }
        Ok((t.matrix() * &self.density).trace())
    }

    /// `ω^⊤(m^⊤) = ω(m)`; lives on the conjugate leg with density `Fᵗ`.
    pub fn transpose(&self) -> Self {
        Self {
            leg: self.leg.conj(),
            density: self.density.transpose(),
        }
    }

    /// `ω̄(x) = conj(ω(x*))`, density `F*`.
    pub fn conj(&self) -> Self {
        Self {
            leg: self.leg,
            density: self.density.adjoint(),
        }
    }

    /// Same density read on a different leg of equal dimension.
    pub fn retyped(&self, leg: LegSpec) -> Result<Self> {
        Self::new(leg, self.density.clone())
    }

    /// `(id⊗ω)(x)` or `(ω⊗id)(x)` for a two-leg operator `x`.
    pub fn slice(&self, x: &Operator, side: Side) -> Result<Operator> {
        slice(x, side, self)
    }
}

/// Contracts one leg of a two-leg operator against `w`.
///
/// Satisfies `⟨(id⊗ω_{a,b})(X)ξ, η⟩ = ⟨X(ξ⊗a), η⊗b⟩`.
pub fn slice(x: &Operator, side: Side, w: &Functional) -> Result<Operator> {
    let legs = x.space().legs();
    if legs.len() != 2 {
        return Err(Error::WrongStructure {
            expected: "two-leg operator".into(),
            found: x.space().to_string(),
        });
    }
    let (kept, sliced, leg_no) = match side {
        Side::Right => (legs[0], legs[1], 2),
        Side::Left => (legs[1], legs[0], 1),
    };
    if sliced != w.leg {
        return Err(Error::LegMismatch {
            leg: leg_no,
            reason: format!("functional lives on {}, leg is {}", w.leg, sliced),
        });
    }
    let (n1, n2) = (legs[0].dim, legs[1].dim);
    let m = x.matrix();
    let f = &w.density;
    let zero = C64::new(0.0, 0.0);
    let out = match side {
        Side::Right => CMat::from_fn(n1, n1, |i, j| {
            let mut acc = zero;
            for k in 0..n2 {
                for l in 0..n2 {
                    let fv = f[(l, k)];
                    if fv != zero {
                        acc += m[(i * n2 + k, j * n2 + l)] * fv;
                    }
                }
            }
            acc
        }),
        Side::Left => CMat::from_fn(n2, n2, |i, j| {
            let mut acc = zero;
            for k in 0..n1 {
                for l in 0..n1 {
                    let fv = f[(l, k)];
                    if fv != zero {
                        acc += m[(k * n2 + i, l * n2 + j)] * fv;
                    }
                }
            }
            acc
        }),
    };
    Operator::new(TensorSpace::single(kept), out)
}

/// Slices of `x` over every entry functional of the sliced leg, row-major.
pub fn entry_slices(x: &Operator, side: Side) -> Result<Vec<Operator>> {
    let legs = x.space().legs();
    if legs.len() != 2 {
        return Err(Error::WrongStructure {
            expected: "two-leg operator".into(),
            found: x.space().to_string(),
        });
    }
    let (n1, n2) = (legs[0].dim, legs[1].dim);
    let m = x.matrix();
    let mut out = Vec::new();
    match side {
        Side::Right => {
            let kept = TensorSpace::single(legs[0]);
            for p in 0..n2 {
                for q in 0..n2 {
                    let s = CMat::from_fn(n1, n1, |i, j| m[(i * n2 + p, j * n2 + q)]);
                    out.push(Operator::new(kept.clone(), s)?);
                }
            }
        }
        Side::Left => {
            let kept = TensorSpace::single(legs[1]);
            for p in 0..n1 {
                for q in 0..n1 {
                    let s = CMat::from_fn(n2, n2, |i, j| m[(p * n2 + i, q * n2 + j)]);
                    out.push(Operator::new(kept.clone(), s)?);
                }
            }
        }
    }
    Ok(out)
}

/// `(ω₁⊗ω₂)(x)` by direct double contraction.
pub fn eval_pair(x: &Operator, w1: &Functional, w2: &Functional) -> Result<C64> {
    let space = TensorSpace::new(vec![w1.leg, w2.leg]);
    if x.space() != &space {
        return Err(Error::SpaceMismatch {
            expected: space,
            found: x.space().clone(),
        });
    }
    Ok((x.matrix() * w1.density.kronecker(&w2.density)).trace())
}
