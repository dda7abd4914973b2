//! The multiplicativity axioms, their consequences, and fullness.

use crate::check::Checks;
use crate::error::{Error, Result};
use crate::functional::{entry_slices, Side};
use crate::linalg::rank;
use crate::subspace::Membership;
use crate::tensor::{hat, product_on, Flavor, Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::CMat;

/// `‖WW*W − W‖ / max(1, ‖W‖)`.
pub fn is_partial_isometry(w: &Operator, tol: &Tolerances) -> Membership {
    let wwsw = &(w * &w.adjoint()) * w;
    let residual = wwsw.rel_gap(w);
    Membership {
        flag: tol.passes(residual),
        residual,
    }
}

/// Leg dimension of an operator on `H(n) ⊗ H(n)`.
pub fn two_leg_h_dim(w: &Operator) -> Result<usize> {
    let legs = w.space().legs();
    if legs.len() != 2 || legs[0] != legs[1] || legs[0].flavor != Flavor::H {
        return Err(Error::WrongStructure {
            expected: "operator on H(n)⊗H(n)".into(),
            found: w.space().to_string(),
        });
    }
    Ok(legs[0].dim)
}

#[derive(Clone, Debug)]
pub struct MpiVerdict {
    pub partial_isometry: Membership,
    /// `mpi1`–`mpi4`.
    pub axioms: Checks,
    pub e: Operator,
    pub g: Operator,
    pub passed: bool,
}

/// Evaluates both sides of a three-leg identity on `H⊗H⊗H`.
pub(crate) struct ThreeLeg<'a> {
    space: TensorSpace,
    w: &'a Operator,
    ws: Operator,
}

impl<'a> ThreeLeg<'a> {
    pub(crate) fn new(w: &'a Operator) -> Result<Self> {
        let n = two_leg_h_dim(w)?;
        Ok(Self {
            space: TensorSpace::h_power(n, 3),
            w,
            ws: w.adjoint(),
        })
    }

    /// Factors are written as `(legs, adjoint?)`.
    pub(crate) fn eval(&self, factors: &[([usize; 2], bool)]) -> Result<Operator> {
        let placed: Vec<(&Operator, &[usize])> = factors
            .iter()
            .map(|(legs, star)| (if *star { &self.ws } else { self.w }, &legs[..]))
            .collect();
        product_on(&self.space, &placed)
    }

    pub(crate) fn gap(&self, lhs: &[([usize; 2], bool)], rhs: &[([usize; 2], bool)]) -> Result<f64> {
        Ok(self.eval(lhs)?.rel_gap(&self.eval(rhs)?))
    }
}

const P12: [usize; 2] = [1, 2];
const P13: [usize; 2] = [1, 3];
const P23: [usize; 2] = [2, 3];

pub fn check_mpi_axioms(w: &Operator, tol: &Tolerances) -> Result<MpiVerdict> {
    let t = ThreeLeg::new(w)?;
    let partial_isometry = is_partial_isometry(w, tol);
    let mut axioms = Checks::new();
    axioms.push(
        "mpi1",
        t.gap(
            &[(P23, false), (P12, false), (P23, true)],
            &[(P12, false), (P13, false)],
        )?,
    );
    axioms.push(
        "mpi2",
        t.gap(
            &[(P12, true), (P23, false), (P12, false)],
            &[(P13, false), (P23, false)],
        )?,
    );
    axioms.push(
        "mpi3",
        t.gap(
            &[(P23, true), (P23, false), (P12, false)],
            &[(P12, false), (P23, true), (P23, false)],
        )?,
    );
    axioms.push(
        "mpi4",
        t.gap(
            &[(P12, false), (P12, true), (P23, false)],
            &[(P23, false), (P12, false), (P12, true)],
        )?,
    );
    let passed = partial_isometry.flag && axioms.all_pass(tol);
    let ws = w.adjoint();
    Ok(MpiVerdict {
        partial_isometry,
        axioms,
        e: &ws * w,
        g: w * &ws,
        passed,
    })
}

/// Residuals of `mpi5`–`mpi10`.
pub fn check_derived_identities(w: &Operator) -> Result<Checks> {
    let t = ThreeLeg::new(w)?;
    let mut out = Checks::new();
    out.push(
        "mpi5",
        t.gap(
            &[(P12, false), (P13, false), (P23, false)],
            &[(P23, false), (P12, false)],
        )?,
    );
    out.push(
        "mpi6",
        t.gap(
            &[(P12, true), (P12, false), (P13, false)],
            &[(P13, false), (P23, false), (P23, true)],
        )?,
    );
    out.push(
        "mpi7",
        t.gap(&[(P12, false), (P23, true)], &[(P23, true), (P12, false), (P13, false)])?,
    );
    out.push(
        "mpi8",
        t.gap(&[(P12, true), (P23, false)], &[(P13, false), (P23, false), (P12, true)])?,
    );
    out.push(
        "mpi9",
        t.gap(
            &[(P13, true), (P13, false), (P23, false)],
            &[(P23, false), (P12, true), (P12, false)],
        )?,
    );
    out.push(
        "mpi10",
        t.gap(
            &[(P12, false), (P13, false), (P13, true)],
            &[(P23, false), (P23, true), (P12, false)],
        )?,
    );
    Ok(out)
}

/// `E`, `G` projections and `WE = W`, `GW = W`.
pub fn projection_checks(w: &Operator) -> Checks {
    let ws = w.adjoint();
    let e = &ws * w;
    let g = w * &ws;
    let mut out = Checks::new();
    out.push("E_idempotent", (&e * &e).rel_gap(&e));
    out.push("E_selfadjoint", e.rel_gap(&e.adjoint()));
    out.push("G_idempotent", (&g * &g).rel_gap(&g));
    out.push("G_selfadjoint", g.rel_gap(&g.adjoint()));
    out.push("WE_eq_W", (w * &e).rel_gap(w));
    out.push("GW_eq_W", (&g * w).rel_gap(w));
    out
}

/// `Ŵ = ΣW*Σ`.
pub fn w_hat(w: &Operator) -> Result<Operator> {
    two_leg_h_dim(w)?;
    hat(w)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullnessVerdict {
    pub literal_right: bool,
    pub literal_left: bool,
    pub nondeg_a_range: bool,
    pub nondeg_a_kernel: bool,
    pub nondeg_ahat_range: bool,
    pub nondeg_ahat_kernel: bool,
    /// Rank of `ω ↦ (id⊗ω)(W)`, i.e. `dim A`.
    pub right_slice_rank: usize,
    /// Rank of `ω ↦ (ω⊗id)(W)`, i.e. `dim Â`.
    pub left_slice_rank: usize,
}

impl FullnessVerdict {
    /// Nondegenerate action of both `A` and `Â` in both senses.
    pub fn nondegenerate(&self) -> bool {
        self.nondeg_a_range && self.nondeg_a_kernel && self.nondeg_ahat_range && self.nondeg_ahat_kernel
    }
}

fn slice_map_matrix(slices: &[Operator]) -> CMat {
    let cols: Vec<_> = slices
        .iter()
        .map(|s| crate::CVec::from_column_slice(s.entries()))
        .collect();
    CMat::from_columns(&cols)
}

fn range_and_kernel(slices: &[Operator], n: usize, tol: &Tolerances) -> (bool, bool) {
    let mut side_by_side = CMat::zeros(n, n * slices.len());
    let mut stacked = CMat::zeros(n * slices.len(), n);
    for (k, s) in slices.iter().enumerate() {
        side_by_side.columns_mut(k * n, n).copy_from(s.matrix());
        stacked.rows_mut(k * n, n).copy_from(s.matrix());
    }
    (rank(&side_by_side, tol) == n, rank(&stacked.adjoint(), tol) == n)
}

pub fn assess_fullness(w: &Operator, tol: &Tolerances) -> Result<FullnessVerdict> {
    let n = two_leg_h_dim(w)?;
    let right = entry_slices(w, Side::Right)?;
    let left = entry_slices(w, Side::Left)?;
    let right_slice_rank = rank(&slice_map_matrix(&right), tol);
    let left_slice_rank = rank(&slice_map_matrix(&left), tol);
    let (nondeg_a_range, nondeg_a_kernel) = range_and_kernel(&right, n, tol);
    let (nondeg_ahat_range, nondeg_ahat_kernel) = range_and_kernel(&left, n, tol);
    Ok(FullnessVerdict {
        literal_right: right_slice_rank == n * n,
        literal_left: left_slice_rank == n * n,
        nondeg_a_range,
        nondeg_a_kernel,
        nondeg_ahat_range,
        nondeg_ahat_kernel,
        right_slice_rank,
        left_slice_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{flip, kron, LegSpec};
    use crate::C64;

    fn w_ex() -> Operator {
        let e = |i, j| Operator::matrix_unit(LegSpec::h(2), i, j);
        &kron(&e(1, 0), &e(0, 0)) + &kron(&e(1, 1), &e(1, 1))
    }

    fn z2() -> Operator {
        let mut m = CMat::zeros(4, 4);
        for g in 0..2 {
            for h in 0..2 {
                m[(g * 2 + (g + h) % 2, g * 2 + h)] = C64::new(1.0, 0.0);
            }
        }
        Operator::on_h(2, 2, m).unwrap()
    }

    #[test]
    fn partial_isometry_examples() {
        let tol = Tolerances::default();
        let p = is_partial_isometry(&w_ex(), &tol);
        assert!(p.flag && p.residual == 0.0);
        let d = Operator::new(
            TensorSpace::h_power(2, 1),
            CMat::from_diagonal(&crate::CVec::from_vec(vec![C64::new(0.5, 0.0), C64::new(1.0, 0.0)])),
        )
        .unwrap();
        assert!(!is_partial_isometry(&d, &tol).flag);
        assert!(is_partial_isometry(&flip(3, Flavor::H), &tol).flag);
    }

    #[test]
    fn example_is_multiplicative() {
        let tol = Tolerances::default();
        let v = check_mpi_axioms(&w_ex(), &tol).unwrap();
        assert!(v.passed);
        assert_eq!(v.axioms.max(), 0.0);
        assert_eq!(check_derived_identities(&w_ex()).unwrap().max(), 0.0);
        let e = |i, j| Operator::matrix_unit(LegSpec::h(2), i, j);
        assert_eq!(v.e, &kron(&e(0, 0), &e(0, 0)) + &kron(&e(1, 1), &e(1, 1)));
    }

    #[test]
    fn identity_and_flip() {
        let tol = Tolerances::default();
        let id = Operator::identity(TensorSpace::h_power(2, 2));
        assert!(check_mpi_axioms(&id, &tol).unwrap().passed);
        assert_eq!(check_derived_identities(&id).unwrap().max(), 0.0);
        let v = check_mpi_axioms(&flip(2, Flavor::H), &tol).unwrap();
        assert!(!v.passed);
        assert!(v.axioms.get("mpi1") > 0.1);
    }

    #[test]
    fn group_operator_satisfies_derived_identities() {
        assert_eq!(check_derived_identities(&z2()).unwrap().max(), 0.0);
    }

    #[test]
    fn wrong_structure_is_rejected() {
        let tol = Tolerances::default();
        let x = Operator::identity(TensorSpace::new(vec![LegSpec::hbar(2), LegSpec::h(2)]));
        assert!(matches!(check_mpi_axioms(&x, &tol), Err(Error::WrongStructure { .. })));
    }

    #[test]
    fn fullness_of_example() {
        let tol = Tolerances::default();
        let f = assess_fullness(&w_ex(), &tol).unwrap();
        assert!(!f.literal_right);
        assert!(!f.nondeg_a_range);
        assert!(f.nondeg_ahat_range);
        assert_eq!(f.right_slice_rank, 2);
    }

    #[test]
    fn fullness_of_trivial_cases() {
        let tol = Tolerances::default();
        let f = assess_fullness(&Operator::identity(TensorSpace::h_power(2, 2)), &tol).unwrap();
        assert!(!f.literal_right && !f.literal_left);
        assert!(f.nondegenerate());
        let one = assess_fullness(&Operator::identity(TensorSpace::h_power(1, 2)), &tol).unwrap();
        assert!(one.literal_right && one.literal_left && one.nondegenerate());
    }

    #[test]
    fn projections_of_example() {
        assert_eq!(projection_checks(&w_ex()).max(), 0.0);
    }
}
