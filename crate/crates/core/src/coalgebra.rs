//! Leg algebras, comultiplications and the canonical idempotent.

use crate::axioms::{two_leg_h_dim, w_hat};
use crate::check::Checks;
use crate::error::Result;
use crate::functional::{entry_slices, Side};
use crate::linalg::orthonormal_columns;
use crate::subspace::{Membership, OperatorSubspace};
use crate::tensor::{flip, product_on, Flavor, LegSpec, Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::CMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegSide {
    /// `(id⊗ω)(W)`
    A,
    /// `(ω⊗id)(W)`
    Ahat,
    /// `(id⊗ω)(W*)`
    Astar,
    /// `(ω⊗id)(W*)`
    Ahatstar,
}

#[derive(Clone, Debug)]
pub struct LegAlgebra {
    pub side: LegSide,
    pub space: OperatorSubspace,
    pub unital: Membership,
    pub star_closed: Membership,
    /// Largest residual of a product of two basis elements.
    pub product_residual: f64,
}

impl LegAlgebra {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Slices generating the chosen leg algebra, one per entry functional.
pub fn leg_generators(w: &Operator, side: LegSide) -> Result<Vec<Operator>> {
    two_leg_h_dim(w)?;
    match side {
        LegSide::A => entry_slices(w, Side::Right),
        LegSide::Ahat => entry_slices(w, Side::Left),
        LegSide::Astar => entry_slices(&w.adjoint(), Side::Right),
        LegSide::Ahatstar => entry_slices(&w.adjoint(), Side::Left),
    }
}

pub fn leg_algebra(w: &Operator, side: LegSide, tol: &Tolerances) -> Result<LegAlgebra> {
    let space = OperatorSubspace::span(&leg_generators(w, side)?, tol)?;
    let unit = space.unit_residual();
    let star = space.star_residual();
    let product_residual = space.product_residual();
    Ok(LegAlgebra {
        side,
        space,
        unital: Membership {
            flag: tol.passes(unit),
            residual: unit,
        },
        star_closed: Membership {
            flag: tol.passes(star),
            residual: star,
        },
        product_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComulSide {
    Primal,
    Dual,
}

/// `Δ(x) = W*(1⊗x)W` or `Δ̂(x) = ΣW(x⊗1)W*Σ`.
pub fn comul(w: &Operator, x: &Operator, side: ComulSide) -> Result<Operator> {
    let n = two_leg_h_dim(w)?;
    let space = TensorSpace::h_power(n, 2);
    let ws = w.adjoint();
    match side {
        ComulSide::Primal => product_on(&space, &[(&ws, &[1, 2]), (x, &[2]), (w, &[1, 2])]),
        ComulSide::Dual => {
            let s = flip(n, Flavor::H);
            product_on(
                &space,
                &[(&s, &[1, 2]), (w, &[1, 2]), (x, &[1]), (&ws, &[1, 2]), (&s, &[1, 2])],
            )
        }
    }
}

/// All matrix units of one `H(n)` leg.
pub fn matrix_units(n: usize) -> Vec<Operator> {
    (0..n * n)
        .map(|k| Operator::matrix_unit(LegSpec::h(n), k / n, k % n))
        .collect()
}

fn coassoc_gap(w: &Operator, x: &Operator) -> Result<f64> {
    let n = two_leg_h_dim(w)?;
    let space = TensorSpace::h_power(n, 3);
    let d = comul(w, x, ComulSide::Primal)?;
    let ws = w.adjoint();
    let lhs = product_on(&space, &[(&ws, &[1, 2]), (&d, &[2, 3]), (w, &[1, 2])])?;
    let rhs = product_on(&space, &[(&ws, &[2, 3]), (&d, &[1, 3]), (w, &[2, 3])])?;
    Ok(lhs.rel_gap(&rhs))
}

/// `(Δ⊗id)Δ = (id⊗Δ)Δ`, worst case over `sample`.
pub fn check_coassociativity(w: &Operator, sample: &[Operator]) -> Result<Checks> {
    let mut worst: f64 = 0.0;
    for x in sample {
        worst = worst.max(coassoc_gap(w, x)?);
    }
    let mut out = Checks::new();
    out.push("coassociativity", worst);
    Ok(out)
}

/// `E = Δ(1)`, the commuting legs of `E`, `E ∈ M(A⊗A)`, `Δ` a
/// `*`-homomorphism on `A`, and the commutation lemma.
pub fn check_canonical_idempotent(w: &Operator, tol: &Tolerances) -> Result<Checks> {
    let n = two_leg_h_dim(w)?;
    let h1 = TensorSpace::h_power(n, 1);
    let h3 = TensorSpace::h_power(n, 3);
    let ws = w.adjoint();
    let e = &ws * w;
    let g = w * &ws;
    let mut out = Checks::new();

    let d1 = comul(w, &Operator::identity(h1.clone()), ComulSide::Primal)?;
    out.push("E_eq_Delta1", e.rel_gap(&d1));

    let e_first = product_on(&h3, &[(&e, &[1, 2]), (&e, &[2, 3])])?;
    let e_second = product_on(&h3, &[(&e, &[2, 3]), (&e, &[1, 2])])?;
    out.push("E_legs_commute", e_first.rel_gap(&e_second));
    let via_w = product_on(&h3, &[(&ws, &[1, 2]), (&ws, &[2, 3]), (w, &[2, 3]), (w, &[1, 2])])?;
    out.push("E_legs_product", e_first.rel_gap(&via_w));

    let a = leg_algebra(w, LegSide::A, tol)?;
    let basis = a.space.basis();
    let aa = a.space.tensor(&a.space);
    let mut mult: f64 = 0.0;
    let mut hom: f64 = 0.0;
    let mut star: f64 = 0.0;
    let deltas: Vec<Operator> = basis
        .iter()
        .map(|x| comul(w, x, ComulSide::Primal))
        .collect::<Result<_>>()?;
    for (x, dx) in basis.iter().zip(&deltas) {
        let dxs = comul(w, &x.adjoint(), ComulSide::Primal)?;
        star = star.max(dxs.rel_gap(&dx.adjoint()));
        for (y, dy) in basis.iter().zip(&deltas) {
            let xy = x.kron(y);
            mult = mult.max(aa.residual(&(&e * &xy))?);
            mult = mult.max(aa.residual(&(&xy * &e))?);
            let dxy = comul(w, &(x * y), ComulSide::Primal)?;
            hom = hom.max(dxy.rel_gap(&(dx * dy)));
        }
    }
    out.push("E_multiplier", mult);
    out.push("Delta_homomorphism", hom);
    out.push("Delta_star", star);

    let mut lemma: f64 = 0.0;
    for x in &basis {
        let one_x = Operator::identity(h1.clone()).kron(x);
        lemma = lemma.max((&one_x * &g).rel_gap(&(&g * &one_x)));
    }
    let ahat = leg_algebra(w, LegSide::Ahat, tol)?;
    for y in ahat.space.basis() {
        let y_one = y.kron(&Operator::identity(h1.clone()));
        lemma = lemma.max((&y_one * &e).rel_gap(&(&e * &y_one)));
    }
    out.push("commutation_lemma", lemma);
    Ok(out)
}

/// Largest distance of a basis vector of either column space from the other.
fn column_space_gap(a: &CMat, b: &CMat) -> f64 {
    let one_way = |x: &CMat, y: &CMat| {
        let p = y * y.ad_mul(x);
        (0..x.ncols())
            .map(|k| (x.column(k) - p.column(k)).norm())
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[derive(Clone, Debug)]
pub struct RangeDensity {
    pub checks: Checks,
    pub dim_a: usize,
    /// Dimensions of the four density spans.
    pub density_dims: [usize; 4],
    /// `dim span{Δ(a)(b⊗c)}` and `dim span{E(b⊗c)}`.
    pub range_dims: (usize, usize),
}

/// `Δ(A)(A⊗A) = E(A⊗A)`, the four density spans, and the four multiplier
/// memberships.
pub fn check_delta_range_and_density(w: &Operator, tol: &Tolerances) -> Result<RangeDensity> {
    let n = two_leg_h_dim(w)?;
    let one = Operator::identity(TensorSpace::h_power(n, 1));
    let e = &w.adjoint() * w;
    let a = leg_algebra(w, LegSide::A, tol)?;
    let basis = a.space.basis();
    let deltas: Vec<Operator> = basis
        .iter()
        .map(|x| comul(w, x, ComulSide::Primal))
        .collect::<Result<_>>()?;
    let aa = a.space.tensor(&a.space);
    let mut checks = Checks::new();

    let mut delta_range = Vec::new();
    let mut e_range = Vec::new();
    for b in &basis {
        for c in &basis {
            let bc = b.kron(c);
            e_range.push(&e * &bc);
            for da in &deltas {
                delta_range.push(da * &bc);
            }
        }
    }
    let (range_dims, range_residual) = if basis.is_empty() {
        ((0, 0), 0.0)
    } else {
        let (c1, out1) = aa.coords_family(&delta_range)?;
        let (c2, out2) = aa.coords_family(&e_range)?;
        let outside = out1.max(out2);
        let s1 = orthonormal_columns(&c1, tol);
        let s2 = orthonormal_columns(&c2, tol);
        ((s1.ncols(), s2.ncols()), outside.max(column_space_gap(&s1, &s2)))
    };
    checks.push("Delta_range", range_residual);

    let mut fams: [Vec<Operator>; 4] = Default::default();
    let mut products = Vec::new();
    for (x, dx) in basis.iter().zip(&deltas) {
        for (y, dy) in basis.iter().zip(&deltas) {
            let x1 = x.kron(&one);
            let one_y = one.kron(y);
            let p = [&x1 * dy, dx * &one_y, dy * &x1, &one_y * dx];
            fams[0].extend(entry_slices(&p[0], Side::Left)?);
            fams[1].extend(entry_slices(&p[1], Side::Right)?);
            fams[2].extend(entry_slices(&p[2], Side::Left)?);
            fams[3].extend(entry_slices(&p[3], Side::Right)?);
            products.extend(p);
        }
    }
    checks.push("Delta_multiplier", aa.max_residual(&products)?);
    let mut density_dims = [0; 4];
    for (k, fam) in fams.iter().enumerate() {
        let residual = if fam.is_empty() {
            0.0
        } else {
            let s = OperatorSubspace::span(fam, tol)?;
            density_dims[k] = s.dim();
            s.equality_residual(&a.space)?
        };
        checks.push(format!("density{}", k + 1), residual);
    }
    Ok(RangeDensity {
        checks,
        dim_a: a.dim(),
        density_dims,
        range_dims,
    })
}

#[derive(Clone, Debug)]
pub struct CoalgebraReport {
    pub a: LegAlgebra,
    pub ahat: LegAlgebra,
    pub checks: Checks,
    pub range_density: RangeDensity,
    /// The same statements for `Ŵ`, ids prefixed with `dual.`.
    pub dual_checks: Checks,
    pub dual_range_density: RangeDensity,
    /// `Â* = Â`; reported, with no expected value.
    pub ahat_star_closed: Membership,
}

fn primal_checks(w: &Operator, tol: &Tolerances) -> Result<(Checks, RangeDensity)> {
    let sample = leg_algebra(w, LegSide::A, tol)?.space.basis();
    let mut checks = check_coassociativity(w, &sample)?;
    checks.extend(check_canonical_idempotent(w, tol)?);
    let a = leg_algebra(w, LegSide::A, tol)?;
    checks.push("A_product_closed", a.product_residual);
    let rd = check_delta_range_and_density(w, tol)?;
    checks.extend(rd.checks.clone());
    Ok((checks, rd))
}

pub fn check_coalgebra(w: &Operator, tol: &Tolerances) -> Result<CoalgebraReport> {
    let a = leg_algebra(w, LegSide::A, tol)?;
    let ahat = leg_algebra(w, LegSide::Ahat, tol)?;
    let (mut checks, range_density) = primal_checks(w, tol)?;
    checks.push("Ahat_product_closed", ahat.product_residual);
    let d1 = comul(
        w,
        &Operator::identity(TensorSpace::h_power(two_leg_h_dim(w)?, 1)),
        ComulSide::Dual,
    )?;
    let wh = w_hat(w)?;
    let g = w * &w.adjoint();
    let s = flip(two_leg_h_dim(w)?, Flavor::H);
    checks.push("Ehat_eq_Deltahat1", (&(&s * &g) * &s).rel_gap(&d1));
    let (dual, dual_range_density) = primal_checks(&wh, tol)?;
    let mut dual_checks = Checks::new();
    for c in dual.iter() {
        dual_checks.push(format!("dual.{}", c.id), c.residual);
    }
    let ahat_star_closed = ahat.star_closed;
    Ok(CoalgebraReport {
        a,
        ahat,
        checks,
        range_density,
        dual_checks,
        dual_range_density,
        ahat_star_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron;
    use crate::{CMat, C64};

    fn e(i: usize, j: usize) -> Operator {
        Operator::matrix_unit(LegSpec::h(2), i, j)
    }

    fn w_ex() -> Operator {
        &kron(&e(1, 0), &e(0, 0)) + &kron(&e(1, 1), &e(1, 1))
    }

    fn zn(n: usize) -> Operator {
        let mut m = CMat::zeros(n * n, n * n);
        for g in 0..n {
            for h in 0..n {
                m[(g * n + (g + h) % n, g * n + h)] = C64::new(1.0, 0.0);
            }
        }
        Operator::on_h(n, 2, m).unwrap()
    }

    #[test]
    fn example_leg_algebras() {
        let tol = Tolerances::default();
        let a = leg_algebra(&w_ex(), LegSide::A, &tol).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(!a.unital.flag);
        let target = OperatorSubspace::span(&[e(1, 0), e(1, 1)], &tol).unwrap();
        assert!(a.space.equality_residual(&target).unwrap() < 1e-14);
        let ah = leg_algebra(&w_ex(), LegSide::Ahat, &tol).unwrap();
        assert!(ah.unital.flag);
        let target = OperatorSubspace::span(&[e(0, 0), e(1, 1)], &tol).unwrap();
        assert!(ah.space.equality_residual(&target).unwrap() < 1e-14);
        let id = Operator::identity(TensorSpace::h_power(2, 2));
        assert_eq!(leg_algebra(&id, LegSide::A, &tol).unwrap().dim(), 1);
    }

    #[test]
    fn comul_examples() {
        let one = Operator::identity(TensorSpace::h_power(2, 1));
        let d = comul(&w_ex(), &one, ComulSide::Primal).unwrap();
        assert_eq!(d, &kron(&e(0, 0), &e(0, 0)) + &kron(&e(1, 1), &e(1, 1)));
        let dd = comul(&w_ex(), &one, ComulSide::Dual).unwrap();
        assert_eq!(dd, kron(&one, &e(1, 1)));
        let id = Operator::identity(TensorSpace::h_power(2, 2));
        let x = &e(0, 1) + &e(1, 1).scale(C64::new(0.0, 2.0));
        assert_eq!(comul(&id, &x, ComulSide::Primal).unwrap(), kron(&one, &x));
    }

    #[test]
    fn coassociativity_examples() {
        assert_eq!(check_coassociativity(&w_ex(), &matrix_units(2)).unwrap().max(), 0.0);
        assert!(check_coassociativity(&zn(3), &matrix_units(3)).unwrap().max() < 1e-12);
    }

    #[test]
    fn example_canonical_idempotent() {
        let tol = Tolerances::default();
        assert_eq!(check_canonical_idempotent(&w_ex(), &tol).unwrap().max(), 0.0);
    }

    #[test]
    fn example_range_and_density() {
        let tol = Tolerances::default();
        let rd = check_delta_range_and_density(&w_ex(), &tol).unwrap();
        assert_eq!(rd.checks.get("Delta_range"), 0.0);
        assert_eq!(rd.checks.get("Delta_multiplier"), 0.0);
        assert_eq!(rd.range_dims, (4, 4));
        // A·H = span{e₂}, so right multiplication by A loses a direction.
        assert_eq!(rd.density_dims, [2, 1, 1, 2]);
        assert!(rd.checks.get("density2") > 0.5);
        let rd = check_delta_range_and_density(&zn(2), &tol).unwrap();
        assert_eq!(rd.density_dims, [2, 2, 2, 2]);
        let id = Operator::identity(TensorSpace::h_power(2, 2));
        assert_eq!(
            check_delta_range_and_density(&id, &tol).unwrap().density_dims,
            [1, 1, 1, 1]
        );
    }

    #[test]
    fn dual_comul_is_primal_for_hat() {
        let wh = w_hat(&w_ex()).unwrap();
        for x in matrix_units(2) {
            assert_eq!(
                comul(&w_ex(), &x, ComulSide::Dual).unwrap(),
                comul(&wh, &x, ComulSide::Primal).unwrap()
            );
        }
    }
}
