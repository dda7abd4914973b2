//! Base algebras, the counit-like map `κ`, the distinguished weight and the
//! anti-isomorphism `R̃`.

use crate::axioms::{two_leg_h_dim, w_hat};
use crate::check::Checks;
use crate::coalgebra::{leg_algebra, LegSide};
use crate::error::{Error, Result};
use crate::functional::{entry_slices, slice, Functional, Side};
use crate::linalg::{hermitian_basis, hermitian_eigen, inverse_condition, orthonormal_columns, realify, LsqSolver};
use crate::manage::T_SAMPLES;
use crate::subspace::{Membership, OperatorSubspace};
use crate::tensor::{kron, LegSpec, Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::{CMat, CVec, C64};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn e_of(w: &Operator) -> Operator {
    &w.adjoint() * w
}

fn g_of(w: &Operator) -> Operator {
    w * &w.adjoint()
}

fn membership(residual: f64, tol: &Tolerances) -> Membership {
    Membership {
        flag: tol.passes(residual),
        residual,
    }
}

#[derive(Clone, Debug)]
pub struct BaseSpans {
    pub n: OperatorSubspace,
    pub l: OperatorSubspace,
    pub nhat: OperatorSubspace,
    pub lhat: OperatorSubspace,
    pub commutation_residual: f64,
    pub l_equals_lhat: Membership,
    pub e_in_n_tensor_l: Membership,
    /// Star and product closure of each span, plus the three items above.
    pub checks: Checks,
}

pub fn base_spans(w: &Operator, tol: &Tolerances) -> Result<BaseSpans> {
    two_leg_h_dim(w)?;
    let e = e_of(w);
    let g = g_of(w);
    let n = OperatorSubspace::span(&entry_slices(&e, Side::Right)?, tol)?;
    let l = OperatorSubspace::span(&entry_slices(&e, Side::Left)?, tol)?;
    let nhat = OperatorSubspace::span(&entry_slices(&g, Side::Left)?, tol)?;
    let lhat = OperatorSubspace::span(&entry_slices(&g, Side::Right)?, tol)?;

    let mut commutation: f64 = 0.0;
    for b in n.basis() {
        for c in l.basis() {
            commutation = commutation.max((&b * &c).rel_gap(&(&c * &b)));
        }
    }
    let l_lhat = l.equality_residual(&lhat)?;
    let e_nl = n.tensor(&l).residual(&e)?;

    let mut checks = Checks::new();
    for (name, s) in [("N", &n), ("L", &l), ("Nhat", &nhat), ("Lhat", &lhat)] {
        checks.push(format!("{name}_star_closed"), s.star_residual());
        checks.push(format!("{name}_product_closed"), s.product_residual());
    }
    checks.push("N_L_commute", commutation);
    checks.push("L_eq_Lhat", l_lhat);
    checks.push("E_in_N_tensor_L", e_nl);

    Ok(BaseSpans {
        n,
        l,
        nhat,
        lhat,
        commutation_residual: commutation,
        l_equals_lhat: membership(l_lhat, tol),
        e_in_n_tensor_l: membership(e_nl, tol),
        checks,
    })
}

/// The linear system `x ↦ E(1⊗x)` factored once for repeated solves.
pub struct KappaSystem {
    e: Operator,
    n: usize,
    solver: LsqSolver,
}

impl KappaSystem {
    pub fn new(w: &Operator, tol: &Tolerances) -> Result<Self> {
        let n = two_leg_h_dim(w)?;
        let e = e_of(w);
        let leg = TensorSpace::h_power(n, 1);
        let one = Operator::identity(leg.clone());
        let cols: Vec<CVec> = (0..n * n)
            .map(|k| {
                let x = Operator::matrix_unit(LegSpec::h(n), k % n, k / n);
                CVec::from_column_slice((&e * &one.kron(&x)).entries())
            })
            .collect();
        let map = CMat::from_columns(&cols);
        Ok(Self {
            solver: LsqSolver::new(&map, tol),
            e,
            n,
        })
    }

    pub fn nullity(&self) -> usize {
        self.solver.nullity()
    }

    /// Minimum-norm `x` with `E(1⊗x) = E(b⊗1)` and the residual relative to
    /// `‖E(b⊗1)‖`.
    pub fn solve(&self, b: &Operator) -> Result<(Operator, f64)> {
        let leg = TensorSpace::h_power(self.n, 1);
        if b.space() != &leg {
            return Err(Error::SpaceMismatch {
                expected: leg,
                found: b.space().clone(),
            });
        }
        let one = Operator::identity(leg.clone());
        let target = &self.e * &b.kron(&one);
        let sol = self.solver.solve(&CVec::from_column_slice(target.entries()));
        let x = Operator::new(leg, CMat::from_column_slice(self.n, self.n, sol.solution.as_slice()))?;
        Ok((x, sol.residual / target.frob_norm().max(1.0)))
    }
}

pub fn kappa_solve(w: &Operator, b: &Operator, tol: &Tolerances) -> Result<(Operator, f64)> {
    KappaSystem::new(w, tol)?.solve(b)
}

#[derive(Clone, Debug)]
pub struct KappaMap {
    pub domain_basis: Vec<Operator>,
    pub values: Vec<Operator>,
    pub residuals: Vec<f64>,
    pub nullity: usize,
    /// `κ(b₁b₂)` against `κ(b₂)κ(b₁)` over basis pairs whose solves all pass.
    pub anti_multiplicativity: f64,
}

impl KappaMap {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn kappa_map(w: &Operator, n_span: &OperatorSubspace, tol: &Tolerances) -> Result<KappaMap> {
    let sys = KappaSystem::new(w, tol)?;
    let domain_basis = n_span.basis();
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    for b in &domain_basis {
        let (x, r) = sys.solve(b)?;
        values.push(x);
        residuals.push(r);
    }
    let mut anti: f64 = 0.0;
    for (i, b1) in domain_basis.iter().enumerate() {
        for (j, b2) in domain_basis.iter().enumerate() {
            if !tol.passes(residuals[i]) || !tol.passes(residuals[j]) {
                continue;
            }
            let (k12, r) = sys.solve(&(b1 * b2))?;
            if tol.passes(r) {
                anti = anti.max(k12.rel_gap(&(&values[j] * &values[i])));
            }
        }
    }
    Ok(KappaMap {
        domain_basis,
        values,
        residuals,
        nullity: sys.nullity(),
        anti_multiplicativity: anti,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseSide {
    N,
    Nhat,
}

/// A positive functional `x ↦ tr(D·x)` on a base algebra.
#[derive(Clone, Debug)]
pub struct WeightData {
    pub algebra: OperatorSubspace,
    pub density: Operator,
    /// Smallest eigenvalue of `D` on the range of the algebra's unit.
    pub min_eigenvalue: f64,
    pub solution_space_dim: usize,
    /// Residual of the defining normalization.
    pub residual: f64,
    unit: CMat,
}

impl WeightData {
    pub fn valid(&self, tol: &Tolerances) -> bool {
        tol.passes(self.residual) && self.min_eigenvalue > tol.pd
    }

    pub fn unit(&self) -> &CMat {
        &self.unit
    }

    pub fn eval(&self, x: &Operator) -> C64 {
        (self.density.matrix() * x.matrix()).trace()
    }

    /// `D^z`, extended by the identity off the unit's range.
    pub fn power(&self, z: C64, tol: &Tolerances) -> Result<CMat> {
        let d = self.unit.nrows();
        let shifted = self.density.matrix() + CMat::identity(d, d) - &self.unit;
        crate::linalg::pos_power_matrix(&shifted, z, tol)
    }

    /// `σ_z(x) = D^{iz}·x·D^{−iz}`.
    pub fn sigma(&self, z: C64, x: &Operator, tol: &Tolerances) -> Result<Operator> {
        let i = C64::new(0.0, 1.0);
        let m = self.power(i * z, tol)? * x.matrix() * self.power(-i * z, tol)?;
        Operator::new(x.space().clone(), m)
    }
}

pub fn modular_conjugate(weight: &WeightData, z: C64, x: &Operator, tol: &Tolerances) -> Result<Operator> {
    weight.sigma(z, x, tol)
}

fn min_eigenvalue_on(d: &CMat, unit: &CMat, tol: &Tolerances) -> Result<f64> {
    let u = orthonormal_columns(unit, tol);
    if u.ncols() == 0 {
        return Ok(f64::INFINITY);
    }
    let (values, _) = hermitian_eigen(&(u.adjoint() * d * &u), tol)?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

/// Real-parametrized least squares: `Σ t_k · image(H_k) = rhs` with `H_k`
/// a Hermitian basis of `algebra`.
fn solve_hermitian(
    algebra: &OperatorSubspace,
    image: impl Fn(&Operator) -> Result<CVec>,
    rhs: &CVec,
    tol: &Tolerances,
) -> Result<(Operator, f64, usize)> {
    let herm = hermitian_basis(algebra, tol);
    if herm.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let cols = herm.iter().map(&image).collect::<Result<Vec<_>>>()?;
    let map = realify(&CMat::from_columns(&cols));
    let rhs_r = realify(&CMat::from_column_slice(rhs.len(), 1, rhs.as_slice()));
    let solver = LsqSolver::new(&map, tol);
    let sol = solver.solve(&rhs_r.column(0).into_owned());
    let mut d = Operator::zeros(algebra.space().clone());
    for (h, t) in herm.iter().zip(sol.solution.iter()) {
        d = &d + &h.scale_re(t.re);
    }
    let residual = sol.residual / rhs.norm().max(1.0);
    Ok((d, residual, solver.nullity()))
}

/// Density `D` in `N` with `(ν⊗id)(E) = 1`, or in `N̂` with
/// `(ν̂⊗id)(Ê) = 1`.
pub fn find_distinguished_weight(w: &Operator, base: BaseSide, tol: &Tolerances) -> Result<WeightData> {
    let w = match base {
        BaseSide::N => w.clone(),
        BaseSide::Nhat => w_hat(w)?,
    };
    let n = two_leg_h_dim(&w)?;
    let e = e_of(&w);
    let algebra = OperatorSubspace::span(&entry_slices(&e, Side::Right)?, tol)?;
    let leg = LegSpec::h(n);
    let one = CMat::identity(n, n);
    let (density, residual, nullity) = solve_hermitian(
        &algebra,
        |h| {
            let f = Functional::new(leg, h.matrix().clone())?;
            Ok(CVec::from_column_slice(slice(&e, Side::Left, &f)?.entries()))
        },
        &CVec::from_column_slice(one.as_slice()),
        tol,
    )?;
    let unit = algebra.range_projection(tol);
    let min_eigenvalue = min_eigenvalue_on(density.matrix(), &unit, tol)?;
    Ok(WeightData {
        algebra,
        density,
        min_eigenvalue,
        solution_space_dim: nullity,
        residual,
        unit,
    })
}

/// `γ_N(b) = (ν⊗id)(E(b⊗1))`.
pub fn gamma_n(w: &Operator, nu: &WeightData, b: &Operator) -> Result<Operator> {
    let n = two_leg_h_dim(w)?;
    let e = e_of(w);
    let one = Operator::identity(TensorSpace::h_power(n, 1));
    let f = Functional::new(LegSpec::h(n), nu.density.matrix().clone())?;
    slice(&(&e * &b.kron(&one)), Side::Left, &f)
}

/// A linear map between two spans, stored in their orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct BaseAntiIso {
    pub domain: OperatorSubspace,
    pub codomain: OperatorSubspace,
    pub matrix: CMat,
    pub inverse: CMat,
    /// Largest distance of an image of a domain basis element from the
    /// codomain.
    pub image_residual: f64,
}

impl BaseAntiIso {
    fn from_images(
        domain: &OperatorSubspace,
        codomain: &OperatorSubspace,
        images: &[Operator],
        tol: &Tolerances,
    ) -> Result<Self> {
        if domain.dim() != codomain.dim() {
            return Err(Error::NotInvertible { sigma_min: 0.0 });
        }
        let mut image_residual: f64 = 0.0;
        let mut cols = Vec::new();
        for x in images {
            image_residual = image_residual.max(codomain.residual(x)?);
            cols.push(codomain.coords(x)?);
        }
        let matrix = if cols.is_empty() {
            CMat::zeros(0, 0)
        } else {
            CMat::from_columns(&cols)
        };
        let cond = inverse_condition(&matrix);
        if !matrix.is_empty() && (cond.is_nan() || cond <= tol.rank) {
            return Err(Error::NotInvertible { sigma_min: cond });
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(Error::NotInvertible { sigma_min: cond })?;
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix,
            inverse,
            image_residual,
        })
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        Ok(self.codomain.from_coords(&(&self.matrix * self.domain.coords(x)?)))
    }

    pub fn apply_inverse(&self, y: &Operator) -> Result<Operator> {
        Ok(self.domain.from_coords(&(&self.inverse * self.codomain.coords(y)?)))
    }

    /// `R(xy) = R(y)R(x)` over domain basis pairs.
    pub fn anti_multiplicativity(&self) -> Result<f64> {
        let basis = self.domain.basis();
        let images = basis.iter().map(|b| self.apply(b)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                worst = worst.max(self.apply(&(x * y))?.rel_gap(&(&images[j] * &images[i])));
            }
        }
        Ok(worst)
    }

    /// `R(x*) = R(x)*` over the domain basis.
    pub fn star_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for b in self.domain.basis() {
            worst = worst.max(self.apply(&b.adjoint())?.rel_gap(&self.apply(&b)?.adjoint()));
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug)]
pub struct GammaData {
    /// `(b, γ_N(b))` over the `N` basis.
    pub gamma_n: Vec<(Operator, Operator)>,
    pub rtilde: BaseAntiIso,
    pub mu: WeightData,
    /// `(c, γ_L(c))` over the `L` basis.
    pub gamma_l: Vec<(Operator, Operator)>,
    /// `polar`, `Rtilde_image`, `Rtilde_anti_multiplicative`, `Rtilde_star`
    /// and `mu_consistency`.
    pub checks: Checks,
}

/// `R̃ = γ_N∘σ^ν_{sign·i/2}`; the documented convention is `sign = −1`.
pub fn rtilde_with_sign(
    w: &Operator,
    nu: &WeightData,
    l: &OperatorSubspace,
    sign: f64,
    tol: &Tolerances,
) -> Result<BaseAntiIso> {
    let half = C64::new(0.0, 0.5 * sign);
    let images = nu
        .algebra
        .basis()
        .iter()
        .map(|b| gamma_n(w, nu, &nu.sigma(half, b, tol)?))
        .collect::<Result<Vec<_>>>()?;
    BaseAntiIso::from_images(&nu.algebra, l, &images, tol)
}

pub fn gamma_and_rtilde(w: &Operator, nu: &WeightData, tol: &Tolerances) -> Result<GammaData> {
    let e = e_of(w);
    let l = OperatorSubspace::span(&entry_slices(&e, Side::Left)?, tol)?;
    let rtilde = rtilde_with_sign(w, nu, &l, -1.0, tol)?;
    let basis = nu.algebra.basis();

    let mut checks = Checks::new();
    let mut gamma = Vec::new();
    let mut polar: f64 = 0.0;
    for b in &basis {
        let g = gamma_n(w, nu, b)?;
        let via = rtilde.apply(&nu.sigma(C64::new(0.0, 0.5), b, tol)?)?;
        polar = polar.max(g.rel_gap(&via));
        gamma.push((b.clone(), g));
    }
    checks.push("polar", polar);
    checks.push("Rtilde_image", rtilde.image_residual);
    checks.push("Rtilde_anti_multiplicative", rtilde.anti_multiplicativity()?);
    checks.push("Rtilde_star", rtilde.star_residual()?);

    let images = basis.iter().map(|b| rtilde.apply(b)).collect::<Result<Vec<_>>>()?;
    let rhs = CVec::from_iterator(basis.len(), basis.iter().map(|b| nu.eval(b)));
    let (density, residual, nullity) = solve_hermitian(
        &l,
        |h| {
            Ok(CVec::from_iterator(
                images.len(),
                images.iter().map(|r| (h.matrix() * r.matrix()).trace()),
            ))
        },
        &rhs,
        tol,
    )?;
    let unit = l.range_projection(tol);
    let min_eigenvalue = min_eigenvalue_on(density.matrix(), &unit, tol)?;
    let mu = WeightData {
        algebra: l.clone(),
        density,
        min_eigenvalue,
        solution_space_dim: nullity,
        residual,
        unit,
    };
    let mut consistency: f64 = 0.0;
    for (b, r) in basis.iter().zip(&images) {
        consistency = consistency.max((mu.eval(r) - nu.eval(b)).norm());
    }
    checks.push("mu_consistency", consistency);

    let mut gamma_l = Vec::new();
    for c in l.basis() {
        let g = rtilde.apply_inverse(&mu.sigma(C64::new(0.0, -0.5), &c, tol)?)?;
        gamma_l.push((c, g));
    }
    Ok(GammaData {
        gamma_n: gamma,
        rtilde,
        mu,
        gamma_l,
        checks,
    })
}

/// Anti-multiplicativity plus star residual of `R̃` under the documented
/// modular sign and under the opposite one.
#[derive(Clone, Copy, Debug)]
pub struct SignCalibration {
    pub documented: f64,
    pub opposite: f64,
}

pub fn calibrate_modular_sign(w: &Operator, nu: &WeightData, tol: &Tolerances) -> Result<SignCalibration> {
    let e = e_of(w);
    let l = OperatorSubspace::span(&entry_slices(&e, Side::Left)?, tol)?;
    let score = |sign: f64| -> Result<f64> {
        let r = rtilde_with_sign(w, nu, &l, sign, tol)?;
        Ok(r.anti_multiplicativity()?.max(r.star_residual()?))
    };
    Ok(SignCalibration {
        documented: score(-1.0)?,
        opposite: score(1.0)?,
    })
}

/// A manageability pair for the checks involving `R_κ(b) = Q⁻¹κ(b)Q`.
#[derive(Clone, Copy, Debug)]
pub struct ManagePair<'a> {
    pub q: &'a Operator,
    pub wtilde: &'a Operator,
}

pub fn check_separability_triple(
    w: &Operator,
    nu: &WeightData,
    gd: &GammaData,
    pair: Option<ManagePair<'_>>,
    tol: &Tolerances,
) -> Result<Checks> {
    let n = two_leg_h_dim(w)?;
    let leg = LegSpec::h(n);
    let e = e_of(w);
    let one = Operator::identity(TensorSpace::h_power(n, 1));
    let mut out = Checks::new();

    let f_nu = Functional::new(leg, nu.density.matrix().clone())?;
    out.push("nu_normalization", slice(&e, Side::Left, &f_nu)?.rel_gap(&one));
    let f_mu = Functional::new(leg, gd.mu.density.matrix().clone())?;
    out.push("mu_normalization", slice(&e, Side::Right, &f_mu)?.rel_gap(&one));

    let mut rel: f64 = 0.0;
    for (c, g) in &gd.gamma_l {
        rel = rel.max((&one.kron(c) * &e).rel_gap(&(&g.kron(&one) * &e)));
    }
    out.push("gamma_L_relation", rel);

    let basis: Vec<&Operator> = gd.gamma_n.iter().map(|(b, _)| b).collect();
    let mut anti: f64 = 0.0;
    for (i, b1) in basis.iter().enumerate() {
        for (j, b2) in basis.iter().enumerate() {
            let g12 = gamma_n(w, nu, &(*b1 * *b2))?;
            anti = anti.max(g12.rel_gap(&(&gd.gamma_n[j].1 * &gd.gamma_n[i].1)));
        }
    }
    out.push("gamma_N_anti_multiplicative", anti);

    let sys = KappaSystem::new(w, tol)?;
    let mut kap: f64 = 0.0;
    for (b, g) in &gd.gamma_n {
        let (k, r) = sys.solve(b)?;
        if tol.passes(r) {
            kap = kap.max(g.rel_gap(&k));
        }
    }
    out.push("gamma_N_eq_kappa", kap);

    let mut inter: f64 = 0.0;
    for &t in &T_SAMPLES {
        for (c, _) in &gd.gamma_l {
            let lhs = gd.mu.sigma(re(t), c, tol)?;
            let back = gd.rtilde.apply_inverse(c)?;
            let rhs = gd.rtilde.apply(&nu.sigma(re(-t), &back, tol)?)?;
            inter = inter.max(lhs.rel_gap(&rhs));
        }
    }
    out.push("sigma_mu_intertwining", inter);

    if let Some(pair) = pair {
        out.extend(r_kappa_checks(w, pair, &sys, &basis, tol)?);
    }
    Ok(out)
}

/// The `R_κ` statements on their own, over the `N` basis carried by `gd`.
pub fn check_r_kappa(w: &Operator, gd: &GammaData, pair: ManagePair<'_>, tol: &Tolerances) -> Result<Checks> {
    let sys = KappaSystem::new(w, tol)?;
    let basis: Vec<&Operator> = gd.gamma_n.iter().map(|(b, _)| b).collect();
    r_kappa_checks(w, pair, &sys, &basis, tol)
}

fn r_kappa_checks(
    w: &Operator,
    pair: ManagePair<'_>,
    sys: &KappaSystem,
    basis: &[&Operator],
    tol: &Tolerances,
) -> Result<Checks> {
    let n = two_leg_h_dim(w)?;
    let leg = LegSpec::h(n);
    let q = pair.q.matrix();
    let qi = crate::linalg::pos_power_matrix(q, re(-1.0), tol)?;
    let space = TensorSpace::h_power(n, 1);
    let conj = |x: &Operator, a: &CMat, b: &CMat| Operator::new(space.clone(), a * x.matrix() * b);
    let r_kappa = |b: &Operator| -> Result<Operator> {
        let (k, _) = sys.solve(b)?;
        conj(&k, &qi, q)
    };
    let e = e_of(w);
    let tt = pair.wtilde * &pair.wtilde.adjoint();
    let mut out = Checks::new();

    let mut sl: f64 = 0.0;
    for om in Functional::entry_basis(leg) {
        let lhs = r_kappa(&slice(&e, Side::Right, &om)?)?;
        let rhs = slice(&tt, Side::Left, &om.transpose())?;
        sl = sl.max(lhs.rel_gap(&rhs));
    }
    out.push("Rkappa_slice", sl);

    let (mut anti, mut star, mut t_r, mut r_t): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for b1 in basis {
        let r1 = r_kappa(b1)?;
        star = star.max(r_kappa(&b1.adjoint())?.rel_gap(&r1.adjoint()));
        let (k1, _) = sys.solve(b1)?;
        t_r = t_r.max(conj(&r1, q, &qi)?.rel_gap(&k1));
        r_t = r_t.max(r_kappa(&conj(b1, q, &qi)?)?.rel_gap(&k1));
        for b2 in basis {
            let r2 = r_kappa(b2)?;
            anti = anti.max(r_kappa(&(*b1 * *b2))?.rel_gap(&(&r2 * &r1)));
        }
    }
    out.push("Rkappa_anti_multiplicative", anti);
    out.push("Rkappa_star", star);
    out.push("kappa_eq_T_Rkappa", t_r);
    out.push("kappa_eq_Rkappa_T", r_t);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CStarBases {
    pub b: OperatorSubspace,
    pub c: OperatorSubspace,
    pub bhat: OperatorSubspace,
    pub chat: OperatorSubspace,
    /// `B_eq_N`, `C_eq_L`, the eight multiplier memberships and
    /// `E_multiplier_BC`.
    pub checks: Checks,
}

/// Slices over the vector functionals `ω_{e_a + e_b, e_a + i·e_b}`, an
/// alternative spanning family to the entry functionals.
fn vector_slices(x: &Operator, side: Side, n: usize) -> Result<Vec<Operator>> {
    let leg = LegSpec::h(n);
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut u = CVec::zeros(n);
            let mut v = CVec::zeros(n);
            u[a] += re(1.0);
            u[b] += re(1.0);
            v[a] += re(1.0);
            v[b] += C64::new(0.0, 1.0);
            out.push(slice(x, side, &Functional::vector(leg, &u, &v)?)?);
        }
    }
    Ok(out)
}

fn product_membership(left: &[Operator], right: &[Operator], target: &OperatorSubspace) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in left {
        for y in right {
            worst = worst.max(target.residual(&(x * y))?);
        }
    }
    Ok(worst)
}

pub fn c_star_bases(w: &Operator, tol: &Tolerances) -> Result<CStarBases> {
    let n = two_leg_h_dim(w)?;
    let e = e_of(w);
    let g = g_of(w);
    let b = OperatorSubspace::span(&vector_slices(&e, Side::Right, n)?, tol)?;
    let c = OperatorSubspace::span(&vector_slices(&e, Side::Left, n)?, tol)?;
    let bhat = OperatorSubspace::span(&vector_slices(&g, Side::Left, n)?, tol)?;
    let chat = OperatorSubspace::span(&vector_slices(&g, Side::Right, n)?, tol)?;
    let spans = base_spans(w, tol)?;
    let a = leg_algebra(w, LegSide::A, tol)?.space;
    let ah = leg_algebra(w, LegSide::Ahat, tol)?.space;
    let (xa, ya) = (a.basis(), ah.basis());
    let (bb, cb, bhb, chb) = (b.basis(), c.basis(), bhat.basis(), chat.basis());

    let mut checks = Checks::new();
    checks.push("B_eq_N", b.equality_residual(&spans.n)?);
    checks.push("C_eq_L", c.equality_residual(&spans.l)?);
    checks.push("Bhat_eq_Nhat", bhat.equality_residual(&spans.nhat)?);
    checks.push("Chat_eq_Lhat", chat.equality_residual(&spans.lhat)?);
    checks.push("bx_in_A", product_membership(&bb, &xa, &a)?);
    checks.push("xb_in_A", product_membership(&xa, &bb, &a)?);
    checks.push("xc_in_A", product_membership(&xa, &cb, &a)?);
    checks.push("cx_in_A", product_membership(&cb, &xa, &a)?);
    checks.push("cy_in_Ahat", product_membership(&cb, &ya, &ah)?);
    checks.push("ybhat_in_Ahat", product_membership(&ya, &bhb, &ah)?);
    checks.push("xchat_in_A", product_membership(&xa, &chb, &a)?);
    checks.push("chaty_in_Ahat", product_membership(&chb, &ya, &ah)?);

    let bc = b.tensor(&c);
    let mut mult: f64 = 0.0;
    for x in &bb {
        for y in &cb {
            let t = kron(x, y);
            mult = mult.max(bc.residual(&(&e * &t))?).max(bc.residual(&(&t * &e))?);
        }
    }
    checks.push("E_multiplier_BC", mult);
    Ok(CStarBases {
        b,
        c,
        bhat,
        chat,
        checks,
    })
}
