//! Scaling group, antipode and unitary antipode, with their duals.

use crate::axioms::{two_leg_h_dim, w_hat};
use crate::base::{gamma_n, GammaData, WeightData};
use crate::check::Checks;
use crate::coalgebra::{leg_generators, LegSide};
use crate::error::{Error, Result};
use crate::functional::{slice, Functional, Side};
use crate::linalg::{pos_power_matrix, LsqSolver};
use crate::manage::T_SAMPLES;
use crate::subspace::OperatorSubspace;
use crate::tensor::{LegSpec, Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::{CMat, CVec, C64};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `τ_z(a) = Q^{2iz}·a·Q^{−2iz}`.
pub fn tau(q: &Operator, z: C64, a: &Operator, tol: &Tolerances) -> Result<Operator> {
    let s = C64::new(0.0, 2.0) * z;
    let m = pos_power_matrix(q.matrix(), s, tol)? * a.matrix() * pos_power_matrix(q.matrix(), -s, tol)?;
    Operator::new(a.space().clone(), m)
}

/// `((id⊗ω)(W), (id⊗ω)(W*))`.
pub fn antipode_s(w: &Operator, omega: &Functional) -> Result<(Operator, Operator)> {
    Ok((slice(w, Side::Right, omega)?, slice(&w.adjoint(), Side::Right, omega)?))
}

/// A linear map on the span of a generator family, fitted by least squares
/// to prescribed images.
#[derive(Clone, Debug)]
pub struct GridMap {
    pub domain: OperatorSubspace,
    /// Images of the domain basis, vectorized column-major.
    matrix: CMat,
    image_space: TensorSpace,
    /// Dimension of the relations among the generators.
    pub kernel_dim: usize,
    /// How far the prescribed images are from any linear map; zero means
    /// the extension is well defined.
    pub inconsistency: f64,
}

impl GridMap {
    pub fn assemble(generators: &[Operator], images: &[Operator], tol: &Tolerances) -> Result<Self> {
        if generators.len() != images.len() || images.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let domain = OperatorSubspace::span(generators, tol)?;
        let image_space = images[0].space().clone();
        let coords = generators
            .iter()
            .map(|g| domain.coords(g))
            .collect::<Result<Vec<_>>>()?;
        let g = CMat::from_columns(&coords);
        let f = CMat::from_columns(
            &images
                .iter()
                .map(|x| CVec::from_column_slice(x.entries()))
                .collect::<Vec<_>>(),
        );
        let matrix = &f * LsqSolver::new(&g, tol).pseudo_inverse();
        let inconsistency = (&matrix * &g - &f).norm() / f.norm().max(1.0);
        Ok(Self {
            kernel_dim: generators.len() - domain.dim(),
            domain,
            matrix,
            image_space,
            inconsistency,
        })
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let v = &self.matrix * self.domain.coords(x)?;
        let d = self.image_space.total_dim();
        Operator::new(self.image_space.clone(), CMat::from_column_slice(d, d, v.as_slice()))
    }

    /// Residual of `x` against the domain, then `apply`.
    pub fn apply_checked(&self, x: &Operator) -> Result<(Operator, f64)> {
        Ok((self.apply(x)?, self.domain.residual(x)?))
    }

    /// Minimum-norm preimage of `y`.
    pub fn solve(&self, y: &Operator) -> Result<Operator> {
        let rhs = CVec::from_column_slice(y.entries());
        let tol = Tolerances::default();
        let c = crate::linalg::lsq_solve(&self.matrix, &rhs, &tol).solution;
        Ok(self.domain.from_coords(&c))
    }
}

fn entry_functionals(n: usize) -> Vec<Functional> {
    Functional::entry_basis(LegSpec::h(n))
}

/// `S` from the generator grid `(id⊗ω)(W) ↦ (id⊗ω)(W*)`.
pub fn assemble_s(w: &Operator, tol: &Tolerances) -> Result<GridMap> {
    let n = two_leg_h_dim(w)?;
    let (gens, images): (Vec<_>, Vec<_>) = entry_functionals(n)
        .iter()
        .map(|om| antipode_s(w, om))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    GridMap::assemble(&gens, &images, tol)
}

/// `R_A: (id⊗ω)(W*) ↦ (id⊗ω)(W̃)^⊤`.
pub fn unitary_antipode_ra(w: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<GridMap> {
    let n = two_leg_h_dim(w)?;
    let ws = w.adjoint();
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for om in entry_functionals(n) {
        gens.push(slice(&ws, Side::Right, &om)?);
        images.push(slice(wtilde, Side::Right, &om)?.transpose());
    }
    GridMap::assemble(&gens, &images, tol)
}

/// `Ŝ: (ω⊗id)(W*) ↦ (ω⊗id)(W)`.
pub fn assemble_s_hat(w: &Operator, tol: &Tolerances) -> Result<GridMap> {
    let n = two_leg_h_dim(w)?;
    let ws = w.adjoint();
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for om in entry_functionals(n) {
        gens.push(slice(&ws, Side::Left, &om)?);
        images.push(slice(w, Side::Left, &om)?);
    }
    GridMap::assemble(&gens, &images, tol)
}

/// `R_Â: (ω⊗id)(W) ↦ (ω^⊤⊗id)(W̃*)`.
pub fn unitary_antipode_ra_hat(w: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<GridMap> {
    let n = two_leg_h_dim(w)?;
    let wts = wtilde.adjoint();
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for om in entry_functionals(n) {
        gens.push(slice(w, Side::Left, &om)?);
        images.push(slice(&wts, Side::Left, &om.transpose())?);
    }
    GridMap::assemble(&gens, &images, tol)
}

#[derive(Clone, Debug)]
pub struct AntipodeData {
    pub q: Operator,
    /// `((id⊗ω)(W), S(…))` over the entry functionals.
    pub generator_map: Vec<(Operator, Operator)>,
    pub s: GridMap,
    pub r_a: GridMap,
    /// `(t, τ_t(a))` over the sampled `t` and the domain basis of `S`.
    pub tau_samples: Vec<(f64, Vec<Operator>)>,
}

pub fn antipode_data(w: &Operator, q: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<AntipodeData> {
    let n = two_leg_h_dim(w)?;
    let generator_map = entry_functionals(n)
        .iter()
        .map(|om| antipode_s(w, om))
        .collect::<Result<Vec<_>>>()?;
    let s = assemble_s(w, tol)?;
    let r_a = unitary_antipode_ra(w, wtilde, tol)?;
    let basis = s.domain.basis();
    let tau_samples = T_SAMPLES
        .iter()
        .map(|&t| {
            Ok((
                t,
                basis
                    .iter()
                    .map(|a| tau(q, re(t), a, tol))
                    .collect::<Result<Vec<_>>>()?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AntipodeData {
        q: q.clone(),
        generator_map,
        s,
        r_a,
        tau_samples,
    })
}

fn max_over<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in items {
        worst = worst.max(f(x)?);
    }
    Ok(worst)
}

/// Involutive, `*`-preserving and anti-multiplicative on domain basis pairs.
fn anti_automorphism_checks(prefix: &str, map: &GridMap, out: &mut Checks) -> Result<()> {
    let basis = map.domain.basis();
    let images = basis.iter().map(|b| map.apply_checked(b)).collect::<Result<Vec<_>>>()?;
    out.push(
        format!("{prefix}_involutive"),
        max_over(basis.iter().zip(&images), |(b, (r, _))| {
            let (rr, miss) = map.apply_checked(r)?;
            Ok(rr.rel_gap(b).max(miss))
        })?,
    );
    out.push(
        format!("{prefix}_star"),
        max_over(basis.iter().zip(&images), |(b, (r, _))| {
            let (rs, miss) = map.apply_checked(&b.adjoint())?;
            Ok(rs.rel_gap(&r.adjoint()).max(miss))
        })?,
    );
    let mut anti: f64 = 0.0;
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            let (rxy, miss) = map.apply_checked(&(x * y))?;
            anti = anti.max(rxy.rel_gap(&(&images[j].0 * &images[i].0)).max(miss));
        }
    }
    out.push(format!("{prefix}_anti_multiplicative"), anti);
    Ok(())
}

pub fn check_antipode(w: &Operator, q: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<Checks> {
    let n = two_leg_h_dim(w)?;
    let data = antipode_data(w, q, wtilde, tol)?;
    let (s, r_a) = (&data.s, &data.r_a);
    let mhalf = C64::new(0.0, -0.5);
    let mut out = Checks::new();
    out.push("S_well_defined", s.inconsistency);
    out.push("RA_well_defined", r_a.inconsistency);

    out.push(
        "tau_invariance",
        max_over(&data.tau_samples, |(_, imgs)| max_over(imgs, |x| s.domain.residual(x)))?,
    );

    out.push(
        "polar",
        max_over(&data.generator_map, |(a, sa)| {
            let (r, miss) = r_a.apply_checked(&tau(q, mhalf, a, tol)?)?;
            Ok(r.rel_gap(sa).max(miss))
        })?,
    );
    out.push(
        "polar_commute",
        max_over(&data.generator_map, |(a, sa)| {
            let (r, miss) = r_a.apply_checked(a)?;
            Ok(tau(q, mhalf, &r, tol)?.rel_gap(sa).max(miss))
        })?,
    );

    let basis = s.domain.basis();
    let images = basis.iter().map(|a| s.apply(a)).collect::<Result<Vec<_>>>()?;
    let mut anti: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let (sab, miss) = s.apply_checked(&(a * b))?;
            anti = anti.max(sab.rel_gap(&(&images[j] * &images[i])).max(miss));
        }
    }
    out.push("S_anti_multiplicative", anti);
    out.push(
        "S_star_involution",
        max_over(basis.iter().zip(&images), |(a, sa)| {
            let (x, miss) = s.apply_checked(&sa.adjoint())?;
            Ok(x.adjoint().rel_gap(a).max(miss))
        })?,
    );
    out.push(
        "S_squared_tau",
        max_over(basis.iter().zip(&images), |(a, sa)| {
            let (ssa, miss) = s.apply_checked(sa)?;
            Ok(ssa.rel_gap(&tau(q, C64::new(0.0, -1.0), a, tol)?).max(miss))
        })?,
    );

    let leg = LegSpec::h(n);
    let mut lemma: f64 = 0.0;
    for vi in 0..n {
        for ui in 0..n {
            let mut v = CVec::zeros(n);
            let mut u = CVec::zeros(n);
            v[vi] = re(1.0);
            u[ui] = re(1.0);
            let om = Functional::vector(leg, &v, &u)?;
            let lhs = tau(q, mhalf, &slice(w, Side::Right, &om)?, tol)?;
            let rhs = slice(wtilde, Side::Right, &om)?.transpose();
            lemma = lemma.max(lhs.rel_gap(&rhs));
        }
    }
    out.push("tau_slice_lemma", lemma);

    anti_automorphism_checks("RA", r_a, &mut out)?;
    Ok(out)
}

/// `S(a*)* = S⁻¹(a)` over the domain basis, for multiplicative unitaries.
pub fn check_unitary_inverse(w: &Operator, tol: &Tolerances) -> Result<f64> {
    let s = assemble_s(w, tol)?;
    max_over(s.domain.basis(), |a| {
        let (x, miss) = s.apply_checked(&a.adjoint())?;
        let inv = s.solve(&a)?;
        Ok(x.adjoint().rel_gap(&inv).max(miss))
    })
}

pub fn check_duality(w: &Operator, q: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<Checks> {
    let n = two_leg_h_dim(w)?;
    let s_hat = assemble_s_hat(w, tol)?;
    let r_hat = unitary_antipode_ra_hat(w, wtilde, tol)?;
    let mut out = Checks::new();
    out.push("Shat_well_defined", s_hat.inconsistency);
    out.push("RAhat_well_defined", r_hat.inconsistency);

    let ws = w.adjoint();
    let half = C64::new(0.0, 0.5);
    let mut gen: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for om in entry_functionals(n) {
        let y = slice(w, Side::Left, &om)?;
        let ystar = slice(&ws, Side::Left, &om)?;
        let (sy, miss) = s_hat.apply_checked(&ystar)?;
        gen = gen.max(sy.rel_gap(&y).max(miss));
        let (r, miss) = r_hat.apply_checked(&tau(q, half, &y, tol)?)?;
        inv = inv.max(r.rel_gap(&ystar).max(miss));
    }
    out.push("Shat_generators", gen);
    out.push("Shat_inverse_polar", inv);
    anti_automorphism_checks("RAhat", &r_hat, &mut out)?;

    let ahat = OperatorSubspace::span(&leg_generators(w, LegSide::Ahat)?, tol)?;
    let space = TensorSpace::new(vec![LegSpec::hbar(n), LegSpec::h(n)]);
    let mut assembled = Operator::zeros(space.clone());
    let mut block_miss: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let y = slice(w, Side::Left, &Functional::matrix_unit(LegSpec::h(n), i, j))?;
            block_miss = block_miss.max(ahat.residual(&y)?);
            let eji = Operator::matrix_unit(LegSpec::hbar(n), j, i);
            assembled = &assembled + &eji.kron(&r_hat.apply(&y)?);
        }
    }
    out.push("W_blocks_in_Ahat", block_miss);
    out.push("W_transpose_Rhat", assembled.rel_gap(&wtilde.adjoint()));
    let wts = wtilde.adjoint();
    out.push("Wtilde_partial_isometry", (&(wtilde * &wts) * wtilde).rel_gap(wtilde));
    out.push("double_dual", w_hat(&w_hat(w)?)?.rel_gap(w));
    Ok(out)
}

/// `τ_t|_B = σ^ν_{−t}`, `τ_t|_C = σ^μ_t`, `S|_B = γ_B` and `S|_C = γ_C`.
pub fn check_base_restrictions(
    w: &Operator,
    q: &Operator,
    nu: &WeightData,
    gd: &GammaData,
    tol: &Tolerances,
) -> Result<Checks> {
    let s = assemble_s(w, tol)?;
    let b_basis = nu.algebra.basis();
    let c_basis = gd.mu.algebra.basis();
    let mut out = Checks::new();
    let mut tb: f64 = 0.0;
    let mut tc: f64 = 0.0;
    for &t in &T_SAMPLES {
        for b in &b_basis {
            tb = tb.max(tau(q, re(t), b, tol)?.rel_gap(&nu.sigma(re(-t), b, tol)?));
        }
        for c in &c_basis {
            tc = tc.max(tau(q, re(t), c, tol)?.rel_gap(&gd.mu.sigma(re(t), c, tol)?));
        }
    }
    out.push("tau_on_B", tb);
    out.push("tau_on_C", tc);
    out.push(
        "S_on_B",
        max_over(&b_basis, |b| {
            let (sb, miss) = s.apply_checked(b)?;
            Ok(sb.rel_gap(&gamma_n(w, nu, b)?).max(miss))
        })?,
    );
    out.push(
        "S_on_C",
        max_over(&gd.gamma_l, |(c, g)| {
            let (sc, miss) = s.apply_checked(c)?;
            Ok(sc.rel_gap(g).max(miss))
        })?,
    );
    Ok(out)
}
