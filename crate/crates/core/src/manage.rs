//! The manageability operator `W̃` and the conditions it must satisfy.

use nalgebra::DMatrix;

use crate::axioms::{two_leg_h_dim, w_hat};
use crate::check::Checks;
use crate::error::{Error, Result};
use crate::functional::{slice, Functional, Side};
use crate::linalg::{hermitian_eigen, pos_power_matrix, svd_real_full};
use crate::tensor::{flip, kron, product_on, Flavor, LegSpec, Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::{CMat, CVec, C64};

/// Sampled real parameters for one-parameter groups.
pub const T_SAMPLES: [f64; 4] = [1.0, -1.0, 0.3, -0.3];

/// `Q` acts on `H(n)` and is positive definite.
pub fn validate_q(q: &Operator, n: usize, tol: &Tolerances) -> Result<()> {
    if q.space() != &TensorSpace::h_power(n, 1) {
        return Err(Error::SpaceMismatch {
            expected: TensorSpace::h_power(n, 1),
            found: q.space().clone(),
        });
    }
    let (values, _) = hermitian_eigen(q.matrix(), tol)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min.is_nan() || min <= tol.pd {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(())
}

fn q_power(q: &Operator, z: C64, tol: &Tolerances) -> Result<CMat> {
    pos_power_matrix(q.matrix(), z, tol)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn hbar_h(n: usize) -> TensorSpace {
    TensorSpace::new(vec![LegSpec::hbar(n), LegSpec::h(n)])
}

/// `W̃_{(a,d),(b,c)} = X_{(b,d),(a,c)}` with `X = (1⊗Q⁻¹)W(1⊗Q)`; the first
/// leg of the result is `H̄`.
pub fn build_wtilde(w: &Operator, q: &Operator, tol: &Tolerances) -> Result<Operator> {
    let n = two_leg_h_dim(w)?;
    validate_q(q, n, tol)?;
    let qi = q_power(q, re(-1.0), tol)?;
    let id = CMat::identity(n, n);
    let x = id.kronecker(&qi) * w.matrix() * id.kronecker(q.matrix());
    let mut wt = CMat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    wt[(a * n + d, b * n + c)] = x[(b * n + d, a * n + c)];
                }
            }
        }
    }
    Operator::new(hbar_h(n), wt)
}

fn basis_vec(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = re(1.0);
    v
}

fn grid_gap(lhs: &[C64], rhs: &[C64]) -> f64 {
    let diff: f64 = lhs.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = lhs.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    diff / scale.max(1.0)
}

/// `R* X S`; its entry `((a,d),(b,c))` is `⟨X S(e_b⊗e_c), R(e_a⊗e_d)⟩`.
fn sandwich(r: &CMat, x: &CMat, s: &CMat) -> CMat {
    r.adjoint() * x * s
}

/// Defining relation of `W̃` on the basis grid, with `v = Q e_c` and
/// `u = Q⁻¹ e_d`:
/// `⟨W(ξ⊗v), η⊗u⟩ = ⟨W̃(η̄⊗Q⁻¹v), ξ̄⊗Qu⟩`.
pub fn condition2_residual(w: &Operator, q: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<f64> {
    let n = two_leg_h_dim(w)?;
    let qm = q.matrix();
    let qi = q_power(q, re(-1.0), tol)?;
    let id = CMat::identity(n, n);
    let lhs = sandwich(&id.kronecker(&qi), w.matrix(), &id.kronecker(qm));
    let rhs = sandwich(&id.kronecker(&(qm * &qi)), wtilde.matrix(), &id.kronecker(&(&qi * qm)));
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    l.push(lhs[(a * n + d, b * n + c)]);
                    r.push(rhs[(b * n + d, a * n + c)]);
                }
            }
        }
    }
    Ok(grid_gap(&l, &r))
}

/// `⟨W(ξ⊗v), η⊗u⟩ = ⟨W̃((Q⁻¹)ᵗη̄⊗v), Qᵗξ̄⊗u⟩` on the basis grid.
pub fn alternative_characterization_residual(
    w: &Operator,
    q: &Operator,
    wtilde: &Operator,
    tol: &Tolerances,
) -> Result<f64> {
    let n = two_leg_h_dim(w)?;
    let qt = q.matrix().transpose();
    let qit = q_power(q, re(-1.0), tol)?.transpose();
    let id = CMat::identity(n, n);
    let rhs = sandwich(&qt.kronecker(&id), wtilde.matrix(), &qit.kronecker(&id));
    let wm = w.matrix();
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    l.push(wm[(b * n + d, a * n + c)]);
                    r.push(rhs[(a * n + d, b * n + c)]);
                }
            }
        }
    }
    Ok(grid_gap(&l, &r))
}

/// Factors of the three-leg identities involving `W̃`.
struct Tilde {
    n: usize,
    w: Operator,
    ws: Operator,
    wt: Operator,
    wts: Operator,
    /// `W^{⊤⊗⊤}` and `(W*)^{⊤⊗⊤}` on `H̄⊗H̄`.
    w_tt: Operator,
    ws_tt: Operator,
}

impl Tilde {
    fn new(w: &Operator, wtilde: &Operator) -> Result<Self> {
        let n = two_leg_h_dim(w)?;
        if wtilde.space() != &hbar_h(n) {
            return Err(Error::SpaceMismatch {
                expected: hbar_h(n),
                found: wtilde.space().clone(),
            });
        }
        Ok(Self {
            n,
            w: w.clone(),
            ws: w.adjoint(),
            wt: wtilde.clone(),
            wts: wtilde.adjoint(),
            w_tt: w.transpose(),
            ws_tt: w.adjoint().transpose(),
        })
    }

    fn space(&self, flavors: [Flavor; 3]) -> TensorSpace {
        TensorSpace::from_flavors(self.n, &flavors)
    }
}

const BBH: [Flavor; 3] = [Flavor::Hbar, Flavor::Hbar, Flavor::H];
const BHH: [Flavor; 3] = [Flavor::Hbar, Flavor::H, Flavor::H];

#[derive(Clone, Debug)]
pub struct ManageabilityCertificate {
    pub q: Operator,
    pub wtilde: Operator,
    /// `cond1`, `cond2_grid`, `cond3a`, `cond3b`, `alt_char`, the two
    /// covariance checks and the two inclusion consequences.
    pub checks: Checks,
    pub passed: bool,
}

impl ManageabilityCertificate {
    pub fn residual_cond1(&self) -> f64 {
        self.checks.get("cond1")
    }

    pub fn residual_cond3a(&self) -> f64 {
        self.checks.get("cond3a")
    }

    pub fn residual_cond3b(&self) -> f64 {
        self.checks.get("cond3b")
    }

    pub fn residual_alt_char(&self) -> f64 {
        self.checks.get("alt_char")
    }
}

pub fn check_manageability(w: &Operator, q: &Operator, tol: &Tolerances) -> Result<ManageabilityCertificate> {
    let wtilde = build_wtilde(w, q, tol)?;
    let t = Tilde::new(w, &wtilde)?;
    let n = t.n;
    let mut checks = Checks::new();

    let qq = kron(q, q);
    checks.push("cond1", (w * &qq).rel_gap(&(&qq * w)));
    checks.push("cond2_grid", condition2_residual(w, q, &wtilde, tol)?);

    let bbh = t.space(BBH);
    let lhs = product_on(&bbh, &[(&t.wt, &[1, 3]), (&t.wt, &[2, 3]), (&t.wts, &[2, 3])])?;
    let rhs = product_on(&bbh, &[(&t.w_tt, &[1, 2]), (&t.ws_tt, &[1, 2]), (&t.wt, &[1, 3])])?;
    checks.push("cond3a", lhs.rel_gap(&rhs));

    let bhh = t.space(BHH);
    let lhs = product_on(&bhh, &[(&t.w, &[2, 3]), (&t.ws, &[2, 3]), (&t.wt, &[1, 3])])?;
    let rhs = product_on(&bhh, &[(&t.wt, &[1, 3]), (&t.wt, &[1, 2]), (&t.wts, &[1, 2])])?;
    checks.push("cond3b", lhs.rel_gap(&rhs));

    checks.push("alt_char", alternative_characterization_residual(w, q, &wtilde, tol)?);

    let mut cov_w: f64 = 0.0;
    let mut cov_wt: f64 = 0.0;
    for &s in &T_SAMPLES {
        let qp = q_power(q, C64::new(0.0, s), tol)?;
        let qm = q_power(q, C64::new(0.0, -s), tol)?;
        let lhs = qp.kronecker(&qp) * w.matrix() * qm.kronecker(&qm);
        cov_w = cov_w.max((w.matrix() - lhs).norm() / w.frob_norm().max(1.0));
        let lhs = qm.transpose().kronecker(&qp) * wtilde.matrix() * qp.transpose().kronecker(&qm);
        cov_wt = cov_wt.max((wtilde.matrix() - lhs).norm() / wtilde.frob_norm().max(1.0));
    }
    checks.push("covariance_W", cov_w);
    checks.push("covariance_Wtilde", cov_wt);

    let e = &t.ws * w;
    let g = w * &t.ws;
    checks.push("inclusion_E", (&qq * &e).rel_gap(&(&(&e * &qq) * &e)));
    checks.push("inclusion_G", (&qq * &g).rel_gap(&(&(&g * &qq) * &g)));

    let passed = checks.all_pass(tol);
    let _ = n;
    Ok(ManageabilityCertificate {
        q: q.clone(),
        wtilde,
        checks,
        passed,
    })
}

/// The three `#`-composability identities on `H̄⊗H̄⊗H` and the
/// slice/transpose lemma `(id⊗ω_{Q⁻¹v,Qu})(W̃) = (id⊗ω_{v,u})(W)^⊤`.
pub fn check_hash_identities(w: &Operator, q: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<Checks> {
    let t = Tilde::new(w, wtilde)?;
    let n = t.n;
    let bbh = t.space(BBH);
    let mut out = Checks::new();
    let lhs = product_on(&bbh, &[(&t.w_tt, &[1, 2]), (&t.wt, &[2, 3]), (&t.ws_tt, &[1, 2])])?;
    let rhs = product_on(&bbh, &[(&t.wt, &[1, 3]), (&t.wt, &[2, 3])])?;
    out.push("hash1", lhs.rel_gap(&rhs));
    let lhs = product_on(&bbh, &[(&t.ws_tt, &[1, 2]), (&t.w_tt, &[1, 2]), (&t.wt, &[2, 3])])?;
    let rhs = product_on(&bbh, &[(&t.wt, &[2, 3]), (&t.ws_tt, &[1, 2]), (&t.w_tt, &[1, 2])])?;
    out.push("hash2", lhs.rel_gap(&rhs));
    let lhs = product_on(&bbh, &[(&t.wt, &[2, 3]), (&t.ws_tt, &[1, 2]), (&t.wts, &[2, 3])])?;
    let rhs = product_on(&bbh, &[(&t.ws_tt, &[1, 2]), (&t.wt, &[1, 3])])?;
    out.push("hash3", lhs.rel_gap(&rhs));

    let qi = q_power(q, re(-1.0), tol)?;
    let leg = LegSpec::h(n);
    let mut lemma: f64 = 0.0;
    for vi in 0..n {
        for ui in 0..n {
            let (v, u) = (basis_vec(n, vi), basis_vec(n, ui));
            let wq = Functional::vector(leg, &(&qi * &v), &(q.matrix() * &u))?;
            let lhs = slice(wtilde, Side::Right, &wq)?;
            let rhs = slice(w, Side::Right, &Functional::vector(leg, &v, &u)?)?.transpose();
            lemma = lemma.max(lhs.rel_gap(&rhs));
        }
    }
    out.push("slice_lemma", lemma);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DualCertificate {
    /// `(ΣW̃*Σ)^{⊤⊗⊤}` against `build_wtilde(Ŵ, Q)`.
    pub candidate_residual: f64,
    pub certificate: ManageabilityCertificate,
}

/// `(ΣW̃*Σ)^{⊤⊗⊤}` on `H̄⊗H`.
pub fn dual_wtilde_candidate(wtilde: &Operator) -> Result<Operator> {
    let n = wtilde.space().leg(0).dim;
    let s = flip(n, Flavor::H).into_matrix();
    let m = (&s * wtilde.matrix().adjoint() * &s).transpose();
    Operator::new(hbar_h(n), m)
}

pub fn dual_manageability(w: &Operator, q: &Operator, wtilde: &Operator, tol: &Tolerances) -> Result<DualCertificate> {
    let wh = w_hat(w)?;
    let candidate = dual_wtilde_candidate(wtilde)?;
    let certificate = check_manageability(&wh, q, tol)?;
    Ok(DualCertificate {
        candidate_residual: candidate.rel_gap(&certificate.wtilde),
        certificate,
    })
}

/// The identity plus diagonal `Q = diag(2^{x})` for the non-constant
/// directions `x` solving the log-linearized commutation constraint.
pub fn suggest_q(w: &Operator, tol: &Tolerances) -> Result<Vec<Operator>> {
    let n = two_leg_h_dim(w)?;
    let space = TensorSpace::h_power(n, 1);
    let mut out = vec![Operator::identity(space.clone())];
    let m = w.matrix();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for r in 0..n * n {
        for c in 0..n * n {
            if m[(r, c)].norm() > tol.residual * scale.max(1.0) {
                let (i, k, j, l) = (r / n, r % n, c / n, c % n);
                let mut row = vec![0.0; n];
                row[j] += 1.0;
                row[l] += 1.0;
                row[i] -= 1.0;
                row[k] -= 1.0;
                if row.iter().any(|&x| x != 0.0) {
                    rows.push(row);
                }
            }
        }
    }
    // The constant direction only rescales Q; project it out.
    rows.push(vec![1.0; n]);
    let a = DMatrix::<f64>::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let svd = svd_real_full(&a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    for k in 0..n {
        let s = svd.s.get(k).copied().unwrap_or(0.0);
        if s > tol.rank * smax.max(1.0) {
            continue;
        }
        let x = svd.v.column(k);
        let top = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if top == 0.0 {
            continue;
        }
        let diag = CVec::from_iterator(n, x.iter().map(|&v| re(2f64.powf(v / top))));
        out.push(Operator::new(space.clone(), CMat::from_diagonal(&diag))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{group_mpu, groupoid_mpi, matrix_unit_example, GroupoidSpec};

    fn eye(n: usize) -> Operator {
        Operator::identity(TensorSpace::h_power(n, 1))
    }

    #[test]
    fn example_wtilde_entries() {
        let tol = Tolerances::default();
        let wt = build_wtilde(&matrix_unit_example(), &eye(2), &tol).unwrap();
        let mut want = CMat::zeros(4, 4);
        want[(0, 2)] = re(1.0);
        want[(3, 3)] = re(1.0);
        assert_eq!(wt.matrix(), &want);
        assert_eq!(wt.space().leg(0).flavor, Flavor::Hbar);
    }

    #[test]
    fn trivial_and_group_wtilde() {
        let tol = Tolerances::default();
        let id = Operator::identity(TensorSpace::h_power(2, 2));
        assert_eq!(build_wtilde(&id, &eye(2), &tol).unwrap().matrix(), id.matrix());
        let z2 = group_mpu(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(build_wtilde(&z2, &eye(2), &tol).unwrap().matrix(), z2.matrix());
    }

    #[test]
    fn non_positive_q_is_rejected() {
        let tol = Tolerances::default();
        let q = Operator::zeros(TensorSpace::h_power(2, 1));
        assert!(build_wtilde(&matrix_unit_example(), &q, &tol).is_err());
    }

    #[test]
    fn group_certificates() {
        let tol = Tolerances::default();
        for w in [
            group_mpu(&[vec![0, 1], vec![1, 0]]).unwrap(),
            Operator::identity(TensorSpace::h_power(2, 2)),
            groupoid_mpi(&GroupoidSpec::cyclic(3)).unwrap(),
        ] {
            let n = w.space().leg(0).dim;
            let c = check_manageability(&w, &eye(n), &tol).unwrap();
            assert!(c.passed);
            assert!(c.checks.max() < 1e-12);
            let h = check_hash_identities(&w, &eye(n), &c.wtilde, &tol).unwrap();
            assert!(h.max() < 1e-12);
            let d = dual_manageability(&w, &eye(n), &c.wtilde, &tol).unwrap();
            assert!(d.candidate_residual < 1e-12);
            assert!(d.certificate.passed);
        }
    }

    #[test]
    fn suggestions_for_group_and_union() {
        let tol = Tolerances::default();
        let z2 = group_mpu(&[vec![0, 1], vec![1, 0]]).unwrap();
        let qs = suggest_q(&z2, &tol).unwrap();
        assert_eq!(qs.len(), 1);
        assert!(check_manageability(&z2, &qs[0], &tol).unwrap().passed);
        let u = GroupoidSpec::disjoint_union(&[GroupoidSpec::cyclic(2), GroupoidSpec::cyclic(3)]);
        let w = groupoid_mpi(&u).unwrap();
        let qs = suggest_q(&w, &tol).unwrap();
        assert_eq!(qs.len(), 2);
        for q in &qs {
            let c = check_manageability(&w, q, &tol).unwrap();
            assert!(c.passed, "{:?}", c.checks);
            assert!(check_hash_identities(&w, q, &c.wtilde, &tol).unwrap().max() < 1e-10);
        }
    }
}
