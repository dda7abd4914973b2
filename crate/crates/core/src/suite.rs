//! Runs the check levels in dependency order and collects the outcome.

use std::time::{Duration, Instant};

use crate::antipode::{check_antipode, check_base_restrictions, check_duality, check_unitary_inverse};
use crate::axioms::{assess_fullness, check_derived_identities, check_mpi_axioms, projection_checks};
use crate::base::{
    base_spans, c_star_bases, calibrate_modular_sign, check_r_kappa, check_separability_triple,
    find_distinguished_weight, gamma_and_rtilde, kappa_map, BaseSide, GammaData, ManagePair, WeightData,
};
use crate::check::Checks;
use crate::coalgebra::check_coalgebra;
use crate::error::Result;
use crate::manage::{check_hash_identities, check_manageability, dual_manageability, ManageabilityCertificate};
use crate::tensor::Operator;
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Axioms,
    Coalgebra,
    Base,
    Manageability,
    Antipode,
}

impl Level {
    pub const ALL: [Level; 5] = [
        Level::Axioms,
        Level::Coalgebra,
        Level::Base,
        Level::Manageability,
        Level::Antipode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Level::Axioms => "axioms",
            Level::Coalgebra => "coalgebra",
            Level::Base => "base",
            Level::Manageability => "manageability",
            Level::Antipode => "antipode",
        }
    }

    /// Accepts the level names and `all`, which is the same as `antipode`.
    pub fn parse(s: &str) -> Option<Level> {
        match s {
            "all" => Some(Level::Antipode),
            _ => Level::ALL.into_iter().find(|l| l.name() == s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub level: Level,
    pub id: String,
    pub residual: f64,
    pub pass: bool,
    /// Time spent in the computation that produced this residual.
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactValue {
    Bool(bool),
    Int(usize),
    Real(f64),
}

/// A reported quantity with no pass/fail meaning.
#[derive(Clone, Debug, PartialEq)]
pub struct Fact {
    pub level: Level,
    pub key: String,
    pub value: FactValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoteKind {
    /// Prerequisites missing; nothing ran.
    Skipped,
    /// A computation could not complete; counts as a failure.
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Note {
    pub level: Level,
    pub step: String,
    pub kind: NoteKind,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub fixture: String,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckRecord>,
    pub facts: Vec<Fact>,
    pub notes: Vec<Note>,
}

impl SuiteReport {
    /// Every executed check passes and no step errored.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.notes.iter().all(|n| n.kind != NoteKind::Error)
    }

    pub fn check(&self, level: Level, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.level == level && c.id == id)
    }

    pub fn fact(&self, key: &str) -> Option<&FactValue> {
        self.facts.iter().find(|f| f.key == key).map(|f| &f.value)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn skipped(&self, level: Level) -> Option<&Note> {
        self.notes
            .iter()
            .find(|n| n.level == level && n.kind == NoteKind::Skipped && n.step == level.name())
    }

    /// `(level, id, pass)` in report order, the boolean fingerprint of a run.
    pub fn verdicts(&self) -> Vec<(Level, String, bool)> {
        self.checks.iter().map(|c| (c.level, c.id.clone(), c.pass)).collect()
    }
}

pub const NO_CERTIFIED_Q: &str = "no certified Q";

struct Runner {
    tol: Tolerances,
    report: SuiteReport,
}

impl Runner {
    fn checks(&mut self, level: Level, started: Instant, checks: Checks) {
        let wall_time = started.elapsed();
        for c in checks.iter() {
            self.report.checks.push(CheckRecord {
                level,
                id: c.id.clone(),
                residual: c.residual,
                pass: self.tol.passes(c.residual),
                wall_time,
            });
        }
    }

    fn one(&mut self, level: Level, started: Instant, id: &str, residual: f64) {
        let mut c = Checks::new();
        c.push(id, residual);
        self.checks(level, started, c);
    }

    fn fact(&mut self, level: Level, key: &str, value: FactValue) {
        self.report.facts.push(Fact {
            level,
            key: key.into(),
            value,
        });
    }

    fn note(&mut self, level: Level, step: &str, kind: NoteKind, reason: impl Into<String>) {
        self.report.notes.push(Note {
            level,
            step: step.into(),
            kind,
            reason: reason.into(),
        });
    }

    /// Runs `f`, turning an error into a note.
    fn attempt<T>(&mut self, level: Level, step: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
        match f() {
            Ok(v) => Some(v),
            Err(e) => {
                self.note(level, step, NoteKind::Error, e.to_string());
                None
            }
        }
    }

    fn skip_level(&mut self, level: Level, reason: &str) {
        self.note(level, level.name(), NoteKind::Skipped, reason);
    }
}

struct BaseData {
    nu: WeightData,
    gd: GammaData,
}

/// Runs every level up to and including `upto`.
pub fn run_suite(fixture: &str, w: &Operator, q: Option<&Operator>, upto: Level, tol: &Tolerances) -> SuiteReport {
    let mut r = Runner {
        tol: *tol,
        report: SuiteReport {
            fixture: fixture.into(),
            tolerances: *tol,
            checks: Vec::new(),
            facts: Vec::new(),
            notes: Vec::new(),
        },
    };

    let axioms_ok = run_axioms(&mut r, w);
    let nondegenerate = axioms_ok.unwrap_or(false);
    let axioms_passed = axioms_ok.is_some();

    if upto >= Level::Coalgebra {
        if axioms_passed {
            run_coalgebra(&mut r, w);
        } else {
            r.skip_level(Level::Coalgebra, "axioms failed");
        }
    }

    let mut base = None;
    if upto >= Level::Base {
        if axioms_passed {
            base = run_base(&mut r, w);
        } else {
            r.skip_level(Level::Base, "axioms failed");
        }
    }

    let mut certificate = None;
    if upto >= Level::Manageability {
        if !axioms_passed {
            r.skip_level(Level::Manageability, "axioms failed");
        } else if let Some(q) = q {
            certificate = run_manageability(&mut r, w, q, base.as_ref());
        } else {
            r.skip_level(Level::Manageability, NO_CERTIFIED_Q);
        }
    }

    if upto >= Level::Antipode {
        match (&certificate, axioms_passed) {
            (_, false) => r.skip_level(Level::Antipode, "axioms failed"),
            (None, _) => r.skip_level(Level::Antipode, NO_CERTIFIED_Q),
            (Some(_), _) if !nondegenerate => {
                r.skip_level(Level::Antipode, "W is not nondegenerate (A or Â acts degenerately)")
            }
            (Some(cert), _) => run_antipode(&mut r, w, cert, base.as_ref()),
        }
    }
    r.report
}

/// `None` when the prerequisites for later levels fail, otherwise whether
/// the nondegenerate fullness reading holds.
fn run_axioms(r: &mut Runner, w: &Operator) -> Option<bool> {
    let lv = Level::Axioms;
    let tol = r.tol;
    let t = Instant::now();
    let verdict = r.attempt(lv, "mpi_axioms", || check_mpi_axioms(w, &tol))?;
    let mut c = Checks::new();
    c.push("partial_isometry", verdict.partial_isometry.residual);
    c.extend(verdict.axioms.clone());
    r.checks(lv, t, c);
    let passed = verdict.partial_isometry.flag && verdict.axioms.all_pass(&tol);
    if !passed {
        r.note(
            lv,
            "derived_identities",
            NoteKind::Skipped,
            "mpi1–mpi4 or the partial isometry check failed",
        );
        return None;
    }

    let t = Instant::now();
    if let Some(d) = r.attempt(lv, "derived_identities", || check_derived_identities(w)) {
        r.checks(lv, t, d);
    }
    let t = Instant::now();
    r.checks(lv, t, projection_checks(w));

    let full = r.attempt(lv, "fullness", || assess_fullness(w, &tol))?;
    r.fact(lv, "fullness_literal_right", FactValue::Bool(full.literal_right));
    r.fact(lv, "fullness_literal_left", FactValue::Bool(full.literal_left));
    r.fact(lv, "nondegenerate_A_range", FactValue::Bool(full.nondeg_a_range));
    r.fact(lv, "nondegenerate_A_kernel", FactValue::Bool(full.nondeg_a_kernel));
    r.fact(lv, "nondegenerate_Ahat_range", FactValue::Bool(full.nondeg_ahat_range));
    r.fact(
        lv,
        "nondegenerate_Ahat_kernel",
        FactValue::Bool(full.nondeg_ahat_kernel),
    );
    r.fact(lv, "right_slice_rank", FactValue::Int(full.right_slice_rank));
    r.fact(lv, "left_slice_rank", FactValue::Int(full.left_slice_rank));
    let unitary = verdict.e.rel_gap(&Operator::identity(w.space().clone())) < tol.residual
        && verdict.g.rel_gap(&Operator::identity(w.space().clone())) < tol.residual;
    r.fact(lv, "unitary", FactValue::Bool(unitary));
    Some(full.nondegenerate())
}

fn run_coalgebra(r: &mut Runner, w: &Operator) {
    let lv = Level::Coalgebra;
    let tol = r.tol;
    let t = Instant::now();
    let Some(rep) = r.attempt(lv, "coalgebra", || check_coalgebra(w, &tol)) else {
        return;
    };
    let mut c = rep.checks.clone();
    c.extend(rep.dual_checks.clone());
    r.checks(lv, t, c);
    r.fact(lv, "dim_A", FactValue::Int(rep.a.dim()));
    r.fact(lv, "dim_Ahat", FactValue::Int(rep.ahat.dim()));
    r.fact(lv, "A_unital", FactValue::Bool(rep.a.unital.flag));
    r.fact(lv, "Ahat_unital", FactValue::Bool(rep.ahat.unital.flag));
    r.fact(lv, "A_star_closed", FactValue::Bool(rep.a.star_closed.flag));
    r.fact(lv, "Ahat_star_closed", FactValue::Bool(rep.ahat_star_closed.flag));
    for (k, d) in rep.range_density.density_dims.iter().enumerate() {
        r.fact(lv, &format!("density{}_dim", k + 1), FactValue::Int(*d));
    }
    r.fact(lv, "Delta_range_dim", FactValue::Int(rep.range_density.range_dims.0));
    r.fact(lv, "E_range_dim", FactValue::Int(rep.range_density.range_dims.1));
}

fn run_base(r: &mut Runner, w: &Operator) -> Option<BaseData> {
    let lv = Level::Base;
    let tol = r.tol;
    let t = Instant::now();
    let spans = r.attempt(lv, "base_spans", || base_spans(w, &tol))?;
    r.checks(lv, t, spans.checks.clone());
    r.fact(lv, "dim_N", FactValue::Int(spans.n.dim()));
    r.fact(lv, "dim_L", FactValue::Int(spans.l.dim()));
    r.fact(lv, "dim_Nhat", FactValue::Int(spans.nhat.dim()));
    r.fact(lv, "dim_Lhat", FactValue::Int(spans.lhat.dim()));

    let t = Instant::now();
    if let Some(k) = r.attempt(lv, "kappa", || kappa_map(w, &spans.n, &tol)) {
        let mut c = Checks::new();
        c.push("kappa_solve", k.max_residual());
        c.push("kappa_anti_multiplicative", k.anti_multiplicativity);
        r.checks(lv, t, c);
        r.fact(lv, "kappa_nullity", FactValue::Int(k.nullity));
    }

    let t = Instant::now();
    if let Some(nuh) = r.attempt(lv, "dual_weight", || find_distinguished_weight(w, BaseSide::Nhat, &tol)) {
        r.one(lv, t, "nuhat_solve", nuh.residual);
        r.fact(lv, "nuhat_min_eigenvalue", FactValue::Real(nuh.min_eigenvalue));
    }

    let t = Instant::now();
    let nu = r.attempt(lv, "weight", || find_distinguished_weight(w, BaseSide::N, &tol))?;
    r.one(lv, t, "nu_solve", nu.residual);
    r.fact(lv, "nu_min_eigenvalue", FactValue::Real(nu.min_eigenvalue));
    r.fact(lv, "nu_solution_space_dim", FactValue::Int(nu.solution_space_dim));

    let t = Instant::now();
    if let Some(cs) = r.attempt(lv, "c_star_bases", || c_star_bases(w, &tol)) {
        r.checks(lv, t, cs.checks);
    }

    if nu.min_eigenvalue <= tol.pd {
        r.note(
            lv,
            "weight",
            NoteKind::Error,
            "distinguished weight is not positive definite",
        );
        return None;
    }
    if !tol.passes(nu.residual) {
        r.note(
            lv,
            "modular_chain",
            NoteKind::Skipped,
            "no distinguished weight at tolerance",
        );
        return None;
    }

    let t = Instant::now();
    let gd = r.attempt(lv, "gamma_and_rtilde", || gamma_and_rtilde(w, &nu, &tol))?;
    r.checks(lv, t, gd.checks.clone());
    let t = Instant::now();
    if let Some(st) = r.attempt(lv, "separability_triple", || {
        check_separability_triple(w, &nu, &gd, None, &tol)
    }) {
        r.checks(lv, t, st);
    }
    if let Some(cal) = r.attempt(lv, "sign_calibration", || calibrate_modular_sign(w, &nu, &tol)) {
        r.fact(lv, "modular_sign_documented", FactValue::Real(cal.documented));
        r.fact(lv, "modular_sign_opposite", FactValue::Real(cal.opposite));
    }
    Some(BaseData { nu, gd })
}

fn run_manageability(
    r: &mut Runner,
    w: &Operator,
    q: &Operator,
    base: Option<&BaseData>,
) -> Option<ManageabilityCertificate> {
    let lv = Level::Manageability;
    let tol = r.tol;
    let t = Instant::now();
    let cert = r.attempt(lv, "certificate", || check_manageability(w, q, &tol))?;
    r.checks(lv, t, cert.checks.clone());

    let t = Instant::now();
    if let Some(h) = r.attempt(lv, "hash_identities", || {
        check_hash_identities(w, q, &cert.wtilde, &tol)
    }) {
        r.checks(lv, t, h);
    }
    let t = Instant::now();
    if let Some(d) = r.attempt(lv, "dual", || dual_manageability(w, q, &cert.wtilde, &tol)) {
        let mut c = Checks::new();
        c.push("dual_candidate", d.candidate_residual);
        for x in d.certificate.checks.iter() {
            c.push(format!("dual.{}", x.id), x.residual);
        }
        r.checks(lv, t, c);
    }
    match base {
        Some(b) => {
            let t = Instant::now();
            let pair = ManagePair {
                q,
                wtilde: &cert.wtilde,
            };
            if let Some(c) = r.attempt(lv, "r_kappa", || check_r_kappa(w, &b.gd, pair, &tol)) {
                r.checks(lv, t, c);
            }
        }
        None => r.note(lv, "r_kappa", NoteKind::Skipped, "base data unavailable"),
    }
    if cert.passed {
        Some(cert)
    } else {
        None
    }
}

fn run_antipode(r: &mut Runner, w: &Operator, cert: &ManageabilityCertificate, base: Option<&BaseData>) {
    let lv = Level::Antipode;
    let tol = r.tol;
    let (q, wt) = (&cert.q, &cert.wtilde);
    let t = Instant::now();
    if let Some(c) = r.attempt(lv, "antipode", || check_antipode(w, q, wt, &tol)) {
        r.checks(lv, t, c);
    }
    let t = Instant::now();
    if let Some(c) = r.attempt(lv, "duality", || check_duality(w, q, wt, &tol)) {
        r.checks(lv, t, c);
    }
    let unitary = r.report.fact("unitary") == Some(&FactValue::Bool(true));
    if unitary {
        let t = Instant::now();
        if let Some(x) = r.attempt(lv, "unitary_inverse", || check_unitary_inverse(w, &tol)) {
            r.one(lv, t, "S_star_inverse", x);
        }
    } else {
        r.note(lv, "unitary_inverse", NoteKind::Skipped, "W is not unitary");
    }
    match base {
        Some(b) => {
            let t = Instant::now();
            if let Some(c) = r.attempt(lv, "base_restrictions", || {
                check_base_restrictions(w, q, &b.nu, &b.gd, &tol)
            }) {
                r.checks(lv, t, c);
            }
        }
        None => r.note(lv, "base_restrictions", NoteKind::Skipped, "base data unavailable"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{matrix_unit_example, standard_corpus};
    use crate::tensor::{flip, Flavor};
    use std::collections::HashSet;

    #[test]
    fn example_without_q_skips_with_reason() {
        let tol = Tolerances::default();
        let rep = run_suite("example", &matrix_unit_example(), None, Level::Antipode, &tol);
        assert_eq!(rep.skipped(Level::Manageability).unwrap().reason, NO_CERTIFIED_Q);
        assert_eq!(rep.skipped(Level::Antipode).unwrap().reason, NO_CERTIFIED_Q);
        assert!(rep.check(Level::Antipode, "polar").is_none());
        for id in ["mpi1", "mpi2", "mpi3", "mpi4", "partial_isometry"] {
            assert!(rep.check(Level::Axioms, id).unwrap().pass, "{id}");
        }
        assert_eq!(rep.fact("nondegenerate_A_range"), Some(&FactValue::Bool(false)));
    }

    #[test]
    fn axioms_level_stops_early() {
        let tol = Tolerances::default();
        let rep = run_suite("example", &matrix_unit_example(), None, Level::Axioms, &tol);
        assert!(rep.checks.iter().all(|c| c.level == Level::Axioms));
        assert!(rep.passed());
    }

    #[test]
    fn flip_fails_and_skips_downstream() {
        let tol = Tolerances::default();
        let rep = run_suite("flip", &flip(2, Flavor::H), None, Level::Antipode, &tol);
        assert!(!rep.check(Level::Axioms, "mpi1").unwrap().pass);
        assert!(!rep.passed());
        for lv in [Level::Coalgebra, Level::Base, Level::Manageability, Level::Antipode] {
            assert_eq!(rep.skipped(lv).unwrap().reason, "axioms failed");
        }
    }

    #[test]
    fn z2_passes_everything() {
        let tol = Tolerances::default();
        let f = &standard_corpus()[1];
        let rep = run_suite(&f.id, &f.w, f.q.as_ref(), Level::Antipode, &tol);
        let failed: Vec<_> = rep.failed_checks().map(|c| c.id.clone()).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(rep.passed());
        assert!(rep.check(Level::Antipode, "S_star_inverse").is_some());
    }

    #[test]
    fn check_ids_are_unique_per_level() {
        let tol = Tolerances::default();
        let f = &standard_corpus()[4];
        let rep = run_suite(&f.id, &f.w, f.q.as_ref(), Level::Antipode, &tol);
        let mut seen = HashSet::new();
        for c in &rep.checks {
            assert!(seen.insert((c.level, c.id.clone())), "{:?} {}", c.level, c.id);
        }
    }

    #[test]
    fn level_names_round_trip() {
        for lv in Level::ALL {
            assert_eq!(Level::parse(lv.name()), Some(lv));
        }
        assert_eq!(Level::parse("all"), Some(Level::Antipode));
        assert_eq!(Level::parse("nope"), None);
    }
}
