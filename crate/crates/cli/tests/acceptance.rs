//! Acceptance criteria 1–7, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::Instant;

use mpi_lab_core::antipode::assemble_s;
use mpi_lab_core::axioms::{check_mpi_axioms, is_partial_isometry, w_hat};
use mpi_lab_core::corpus::{
    conjugation_trials, groupoid_mpi, matrix_unit_example, standard_corpus, Fixture, FixtureKind, GroupoidSpec,
};
use mpi_lab_core::suite::{run_suite, FactValue, Level, SuiteReport};
use mpi_lab_core::tensor::flip;
use mpi_lab_core::{Flavor, LegSpec, Operator, TensorSpace, Tolerances, C64};

const TRIALS: usize = 200;
const TRIAL_SEED: u64 = 7;

/// Checks on the matrix-unit example whose failure is a genuine property of
/// that operator rather than of the implementation.
const EXAMPLE_KNOWN: &[(&str, &str)] = &[
    ("coalgebra", "density2"),
    ("coalgebra", "density3"),
    ("coalgebra", "dual.density1"),
    ("coalgebra", "dual.density3"),
    ("base", "L_eq_Lhat"),
    ("base", "nuhat_solve"),
];

struct Outcome {
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn below(&mut self, r: &SuiteReport, level: Level, id: &str, bound: f64) {
        match r.check(level, id) {
            Some(c) => self.require(c.residual < bound, || {
                format!(
                    "{}: {}/{} = {:.2e} (bound {bound:.0e})",
                    r.fixture,
                    level.name(),
                    id,
                    c.residual
                )
            }),
            None => self
                .failures
                .push(format!("{}: {}/{} did not run", r.fixture, level.name(), id)),
        }
    }
}

fn base_id(fixture: &str) -> &str {
    fixture.split('~').next().unwrap_or(fixture)
}

fn is_known(failure: &str) -> bool {
    let Some((fixture, rest)) = failure.split_once(": ") else {
        return false;
    };
    base_id(fixture) == "example"
        && EXAMPLE_KNOWN
            .iter()
            .any(|(level, id)| rest.starts_with(&format!("{level}/{id} ")))
}

/// `fixture: level/id` with conjugation seeds and residuals dropped.
fn summary_key(failure: &str) -> String {
    match failure.split_once(": ") {
        Some((fixture, rest)) => {
            let what = rest.split(" = ").next().unwrap_or(rest);
            format!("{}: {what}", base_id(fixture))
        }
        None => failure.to_string(),
    }
}

fn bool_fact(r: &SuiteReport, key: &str) -> Option<bool> {
    match r.fact(key) {
        Some(FactValue::Bool(b)) => Some(*b),
        _ => None,
    }
}

fn int_fact(r: &SuiteReport, key: &str) -> Option<usize> {
    match r.fact(key) {
        Some(FactValue::Int(k)) => Some(*k),
        _ => None,
    }
}

fn run(f: &Fixture, tol: &Tolerances) -> SuiteReport {
    run_suite(&f.id, &f.w, f.q.as_ref(), Level::Antipode, tol)
}

fn criterion1(tol: &Tolerances) -> Outcome {
    let mut o = Outcome::new();
    let r = run_suite("example", &matrix_unit_example(), None, Level::Coalgebra, tol);
    for id in ["partial_isometry", "mpi1", "mpi2", "mpi3", "mpi4"] {
        o.below(&r, Level::Axioms, id, 1e-12);
    }
    o.require(int_fact(&r, "dim_A") == Some(2), || {
        format!("dim A = {:?}", r.fact("dim_A"))
    });
    o.require(bool_fact(&r, "A_unital") == Some(false), || "A is unital".into());
    o.require(bool_fact(&r, "Ahat_unital") == Some(true), || "Â is not unital".into());
    o
}

fn criterion2(reports: &[&SuiteReport]) -> Outcome {
    let mut o = Outcome::new();
    for r in reports {
        let axioms_hold = ["mpi1", "mpi2", "mpi3", "mpi4"]
            .iter()
            .all(|id| r.check(Level::Axioms, id).is_some_and(|c| c.residual < 1e-11));
        if !axioms_hold {
            continue;
        }
        for k in 5..=10 {
            o.below(r, Level::Axioms, &format!("mpi{k}"), 1e-9);
        }
        let coalgebra: Vec<&str> = r
            .checks
            .iter()
            .filter(|c| c.level == Level::Coalgebra)
            .map(|c| c.id.as_str())
            .collect();
        o.require(!coalgebra.is_empty(), || {
            format!("{}: coalgebra level did not run", r.fixture)
        });
        for id in coalgebra {
            o.below(r, Level::Coalgebra, id, 1e-9);
        }
    }
    o
}

fn criterion3(corpus: &[Fixture], reports: &[SuiteReport]) -> Outcome {
    let mut o = Outcome::new();
    for (f, r) in corpus.iter().zip(reports) {
        for (id, bound) in [
            ("L_eq_Lhat", 1e-10),
            ("N_L_commute", 1e-10),
            ("E_in_N_tensor_L", 1e-10),
            ("kappa_solve", 1e-10),
            ("kappa_anti_multiplicative", 1e-9),
            ("nu_solve", 1e-10),
            ("gamma_N_eq_kappa", 1e-9),
            ("polar", 1e-9),
            ("mu_normalization", 1e-9),
            ("gamma_L_relation", 1e-9),
        ] {
            o.below(r, Level::Base, id, bound);
        }
        if f.kind != FixtureKind::Example {
            o.require(int_fact(r, "dim_N") == f.units, || {
                format!("{}: dim N = {:?}, units = {:?}", f.id, r.fact("dim_N"), f.units)
            });
        }
    }
    o
}

fn criterion4(corpus: &[Fixture], reports: &[SuiteReport]) -> Outcome {
    let mut o = Outcome::new();
    for (f, r) in corpus.iter().zip(reports) {
        if f.kind == FixtureKind::Example {
            continue;
        }
        o.below(r, Level::Manageability, "cond2_grid", 1e-11);
        for id in ["cond1", "cond3a", "cond3b", "hash1", "hash2", "hash3", "slice_lemma"] {
            o.below(r, Level::Manageability, id, 1e-10);
        }
        o.below(r, Level::Manageability, "dual_candidate", 1e-12);
    }
    o
}

fn criterion5(corpus: &[Fixture], reports: &[SuiteReport], tol: &Tolerances) -> Outcome {
    let mut o = Outcome::new();
    let mut certified = 0;
    for r in reports {
        if r.skipped(Level::Antipode).is_some() {
            continue;
        }
        certified += 1;
        for id in [
            "polar",
            "S_anti_multiplicative",
            "S_star_involution",
            "W_transpose_Rhat",
            "Wtilde_partial_isometry",
            "tau_on_B",
            "tau_on_C",
        ] {
            o.below(r, Level::Antipode, id, 1e-9);
        }
    }
    let groups = corpus.iter().filter(|f| f.kind != FixtureKind::Example).count();
    o.require(certified == groups, || {
        format!("{certified} certified fixtures, expected {groups}")
    });

    let g = GroupoidSpec::cyclic(3);
    let w = groupoid_mpi(&g).expect("Z3 operator");
    match assemble_s(&w, tol) {
        Ok(s) => {
            for a in 0..3 {
                let e = Operator::matrix_unit(LegSpec::h(3), a, a);
                let inv = g.inverse(a);
                let want = Operator::matrix_unit(LegSpec::h(3), inv, inv);
                let gap = s.apply(&e).map(|x| x.rel_gap(&want)).unwrap_or(f64::INFINITY);
                o.require(gap < 1e-12, || {
                    format!("Z3: S(δ_{a}) differs from δ_{inv} by {gap:.2e}")
                });
            }
        }
        Err(e) => o.failures.push(format!("Z3: S not assembled: {e}")),
    }
    o
}

fn criterion6(corpus: &[Fixture], reports: &[SuiteReport], trials: &[SuiteReport], tol: &Tolerances) -> Outcome {
    let mut o = Outcome::new();
    let fingerprint = |r: &SuiteReport| {
        let facts: Vec<(String, bool)> = r
            .facts
            .iter()
            .filter_map(|f| match f.value {
                FactValue::Bool(b) => Some((f.key.clone(), b)),
                _ => None,
            })
            .collect();
        let skips: BTreeSet<(Level, String)> = r.notes.iter().map(|n| (n.level, n.step.clone())).collect();
        (r.verdicts(), facts, skips)
    };
    o.require(trials.len() == TRIALS, || format!("{} trials", trials.len()));
    for t in trials {
        let Some(base) = reports.iter().find(|r| r.fixture == base_id(&t.fixture)) else {
            o.failures.push(format!("{}: no base fixture", t.fixture));
            continue;
        };
        o.require(fingerprint(t) == fingerprint(base), || {
            let diff: Vec<String> = t
                .verdicts()
                .iter()
                .zip(base.verdicts())
                .filter(|(a, b)| **a != *b)
                .map(|(a, _)| format!("{}/{}", a.0.name(), a.1))
                .collect();
            format!(
                "{}: verdicts differ from {} ({})",
                t.fixture,
                base.fixture,
                diff.join(", ")
            )
        });
    }

    for f in corpus {
        let twice = w_hat(&w_hat(&f.w).expect("hat")).expect("hat");
        o.require(twice == f.w, || format!("{}: hat of hat differs", f.id));
    }

    let sigma = flip(2, Flavor::H);
    let v = check_mpi_axioms(&sigma, tol).expect("flip is two-leg");
    o.require(!tol.passes(v.axioms.get("mpi1")), || "flip passes mpi1".into());

    let d = Operator::new(
        TensorSpace::single(LegSpec::h(2)),
        mpi_lab_core::CMat::from_diagonal(&mpi_lab_core::CVec::from_vec(vec![
            C64::new(0.5, 0.0),
            C64::new(1.0, 0.0),
        ])),
    )
    .expect("diagonal operator");
    o.require(!is_partial_isometry(&d, tol).flag, || {
        "diag(0.5, 1) is a partial isometry".into()
    });

    let mut m = matrix_unit_example().into_matrix();
    m[(2, 0)] = C64::new(0.9, 0.0);
    let corrupted = Operator::new(TensorSpace::h_power(2, 2), m).expect("corrupted example");
    let pi = is_partial_isometry(&corrupted, tol);
    o.require(!pi.flag && pi.residual > 1e-2, || {
        format!("corrupted example: partial isometry residual {:.2e}", pi.residual)
    });
    o
}

fn criterion7() -> Outcome {
    let mut o = Outcome::new();
    let bin = env!("CARGO_BIN_EXE_mpi-lab");
    let args = ["suite", "--corpus", "--seed", "7", "--report", "json"];
    let spawn = || {
        Command::new(bin)
            .args(args)
            .env_remove("MPI_LAB_TOL")
            .output()
            .expect("run mpi-lab")
    };
    let (a, b) = std::thread::scope(|s| {
        let h = s.spawn(spawn);
        let b = spawn();
        (h.join().expect("first run"), b)
    });
    o.require(!a.stdout.is_empty(), || "empty report".into());
    o.require(a.status.code() == b.status.code(), || "exit codes differ".into());
    o.require(a.stdout == b.stdout, || "reports differ".into());
    o.require(serde_json::from_slice::<serde_json::Value>(&a.stdout).is_ok(), || {
        "report is not JSON".into()
    });
    o
}

fn main() {
    let tol = Tolerances::default();
    let corpus = standard_corpus();
    let started = Instant::now();
    let reports: Vec<SuiteReport> = corpus.iter().map(|f| run(f, &tol)).collect();
    println!("corpus suite: {:.1}s", started.elapsed().as_secs_f64());
    let started = Instant::now();
    let trial_fixtures = conjugation_trials(TRIALS, TRIAL_SEED, &tol).expect("conjugation trials");
    let trials: Vec<SuiteReport> = trial_fixtures.iter().map(|f| run(f, &tol)).collect();
    println!("{TRIALS} conjugation trials: {:.1}s", started.elapsed().as_secs_f64());
    let everything: Vec<&SuiteReport> = reports.iter().chain(&trials).collect();

    let outcomes = [
        ("1 example reproduction", criterion1(&tol)),
        ("2 identity implication", criterion2(&everything)),
        ("3 base structure", criterion3(&corpus, &reports)),
        ("4 manageability", criterion4(&corpus, &reports)),
        ("5 antipode", criterion5(&corpus, &reports, &tol)),
        (
            "6 metamorphic and negative controls",
            criterion6(&corpus, &reports, &trials, &tol),
        ),
        ("7 determinism", criterion7()),
    ];

    let mut unexpected = Vec::new();
    for (name, o) in &outcomes {
        if o.failures.is_empty() {
            println!("PASS  criterion {name}");
            continue;
        }
        let known = o.failures.iter().filter(|f| is_known(f)).count();
        println!(
            "FAIL  criterion {name}: {} failures ({known} on the matrix-unit example and its conjugates)",
            o.failures.len()
        );
        let mut grouped: BTreeMap<String, usize> = BTreeMap::new();
        for f in &o.failures {
            *grouped.entry(summary_key(f)).or_default() += 1;
            if !is_known(f) {
                unexpected.push(format!("criterion {name}: {f}"));
            }
        }
        for (key, count) in grouped {
            println!("        {key} ({count}x)");
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures:\n{}", unexpected.join("\n"));
}
