//! JSON and text renderings of suite reports.

use std::fmt::Write as _;

use mpi_lab_core::suite::{FactValue, NoteKind, SuiteReport};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Serialize)]
struct TolJson {
    residual: f64,
    rank: f64,
    pd: f64,
}

#[derive(Serialize)]
struct CheckJson<'a> {
    level: &'a str,
    id: &'a str,
    pass: bool,
    residual: Option<f64>,
    /// Seconds; only with `--timings`.
    wall_time: Option<f64>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FactJsonValue {
    Bool(bool),
    Int(usize),
    Real(Option<f64>),
}

#[derive(Serialize)]
struct FactJson<'a> {
    level: &'a str,
    key: &'a str,
    value: FactJsonValue,
}

#[derive(Serialize)]
struct NoteJson<'a> {
    level: &'a str,
    step: &'a str,
    reason: &'a str,
}

#[derive(Serialize)]
struct FixtureJson<'a> {
    fixture: &'a str,
    verdict: &'static str,
    checks: Vec<CheckJson<'a>>,
    facts: Vec<FactJson<'a>>,
    skipped: Vec<NoteJson<'a>>,
    errors: Vec<NoteJson<'a>>,
}

#[derive(Serialize)]
struct RunJson<'a> {
    version: &'static str,
    seed: u64,
    tolerances: TolJson,
    verdict: &'static str,
    fixtures: Vec<FixtureJson<'a>>,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn fixture_json(r: &SuiteReport, timings: bool) -> FixtureJson<'_> {
    let notes = |kind: NoteKind| {
        r.notes
            .iter()
            .filter(|n| n.kind == kind)
            .map(|n| NoteJson {
                level: n.level.name(),
                step: &n.step,
                reason: &n.reason,
            })
            .collect()
    };
    FixtureJson {
        fixture: &r.fixture,
        verdict: verdict(r.passed()),
        checks: r
            .checks
            .iter()
            .map(|c| CheckJson {
                level: c.level.name(),
                id: &c.id,
                pass: c.pass,
                residual: finite(c.residual),
                wall_time: timings.then_some(c.wall_time.as_secs_f64()),
            })
            .collect(),
        facts: r
            .facts
            .iter()
            .map(|f| FactJson {
                level: f.level.name(),
                key: &f.key,
                value: match f.value {
                    FactValue::Bool(b) => FactJsonValue::Bool(b),
                    FactValue::Int(k) => FactJsonValue::Int(k),
                    FactValue::Real(x) => FactJsonValue::Real(finite(x)),
                },
            })
            .collect(),
        skipped: notes(NoteKind::Skipped),
        errors: notes(NoteKind::Error),
    }
}

/// All reports share the tolerances of the first one.
pub fn to_json(reports: &[SuiteReport], seed: u64, timings: bool) -> String {
    let tol = reports.first().map(|r| r.tolerances).unwrap_or_default();
    let run = RunJson {
        version: VERSION,
        seed,
        tolerances: TolJson {
            residual: tol.residual,
            rank: tol.rank,
            pd: tol.pd,
        },
        verdict: verdict(reports.iter().all(SuiteReport::passed)),
        fixtures: reports.iter().map(|r| fixture_json(r, timings)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&run).expect("report serializes");
    s.push('\n');
    s
}

pub fn to_text(reports: &[SuiteReport], seed: u64, timings: bool) -> String {
    let mut s = String::new();
    let tol = reports.first().map(|r| r.tolerances).unwrap_or_default();
    let _ = writeln!(
        s,
        "mpi-lab {VERSION}  seed {seed}  tol residual {:e} rank {:e} pd {:e}",
        tol.residual, tol.rank, tol.pd
    );
    for r in reports {
        let _ = writeln!(s, "\n== {} : {}", r.fixture, verdict(r.passed()).to_uppercase());
        for c in &r.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            let _ = write!(s, "  {mark} {:<14} {:<36} {:.3e}", c.level.name(), c.id, c.residual);
            if timings {
                let _ = write!(s, "  {:.3}s", c.wall_time.as_secs_f64());
            }
            s.push('\n');
        }
        for f in &r.facts {
            let v = match f.value {
                FactValue::Bool(b) => b.to_string(),
                FactValue::Int(k) => k.to_string(),
                FactValue::Real(x) => format!("{x:.6e}"),
            };
            let _ = writeln!(s, "  fact {:<14} {} = {v}", f.level.name(), f.key);
        }
        for n in &r.notes {
            let kind = match n.kind {
                NoteKind::Skipped => "skip",
                NoteKind::Error => "ERROR",
            };
            let _ = writeln!(s, "  {kind} {:<14} {}: {}", n.level.name(), n.step, n.reason);
        }
    }
    let all = reports.iter().all(SuiteReport::passed);
    let _ = writeln!(s, "\nverdict: {}", verdict(all).to_uppercase());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpi_lab_core::corpus::matrix_unit_example;
    use mpi_lab_core::suite::{run_suite, Level};
    use mpi_lab_core::Tolerances;

    fn example_report() -> SuiteReport {
        run_suite(
            "example",
            &matrix_unit_example(),
            None,
            Level::Antipode,
            &Tolerances::default(),
        )
    }

    #[test]
    fn json_has_null_wall_time_without_timings() {
        let r = example_report();
        let v: serde_json::Value = serde_json::from_str(&to_json(std::slice::from_ref(&r), 0, false)).unwrap();
        let checks = v["fixtures"][0]["checks"].as_array().unwrap();
        assert!(!checks.is_empty());
        assert!(checks.iter().all(|c| c["wall_time"].is_null()));
        assert_eq!(v["version"], VERSION);
    }

    #[test]
    fn json_with_timings_has_numbers() {
        let r = example_report();
        let v: serde_json::Value = serde_json::from_str(&to_json(std::slice::from_ref(&r), 0, true)).unwrap();
        assert!(v["fixtures"][0]["checks"][0]["wall_time"].is_number());
    }

    #[test]
    fn skip_reason_reaches_json() {
        let r = example_report();
        let v: serde_json::Value = serde_json::from_str(&to_json(std::slice::from_ref(&r), 0, false)).unwrap();
        let skipped = v["fixtures"][0]["skipped"].as_array().unwrap();
        assert!(skipped
            .iter()
            .any(|n| n["level"] == "manageability" && n["reason"] == mpi_lab_core::suite::NO_CERTIFIED_Q));
    }

    #[test]
    fn text_lists_every_check() {
        let r = example_report();
        let t = to_text(std::slice::from_ref(&r), 0, false);
        for c in &r.checks {
            assert!(t.contains(&c.id), "{}", c.id);
        }
    }
}
