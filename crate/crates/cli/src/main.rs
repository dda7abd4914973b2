//! `mpi-lab`: check multiplicative partial isometries from JSON files.

mod io;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpi_lab_core::axioms::two_leg_h_dim;
use mpi_lab_core::corpus::{conjugation_trials, group_mpu, groupoid_mpi, matrix_unit_example, standard_corpus};
use mpi_lab_core::manage::validate_q;
use mpi_lab_core::suite::{run_suite, Level, SuiteReport};
use mpi_lab_core::Tolerances;

use io::InputError;
use report::Format;

#[derive(Parser)]
#[command(name = "mpi-lab", version, about = "Checks for multiplicative partial isometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Last level to run; earlier levels always run.
    #[arg(long, default_value = "all", value_parser = parse_level)]
    level: Level,
    /// Residual pass threshold.
    #[arg(long, env = "MPI_LAB_TOL")]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    report: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include per-check wall times.
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check levels on one operator.
    Check {
        operator: PathBuf,
        /// Positive invertible Q on the first leg.
        #[arg(long)]
        q: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Write a generated operator as JSON.
    Gen {
        #[command(subcommand)]
        what: GenWhat,
    },
    /// Run the built-in corpus.
    Suite {
        #[arg(long, required = true)]
        corpus: bool,
        /// Also run this many seeded unitary conjugations of corpus fixtures.
        #[arg(long, default_value_t = 0)]
        conjugations: usize,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Subcommand)]
enum GenWhat {
    /// The two-dimensional matrix-unit example.
    Example {
        #[arg(long)]
        out: PathBuf,
    },
    /// The regular operator of a group given by its Cayley table.
    Group {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// The regular operator of a groupoid.
    Groupoid {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_level(s: &str) -> Result<Level, String> {
    Level::parse(s)
        .ok_or_else(|| format!("unknown level {s:?}, expected axioms|coalgebra|base|manageability|antipode|all"))
}

enum Failure {
    Input(InputError),
    Checks,
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, InputError> {
    match tol {
        None => Ok(Tolerances::default()),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Tolerances::default().with_residual(t)),
        Some(t) => Err(InputError::Usage(format!(
            "tolerance must be positive and finite, got {t}"
        ))),
    }
}

fn emit(reports: &[SuiteReport], opts: &RunOpts) -> Result<(), Failure> {
    let text = match opts.report {
        Format::Json => report::to_json(reports, opts.seed, opts.timings),
        Format::Text => report::to_text(reports, opts.seed, opts.timings),
    };
    match &opts.out {
        Some(path) => io::write_file(path, &text)?,
        None => print!("{text}"),
    }
    if reports.iter().all(SuiteReport::passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn fixture_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn check(operator: &Path, q: Option<&Path>, opts: &RunOpts) -> Result<(), Failure> {
    let tol = tolerances(opts.tol)?;
    let w = io::load_operator(operator)?;
    let n = two_leg_h_dim(&w).map_err(|e| InputError::Usage(format!("{}: {e}", operator.display())))?;
    let q = match q {
        Some(path) => {
            let q = io::load_operator(path)?;
            validate_q(&q, n, &tol).map_err(|e| InputError::Usage(format!("{}: {e}", path.display())))?;
            Some(q)
        }
        None => None,
    };
    let r = run_suite(&fixture_name(operator), &w, q.as_ref(), opts.level, &tol);
    emit(&[r], opts)
}

fn suite(conjugations: usize, opts: &RunOpts) -> Result<(), Failure> {
    let tol = tolerances(opts.tol)?;
    let mut fixtures = standard_corpus();
    fixtures.extend(
        conjugation_trials(conjugations, opts.seed, &tol)
            .map_err(|e| InputError::Usage(format!("conjugation trials: {e}")))?,
    );
    let reports: Vec<SuiteReport> = fixtures
        .iter()
        .map(|f| run_suite(&f.id, &f.w, f.q.as_ref(), opts.level, &tol))
        .collect();
    emit(&reports, opts)
}

fn gen(what: &GenWhat) -> Result<(), Failure> {
    let (w, out) = match what {
        GenWhat::Example { out } => (matrix_unit_example(), out),
        GenWhat::Group { table, out } => {
            let t = io::load_group_table(table)?;
            let w = group_mpu(&t).map_err(|e| InputError::Usage(format!("{}: {e}", table.display())))?;
            (w, out)
        }
        GenWhat::Groupoid { spec, out } => {
            let g = io::load_groupoid_spec(spec)?;
            let w = groupoid_mpi(&g).map_err(|e| InputError::Usage(format!("{}: {e}", spec.display())))?;
            (w, out)
        }
    };
    io::write_file(out, &io::operator_to_json(&w))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { operator, q, opts } => check(operator, q.as_deref(), opts),
        Command::Gen { what } => gen(what),
        Command::Suite { conjugations, opts, .. } => suite(*conjugations, opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("mpi-lab: {e}");
            ExitCode::from(2)
        }
    }
}
