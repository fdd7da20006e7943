//! Command-line front end.
//!
//! ```text
//! coercive-bvp solve|sweep|validate|spectrum|oracle --problem <path> [--param <spec>]
//!     [--tol <real>] [--max-iter <int>] [--seed <int>] --out <dir>
//! coercive-bvp bundle --out <dir>
//! ```
//!
//! Exit status: 0 success, 1 failed validation, 2 solver non-convergence,
//! 3 I/O or schema error.

mod param;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

pub use param::{Direction, ParamSpec, Schedule};

use crate::analysis::{
    apriori_bound, continuation_run, emden_coercivity_bound, positivity_check, validate_assumptions, AprioriBound,
    AssumptionReport, ContinuationOptions, EmdenBound, PositivityCheck, Sampling,
};
use crate::emden::{build_matrices, nontriviality_check, NontrivialityCheck};
use crate::error::{Error, Result};
use crate::grid::equivalence_constants;
use crate::linalg::SymTridiagonal;
use crate::problems::{write_bundled, Problem};
use crate::solver::{
    minimize, oracle_minimize, verify_critical_point, CriticalPointCheck, SolveOptions, SolveReport, Variational,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Minimize the action for one parameter.
    Solve,
    /// Continuation along a parameter sequence.
    Sweep,
    /// Sample the structural assumptions.
    Validate,
    /// Eigenvalues of the quadratic part.
    Spectrum,
    /// Compare the solver with exhaustive grid search (T <= 4).
    Oracle,
    /// Write the bundled example problems.
    Bundle,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "coercive-bvp",
    version,
    about = "Variational solver for parameter-dependent discrete boundary value problems"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Parameter: `0.5`, `const:c`, `values:a,b,..`, `file:path` or
    /// `seq:base=..,dir=..|random,count=..,schedule=harmonic|geometric:q`.
    #[arg(long)]
    pub param: Option<ParamSpec>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Seed for every randomized choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Start every sweep step from zero instead of the previous minimizer.
    #[arg(long)]
    pub cold: bool,
    /// Solve Emden problems whose quadratic part is not positive definite.
    #[arg(long)]
    pub allow_indefinite: bool,
    /// Oracle search box; defaults to the a-priori bound.
    #[arg(long)]
    pub box_radius: Option<f64>,
    /// Oracle grid points per axis.
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

impl RunConfig {
    pub fn new(command: Command, problem: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            problem: Some(problem.into()),
            param: None,
            tol: 1e-10,
            max_iter: 500,
            seed: 0,
            out: out.into(),
            cold: false,
            allow_indefinite: false,
            box_radius: None,
            points: 21,
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            allow_indefinite: self.allow_indefinite,
            ..Default::default()
        }
    }

    fn load(&self) -> Result<Problem> {
        let path = self
            .problem
            .as_ref()
            .ok_or_else(|| Error::schema("problem", "--problem is required"))?;
        Problem::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
            other => other,
        })
    }

    fn param(&self, default: &str) -> Result<ParamSpec> {
        match &self.param {
            Some(p) => Ok(p.clone()),
            None => default.parse(),
        }
    }
}

/// Exit status and a one-line summary for stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub message: String,
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotConverged { .. } | Error::Divergence { .. } | Error::Quadrature { .. } => EXIT_NOT_CONVERGED,
        Error::Precondition(_) | Error::UnsupportedSize(_) => EXIT_VALIDATION,
        _ => EXIT_IO,
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    kind: &'static str,
    horizon: usize,
    param: &'a [f64],
    report: &'a SolveReport,
    critical_point: CriticalPointCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    positivity: Option<PositivityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nontriviality: Option<NontrivialityCheck>,
}

fn kind_name(prob: &Problem) -> &'static str {
    match prob {
        Problem::Dirichlet(_) => "dirichlet",
        Problem::Emden(_) => "emden",
    }
}

fn run_solve(cfg: &RunConfig, prob: &Problem) -> Result<Outcome> {
    let u = cfg.param("0")?.single(prob.horizon(), prob.m_param(), cfg.seed)?;
    let report = minimize(prob, &u, &cfg.solve_options())?;
    let critical_point = verify_critical_point(prob, &report.minimizer, &u, cfg.tol)?;
    let (positivity, nontriviality) = match prob {
        Problem::Dirichlet(_) => (Some(positivity_check(&report.minimizer)?), None),
        Problem::Emden(e) => (None, Some(nontriviality_check(e, &report.minimizer, &u, cfg.tol)?)),
    };
    write_json(
        &cfg.out.join("report.json"),
        &SolveOutput {
            kind: kind_name(prob),
            horizon: prob.horizon(),
            param: u.values(),
            report: &report,
            critical_point,
            positivity,
            nontriviality,
        },
    )?;
    let res = prob.residual_at(report.minimizer.interior(), &u);
    write_csv(
        &cfg.out.join("solution.csv"),
        &["k", "x", "residual"],
        report
            .minimizer
            .interior()
            .iter()
            .zip(&res)
            .enumerate()
            .map(|(i, (x, r))| vec![(i + 1).to_string(), num(*x), num(*r)]),
    )?;
    let msg = format!(
        "objective {:e}, residual {:e}, {} iterations",
        report.objective, report.residual_inf_norm, report.iterations
    );
    Ok(if report.converged {
        Outcome {
            code: EXIT_OK,
            message: msg,
        }
    } else {
        Outcome {
            code: EXIT_NOT_CONVERGED,
            message: format!("not converged: {msg}"),
        }
    })
}

fn run_sweep(cfg: &RunConfig, prob: &Problem) -> Result<Outcome> {
    let seq =
        cfg.param("seq:base=0,dir=1,count=20,schedule=harmonic")?
            .sequence(prob.horizon(), prob.m_param(), cfg.seed)?;
    let opts = ContinuationOptions {
        warm_start: !cfg.cold,
        solve: cfg.solve_options(),
    };
    let report = continuation_run(prob, &seq, &opts)?;
    let mut csv = BufWriter::new(File::create(cfg.out.join("continuation.csv"))?);
    report.write_csv(&mut csv)?;
    write_json(&cfg.out.join("summary.json"), &report.summary())?;
    Ok(match report.aborted_at {
        Some(step) => Outcome {
            code: EXIT_NOT_CONVERGED,
            message: format!("sweep aborted: step {step} did not converge"),
        },
        None => Outcome {
            code: EXIT_OK,
            message: format!(
                "{} steps, final distance {:e}, convergence observed: {}",
                report.steps.len(),
                report.final_distance().unwrap_or(f64::NAN),
                report.convergence_observed
            ),
        },
    })
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    #[serde(flatten)]
    report: &'a AssumptionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    apriori_bound: Option<AprioriBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coercivity_bound: Option<EmdenBound>,
}

fn run_validate(cfg: &RunConfig, prob: &Problem) -> Result<Outcome> {
    let report = validate_assumptions(prob, &Sampling::with_seed(cfg.seed))?;
    let (apriori, coercivity) = match prob {
        Problem::Dirichlet(d) => (apriori_bound(d).ok(), None),
        Problem::Emden(e) => (None, emden_coercivity_bound(e, None).ok()),
    };
    write_json(
        &cfg.out.join("assumptions.json"),
        &ValidateOutput {
            report: &report,
            apriori_bound: apriori,
            coercivity_bound: coercivity,
        },
    )?;
    let failed = report.existence_failures();
    let other: Vec<&str> = report
        .entries
        .iter()
        .filter(|e| e.status == crate::analysis::Status::Fails && !failed.contains(&e.id.as_str()))
        .map(|e| e.id.as_str())
        .collect();
    Ok(if failed.is_empty() {
        Outcome {
            code: EXIT_OK,
            message: if other.is_empty() {
                "no assumption failed".into()
            } else {
                format!("existence assumptions hold; also failed: {}", other.join(", "))
            },
        }
    } else {
        Outcome {
            code: EXIT_VALIDATION,
            message: format!("failed: {}", failed.join(", ")),
        }
    })
}

fn run_spectrum(cfg: &RunConfig, prob: &Problem) -> Result<Outcome> {
    let eigs = match prob {
        Problem::Emden(e) => crate::emden::spectrum(e),
        Problem::Dirichlet(d) => {
            let t = d.horizon();
            let diag = (1..=t).map(|k| d.p(k) + d.p(k + 1)).collect();
            let off = (1..t).map(|k| -d.p(k + 1)).collect();
            SymTridiagonal::new(diag, off)?.eigenvalues()
        }
    };
    write_csv(
        &cfg.out.join("spectrum.csv"),
        &["index", "eigenvalue"],
        eigs.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v)]),
    )?;
    let (lo, hi) = match prob {
        Problem::Emden(e) => {
            let m = build_matrices(e);
            (m.lambda_min, m.lambda_max)
        }
        Problem::Dirichlet(_) => (eigs[0], eigs[eigs.len() - 1]),
    };
    Ok(Outcome {
        code: EXIT_OK,
        message: format!(
            "lambda_min,lambda_max,positive_definite\n{},{},{}",
            num(lo),
            num(hi),
            lo > 0.0
        ),
    })
}

fn default_box(prob: &Problem) -> Option<f64> {
    match prob {
        // the energy bound caps the euclidean norm at bound / gamma
        Problem::Dirichlet(d) => {
            let b = apriori_bound(d).ok()?;
            let (gamma, _) = equivalence_constants(d.horizon()).ok()?;
            Some(b.bound / gamma)
        }
        Problem::Emden(e) => emden_coercivity_bound(e, None).ok().map(|b| b.solution_bound),
    }
}

fn run_oracle(cfg: &RunConfig, prob: &Problem) -> Result<Outcome> {
    let u = cfg.param("0")?.single(prob.horizon(), prob.m_param(), cfg.seed)?;
    let radius = match cfg.box_radius {
        Some(r) => r,
        None => default_box(prob).filter(|r| *r > 0.0).unwrap_or(1.0) * 1.05,
    };
    let opts = cfg.solve_options();
    let oracle = oracle_minimize(prob, &u, radius, cfg.points, &opts)?;
    let solver = minimize(prob, &u, &opts)?;
    let mut rows = vec![
        vec!["objective".to_string(), num(solver.objective), num(oracle.objective)],
        vec![
            "residual_inf_norm".to_string(),
            num(solver.residual_inf_norm),
            num(oracle.residual_inf_norm),
        ],
    ];
    for (k, (a, b)) in solver
        .minimizer
        .interior()
        .iter()
        .zip(oracle.minimizer.interior())
        .enumerate()
    {
        rows.push(vec![format!("x({})", k + 1), num(*a), num(*b)]);
    }
    write_csv(&cfg.out.join("oracle.csv"), &["quantity", "solver", "oracle"], rows)?;
    let gap = solver.objective - oracle.objective;
    Ok(Outcome {
        code: if solver.converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
        message: format!("box radius {radius:e}; solver minus oracle objective {gap:e}"),
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    std::fs::create_dir_all(&cfg.out)?;
    if cfg.command == Command::Bundle {
        let paths = write_bundled(&cfg.out)?;
        return Ok(Outcome {
            code: EXIT_OK,
            message: format!("wrote {} problems", paths.len()),
        });
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::schema("tol", format!("must be positive, got {}", cfg.tol)));
    }
    let prob = cfg.load()?;
    match cfg.command {
        Command::Solve => run_solve(cfg, &prob),
        Command::Sweep => run_sweep(cfg, &prob),
        Command::Validate => run_validate(cfg, &prob),
        Command::Spectrum => run_spectrum(cfg, &prob),
        Command::Oracle => run_oracle(cfg, &prob),
        Command::Bundle => unreachable!(),
    }
}
