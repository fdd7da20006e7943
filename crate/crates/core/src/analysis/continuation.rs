//! Parameter continuation: solve along `u_1, u_2, ..., ū` and track how the
//! minimizers approach the minimizer for the limit `ū`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ParameterFunction;
use crate::quadrature;
use crate::solver::{minimize, SolveOptions, SolveReport, Variational};

#[derive(Debug, Clone)]
pub struct ContinuationOptions {
    /// Start each solve from the previous minimizer instead of zero.
    pub warm_start: bool,
    pub solve: SolveOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            warm_start: true,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    /// 1-based position in the sequence.
    pub n: usize,
    /// `sup_k |u_n(k) - ū(k)|`.
    pub sup_distance: f64,
    pub report: SolveReport,
    /// `||x_n - x̄||` in the problem's norm.
    pub distance_to_limit: f64,
    /// `J_ū(x_n)`.
    pub limit_objective: f64,
    /// Distance from `x_n` to the critical point of `J_ū` reached when
    /// starting at `x_n`; filled in when the distances do not settle.
    pub restart_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub steps: Vec<ContinuationStep>,
    /// Solve for `ū` from the zero function.
    pub limit_record: SolveReport,
    pub convergence_observed: bool,
    /// `J_ū(x̄) <= J_ū(x_n) + 1e-8` for every recorded step.
    pub limit_optimal: bool,
    /// Step whose solve did not converge; the report stops before it.
    pub aborted_at: Option<usize>,
}

pub const LIMIT_SLACK: f64 = 1e-8;

impl ContinuationReport {
    pub fn final_distance(&self) -> Option<f64> {
        self.steps.last().map(|s| s.distance_to_limit)
    }

    pub fn distances(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.distance_to_limit).collect()
    }

    /// One row per step: `n, sup_distance, objective, residual_inf_norm,
    /// iterations, distance_to_limit`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "n",
            "sup_distance",
            "objective",
            "residual_inf_norm",
            "iterations",
            "distance_to_limit",
        ])?;
        for s in &self.steps {
            out.write_record([
                s.n.to_string(),
                format!("{:.16e}", s.sup_distance),
                format!("{:.16e}", s.report.objective),
                format!("{:.16e}", s.report.residual_inf_norm),
                s.report.iterations.to_string(),
                format!("{:.16e}", s.distance_to_limit),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> ContinuationSummary {
        ContinuationSummary {
            steps: self.steps.len(),
            convergence_observed: self.convergence_observed,
            limit_optimal: self.limit_optimal,
            final_distance: self.final_distance(),
            limit_objective: self.limit_record.objective,
            limit_residual_inf_norm: self.limit_record.residual_inf_norm,
            limit_minimizer: self.limit_record.minimizer.interior().to_vec(),
            aborted_at: self.aborted_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSummary {
    pub steps: usize,
    pub convergence_observed: bool,
    pub limit_optimal: bool,
    pub final_distance: Option<f64>,
    pub limit_objective: f64,
    pub limit_residual_inf_norm: f64,
    pub limit_minimizer: Vec<f64>,
    pub aborted_at: Option<usize>,
}

/// Whole-sequence convergence as observed: the final distance is within
/// `10 tol` and the last third of the distances never grows by more than 10%
/// (plus an absolute `10 tol` floor for round-off near zero).
pub fn convergence_observed(distances: &[f64], tol: f64) -> bool {
    let Some(&last) = distances.last() else {
        return false;
    };
    let floor = 10.0 * tol;
    let start = distances.len() - distances.len().div_ceil(3);
    last <= floor && distances[start..].windows(2).all(|w| w[1] <= 1.1 * w[0] + floor)
}

/// Solves along `sequence`, whose last element is the limit `ū`.
pub fn continuation_run<P: Variational + ?Sized>(
    prob: &P,
    sequence: &[ParameterFunction],
    opts: &ContinuationOptions,
) -> Result<ContinuationReport> {
    let limit = sequence
        .last()
        .ok_or_else(|| Error::invalid("parameter sequence is empty"))?;
    let cold = SolveOptions {
        initial: None,
        ..opts.solve.clone()
    };
    let limit_record = minimize(prob, limit, &cold)?;
    if !limit_record.converged {
        return Err(Error::NotConverged {
            step: sequence.len(),
            residual: limit_record.residual_inf_norm,
            iterations: limit_record.iterations,
        });
    }
    let x_bar = limit_record.minimizer.interior().to_vec();

    let mut steps = Vec::with_capacity(sequence.len());
    let mut aborted_at = None;
    let mut previous: Option<SolveReport> = None;
    for (i, u) in sequence.iter().enumerate() {
        let solve = match (&previous, opts.warm_start) {
            (Some(prev), true) => cold.clone().starting_at(prev.minimizer.clone()),
            _ => cold.clone(),
        };
        let report = minimize(prob, u, &solve)?;
        if !report.converged {
            log::warn!(
                "continuation step {} did not converge (residual {:e})",
                i + 1,
                report.residual_inf_norm
            );
            aborted_at = Some(i + 1);
            break;
        }
        let x = report.minimizer.interior();
        steps.push(ContinuationStep {
            n: i + 1,
            sup_distance: u.sup_distance(limit),
            distance_to_limit: prob.distance(x, &x_bar),
            limit_objective: prob.action_at(x, limit, quadrature::DEFAULT_TOL)?.value,
            restart_distance: None,
            report: report.clone(),
        });
        previous = Some(report);
    }

    let distances: Vec<f64> = steps.iter().map(|s| s.distance_to_limit).collect();
    let observed = aborted_at.is_none() && convergence_observed(&distances, opts.solve.tol);
    if !observed {
        // several minimizers may compete: measure each x_n against the
        // critical point of the limit functional it flows to
        for s in &mut steps {
            let from = cold.clone().starting_at(s.report.minimizer.clone());
            let rep = minimize(prob, limit, &from)?;
            s.restart_distance = Some(prob.distance(s.report.minimizer.interior(), rep.minimizer.interior()));
        }
    }
    let limit_optimal = steps
        .iter()
        .all(|s| limit_record.objective <= s.limit_objective + LIMIT_SLACK);

    Ok(ContinuationReport {
        steps,
        limit_record,
        convergence_observed: observed,
        limit_optimal,
        aborted_at,
    })
}
