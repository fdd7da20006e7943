//! Minimisation of coercive action functionals.
//!
//! [`minimize`] runs a damped Newton method with Armijo backtracking. When the
//! Newton system is singular or its solution is not a descent direction
//! (indefinite Hessian) the step falls back to steepest descent. Objective
//! increments along a step are integrated directly, so the sufficient-decrease
//! test stays meaningful when the residual is close to round-off.

use serde::{Deserialize, Serialize};

use crate::emden::{self, build_matrices};
use crate::error::{check_len, Error, Result};
use crate::functional::{self, ActionEvaluation, DEFAULT_FD_STEP};
use crate::grid::{energy_norm, euclidean_norm, BoundaryKind, GridFunction};
use crate::problems::{DirichletProblem, EmdenProblem, Nonlinearity, ParameterFunction, Problem};
use crate::quadrature;

/// A problem whose solutions are the critical points of an action functional
/// over the `T` interior unknowns.
pub trait Variational: Sync {
    fn horizon(&self) -> usize;
    fn nonlinearity(&self) -> &Nonlinearity;
    fn rhs(&self) -> &[f64];
    fn boundary_kind(&self) -> BoundaryKind;
    fn action_at(&self, x: &[f64], u: &ParameterFunction, tol: f64) -> Result<ActionEvaluation>;
    /// `∇J_u(x) = −residual`.
    fn residual_at(&self, x: &[f64], u: &ParameterFunction) -> Vec<f64>;
    /// `J_u(x + d) − J_u(x)` without cancellation.
    fn increment_at(&self, x: &[f64], d: &[f64], u: &ParameterFunction) -> Result<f64>;
    /// Solves `H(x) s = rhs` with the Hessian of `J_u` at `x`.
    fn newton_solve(&self, x: &[f64], u: &ParameterFunction, rhs: &[f64], fd_step: f64) -> Result<Vec<f64>>;
    /// Norm used to compare solutions.
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
    /// Checks run once before a solve.
    fn precheck(&self, _opts: &SolveOptions) -> Result<()> {
        Ok(())
    }

    fn grid(&self, interior: &[f64]) -> GridFunction {
        match self.boundary_kind() {
            BoundaryKind::DirichletZero => GridFunction::from_interior(interior),
            BoundaryKind::PeriodicType => GridFunction::periodic(interior).expect("T >= 1"),
        }
    }
}

impl Variational for DirichletProblem {
    fn horizon(&self) -> usize {
        DirichletProblem::horizon(self)
    }
    fn nonlinearity(&self) -> &Nonlinearity {
        self.f()
    }
    fn rhs(&self) -> &[f64] {
        self.g()
    }
    fn boundary_kind(&self) -> BoundaryKind {
        BoundaryKind::DirichletZero
    }
    fn action_at(&self, x: &[f64], u: &ParameterFunction, tol: f64) -> Result<ActionEvaluation> {
        functional::dirichlet_action_slice(self, x, u, tol)
    }
    fn residual_at(&self, x: &[f64], u: &ParameterFunction) -> Vec<f64> {
        functional::dirichlet_residual_slice(self, x, u)
    }
    fn increment_at(&self, x: &[f64], d: &[f64], u: &ParameterFunction) -> Result<f64> {
        functional::dirichlet_increment_slice(self, x, d, u)
    }
    fn newton_solve(&self, x: &[f64], u: &ParameterFunction, rhs: &[f64], fd_step: f64) -> Result<Vec<f64>> {
        functional::dirichlet_hessian_slice(self, x, u, fd_step).solve(rhs)
    }
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        energy_norm(&d)
    }
    fn precheck(&self, _opts: &SolveOptions) -> Result<()> {
        if !self.satisfies_a3() {
            log::warn!("min p = {} <= 0: the action need not be coercive", self.min_p());
        }
        Ok(())
    }
}

impl Variational for EmdenProblem {
    fn horizon(&self) -> usize {
        EmdenProblem::horizon(self)
    }
    fn nonlinearity(&self) -> &Nonlinearity {
        self.f()
    }
    fn rhs(&self) -> &[f64] {
        self.g()
    }
    fn boundary_kind(&self) -> BoundaryKind {
        BoundaryKind::PeriodicType
    }
    fn action_at(&self, x: &[f64], u: &ParameterFunction, tol: f64) -> Result<ActionEvaluation> {
        emden::emden_action_slice(self, x, u, tol)
    }
    fn residual_at(&self, x: &[f64], u: &ParameterFunction) -> Vec<f64> {
        emden::emden_residual_slice(self, x, u)
    }
    fn increment_at(&self, x: &[f64], d: &[f64], u: &ParameterFunction) -> Result<f64> {
        emden::emden_increment_slice(self, x, d, u)
    }
    fn newton_solve(&self, x: &[f64], u: &ParameterFunction, rhs: &[f64], fd_step: f64) -> Result<Vec<f64>> {
        emden::emden_hessian_slice(self, x, u, fd_step).solve(rhs)
    }
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        euclidean_norm(&d)
    }
    fn precheck(&self, opts: &SolveOptions) -> Result<()> {
        let lambda_min = build_matrices(self).lambda_min;
        if lambda_min <= 0.0 && !opts.allow_indefinite {
            return Err(Error::Precondition(format!(
                "M + Q is not positive definite (lambda_min = {lambda_min:e}); set allow_indefinite to override"
            )));
        }
        Ok(())
    }
}

macro_rules! dispatch {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            Problem::Dirichlet($p) => $e,
            Problem::Emden($p) => $e,
        }
    };
}

impl Variational for Problem {
    fn horizon(&self) -> usize {
        dispatch!(self, p => Variational::horizon(p))
    }
    fn nonlinearity(&self) -> &Nonlinearity {
        dispatch!(self, p => p.f())
    }
    fn rhs(&self) -> &[f64] {
        dispatch!(self, p => p.g())
    }
    fn boundary_kind(&self) -> BoundaryKind {
        dispatch!(self, p => p.boundary_kind())
    }
    fn action_at(&self, x: &[f64], u: &ParameterFunction, tol: f64) -> Result<ActionEvaluation> {
        dispatch!(self, p => p.action_at(x, u, tol))
    }
    fn residual_at(&self, x: &[f64], u: &ParameterFunction) -> Vec<f64> {
        dispatch!(self, p => p.residual_at(x, u))
    }
    fn increment_at(&self, x: &[f64], d: &[f64], u: &ParameterFunction) -> Result<f64> {
        dispatch!(self, p => p.increment_at(x, d, u))
    }
    fn newton_solve(&self, x: &[f64], u: &ParameterFunction, rhs: &[f64], fd_step: f64) -> Result<Vec<f64>> {
        dispatch!(self, p => p.newton_solve(x, u, rhs, fd_step))
    }
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        dispatch!(self, p => p.distance(a, b))
    }
    fn precheck(&self, opts: &SolveOptions) -> Result<()> {
        dispatch!(self, p => p.precheck(opts))
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop once `max |residual| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point; the zero function when `None`.
    pub initial: Option<GridFunction>,
    pub armijo: f64,
    pub backtrack: f64,
    pub fd_step: f64,
    /// Solve Emden problems even when `M + Q` is not positive definite.
    pub allow_indefinite: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 500,
            initial: None,
            armijo: 1e-4,
            backtrack: 0.5,
            fd_step: DEFAULT_FD_STEP,
            allow_indefinite: false,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn starting_at(mut self, initial: GridFunction) -> Self {
        self.initial = Some(initial);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Objective accumulated from accepted increments.
    pub objective: f64,
    pub step: f64,
    pub newton: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub minimizer: GridFunction,
    pub objective: f64,
    pub residual_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method_trace: Vec<TraceEntry>,
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

const MAX_BACKTRACKS: usize = 80;

pub fn minimize<P: Variational + ?Sized>(prob: &P, u: &ParameterFunction, opts: &SolveOptions) -> Result<SolveReport> {
    let t = prob.horizon();
    check_len("u", t, u.horizon())?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    prob.precheck(opts)?;

    let mut x = match &opts.initial {
        Some(g) => {
            if g.kind() != prob.boundary_kind() {
                return Err(Error::invalid("initial guess has the wrong boundary kind"));
            }
            check_len("initial", t, g.horizon())?;
            g.interior().to_vec()
        }
        None => vec![0.0; t],
    };

    let mut objective = prob.action_at(&x, u, quadrature::DEFAULT_TOL)?.value;
    if !objective.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut trace = vec![TraceEntry {
        iteration: 0,
        objective,
        step: 0.0,
        newton: false,
    }];

    let mut iterations = 0;
    let mut converged = false;
    let mut res = prob.residual_at(&x, u);
    for it in 1..=opts.max_iter {
        if inf_norm(&res) <= opts.tol {
            converged = true;
            break;
        }
        // descent direction d with slope ∇J·d = -res·d
        let newton = prob
            .newton_solve(&x, u, &res, opts.fd_step)
            .ok()
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .map(|d| {
                let slope = -res.iter().zip(&d).map(|(r, v)| r * v).sum::<f64>();
                (d, slope)
            })
            .filter(|(_, slope)| *slope < 0.0);
        let (dir, slope, is_newton) = match newton {
            Some((d, s)) => (d, s, true),
            None => {
                let s = -res.iter().map(|r| r * r).sum::<f64>();
                (res.clone(), s, false)
            }
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = dir.iter().map(|v| step * v).collect();
            match prob.increment_at(&x, &trial, u) {
                Ok(inc) if inc.is_finite() && inc <= opts.armijo * step * slope => {
                    accepted = Some((trial, inc));
                    break;
                }
                Ok(_) => {}
                Err(Error::Quadrature { .. }) => {}
                Err(e) => return Err(e),
            }
            step *= opts.backtrack;
        }
        let Some((trial, inc)) = accepted else {
            log::debug!("line search stalled at iteration {it}, residual {:e}", inf_norm(&res));
            break;
        };
        for (xi, di) in x.iter_mut().zip(&trial) {
            *xi += di;
        }
        objective += inc;
        iterations = it;
        trace.push(TraceEntry {
            iteration: it,
            objective,
            step,
            newton: is_newton,
        });
        res = prob.residual_at(&x, u);
    }

    let residual_inf_norm = inf_norm(&res);
    converged |= residual_inf_norm <= opts.tol;
    let final_objective = prob.action_at(&x, u, quadrature::DEFAULT_TOL)?.value;
    if !final_objective.is_finite() {
        return Err(Error::Divergence { iteration: iterations });
    }
    Ok(SolveReport {
        minimizer: prob.grid(&x),
        objective: final_objective,
        residual_inf_norm,
        iterations,
        converged,
        method_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointCheck {
    pub is_critical: bool,
    pub residual_inf_norm: f64,
    pub objective: f64,
}

pub fn verify_critical_point<P: Variational + ?Sized>(
    prob: &P,
    x: &GridFunction,
    u: &ParameterFunction,
    tol: f64,
) -> Result<CriticalPointCheck> {
    check_len("x", prob.horizon(), x.horizon())?;
    check_len("u", prob.horizon(), u.horizon())?;
    if x.kind() != prob.boundary_kind() {
        return Err(Error::invalid("grid function has the wrong boundary kind"));
    }
    let r = inf_norm(&prob.residual_at(x.interior(), u));
    Ok(CriticalPointCheck {
        is_critical: r <= tol,
        residual_inf_norm: r,
        objective: prob.action_at(x.interior(), u, quadrature::DEFAULT_TOL)?.value,
    })
}

/// Central differences of `J_u` built from exact increments, step `h(1 + |x_k|)`.
pub fn finite_difference_gradient<P: Variational + ?Sized>(
    prob: &P,
    x: &[f64],
    u: &ParameterFunction,
    h: f64,
) -> Result<Vec<f64>> {
    let t = prob.horizon();
    (0..t)
        .map(|k| {
            let step = h * (1.0 + x[k].abs());
            let mut e = vec![0.0; t];
            e[k] = step;
            let fwd = prob.increment_at(x, &e, u)?;
            e[k] = -step;
            let bwd = prob.increment_at(x, &e, u)?;
            Ok((fwd - bwd) / (2.0 * step))
        })
        .collect()
}

pub const ORACLE_MAX_T: usize = 4;
pub const ORACLE_MAX_POINTS: usize = 41;

/// Exhaustive search of `J_u` over the tensor grid on `[-box_radius, box_radius]^T`
/// followed by a Newton polish from the best grid point.
pub fn oracle_minimize<P: Variational + ?Sized>(
    prob: &P,
    u: &ParameterFunction,
    box_radius: f64,
    points_per_axis: usize,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let t = prob.horizon();
    if t > ORACLE_MAX_T {
        return Err(Error::UnsupportedSize(format!(
            "grid-search oracle supports T <= {ORACLE_MAX_T}, got T = {t}"
        )));
    }
    if !(2..=ORACLE_MAX_POINTS).contains(&points_per_axis) {
        return Err(Error::invalid(format!(
            "points per axis must lie in 2..={ORACLE_MAX_POINTS}, got {points_per_axis}"
        )));
    }
    if !(box_radius > 0.0 && box_radius.is_finite()) {
        return Err(Error::invalid(format!("box radius must be positive, got {box_radius}")));
    }
    check_len("u", t, u.horizon())?;

    let axis: Vec<f64> = (0..points_per_axis)
        .map(|i| -box_radius + 2.0 * box_radius * i as f64 / (points_per_axis - 1) as f64)
        .collect();
    let mut idx = vec![0usize; t];
    let mut point = vec![axis[0]; t];
    let mut best = (f64::INFINITY, point.clone());
    loop {
        for (p, &i) in point.iter_mut().zip(&idx) {
            *p = axis[i];
        }
        let j = prob.action_at(&point, u, quadrature::DEFAULT_TOL)?.value;
        if j < best.0 {
            best = (j, point.clone());
        }
        // odometer increment
        let mut d = 0;
        while d < t {
            idx[d] += 1;
            if idx[d] < points_per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == t {
            break;
        }
    }

    let polish_opts = SolveOptions {
        initial: Some(prob.grid(&best.1)),
        ..opts.clone()
    };
    let polished = minimize(prob, u, &polish_opts)?;
    if polished.objective <= best.0 {
        Ok(polished)
    } else {
        let x = best.1;
        Ok(SolveReport {
            minimizer: prob.grid(&x),
            objective: best.0,
            residual_inf_norm: inf_norm(&prob.residual_at(&x, u)),
            iterations: 0,
            converged: false,
            method_trace: Vec::new(),
        })
    }
}
