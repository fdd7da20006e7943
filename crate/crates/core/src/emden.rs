//! Discrete Emden–Fowler problem with periodic-type boundary conditions.
//!
//! With `x(0) = x(T)` and the flux identification `p(0)Δx(0) = p(T)Δx(T)`
//! the operator `x ↦ Δ(p(k−1)Δx(k−1)) + q(k)x(k)` becomes `−(M + Q)x` for
//! the structural matrix `M` (a weighted cycle Laplacian with edges
//! `(k, k+1)` of weight `p(k)` and the seam edge `(T, 1)` of weight `p(0)`)
//! and `Q = diag(−q(1), …, −q(T))`. The action is
//! `J_u(x) = ½⟨(M+Q)x, x⟩ − Σ F(k, x(k), u(k)) + Σ g(k)x(k)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::functional::{df_dy, potential_increment, primitive_f, ActionEvaluation};
use crate::grid::{euclidean_norm, BoundaryKind, GridFunction};
use crate::linalg::CyclicTridiagonal;
use crate::problems::{EmdenProblem, ParameterFunction};
use crate::quadrature;

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralMatrices {
    pub m_mat: DMatrix<f64>,
    pub q_mat: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Coercivity constant of the quadratic part, `lambda_min` of `M + Q`.
    pub a: f64,
}

impl StructuralMatrices {
    pub fn is_positive_definite(&self) -> bool {
        self.lambda_min > 0.0
    }

    pub fn sum(&self) -> DMatrix<f64> {
        &self.m_mat + &self.q_mat
    }
}

/// Assembles `M` edge by edge. For `T >= 3` this is the band-plus-corners
/// pattern; for `T = 2` the seam edge lands on the off-diagonal and for
/// `T = 1` it is a self-loop that contributes nothing.
pub fn structural_m(prob: &EmdenProblem) -> DMatrix<f64> {
    let t = prob.horizon();
    let mut m = DMatrix::zeros(t, t);
    let mut edge = |i: usize, j: usize, w: f64| {
        if i == j {
            return;
        }
        m[(i, i)] += w;
        m[(j, j)] += w;
        m[(i, j)] -= w;
        m[(j, i)] -= w;
    };
    for k in 1..t {
        edge(k - 1, k, prob.p(k));
    }
    edge(t - 1, 0, prob.p(0));
    m
}

pub fn build_matrices(prob: &EmdenProblem) -> StructuralMatrices {
    let t = prob.horizon();
    let m_mat = structural_m(prob);
    let q_mat = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(t, (1..=t).map(|k| -prob.q(k))));
    let eig = SymmetricEigen::new(&m_mat + &q_mat).eigenvalues;
    let lambda_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    StructuralMatrices {
        m_mat,
        q_mat,
        lambda_min,
        lambda_max,
        a: lambda_min,
    }
}

/// Sorted eigenvalues of `M + Q`.
pub fn spectrum(prob: &EmdenProblem) -> Vec<f64> {
    let s = build_matrices(prob);
    let mut eig: Vec<f64> = SymmetricEigen::new(s.sum()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `Δ(p(k−1)Δx(k−1)) + q(k)x(k)` with the periodic wraparound, computed from
/// the three-point stencil.
pub fn stencil(prob: &EmdenProblem, x: &[f64]) -> Vec<f64> {
    let t = prob.horizon();
    let at = |k: usize| x[(k + t - 1) % t]; // 1-based, x(0) = x(T), x(T+1) = x(1)
    (1..=t)
        .map(|k| {
            // p(T) Δx(T) is replaced by p(0) Δx(0) at the seam
            let right = if k == t { prob.p(0) } else { prob.p(k) };
            right * (at(k + 1) - at(k)) - prob.p(k - 1) * (at(k) - at(k - 1)) + prob.q(k) * at(k)
        })
        .collect()
}

fn check_emden(prob: &EmdenProblem, x: &GridFunction, u: &ParameterFunction) -> Result<()> {
    if x.kind() != BoundaryKind::PeriodicType {
        return Err(Error::invalid("Emden action needs a periodic-type grid function"));
    }
    check_len("x", prob.horizon(), x.horizon())?;
    check_len("u", prob.horizon(), u.horizon())
}

pub(crate) fn quadratic_form(prob: &EmdenProblem, x: &[f64]) -> f64 {
    let t = prob.horizon();
    let mut s = 0.0;
    for k in 1..t {
        let d = x[k] - x[k - 1];
        s += prob.p(k) * d * d;
    }
    if t >= 2 {
        let d = x[0] - x[t - 1];
        s += prob.p(0) * d * d;
    }
    for k in 1..=t {
        s -= prob.q(k) * x[k - 1] * x[k - 1];
    }
    s
}

pub(crate) fn emden_action_slice(
    prob: &EmdenProblem,
    x: &[f64],
    u: &ParameterFunction,
    tol: f64,
) -> Result<ActionEvaluation> {
    let quad = 0.5 * quadratic_form(prob, x);
    let mut pot = 0.0;
    for k in 1..=prob.horizon() {
        pot += primitive_f(prob.f(), k, x[k - 1], u.at(k), tol)?;
    }
    let lin = prob.g().iter().zip(x).map(|(g, y)| g * y).sum();
    Ok(ActionEvaluation::assemble(quad, pot, lin))
}

pub(crate) fn emden_residual_slice(prob: &EmdenProblem, x: &[f64], u: &ParameterFunction) -> Vec<f64> {
    stencil(prob, x)
        .into_iter()
        .enumerate()
        .map(|(i, s)| s + prob.f().eval(i + 1, x[i], u.at(i + 1)) - prob.g()[i])
        .collect()
}

pub(crate) fn emden_hessian_slice(
    prob: &EmdenProblem,
    x: &[f64],
    u: &ParameterFunction,
    fd_step: f64,
) -> CyclicTridiagonal {
    let t = prob.horizon();
    let right = |k: usize| if k == t { prob.p(0) } else { prob.p(k) };
    let diag = (1..=t)
        .map(|k| {
            let lap = if t == 1 { 0.0 } else { prob.p(k - 1) + right(k) };
            lap - prob.q(k) - df_dy(prob.f(), k, x[k - 1], u.at(k), fd_step)
        })
        .collect();
    let off = (1..t).map(|k| -prob.p(k)).collect();
    CyclicTridiagonal {
        diag,
        off,
        corner: if t >= 2 { -prob.p(0) } else { 0.0 },
    }
}

pub(crate) fn emden_increment_slice(prob: &EmdenProblem, x: &[f64], d: &[f64], u: &ParameterFunction) -> Result<f64> {
    let t = prob.horizon();
    // ½⟨A(x+d), x+d⟩ − ½⟨Ax, x⟩ = ⟨Ax, d⟩ + ½⟨Ad, d⟩ with Ax = −stencil(x)
    let ax: Vec<f64> = stencil(prob, x).into_iter().map(|v| -v).collect();
    let quad = ax.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() + 0.5 * quadratic_form(prob, d);
    let mut pot = 0.0;
    for k in 1..=t {
        pot += potential_increment(prob.f(), k, x[k - 1], d[k - 1], u.at(k))?;
    }
    let lin: f64 = prob.g().iter().zip(d).map(|(g, v)| g * v).sum();
    Ok(quad - pot + lin)
}

pub fn action_emden(prob: &EmdenProblem, x: &GridFunction, u: &ParameterFunction) -> Result<ActionEvaluation> {
    check_emden(prob, x, u)?;
    emden_action_slice(prob, x.interior(), u, quadrature::DEFAULT_TOL)
}

/// `res(k) = Δ(p(k−1)Δx(k−1)) + q(k)x(k) + f(k, x(k), u(k)) − g(k)`, equal to
/// `−(M+Q)x + f − g`; `∇J_u = −res`.
pub fn residual_emden(prob: &EmdenProblem, x: &GridFunction, u: &ParameterFunction) -> Result<Vec<f64>> {
    check_emden(prob, x, u)?;
    Ok(emden_residual_slice(prob, x.interior(), u))
}

pub fn hessian_emden(
    prob: &EmdenProblem,
    x: &GridFunction,
    u: &ParameterFunction,
    fd_step: f64,
) -> Result<CyclicTridiagonal> {
    check_emden(prob, x, u)?;
    if fd_step.is_nan() || fd_step <= 0.0 {
        return Err(Error::invalid(format!("fd_step must be positive, got {fd_step}")));
    }
    Ok(emden_hessian_slice(prob, x.interior(), u, fd_step))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NontrivialityCheck {
    pub nontrivial: bool,
    /// `k₁` with `g(k₁) ≠ 0`, when one exists.
    pub witness: Option<usize>,
    pub norm: f64,
    /// `max |res(0)|`: nonzero means the zero function is not a critical point.
    pub zero_residual_inf_norm: f64,
}

/// `nontrivial = |x| > 10·tol`. Under A7 a critical point cannot vanish, and the
/// residual of the zero function is reported as corroboration.
pub fn nontriviality_check(
    prob: &EmdenProblem,
    x: &GridFunction,
    u: &ParameterFunction,
    tol: f64,
) -> Result<NontrivialityCheck> {
    check_emden(prob, x, u)?;
    let norm = euclidean_norm(x.interior());
    let zero_res = emden_residual_slice(prob, &vec![0.0; prob.horizon()], u);
    Ok(NontrivialityCheck {
        nontrivial: norm > 10.0 * tol,
        witness: prob.a7_witness(),
        norm,
        zero_residual_inf_norm: zero_res.iter().fold(0.0, |m, r| m.max(r.abs())),
    })
}
