//! The action functional of the Dirichlet problem, its gradient and Hessian.
//!
//! ```text
//! J_u(y) = Σ_{k=1}^{T+1} p(k)/2 (Δy(k-1))² − Σ_{k=1}^{T} F(k, y(k), u(k)) + Σ_{k=1}^{T} g(k) y(k)
//! ```
//!
//! Sign convention: `∇J_u(y) = −residual(y)`, where the residual is the left
//! side minus the right side of the difference equation.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::{BoundaryKind, GridFunction};
use crate::linalg::SymTridiagonal;
use crate::problems::{DirichletProblem, Nonlinearity, ParameterFunction};
use crate::quadrature;

/// Relative step for the central-difference fallback of `∂f/∂y`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionEvaluation {
    pub value: f64,
    pub quadratic_part: f64,
    /// `Σ F(k, y(k), u(k))`, entering with a minus sign.
    pub potential_part: f64,
    pub linear_part: f64,
}

impl ActionEvaluation {
    pub(crate) fn assemble(quadratic_part: f64, potential_part: f64, linear_part: f64) -> Self {
        ActionEvaluation {
            value: quadratic_part - potential_part + linear_part,
            quadratic_part,
            potential_part,
            linear_part,
        }
    }
}

/// `∫_0^y f(k, t, u) dt` by adaptive Simpson quadrature, ignoring any
/// registered closed form.
pub fn integrate_nonlinearity(f: &Nonlinearity, k: usize, y: f64, u: f64, tol: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    quadrature::integrate(|t| f.eval(k, t, u), 0.0, y, tol, quadrature::DEFAULT_MAX_INTERVALS)
}

/// `F(k, y, u)`: the registered closed form if there is one, quadrature
/// otherwise. `F(k, 0, u) = 0` exactly.
pub fn primitive_f(f: &Nonlinearity, k: usize, y: f64, u: f64, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    match f.primitive(k, y, u) {
        Some(v) => Ok(v),
        None => integrate_nonlinearity(f, k, y, u, tol),
    }
}

/// `F(k, y + dy, u) − F(k, y, u)`, integrated over the short interval so the
/// increment does not suffer cancellation.
pub(crate) fn potential_increment(f: &Nonlinearity, k: usize, y: f64, dy: f64, u: f64) -> Result<f64> {
    if dy == 0.0 {
        return Ok(0.0);
    }
    let scale = 1.0 + f.eval(k, y, u).abs() + f.eval(k, y + dy, u).abs();
    let tol = 1e-15 * dy.abs() * scale;
    quadrature::integrate(|t| f.eval(k, t, u), y, y + dy, tol.max(f64::MIN_POSITIVE), 1 << 12).or_else(
        |err| match err {
            Error::Quadrature { estimate, .. } => Ok(estimate),
            other => Err(other),
        },
    )
}

/// `∂f/∂y`: analytic when registered, otherwise a central difference with
/// step `fd_step·(1 + |y|)`.
pub fn df_dy(f: &Nonlinearity, k: usize, y: f64, u: f64, fd_step: f64) -> f64 {
    match f.derivative(k, y, u) {
        Some(d) => d,
        None => {
            let h = fd_step * (1.0 + y.abs());
            (f.eval(k, y + h, u) - f.eval(k, y - h, u)) / (2.0 * h)
        }
    }
}

fn check_dirichlet(prob: &DirichletProblem, x: &GridFunction, u: &ParameterFunction) -> Result<()> {
    if x.kind() != BoundaryKind::DirichletZero {
        return Err(Error::invalid("Dirichlet action needs a Dirichlet grid function"));
    }
    check_len("x", prob.horizon(), x.horizon())?;
    check_len("u", prob.horizon(), u.horizon())
}

pub(crate) fn dirichlet_action_slice(
    prob: &DirichletProblem,
    x: &[f64],
    u: &ParameterFunction,
    tol: f64,
) -> Result<ActionEvaluation> {
    let t = prob.horizon();
    let mut quad = 0.0;
    let mut prev = 0.0;
    for k in 1..=t + 1 {
        let cur = if k <= t { x[k - 1] } else { 0.0 };
        let d = cur - prev;
        quad += 0.5 * prob.p(k) * d * d;
        prev = cur;
    }
    let mut pot = 0.0;
    for k in 1..=t {
        pot += primitive_f(prob.f(), k, x[k - 1], u.at(k), tol)?;
    }
    let lin = prob.g().iter().zip(x).map(|(g, y)| g * y).sum();
    Ok(ActionEvaluation::assemble(quad, pot, lin))
}

pub(crate) fn dirichlet_residual_slice(prob: &DirichletProblem, x: &[f64], u: &ParameterFunction) -> Vec<f64> {
    let t = prob.horizon();
    let at = |k: usize| if k == 0 || k > t { 0.0 } else { x[k - 1] };
    (1..=t)
        .map(|k| {
            prob.p(k + 1) * (at(k + 1) - at(k)) - prob.p(k) * (at(k) - at(k - 1)) + prob.f().eval(k, at(k), u.at(k))
                - prob.g()[k - 1]
        })
        .collect()
}

pub(crate) fn dirichlet_hessian_slice(
    prob: &DirichletProblem,
    x: &[f64],
    u: &ParameterFunction,
    fd_step: f64,
) -> SymTridiagonal {
    let t = prob.horizon();
    let diag = (1..=t)
        .map(|k| prob.p(k) + prob.p(k + 1) - df_dy(prob.f(), k, x[k - 1], u.at(k), fd_step))
        .collect();
    let off = (1..t).map(|k| -prob.p(k + 1)).collect();
    SymTridiagonal { diag, off }
}

pub(crate) fn dirichlet_increment_slice(
    prob: &DirichletProblem,
    x: &[f64],
    d: &[f64],
    u: &ParameterFunction,
) -> Result<f64> {
    let t = prob.horizon();
    let at = |v: &[f64], k: usize| if k == 0 || k > t { 0.0 } else { v[k - 1] };
    let mut quad = 0.0;
    for k in 1..=t + 1 {
        let dx = at(x, k) - at(x, k - 1);
        let dd = at(d, k) - at(d, k - 1);
        quad += 0.5 * prob.p(k) * dd * (2.0 * dx + dd);
    }
    let mut pot = 0.0;
    for k in 1..=t {
        pot += potential_increment(prob.f(), k, x[k - 1], d[k - 1], u.at(k))?;
    }
    let lin: f64 = prob.g().iter().zip(d).map(|(g, v)| g * v).sum();
    Ok(quad - pot + lin)
}

/// `J_u(x)` with the default quadrature tolerance.
pub fn action_dirichlet(prob: &DirichletProblem, x: &GridFunction, u: &ParameterFunction) -> Result<ActionEvaluation> {
    action_dirichlet_with_tol(prob, x, u, quadrature::DEFAULT_TOL)
}

pub fn action_dirichlet_with_tol(
    prob: &DirichletProblem,
    x: &GridFunction,
    u: &ParameterFunction,
    tol: f64,
) -> Result<ActionEvaluation> {
    check_dirichlet(prob, x, u)?;
    dirichlet_action_slice(prob, x.interior(), u, tol)
}

/// `res(k) = p(k+1)(x(k+1)−x(k)) − p(k)(x(k)−x(k−1)) + f(k, x(k), u(k)) − g(k)`
/// for `k = 1..=T`.
pub fn residual_dirichlet(prob: &DirichletProblem, x: &GridFunction, u: &ParameterFunction) -> Result<Vec<f64>> {
    check_dirichlet(prob, x, u)?;
    Ok(dirichlet_residual_slice(prob, x.interior(), u))
}

/// Hessian of `J_u` at `x`: diagonal `p(k) + p(k+1) − ∂f/∂y`, off-diagonal
/// `−p(k+1)`.
pub fn hessian_dirichlet(
    prob: &DirichletProblem,
    x: &GridFunction,
    u: &ParameterFunction,
    fd_step: f64,
) -> Result<SymTridiagonal> {
    check_dirichlet(prob, x, u)?;
    if fd_step.is_nan() || fd_step <= 0.0 {
        return Err(Error::invalid(format!("fd_step must be positive, got {fd_step}")));
    }
    Ok(dirichlet_hessian_slice(prob, x.interior(), u, fd_step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    fn unit(t: usize) -> ParameterFunction {
        ParameterFunction::constant(t, 0.0, 1.0).unwrap()
    }

    #[test]
    fn primitive_examples() {
        let lin = Nonlinearity::linear(-1.0, 0.0);
        assert_eq!(primitive_f(&lin, 1, 2.0, 0.3, 1e-10).unwrap(), -2.0);
        assert_eq!(integrate_nonlinearity(&lin, 1, 2.0, 0.3, 1e-12).unwrap(), -2.0);
        let table = Nonlinearity::from_json("table", json!({"y": [-1.0, 1.0], "f": [1.0, -1.0]})).unwrap();
        assert_eq!(primitive_f(&table, 1, 0.0, 0.0, 1e-10).unwrap(), 0.0);
        assert!((primitive_f(&table, 1, 2.0, 0.0, 1e-12).unwrap() + 1.5).abs() < 1e-11);
        assert!(primitive_f(&lin, 1, 2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn example2_quadrature_matches_closed_form() {
        let f = Nonlinearity::from_json("example2", json!({})).unwrap();
        let q = integrate_nonlinearity(&f, 1, -3.0, 0.7, 1e-10).unwrap();
        let h = crate::problems::example2_primitive(-3.0);
        assert!((q - h).abs() < 1e-8, "{q} vs {h}");
    }

    #[test]
    fn action_examples() {
        let zero = DirichletProblem::uniform(vec![0.0; 3], Nonlinearity::zero(), 1.0, None).unwrap();
        let x = GridFunction::dirichlet(vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(action_dirichlet(&zero, &x, &unit(3)).unwrap().value, 2.0);
        assert_eq!(
            action_dirichlet(&zero, &GridFunction::zeros(3), &unit(3))
                .unwrap()
                .value,
            0.0
        );

        let a = 1.7;
        let one = DirichletProblem::uniform(vec![1.0], Nonlinearity::zero(), 1.0, None).unwrap();
        let v = action_dirichlet(&one, &GridFunction::from_interior(&[a]), &unit(1))
            .unwrap()
            .value;
        assert!((v - (a * a + a)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let prob = DirichletProblem::uniform(vec![0.0; 3], Nonlinearity::zero(), 1.0, None).unwrap();
        assert!(action_dirichlet(&prob, &GridFunction::zeros(4), &unit(3)).is_err());
        assert!(residual_dirichlet(&prob, &GridFunction::zeros(3), &unit(2)).is_err());
        let periodic = GridFunction::periodic(&[0.0; 3]).unwrap();
        assert!(action_dirichlet(&prob, &periodic, &unit(3)).is_err());
    }

    #[test]
    fn parabola_has_zero_residual() {
        let prob = DirichletProblem::uniform(vec![-1.0; 3], Nonlinearity::zero(), 1.0, None).unwrap();
        let x = GridFunction::from_interior(&[1.5, 2.0, 1.5]);
        let res = residual_dirichlet(&prob, &x, &unit(3)).unwrap();
        assert!(res.iter().all(|r| r.abs() < 1e-15), "{res:?}");
    }

    #[test]
    fn hessian_examples() {
        let prob = DirichletProblem::uniform(vec![0.3; 4], Nonlinearity::zero(), 1.0, None).unwrap();
        let h = hessian_dirichlet(&prob, &GridFunction::zeros(4), &unit(4), DEFAULT_FD_STEP).unwrap();
        assert_eq!(h.diag, vec![2.0; 4]);
        assert_eq!(h.off, vec![-1.0; 3]);

        let p = vec![1.0, 2.0, 3.0, 4.0];
        let prob = DirichletProblem::new(p.clone(), vec![0.0; 3], Nonlinearity::linear(-1.0, 0.0), 1.0, None).unwrap();
        let h = hessian_dirichlet(&prob, &GridFunction::from_interior(&[0.1, 0.2, 0.3]), &unit(3), 1e-6).unwrap();
        for k in 0..3 {
            assert_eq!(h.diag[k], p[k] + p[k + 1] + 1.0);
        }
        assert!(hessian_dirichlet(&prob, &GridFunction::zeros(3), &unit(3), 0.0).is_err());
    }

    #[test]
    fn increment_matches_difference_of_actions() {
        let f = Nonlinearity::from_json("example2", json!({"r": {"a": 1.0, "b": 0.5}})).unwrap();
        let prob = DirichletProblem::new(vec![1.0, 2.0, 0.5, 1.5], vec![0.3, -1.0, 0.2], f, 1.0, None).unwrap();
        let u = ParameterFunction::new(vec![0.1, -0.4, 0.9], 1.0).unwrap();
        let x = [0.5, -1.2, 2.0];
        let d = [-0.8, 0.3, -2.5];
        let xd: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let j0 = dirichlet_action_slice(&prob, &x, &u, 1e-12).unwrap().value;
        let j1 = dirichlet_action_slice(&prob, &xd, &u, 1e-12).unwrap().value;
        let inc = dirichlet_increment_slice(&prob, &x, &d, &u).unwrap();
        assert!((inc - (j1 - j0)).abs() < 1e-12, "{inc} vs {}", j1 - j0);
    }

    fn random_problem(seed: u64, t: usize) -> (DirichletProblem, Vec<f64>, ParameterFunction) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = match seed % 3 {
            0 => Nonlinearity::linear(-rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0)),
            1 => Nonlinearity::from_json("example1", json!({"l": 1, "r": {"a": 1.0, "b": 0.2}})).unwrap(),
            _ => Nonlinearity::from_json("example2", json!({"q": rng.gen_range(0.5..2.0)})).unwrap(),
        };
        let p = (0..=t).map(|_| rng.gen_range(0.5..2.0)).collect();
        let g = (0..t).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let prob = DirichletProblem::new(p, g, f, 1.0, None).unwrap();
        let x = (0..t).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let u = ParameterFunction::new((0..t).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1.0).unwrap();
        (prob, x, u)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn gradient_is_negative_residual(seed in 0u64..10_000, t in 1usize..12) {
            let (prob, x, u) = random_problem(seed, t);
            let res = dirichlet_residual_slice(&prob, &x, &u);
            let gnorm = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            for k in 0..t {
                let h = 1e-5 * (1.0 + x[k].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let jp = dirichlet_action_slice(&prob, &xp, &u, 1e-13).unwrap().value;
                let jm = dirichlet_action_slice(&prob, &xm, &u, 1e-13).unwrap().value;
                let fd = (jp - jm) / (2.0 * h);
                prop_assert!((fd + res[k]).abs() <= 1e-6 * (1.0 + gnorm), "k={} fd={} res={}", k, fd, res[k]);
            }
        }

        #[test]
        fn hessian_matches_gradient_differences(seed in 0u64..10_000, t in 1usize..12) {
            let (prob, x, u) = random_problem(seed, t);
            let hess = dirichlet_hessian_slice(&prob, &x, &u, DEFAULT_FD_STEP);
            let v: Vec<f64> = (0..t).map(|k| ((k * 7 + seed as usize) as f64).sin()).collect();
            let hv = hess.mul_vec(&v);
            let eps = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
            let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
            let rp = dirichlet_residual_slice(&prob, &xp, &u);
            let rm = dirichlet_residual_slice(&prob, &xm, &u);
            for k in 0..t {
                // Hessian = -d(residual)
                let fd = -(rp[k] - rm[k]) / (2.0 * eps);
                prop_assert!((fd - hv[k]).abs() <= 1e-4 * (1.0 + hv[k].abs()), "k={} fd={} hv={}", k, fd, hv[k]);
            }
        }

        #[test]
        fn quadratic_part_dominates_energy(seed in 0u64..10_000, t in 1usize..15) {
            let (prob, x, u) = random_problem(seed, t);
            let eval = dirichlet_action_slice(&prob, &x, &u, 1e-10).unwrap();
            let e = crate::grid::energy_norm(&x);
            prop_assert!(eval.quadratic_part >= 0.5 * prob.min_p() * e * e * (1.0 - 1e-12));
            let recomposed = eval.quadratic_part - eval.potential_part + eval.linear_part;
            prop_assert!((eval.value - recomposed).abs() <= 1e-12 * (1.0 + eval.value.abs()));
        }

        #[test]
        fn zero_function_has_zero_action(seed in 0u64..10_000, t in 1usize..15) {
            let (prob, _, u) = random_problem(seed, t);
            let v = action_dirichlet(&prob, &GridFunction::zeros(t), &u).unwrap().value;
            prop_assert_eq!(v, 0.0);
        }
    }
}
