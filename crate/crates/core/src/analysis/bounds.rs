//! A-priori bounds on minimizers.

use serde::{Deserialize, Serialize};

use super::assumptions::{linspace, log_grid};
use crate::emden::build_matrices;
use crate::error::{Error, Result};
use crate::grid::{equivalence_constants, euclidean_norm};
use crate::problems::{DirichletProblem, EmdenProblem};
use crate::quadrature;

const U_POINTS: usize = 21;

/// Energy-norm bound for minimizers of a Dirichlet action started at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriBound {
    /// `sum_k max_u int_{-alpha}^{alpha} |f(k, t, u)| dt`.
    pub c: f64,
    pub g_norm: f64,
    pub gamma: f64,
    pub m: f64,
    /// Largest root of `(m/2) t^2 - (g_norm/gamma) t - C`.
    pub bound: f64,
}

impl AprioriBound {
    fn from_parts(c: f64, g_norm: f64, gamma: f64, m: f64) -> Self {
        let b = g_norm / gamma;
        let bound = (b + (b * b + 2.0 * m * c).sqrt()) / m;
        AprioriBound {
            c,
            g_norm,
            gamma,
            m,
            bound,
        }
    }
}

pub fn apriori_bound(prob: &DirichletProblem) -> Result<AprioriBound> {
    let alpha = prob
        .alpha()
        .ok_or_else(|| Error::Precondition("the a-priori bound needs the sign threshold alpha".into()))?;
    let m = prob.min_p();
    if m <= 0.0 {
        return Err(Error::Precondition(format!("min p = {m} must be positive")));
    }
    let f = prob.f();
    let us = linspace(-prob.m_param(), prob.m_param(), U_POINTS);
    let mut c = 0.0;
    for k in 1..=prob.horizon() {
        let mut best = 0.0f64;
        for &u in &us {
            let v = quadrature::integrate(
                |t| f.eval(k, t, u).abs(),
                -alpha,
                alpha,
                1e-8,
                quadrature::DEFAULT_MAX_INTERVALS,
            )?;
            best = best.max(v);
        }
        c += best;
    }
    let (gamma, _) = equivalence_constants(prob.horizon())?;
    Ok(AprioriBound::from_parts(c, euclidean_norm(prob.g()), gamma, m))
}

/// Euclidean-norm bound for Emden minimizers.
///
/// Beyond `|y| = b` the ratio `sign(y) f / |y|^{r-1}` stays below `epsilon`,
/// and `|f| <= a_sup` on `|y| <= b`, so `F <= a_sup b + (epsilon/r) |y|^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmdenBound {
    /// Smallest eigenvalue of `M + Q`.
    pub a: f64,
    pub epsilon: f64,
    /// `epsilon`, or 0 when the sampled ratio never exceeds 0 beyond `b`.
    pub epsilon_used: f64,
    pub a_sup: f64,
    pub b: f64,
    pub g_norm: f64,
    pub t: usize,
    pub r: f64,
    pub solution_bound: f64,
}

impl EmdenBound {
    /// `(a/2) s^2 - T (A B + (eps/r) s^r) - s |g|`, a lower bound for the
    /// action on the sphere of radius `s`.
    pub fn lower_envelope(&self, s: f64) -> f64 {
        let t = self.t as f64;
        0.5 * self.a * s * s - t * (self.a_sup * self.b + self.epsilon_used / self.r * s.powf(self.r)) - s * self.g_norm
    }

    fn phi(&self, s: f64) -> f64 {
        self.lower_envelope(s) - self.a_sup * self.b * self.t as f64
    }

    fn phi_is_convex_increasing_past(&self, s: f64) -> bool {
        let t = self.t as f64;
        let d1 = self.a * s - t * self.epsilon_used * s.powf(self.r - 1.0) - self.g_norm;
        let d2 = self.a - t * self.epsilon_used * (self.r - 1.0) * s.powf(self.r - 2.0);
        self.phi(s) > 0.0 && d1 > 0.0 && d2 > 0.0
    }

    fn largest_root(&mut self) {
        let mut hi = 1.0;
        while !self.phi_is_convex_increasing_past(hi) {
            hi *= 2.0;
        }
        const SCAN: usize = 10_000;
        let step = hi / SCAN as f64;
        let last_nonpositive = (0..=SCAN).rev().map(|i| i as f64 * step).find(|&s| self.phi(s) <= 0.0);
        self.solution_bound = match last_nonpositive {
            None => 0.0,
            Some(mut lo) => {
                let mut up = (lo + step).min(hi);
                if up <= lo {
                    lo
                } else {
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + up);
                        if mid <= lo || mid >= up {
                            break;
                        }
                        if self.phi(mid) <= 0.0 {
                            lo = mid;
                        } else {
                            up = mid;
                        }
                    }
                    up
                }
            }
        };
    }
}

pub const DEFAULT_EMDEN_GRID_Y: usize = 2001;

/// `epsilon` defaults to `a r / (4 T)`.
pub fn emden_coercivity_bound(prob: &EmdenProblem, epsilon: Option<f64>) -> Result<EmdenBound> {
    let a = build_matrices(prob).lambda_min;
    if a <= 0.0 {
        return Err(Error::Precondition(format!(
            "M + Q is not positive definite (lambda_min = {a:e})"
        )));
    }
    let t = prob.horizon();
    let r = prob.r();
    let epsilon = epsilon.unwrap_or(a * r / (4.0 * t as f64));
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let f = prob.f();
    let us = linspace(-prob.m_param(), prob.m_param(), U_POINTS);

    // sampled sup of sign(y) f / |y|^{r-1} at each |y| level
    let levels = log_grid(-2, 6, 101);
    let ratios: Vec<f64> = levels
        .iter()
        .map(|&s| {
            let mut best = f64::NEG_INFINITY;
            for k in 1..=t {
                for &u in &us {
                    best = best.max(f.eval(k, s, u) / s.powf(r - 1.0));
                    best = best.max(-f.eval(k, -s, u) / s.powf(r - 1.0));
                }
            }
            best
        })
        .collect();
    let first_bad_from_end = ratios.iter().rposition(|&v| v > epsilon);
    let b_index = match first_bad_from_end {
        None => 0,
        Some(i) if i + 1 < levels.len() => i + 1,
        Some(_) => {
            return Err(Error::Precondition(format!(
                "sign(y) f / |y|^(r-1) exceeds epsilon = {epsilon:e} at |y| = 1e6; growth condition not met"
            )))
        }
    };
    let b = levels[b_index];
    let tail_sup = ratios[b_index..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let epsilon_used = if tail_sup > 0.0 { epsilon } else { 0.0 };

    let mut a_sup = 0.0f64;
    for y in linspace(-b, b, DEFAULT_EMDEN_GRID_Y) {
        for k in 1..=t {
            for &u in &us {
                a_sup = a_sup.max(f.eval(k, y, u).abs());
            }
        }
    }

    let mut out = EmdenBound {
        a,
        epsilon,
        epsilon_used,
        a_sup,
        b,
        g_norm: euclidean_norm(prob.g()),
        t,
        r,
        solution_bound: 0.0,
    };
    out.largest_root();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Nonlinearity;
    use serde_json::json;

    #[test]
    fn apriori_bound_degenerate_cases() {
        let p = DirichletProblem::uniform(vec![0.0; 4], Nonlinearity::zero(), 1.0, Some(1.0)).unwrap();
        let b = apriori_bound(&p).unwrap();
        assert_eq!(b.c, 0.0);
        assert_eq!(b.bound, 0.0);

        let g = vec![1.0, -2.0, 0.5];
        let p = DirichletProblem::uniform(g.clone(), Nonlinearity::zero(), 1.0, Some(1.0)).unwrap();
        let b = apriori_bound(&p).unwrap();
        let want = 2.0 * euclidean_norm(&g) / (b.gamma * b.m);
        assert!((b.bound - want).abs() < 1e-12 * want);
    }

    #[test]
    fn apriori_constant_for_linear_f() {
        // int_{-a}^{a} |t| dt = a^2 per index
        let p = DirichletProblem::uniform(vec![0.0; 3], Nonlinearity::linear(-1.0, 0.0), 1.0, Some(2.0)).unwrap();
        let b = apriori_bound(&p).unwrap();
        assert!((b.c - 12.0).abs() < 1e-7);
    }

    #[test]
    fn apriori_needs_alpha() {
        let p = DirichletProblem::uniform(vec![0.0; 3], Nonlinearity::zero(), 1.0, None).unwrap();
        assert!(matches!(apriori_bound(&p), Err(Error::Precondition(_))));
    }

    fn emden(f: Nonlinearity, g: Vec<f64>) -> EmdenProblem {
        let t = g.len();
        EmdenProblem::new(vec![1.0; t + 1], vec![-1.0; t], g, f, 1.0, 1.5).unwrap()
    }

    #[test]
    fn emden_bound_without_nonlinearity() {
        let g = vec![1.0, 0.0, -0.5, 2.0];
        let b = emden_coercivity_bound(&emden(Nonlinearity::zero(), g.clone()), None).unwrap();
        assert_eq!(b.a_sup, 0.0);
        assert_eq!(b.epsilon_used, 0.0);
        let want = 2.0 * euclidean_norm(&g) / b.a;
        assert!(
            (b.solution_bound - want).abs() < 1e-9 * want,
            "{} vs {want}",
            b.solution_bound
        );
    }

    #[test]
    fn emden_bound_with_bounded_f() {
        let f = Nonlinearity::from_json("constant_sign", json!({"value": 0.8})).unwrap();
        let b = emden_coercivity_bound(&emden(f, vec![1.0, 0.0, 0.0]), None).unwrap();
        assert!(b.a_sup <= 1.0 && b.a_sup >= 0.8);
        assert!(b.lower_envelope(b.solution_bound) - b.a_sup * b.b * 3.0 >= -1e-9);
        assert!(b.solution_bound > 0.0);
    }

    #[test]
    fn emden_bound_rejects_fast_growth() {
        let f = Nonlinearity::linear(1.0, 0.0);
        assert!(matches!(
            emden_coercivity_bound(&emden(f, vec![1.0, 0.0, 0.0]), None),
            Err(Error::Precondition(_))
        ));
    }
}
