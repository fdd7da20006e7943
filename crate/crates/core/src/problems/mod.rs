//! Problem descriptions, parameter functions and parameter sequences.

mod bundled;
mod file;
mod nonlinearity;

pub use bundled::{bundled_problems, write_bundled};
pub use file::{FunctionSpec, ProblemFile};
pub use nonlinearity::{
    example1_h, example2_h, example2_primitive, GrowthClass, IndexWeight, Nonlinearity, ParamWeight, BUILTIN_NAMES,
};

use crate::error::{check_len, Error, Result};

/// `Δ(p(k) Δx(k-1)) + f(k, x(k), u(k)) = g(k)` on `1..=T` with
/// `x(0) = x(T+1) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletProblem {
    t: usize,
    /// `p(1..=T+1)`.
    p: Vec<f64>,
    /// `g(1..=T)`.
    g: Vec<f64>,
    f: Nonlinearity,
    m_param: f64,
    alpha: Option<f64>,
}

impl DirichletProblem {
    pub fn new(p: Vec<f64>, g: Vec<f64>, f: Nonlinearity, m_param: f64, alpha: Option<f64>) -> Result<Self> {
        let t = g.len();
        if t == 0 {
            return Err(Error::schema("g", "horizon T must be at least 1"));
        }
        check_len("p", t + 1, p.len())?;
        check_finite("p", &p)?;
        check_finite("g", &g)?;
        check_bound(m_param)?;
        if let Some(a) = alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::schema("alpha", format!("must be positive, got {a}")));
            }
        }
        f.validate_for(t, m_param)?;
        Ok(DirichletProblem {
            t,
            p,
            g,
            f,
            m_param,
            alpha,
        })
    }

    /// Unit coefficients `p ≡ 1` with the given `g`.
    pub fn uniform(g: Vec<f64>, f: Nonlinearity, m_param: f64, alpha: Option<f64>) -> Result<Self> {
        let p = vec![1.0; g.len() + 1];
        Self::new(p, g, f, m_param, alpha)
    }

    pub fn horizon(&self) -> usize {
        self.t
    }

    /// `p(k)` for `k` in `1..=T+1`.
    pub fn p(&self, k: usize) -> f64 {
        self.p[k - 1]
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn m_param(&self) -> f64 {
        self.m_param
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// `m = min p(k)`; A3 asks for `m > 0`.
    pub fn min_p(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn satisfies_a3(&self) -> bool {
        self.min_p() > 0.0
    }

    pub fn with_f(&self, f: Nonlinearity) -> Result<Self> {
        Self::new(self.p.clone(), self.g.clone(), f, self.m_param, self.alpha)
    }
}

/// `Δ(p(k-1) Δx(k-1)) + q(k) x(k) + f(k, x(k), u(k)) = g(k)` with
/// `x(0) = x(T)` and `p(0) Δx(0) = p(T) Δx(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmdenProblem {
    t: usize,
    /// `p(0..=T)`.
    p: Vec<f64>,
    /// `q(1..=T)`.
    q: Vec<f64>,
    g: Vec<f64>,
    f: Nonlinearity,
    m_param: f64,
    r: f64,
}

impl EmdenProblem {
    pub fn new(p: Vec<f64>, q: Vec<f64>, g: Vec<f64>, f: Nonlinearity, m_param: f64, r: f64) -> Result<Self> {
        let t = g.len();
        if t == 0 {
            return Err(Error::schema("g", "horizon T must be at least 1"));
        }
        check_len("p", t + 1, p.len())?;
        check_len("q", t, q.len())?;
        check_finite("p", &p)?;
        check_finite("q", &q)?;
        check_finite("g", &g)?;
        check_bound(m_param)?;
        if !(r > 1.0 && r < 2.0) {
            return Err(Error::schema(
                "r",
                format!("exponent must lie strictly inside (1, 2), got {r}"),
            ));
        }
        f.validate_for(t, m_param)?;
        Ok(EmdenProblem {
            t,
            p,
            q,
            g,
            f,
            m_param,
            r,
        })
    }

    pub fn horizon(&self) -> usize {
        self.t
    }

    /// `p(k)` for `k` in `0..=T`.
    pub fn p(&self, k: usize) -> f64 {
        self.p[k]
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p
    }

    /// `q(k)` for `k` in `1..=T`.
    pub fn q(&self, k: usize) -> f64 {
        self.q[k - 1]
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn m_param(&self) -> f64 {
        self.m_param
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// First `k₁` with `g(k₁) ≠ 0` (the nontriviality clause of A7).
    pub fn a7_witness(&self) -> Option<usize> {
        self.g.iter().position(|&v| v != 0.0).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Dirichlet(DirichletProblem),
    Emden(EmdenProblem),
}

impl Problem {
    pub fn horizon(&self) -> usize {
        match self {
            Problem::Dirichlet(p) => p.horizon(),
            Problem::Emden(p) => p.horizon(),
        }
    }

    pub fn m_param(&self) -> f64 {
        match self {
            Problem::Dirichlet(p) => p.m_param(),
            Problem::Emden(p) => p.m_param(),
        }
    }

    pub fn f(&self) -> &Nonlinearity {
        match self {
            Problem::Dirichlet(p) => p.f(),
            Problem::Emden(p) => p.f(),
        }
    }
}

fn check_finite(field: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::schema(field, format!("entry {i} is not finite"))),
        None => Ok(()),
    }
}

fn check_bound(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Error::schema("M", format!("parameter bound must be positive, got {m}")))
    }
}

/// A member of `L_M`: values on `1..=T` with `max |u(k)| <= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterFunction {
    values: Vec<f64>,
    bound: f64,
}

impl ParameterFunction {
    pub fn new(values: Vec<f64>, bound: f64) -> Result<Self> {
        check_bound(bound)?;
        if values.is_empty() {
            return Err(Error::invalid("parameter function needs T >= 1 values"));
        }
        if let Some(k) = values.iter().position(|v| v.is_nan() || v.abs() > bound) {
            return Err(Error::invalid(format!(
                "parameter value u({}) = {} lies outside [-{bound}, {bound}]",
                k + 1,
                values[k]
            )));
        }
        Ok(ParameterFunction { values, bound })
    }

    pub fn constant(t: usize, value: f64, bound: f64) -> Result<Self> {
        Self::new(vec![value; t], bound)
    }

    /// Projects onto `L_M`; the flag reports whether anything was clipped.
    pub fn clipped(values: Vec<f64>, bound: f64) -> Result<(Self, bool)> {
        check_bound(bound)?;
        let mut clipped = false;
        let values = values
            .into_iter()
            .map(|v| {
                let c = v.clamp(-bound, bound);
                clipped |= c != v;
                c
            })
            .collect();
        Ok((Self::new(values, bound)?, clipped))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `u(k)` for `k` in `1..=T`.
    pub fn at(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &ParameterFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `1/n` for `n = 1..=count`.
pub fn harmonic_schedule(count: usize) -> Vec<f64> {
    (1..=count).map(|n| 1.0 / n as f64).collect()
}

/// `u_n = base + schedule[n]·direction` for the first `count` schedule
/// entries, followed by `base` itself as the limit. Entries leaving `L_M` are
/// clipped with a warning.
pub fn make_parameter_sequence(
    base: &ParameterFunction,
    direction: &[f64],
    schedule: &[f64],
    count: usize,
) -> Result<Vec<ParameterFunction>> {
    if schedule.is_empty() {
        return Err(Error::invalid("parameter schedule is empty"));
    }
    if count == 0 {
        return Err(Error::invalid("parameter sequence needs count >= 1"));
    }
    if count > schedule.len() {
        return Err(Error::invalid(format!(
            "count {count} exceeds schedule length {}",
            schedule.len()
        )));
    }
    check_len("direction", base.horizon(), direction.len())?;
    if schedule.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("schedule entries must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("schedule must be nonincreasing"));
    }

    let mut out = Vec::with_capacity(count + 1);
    for (n, s) in schedule.iter().take(count).enumerate() {
        let values: Vec<f64> = base.values().iter().zip(direction).map(|(b, d)| b + s * d).collect();
        let (u, clipped) = ParameterFunction::clipped(values, base.bound())?;
        if clipped {
            log::warn!("parameter u_{} clipped to L_M (M = {})", n + 1, base.bound());
        }
        out.push(u);
    }
    out.push(base.clone());
    Ok(out)
}
