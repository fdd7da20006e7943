use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, GridFunction};
use crate::problems::DirichletProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityCheck {
    pub positive: bool,
    pub min_interior: f64,
    /// 1-based index of the smallest interior value.
    pub argmin: usize,
}

pub fn positivity_check(x: &GridFunction) -> Result<PositivityCheck> {
    if x.kind() != BoundaryKind::DirichletZero {
        return Err(Error::invalid("positivity is checked on Dirichlet grid functions"));
    }
    let (i, &min) = x
        .interior()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("T >= 1");
    Ok(PositivityCheck {
        positive: min > 0.0,
        min_interior: min,
        argmin: i + 1,
    })
}

/// Outcome of checking the strong comparison principle on a computed `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCheck {
    /// `min_k -Δ(p(k)Δx(k-1))`.
    pub min_load: f64,
    pub load_nonnegative: bool,
    /// With a nonnegative load, `x > 0` on the interior or `x ≡ 0`.
    pub dichotomy_holds: bool,
}

/// Evaluates `-Δ(p(k)Δx(k-1))` on `x` and checks the sign dichotomy it
/// implies. `tol` absorbs round-off in the load and in `x ≡ 0`.
pub fn comparison_check(prob: &DirichletProblem, x: &GridFunction, tol: f64) -> Result<ComparisonCheck> {
    if x.kind() != BoundaryKind::DirichletZero || x.horizon() != prob.horizon() {
        return Err(Error::invalid(
            "comparison check needs a Dirichlet function on the problem grid",
        ));
    }
    let v = x.values();
    let min_load = (1..=prob.horizon())
        .map(|k| -(prob.p(k + 1) * (v[k + 1] - v[k]) - prob.p(k) * (v[k] - v[k - 1])))
        .fold(f64::INFINITY, f64::min);
    let load_nonnegative = min_load >= -tol;
    let interior = x.interior();
    let dichotomy = interior.iter().all(|&xi| xi > 0.0) || interior.iter().all(|&xi| xi.abs() <= tol);
    Ok(ComparisonCheck {
        min_load,
        load_nonnegative,
        dichotomy_holds: !load_nonnegative || dichotomy,
    })
}
