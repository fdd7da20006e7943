//! Grid functions on discrete intervals and the discrete calculus around them.
//!
//! A Dirichlet grid function lives on `0..=T+1` with both end values pinned
//! to zero. A periodic-type grid function lives on `0..=T` with `x(0) = x(T)`;
//! only `x(1..=T)` are independent. Public indices follow that `0..=T+1`
//! (resp. `0..=T`) convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    DirichletZero,
    PeriodicType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
    kind: BoundaryKind,
}

impl GridFunction {
    /// Builds a Dirichlet grid function from the full value vector on `0..=T+1`.
    pub fn dirichlet(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::invalid(format!(
                "Dirichlet grid function needs T >= 1 (at least 3 values), got {}",
                values.len()
            )));
        }
        let last = values.len() - 1;
        if values[0] != 0.0 || values[last] != 0.0 {
            return Err(Error::invalid(format!(
                "Dirichlet grid function must vanish at both ends, got y(0) = {}, y(T+1) = {}",
                values[0], values[last]
            )));
        }
        Ok(GridFunction {
            values,
            kind: BoundaryKind::DirichletZero,
        })
    }

    /// Dirichlet grid function with the given interior values `y(1..=T)`.
    pub fn from_interior(interior: &[f64]) -> Self {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        GridFunction {
            values,
            kind: BoundaryKind::DirichletZero,
        }
    }

    pub fn zeros(t: usize) -> Self {
        Self::from_interior(&vec![0.0; t])
    }

    /// Periodic-type grid function from `x(1..=T)`; `x(0)` is set to `x(T)`.
    pub fn periodic(interior: &[f64]) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::invalid("periodic grid function needs T >= 1"));
        }
        let mut values = Vec::with_capacity(interior.len() + 1);
        values.push(interior[interior.len() - 1]);
        values.extend_from_slice(interior);
        Ok(GridFunction {
            values,
            kind: BoundaryKind::PeriodicType,
        })
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    /// The horizon `T`.
    pub fn horizon(&self) -> usize {
        match self.kind {
            BoundaryKind::DirichletZero => self.values.len() - 2,
            BoundaryKind::PeriodicType => self.values.len() - 1,
        }
    }

    /// All stored values, index 0 first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The independent values `y(1..=T)`.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..=self.horizon()]
    }

    pub fn into_interior(self) -> Vec<f64> {
        let t = self.horizon();
        let mut v = self.values;
        v.truncate(t + 1);
        v.remove(0);
        v
    }

    pub fn forward_difference(&self) -> Vec<f64> {
        forward_difference(&self.values).unwrap_or_default()
    }

    /// `Δx(k)` for `k = 1..=T` on a periodic-type function, wrapping with
    /// `x(T+1) = x(1)`.
    pub fn cyclic_difference(&self) -> Vec<f64> {
        let x = self.interior();
        let n = x.len();
        (0..n).map(|i| x[(i + 1) % n] - x[i]).collect()
    }
}

/// `out[k] = y[k+1] - y[k]`.
pub fn forward_difference(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::invalid(format!(
            "forward difference needs at least 2 values, got {}",
            y.len()
        )));
    }
    Ok(y.windows(2).map(|w| w[1] - w[0]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    /// `sqrt(sum_{k=1}^{T+1} (Δy(k-1))^2)`, the norm of the Dirichlet energy.
    pub energy: f64,
    /// `sqrt(sum_{k=1}^{T} y(k)^2)`.
    pub euclidean: f64,
    /// `sqrt(sum_{k=1}^{T} (Δy(k))^2)`: the energy sum without the first
    /// difference term. Diagnostic only.
    pub energy_truncated: f64,
}

pub fn norms(y: &GridFunction) -> Result<NormPair> {
    if y.kind() != BoundaryKind::DirichletZero {
        return Err(Error::invalid("norms are defined on Dirichlet grid functions only"));
    }
    let diffs = y.forward_difference();
    let energy = diffs.iter().map(|d| d * d).sum::<f64>().sqrt();
    let energy_truncated = diffs[1..].iter().map(|d| d * d).sum::<f64>().sqrt();
    Ok(NormPair {
        energy,
        euclidean: euclidean_norm(y.interior()),
        energy_truncated,
    })
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Energy norm of a Dirichlet function given by its interior values.
pub fn energy_norm(interior: &[f64]) -> f64 {
    let n = interior.len();
    let mut s = 0.0;
    let mut prev = 0.0;
    for &x in interior {
        s += (x - prev) * (x - prev);
        prev = x;
    }
    if n > 0 {
        s += prev * prev;
    }
    s.sqrt()
}

/// Tightest `(gamma, gamma1)` with `gamma |y| <= ||y|| <= gamma1 |y|` on the
/// Dirichlet space of horizon `t`: square roots of the extremal eigenvalues of
/// `tridiag(-1, 2, -1)`.
pub fn equivalence_constants(t: usize) -> Result<(f64, f64)> {
    if t < 1 {
        return Err(Error::invalid("equivalence constants need T >= 1"));
    }
    let (lo, hi) = SymTridiagonal::dirichlet_laplacian(t)?.extremal_eigenvalues();
    Ok((lo.sqrt(), hi.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_of_zero_and_ramp() {
        let z = GridFunction::zeros(4);
        assert!(z.forward_difference().iter().all(|&d| d == 0.0));
        assert_eq!(
            forward_difference(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![1.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn difference_by_hand() {
        let y = GridFunction::dirichlet(vec![0.0, 1.5, 2.0, 1.5, 0.0]).unwrap();
        assert_eq!(y.forward_difference(), vec![1.5, 0.5, -0.5, -1.5]);
    }

    #[test]
    fn difference_rejects_short_input() {
        assert!(forward_difference(&[1.0]).is_err());
        assert!(forward_difference(&[]).is_err());
    }

    #[test]
    fn dirichlet_rejects_nonzero_ends() {
        assert!(GridFunction::dirichlet(vec![0.0, 1.0, 0.5]).is_err());
        assert!(GridFunction::dirichlet(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn periodic_storage_identifies_ends() {
        let x = GridFunction::periodic(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.values(), &[3.0, 1.0, 2.0, 3.0]);
        assert_eq!(x.horizon(), 3);
        assert_eq!(x.cyclic_difference(), vec![1.0, 1.0, -2.0]);
    }

    #[test]
    fn norms_examples() {
        let n = norms(&GridFunction::zeros(3)).unwrap();
        assert_eq!((n.energy, n.euclidean), (0.0, 0.0));

        let n = norms(&GridFunction::dirichlet(vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap()).unwrap();
        assert!((n.energy - 2.0).abs() < 1e-15);
        assert!((n.euclidean - 6f64.sqrt()).abs() < 1e-15);
        assert!((n.energy_truncated - 3f64.sqrt()).abs() < 1e-15);

        let a = -1.75;
        let n = norms(&GridFunction::from_interior(&[a])).unwrap();
        assert!((n.energy - (2.0 * a * a).sqrt()).abs() < 1e-15);
        assert_eq!(n.euclidean, a.abs());
    }

    #[test]
    fn norms_reject_periodic() {
        let x = GridFunction::periodic(&[1.0, 2.0]).unwrap();
        assert!(norms(&x).is_err());
    }

    #[test]
    fn constants_small_cases() {
        let (g, g1) = equivalence_constants(1).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-12 && (g1 - 2f64.sqrt()).abs() < 1e-12);
        let (g, g1) = equivalence_constants(3).unwrap();
        assert!((g - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!((g1 - (2.0 + 2f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!(equivalence_constants(0).is_err());
    }

    #[test]
    fn smallest_rayleigh_quotient_over_random_directions() {
        use rand::{Rng, SeedableRng};
        // Each random direction is pushed downhill by power iteration on
        // 4I - A, with A applied through the three-point stencil.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for t in [3usize, 6] {
            let (g, _) = equivalence_constants(t).unwrap();
            let mut best = f64::INFINITY;
            for _ in 0..10_000 {
                let mut v: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for _ in 0..60 {
                    let w: Vec<f64> = (0..t)
                        .map(|k| {
                            let left = if k > 0 { v[k - 1] } else { 0.0 };
                            let right = if k + 1 < t { v[k + 1] } else { 0.0 };
                            4.0 * v[k] - (2.0 * v[k] - left - right)
                        })
                        .collect();
                    let n = euclidean_norm(&w);
                    v = w.iter().map(|x| x / n).collect();
                }
                let q = energy_norm(&v).powi(2) / euclidean_norm(&v).powi(2);
                best = best.min(q);
            }
            assert!(((best - g * g) / (g * g)).abs() < 1e-6, "T={t}: {best} vs {}", g * g);
        }
    }

    proptest! {
        #[test]
        fn constant_has_zero_difference(c in -1e3f64..1e3, n in 2usize..30) {
            let y = vec![c; n];
            prop_assert!(forward_difference(&y).unwrap().iter().all(|&d| d == 0.0));
        }

        #[test]
        fn differences_telescope(y in proptest::collection::vec(-1e3f64..1e3, 2..60)) {
            let s: f64 = forward_difference(&y).unwrap().iter().sum();
            let max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-12 * y.len() as f64 * max.max(1.0);
            prop_assert!((s - (y[y.len() - 1] - y[0])).abs() <= tol);
        }

        #[test]
        fn norm_equivalence_brackets(interior in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let y = GridFunction::from_interior(&interior);
            let n = norms(&y).unwrap();
            let (g, g1) = equivalence_constants(interior.len()).unwrap();
            prop_assert!(g * n.euclidean <= n.energy * (1.0 + 1e-12) + 1e-300);
            prop_assert!(n.energy <= g1 * n.euclidean * (1.0 + 1e-12) + 1e-300);
        }
    }
}
