//! Tridiagonal kernels: Sturm-sequence bisection for symmetric tridiagonal
//! spectra, the Thomas algorithm, and the Sherman-Morrison correction for
//! cyclic (corner-augmented) tridiagonal systems.

use crate::error::{Error, Result};

/// Absolute tolerance for bisected eigenvalues.
pub const EIGEN_TOL: f64 = 1e-12;

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("tridiagonal matrix must be at least 1x1"));
        }
        crate::error::check_len("off-diagonal", diag.len() - 1, off.len())?;
        Ok(SymTridiagonal { diag, off })
    }

    /// The matrix of the Dirichlet energy form: diagonal 2, off-diagonal -1.
    pub fn dirichlet_laplacian(n: usize) -> Result<Self> {
        Self::new(vec![2.0; n], vec![-1.0; n.saturating_sub(1)])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `lambda` (negative pivots of the
    /// LDLᵀ factorisation of `A - lambda I`).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let guard = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = self.diag[0] - lambda;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let piv = if d.abs() < guard { guard.copysign(d) } else { d };
            d = self.diag[i] - lambda - self.off[i - 1] * self.off[i - 1] / piv;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::invalid(format!(
                "eigenvalue index {k} out of range for {}x{} matrix",
                self.dim(),
                self.dim()
            )));
        }
        let (lo, hi) = self.gershgorin();
        let pad = 1e-8 * (1.0 + lo.abs().max(hi.abs()));
        let (mut a, mut b) = (lo - pad, hi + pad);
        // invariant: sturm_count(a) <= k < sturm_count(b)
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.sturm_count(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    pub fn extremal_eigenvalues(&self) -> (f64, f64) {
        let n = self.dim();
        // Indices are in range by construction.
        let lo = self.eigenvalue(0, EIGEN_TOL).unwrap_or(f64::NAN);
        let hi = self.eigenvalue(n - 1, EIGEN_TOL).unwrap_or(f64::NAN);
        (lo, hi)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.eigenvalue(k, EIGEN_TOL).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        solve_tridiagonal(&self.off, &self.diag, &self.off, rhs)
    }
}

/// Thomas algorithm for `A x = rhs` with `A` tridiagonal (no pivoting).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    crate::error::check_len("rhs", n, rhs.len())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    crate::error::check_len("sub-diagonal", n - 1, sub.len())?;
    crate::error::check_len("super-diagonal", n - 1, sup.len())?;

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::invalid("singular tridiagonal system (zero pivot at row 0)"));
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i - 1] * c[i];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::invalid(format!(
                "singular tridiagonal system (zero pivot at row {i})"
            )));
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / beta;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    Ok(x)
}

/// Symmetric tridiagonal matrix with an extra coupling `corner` between the
/// first and last unknowns.
///
/// For `n = 2` the corner and the off-diagonal address the same entry and are
/// added; for `n = 1` the corner is a self-coupling and contributes nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub corner: f64,
}

impl CyclicTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = SymTridiagonal {
            diag: self.diag.clone(),
            off: self.off.clone(),
        }
        .mul_vec(v);
        if n >= 2 {
            out[0] += self.corner * v[n - 1];
            out[n - 1] += self.corner * v[0];
        }
        out
    }

    /// Solves `A x = rhs`. Uses the Sherman-Morrison correction for `n >= 3`
    /// and direct elimination below that.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        crate::error::check_len("rhs", n, rhs.len())?;
        match n {
            0 => Ok(Vec::new()),
            1 => {
                if self.diag[0] == 0.0 {
                    return Err(Error::invalid("singular 1x1 system"));
                }
                Ok(vec![rhs[0] / self.diag[0]])
            }
            2 => {
                let b = self.off[0] + self.corner;
                let det = self.diag[0] * self.diag[1] - b * b;
                if det == 0.0 || !det.is_finite() {
                    return Err(Error::invalid("singular 2x2 system"));
                }
                Ok(vec![
                    (self.diag[1] * rhs[0] - b * rhs[1]) / det,
                    (self.diag[0] * rhs[1] - b * rhs[0]) / det,
                ])
            }
            _ => self.sherman_morrison(rhs),
        }
    }

    fn sherman_morrison(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let alpha = self.corner;
        if alpha == 0.0 {
            return solve_tridiagonal(&self.off, &self.diag, &self.off, rhs);
        }
        // A = B + w wᵀ/gamma-style rank-one split, with B tridiagonal.
        let gamma = if self.diag[0] != 0.0 { -self.diag[0] } else { -1.0 };
        let mut bb = self.diag.clone();
        bb[0] -= gamma;
        bb[n - 1] -= alpha * alpha / gamma;
        let x = solve_tridiagonal(&self.off, &bb, &self.off, rhs)?;
        let mut w = vec![0.0; n];
        w[0] = gamma;
        w[n - 1] = alpha;
        let z = solve_tridiagonal(&self.off, &bb, &self.off, &w)?;
        let vx = x[0] + alpha / gamma * x[n - 1];
        let vz = z[0] + alpha / gamma * z[n - 1];
        let denom = 1.0 + vz;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::invalid("singular cyclic tridiagonal system"));
        }
        let factor = vx / denom;
        Ok(x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_eigenvalues_match_closed_form() {
        for n in [1usize, 2, 3, 7, 20] {
            let lap = SymTridiagonal::dirichlet_laplacian(n).unwrap();
            let eig = lap.eigenvalues();
            for (k, ev) in eig.iter().enumerate() {
                let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
                assert!((ev - exact).abs() < 1e-11, "n={n} k={k}: {ev} vs {exact}");
            }
        }
    }

    #[test]
    fn thomas_solves_known_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1, 0, 1]  ->  x = [1, 1, 1]
        let x = solve_tridiagonal(&[-1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!(max_abs_diff(&x, &[1.0, 1.0, 1.0]) < 1e-14);
    }

    #[test]
    fn thomas_reports_zero_pivot() {
        let err = solve_tridiagonal(&[1.0], &[0.0, 1.0], &[1.0], &[1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn cyclic_matches_dense_product() {
        for n in 1usize..8 {
            let m = CyclicTridiagonal {
                diag: (0..n).map(|i| 4.0 + i as f64 * 0.3).collect(),
                off: (0..n.saturating_sub(1)).map(|i| -1.0 - 0.1 * i as f64).collect(),
                corner: -0.7,
            };
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).sin() + 0.2).collect();
            let rhs = m.mul_vec(&x_true);
            let x = m.solve(&rhs).unwrap();
            assert!(max_abs_diff(&x, &x_true) < 1e-12, "n={n}");
        }
    }
}
