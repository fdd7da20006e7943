//! Globally adaptive composite Simpson quadrature.
//!
//! The interval with the largest local error estimate is bisected until the
//! summed estimate drops below the absolute tolerance. Local estimates come
//! from comparing one Simpson panel with two half panels; the accepted value
//! carries the Richardson correction.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_INTERVALS: usize = 1 << 15;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    refined: f64,
    err: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Self {
        let m = 0.5 * (a + b);
        let h = b - a;
        let flm = f(0.5 * (a + m));
        let frm = f(0.5 * (m + b));
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        let refined = h / 12.0 * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb);
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
            refined,
            err: (refined - whole).abs() / 15.0,
        }
    }

    fn value(&self) -> f64 {
        self.refined + (self.refined - self.whole) / 15.0
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `∫_a^b f(t) dt` to absolute tolerance `tol` using at most `max_intervals`
/// panels. An empty interval integrates to exactly zero; `b < a` flips sign.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("quadrature limits must be finite"));
    }
    if b < a {
        return integrate(f, b, a, tol, max_intervals).map(|v| -v);
    }

    let mut heap = BinaryHeap::new();
    let first = Panel::new(&f, a, b, f(a), f(0.5 * (a + b)), f(b));
    let mut total_err = first.err;
    heap.push(first);

    loop {
        if !total_err.is_finite() {
            let estimate: f64 = heap.iter().map(Panel::value).sum();
            return Err(Error::Quadrature {
                estimate,
                error_estimate: total_err,
                intervals: heap.len(),
            });
        }
        if total_err <= tol {
            break;
        }
        if heap.len() >= max_intervals {
            let estimate: f64 = heap.iter().map(Panel::value).sum();
            return Err(Error::Quadrature {
                estimate,
                error_estimate: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // panel cannot be split further in floating point
            total_err -= worst.err;
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        let left = Panel::new(&f, worst.a, m, worst.fa, f(0.5 * (worst.a + m)), worst.fm);
        let right = Panel::new(&f, m, worst.b, worst.fm, f(0.5 * (m + worst.b)), worst.fb);
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        // keep the running sum from drifting
        if heap.len() % 256 == 0 {
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }

    // sum small contributions first
    let mut parts: Vec<Panel> = heap.into_vec();
    parts.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(parts.iter().map(Panel::value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let v = integrate(|t| 1.0 + t - 3.0 * t * t + t * t * t, -1.0, 2.0, 1e-12, 64).unwrap();
        let exact = |t: f64| t + t * t / 2.0 - t * t * t + t.powi(4) / 4.0;
        assert!((v - (exact(2.0) - exact(-1.0))).abs() < 1e-13);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        assert_eq!(integrate(|t| t.exp(), 0.3, 0.3, 1e-10, 16).unwrap(), 0.0);
        let fwd = integrate(|t| t.sin(), 0.0, 2.0, 1e-12, 1 << 12).unwrap();
        let rev = integrate(|t| t.sin(), 2.0, 0.0, 1e-12, 1 << 12).unwrap();
        assert_eq!(fwd, -rev);
        assert!((fwd - (1.0 - 2f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand() {
        let v = integrate(|t: f64| t.abs(), -1.0, 3.0, 1e-12, 1 << 15).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let err = integrate(|t: f64| (1.0 / t).sin(), 1e-6, 1.0, 1e-14, 8).unwrap_err();
        match err {
            Error::Quadrature {
                intervals, estimate, ..
            } => {
                assert!(intervals >= 8);
                assert!(estimate.is_finite());
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate(|t| t, 0.0, 1.0, 0.0, 16).is_err());
        assert!(integrate(|t| t, 0.0, 1.0, f64::NAN, 16).is_err());
    }
}
