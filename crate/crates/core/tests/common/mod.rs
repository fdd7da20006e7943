//! Random problem generators shared by the integration tests.
#![allow(dead_code)]

use coercive_bvp::problems::{DirichletProblem, EmdenProblem, Nonlinearity, ParameterFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// A nonlinearity with a known sign threshold `alpha` for `|u| <= m`.
pub fn random_dirichlet_f(rng: &mut ChaCha8Rng, t: usize, m: f64) -> (Nonlinearity, f64) {
    match rng.gen_range(0..5) {
        0 => {
            let s = rng.gen_range(0.2..2.0);
            let c = rng.gen_range(-0.5..0.5);
            (Nonlinearity::linear(-s, c), (c.abs() * m / s).max(0.1))
        }
        1 => {
            let q = uniform(rng, t, 0.5, 1.5);
            let f = Nonlinearity::from_json(
                "example1",
                json!({"l": rng.gen_range(1..=2), "q": q, "r": {"a": 1.0, "b": 0.25}}),
            );
            (f.unwrap(), 1.0)
        }
        2 => {
            let q = uniform(rng, t, 0.5, 1.0);
            let f = Nonlinearity::from_json("example2", json!({"q": q, "r": {"a": 1.0, "b": 0.25}}));
            (f.unwrap(), 1.0)
        }
        3 => {
            let slopes = uniform(rng, 4, 0.2, 2.0);
            let nodes = vec![-3.0, -1.0, 0.0, 1.0, 3.0];
            let mut values = vec![0.0; 5];
            values[1] = slopes[1];
            values[0] = values[1] + 2.0 * slopes[0];
            values[3] = -slopes[2];
            values[4] = values[3] - 2.0 * slopes[3];
            let f = Nonlinearity::from_json("table", json!({"y": nodes, "f": values}));
            (f.unwrap(), 0.1)
        }
        _ => (Nonlinearity::zero(), 1.0),
    }
}

/// Dirichlet instance satisfying A1-A3 with a valid `alpha` and `M = 1`.
pub fn random_dirichlet(rng: &mut ChaCha8Rng, t: usize) -> DirichletProblem {
    let p = uniform(rng, t + 1, 0.5, 2.0);
    let g = uniform(rng, t, -2.0, 2.0);
    let (f, alpha) = random_dirichlet_f(rng, t, 1.0);
    DirichletProblem::new(p, g, f, 1.0, Some(alpha)).unwrap()
}

/// Emden instance with `q < 0` (so `M + Q` is positive definite), `g != 0`
/// and a bounded nonlinearity.
pub fn random_emden(rng: &mut ChaCha8Rng, t: usize) -> EmdenProblem {
    let p = uniform(rng, t + 1, 0.5, 2.0);
    let q = uniform(rng, t, -2.0, -0.5);
    let mut g = uniform(rng, t, -2.0, 2.0);
    g[0] = 1.0;
    let f = match rng.gen_range(0..3) {
        0 => Nonlinearity::from_json(
            "example2",
            json!({"q": rng.gen_range(0.5..1.5), "r": {"a": 1.0, "b": 0.25}}),
        )
        .unwrap(),
        1 => Nonlinearity::from_json(
            "constant_sign",
            json!({"value": rng.gen_range(-1.0..1.0), "u_coeff": 0.5}),
        )
        .unwrap(),
        _ => Nonlinearity::zero(),
    };
    EmdenProblem::new(p, q, g, f, 1.0, 1.5).unwrap()
}

pub fn random_u(rng: &mut ChaCha8Rng, t: usize, m: f64) -> ParameterFunction {
    ParameterFunction::new(uniform(rng, t, -m, m), m).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, t: usize, scale: f64) -> Vec<f64> {
    uniform(rng, t, -scale, scale)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
