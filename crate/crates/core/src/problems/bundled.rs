use std::path::{Path, PathBuf};

use serde_json::json;

use super::{DirichletProblem, EmdenProblem, Nonlinearity, Problem};
use crate::error::Result;

/// The bundled example problems, by file stem.
pub fn bundled_problems() -> Vec<(&'static str, Problem)> {
    let linear = DirichletProblem::uniform(
        (1..=10).map(|k| (k as f64 * 0.7).sin()).collect(),
        Nonlinearity::linear(-1.0, 1.0),
        2.0,
        Some(2.0),
    );
    let parabola = DirichletProblem::uniform(vec![-1.0; 3], Nonlinearity::zero(), 1.0, Some(1.0));
    let example1 = DirichletProblem::new(
        vec![1.0, 1.5, 1.0, 2.0, 1.0, 1.0],
        vec![0.5, -1.0, 2.0, 0.0, -0.5],
        Nonlinearity::from_json("example1", json!({"l": 1, "q": 1.0, "r": {"a": 1.0, "b": 0.25}})).expect("example1"),
        1.0,
        Some(1.0),
    );
    let example2 = DirichletProblem::uniform(
        vec![-1.5; 8],
        Nonlinearity::from_json("example2", json!({"q": 1.0, "r": {"a": 1.0, "b": 0.25}})).expect("example2"),
        1.0,
        Some(1.0),
    );
    let example2_emden = EmdenProblem::new(
        vec![1.0; 7],
        vec![-1.0; 6],
        vec![1.0, 0.0, -0.5, 0.0, 0.25, 0.0],
        Nonlinearity::from_json("example2", json!({"q": 1.0, "r": {"a": 1.0, "b": 0.25}})).expect("example2"),
        1.0,
        1.5,
    );
    vec![
        ("linear", Problem::Dirichlet(linear.expect("linear"))),
        ("parabola", Problem::Dirichlet(parabola.expect("parabola"))),
        ("example1", Problem::Dirichlet(example1.expect("example1"))),
        ("example2", Problem::Dirichlet(example2.expect("example2"))),
        (
            "example2_emden",
            Problem::Emden(example2_emden.expect("example2_emden")),
        ),
    ]
}

/// Writes every bundled problem to `<dir>/<name>.json`.
pub fn write_bundled(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    bundled_problems()
        .into_iter()
        .map(|(name, problem)| {
            let path = dir.join(format!("{name}.json"));
            problem.save(&path)?;
            Ok(path)
        })
        .collect()
}
