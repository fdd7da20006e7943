//! JSON problem files.
//!
//! ```json
//! {"kind": "dirichlet", "T": 3, "p": [1, 1, 1, 1], "g": [-1, -1, -1],
//!  "f": {"name": "zero", "params": {}}, "M": 1.0, "alpha": 1.0}
//! ```
//!
//! `p` has `T+1` entries in both kinds: `p(1..=T+1)` for Dirichlet problems and
//! `p(0..=T)` for Emden problems. `q` (Emden only) and `g` have `T` entries.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{DirichletProblem, EmdenProblem, Nonlinearity, Problem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: String,
    #[serde(rename = "T")]
    pub t: usize,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    pub g: Vec<f64>,
    pub f: FunctionSpec,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

fn expect_len(field: &str, expected: usize, found: usize, what: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::schema(
            field,
            format!("expected {expected} entries ({what}), found {found}"),
        ))
    }
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem> {
        let t = self.t;
        if t == 0 {
            return Err(Error::schema("T", "horizon must be at least 1"));
        }
        let f = Nonlinearity::builtin(&self.f.name, self.f.params)?;
        expect_len("g", t, self.g.len(), "g(1..=T)")?;
        match self.kind.as_str() {
            "dirichlet" => {
                expect_len("p", t + 1, self.p.len(), "p(1..=T+1)")?;
                if self.q.as_ref().is_some_and(|q| !q.is_empty()) {
                    return Err(Error::schema("q", "Dirichlet problems take no q"));
                }
                if self.r.is_some() {
                    return Err(Error::schema("r", "Dirichlet problems take no r"));
                }
                Ok(Problem::Dirichlet(DirichletProblem::new(
                    self.p, self.g, f, self.m, self.alpha,
                )?))
            }
            "emden" => {
                expect_len("p", t + 1, self.p.len(), "p(0..=T)")?;
                let q = self
                    .q
                    .ok_or_else(|| Error::schema("q", "missing for an emden problem"))?;
                expect_len("q", t, q.len(), "q(1..=T)")?;
                let r = self
                    .r
                    .ok_or_else(|| Error::schema("r", "missing for an emden problem"))?;
                if self.alpha.is_some() {
                    return Err(Error::schema("alpha", "Emden problems take no alpha"));
                }
                Ok(Problem::Emden(EmdenProblem::new(self.p, q, self.g, f, self.m, r)?))
            }
            other => Err(Error::schema(
                "kind",
                format!("expected \"dirichlet\" or \"emden\", got {other:?}"),
            )),
        }
    }
}

impl From<&Problem> for ProblemFile {
    fn from(problem: &Problem) -> Self {
        let spec = |f: &Nonlinearity| FunctionSpec {
            name: f.name().to_string(),
            params: f.params().clone(),
        };
        match problem {
            Problem::Dirichlet(d) => ProblemFile {
                kind: "dirichlet".into(),
                t: d.horizon(),
                p: d.p_values().to_vec(),
                q: None,
                g: d.g().to_vec(),
                f: spec(d.f()),
                m: d.m_param(),
                alpha: d.alpha(),
                r: None,
            },
            Problem::Emden(e) => ProblemFile {
                kind: "emden".into(),
                t: e.horizon(),
                p: e.p_values().to_vec(),
                q: Some(e.q_values().to_vec()),
                g: e.g().to_vec(),
                f: spec(e.f()),
                m: e.m_param(),
                alpha: None,
                r: Some(e.r()),
            },
        }
    }
}

impl Problem {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(s)?;
        file.into_problem()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProblemFile::from(self))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json_string()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}
