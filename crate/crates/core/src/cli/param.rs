//! Parameter specifications accepted by `--param`.
//!
//! * `0.5` or `const:0.5`: the constant function.
//! * `values:0.1,0.2,0.3`: one value per grid index.
//! * `file:path.json`: a JSON array of numbers, or an array of arrays for a
//!   sequence whose last entry is the limit.
//! * `seq:base=0,dir=1,count=20,schedule=harmonic`: `u_n = base + s_n dir`
//!   followed by the limit `base`. `dir=random` draws a direction in
//!   `[-1, 1]^T` from the seed; `schedule` is `harmonic` (`1/n`) or
//!   `geometric:q` (`q^(n-1)`).

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problems::{harmonic_schedule, make_parameter_sequence, ParameterFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Constant(f64),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Harmonic,
    Geometric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamSpec {
    Constant(f64),
    Values(Vec<f64>),
    File(PathBuf),
    Sequence {
        base: f64,
        direction: Direction,
        count: usize,
        schedule: Schedule,
    },
}

fn bad(spec: &str, msg: impl std::fmt::Display) -> Error {
    Error::schema("param", format!("{spec:?}: {msg}"))
}

fn number(spec: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(spec, format!("`{s}` is not a finite number")))
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec::Constant(0.0)
    }
}

impl std::str::FromStr for ParamSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("const:") {
            return Ok(ParamSpec::Constant(number(spec, rest)?));
        }
        if let Some(rest) = spec.strip_prefix("values:") {
            let values = rest.split(',').map(|s| number(spec, s)).collect::<Result<Vec<_>>>()?;
            return Ok(ParamSpec::Values(values));
        }
        if let Some(rest) = spec.strip_prefix("file:") {
            return Ok(ParamSpec::File(PathBuf::from(rest)));
        }
        if let Some(rest) = spec.strip_prefix("seq:") {
            let (mut base, mut direction, mut count, mut schedule) =
                (0.0, Direction::Constant(1.0), 20, Schedule::Harmonic);
            for item in rest.split(',').filter(|s| !s.is_empty()) {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| bad(spec, format!("expected key=value, got `{item}`")))?;
                match key.trim() {
                    "base" => base = number(spec, value)?,
                    "dir" if value.trim() == "random" => direction = Direction::Random,
                    "dir" => direction = Direction::Constant(number(spec, value)?),
                    "count" => {
                        count = value
                            .trim()
                            .parse()
                            .ok()
                            .filter(|&c| c > 0)
                            .ok_or_else(|| bad(spec, "count must be a positive integer"))?
                    }
                    "schedule" => {
                        schedule = match value.trim() {
                            "harmonic" => Schedule::Harmonic,
                            s => match s.strip_prefix("geometric:") {
                                Some(q) => {
                                    let q = number(spec, q)?;
                                    if !(q > 0.0 && q < 1.0) {
                                        return Err(bad(spec, "geometric ratio must lie in (0, 1)"));
                                    }
                                    Schedule::Geometric(q)
                                }
                                None => return Err(bad(spec, format!("unknown schedule `{s}`"))),
                            },
                        }
                    }
                    other => return Err(bad(spec, format!("unknown key `{other}`"))),
                }
            }
            return Ok(ParamSpec::Sequence {
                base,
                direction,
                count,
                schedule,
            });
        }
        Ok(ParamSpec::Constant(number(spec, spec)?))
    }
}

impl ParamSpec {
    /// The parameter sequence this describes. Single parameters give
    /// a one-element sequence.
    pub fn sequence(&self, t: usize, m_param: f64, seed: u64) -> Result<Vec<ParameterFunction>> {
        let check = |v: Vec<f64>| {
            if v.len() != t {
                return Err(Error::schema(
                    "param",
                    format!("expected {t} values, found {}", v.len()),
                ));
            }
            ParameterFunction::new(v, m_param).map_err(|e| Error::schema("param", e.to_string()))
        };
        match self {
            ParamSpec::Constant(c) => Ok(vec![check(vec![*c; t])?]),
            ParamSpec::Values(v) => Ok(vec![check(v.clone())?]),
            ParamSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let value: serde_json::Value = serde_json::from_str(&text)?;
                match value {
                    serde_json::Value::Array(items) if items.iter().all(|i| i.is_array()) => {
                        items.into_iter().map(|i| check(serde_json::from_value(i)?)).collect()
                    }
                    other => Ok(vec![check(serde_json::from_value(other)?)?]),
                }
            }
            ParamSpec::Sequence {
                base,
                direction,
                count,
                schedule,
            } => {
                let base = check(vec![*base; t])?;
                let dir = match direction {
                    Direction::Constant(d) => vec![*d; t],
                    Direction::Random => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (0..t).map(|_| rng.gen_range(-1.0..=1.0)).collect()
                    }
                };
                let sched = match schedule {
                    Schedule::Harmonic => harmonic_schedule(*count),
                    Schedule::Geometric(q) => (0..*count).map(|n| q.powi(n as i32)).collect(),
                };
                make_parameter_sequence(&base, &dir, &sched, *count)
            }
        }
    }

    /// The single parameter for a solve: the last element of the sequence.
    pub fn single(&self, t: usize, m_param: f64, seed: u64) -> Result<ParameterFunction> {
        Ok(self.sequence(t, m_param, seed)?.pop().expect("nonempty sequence"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!("0.5".parse::<ParamSpec>().unwrap(), ParamSpec::Constant(0.5));
        assert_eq!("const:-1".parse::<ParamSpec>().unwrap(), ParamSpec::Constant(-1.0));
        assert_eq!(
            "values:1,2,3".parse::<ParamSpec>().unwrap(),
            ParamSpec::Values(vec![1.0, 2.0, 3.0])
        );
        assert_eq!(
            "seq:base=0.1,dir=random,count=5,schedule=geometric:0.5"
                .parse::<ParamSpec>()
                .unwrap(),
            ParamSpec::Sequence {
                base: 0.1,
                direction: Direction::Random,
                count: 5,
                schedule: Schedule::Geometric(0.5)
            }
        );
        assert!("seq:count=0".parse::<ParamSpec>().is_err());
        assert!("seq:colour=red".parse::<ParamSpec>().is_err());
        assert!("abc".parse::<ParamSpec>().is_err());
    }

    #[test]
    fn sequences_end_at_the_limit() {
        let spec: ParamSpec = "seq:base=0.2,dir=1,count=4".parse().unwrap();
        let seq = spec.sequence(3, 2.0, 0).unwrap();
        assert_eq!(seq.len(), 5);
        assert_eq!(seq[4].values(), &[0.2, 0.2, 0.2]);
        assert!((seq[1].values()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn random_direction_follows_the_seed() {
        let spec: ParamSpec = "seq:dir=random,count=3".parse().unwrap();
        assert_eq!(spec.sequence(4, 1.0, 9).unwrap(), spec.sequence(4, 1.0, 9).unwrap());
        assert_ne!(spec.sequence(4, 1.0, 9).unwrap(), spec.sequence(4, 1.0, 10).unwrap());
    }

    #[test]
    fn out_of_range_values_are_schema_errors() {
        let err = ParamSpec::Constant(3.0).sequence(2, 1.0, 0).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "param"));
        assert!(ParamSpec::Values(vec![0.0]).sequence(2, 1.0, 0).is_err());
    }
}
