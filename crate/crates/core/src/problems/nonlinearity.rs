//! Registry of named nonlinearities `f(k, y, u)`.
//!
//! Every nonlinearity is a plain value built from a name and a JSON parameter
//! map, so problem files can reference it and it can be shared freely across
//! threads.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Names accepted by [`Nonlinearity::builtin`].
pub const BUILTIN_NAMES: &[&str] = &["zero", "linear", "constant_sign", "example1", "example2", "table"];

/// Positive weight depending on the grid index, `q(k)`.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexWeight {
    Constant(f64),
    /// Values for `k = 1..=T`.
    PerIndex(Vec<f64>),
}

impl IndexWeight {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            IndexWeight::Constant(c) => *c,
            IndexWeight::PerIndex(v) => v.get(k.wrapping_sub(1)).copied().unwrap_or(f64::NAN),
        }
    }

    fn parse(name: &str, key: &str, value: Option<&Value>) -> Result<Self> {
        let w = match value {
            None => IndexWeight::Constant(1.0),
            Some(Value::Number(n)) => IndexWeight::Constant(n.as_f64().unwrap_or(f64::NAN)),
            Some(Value::Array(items)) => IndexWeight::PerIndex(
                items
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| bad_param(name, key, "expected numbers")))
                    .collect::<Result<_>>()?,
            ),
            Some(_) => return Err(bad_param(name, key, "expected a number or an array of numbers")),
        };
        let ok = match &w {
            IndexWeight::Constant(c) => c.is_finite() && *c > 0.0,
            IndexWeight::PerIndex(v) => !v.is_empty() && v.iter().all(|c| c.is_finite() && *c > 0.0),
        };
        if !ok {
            return Err(bad_param(name, key, "weights must be finite and positive"));
        }
        Ok(w)
    }
}

/// Positive bounded weight of the parameter value, `r(u) = a + b u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamWeight {
    pub a: f64,
    pub b: f64,
}

impl ParamWeight {
    pub const ONE: ParamWeight = ParamWeight { a: 1.0, b: 0.0 };

    pub fn at(&self, u: f64) -> f64 {
        self.a + self.b * u
    }

    /// Smallest value over `[-m, m]`.
    pub fn min_on(&self, m: f64) -> f64 {
        self.a - self.b.abs() * m
    }

    fn parse(name: &str, key: &str, value: Option<&Value>) -> Result<Self> {
        let w = match value {
            None => ParamWeight::ONE,
            Some(Value::Number(n)) => ParamWeight {
                a: n.as_f64().unwrap_or(f64::NAN),
                b: 0.0,
            },
            Some(Value::Object(obj)) => ParamWeight {
                a: obj.get("a").and_then(Value::as_f64).unwrap_or(0.0),
                b: obj.get("b").and_then(Value::as_f64).unwrap_or(0.0),
            },
            Some(_) => return Err(bad_param(name, key, "expected a number or {\"a\": .., \"b\": ..}")),
        };
        if !(w.a.is_finite() && w.b.is_finite()) {
            return Err(bad_param(name, key, "weight coefficients must be finite"));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Zero,
    Linear {
        slope: f64,
        u_coeff: f64,
    },
    ConstantSign {
        value: f64,
        u_coeff: f64,
    },
    Example1 {
        power: i32,
        q: IndexWeight,
        r: ParamWeight,
    },
    Example2 {
        q: IndexWeight,
        r: ParamWeight,
    },
    Table {
        nodes: Vec<f64>,
        values: Vec<f64>,
        u_coeff: f64,
    },
}

/// Declared growth metadata. Informational; the validators in
/// [`crate::analysis`] never trust it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthClass {
    /// Sign-condition threshold the builtin is known to satisfy.
    pub alpha: Option<f64>,
    /// Sublinear growth exponent known to hold.
    pub r: Option<f64>,
    /// Flag only: the referenced coercivity condition A4 is never stated, so
    /// it cannot be checked.
    pub a4_claimed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    name: String,
    params: Map<String, Value>,
    shape: Shape,
    growth: GrowthClass,
}

fn bad_param(name: &str, key: &str, msg: &str) -> Error {
    Error::schema(format!("f.params.{key}"), format!("nonlinearity `{name}`: {msg}"))
}

fn number(name: &str, params: &Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad_param(name, key, "expected a finite number")),
        None => default.ok_or_else(|| Error::MissingParameter {
            name: name.to_string(),
            param: key.to_string(),
        }),
    }
}

fn number_list(name: &str, params: &Map<String, Value>, key: &str) -> Result<Vec<f64>> {
    let arr = params
        .get(key)
        .ok_or_else(|| Error::MissingParameter {
            name: name.to_string(),
            param: key.to_string(),
        })?
        .as_array()
        .ok_or_else(|| bad_param(name, key, "expected an array"))?;
    arr.iter()
        .map(|v| {
            v.as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad_param(name, key, "expected finite numbers"))
        })
        .collect()
}

impl Nonlinearity {
    /// Looks up a builtin by name.
    ///
    /// * `zero`: `f ≡ 0`.
    /// * `linear`: `f = slope·y + u_coeff·u` (defaults `slope = -1`, `u_coeff = 0`).
    /// * `constant_sign`: `f = value + u_coeff·u`.
    /// * `example1`: `f = q(k) h(y) r(u)`, `h(y) = y^{2l}` for `y <= 0` and `-y^{2l}` for `y > 0`.
    /// * `example2`: `f = q(k) h(y) r(u)`, `h(y) = -(y+1)/(1+y^4)` for `y < 0` and `-1` for `y >= 0`.
    /// * `table`: piecewise-linear interpolation of `(y, f)` samples, held
    ///   constant outside the sampled range, plus `u_coeff·u`.
    ///
    /// `q` is a number or per-index array; `r` is a number or `{"a", "b"}` for
    /// `r(u) = a + b u`. Both default to 1.
    pub fn builtin(name: &str, params: Map<String, Value>) -> Result<Self> {
        let (shape, growth) = match name {
            "zero" => (
                Shape::Zero,
                GrowthClass {
                    alpha: Some(1.0),
                    r: Some(1.5),
                    a4_claimed: false,
                },
            ),
            "linear" => {
                let slope = number(name, &params, "slope", Some(-1.0))?;
                let u_coeff = number(name, &params, "u_coeff", Some(0.0))?;
                let alpha = (slope <= 0.0 && u_coeff == 0.0).then_some(1.0);
                (
                    Shape::Linear { slope, u_coeff },
                    GrowthClass {
                        alpha,
                        ..Default::default()
                    },
                )
            }
            "constant_sign" => {
                let value = number(name, &params, "value", None)?;
                let u_coeff = number(name, &params, "u_coeff", Some(0.0))?;
                (
                    Shape::ConstantSign { value, u_coeff },
                    GrowthClass {
                        r: Some(1.5),
                        ..Default::default()
                    },
                )
            }
            "example1" => {
                let l = params
                    .get("l")
                    .ok_or_else(|| Error::MissingParameter {
                        name: name.to_string(),
                        param: "l".to_string(),
                    })?
                    .as_u64()
                    .filter(|&l| (1..=16).contains(&l))
                    .ok_or_else(|| bad_param(name, "l", "expected an integer in 1..=16"))?;
                let q = IndexWeight::parse(name, "q", params.get("q"))?;
                let r = ParamWeight::parse(name, "r", params.get("r"))?;
                (
                    Shape::Example1 {
                        power: 2 * l as i32,
                        q,
                        r,
                    },
                    GrowthClass {
                        a4_claimed: true,
                        ..Default::default()
                    },
                )
            }
            "example2" => {
                let q = IndexWeight::parse(name, "q", params.get("q"))?;
                let r = ParamWeight::parse(name, "r", params.get("r"))?;
                (
                    Shape::Example2 { q, r },
                    GrowthClass {
                        alpha: Some(1.0),
                        r: Some(1.5),
                        a4_claimed: false,
                    },
                )
            }
            "table" => {
                let nodes = number_list(name, &params, "y")?;
                let values = number_list(name, &params, "f")?;
                if nodes.len() < 2 || nodes.len() != values.len() {
                    return Err(bad_param(name, "y", "need at least two nodes and as many `f` values"));
                }
                if nodes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad_param(name, "y", "nodes must be strictly increasing"));
                }
                let u_coeff = number(name, &params, "u_coeff", Some(0.0))?;
                (
                    Shape::Table { nodes, values, u_coeff },
                    GrowthClass {
                        r: Some(1.5),
                        ..Default::default()
                    },
                )
            }
            other => return Err(Error::UnknownNonlinearity(other.to_string())),
        };
        Ok(Nonlinearity {
            name: name.to_string(),
            params,
            shape,
            growth,
        })
    }

    /// Builds from a JSON object literal, e.g. `json!({"slope": -2.0})`.
    pub fn from_json(name: &str, params: Value) -> Result<Self> {
        match params {
            Value::Object(map) => Self::builtin(name, map),
            Value::Null => Self::builtin(name, Map::new()),
            _ => Err(Error::schema("f.params", "expected an object")),
        }
    }

    pub fn zero() -> Self {
        Self::builtin("zero", Map::new()).expect("zero builtin")
    }

    /// `f = slope·y + u_coeff·u`.
    pub fn linear(slope: f64, u_coeff: f64) -> Self {
        let mut m = Map::new();
        m.insert("slope".into(), slope.into());
        m.insert("u_coeff".into(), u_coeff.into());
        Self::builtin("linear", m).expect("finite linear coefficients")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Map<String, Value> {
        &self.params
    }

    pub fn growth(&self) -> GrowthClass {
        self.growth
    }

    /// Checks the weights against the horizon and the parameter bound.
    pub fn validate_for(&self, t: usize, m_param: f64) -> Result<()> {
        let (q, r) = match &self.shape {
            Shape::Example1 { q, r, .. } | Shape::Example2 { q, r } => (q, r),
            _ => return Ok(()),
        };
        if let IndexWeight::PerIndex(v) = q {
            if v.len() != t {
                return Err(bad_param(
                    &self.name,
                    "q",
                    &format!("expected {t} per-index weights, got {}", v.len()),
                ));
            }
        }
        if r.min_on(m_param) <= 0.0 {
            return Err(bad_param(&self.name, "r", "r(u) must stay positive on [-M, M]"));
        }
        Ok(())
    }

    /// `f(k, y, u)` with `k` in `1..=T`.
    pub fn eval(&self, k: usize, y: f64, u: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Linear { slope, u_coeff } => slope * y + u_coeff * u,
            Shape::ConstantSign { value, u_coeff } => value + u_coeff * u,
            Shape::Example1 { power, q, r } => q.at(k) * example1_h(*power, y) * r.at(u),
            Shape::Example2 { q, r } => q.at(k) * example2_h(y) * r.at(u),
            Shape::Table { nodes, values, u_coeff } => interpolate(nodes, values, y) + u_coeff * u,
        }
    }

    /// Closed-form `F(k, y, u) = ∫_0^y f(k, t, u) dt` when one is registered.
    pub fn primitive(&self, k: usize, y: f64, u: f64) -> Option<f64> {
        match &self.shape {
            Shape::Zero => Some(0.0),
            Shape::Linear { slope, u_coeff } => Some(0.5 * slope * y * y + u_coeff * u * y),
            Shape::ConstantSign { value, u_coeff } => Some((value + u_coeff * u) * y),
            Shape::Example1 { power, q, r } => Some(q.at(k) * example1_primitive(*power, y) * r.at(u)),
            Shape::Example2 { q, r } => Some(q.at(k) * example2_primitive(y) * r.at(u)),
            Shape::Table { .. } => None,
        }
    }

    /// Analytic `∂f/∂y` when one is registered.
    pub fn derivative(&self, k: usize, y: f64, u: f64) -> Option<f64> {
        match &self.shape {
            Shape::Zero | Shape::ConstantSign { .. } => Some(0.0),
            Shape::Linear { slope, .. } => Some(*slope),
            Shape::Example1 { power, q, r } => {
                let p = *power;
                let d = f64::from(p) * y.powi(p - 1);
                Some(q.at(k) * if y <= 0.0 { d } else { -d } * r.at(u))
            }
            Shape::Example2 { q, r } => Some(q.at(k) * example2_h_prime(y) * r.at(u)),
            Shape::Table { .. } => None,
        }
    }

    pub fn has_primitive(&self) -> bool {
        !matches!(self.shape, Shape::Table { .. })
    }
}

pub fn example1_h(power: i32, x: f64) -> f64 {
    let v = x.powi(power);
    if x <= 0.0 {
        v
    } else {
        -v
    }
}

fn example1_primitive(power: i32, x: f64) -> f64 {
    // both branches integrate to -|x|^{2l+1} / (2l+1)
    -x.abs().powi(power + 1) / f64::from(power + 1)
}

pub fn example2_h(x: f64) -> f64 {
    if x < 0.0 {
        -(x + 1.0) / (1.0 + x.powi(4))
    } else {
        -1.0
    }
}

fn example2_h_prime(x: f64) -> f64 {
    if x < 0.0 {
        let d = 1.0 + x.powi(4);
        -(d - 4.0 * x.powi(3) * (x + 1.0)) / (d * d)
    } else {
        0.0
    }
}

/// `∫ dx / (1 + x^4)` with value 0 at the origin.
fn inverse_quartic_primitive(x: f64) -> f64 {
    let x2 = x * x;
    SQRT_2 / 8.0 * ((x2 + SQRT_2 * x + 1.0) / (x2 - SQRT_2 * x + 1.0)).ln()
        + SQRT_2 / 4.0 * ((SQRT_2 * x + 1.0).atan() + (SQRT_2 * x - 1.0).atan())
}

/// Primitive of [`example2_h`] vanishing at 0: `-x` on the right and
/// `-½ atan(x²) - ∫_0^x dt/(1+t⁴)` on the left.
pub fn example2_primitive(x: f64) -> f64 {
    if x < 0.0 {
        -0.5 * (x * x).atan() - inverse_quartic_primitive(x)
    } else {
        -x
    }
}

fn interpolate(nodes: &[f64], values: &[f64], y: f64) -> f64 {
    let n = nodes.len();
    if y <= nodes[0] {
        return values[0];
    }
    if y >= nodes[n - 1] {
        return values[n - 1];
    }
    let i = nodes.partition_point(|&x| x <= y) - 1;
    let w = (y - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] + w * (values[i + 1] - values[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    fn all_closed_form() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::zero(),
            Nonlinearity::linear(-1.3, 0.4),
            Nonlinearity::from_json("constant_sign", json!({"value": -0.5, "u_coeff": 1.0})).unwrap(),
            Nonlinearity::from_json("example1", json!({"l": 1, "q": 2.0, "r": {"a": 1.0, "b": 0.3}})).unwrap(),
            Nonlinearity::from_json("example1", json!({"l": 2})).unwrap(),
            Nonlinearity::from_json("example2", json!({"q": [1.0, 2.0, 0.5], "r": {"a": 1.5, "b": -0.5}})).unwrap(),
        ]
    }

    #[test]
    fn example1_by_hand() {
        let f = Nonlinearity::from_json("example1", json!({"l": 1})).unwrap();
        assert_eq!(f.eval(1, -2.0, 0.0), 4.0);
        assert_eq!(f.eval(1, 2.0, 0.0), -4.0);
    }

    #[test]
    fn example2_primitive_vanishes_at_origin() {
        assert_eq!(example2_primitive(0.0), 0.0);
        assert_eq!(inverse_quartic_primitive(0.0), 0.0);
    }

    #[test]
    fn example2_primitive_slope_at_minus_one() {
        let h = 1e-5;
        let d = (example2_primitive(-1.0 + h) - example2_primitive(-1.0 - h)) / (2.0 * h);
        assert!(d.abs() < 1e-6, "{d}");
        assert_eq!(example2_h(-1.0), 0.0);
    }

    #[test]
    fn linear_defaults_to_minus_identity() {
        let f = Nonlinearity::from_json("linear", json!({})).unwrap();
        assert_eq!(f.eval(1, 3.0, 0.7), -3.0);
        assert_eq!(f.primitive(1, 2.0, 0.0), Some(-2.0));
    }

    #[test]
    fn table_interpolates_and_holds_ends() {
        let f = Nonlinearity::from_json("table", json!({"y": [-1.0, 0.0, 2.0], "f": [1.0, 0.0, -4.0]})).unwrap();
        assert_eq!(f.eval(1, -5.0, 0.0), 1.0);
        assert_eq!(f.eval(1, -0.5, 0.0), 0.5);
        assert_eq!(f.eval(1, 1.0, 0.0), -2.0);
        assert_eq!(f.eval(1, 9.0, 0.0), -4.0);
        assert!(f.primitive(1, 1.0, 0.0).is_none());
    }

    #[test]
    fn registry_errors() {
        assert!(matches!(
            Nonlinearity::from_json("cubic", json!({})),
            Err(Error::UnknownNonlinearity(_))
        ));
        assert!(matches!(
            Nonlinearity::from_json("example1", json!({})),
            Err(Error::MissingParameter { .. })
        ));
        assert!(matches!(
            Nonlinearity::from_json("constant_sign", json!({})),
            Err(Error::MissingParameter { .. })
        ));
        assert!(Nonlinearity::from_json("table", json!({"y": [1.0, 0.0], "f": [0.0, 1.0]})).is_err());
        assert!(Nonlinearity::from_json("example2", json!({"q": -1.0})).is_err());
    }

    #[test]
    fn weight_validation_against_bounds() {
        let f = Nonlinearity::from_json("example2", json!({"q": [1.0, 1.0], "r": {"a": 1.0, "b": 0.5}})).unwrap();
        assert!(f.validate_for(2, 1.0).is_ok());
        assert!(f.validate_for(3, 1.0).is_err());
        assert!(f.validate_for(2, 2.5).is_err());
    }

    // y·f(k, y, u) <= 0 holds on both branches of example1's h.
    #[test]
    fn example1_sign_of_y_times_f() {
        let f = Nonlinearity::from_json("example1", json!({"l": 1})).unwrap();
        for &y in &[-10.0, -2.0, -0.1, 0.0, 0.1, 2.0, 10.0] {
            assert!(y * f.eval(1, y, 0.3) <= 0.0);
        }
    }

    proptest! {
        #[test]
        fn primitive_anchored_and_differentiates_to_eval(
            idx in 0usize..6, k in 1usize..4, y in -4.0f64..4.0, u in -1.0f64..1.0,
        ) {
            let f = &all_closed_form()[idx];
            prop_assert_eq!(f.primitive(k, 0.0, u).unwrap(), 0.0);
            let h = 1e-5 * (1.0 + y.abs());
            let fd = (f.primitive(k, y + h, u).unwrap() - f.primitive(k, y - h, u).unwrap()) / (2.0 * h);
            let v = f.eval(k, y, u);
            prop_assert!((fd - v).abs() <= 1e-6 * (1.0 + v.abs()), "fd {} vs f {}", fd, v);
        }

        #[test]
        fn analytic_derivative_matches_central_difference(
            idx in 0usize..6, k in 1usize..4, y in -3.0f64..3.0, u in -1.0f64..1.0,
        ) {
            prop_assume!(y.abs() > 1e-3);
            let f = &all_closed_form()[idx];
            let h = 1e-6 * (1.0 + y.abs());
            let fd = (f.eval(k, y + h, u) - f.eval(k, y - h, u)) / (2.0 * h);
            let d = f.derivative(k, y, u).unwrap();
            prop_assert!((fd - d).abs() <= 1e-5 * (1.0 + d.abs()), "fd {} vs d {}", fd, d);
        }
    }
}
