//! The map-spec file format (TOML).
//!
//! ```toml
//! name = "tent"
//! backend = "rational"          # optional: "float" | "rational"
//!
//! [generator]
//! kind = "tent"                 # tent | beta | mod_one | skew_tent | perturbed_mod_one
//! slope = 2
//! ```
//!
//! or explicit branches:
//!
//! ```toml
//! name = "custom"
//! critical_points = [0, "1/2", 1]
//!
//! [[branches]]
//! kind = "affine"
//! slope = 2
//! intercept = 0
//!
//! [[branches]]
//! kind = "polynomial"           # c0 + c1 x + c2 x^2 + ...
//! coefficients = [0, 4, -4]
//! direction = "decreasing"
//! ```
//!
//! Numbers may be TOML integers, TOML floats, or strings holding a fraction
//! (`"3/2"`), a decimal (`"0.25"`) or `"golden"`. Integers, fractions and
//! decimal strings are exact; TOML floats and `"golden"` stand for their
//! double-precision value. Generator maps always have an exact form (float
//! parameters enter it with their binary value). Explicit-branch maps have
//! one when every coefficient and critical point is exact and every branch is
//! affine.

use num_rational::BigRational;
use serde::Deserialize;

use super::zoo::{self, AffineLayout, LoadedMap};
use super::Backend;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, RationalAffineMap};
use crate::map::{BranchSpec, Direction, PiecewiseMonotonicMap};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NumberLit {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => Scalar::to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }
}

impl NumberLit {
    fn resolve(&self, field: &str) -> Result<Number> {
        match self {
            NumberLit::Int(i) => Ok(Number::Exact(BigRational::from_integer((*i).into()))),
            NumberLit::Float(x) if x.is_finite() => Ok(Number::Float(*x)),
            NumberLit::Float(x) => Err(Error::Parse(format!("{field}: non-finite number {x}"))),
            NumberLit::Text(t) if t.trim() == "golden" => Ok(Number::Float(zoo::golden_ratio())),
            NumberLit::Text(t) => parse_rational(t)
                .map(Number::Exact)
                .ok_or_else(|| Error::Parse(format!("{field}: cannot read number '{t}'"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Tent {
        slope: NumberLit,
    },
    Beta {
        beta: NumberLit,
    },
    ModOne {
        beta: NumberLit,
        alpha: NumberLit,
    },
    SkewTent {
        left_slope: NumberLit,
        right_slope: NumberLit,
    },
    PerturbedModOne {
        beta: NumberLit,
        alpha: NumberLit,
        amplitude: NumberLit,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BranchRecord {
    Affine {
        slope: NumberLit,
        intercept: NumberLit,
        #[serde(default)]
        direction: Option<Direction>,
    },
    Polynomial {
        coefficients: Vec<NumberLit>,
        direction: Direction,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub name: String,
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub critical_points: Option<Vec<NumberLit>>,
    #[serde(default)]
    pub branches: Vec<BranchRecord>,
}

/// Builds both backends. Float parameters enter the exact form with their
/// binary value, so both describe the same map.
fn from_layout(
    name: &str,
    params: &[Number],
    make_exact: impl FnOnce(Vec<BigRational>) -> Result<AffineLayout<BigRational>>,
) -> Result<LoadedMap> {
    let values = params
        .iter()
        .map(|p| match p {
            Number::Exact(r) => Ok(r.clone()),
            Number::Float(x) => <BigRational as Scalar>::from_f64(*x)
                .ok_or_else(|| Error::Parse(format!("non-finite parameter {x}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedMap::from_exact(name, make_exact(values)?.build()?))
}

fn build_generator(name: &str, g: &GeneratorSpec) -> Result<LoadedMap> {
    use GeneratorSpec::*;
    match g {
        Tent { slope } => from_layout(
            name,
            &[slope.resolve("generator.slope")?],
            |v| zoo::tent(v[0].clone()),
        ),
        Beta { beta } => from_layout(
            name,
            &[beta.resolve("generator.beta")?],
            |v| zoo::beta(v[0].clone()),
        ),
        ModOne { beta, alpha } => from_layout(
            name,
            &[beta.resolve("generator.beta")?, alpha.resolve("generator.alpha")?],
            |v| zoo::mod_one(v[0].clone(), v[1].clone()),
        ),
        SkewTent {
            left_slope,
            right_slope,
        } => from_layout(
            name,
            &[
                left_slope.resolve("generator.left_slope")?,
                right_slope.resolve("generator.right_slope")?,
            ],
            |v| zoo::skew_tent(v[0].clone(), v[1].clone()),
        ),
        PerturbedModOne {
            beta,
            alpha,
            amplitude,
        } => Ok(LoadedMap::from_float(
            name,
            zoo::perturbed_mod_one(
                beta.resolve("generator.beta")?.to_f64(),
                alpha.resolve("generator.alpha")?.to_f64(),
                amplitude.resolve("generator.amplitude")?.to_f64(),
            )?,
        )),
    }
}

fn polynomial(coefficients: Vec<f64>) -> impl Fn(f64) -> f64 + Send + Sync {
    move |x| coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn build_branches(name: &str, critical: &[NumberLit], records: &[BranchRecord]) -> Result<LoadedMap> {
    let critical: Vec<Number> = critical
        .iter()
        .enumerate()
        .map(|(i, c)| c.resolve(&format!("critical_points[{i}]")))
        .collect::<Result<_>>()?;
    let mut float_branches = Vec::with_capacity(records.len());
    let mut exact_coeffs: Option<Vec<(BigRational, BigRational)>> = Some(Vec::new());
    for (i, rec) in records.iter().enumerate() {
        match rec {
            BranchRecord::Affine {
                slope,
                intercept,
                direction,
            } => {
                let s = slope.resolve(&format!("branches[{i}].slope"))?;
                let b = intercept.resolve(&format!("branches[{i}].intercept"))?;
                let spec = BranchSpec::affine(s.to_f64(), b.to_f64());
                if let Some(d) = direction {
                    if *d != spec.direction {
                        return Err(Error::Validation(format!(
                            "branches[{i}]: slope sign disagrees with direction"
                        )));
                    }
                }
                float_branches.push(spec);
                exact_coeffs = match (exact_coeffs, s.exact(), b.exact()) {
                    (Some(mut v), Some(s), Some(b)) => {
                        v.push((s.clone(), b.clone()));
                        Some(v)
                    }
                    _ => None,
                };
            }
            BranchRecord::Polynomial {
                coefficients,
                direction,
            } => {
                let coeffs: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, c)| Ok(c.resolve(&format!("branches[{i}].coefficients[{j}]"))?.to_f64()))
                    .collect::<Result<_>>()?;
                float_branches.push(BranchSpec::general(
                    *direction,
                    format!("polynomial {coeffs:?}"),
                    polynomial(coeffs),
                ));
                exact_coeffs = None;
            }
        }
    }
    let exact_critical: Option<Vec<BigRational>> =
        critical.iter().map(|c| c.exact().cloned()).collect();
    if let (Some(c), Some(coeffs)) = (exact_critical, exact_coeffs) {
        return Ok(LoadedMap::from_exact(name, RationalAffineMap::new(c, coeffs)?));
    }
    let float = PiecewiseMonotonicMap::new(critical.iter().map(Number::to_f64).collect(), float_branches)?;
    Ok(LoadedMap::from_float(name, float))
}

/// Parses and validates a map-spec document.
pub fn load_map_spec(text: &str) -> Result<LoadedMap> {
    let spec: MapSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut loaded = match (&spec.generator, &spec.critical_points) {
        (Some(g), None) if spec.branches.is_empty() => build_generator(&spec.name, g)?,
        (None, Some(c)) => build_branches(&spec.name, c, &spec.branches)?,
        _ => {
            return Err(Error::Parse(
                "give either [generator] or critical_points with [[branches]]".into(),
            ))
        }
    };
    if spec.backend == Some(Backend::Rational) && loaded.exact.is_none() {
        return Err(Error::NoExactForm);
    }
    loaded.backend = spec.backend;
    Ok(loaded)
}

/// `zoo:<name>` for a built-in map, otherwise a path to a map-spec file.
pub fn resolve_map(arg: &str) -> Result<LoadedMap> {
    if let Some(name) = arg.strip_prefix("zoo:") {
        return zoo::zoo_map(name);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Io {
        path: arg.into(),
        message: e.to_string(),
    })?;
    load_map_spec(&text)
}
