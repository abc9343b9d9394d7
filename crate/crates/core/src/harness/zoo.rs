//! Named map families and the built-in zoo of transitive examples.

use std::f64::consts::PI;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{rational, RationalAffineMap};
use crate::map::{BranchSpec, Direction, PiecewiseMonotonicMap};
use crate::scalar::Scalar;

/// Critical points and `(slope, intercept)` per branch of a piecewise affine map.
pub struct AffineLayout<S> {
    pub critical_points: Vec<S>,
    pub coefficients: Vec<(S, S)>,
}

impl AffineLayout<f64> {
    pub fn build(self) -> Result<PiecewiseMonotonicMap> {
        let branches = self
            .coefficients
            .into_iter()
            .map(|(s, b)| BranchSpec::affine(s, b))
            .collect();
        PiecewiseMonotonicMap::new(self.critical_points, branches)
    }
}

impl AffineLayout<BigRational> {
    pub fn build(self) -> Result<RationalAffineMap> {
        RationalAffineMap::new(self.critical_points, self.coefficients)
    }
}

fn int<S: Scalar>(k: i64) -> S {
    S::from_ratio(k, 1)
}

/// `x ↦ s x` on `(0, 1/2)`, `x ↦ s (1 - x)` on `(1/2, 1)`.
pub fn tent<S: Scalar>(slope: S) -> Result<AffineLayout<S>> {
    if !(slope > S::zero()) {
        return Err(Error::Validation("tent slope must be positive".into()));
    }
    Ok(AffineLayout {
        critical_points: vec![S::zero(), S::from_ratio(1, 2), S::one()],
        coefficients: vec![(slope.clone(), S::zero()), (-slope.clone(), slope)],
    })
}

/// `x ↦ β x mod 1`.
pub fn beta<S: Scalar>(beta: S) -> Result<AffineLayout<S>> {
    mod_one(beta, S::zero())
}

/// `x ↦ β x + α mod 1` with `0 <= α < 1`.
pub fn mod_one<S: Scalar>(beta: S, alpha: S) -> Result<AffineLayout<S>> {
    if !(beta > S::zero()) || alpha < S::zero() || alpha >= S::one() {
        return Err(Error::Validation(
            "mod_one needs beta > 0 and 0 <= alpha < 1".into(),
        ));
    }
    let mut critical_points = vec![S::zero()];
    let mut coefficients = vec![(beta.clone(), alpha.clone())];
    let mut k = 1i64;
    // breaks where β x + α = k, for α < k < β + α
    while int::<S>(k) < beta.clone() + alpha.clone() {
        critical_points.push((int::<S>(k) - alpha.clone()) / beta.clone());
        coefficients.push((beta.clone(), alpha.clone() - int::<S>(k)));
        k += 1;
    }
    critical_points.push(S::one());
    if coefficients.len() < 2 {
        return Err(Error::Validation(
            "mod_one needs beta + alpha > 1 to have two branches".into(),
        ));
    }
    Ok(AffineLayout {
        critical_points,
        coefficients,
    })
}

/// Tent with slopes `left` and `-right`, peak at `right / (left + right)`.
pub fn skew_tent<S: Scalar>(left: S, right: S) -> Result<AffineLayout<S>> {
    if !(left > S::zero() && right > S::zero()) {
        return Err(Error::Validation("skew tent slopes must be positive".into()));
    }
    let peak = right.clone() / (left.clone() + right.clone());
    Ok(AffineLayout {
        critical_points: vec![S::zero(), peak, S::one()],
        coefficients: vec![(left, S::zero()), (-right.clone(), right)],
    })
}

/// `x ↦ f(x) mod 1` with `f(x) = β x + α + a sin(2πx) / 2π`, a nonlinear
/// monotone mod-one transformation (needs `|a| < β`).
pub fn perturbed_mod_one(beta: f64, alpha: f64, amplitude: f64) -> Result<PiecewiseMonotonicMap> {
    if !(beta > 0.0) || amplitude.abs() >= beta || !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation(
            "perturbed_mod_one needs beta > |amplitude| and 0 <= alpha < 1".into(),
        ));
    }
    let f = move |x: f64| beta * x + alpha + amplitude * (2.0 * PI * x).sin() / (2.0 * PI);
    let mut critical = vec![0.0];
    let mut k = 1;
    while (k as f64) < beta + alpha {
        let target = k as f64;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        critical.push(0.5 * (lo + hi));
        k += 1;
    }
    critical.push(1.0);
    let branches = (0..critical.len() - 1)
        .map(|j| {
            BranchSpec::general(Direction::Increasing, format!("f - {j}"), move |x| {
                f(x) - j as f64
            })
        })
        .collect();
    PiecewiseMonotonicMap::new(critical, branches)
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

pub fn tent_float(slope: f64) -> PiecewiseMonotonicMap {
    tent(slope).and_then(|l| l.build()).expect("valid tent slope")
}

pub fn tent_exact(slope: BigRational) -> RationalAffineMap {
    tent(slope).and_then(|l| l.build()).expect("valid tent slope")
}

/// The golden-mean β-transformation `x ↦ φ x mod 1`.
pub fn golden() -> PiecewiseMonotonicMap {
    beta(golden_ratio()).and_then(|l| l.build()).expect("valid beta")
}

/// The β-transformation whose slope is the double nearest the golden ratio,
/// in exact arithmetic.
pub fn golden_exact() -> RationalAffineMap {
    let slope = <BigRational as Scalar>::from_f64(golden_ratio()).expect("finite");
    beta(slope).and_then(|l| l.build()).expect("valid beta")
}

pub fn skew_tent_exact(left: BigRational, right: BigRational) -> RationalAffineMap {
    skew_tent(left, right)
        .and_then(|l| l.build())
        .expect("valid skew tent")
}

/// `x ↦ (3/2) x + sin(2πx)/(10π) mod 1`: derivative between 1.3 and 1.7.
pub fn wobbly() -> PiecewiseMonotonicMap {
    perturbed_mod_one(1.5, 0.0, 0.2).expect("valid perturbed map")
}

/// A map in both backends, when it has an exact form.
#[derive(Clone, Debug)]
pub struct LoadedMap {
    pub name: String,
    pub float: PiecewiseMonotonicMap,
    pub exact: Option<RationalAffineMap>,
    /// Backend requested by the map file, if any.
    pub backend: Option<super::Backend>,
}

impl LoadedMap {
    pub fn from_exact(name: &str, exact: RationalAffineMap) -> Self {
        Self {
            name: name.into(),
            float: exact.to_float(),
            exact: Some(exact),
            backend: None,
        }
    }

    pub fn from_float(name: &str, float: PiecewiseMonotonicMap) -> Self {
        Self {
            name: name.into(),
            float,
            exact: None,
            backend: None,
        }
    }
}

pub const ZOO_NAMES: [&str; 5] = ["tent", "golden", "skew_tent", "mod_one", "wobbly"];

/// Built-in transitive maps. Affine entries carry an exact form.
pub fn zoo_map(name: &str) -> Result<LoadedMap> {
    Ok(match name {
        "tent" => LoadedMap::from_exact(name, tent_exact(rational(2, 1))),
        "golden" => LoadedMap::from_exact(name, golden_exact()),
        "skew_tent" => LoadedMap::from_exact(name, skew_tent_exact(rational(3, 1), rational(3, 2))),
        "mod_one" => LoadedMap::from_exact(
            name,
            mod_one(rational(5, 2), rational(1, 4)).and_then(|l| l.build())?,
        ),
        "wobbly" => LoadedMap::from_float(name, wobbly()),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown zoo map '{other}' (known: {})",
                ZOO_NAMES.join(", ")
            )))
        }
    })
}

pub fn zoo() -> Vec<LoadedMap> {
    ZOO_NAMES
        .iter()
        .map(|n| zoo_map(n).expect("zoo maps are valid"))
        .collect()
}
