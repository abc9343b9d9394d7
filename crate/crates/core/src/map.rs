//! Piecewise monotonic maps of the unit interval.
//!
//! A map is given by critical points `0 = c_0 < c_1 < ... < c_N = 1` and one
//! strictly monotone continuous branch per open interval `(c_{i-1}, c_i)`.
//! [`BranchMap`] is the interface every algorithm in the crate is written
//! against; [`PiecewiseMonotonicMap`] is the floating point implementation
//! (affine or general branches) and [`crate::exact::RationalAffineMap`] the
//! exact one.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Interval, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    /// Orientation of a composition `g ∘ f` where `self` is the direction of `f`.
    pub fn then(self, next: Direction) -> Direction {
        if self == next {
            Direction::Increasing
        } else {
            Direction::Decreasing
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Direction::Increasing => 1,
            Direction::Decreasing => -1,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "+",
            Direction::Decreasing => "-",
        })
    }
}

pub trait BranchMap: Send + Sync {
    type Scalar: Scalar;

    /// `c_0 = 0 < c_1 < ... < c_N = 1`.
    fn critical_points(&self) -> &[Self::Scalar];

    fn direction(&self, branch: usize) -> Direction;

    /// Open image of a branch; endpoints are the one-sided limits at the
    /// domain endpoints.
    fn image(&self, branch: usize) -> Interval<Self::Scalar>;

    /// Branch formula on the closed domain. No domain checks.
    fn apply(&self, branch: usize, x: &Self::Scalar) -> Self::Scalar;

    /// Preimage of `y` under the branch, for `y` in the closed image.
    /// Results are clamped to the closed domain.
    fn pull_back(&self, branch: usize, y: &Self::Scalar) -> Self::Scalar;

    /// `(slope, intercept)` for affine branches.
    fn affine(&self, branch: usize) -> Option<(Self::Scalar, Self::Scalar)>;

    fn branch_count(&self) -> usize {
        self.critical_points().len() - 1
    }

    fn domain(&self, branch: usize) -> Interval<Self::Scalar> {
        let c = self.critical_points();
        Interval::new(c[branch].clone(), c[branch + 1].clone())
    }

    fn is_affine(&self) -> bool {
        (0..self.branch_count()).all(|i| self.affine(i).is_some())
    }

    /// Distance from `x` to the critical set, as `f64`.
    fn critical_distance(&self, x: &Self::Scalar) -> f64 {
        let c = self.critical_points();
        let k = c.partition_point(|ci| ci <= x);
        let mut best = f64::INFINITY;
        for j in [k.saturating_sub(1), k] {
            if let Some(cj) = c.get(j) {
                // exact subtraction is costly for long rationals; the f64
                // difference is enough unless it rounds to zero
                let approx = (x.to_f64() - cj.to_f64()).abs();
                let d = if !Self::Scalar::EXACT || approx > 0.0 || x == cj {
                    approx
                } else {
                    (x.clone() - cj.clone()).abs().to_f64()
                };
                best = best.min(d);
            }
        }
        best
    }

    fn branch_of(&self, x: &Self::Scalar) -> Result<usize> {
        if *x < Self::Scalar::zero() || *x > Self::Scalar::one() {
            return Err(Error::OutOfDomain { x: x.to_f64() });
        }
        let c = self.critical_points();
        let k = c.partition_point(|ci| ci <= x);
        let tol = Self::Scalar::critical_tolerance();
        let near = |j: usize| {
            if Self::Scalar::EXACT {
                *x == c[j]
            } else {
                (x.clone() - c[j].clone()).abs() <= tol
            }
        };
        if near(k - 1) || (k < c.len() && near(k)) {
            return Err(Error::CriticalPoint {
                x: x.to_f64(),
                step: None,
            });
        }
        Ok(k - 1)
    }

    fn evaluate(&self, x: &Self::Scalar) -> Result<Self::Scalar> {
        let i = self.branch_of(x)?;
        Ok(self.apply(i, x).clamp_unit())
    }

    fn invert_branch(&self, branch: usize, y: &Self::Scalar) -> Result<Self::Scalar> {
        if branch >= self.branch_count() {
            return Err(Error::InvalidSymbol {
                symbol: branch,
                branches: self.branch_count(),
            });
        }
        if !self.image(branch).contains(y) {
            return Err(Error::NotInBranchImage {
                branch,
                y: y.to_f64(),
            });
        }
        Ok(self.pull_back(branch, y))
    }

    /// Orbit segment `x, Tx, ..., T^n x` with its itinerary.
    fn iterate(&self, x: &Self::Scalar, n: usize) -> Result<OrbitTrace<Self::Scalar>> {
        let mut points = Vec::with_capacity(n + 1);
        let mut word = Vec::with_capacity(n);
        let mut min_dist = f64::INFINITY;
        let mut cur = x.clone();
        for step in 0..n {
            let i = self.branch_of(&cur).map_err(|e| match e {
                Error::CriticalPoint { x, .. } => Error::CriticalPoint {
                    x,
                    step: Some(step),
                },
                other => other,
            })?;
            min_dist = min_dist.min(self.critical_distance(&cur));
            let next = self.apply(i, &cur).clamp_unit();
            points.push(cur);
            word.push(i);
            cur = next;
        }
        min_dist = min_dist.min(self.critical_distance(&cur));
        points.push(cur);
        Ok(OrbitTrace {
            points,
            word,
            min_critical_distance: min_dist,
        })
    }

    /// Applies the branches of `word` in order, ignoring which branch the
    /// intermediate points actually fall in. This is the continuous extension
    /// of `T^l` to the closure of the cylinder of `word`.
    fn apply_word(&self, word: &[usize], x: &Self::Scalar) -> Self::Scalar {
        word.iter()
            .fold(x.clone(), |acc, &i| self.apply(i, &acc).clamp_unit())
    }

    /// Orientation of the composition along `word`.
    fn word_direction(&self, word: &[usize]) -> Direction {
        word.iter()
            .fold(Direction::Increasing, |d, &i| d.then(self.direction(i)))
    }
}

/// A finite orbit segment.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace<S> {
    /// `x, Tx, ..., T^n x`.
    pub points: Vec<S>,
    /// Branch index of `points[s]` for `s < n`.
    pub word: Vec<usize>,
    pub min_critical_distance: f64,
}

impl<S: Scalar> OrbitTrace<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.points.iter().map(Scalar::to_f64).collect()
    }
}

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BranchKind {
    Affine { slope: f64, intercept: f64 },
    /// Arbitrary strictly monotone branch given by its forward evaluator on
    /// the closed domain. Inverses are bisected.
    General { label: String, eval: Evaluator },
}

impl fmt::Debug for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchKind::Affine { slope, intercept } => f
                .debug_struct("Affine")
                .field("slope", slope)
                .field("intercept", intercept)
                .finish(),
            BranchKind::General { label, .. } => {
                f.debug_struct("General").field("label", label).finish()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchSpec {
    pub direction: Direction,
    pub kind: BranchKind,
}

impl BranchSpec {
    pub fn affine(slope: f64, intercept: f64) -> Self {
        let direction = if slope < 0.0 {
            Direction::Decreasing
        } else {
            Direction::Increasing
        };
        Self {
            direction,
            kind: BranchKind::Affine { slope, intercept },
        }
    }

    pub fn general(
        direction: Direction,
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            direction,
            kind: BranchKind::General {
                label: label.into(),
                eval: Arc::new(eval),
            },
        }
    }
}

#[derive(Clone, Debug)]
struct Branch {
    spec: BranchSpec,
    image: Interval<f64>,
}

/// Sample count used to verify the direction of general branches.
pub const DIRECTION_SAMPLES: usize = 33;

/// Slack allowed when branch images overshoot `[0, 1]` through rounding.
const IMAGE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PiecewiseMonotonicMap {
    critical: Vec<f64>,
    branches: Vec<Branch>,
}

impl PiecewiseMonotonicMap {
    pub fn new(critical_points: Vec<f64>, branches: Vec<BranchSpec>) -> Result<Self> {
        validate_critical_points(&critical_points)?;
        if branches.len() != critical_points.len() - 1 {
            return Err(Error::Validation(format!(
                "{} critical points need {} branches, got {}",
                critical_points.len(),
                critical_points.len() - 1,
                branches.len()
            )));
        }
        let mut built = Vec::with_capacity(branches.len());
        for (i, spec) in branches.into_iter().enumerate() {
            let (a, b) = (critical_points[i], critical_points[i + 1]);
            let (fa, fb) = match &spec.kind {
                BranchKind::Affine { slope, intercept } => {
                    if *slope == 0.0 || !slope.is_finite() || !intercept.is_finite() {
                        return Err(Error::Validation(format!(
                            "branch {i}: slope must be finite and nonzero"
                        )));
                    }
                    let want = if *slope > 0.0 {
                        Direction::Increasing
                    } else {
                        Direction::Decreasing
                    };
                    if want != spec.direction {
                        return Err(Error::Validation(format!(
                            "branch {i}: slope sign disagrees with declared direction"
                        )));
                    }
                    (slope * a + intercept, slope * b + intercept)
                }
                BranchKind::General { eval, .. } => {
                    check_general_direction(i, a, b, spec.direction, eval.as_ref())?;
                    (eval(a), eval(b))
                }
            };
            let (lo, hi) = match spec.direction {
                Direction::Increasing => (fa, fb),
                Direction::Decreasing => (fb, fa),
            };
            if !(lo >= -IMAGE_SLACK && hi <= 1.0 + IMAGE_SLACK) {
                return Err(Error::Validation(format!(
                    "branch {i}: image ({lo}, {hi}) leaves [0, 1]"
                )));
            }
            built.push(Branch {
                spec,
                image: Interval::new(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)),
            });
        }
        Ok(Self {
            critical: critical_points,
            branches: built,
        })
    }

    pub fn branch_spec(&self, branch: usize) -> &BranchSpec {
        &self.branches[branch].spec
    }
}

pub(crate) fn validate_critical_points<S: Scalar>(c: &[S]) -> Result<()> {
    if c.len() < 3 {
        return Err(Error::Validation(format!(
            "need at least two branches (three critical points), got {} points",
            c.len()
        )));
    }
    if c[0] != S::zero() || c[c.len() - 1] != S::one() {
        return Err(Error::Validation(
            "critical points must start at 0 and end at 1".into(),
        ));
    }
    if let Some(w) = c.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "critical points not strictly increasing at index {}",
            w + 1
        )));
    }
    Ok(())
}

fn check_general_direction(
    branch: usize,
    a: f64,
    b: f64,
    direction: Direction,
    eval: &(dyn Fn(f64) -> f64 + Send + Sync),
) -> Result<()> {
    let n = DIRECTION_SAMPLES - 1;
    let values: Vec<f64> = (0..=n)
        .map(|j| eval(a + (b - a) * j as f64 / n as f64))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(format!(
            "branch {branch}: evaluator returned a non-finite value"
        )));
    }
    let ok = values.windows(2).all(|w| match direction {
        Direction::Increasing => w[0] < w[1],
        Direction::Decreasing => w[0] > w[1],
    });
    if !ok {
        return Err(Error::Validation(format!(
            "branch {branch}: evaluator is not strictly {} on its domain",
            match direction {
                Direction::Increasing => "increasing",
                Direction::Decreasing => "decreasing",
            }
        )));
    }
    Ok(())
}

impl BranchMap for PiecewiseMonotonicMap {
    type Scalar = f64;

    fn critical_points(&self) -> &[f64] {
        &self.critical
    }

    fn direction(&self, branch: usize) -> Direction {
        self.branches[branch].spec.direction
    }

    fn image(&self, branch: usize) -> Interval<f64> {
        self.branches[branch].image.clone()
    }

    fn apply(&self, branch: usize, x: &f64) -> f64 {
        match &self.branches[branch].spec.kind {
            BranchKind::Affine { slope, intercept } => slope * x + intercept,
            BranchKind::General { eval, .. } => eval(*x),
        }
    }

    fn pull_back(&self, branch: usize, y: &f64) -> f64 {
        let (a, b) = (self.critical[branch], self.critical[branch + 1]);
        let br = &self.branches[branch];
        let x = match &br.spec.kind {
            BranchKind::Affine { slope, intercept } => (y - intercept) / slope,
            BranchKind::General { eval, .. } => {
                bisect_inverse(eval.as_ref(), a, b, br.spec.direction, *y)
            }
        };
        x.clamp(a, b)
    }

    fn affine(&self, branch: usize) -> Option<(f64, f64)> {
        match self.branches[branch].spec.kind {
            BranchKind::Affine { slope, intercept } => Some((slope, intercept)),
            BranchKind::General { .. } => None,
        }
    }
}

/// Bisects `f(x) = y` on `[a, b]` until the bracket cannot shrink further.
fn bisect_inverse(
    f: &(dyn Fn(f64) -> f64 + Send + Sync),
    mut a: f64,
    mut b: f64,
    direction: Direction,
    y: f64,
) -> f64 {
    let below = |v: f64| match direction {
        Direction::Increasing => v < y,
        Direction::Decreasing => v > y,
    };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if below(f(mid)) {
            a = mid;
        } else {
            b = mid;
        }
    }
    if (f(a) - y).abs() <= (f(b) - y).abs() {
        a
    } else {
        b
    }
}

/// Tolerance used when comparing general-branch round trips.
pub const INVERSE_TOLERANCE: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::zoo;

    fn tent() -> PiecewiseMonotonicMap {
        zoo::tent_float(2.0)
    }

    #[test]
    fn evaluate_tent_and_golden() {
        let t = tent();
        assert_eq!(t.evaluate(&0.3).unwrap(), 0.6);
        assert_eq!(t.evaluate(&0.75).unwrap(), 0.5);
        let g = zoo::golden();
        let beta = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.evaluate(&0.5).unwrap() - beta / 2.0).abs() < 1e-15);
        assert!((g.evaluate(&0.5).unwrap() - 0.809_016_994_374_947_4).abs() < 1e-15);
    }

    #[test]
    fn evaluate_errors() {
        let t = tent();
        assert!(matches!(t.evaluate(&0.5), Err(Error::CriticalPoint { .. })));
        assert!(matches!(t.evaluate(&(0.5 + 1e-13)), Err(Error::CriticalPoint { .. })));
        assert!(matches!(t.evaluate(&1.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(t.evaluate(&-0.1), Err(Error::OutOfDomain { .. })));
        assert!(matches!(t.evaluate(&0.0), Err(Error::CriticalPoint { .. })));
    }

    #[test]
    fn branch_of_tent() {
        let t = tent();
        assert_eq!(t.branch_of(&0.3).unwrap(), 0);
        assert_eq!(t.branch_of(&0.75).unwrap(), 1);
        assert!(matches!(t.branch_of(&0.5), Err(Error::CriticalPoint { .. })));
    }

    #[test]
    fn iterate_tent() {
        let t = tent();
        let tr = t.iterate(&0.3, 3).unwrap();
        let want = [0.3, 0.6, 0.8, 0.4];
        for (p, w) in tr.points.iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }
        assert_eq!(tr.word, vec![0, 1, 1]);

        let p = 2.0 / 7.0;
        let tr = t.iterate(&p, 3).unwrap();
        assert!((tr.points[3] - p).abs() < 1e-15);
        assert_eq!(tr.word, vec![0, 1, 1]);

        match t.iterate(&0.25, 2) {
            Err(Error::CriticalPoint { step, .. }) => assert_eq!(step, Some(1)),
            other => panic!("expected critical point, got {other:?}"),
        }
        assert_eq!(t.iterate(&0.3, 0).unwrap().points, vec![0.3]);
    }

    #[test]
    fn invert_branch_examples() {
        let t = tent();
        assert_eq!(t.invert_branch(1, &0.5).unwrap(), 0.75);
        assert_eq!(t.invert_branch(0, &0.6).unwrap(), 0.3);
        let g = zoo::golden();
        assert!(matches!(
            g.invert_branch(1, &0.9),
            Err(Error::NotInBranchImage { branch: 1, .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_maps() {
        let r = PiecewiseMonotonicMap::new(vec![0.0, 1.0], vec![BranchSpec::affine(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::Validation(_))));
        let r = PiecewiseMonotonicMap::new(
            vec![0.0, 0.5, 1.0],
            vec![BranchSpec::affine(3.0, 0.0), BranchSpec::affine(-2.0, 2.0)],
        );
        assert!(matches!(r, Err(Error::Validation(_))));
        let r = PiecewiseMonotonicMap::new(
            vec![0.0, 0.6, 0.5, 1.0],
            vec![
                BranchSpec::affine(1.0, 0.0),
                BranchSpec::affine(1.0, 0.0),
                BranchSpec::affine(1.0, 0.0),
            ],
        );
        assert!(matches!(r, Err(Error::Validation(_))));
        // declared increasing but decreasing
        let r = PiecewiseMonotonicMap::new(
            vec![0.0, 0.5, 1.0],
            vec![
                BranchSpec::general(Direction::Increasing, "bad", |x| 1.0 - x),
                BranchSpec::affine(1.0, 0.0),
            ],
        );
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn general_branch_inverse_round_trip() {
        let logistic = PiecewiseMonotonicMap::new(
            vec![0.0, 0.5, 1.0],
            vec![
                BranchSpec::general(Direction::Increasing, "l", |x| 4.0 * x * (1.0 - x)),
                BranchSpec::general(Direction::Decreasing, "r", |x| 4.0 * x * (1.0 - x)),
            ],
        )
        .unwrap();
        for &x in &[0.1, 0.3, 0.49, 0.51, 0.77, 0.99] {
            let i = logistic.branch_of(&x).unwrap();
            let y = logistic.evaluate(&x).unwrap();
            let back = logistic.invert_branch(i, &y).unwrap();
            assert!((back - x).abs() < INVERSE_TOLERANCE, "{x} -> {y} -> {back}");
        }
    }

    #[test]
    fn word_direction_composes() {
        let t = tent();
        assert_eq!(t.word_direction(&[0, 1, 1]), Direction::Increasing);
        assert_eq!(t.word_direction(&[1, 0]), Direction::Decreasing);
        assert!((t.apply_word(&[0, 1, 1], &0.25) - 0.0).abs() < 1e-15);
    }
}
