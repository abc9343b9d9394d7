//! Periodic points from covering cylinders, and the periodic measures they
//! carry.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{affine_step, RationalAffineMap};
use crate::map::{BranchMap, Direction, PiecewiseMonotonicMap};
use crate::measure::DiscreteMeasure;
use crate::scalar::{Interval, Scalar};
use crate::symbolic::{Cylinder, Itinerary};

/// Default residual tolerance for extracted periodic points.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit<S> {
    pub point: S,
    /// Construction period: the depth of the covering cylinder.
    pub period: usize,
    pub minimal_period: usize,
    /// `T^s p` for `0 <= s < period`.
    pub orbit: Vec<S>,
    pub word: Itinerary,
    /// `|T^period p - p|`.
    pub residual: S,
    /// `T^l` may have several fixed points in the cylinder; the one returned
    /// is whichever the solver converged to.
    pub possibly_non_unique: bool,
}

/// Locating the fixed point of `T^l` inside a covering cylinder.
pub trait FixedPointSolver: BranchMap {
    fn solve_fixed_point(
        &self,
        word: &[usize],
        cylinder: &Interval<Self::Scalar>,
    ) -> Result<Self::Scalar>;
}

/// Bisection on `g(x) = T^l(x) - x` over the closed cylinder. `T^l` is
/// evaluated along the cylinder word, so it is continuous up to the
/// endpoints and covering guarantees opposite signs there.
impl FixedPointSolver for PiecewiseMonotonicMap {
    fn solve_fixed_point(&self, word: &[usize], cylinder: &Interval<f64>) -> Result<f64> {
        let g = |x: f64| self.apply_word(word, &x) - x;
        let (mut lo, mut hi) = (cylinder.lo, cylinder.hi);
        let (g_lo, g_hi) = (g(lo), g(hi));
        if g_lo == 0.0 {
            return Ok(lo);
        }
        if g_hi == 0.0 {
            return Ok(hi);
        }
        if g_lo.signum() == g_hi.signum() {
            return Err(Error::NoSignChange);
        }
        let lo_negative = g_lo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm == 0.0 {
                return Ok(mid);
            }
            if (gm < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
    }
}

/// Exact solve: `T^l` on the cylinder is `x ↦ a x + b`, so `p = b / (1 - a)`.
impl FixedPointSolver for RationalAffineMap {
    fn solve_fixed_point(
        &self,
        word: &[usize],
        cylinder: &Interval<BigRational>,
    ) -> Result<BigRational> {
        let zero = <BigRational as Scalar>::zero();
        let (mut a, mut b) = (<BigRational as Scalar>::one(), zero.clone());
        for &i in word {
            let (s, c) = self.coefficients(i);
            a = affine_step(s, &zero, &a);
            b = affine_step(s, c, &b);
        }
        let denom = <BigRational as Scalar>::one() - a;
        if denom.is_zero() {
            return Err(Error::NoSignChange);
        }
        let p = b / denom;
        if !cylinder.contains(&p) {
            return Err(Error::NoCovering);
        }
        Ok(p)
    }
}

/// Image of the closed cylinder under `T^l` along its word.
pub fn cylinder_image<M: BranchMap>(map: &M, word: &[usize], c: &Interval<M::Scalar>) -> Interval<M::Scalar> {
    let a = map.apply_word(word, &c.lo);
    let b = map.apply_word(word, &c.hi);
    match map.word_direction(word) {
        Direction::Increasing => Interval::new(a, b),
        Direction::Decreasing => Interval::new(b, a),
    }
}

/// Fixed point of `T^l` in a covering cylinder of depth `l`, checked against
/// the true map: the residual must be within `tol` and the `l`-step
/// itinerary must equal the cylinder word.
pub fn find_periodic_point<M: FixedPointSolver>(
    map: &M,
    cyl: &Cylinder<M::Scalar>,
    tol: f64,
) -> Result<PeriodicOrbit<M::Scalar>> {
    let interval = cyl.interval.as_ref().ok_or(Error::NoCovering)?;
    let l = cyl.depth();
    if l == 0 {
        return Err(Error::InvalidArgument("cylinder word must be nonempty".into()));
    }
    let image = cylinder_image(map, &cyl.word, interval);
    if !(image.lo <= interval.lo && interval.hi <= image.hi) {
        return Err(Error::NoCovering);
    }
    let p = map.solve_fixed_point(&cyl.word, interval)?;
    if !interval.contains(&p) {
        return Err(Error::NoCovering);
    }
    let trace = map.iterate(&p, l)?;
    if trace.word != cyl.word.0 {
        return Err(Error::ItineraryMismatch);
    }
    let residual = (trace.points[l].clone() - p.clone()).abs();
    if residual.to_f64() > tol {
        return Err(Error::ResidualExceeded {
            residual: residual.to_f64(),
            tolerance: tol,
        });
    }
    let tol_s = M::Scalar::from_f64(tol).unwrap_or_else(M::Scalar::zero);
    let tol_s = if M::Scalar::EXACT { M::Scalar::zero() } else { tol_s };
    let minimal = smallest_period(&trace.points, l, &tol_s);
    let mut orbit = trace.points;
    orbit.truncate(l);
    Ok(PeriodicOrbit {
        point: p,
        period: l,
        minimal_period: minimal,
        orbit,
        word: cyl.word.clone(),
        residual,
        possibly_non_unique: may_have_several_fixed_points(map, &cyl.word),
    })
}

/// An increasing nonlinear `T^l` can cross the diagonal several times in
/// the cylinder. Affine compositions and decreasing ones cross exactly once.
fn may_have_several_fixed_points<M: BranchMap>(map: &M, word: &[usize]) -> bool {
    map.word_direction(word) == Direction::Increasing && word.iter().any(|&i| map.affine(i).is_none())
}

fn smallest_period<S: Scalar>(points: &[S], l: usize, tol: &S) -> usize {
    let p = &points[0];
    (1..=l)
        .filter(|d| l % d == 0)
        .find(|&d| {
            if S::EXACT && *tol == S::zero() {
                points[d] == *p
            } else {
                (points[d].clone() - p.clone()).abs() <= *tol
            }
        })
        .unwrap_or(l)
}

/// Smallest divisor `d` of `l` with `|T^d p - p| <= tol`.
pub fn minimal_period<M: BranchMap>(map: &M, p: &M::Scalar, l: usize, tol: f64) -> usize {
    if l == 0 {
        return 0;
    }
    let tol = M::Scalar::from_f64(tol).unwrap_or_else(M::Scalar::zero);
    let mut points = Vec::with_capacity(l + 1);
    let mut cur = p.clone();
    points.push(cur.clone());
    for _ in 0..l {
        match map.evaluate(&cur) {
            Ok(next) => cur = next,
            Err(_) => return l,
        }
        points.push(cur.clone());
    }
    smallest_period(&points, l, &tol)
}

/// `(Σ_s δ_{T^s p}) / l`, with coinciding atoms merged.
pub fn periodic_measure<S: Scalar>(orbit: &PeriodicOrbit<S>) -> DiscreteMeasure {
    DiscreteMeasure::uniform_on(&orbit.orbit).expect("periodic orbits are nonempty and lie in [0, 1]")
}
