//! Exact rational backend for piecewise affine maps with rational
//! coefficients. Cylinder endpoints, tracker intervals and periodic points
//! are computed without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::map::{validate_critical_points, BranchMap, BranchSpec, Direction, OrbitTrace};
use crate::map::PiecewiseMonotonicMap;
use crate::scalar::{Interval, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct RationalAffineMap {
    critical: Vec<BigRational>,
    /// `(slope, intercept)` per branch.
    coefficients: Vec<(BigRational, BigRational)>,
    images: Vec<Interval<BigRational>>,
    /// `(1 / slope, -intercept / slope)` per branch.
    inverses: Vec<(BigRational, BigRational)>,
}

impl RationalAffineMap {
    pub fn new(
        critical_points: Vec<BigRational>,
        coefficients: Vec<(BigRational, BigRational)>,
    ) -> Result<Self> {
        validate_critical_points(&critical_points)?;
        if coefficients.len() != critical_points.len() - 1 {
            return Err(Error::Validation(format!(
                "{} critical points need {} branches, got {}",
                critical_points.len(),
                critical_points.len() - 1,
                coefficients.len()
            )));
        }
        let mut images = Vec::with_capacity(coefficients.len());
        for (i, (slope, intercept)) in coefficients.iter().enumerate() {
            if slope.is_zero() {
                return Err(Error::Validation(format!("branch {i}: zero slope")));
            }
            let fa = slope * &critical_points[i] + intercept;
            let fb = slope * &critical_points[i + 1] + intercept;
            let (lo, hi) = if slope.is_positive() { (fa, fb) } else { (fb, fa) };
            if lo.is_negative() || hi > <BigRational as Scalar>::one() {
                return Err(Error::Validation(format!(
                    "branch {i}: image ({lo}, {hi}) leaves [0, 1]"
                )));
            }
            images.push(Interval::new(lo, hi));
        }
        let inverses = coefficients
            .iter()
            .map(|(s, b)| (s.recip(), -(b / s)))
            .collect();
        Ok(Self {
            critical: critical_points,
            coefficients,
            images,
            inverses,
        })
    }

    /// The same map in floating point.
    pub fn to_float(&self) -> PiecewiseMonotonicMap {
        let critical = self.critical.iter().map(Scalar::to_f64).collect();
        let branches = self
            .coefficients
            .iter()
            .map(|(s, b)| BranchSpec::affine(Scalar::to_f64(s), Scalar::to_f64(b)))
            .collect();
        PiecewiseMonotonicMap::new(critical, branches)
            .expect("a valid rational map converts to a valid float map")
    }

    /// True when every slope and intercept is an integer, so iteration keeps
    /// the denominator of the starting point fixed.
    pub fn preserves_denominators(&self) -> bool {
        self.coefficients
            .iter()
            .all(|(s, b)| s.is_integer() && b.is_integer())
    }

    /// Orbit of `x = num / den` for maps that [preserve
    /// denominators](Self::preserves_denominators), in 128-bit integer
    /// arithmetic. Same itinerary and (rounded) points as
    /// [`BranchMap::iterate`], but cheap enough for very long exact orbits.
    pub fn iterate_fixed_denominator(
        &self,
        num: i64,
        den: i64,
        n: usize,
    ) -> Result<FixedDenominatorOrbit> {
        if !self.preserves_denominators() || den <= 0 || num < 0 || num > den {
            return Err(Error::InvalidArgument(
                "fixed-denominator iteration needs integer coefficients and 0 <= num <= den".into(),
            ));
        }
        let to_i128 = |r: &BigRational| r.to_integer().to_i128();
        let coeffs: Vec<(i128, i128)> = self
            .coefficients
            .iter()
            .map(|(s, b)| Some((to_i128(s)?, to_i128(b)?)))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidArgument("coefficients too large".into()))?;
        // critical point c = p/q compared as a*q vs p*den
        let crit: Vec<(i128, i128)> = self
            .critical
            .iter()
            .map(|c| Some((c.numer().to_i128()?, c.denom().to_i128()?)))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidArgument("critical points too large".into()))?;
        let den = den as i128;
        let dist = |a: i128| -> f64 {
            crit.iter()
                .map(|&(p, q)| ((a * q - p * den) as f64 / (q * den) as f64).abs())
                .fold(f64::INFINITY, f64::min)
        };
        let mut a = num as i128;
        let mut numerators = Vec::with_capacity(n + 1);
        let mut word = Vec::with_capacity(n);
        let mut min_dist = f64::INFINITY;
        for step in 0..n {
            let k = crit.partition_point(|&(p, q)| p * den <= a * q);
            if crit[k - 1].0 * den == a * crit[k - 1].1 {
                return Err(Error::CriticalPoint {
                    x: a as f64 / den as f64,
                    step: Some(step),
                });
            }
            let i = k - 1;
            min_dist = min_dist.min(dist(a));
            numerators.push(a);
            word.push(i);
            let (s, b) = coeffs[i];
            a = s * a + b * den;
        }
        min_dist = min_dist.min(dist(a));
        numerators.push(a);
        let points = numerators.iter().map(|&a| ratio_to_f64(a, den)).collect();
        Ok(FixedDenominatorOrbit {
            trace: OrbitTrace {
                points,
                word,
                min_critical_distance: min_dist,
            },
            numerators,
            denominator: den,
        })
    }

    pub fn coefficients(&self, branch: usize) -> &(BigRational, BigRational) {
        &self.coefficients[branch]
    }
}

/// Exact orbit `a_s / denominator` produced by
/// [`RationalAffineMap::iterate_fixed_denominator`].
#[derive(Clone, Debug)]
pub struct FixedDenominatorOrbit {
    /// Points rounded to `f64`.
    pub trace: OrbitTrace<f64>,
    pub numerators: Vec<i128>,
    pub denominator: i128,
}

impl FixedDenominatorOrbit {
    pub fn exact_point(&self, s: usize) -> BigRational {
        BigRational::new(BigInt::from(self.numerators[s]), BigInt::from(self.denominator))
    }
}

/// Correctly rounded `a / den` for `0 <= a <= den < 2^63`.
fn ratio_to_f64(a: i128, den: i128) -> f64 {
    ToPrimitive::to_f64(&BigRational::new(BigInt::from(a), BigInt::from(den))).unwrap_or(f64::NAN)
}

/// Large prime denominator for exact random seeds. 2 is a primitive root
/// modulo it, so orbits of `a / SEED_DENOMINATOR` under integer-slope maps
/// have astronomically long periods.
pub const SEED_DENOMINATOR: i64 = 2_305_843_009_213_691_579;

/// A uniformly random rational `a / SEED_DENOMINATOR` in `(0, 1)`.
pub fn random_seed_numerator<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    rng.random_range(1..SEED_DENOMINATOR)
}

/// `gcd(a, b)` via one remainder. Cheap when `b` is short, whatever the
/// length of `a`.
fn gcd_rem(a: &BigInt, b: &BigInt) -> BigInt {
    if b.is_zero() {
        return a.abs();
    }
    b.gcd(&(a % b))
}

/// `s x + b` for reduced rationals, reduced again through gcds against the
/// (typically short) parts of `s` and `b` only. `BigRational` arithmetic
/// would run full gcds on the long parts of `x`.
pub(crate) fn affine_step(s: &BigRational, b: &BigRational, x: &BigRational) -> BigRational {
    let (p, q) = (x.numer(), x.denom());
    let (a, d) = (s.numer(), s.denom());
    if p.is_zero() {
        return b.clone();
    }
    // gcd(p, q) = gcd(a, d) = 1, so these are the only common factors
    let g1 = gcd_rem(p, d);
    let g2 = gcd_rem(q, a);
    let num = (a / &g2) * (p / &g1);
    let den = (d / &g1) * (q / &g2);
    let (e, f) = (b.numer(), b.denom());
    if f.is_one() {
        return BigRational::new_raw(num + e * &den, den);
    }
    // any common factor of num f + e den and den f divides gcd(den, f)^2
    let u = gcd_rem(&den, f);
    let x_num = num * f + e * &den;
    let x_den = den * f;
    let g = gcd_rem(&x_num, &(&u * &u));
    let h = gcd_rem(&x_den, &g);
    if h.is_one() {
        BigRational::new_raw(x_num, x_den)
    } else {
        BigRational::new_raw(x_num / &h, x_den / h)
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact value of an `f64` as a rational.
pub fn from_f64_exact(x: f64) -> Option<BigRational> {
    <BigRational as Scalar>::from_f64(x)
}

/// Parses `"p/q"`, an integer, or a finite decimal literal such as `"0.25"`
/// or `"-1.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    for _ in 0..scale.unsigned_abs() {
        if scale > 0 {
            value *= &ten;
        } else {
            value /= &ten;
        }
    }
    Some(if negative { -value } else { value })
}

impl BranchMap for RationalAffineMap {
    type Scalar = BigRational;

    fn critical_points(&self) -> &[BigRational] {
        &self.critical
    }

    fn direction(&self, branch: usize) -> Direction {
        if self.coefficients[branch].0.is_positive() {
            Direction::Increasing
        } else {
            Direction::Decreasing
        }
    }

    fn image(&self, branch: usize) -> Interval<BigRational> {
        self.images[branch].clone()
    }

    fn apply(&self, branch: usize, x: &BigRational) -> BigRational {
        let (s, b) = &self.coefficients[branch];
        affine_step(s, b, x)
    }

    fn pull_back(&self, branch: usize, y: &BigRational) -> BigRational {
        let (s, b) = &self.inverses[branch];
        let x = affine_step(s, b, y);
        let d = self.domain(branch);
        Scalar::min_of(Scalar::max_of(x, d.lo), d.hi)
    }

    fn affine(&self, branch: usize) -> Option<(BigRational, BigRational)> {
        Some(self.coefficients[branch].clone())
    }
}
