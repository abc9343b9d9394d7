//! The approximation experiment: a long orbit defines the target measure,
//! covering times along the orbit give periodic points, and each periodic
//! measure is compared with the target.

use log::warn;
use num_rational::BigRational;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Backend, LoadedMap};
use crate::error::{Error, Result};
use crate::exact::{random_seed_numerator, SEED_DENOMINATOR};
use crate::map::{BranchMap, OrbitTrace};
use crate::measure::{
    block_entropy, discrepancy_from_masses, empirical_measure, CylinderMasses, CylinderPartition,
    TargetCdf,
};
use crate::periodic::{find_periodic_point, periodic_measure, FixedPointSolver};
use crate::scalar::Scalar;
use crate::symbolic::DEFAULT_DEPTH_CAP;
use crate::tower::covering_times;

pub const MAX_SEED_ATTEMPTS: usize = 10;

/// Post-burn-in points examined when ranking recurrence bases.
const RECURRENCE_CANDIDATES: usize = 1000;
const RECURRENCE_BASES: usize = 5;

/// Block entropy rate below which the target is reported as (numerically)
/// zero-entropy.
pub const ENTROPY_WARNING_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Seed for the ChaCha8 generator that draws starting points.
    pub seed: u64,
    /// Starting point for the first attempt instead of a random one.
    pub start: Option<f64>,
    /// Base point for the covering scan instead of the first post-burn-in
    /// orbit point.
    pub base_point: Option<f64>,
    /// Number of steps of the target orbit.
    pub orbit_length: usize,
    pub burn_in: usize,
    pub l_max: usize,
    pub margin: f64,
    pub depth_m: usize,
    /// Residual tolerance for periodic points.
    pub tolerance: f64,
    pub backend: Option<Backend>,
    /// Also scan from the five most recurrent early orbit points.
    pub recurrence_bases: bool,
    /// Block length for the positive-entropy check on the target itinerary.
    pub entropy_block: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            start: None,
            base_point: None,
            orbit_length: 100_000,
            burn_in: 1_000,
            l_max: 64,
            margin: crate::tower::DEFAULT_MARGIN,
            depth_m: 4,
            tolerance: crate::periodic::DEFAULT_TOLERANCE,
            backend: None,
            recurrence_bases: false,
            entropy_block: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orbit_length == 0 || self.entropy_block == 0 {
            return Err(Error::InvalidArgument(
                "orbit length and entropy block must be positive".into(),
            ));
        }
        if self.burn_in > self.orbit_length {
            return Err(Error::EmptyAfterBurnIn {
                burn_in: self.burn_in,
                len: self.orbit_length + 1,
            });
        }
        if !(self.margin >= 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(
                "margin and tolerance must be >= 0".into(),
            ));
        }
        if self.depth_m > DEFAULT_DEPTH_CAP {
            return Err(Error::DepthCapExceeded {
                depth: self.depth_m,
                cap: DEFAULT_DEPTH_CAP,
            });
        }
        Ok(())
    }
}

/// One periodic-measure approximant.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproximationRow {
    pub l: usize,
    pub p: f64,
    pub minimal_period: usize,
    pub w1: f64,
    pub discrepancy_m: f64,
    pub residual: f64,
    /// Index of the base point the covering time was found from.
    pub base: usize,
    pub boundary_atoms: usize,
    pub possibly_non_unique: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub rows: Vec<ApproximationRow>,
    pub backend: Backend,
    pub seed_attempts: usize,
    pub target_entropy_rate: Option<f64>,
    pub low_entropy: bool,
    /// No covering time was found from any base point within `l_max`.
    pub no_covering_times: bool,
    pub base_points: Vec<f64>,
    /// Per base point: step at which the scan hit the critical set.
    pub scan_truncated_at: Vec<Option<usize>>,
    /// Covering times whose periodic point could not be certified.
    pub failures: Vec<(usize, String)>,
}

/// The target orbit, with exact numerators when it was generated exactly.
#[derive(Clone, Debug)]
pub struct TargetOrbit {
    pub trace: OrbitTrace<f64>,
    exact: Option<(Vec<i128>, i128)>,
    pub attempts: usize,
}

impl TargetOrbit {
    pub fn exact_point(&self, s: usize) -> Option<BigRational> {
        self.exact
            .as_ref()
            .map(|(nums, den)| BigRational::new(BigInt::from(nums[s]), BigInt::from(*den)))
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
}

fn dyadic_parts(x: f64) -> Result<(i64, i64)> {
    let r = <BigRational as Scalar>::from_f64(x)
        .ok_or_else(|| Error::InvalidArgument(format!("start {x} is not finite")))?;
    let num = i64::try_from(r.numer()).ok();
    let den = i64::try_from(r.denom()).ok();
    num.zip(den)
        .ok_or_else(|| Error::InvalidArgument(format!("start {x} has too fine a binary expansion")))
}

/// Draws a starting point and iterates, reseeding (up to
/// [`MAX_SEED_ATTEMPTS`] times) when the orbit hits the critical set.
///
/// With the rational backend and integer coefficients the orbit is exact:
/// random starts are `a / SEED_DENOMINATOR`. Float iteration is used
/// otherwise.
pub fn generate_target(map: &LoadedMap, backend: Backend, config: &ExperimentConfig) -> Result<TargetOrbit> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let exact = match (backend, &map.exact) {
        (Backend::Rational, Some(e)) if e.preserves_denominators() => Some(e),
        _ => None,
    };
    for attempt in 0..MAX_SEED_ATTEMPTS {
        let explicit = config.start.filter(|_| attempt == 0);
        let result = match exact {
            Some(e) => {
                let (num, den) = match explicit {
                    Some(x) => dyadic_parts(x)?,
                    None => (random_seed_numerator(&mut rng), SEED_DENOMINATOR),
                };
                e.iterate_fixed_denominator(num, den, config.orbit_length)
                    .map(|o| TargetOrbit {
                        trace: o.trace,
                        exact: Some((o.numerators, o.denominator)),
                        attempts: attempt + 1,
                    })
            }
            None => {
                let x0 = explicit.unwrap_or_else(|| rng.random::<f64>());
                map.float
                    .iterate(&x0, config.orbit_length)
                    .map(|trace| TargetOrbit {
                        trace,
                        exact: None,
                        attempts: attempt + 1,
                    })
            }
        };
        match result {
            Ok(t) => return Ok(t),
            Err(Error::CriticalPoint { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SeedsExhausted {
        attempts: MAX_SEED_ATTEMPTS,
    })
}

/// The first post-burn-in index, followed (optionally) by the indices of the
/// most recurrent early orbit points: smallest `min_r |x_{s+r} - x_s|` over
/// `1 <= r <= min(l_max, 64)`.
pub fn base_indices(points: &[f64], burn_in: usize, l_max: usize, recurrence: bool) -> Vec<usize> {
    let mut out = vec![burn_in];
    if !recurrence {
        return out;
    }
    let horizon = l_max.clamp(1, 64);
    let end = (burn_in + RECURRENCE_CANDIDATES).min(points.len().saturating_sub(horizon + 1));
    let mut scored: Vec<(f64, usize)> = (burn_in + 1..end)
        .map(|s| {
            let score = (1..=horizon)
                .map(|r| (points[s + r] - points[s]).abs())
                .fold(f64::INFINITY, f64::min);
            (score, s)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.extend(scored.into_iter().take(RECURRENCE_BASES).map(|(_, s)| s));
    out
}

struct RowContext<'a> {
    cdf: &'a TargetCdf,
    partition: &'a CylinderPartition,
    target_masses: &'a CylinderMasses,
    config: &'a ExperimentConfig,
}

struct ScanResult {
    rows: Vec<ApproximationRow>,
    truncated: Vec<Option<usize>>,
    failures: Vec<(usize, String)>,
    hits: usize,
}

fn scan_rows<M: FixedPointSolver>(map: &M, bases: &[M::Scalar], ctx: &RowContext<'_>) -> ScanResult {
    let mut jobs = Vec::new();
    let mut truncated = Vec::with_capacity(bases.len());
    let mut failures = Vec::new();
    for (rank, y) in bases.iter().enumerate() {
        match covering_times(map, y, ctx.config.l_max, ctx.config.margin) {
            Ok(scan) => {
                truncated.push(scan.truncated_at);
                jobs.extend(scan.hits.into_iter().map(|h| (rank, h)));
            }
            Err(e) => {
                truncated.push(Some(0));
                failures.push((0, format!("base {rank}: {e}")));
            }
        }
    }
    let hits = jobs.len();
    let results: Vec<(usize, Result<ApproximationRow>)> = jobs
        .par_iter()
        .map(|(rank, hit)| {
            let row = find_periodic_point(map, &hit.cylinder, ctx.config.tolerance).map(|orbit| {
                let mu = periodic_measure(&orbit);
                let masses = ctx.partition.masses(&mu);
                let disc = discrepancy_from_masses(ctx.target_masses, &masses);
                ApproximationRow {
                    l: hit.l,
                    p: orbit.point.to_f64(),
                    minimal_period: orbit.minimal_period,
                    w1: ctx.cdf.w1_to(&mu),
                    discrepancy_m: disc.value,
                    residual: orbit.residual.to_f64(),
                    base: *rank,
                    boundary_atoms: masses.boundary_atoms,
                    possibly_non_unique: orbit.possibly_non_unique,
                }
            });
            (hit.l, row)
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for (l, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((l, e.to_string())),
        }
    }
    rows.sort_by_key(|r| (r.l, r.base));
    ScanResult {
        rows,
        truncated,
        failures,
        hits,
    }
}

pub fn run_approximation_experiment(map: &LoadedMap, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let backend = map.select_backend(config.backend)?;
    let mut outcome = ExperimentOutcome {
        rows: Vec::new(),
        backend,
        seed_attempts: 0,
        target_entropy_rate: None,
        low_entropy: false,
        no_covering_times: true,
        base_points: Vec::new(),
        scan_truncated_at: Vec::new(),
        failures: Vec::new(),
    };
    if config.l_max == 0 {
        return Ok(outcome);
    }

    let target = generate_target(map, backend, config)?;
    outcome.seed_attempts = target.attempts;
    let measure = empirical_measure(&target.trace, config.burn_in)?;
    let cdf = TargetCdf::new(&measure);
    let partition = CylinderPartition::new(&map.float, config.depth_m, DEFAULT_DEPTH_CAP)?;
    let target_masses = partition.masses(&measure);

    let stream = &target.trace.word[config.burn_in.min(target.trace.word.len())..];
    if stream.len() >= config.entropy_block {
        let rate = block_entropy(stream, config.entropy_block)?.rate;
        outcome.target_entropy_rate = Some(rate);
        if rate <= ENTROPY_WARNING_THRESHOLD {
            outcome.low_entropy = true;
            warn!(
                "target itinerary has block entropy rate {rate:.4} <= {ENTROPY_WARNING_THRESHOLD}; \
                 the target may not have positive entropy"
            );
        }
    }

    let indices = match config.base_point {
        Some(_) => Vec::new(),
        None => base_indices(&target.trace.points, config.burn_in, config.l_max, config.recurrence_bases),
    };
    let ctx = RowContext {
        cdf: &cdf,
        partition: &partition,
        target_masses: &target_masses,
        config,
    };

    let scan = match backend {
        Backend::Float => {
            let bases: Vec<f64> = match config.base_point {
                Some(y) => vec![y],
                None => indices.iter().map(|&i| target.trace.points[i]).collect(),
            };
            outcome.base_points = bases.clone();
            scan_rows(&map.float, &bases, &ctx)
        }
        Backend::Rational => {
            let exact = map.exact.as_ref().ok_or(Error::NoExactForm)?;
            let exact_of = |x: f64| {
                <BigRational as Scalar>::from_f64(x)
                    .ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
            };
            let bases: Vec<BigRational> = match config.base_point {
                Some(y) => vec![exact_of(y)?],
                None => indices
                    .iter()
                    .map(|&i| match target.exact_point(i) {
                        Some(p) => Ok(p),
                        None => exact_of(target.trace.points[i]),
                    })
                    .collect::<Result<_>>()?,
            };
            outcome.base_points = bases.iter().map(Scalar::to_f64).collect();
            scan_rows(exact, &bases, &ctx)
        }
    };
    outcome.no_covering_times = scan.hits == 0;
    if outcome.no_covering_times {
        warn!("no covering times up to l = {}", config.l_max);
    }
    outcome.rows = scan.rows;
    outcome.scan_truncated_at = scan.truncated;
    outcome.failures = scan.failures;
    Ok(outcome)
}

/// Independent experiments (one per config) in parallel; results keep the
/// order of `configs`.
pub fn run_experiments(map: &LoadedMap, configs: &[ExperimentConfig]) -> Vec<Result<ExperimentOutcome>> {
    configs
        .par_iter()
        .map(|c| run_approximation_experiment(map, c))
        .collect()
}

/// Runs `f` on a dedicated rayon pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
