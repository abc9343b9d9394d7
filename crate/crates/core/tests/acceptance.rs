//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permeas::exact::{random_seed_numerator, SEED_DENOMINATOR};
use permeas::harness::zoo::{self, golden_ratio, zoo, LoadedMap};
use permeas::harness::{
    generate_target, run_experiments, Backend, ExperimentConfig, ExperimentOutcome,
};
use permeas::measure::{block_entropy, lyapunov_entropy, w1_distance};
use permeas::periodic::{find_periodic_point, periodic_measure, FixedPointSolver, PeriodicOrbit};
use permeas::symbolic::{enumerate_cylinders, shrinking_report, DEFAULT_DEPTH_CAP};
use permeas::tower::covering_times;
use permeas::{BranchMap, DiscreteMeasure, Scalar};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn main() -> ExitCode {
    let mut orbits = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Vec<(String, PeriodicOrbit<f64>)>) -> Verdict>)> = vec![
        ("1 cylinder grid oracle", Box::new(|_| cylinder_oracle())),
        ("2 shrinking cylinders", Box::new(|_| shrinking())),
        ("3 periodic measures approximate the target", Box::new(|_| approximation())),
        ("4 covering times give certified periodic points", Box::new(covering_mechanism)),
        ("5 entropy estimates", Box::new(|_| entropy())),
        ("6 periodic measure invariance", Box::new(|o| invariance(o))),
        ("7 W1 metric axioms", Box::new(|_| metric_axioms())),
        ("8 determinism", Box::new(|_| determinism())),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check(&mut orbits);
        let secs = start.elapsed().as_secs_f64();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {} ({secs:.1}s)", v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- 1

const GRID: usize = 1_000_000;
const ORACLE_DEPTH: usize = 10;

/// Itinerary prefixes of the grid points `(j + 1/2) / GRID`, using closed
/// form step functions; returns per word `(min, max)` of the points found.
fn grid_oracle(step: impl Fn(f64) -> Option<(usize, f64)>) -> HashMap<(usize, u64), (f64, f64)> {
    let mut table: HashMap<(usize, u64), (f64, f64)> = HashMap::new();
    for j in 0..GRID {
        let x0 = (j as f64 + 0.5) / GRID as f64;
        let mut x = x0;
        let mut code = 0u64;
        for k in 1..=ORACLE_DEPTH {
            let Some((s, next)) = step(x) else { break };
            code = code * 2 + s as u64;
            let e = table.entry((k, code)).or_insert((x0, x0));
            e.0 = e.0.min(x0);
            e.1 = e.1.max(x0);
            x = next;
        }
    }
    table
}

fn compare_with_oracle<M: BranchMap>(name: &str, map: &M, table: &HashMap<(usize, u64), (f64, f64)>) -> (bool, String) {
    let tol = 2.0 / GRID as f64;
    let mut words = 0;
    let mut worst = 0.0f64;
    for k in 1..=ORACLE_DEPTH {
        let cyls = enumerate_cylinders(map, k, DEFAULT_DEPTH_CAP).expect("enumeration");
        let in_table = table.keys().filter(|(d, _)| *d == k).count();
        if cyls.len() != in_table {
            return (false, format!("{name}: depth {k} has {} cylinders, oracle sees {in_table} words", cyls.len()));
        }
        for c in &cyls {
            let code = c.word.iter().fold(0u64, |acc, &s| acc * 2 + s as u64);
            let Some(&(lo, hi)) = table.get(&(k, code)) else {
                return (false, format!("{name}: word {} missing from the oracle", c.word));
            };
            let iv = c.interval.as_ref().expect("enumerated cylinders are nonempty");
            worst = worst
                .max((iv.lo.to_f64() - lo).abs())
                .max((iv.hi.to_f64() - hi).abs());
            words += 1;
        }
    }
    (worst <= tol, format!("{name}: {words} words, max endpoint gap {worst:.2e}"))
}

fn cylinder_oracle() -> Verdict {
    let phi = golden_ratio();
    let tent = grid_oracle(|x| match x {
        x if x < 0.5 => Some((0, 2.0 * x)),
        x if x > 0.5 => Some((1, 2.0 - 2.0 * x)),
        _ => None,
    });
    let golden = grid_oracle(|x| match phi * x {
        y if y < 1.0 => Some((0, y)),
        y if y > 1.0 => Some((1, y - 1.0)),
        _ => None,
    });
    let tent_map = zoo::zoo_map("tent").unwrap();
    let checks = [
        compare_with_oracle("tent float", &tent_map.float, &tent),
        compare_with_oracle("tent rational", tent_map.exact.as_ref().unwrap(), &tent),
        compare_with_oracle("golden", &zoo::golden(), &golden),
    ];
    let pass = checks.iter().all(|(ok, _)| *ok);
    let detail = checks.iter().map(|(_, d)| d.as_str()).collect::<Vec<_>>().join("; ");
    verdict(pass, detail)
}

// ---------------------------------------------------------------- 2

fn shrinking() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tent = zoo::zoo_map("tent").unwrap().exact.unwrap();
    let mut tent_ok = true;
    for _ in 0..20 {
        let x = BigRational::new(random_seed_numerator(&mut rng).into(), SEED_DENOMINATOR.into());
        let report = shrinking_report(&tent, &x, 20).expect("generic rational point");
        for (k, diam) in report {
            let expected = BigRational::new(BigInt::from(1), BigInt::from(1u64 << k));
            tent_ok &= diam == expected;
        }
    }
    let golden = zoo::golden();
    let beta = golden_ratio();
    let mut golden_ok = true;
    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let x: f64 = rng.random();
        let report = shrinking_report(&golden, &x, 20).expect("generic float point");
        for (k, diam) in report {
            let bound = beta.powi(-(k as i32));
            golden_ok &= diam <= bound + 1e-12;
            worst_ratio = worst_ratio.max(diam / bound);
        }
    }
    verdict(
        tent_ok && golden_ok,
        format!(
            "tent diam = 2^-k exactly for 20 points, k <= 20: {tent_ok}; golden diam <= beta^-k + 1e-12: {golden_ok} (max diam/beta^-k {worst_ratio:.4})"
        ),
    )
}

// ---------------------------------------------------------------- 3

const SEEDS: u64 = 10;

fn best_so_far_nonincreasing(out: &ExperimentOutcome, base: Option<usize>) -> (f64, bool) {
    let mut best = f64::INFINITY;
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for r in out.rows.iter().filter(|r| base.is_none_or(|b| r.base == b)) {
        best = best.min(r.w1);
        monotone &= best <= prev;
        prev = best;
    }
    (best, monotone)
}

fn approximation() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["tent", "golden"] {
        let map = zoo::zoo_map(name).unwrap();
        let configs: Vec<ExperimentConfig> = (0..SEEDS)
            .map(|seed| ExperimentConfig {
                seed,
                orbit_length: 1_000_000,
                burn_in: 1_000,
                l_max: 64,
                recurrence_bases: true,
                ..ExperimentConfig::default()
            })
            .collect();
        let outcomes: Vec<ExperimentOutcome> = run_experiments(&map, &configs)
            .into_iter()
            .collect::<Result<_, _>>()
            .expect("experiments run");
        let mut good = 0;
        let mut good_single = 0;
        let mut monotone = true;
        let mut bests = Vec::new();
        for out in &outcomes {
            let (best, mono) = best_so_far_nonincreasing(out, None);
            let (best_single, mono_single) = best_so_far_nonincreasing(out, Some(0));
            monotone &= mono && mono_single;
            good += usize::from(best <= 0.05);
            good_single += usize::from(best_single <= 0.05);
            bests.push(format!("{best:.4}"));
            pass &= out.rows.iter().all(|r| r.l <= 64);
        }
        pass &= good >= 9 && monotone;
        details.push(format!(
            "{name}: {good}/10 seeds with W1 <= 0.05 [{}], first post-burn-in base alone {good_single}/10, best-so-far nonincreasing {monotone}",
            bests.join(" ")
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 300.0;
    details.push(format!("runtime {secs:.0}s"));
    verdict(pass, details.join("; "))
}

// ---------------------------------------------------------------- 4

fn to_float_orbit<S: Scalar>(o: &PeriodicOrbit<S>) -> PeriodicOrbit<f64> {
    PeriodicOrbit {
        point: o.point.to_f64(),
        period: o.period,
        minimal_period: o.minimal_period,
        orbit: o.orbit.iter().map(Scalar::to_f64).collect(),
        word: o.word.clone(),
        residual: o.residual.to_f64(),
        possibly_non_unique: o.possibly_non_unique,
    }
}

struct Tally {
    hits: usize,
    failures: Vec<String>,
    max_residual: f64,
}

fn extract_all<M: FixedPointSolver>(
    map: &M,
    bases: &[M::Scalar],
    orbits: &mut Vec<PeriodicOrbit<f64>>,
    exact: bool,
) -> Tally {
    let mut t = Tally {
        hits: 0,
        failures: Vec::new(),
        max_residual: 0.0,
    };
    for y in bases {
        let scan = match covering_times(map, y, 30, 1e-9) {
            Ok(s) => s,
            Err(e) => {
                t.failures.push(format!("scan: {e}"));
                continue;
            }
        };
        for hit in &scan.hits {
            t.hits += 1;
            match find_periodic_point(map, &hit.cylinder, 1e-9) {
                Ok(o) => {
                    let word = map.iterate(&o.point, hit.l).map(|tr| tr.word);
                    let residual = o.residual.to_f64();
                    t.max_residual = t.max_residual.max(residual);
                    if word.as_deref().ok() != Some(&hit.cylinder.word[..]) {
                        t.failures.push(format!("l={}: itinerary mismatch", hit.l));
                    } else if residual > 1e-9 || (exact && residual != 0.0) {
                        t.failures.push(format!("l={}: residual {residual:e}", hit.l));
                    }
                    orbits.push(to_float_orbit(&o));
                }
                Err(e) => t.failures.push(format!("l={}: {e}", hit.l)),
            }
        }
    }
    t
}

fn covering_mechanism(orbits: &mut Vec<(String, PeriodicOrbit<f64>)>) -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for map in zoo() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bases: Vec<f64> = (0..100).map(|_| rng.random()).collect();
        let backend = map.select_backend(None).unwrap();
        let mut found = Vec::new();
        let tally = match backend {
            Backend::Float => extract_all(&map.float, &bases, &mut found, false),
            Backend::Rational => {
                let exact_bases: Vec<BigRational> = bases
                    .iter()
                    .map(|&y| <BigRational as Scalar>::from_f64(y).unwrap())
                    .collect();
                extract_all(map.exact.as_ref().unwrap(), &exact_bases, &mut found, true)
            }
        };
        orbits.extend(found.into_iter().map(|o| (map.name.clone(), o)));
        pass &= tally.failures.is_empty() && tally.hits > 0;
        details.push(format!(
            "{} ({:?}): {} covering times, {} failures, max residual {:.1e}{}",
            map.name,
            backend,
            tally.hits,
            tally.failures.len(),
            tally.max_residual,
            tally.failures.first().map(|f| format!(" first: {f}")).unwrap_or_default()
        ));
    }
    verdict(pass, details.join("; "))
}

// ---------------------------------------------------------------- 5

fn entropy() -> Verdict {
    let cases: [(&str, f64); 2] = [("tent", 2f64.ln()), ("golden", golden_ratio().ln())];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, analytic) in cases {
        let map: LoadedMap = zoo::zoo_map(name).unwrap();
        let backend = map.select_backend(None).unwrap();
        let cfg = ExperimentConfig {
            seed: 5,
            orbit_length: 1_000_000,
            burn_in: 0,
            ..ExperimentConfig::default()
        };
        let target = generate_target(&map, backend, &cfg).expect("target orbit");
        let rate = block_entropy(&target.trace.word, 12).unwrap().rate;
        let lyap = lyapunov_entropy(&map.float, &target.trace).unwrap();
        let ok = (rate - analytic).abs() <= 0.05 && (lyap - analytic).abs() <= 1e-3;
        pass &= ok;
        details.push(format!(
            "{name}: H_12/12 = {rate:.4}, lyapunov = {lyap:.6}, analytic {analytic:.6}"
        ));
    }
    verdict(pass, details.join("; "))
}

// ---------------------------------------------------------------- 6

fn periodic_stream(word: &[usize], len: usize) -> Vec<usize> {
    word.iter().copied().cycle().take(len).collect()
}

fn invariance(orbits: &[(String, PeriodicOrbit<f64>)]) -> Verdict {
    let maps: HashMap<String, LoadedMap> = zoo().into_iter().map(|m| (m.name.clone(), m)).collect();
    let mut worst_w1 = 0.0f64;
    let mut rate_ok = true;
    let mut checked = 0;
    for (name, o) in orbits {
        let map = &maps[name];
        let mu = periodic_measure(o);
        let pushed = mu.push_forward(&map.float).expect("orbit avoids the critical set");
        worst_w1 = worst_w1.max(w1_distance(&pushed, &mu));
        let stream = periodic_stream(&o.word, 50 * o.period.max(40));
        for n in [1, 4, 8, 12] {
            let rate = block_entropy(&stream, n).unwrap().rate;
            rate_ok &= rate <= (o.period as f64).ln() / n as f64 + 1e-12;
        }
        checked += 1;
    }
    verdict(
        worst_w1 <= 1e-9 && rate_ok && checked > 0,
        format!(
            "{checked} orbits, max W1(T_* mu_p, mu_p) = {worst_w1:.2e}, periodic stream rates <= log(l)/n: {rate_ok}"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn random_measure(rng: &mut ChaCha8Rng) -> DiscreteMeasure {
    let n = rng.random_range(1..=20);
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    DiscreteMeasure::new(weights.into_iter().map(|w| (rng.random::<f64>(), w / total))).unwrap()
}

fn metric_axioms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut symmetric, mut identity, mut triangle) = (true, true, true);
    for _ in 0..1000 {
        let (a, b, c) = (
            random_measure(&mut rng),
            random_measure(&mut rng),
            random_measure(&mut rng),
        );
        symmetric &= (w1_distance(&a, &b) - w1_distance(&b, &a)).abs() <= 1e-15;
        identity &= w1_distance(&a, &a) <= 1e-12 && w1_distance(&a, &b) > 1e-12;
        triangle &= w1_distance(&a, &c) <= w1_distance(&a, &b) + w1_distance(&b, &c) + 1e-12;
    }
    let mut dirac = true;
    for _ in 0..100 {
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        let d = w1_distance(&DiscreteMeasure::dirac(x).unwrap(), &DiscreteMeasure::dirac(y).unwrap());
        dirac &= d == (x - y).abs();
    }
    verdict(
        symmetric && identity && triangle && dirac,
        format!("symmetry {symmetric}, identity {identity}, triangle {triangle} over 1000 triples; W1(delta_a, delta_b) = |a - b| exactly for 100 pairs: {dirac}"),
    )
}

// ---------------------------------------------------------------- 8

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["tent", "golden", "wobbly"] {
        let run = |tag: &str, workers: &str| {
            let path = dir.path().join(format!("{name}-{tag}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_permeas"))
                .args(["approximate", "--map", &format!("zoo:{name}"), "--seed", "42"])
                .args(["--length", "200000", "--burn-in", "1000", "--l-max", "40"])
                .args(["--recurrence-bases", "--workers", workers, "--out"])
                .arg(&path)
                .status()
                .expect("run permeas");
            assert!(status.success());
            std::fs::read(&path).unwrap()
        };
        let first = run("a", "1");
        let second = run("b", "1");
        let parallel = run("c", "4");
        let same = first == second && first == parallel;
        let rows = first.iter().filter(|&&b| b == b'\n').count().saturating_sub(1);
        pass &= same && rows > 0;
        details.push(format!("{name}: {rows} rows, identical {same}"));
    }
    verdict(pass, details.join("; "))
}
