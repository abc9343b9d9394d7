use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use permeas::exact::parse_rational;
use permeas::harness::{
    format_real, generate_target, resolve_map, run_approximation_experiment, with_workers,
    write_report, Backend, ExperimentConfig, LoadedMap,
};
use permeas::measure::{block_entropy, conditional_information, lyapunov_entropy};
use permeas::periodic::{find_periodic_point, FixedPointSolver};
use permeas::symbolic::{cylinder_of_point, enumerate_cylinders, Cylinder, DEFAULT_DEPTH_CAP};
use permeas::tower::{covering_times, trace_tower};
use permeas::{BranchMap, Error, OrbitTrace, Result, Scalar};

/// Periodic orbits and periodic-measure approximation for piecewise
/// monotonic interval maps. Every subcommand writes CSV.
#[derive(Parser)]
#[command(name = "permeas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate a point and dump its orbit and itinerary.
    Orbit(OrbitArgs),
    /// Enumerate depth-k cylinders, or the nested cylinders of one point.
    Cylinders(CylinderArgs),
    /// Dump the cylinder/image tracker along an orbit.
    Tower(TowerArgs),
    /// Periodic points at the covering times of one base point.
    Periodic(TowerArgs),
    /// Full pipeline: target orbit, covering times, periodic measures, distances.
    Approximate(ApproximateArgs),
    /// Block entropy, conditional information and Lyapunov estimates of an itinerary.
    Entropy(EntropyArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Map-spec file, or `zoo:<name>` for a built-in map.
    #[arg(long)]
    map: String,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    common: Common,
    /// Starting point (`0.3`, `3/10`); random from `--seed` when omitted.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    length: usize,
}

#[derive(Args)]
struct CylinderArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// List the cylinders of this point for depths 0..=depth instead.
    #[arg(long)]
    x0: Option<String>,
}

#[derive(Args)]
struct TowerArgs {
    #[command(flatten)]
    common: Common,
    /// Base point; otherwise the orbit point after `--burn-in` steps from a
    /// random start drawn with `--seed`.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 30)]
    l_max: usize,
    #[arg(long, default_value_t = permeas::tower::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = permeas::periodic::DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Args)]
struct ApproximateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Starting point of the target orbit instead of a random one.
    #[arg(long)]
    start: Option<f64>,
    /// Base point of the covering scan instead of the first post-burn-in point.
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    length: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 64)]
    l_max: usize,
    #[arg(long, default_value_t = permeas::tower::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = 4)]
    depth_m: usize,
    #[arg(long, default_value_t = permeas::periodic::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Also scan from the five most recurrent early orbit points.
    #[arg(long)]
    recurrence_bases: bool,
    /// Worker threads (all cores when omitted).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    length: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Largest block length reported.
    #[arg(long, default_value_t = 12)]
    block: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Orbit(a) => orbit(a),
        Command::Cylinders(a) => cylinders(a),
        Command::Tower(a) => tower(a, false),
        Command::Periodic(a) => tower(a, true),
        Command::Approximate(a) => approximate(a),
        Command::Entropy(a) => entropy(a),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_error(e: io::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        message: e.to_string(),
    }
}

fn load(common: &Common) -> Result<(LoadedMap, Backend)> {
    let map = resolve_map(&common.map)?;
    let backend = map.select_backend(common.backend)?;
    Ok((map, backend))
}

enum Point {
    Float(f64),
    Exact(BigRational),
}

fn parse_point(text: &str, backend: Backend) -> Result<Point> {
    let exact = parse_rational(text).ok_or_else(|| Error::Parse(format!("bad point `{text}`")))?;
    Ok(match backend {
        Backend::Rational => Point::Exact(exact),
        Backend::Float => Point::Float(Scalar::to_f64(&exact)),
    })
}

/// The given point, or the target-orbit point at `burn_in`.
fn base_point(map: &LoadedMap, backend: Backend, x0: Option<&str>, seed: u64, burn_in: usize) -> Result<Point> {
    if let Some(text) = x0 {
        return parse_point(text, backend);
    }
    let cfg = ExperimentConfig {
        seed,
        orbit_length: burn_in.max(1),
        burn_in,
        ..ExperimentConfig::default()
    };
    let target = generate_target(map, backend, &cfg)?;
    Ok(match (backend, target.exact_point(burn_in)) {
        (Backend::Rational, Some(p)) => Point::Exact(p),
        (Backend::Rational, None) => parse_point(&format!("{:e}", target.trace.points[burn_in]), backend)?,
        (Backend::Float, _) => Point::Float(target.trace.points[burn_in]),
    })
}

fn real<S: Scalar>(x: &S) -> String {
    format_real(x.to_f64())
}

fn word_text(word: &[usize]) -> String {
    word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-")
}

fn orbit(a: OrbitArgs) -> Result<()> {
    let (map, backend) = load(&a.common)?;
    let trace: OrbitTrace<f64> = match a.x0.as_deref() {
        Some(text) => match parse_point(text, backend)? {
            Point::Float(x) => map.float.iterate(&x, a.length)?,
            Point::Exact(x) => {
                let exact = map.exact.as_ref().ok_or(Error::NoExactForm)?;
                let t = exact.iterate(&x, a.length)?;
                OrbitTrace {
                    points: t.points.iter().map(Scalar::to_f64).collect(),
                    word: t.word,
                    min_critical_distance: t.min_critical_distance,
                }
            }
        },
        None => {
            let cfg = ExperimentConfig {
                seed: a.seed,
                orbit_length: a.length.max(1),
                burn_in: 0,
                ..ExperimentConfig::default()
            };
            let mut t = generate_target(&map, backend, &cfg)?.trace;
            t.points.truncate(a.length + 1);
            t.word.truncate(a.length);
            t
        }
    };
    let mut out = sink(&a.common.out)?;
    writeln!(out, "s,x,symbol").map_err(io_error)?;
    for (s, x) in trace.points.iter().enumerate() {
        let symbol = trace.word.get(s).map(|b| b.to_string()).unwrap_or_default();
        writeln!(out, "{s},{},{symbol}", format_real(*x)).map_err(io_error)?;
    }
    out.flush().map_err(io_error)
}

fn write_cylinders<S: Scalar>(out: &mut dyn Write, k: Option<usize>, cyls: &[Cylinder<S>]) -> io::Result<()> {
    for c in cyls {
        let depth = k.unwrap_or(c.depth());
        match &c.interval {
            Some(iv) => writeln!(
                out,
                "{depth},{},{},{},{}",
                word_text(&c.word),
                real(&iv.lo),
                real(&iv.hi),
                real(&iv.width())
            )?,
            None => writeln!(out, "{depth},{},,,0", word_text(&c.word))?,
        }
    }
    Ok(())
}

fn cylinders_for<M: BranchMap>(map: &M, depth: usize, x0: Option<&M::Scalar>, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "k,word,lo,hi,width").map_err(io_error)?;
    let cyls = match x0 {
        Some(x) => (0..=depth)
            .map(|k| cylinder_of_point(map, x, k))
            .collect::<Result<Vec<_>>>()?,
        None => enumerate_cylinders(map, depth, DEFAULT_DEPTH_CAP)?,
    };
    write_cylinders(out, None, &cyls).map_err(io_error)
}

fn cylinders(a: CylinderArgs) -> Result<()> {
    let (map, backend) = load(&a.common)?;
    let mut out = sink(&a.common.out)?;
    let point = a.x0.as_deref().map(|t| parse_point(t, backend)).transpose()?;
    match backend {
        Backend::Float => {
            let x = match point {
                Some(Point::Float(x)) => Some(x),
                _ => None,
            };
            cylinders_for(&map.float, a.depth, x.as_ref(), &mut out)?
        }
        Backend::Rational => {
            let exact = map.exact.as_ref().ok_or(Error::NoExactForm)?;
            let x = match point {
                Some(Point::Exact(x)) => Some(x),
                _ => None,
            };
            cylinders_for(exact, a.depth, x.as_ref(), &mut out)?
        }
    }
    out.flush().map_err(io_error)
}

fn tower_rows<M: BranchMap>(map: &M, y: &M::Scalar, a: &TowerArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "l,word,c_lo,c_hi,d_lo,d_hi,cut,covering").map_err(io_error)?;
    for r in trace_tower(map, y, a.l_max, a.margin)? {
        let cut = r.cut.map(|c| c.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{cut},{}",
            r.l,
            word_text(&r.word),
            real(&r.cylinder.lo),
            real(&r.cylinder.hi),
            real(&r.image.lo),
            real(&r.image.hi),
            r.covering
        )
        .map_err(io_error)?;
    }
    Ok(())
}

fn periodic_rows<M: FixedPointSolver>(map: &M, y: &M::Scalar, a: &TowerArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "l,p,minimal_period,residual,word").map_err(io_error)?;
    let scan = covering_times(map, y, a.l_max, a.margin)?;
    for hit in &scan.hits {
        match find_periodic_point(map, &hit.cylinder, a.tol) {
            Ok(o) => writeln!(
                out,
                "{},{},{},{},{}",
                hit.l,
                real(&o.point),
                o.minimal_period,
                real(&o.residual),
                word_text(&o.word)
            )
            .map_err(io_error)?,
            Err(e) => log::warn!("covering time {}: {e}", hit.l),
        }
    }
    Ok(())
}

fn tower(a: TowerArgs, periodic: bool) -> Result<()> {
    let (map, backend) = load(&a.common)?;
    let mut out = sink(&a.common.out)?;
    match base_point(&map, backend, a.x0.as_deref(), a.seed, a.burn_in)? {
        Point::Float(y) if periodic => periodic_rows(&map.float, &y, &a, &mut out)?,
        Point::Float(y) => tower_rows(&map.float, &y, &a, &mut out)?,
        Point::Exact(y) => {
            let exact = map.exact.as_ref().ok_or(Error::NoExactForm)?;
            if periodic {
                periodic_rows(exact, &y, &a, &mut out)?
            } else {
                tower_rows(exact, &y, &a, &mut out)?
            }
        }
    }
    out.flush().map_err(io_error)
}

fn approximate(a: ApproximateArgs) -> Result<()> {
    let map = resolve_map(&a.common.map)?;
    let config = ExperimentConfig {
        seed: a.seed,
        start: a.start,
        base_point: a.x0,
        orbit_length: a.length,
        burn_in: a.burn_in,
        l_max: a.l_max,
        margin: a.margin,
        depth_m: a.depth_m,
        tolerance: a.tol,
        backend: a.common.backend,
        recurrence_bases: a.recurrence_bases,
        ..ExperimentConfig::default()
    };
    let outcome = match a.workers {
        Some(n) => with_workers(n, || run_approximation_experiment(&map, &config))??,
        None => run_approximation_experiment(&map, &config)?,
    };
    for (l, msg) in &outcome.failures {
        log::warn!("covering time {l}: {msg}");
    }
    let mut out = sink(&a.common.out)?;
    write_report(&outcome.rows, &mut out).map_err(io_error)?;
    out.flush().map_err(io_error)
}

fn entropy(a: EntropyArgs) -> Result<()> {
    let (map, backend) = load(&a.common)?;
    let config = ExperimentConfig {
        seed: a.seed,
        start: a.x0,
        orbit_length: a.length,
        burn_in: a.burn_in,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let target = generate_target(&map, backend, &config)?;
    let trace = OrbitTrace {
        points: target.trace.points[a.burn_in..].to_vec(),
        word: target.trace.word[a.burn_in..].to_vec(),
        min_critical_distance: target.trace.min_critical_distance,
    };
    let lyapunov = match lyapunov_entropy(&map.float, &trace) {
        Ok(h) => format_real(h),
        Err(Error::NonAffineMap) => String::new(),
        Err(e) => return Err(e),
    };
    let mut out = sink(&a.common.out)?;
    writeln!(out, "n,block_entropy,rate,conditional_information,undersampled,lyapunov_entropy")
        .map_err(io_error)?;
    for n in 1..=a.block {
        let est = block_entropy(&trace.word, n)?;
        let cond = match conditional_information(&trace.word, n) {
            Ok(c) => format_real(c),
            Err(Error::BlockTooLong { .. }) => String::new(),
            Err(e) => return Err(e),
        };
        writeln!(
            out,
            "{n},{},{},{cond},{},{lyapunov}",
            format_real(est.block_entropy),
            format_real(est.rate),
            est.undersampled
        )
        .map_err(io_error)?;
    }
    out.flush().map_err(io_error)
}
