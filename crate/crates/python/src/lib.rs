//! Python bindings for `permeas`.

use num_rational::BigRational;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use permeas::exact::{from_f64_exact, parse_rational};
use permeas::harness::{
    resolve_map, run_approximation_experiment, zoo, Backend, ExperimentConfig, LoadedMap, REPORT_HEADER,
};
use permeas::measure::{block_entropy as block_entropy_rs, conditional_information as cond_info_rs};
use permeas::periodic::{find_periodic_point, FixedPointSolver};
use permeas::symbolic::{cylinder_of_point, enumerate_cylinders, DEFAULT_DEPTH_CAP};
use permeas::tower::covering_times as covering_times_rs;
use permeas::{BranchMap, DiscreteMeasure, Error, Itinerary, Scalar};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn backend_arg(text: Option<&str>) -> PyResult<Option<Backend>> {
    match text {
        None => Ok(None),
        Some("float") => Ok(Some(Backend::Float)),
        Some("rational") => Ok(Some(Backend::Rational)),
        Some(other) => Err(PyValueError::new_err(format!(
            "backend must be 'float' or 'rational', got '{other}'"
        ))),
    }
}

/// A float, or a string such as `"3/10"`.
fn exact_point(x: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    if let Ok(text) = x.extract::<String>() {
        return parse_rational(&text).ok_or_else(|| PyValueError::new_err(format!("bad point '{text}'")));
    }
    let v: f64 = x.extract()?;
    from_f64_exact(v).ok_or_else(|| PyValueError::new_err(format!("bad point {v}")))
}

fn float_point(x: &Bound<'_, PyAny>) -> PyResult<f64> {
    match x.extract::<f64>() {
        Ok(v) => Ok(v),
        Err(_) => Ok(Scalar::to_f64(&exact_point(x)?)),
    }
}

type CoveringRow = (usize, Vec<usize>, f64, f64, f64, f64);

fn covering_rows<M: BranchMap>(map: &M, y: &M::Scalar, l_max: usize, margin: f64) -> PyResult<Vec<CoveringRow>> {
    let scan = covering_times_rs(map, y, l_max, margin).map_err(py_err)?;
    Ok(scan
        .hits
        .into_iter()
        .map(|h| {
            let c = h.cylinder.interval.expect("covering cylinders are nonempty").to_f64();
            let d = h.image.to_f64();
            (h.l, h.cylinder.word.0, c.lo, c.hi, d.lo, d.hi)
        })
        .collect())
}

fn periodic_rows<M: FixedPointSolver>(
    map: &M,
    y: &M::Scalar,
    l_max: usize,
    margin: f64,
    tol: f64,
) -> PyResult<Vec<PeriodicPoint>> {
    let scan = covering_times_rs(map, y, l_max, margin).map_err(py_err)?;
    scan.hits
        .iter()
        .map(|h| {
            let o = find_periodic_point(map, &h.cylinder, tol).map_err(py_err)?;
            Ok(PeriodicPoint {
                period: o.period,
                point: o.point.to_f64(),
                exact: M::Scalar::EXACT.then(|| o.point.to_string()),
                minimal_period: o.minimal_period,
                residual: o.residual.to_f64(),
                word: o.word.0.clone(),
                orbit: o.orbit.iter().map(Scalar::to_f64).collect(),
                possibly_non_unique: o.possibly_non_unique,
            })
        })
        .collect()
}

#[pyclass(get_all, frozen)]
struct PeriodicPoint {
    period: usize,
    point: f64,
    /// `p` as a fraction under the rational backend.
    exact: Option<String>,
    minimal_period: usize,
    residual: f64,
    word: Vec<usize>,
    orbit: Vec<f64>,
    possibly_non_unique: bool,
}

#[pymethods]
impl PeriodicPoint {
    fn __repr__(&self) -> String {
        format!(
            "PeriodicPoint(period={}, point={}, minimal_period={}, residual={:e})",
            self.period, self.point, self.minimal_period, self.residual
        )
    }
}

#[pyclass(get_all, frozen)]
struct ApproximationRow {
    l: usize,
    p: f64,
    minimal_period: usize,
    w1: f64,
    discrepancy_m: f64,
    residual: f64,
    base: usize,
}

#[pymethods]
impl ApproximationRow {
    fn __repr__(&self) -> String {
        format!(
            "ApproximationRow(l={}, p={}, minimal_period={}, w1={}, discrepancy_m={}, residual={:e})",
            self.l, self.p, self.minimal_period, self.w1, self.discrepancy_m, self.residual
        )
    }
}

/// A piecewise monotonic map of `[0, 1]`, with its exact form when it has one.
#[pyclass(frozen)]
struct Map {
    inner: LoadedMap,
}

impl Map {
    fn backend(&self, requested: Option<&str>) -> PyResult<Backend> {
        self.inner.select_backend(backend_arg(requested)?).map_err(py_err)
    }
}

#[pymethods]
impl Map {
    /// A built-in map: tent, golden, skew_tent, mod_one or wobbly.
    #[staticmethod]
    fn zoo(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: zoo::zoo_map(name).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn zoo_names() -> Vec<&'static str> {
        zoo::ZOO_NAMES.to_vec()
    }

    /// Parses a map-spec document (TOML).
    #[staticmethod]
    fn from_spec(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: permeas::harness::load_map_spec(text).map_err(py_err)?,
        })
    }

    /// A map-spec file path, or `zoo:<name>`.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: resolve_map(path).map_err(py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn critical_points(&self) -> Vec<f64> {
        self.inner.float.critical_points().to_vec()
    }

    #[getter]
    fn has_exact_form(&self) -> bool {
        self.inner.exact.is_some()
    }

    fn evaluate(&self, x: f64) -> PyResult<f64> {
        self.inner.float.evaluate(&x).map_err(py_err)
    }

    fn branch_of(&self, x: f64) -> PyResult<usize> {
        self.inner.float.branch_of(&x).map_err(py_err)
    }

    fn invert_branch(&self, branch: usize, y: f64) -> PyResult<f64> {
        self.inner.float.invert_branch(branch, &y).map_err(py_err)
    }

    /// `(points, word)` of the orbit segment `x, ..., T^n x`.
    #[pyo3(signature = (x, n, backend=None))]
    fn iterate(&self, x: &Bound<'_, PyAny>, n: usize, backend: Option<&str>) -> PyResult<(Vec<f64>, Vec<usize>)> {
        let trace = match (self.backend(backend)?, &self.inner.exact) {
            (Backend::Rational, Some(e)) => {
                let t = e.iterate(&exact_point(x)?, n).map_err(py_err)?;
                (t.points.iter().map(Scalar::to_f64).collect(), t.word)
            }
            _ => {
                let t = self.inner.float.iterate(&float_point(x)?, n).map_err(py_err)?;
                (t.points, t.word)
            }
        };
        Ok(trace)
    }

    /// `(word, lo, hi)` for every nonempty cylinder of depth `k`.
    #[pyo3(signature = (k, backend=None))]
    fn cylinders(&self, k: usize, backend: Option<&str>) -> PyResult<Vec<(Vec<usize>, f64, f64)>> {
        fn rows<M: BranchMap>(map: &M, k: usize) -> PyResult<Vec<(Vec<usize>, f64, f64)>> {
            Ok(enumerate_cylinders(map, k, DEFAULT_DEPTH_CAP)
                .map_err(py_err)?
                .into_iter()
                .filter_map(|c| c.interval.map(|iv| (c.word.0, iv.lo.to_f64(), iv.hi.to_f64())))
                .collect())
        }
        match (self.backend(backend)?, &self.inner.exact) {
            (Backend::Rational, Some(e)) => rows(e, k),
            _ => rows(&self.inner.float, k),
        }
    }

    /// `(word, lo, hi)` of the depth-`k` cylinder containing `x`.
    fn cylinder_of_point(&self, x: f64, k: usize) -> PyResult<(Vec<usize>, f64, f64)> {
        let c = cylinder_of_point(&self.inner.float, &x, k).map_err(py_err)?;
        let iv = c
            .interval
            .ok_or_else(|| PyValueError::new_err("empty cylinder"))?;
        Ok((c.word.0, iv.lo, iv.hi))
    }

    /// `(l, word, c_lo, c_hi, d_lo, d_hi)` for every covering time `l <= l_max`.
    #[pyo3(signature = (y, l_max, margin=1e-9, backend=None))]
    fn covering_times(
        &self,
        y: &Bound<'_, PyAny>,
        l_max: usize,
        margin: f64,
        backend: Option<&str>,
    ) -> PyResult<Vec<CoveringRow>> {
        match (self.backend(backend)?, &self.inner.exact) {
            (Backend::Rational, Some(e)) => covering_rows(e, &exact_point(y)?, l_max, margin),
            _ => covering_rows(&self.inner.float, &float_point(y)?, l_max, margin),
        }
    }

    /// Periodic points at the covering times of `y`.
    #[pyo3(signature = (y, l_max, margin=1e-9, tol=1e-9, backend=None))]
    fn periodic_points(
        &self,
        y: &Bound<'_, PyAny>,
        l_max: usize,
        margin: f64,
        tol: f64,
        backend: Option<&str>,
    ) -> PyResult<Vec<PeriodicPoint>> {
        match (self.backend(backend)?, &self.inner.exact) {
            (Backend::Rational, Some(e)) => periodic_rows(e, &exact_point(y)?, l_max, margin, tol),
            _ => periodic_rows(&self.inner.float, &float_point(y)?, l_max, margin, tol),
        }
    }

    /// Periodic-measure approximation of the empirical measure of a seeded orbit.
    #[pyo3(signature = (
        seed=0, length=100_000, burn_in=1000, l_max=64, margin=1e-9, depth_m=4,
        tol=1e-9, backend=None, start=None, base_point=None, recurrence_bases=false
    ))]
    #[allow(clippy::too_many_arguments)]
    fn approximate(
        &self,
        py: Python<'_>,
        seed: u64,
        length: usize,
        burn_in: usize,
        l_max: usize,
        margin: f64,
        depth_m: usize,
        tol: f64,
        backend: Option<&str>,
        start: Option<f64>,
        base_point: Option<f64>,
        recurrence_bases: bool,
    ) -> PyResult<Vec<ApproximationRow>> {
        let config = ExperimentConfig {
            seed,
            start,
            base_point,
            orbit_length: length,
            burn_in,
            l_max,
            margin,
            depth_m,
            tolerance: tol,
            backend: backend_arg(backend)?,
            recurrence_bases,
            ..ExperimentConfig::default()
        };
        let map = &self.inner;
        let outcome = py
            .detach(|| run_approximation_experiment(map, &config))
            .map_err(py_err)?;
        Ok(outcome
            .rows
            .into_iter()
            .map(|r| ApproximationRow {
                l: r.l,
                p: r.p,
                minimal_period: r.minimal_period,
                w1: r.w1,
                discrepancy_m: r.discrepancy_m,
                residual: r.residual,
                base: r.base,
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Map('{}')", self.inner.name)
    }
}

fn measure(atoms: Vec<(f64, f64)>) -> PyResult<DiscreteMeasure> {
    DiscreteMeasure::new(atoms).map_err(py_err)
}

/// Wasserstein-1 distance between two lists of `(position, weight)` atoms.
#[pyfunction]
fn w1_distance(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(permeas::measure::w1_distance(&measure(a)?, &measure(b)?))
}

/// `(H_n, H_n / n)` of the length-`n` blocks of a symbol stream.
#[pyfunction]
fn block_entropy(stream: Vec<usize>, n: usize) -> PyResult<(f64, f64)> {
    let e = block_entropy_rs(&stream, n).map_err(py_err)?;
    Ok((e.block_entropy, e.rate))
}

#[pyfunction]
fn conditional_information(stream: Vec<usize>, n: usize) -> PyResult<f64> {
    cond_info_rs(&stream, n).map_err(py_err)
}

/// Cylinder of a word: `(lo, hi)`, or `None` when it is empty.
#[pyfunction]
fn cylinder_of_word(map: &Map, word: Vec<usize>) -> PyResult<Option<(f64, f64)>> {
    let c = permeas::symbolic::cylinder_of_word(&map.inner.float, &Itinerary(word)).map_err(py_err)?;
    Ok(c.interval.map(|iv| (iv.lo, iv.hi)))
}

#[pymodule]
pub fn permeas_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Map>()?;
    m.add_class::<PeriodicPoint>()?;
    m.add_class::<ApproximationRow>()?;
    m.add_function(wrap_pyfunction!(w1_distance, m)?)?;
    m.add_function(wrap_pyfunction!(block_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_information, m)?)?;
    m.add_function(wrap_pyfunction!(cylinder_of_word, m)?)?;
    m.add("REPORT_HEADER", REPORT_HEADER)?;
    Ok(())
}
