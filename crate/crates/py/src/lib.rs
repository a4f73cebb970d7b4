//! Python bindings. Spaces are wrapped as `Space`; directed-distance data
//! and graphs travel as their text formats or edge lists.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use amalgam_core::amalgam::{free_amalgam, AmalgamationTriple, Configuration};
use amalgam_core::format::{parse_bms, parse_dds, serialize_space};
use amalgam_core::girth::{dd_realize, dd_validate, og_realize};
use amalgam_core::harness::{run_acceptance, SuiteCaps};
use amalgam_core::independence::{indep_at_level, level_bounds};
use amalgam_core::sop::{base_case_contradiction, DividingConfiguration, SopError};
use amalgam_core::spaces::{
    min_plus_complete, validate_metric, BoundedMetricSpace, PartialDistanceSpec,
};
use amalgam_core::{Digraph, Distance};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite metric space with integer distances in `0..=n`.
#[pyclass(name = "Space", frozen, from_py_object)]
#[derive(Clone)]
struct Space {
    inner: BoundedMetricSpace,
}

#[pymethods]
impl Space {
    /// Builds a space from every pair `(p, q, d)` of distinct points.
    #[new]
    fn new(
        n: Distance,
        points: Vec<String>,
        pairs: Vec<(String, String, Distance)>,
    ) -> PyResult<Self> {
        let inner = BoundedMetricSpace::from_pairs(n, points, pairs).map_err(value_error)?;
        Ok(Space { inner })
    }

    /// Parses a total `.bms` text.
    #[staticmethod]
    fn from_bms(text: &str) -> PyResult<Self> {
        let f = parse_bms(text).map_err(value_error)?;
        Ok(Space {
            inner: f.spec.into_space().map_err(value_error)?,
        })
    }

    #[getter]
    fn bound(&self) -> Distance {
        self.inner.bound()
    }

    #[getter]
    fn points(&self) -> Vec<String> {
        self.inner.points().to_vec()
    }

    fn dist(&self, p: &str, q: &str) -> PyResult<Distance> {
        self.inner
            .dist_by_name(p, q)
            .ok_or_else(|| PyKeyError::new_err(format!("{p}-{q}")))
    }

    fn matrix(&self) -> Vec<Vec<Distance>> {
        self.inner.matrix()
    }

    #[pyo3(signature = (nstar=None))]
    fn to_bms(&self, nstar: Option<Distance>) -> String {
        serialize_space(&self.inner, nstar)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Space) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Space(n={}, points={:?})",
            self.inner.bound(),
            self.inner.points()
        )
    }
}

/// Violations of the metric axioms, as messages; empty for a metric.
#[pyfunction]
fn check_metric(
    n: Distance,
    points: Vec<String>,
    matrix: Vec<Vec<Distance>>,
) -> PyResult<Vec<String>> {
    let k = points.len();
    if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
        return Err(value_error(format!("matrix must be {k} x {k}")));
    }
    Ok(validate_metric(&points, &matrix, n)
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Completes partial pair data by shortest chains; raises `ValueError` with
/// the offending chain when no metric extends it.
#[pyfunction]
fn complete(
    n: Distance,
    points: Vec<String>,
    pairs: Vec<(String, String, Distance)>,
) -> PyResult<Space> {
    let spec = PartialDistanceSpec::from_pairs(n, points, pairs).map_err(value_error)?;
    Ok(Space {
        inner: min_plus_complete(&spec).map_err(value_error)?,
    })
}

/// Free amalgam of `left` and `right` over the points they share by name.
#[pyfunction]
#[pyo3(signature = (left, right, base, nstar=None))]
fn amalgamate(
    left: &Space,
    right: &Space,
    base: Vec<String>,
    nstar: Option<Distance>,
) -> PyResult<Space> {
    let triple = AmalgamationTriple::over_shared_points(
        left.inner.clone(),
        right.inner.clone(),
        &base,
        nstar,
    )
    .map_err(value_error)?;
    Ok(Space {
        inner: free_amalgam(&triple).map_err(value_error)?.space,
    })
}

/// Whether `left` and `right` are independent over `base` at `level`.
#[pyfunction]
#[pyo3(signature = (space, base, left, right, level, nstar=None))]
fn independent(
    space: &Space,
    base: Vec<String>,
    left: Vec<String>,
    right: Vec<String>,
    level: u32,
    nstar: Option<Distance>,
) -> PyResult<bool> {
    let nstar = nstar.unwrap_or_else(|| space.inner.bound().div_ceil(2));
    let cfg = Configuration::new(space.inner.clone(), nstar, &base, &left, &right)
        .map_err(value_error)?;
    Ok(indep_at_level(&cfg, level))
}

/// `(lower, upper)` distance window of level `m >= 1`.
#[pyfunction]
fn window(m: u32, n: Distance, nstar: Distance) -> PyResult<(Distance, Distance)> {
    level_bounds(m, n, nstar).map_err(value_error)
}

/// Violations of a `.dds` text, as messages; empty when consistent.
#[pyfunction]
fn digraph_check(dds: &str) -> PyResult<Vec<String>> {
    let s = parse_dds(dds).map_err(value_error)?;
    Ok(dd_validate(&s)
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Edge list of the digraph realizing a consistent `.dds` text.
#[pyfunction]
fn digraph_realize(dds: &str) -> PyResult<Vec<(String, String)>> {
    let s = parse_dds(dds).map_err(value_error)?;
    Ok(dd_realize(&s).map_err(value_error)?.graph.edges())
}

/// Edge list of a graph with no short odd cycle realizing a `.bms` text.
#[pyfunction]
fn oddgirth_realize(bms: &str) -> PyResult<Vec<(String, String)>> {
    let f = parse_bms(bms).map_err(value_error)?;
    Ok(og_realize(&f.spec).map_err(value_error)?.edges())
}

/// Runs the base-case check on a digraph. Returns `None` when certified,
/// otherwise the closed walk found (first vertex repeated at the end).
#[pyfunction]
fn cycle_certificate(
    edges: Vec<(String, String)>,
    level: u32,
    first: &str,
    second: &str,
) -> PyResult<Option<Vec<String>>> {
    let cfg = DividingConfiguration::new(level, first, second).map_err(value_error)?;
    let g = Digraph::from_edges(&edges);
    match base_case_contradiction(&g, &cfg) {
        Ok(_) => Ok(None),
        Err(SopError::WitnessCycle(w)) | Err(SopError::ShortCycle(w)) => Ok(Some(w.vertices)),
        Err(e) => Err(value_error(e)),
    }
}

/// Runs one acceptance suite; returns `(passed, summary line)`.
#[pyfunction]
#[pyo3(signature = (suite, max_points=None, max_bound=None))]
fn accept(
    suite: &str,
    max_points: Option<usize>,
    max_bound: Option<Distance>,
) -> PyResult<(bool, String)> {
    let mut caps = SuiteCaps::for_suite(suite)
        .ok_or_else(|| value_error(format!("unknown suite {suite:?}")))?;
    caps.max_points = max_points.unwrap_or(caps.max_points);
    caps.max_bound = max_bound.unwrap_or(caps.max_bound);
    let r = run_acceptance(suite, caps).map_err(value_error)?;
    Ok((r.passed(), r.to_string()))
}

#[pymodule]
fn amalgam(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    m.add_function(wrap_pyfunction!(check_metric, m)?)?;
    m.add_function(wrap_pyfunction!(complete, m)?)?;
    m.add_function(wrap_pyfunction!(amalgamate, m)?)?;
    m.add_function(wrap_pyfunction!(independent, m)?)?;
    m.add_function(wrap_pyfunction!(window, m)?)?;
    m.add_function(wrap_pyfunction!(digraph_check, m)?)?;
    m.add_function(wrap_pyfunction!(digraph_realize, m)?)?;
    m.add_function(wrap_pyfunction!(oddgirth_realize, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(accept, m)?)?;
    Ok(())
}
