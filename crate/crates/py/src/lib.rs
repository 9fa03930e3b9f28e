use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tricover::elm::oracle::blowup_oracle_check;
use tricover::elm::resolve::{resolve_singularities, Strategy};
use tricover::elm::{apply_elm, apply_inverse, ElmState, ElmStep};
use tricover::ruled::{arithmetic_genus, m_invariant, trisection_cover_class, RuledSurfaceModel, SurfaceClass};
use tricover::scenario::Scenario;
use tricover::suites::{self, Grid, VerifyConfig};
use tricover::theorems::bounds::cs_threshold;
use tricover::theorems::{execute_plan, plan_construction, theorem_a_threshold, theorem_b_bound, verdict, PlanOutcome};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(err)
}

#[pyclass(name = "SurfaceModel", frozen)]
struct PySurfaceModel {
    inner: RuledSurfaceModel,
}

#[pymethods]
impl PySurfaceModel {
    #[staticmethod]
    fn tschirnhausen(g_y: i64, g_x: i64, e: i64) -> PyResult<Self> {
        Ok(Self { inner: RuledSurfaceModel::tschirnhausen(g_y, g_x, e).map_err(err)? })
    }

    #[staticmethod]
    fn decomposable(g_y: i64, b1: i64, b2: i64) -> PyResult<Self> {
        Ok(Self { inner: RuledSurfaceModel::decomposable(g_y, b1, b2).map_err(err)? })
    }

    #[staticmethod]
    fn product(g_y: i64) -> Self {
        Self { inner: RuledSurfaceModel::product(g_y) }
    }

    #[getter]
    fn g_y(&self) -> i64 {
        self.inner.g_y
    }

    #[getter]
    fn g_x(&self) -> i64 {
        self.inner.g_x
    }

    #[getter]
    fn b(&self) -> i64 {
        self.inner.b
    }

    #[getter]
    fn e(&self) -> i64 {
        self.inner.e
    }

    fn m_invariant(&self) -> i64 {
        m_invariant(&self.inner)
    }

    fn lower_bound(&self) -> i64 {
        theorem_b_bound(&self.inner)
    }

    /// `None` when `g_x < 9g_y + 4`.
    fn threshold(&self) -> Option<i64> {
        theorem_a_threshold(&self.inner).value()
    }

    fn verdict(&self, d: i64) -> PyResult<String> {
        to_json(&verdict(&self.inner, d).verdict).map(|s| s.trim_matches('"').to_string())
    }

    /// `p_a` of the class `sigma·S0 + fib_deg·F`.
    #[pyo3(signature = (sigma=None, fib_deg=None))]
    fn genus(&self, sigma: Option<i64>, fib_deg: Option<i64>) -> PyResult<i64> {
        let c = match (sigma, fib_deg) {
            (Some(a), Some(z)) => SurfaceClass::new(a, z),
            (None, None) => trisection_cover_class(&self.inner),
            _ => return Err(PyValueError::new_err("give both sigma and fib_deg, or neither")),
        };
        arithmetic_genus(&c, &self.inner).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!("SurfaceModel(g_y={}, g_x={}, b={}, e={})", m.g_y, m.g_x, m.b, m.e)
    }
}

#[pyclass(name = "State", frozen)]
struct PyState {
    inner: ElmState,
}

#[pymethods]
impl PyState {
    /// Initial state of a scenario file's contents; the script is not run.
    #[staticmethod]
    fn from_scenario(text: &str) -> PyResult<Self> {
        let sc = Scenario::from_json(text).map_err(err)?;
        Ok(Self { inner: sc.build_state().map_err(err)? })
    }

    #[getter]
    fn e(&self) -> i64 {
        self.inner.surface.e
    }

    #[getter]
    fn total_delta(&self) -> i64 {
        self.inner.total_delta()
    }

    #[getter]
    fn trisection(&self) -> Option<(i64, i64)> {
        self.inner.trisection.as_ref().map(|t| t.class.numerical())
    }

    #[getter]
    fn history_len(&self) -> usize {
        self.inner.history.len()
    }

    fn trisection_genus(&self) -> PyResult<Option<i64>> {
        self.inner.trisection_genus().map_err(err)
    }

    /// `step` is a JSON object with the scenario step fields.
    fn apply(&self, step: &str) -> PyResult<Self> {
        let step: ElmStep = serde_json::from_str(step).map_err(err)?;
        Ok(Self { inner: apply_elm(&self.inner, &step).map_err(err)? })
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(Self { inner: apply_inverse(&self.inner).map_err(err)? })
    }

    fn oracle_agrees(&self, step: &str) -> PyResult<bool> {
        let step: ElmStep = serde_json::from_str(step).map_err(err)?;
        Ok(blowup_oracle_check(&self.inner, &step).agrees())
    }

    #[pyo3(signature = (greedy=false, budget=100_000, target_e=None))]
    fn resolve(&self, greedy: bool, budget: usize, target_e: Option<i64>) -> PyResult<(usize, Self)> {
        let strategy = if greedy { Strategy::Greedy } else { Strategy::Exhaustive { budget } };
        let r = resolve_singularities(&self.inner, strategy, target_e).map_err(err)?;
        Ok((r.alpha, Self { inner: r.state }))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("State(e={}, trisection={:?}, total_delta={})", self.e(), self.trisection(), self.total_delta())
    }
}

/// `(numerator, denominator)` of the Castelnuovo–Severi threshold.
#[pyfunction]
fn cs(g_x: i64, g_y: i64, k: i64) -> PyResult<(i64, i64)> {
    let r = cs_threshold(g_x, g_y, k).map_err(err)?;
    Ok((r.num, r.den))
}

/// Plans and executes the construction; returns the plan as JSON and whether
/// it verified, or `None` when infeasible.
#[pyfunction]
#[pyo3(signature = (g_y, g_x, d, halphen=false))]
fn plan(g_y: i64, g_x: i64, d: i64, halphen: bool) -> PyResult<Option<(String, bool)>> {
    match plan_construction(g_y, g_x, d, halphen).map_err(err)? {
        PlanOutcome::Infeasible(_) => Ok(None),
        PlanOutcome::Plan(p) => Ok(Some((to_json(&p)?, execute_plan(&p).is_verified()))),
    }
}

/// Runs every suite; returns `(all passed, JSON results)`.
#[pyfunction]
#[pyo3(signature = (large=false, seed=suites::DEFAULT_SEED))]
fn verify(large: bool, seed: u64) -> PyResult<(bool, String)> {
    let grid = if large { Grid::Large } else { Grid::Default };
    let results = suites::run_all(&VerifyConfig { grid, seed, fault: None });
    Ok((results.iter().all(|r| r.passed()), to_json(&results)?))
}

#[pymodule]
fn tricover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySurfaceModel>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(cs, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
