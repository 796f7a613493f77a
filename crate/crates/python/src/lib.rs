//! Python bindings: `import vbma_py`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use vbma::fubini_study::{fs_lambda_report, fs_power_check, FSPoint};
use vbma::mav::{self, SolutionReport};
use vbma::positivity::{self, CMatrix, EndoForm11};
use vbma::vortex::{self, VortexSolution};
use vbma::{AlgebraError, SolveError};

pyo3::create_exception!(vbma_py, SolveFailure, PyRuntimeError);

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn algebra_err(e: AlgebraError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solve_err(e: SolveError) -> PyErr {
    match e {
        SolveError::Config(_) | SolveError::Geometry(_) => PyValueError::new_err(e.to_string()),
        _ => SolveFailure::new_err(format!("{}: {e}", e.kind())),
    }
}

fn matrix(rows: Vec<Vec<Complex64>>, name: &str) -> PyResult<CMatrix> {
    let r = rows.len();
    if rows.iter().any(|row| row.len() != r) {
        return Err(PyValueError::new_err(format!(
            "block {name} must be square"
        )));
    }
    Ok(CMatrix::from_row_iterator(r, r, rows.into_iter().flatten()))
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Parameters of a vortex run; keyword arguments mirror the JSON config.
#[pyclass(name = "VortexConfig")]
struct PyVortexConfig {
    inner: mav::VortexConfig,
}

#[pymethods]
impl PyVortexConfig {
    #[new]
    #[pyo3(signature = (r1 = 3, r2 = 2, n = 64, tau = Complex64::new(0.0, 1.0), allow_unstable = false))]
    fn new(r1: u32, r2: u32, n: usize, tau: Complex64, allow_unstable: bool) -> PyResult<Self> {
        let inner = mav::VortexConfig {
            r1,
            r2,
            n,
            tau_re: tau.re,
            tau_im: tau.im,
            allow_unstable,
            ..mav::VortexConfig::default()
        };
        inner.validate().map_err(solve_err)?;
        Ok(PyVortexConfig { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: mav::VortexConfig =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(solve_err)?;
        Ok(PyVortexConfig { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    #[getter]
    fn r1(&self) -> u32 {
        self.inner.r1
    }

    #[getter]
    fn r2(&self) -> u32 {
        self.inner.r2
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn is_stable(&self) -> bool {
        self.inner.is_stable()
    }

    #[getter]
    fn juncture_target(&self) -> f64 {
        self.inner.juncture_target()
    }

    fn __repr__(&self) -> String {
        format!(
            "VortexConfig(r1={}, r2={}, n={})",
            self.inner.r1, self.inner.r2, self.inner.n
        )
    }
}

/// A converged vortex metric with its recovered quotient metric.
#[pyclass(name = "VortexSolution")]
struct PyVortexSolution {
    report: SolutionReport,
    sol: VortexSolution,
}

#[pymethods]
impl PyVortexSolution {
    #[getter]
    fn converged(&self) -> bool {
        self.report.converged
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.report.t_final
    }

    #[getter]
    fn final_residual(&self) -> f64 {
        self.report.final_residual
    }

    #[getter]
    fn n(&self) -> usize {
        self.sol.psi.grid().n()
    }

    /// `psi` on the grid, node order `j + n k`.
    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.sol.psi.values().to_vec()
    }

    #[getter]
    fn phi2(&self) -> Vec<f64> {
        self.sol.phi2.values().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.sol.v.values().to_vec()
    }

    fn monitors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.report.monitors)
    }

    fn history<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.report.t_history)
    }

    #[pyo3(signature = (cp1_points = 4, seed = 7))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        cp1_points: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let points = vortex::cp1_sample_points(cp1_points, seed);
        to_py(py, &vortex::verify_solution(&self.sol, &points))
    }
}

/// Runs the continuation to `t = 1` and recovers `f2`.
#[pyfunction]
fn solve(py: Python<'_>, config: PyRef<'_, PyVortexConfig>) -> PyResult<PyVortexSolution> {
    let cfg = config.inner.clone();
    let (report, sol) = py
        .detach(move || vortex::solve_vortex(&cfg))
        .map_err(solve_err)?;
    Ok(PyVortexSolution { report, sol })
}

/// Endomorphism-valued (1,1)-form `A e11 + C e22 + B e12 + B^dag e21` on a surface.
#[pyclass(name = "EndoForm")]
struct PyEndoForm {
    inner: EndoForm11,
}

#[pymethods]
impl PyEndoForm {
    #[new]
    fn new(
        a: Vec<Vec<Complex64>>,
        b: Vec<Vec<Complex64>>,
        c: Vec<Vec<Complex64>>,
    ) -> PyResult<Self> {
        let inner = EndoForm11::new(matrix(a, "A")?, matrix(b, "B")?, matrix(c, "C")?)
            .map_err(algebra_err)?;
        Ok(PyEndoForm { inner })
    }

    #[staticmethod]
    fn fubini_study() -> Self {
        PyEndoForm {
            inner: vbma::fubini_study::fs_blocks_at_origin(),
        }
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn wedge_square(&self) -> Vec<Vec<Complex64>> {
        rows(&positivity::wedge_square(&self.inner).m)
    }

    fn nakano_check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &positivity::nakano_check(&self.inner))
    }

    fn ma_check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &positivity::ma_check(&self.inner))
    }

    #[pyo3(signature = (samples = 512))]
    fn griffiths_check<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &positivity::griffiths_check(&self.inner, samples))
    }

    fn chern_gap(&self) -> PyResult<f64> {
        positivity::chern_gap(&self.inner).map_err(algebra_err)
    }

    fn vbma_residual(&self, eta: f64) -> f64 {
        positivity::vbma_residual(&self.inner, eta)
    }
}

#[pyfunction]
fn ma_slopes<'py>(py: Python<'py>, r1: u32, r2: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &vortex::ma_slopes(r1, r2))
}

#[pyfunction]
fn mumford_gap(r1: u32, r2: u32) -> i64 {
    vortex::mumford_gap(r1, r2)
}

/// `(lambda, off_identity_residual)` at a point of `CP^n` in the affine chart.
#[pyfunction]
fn fs_power(z: Vec<Complex64>) -> PyResult<(f64, f64)> {
    let fit = fs_power_check(&FSPoint::new(z).map_err(algebra_err)?);
    Ok((fit.lambda, fit.off_identity_residual))
}

/// Measured `(i Theta)^n = lambda omega^n Id` constant compared with the literature value.
#[pyfunction]
#[pyo3(signature = (n, points = Vec::new()))]
fn fs_lambda<'py>(
    py: Python<'py>,
    n: usize,
    points: Vec<Vec<Complex64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let pts = points
        .into_iter()
        .map(FSPoint::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(algebra_err)?;
    to_py(py, &fs_lambda_report(n, &pts).map_err(algebra_err)?)
}

#[pymodule]
pub fn vbma_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVortexConfig>()?;
    m.add_class::<PyVortexSolution>()?;
    m.add_class::<PyEndoForm>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(ma_slopes, m)?)?;
    m.add_function(wrap_pyfunction!(mumford_gap, m)?)?;
    m.add_function(wrap_pyfunction!(fs_power, m)?)?;
    m.add_function(wrap_pyfunction!(fs_lambda, m)?)?;
    m.add("SolveFailure", m.py().get_type::<SolveFailure>())?;
    Ok(())
}
