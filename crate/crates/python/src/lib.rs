//! Python bindings for the `qkur` crate.
//!
//! Matrices cross the boundary as nested lists of complex numbers (row major).

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qkur::classical::{classical_current_stats, RateModel, TransitionWeights};
use qkur::counting::{fcs_oracle, theta_derivative_check, CountingScheme, CurrentStatistics, Unraveling};
use qkur::kur::{SteadyStateAnalysis, UncertaintyReport};
use qkur::models::{build_dqd, build_qubit, dqd_analytic, sample_network, DqdParams, QubitParams};
use qkur::report::{emit_report, Format};
use qkur::superop::{build_liouvillian, Channel, OpenSystemModel};
use qkur::{CMatrix, KurError};

create_exception!(pyqkur, QkurError, PyException, "Raised when the numerical pipeline rejects its input.");

fn py_err(e: KurError) -> PyErr {
    QkurError::new_err(e.to_string())
}

fn to_matrix(rows: &[Vec<Complex64>]) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(QkurError::new_err("ragged matrix"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn to_real(rows: &[Vec<f64>]) -> PyResult<nalgebra::DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(QkurError::new_err("matrix must be square"));
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn stats_tuple(s: CurrentStatistics) -> (f64, f64, f64) {
    (s.current, s.noise, s.activity)
}

/// Counting weights, plus local-oscillator phases for a diffusive record.
#[pyclass(name = "Scheme", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScheme {
    inner: CountingScheme,
}

#[pymethods]
impl PyScheme {
    #[staticmethod]
    fn jump(weights: Vec<f64>) -> PyResult<Self> {
        CountingScheme::jump(weights).map(|inner| Self { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn diffusive(weights: Vec<f64>, phases: Vec<f64>) -> PyResult<Self> {
        CountingScheme::diffusive(weights, phases).map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn phases(&self) -> Option<Vec<f64>> {
        self.inner.phases().map(<[f64]>::to_vec)
    }

    fn __repr__(&self) -> String {
        format!("Scheme({}, weights={:?})", self.kind(), self.inner.weights())
    }
}

#[pyclass(name = "Report", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReport {
    inner: UncertaintyReport,
}

impl From<UncertaintyReport> for PyReport {
    fn from(inner: UncertaintyReport) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyReport {
    /// Builds a report from raw statistics.
    #[new]
    #[pyo3(signature = (kind, current, noise, activity, chi, psi=None))]
    fn new(kind: &str, current: f64, noise: f64, activity: f64, chi: f64, psi: Option<f64>) -> PyResult<Self> {
        let kind = match kind {
            "jump" => Unraveling::Jump,
            "diffusive" => Unraveling::Diffusive,
            other => return Err(QkurError::new_err(format!("unknown unraveling {other:?}"))),
        };
        let stats = CurrentStatistics { current, noise, activity, method: qkur::counting::MethodTag::Drazin };
        Ok(UncertaintyReport::from_parts(kind, &stats, psi, chi).into())
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }
    #[getter]
    fn current(&self) -> f64 {
        self.inner.current
    }
    #[getter]
    fn noise(&self) -> f64 {
        self.inner.noise
    }
    #[getter]
    fn activity(&self) -> f64 {
        self.inner.activity
    }
    #[getter]
    fn psi(&self) -> Option<f64> {
        self.inner.psi
    }
    #[getter]
    fn chi(&self) -> f64 {
        self.inner.chi
    }
    #[getter]
    fn ratio(&self) -> Option<f64> {
        self.inner.ratio
    }
    #[getter]
    fn bound_classical(&self) -> Option<f64> {
        self.inner.bound_classical
    }
    #[getter]
    fn bound_psi(&self) -> Option<f64> {
        self.inner.bound_psi
    }
    #[getter]
    fn bound_chi(&self) -> Option<f64> {
        self.inner.bound_chi
    }
    #[getter]
    fn ok_classical(&self) -> Option<bool> {
        self.inner.ok_classical
    }
    #[getter]
    fn ok_psi(&self) -> Option<bool> {
        self.inner.ok_psi
    }
    #[getter]
    fn ok_chi(&self) -> Option<bool> {
        self.inner.ok_chi
    }

    /// `D A / J^2`.
    fn scaled_ratio(&self) -> Option<f64> {
        self.inner.scaled_ratio()
    }

    /// `(1 + psi)^2`, or `(1/2 + psi)^2` for a diffusive current.
    fn psi_bound_scaled(&self) -> Option<f64> {
        self.inner.psi_bound_scaled()
    }

    #[pyo3(signature = (format="json"))]
    fn emit(&self, format: &str) -> PyResult<String> {
        let f: Format = format.parse().map_err(py_err)?;
        emit_report(&self.inner, f).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(kind={}, J={:.6e}, D={:.6e}, A={:.6e}, psi={:?}, chi={:.6e}, ok_psi={:?})",
            self.kind(),
            self.inner.current,
            self.inner.noise,
            self.inner.activity,
            self.inner.psi,
            self.inner.chi,
            self.inner.ok_psi
        )
    }
}

/// Lindblad model `H` plus jump operators `L_k`.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: OpenSystemModel,
}

impl PyModel {
    fn analysis(&self) -> PyResult<SteadyStateAnalysis> {
        SteadyStateAnalysis::new(&self.inner).map_err(py_err)
    }
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(hamiltonian: Vec<Vec<Complex64>>, jumps: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let channels = jumps
            .iter()
            .enumerate()
            .map(|(k, l)| Ok(Channel::new(format!("L{k}"), to_matrix(l)?)))
            .collect::<PyResult<Vec<_>>>()?;
        OpenSystemModel::new(to_matrix(&hamiltonian)?, channels).map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels().len()
    }

    /// Column-stacked Liouvillian as a `d^2 x d^2` nested list.
    fn liouvillian(&self) -> Vec<Vec<Complex64>> {
        from_matrix(build_liouvillian(&self.inner).matrix())
    }

    fn steady_state(&self) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(from_matrix(self.analysis()?.steady_state().matrix()))
    }

    fn report(&self, scheme: &PyScheme) -> PyResult<PyReport> {
        scheme.inner.validate_for(&self.inner).map_err(py_err)?;
        self.analysis()?.report(&scheme.inner).map(PyReport::from).map_err(py_err)
    }

    /// `(J, D, A)` from the Drazin inverse.
    fn statistics(&self, scheme: &PyScheme) -> PyResult<(f64, f64, f64)> {
        scheme.inner.validate_for(&self.inner).map_err(py_err)?;
        self.analysis()?.statistics(&scheme.inner).map(stats_tuple).map_err(py_err)
    }

    /// `(J, D, A)` from derivatives of the tilted generator's leading eigenvalue.
    fn fcs(&self, scheme: &PyScheme) -> PyResult<(f64, f64, f64)> {
        fcs_oracle(&self.inner, &scheme.inner).map(stats_tuple).map_err(py_err)
    }

    /// Central difference of the current under `L_k -> sqrt(1 + theta) L_k`.
    #[pyo3(signature = (scheme, theta=1e-4))]
    fn theta_derivative(&self, scheme: &PyScheme, theta: f64) -> PyResult<f64> {
        theta_derivative_check(&self.inner, &scheme.inner, theta).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Model(dim={}, channels={})", self.dim(), self.channels())
    }
}

fn dqd_params(g: f64, gamma_l: f64, gamma_r: f64, dephasing: f64, bias: f64, epsilon: f64) -> DqdParams {
    DqdParams { g, gamma_l, gamma_r, dephasing, epsilon, mu_l: bias, mu_r: -bias, ..DqdParams::default() }
}

/// Double quantum dot and its named currents `through`, `in-only` and `charge-diff`.
#[pyfunction]
#[pyo3(signature = (g=1.0, gamma_l=1.0, gamma_r=1.0, dephasing=0.0, bias=7.0, epsilon=0.0))]
fn dqd(
    py: Python<'_>,
    g: f64,
    gamma_l: f64,
    gamma_r: f64,
    dephasing: f64,
    bias: f64,
    epsilon: f64,
) -> PyResult<(PyModel, Bound<'_, PyDict>)> {
    let (model, s) = build_dqd(&dqd_params(g, gamma_l, gamma_r, dephasing, bias, epsilon)).map_err(py_err)?;
    let schemes = PyDict::new(py);
    for (name, scheme) in [("through", s.through), ("in-only", s.in_only), ("charge-diff", s.charge_diff)] {
        schemes.set_item(name, PyScheme { inner: scheme })?;
    }
    Ok((PyModel { inner: model }, schemes))
}

/// Closed-form DQD steady state and statistics.
#[pyfunction]
#[pyo3(signature = (g=1.0, gamma_l=1.0, gamma_r=1.0, dephasing=0.0, bias=7.0, epsilon=0.0))]
fn dqd_reference(
    py: Python<'_>,
    g: f64,
    gamma_l: f64,
    gamma_r: f64,
    dephasing: f64,
    bias: f64,
    epsilon: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let p = dqd_params(g, gamma_l, gamma_r, dephasing, bias, epsilon);
    p.validate().map_err(py_err)?;
    let r = dqd_analytic(&p);
    let d = PyDict::new(py);
    d.set_item("populations", r.populations.to_vec())?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("current", r.current)?;
    d.set_item("activity", r.activity)?;
    d.set_item("noise_jump", r.noise_jump)?;
    d.set_item("noise_classical", r.noise_classical)?;
    d.set_item("psi_jump", r.psi_jump)?;
    d.set_item("psi_diff", r.psi_diff)?;
    d.set_item("coherence", r.coherence)?;
    Ok(d)
}

/// Driven two-level system and its currents `emission` and `homodyne`.
#[pyfunction]
#[pyo3(signature = (omega=1.0, kappa=1.0, nbar=0.0, detuning=0.0))]
fn qubit(py: Python<'_>, omega: f64, kappa: f64, nbar: f64, detuning: f64) -> PyResult<(PyModel, Bound<'_, PyDict>)> {
    let (model, s) = build_qubit(&QubitParams { kappa, nbar, detuning, omega }).map_err(py_err)?;
    let schemes = PyDict::new(py);
    schemes.set_item("emission", PyScheme { inner: s.emission })?;
    schemes.set_item("homodyne", PyScheme { inner: s.homodyne })?;
    Ok((PyModel { inner: model }, schemes))
}

/// Sample `index` of the seeded random network ensemble.
#[pyfunction]
#[pyo3(signature = (seed, index, n=5))]
fn network(seed: u64, index: u64, n: usize) -> PyResult<(PyModel, PyScheme)> {
    let s = sample_network(seed, index, n).map_err(py_err)?;
    Ok((PyModel { inner: s.model }, PyScheme { inner: s.scheme }))
}

/// `(J, D, A)` of a classical jump process with rates `rates[k][j]` for `j -> k`
/// and per-transition weights `weights[k][j]`.
#[pyfunction]
fn classical_statistics(rates: Vec<Vec<f64>>, weights: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64)> {
    let r = to_real(&rates)?;
    let labels = (0..r.nrows()).map(|i| i.to_string()).collect();
    let rm = RateModel::from_rates(r, labels).map_err(py_err)?;
    let w = TransitionWeights::new(to_real(&weights)?).map_err(py_err)?;
    classical_current_stats(&rm, &w).map(stats_tuple).map_err(py_err)
}

/// Runs the acceptance suite; returns `(name, passed, detail)` per criterion.
#[pyfunction]
fn acceptance(py: Python<'_>) -> Vec<(&'static str, bool, String)> {
    py.detach(|| qkur::acceptance::run_all().into_iter().map(|o| (o.name, o.passed, o.detail)).collect())
}

#[pymodule]
fn pyqkur(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QkurError", m.py().get_type::<QkurError>())?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(dqd, m)?)?;
    m.add_function(wrap_pyfunction!(dqd_reference, m)?)?;
    m.add_function(wrap_pyfunction!(qubit, m)?)?;
    m.add_function(wrap_pyfunction!(network, m)?)?;
    m.add_function(wrap_pyfunction!(classical_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance, m)?)?;
    Ok(())
}
