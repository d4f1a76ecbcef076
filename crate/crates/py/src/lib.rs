//! Python bindings for the free-lunch work statistics.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use freelunch_core as core;
use freelunch_core::montecarlo::{EnsembleStats, TrajectoryEnsemble};
use freelunch_core::thermo::reversible_points;
use freelunch_core::{InitialCondition, QuantumStateSpec, ScenarioFlags};

create_exception!(freelunch, NumericalError, PyArithmeticError);

fn to_py(e: core::Error) -> PyErr {
    if e.is_numerical() || matches!(e, core::Error::Mismatch(_)) {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Physical constants of the trap pair. Keywords override Table I defaults.
#[pyclass(name = "SystemParams", module = "freelunch", from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    inner: core::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (*, m=None, M=None, Gamma=None, omega_x=None, omega_y=None, zpf_y=None, zpf_noise=None, g=None, T=None))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn new(
        m: Option<f64>,
        M: Option<f64>,
        Gamma: Option<f64>,
        omega_x: Option<f64>,
        omega_y: Option<f64>,
        zpf_y: Option<f64>,
        zpf_noise: Option<f64>,
        g: Option<f64>,
        T: Option<f64>,
    ) -> PyResult<Self> {
        let mut p = core::SystemParams::default();
        p.mass = m.unwrap_or(p.mass);
        p.quantum_mass = M.unwrap_or(p.quantum_mass);
        p.damping = Gamma.unwrap_or(p.damping);
        p.omega_x = omega_x.unwrap_or(p.omega_x);
        p.omega_y = omega_y.unwrap_or(p.omega_y);
        p.zpf_y = zpf_y.unwrap_or(p.zpf_y);
        p.noise_zpf = zpf_noise.or(p.noise_zpf);
        p.coupling = g.unwrap_or(p.coupling);
        p.temperature = T.unwrap_or(p.temperature);
        p.validate().map_err(to_py)?;
        Ok(Self { inner: p })
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    #[allow(non_snake_case)]
    fn Gamma(&self) -> f64 {
        self.inner.damping
    }

    #[getter]
    fn omega_x(&self) -> f64 {
        self.inner.omega_x
    }

    #[getter]
    fn omega_y(&self) -> f64 {
        self.inner.omega_y
    }

    #[getter]
    fn zpf_y(&self) -> f64 {
        self.inner.zpf_y
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.coupling
    }

    #[getter]
    #[allow(non_snake_case)]
    fn T(&self) -> f64 {
        self.inner.temperature
    }

    /// β = 1/(k_B T) [1/J]
    #[getter]
    fn beta(&self) -> PyResult<f64> {
        Ok(self.inner.validate().map_err(to_py)?.beta())
    }

    /// Force amplitude scale ħg/zpf [N].
    #[getter]
    fn force_scale(&self) -> PyResult<f64> {
        Ok(self.inner.validate().map_err(to_py)?.force_scale())
    }

    /// Quantum noise amplitude κ [N].
    #[getter]
    fn noise_scale(&self) -> PyResult<f64> {
        Ok(self.inner.validate().map_err(to_py)?.noise_scale())
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SystemParams(m={:e}, Gamma={:e}, omega_x={:e}, omega_y={:e}, zpf_y={:e}, g={:e}, T={:e})",
            p.mass, p.damping, p.omega_x, p.omega_y, p.zpf_y, p.coupling, p.temperature
        )
    }
}

/// Which noise sources act and how the classical particle starts.
#[pyclass(name = "Scenario", module = "freelunch", from_py_object)]
#[derive(Clone, Copy)]
struct PyScenario {
    inner: ScenarioFlags,
}

fn initial_condition(name: &str) -> PyResult<InitialCondition> {
    match name {
        "thermal" => Ok(InitialCondition::ThermalEquilibrium),
        "zero" => Ok(InitialCondition::DeterministicZero),
        _ => Err(PyValueError::new_err(format!(
            "initial_condition must be 'thermal' or 'zero', got {name:?}"
        ))),
    }
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (thermal_noise=true, quantum_noise=true, initial_condition="thermal"))]
    fn new(thermal_noise: bool, quantum_noise: bool, initial_condition: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioFlags {
                thermal_noise,
                quantum_noise,
                initial_condition: self::initial_condition(initial_condition)?,
            },
        })
    }

    #[staticmethod]
    fn classical() -> Self {
        Self {
            inner: ScenarioFlags::classical(),
        }
    }

    #[staticmethod]
    fn quantum_only() -> Self {
        Self {
            inner: ScenarioFlags::quantum_only(),
        }
    }

    #[staticmethod]
    fn hybrid() -> Self {
        Self {
            inner: ScenarioFlags::hybrid(),
        }
    }

    #[getter]
    fn thermal_noise(&self) -> bool {
        self.inner.thermal_noise
    }

    #[getter]
    fn quantum_noise(&self) -> bool {
        self.inner.quantum_noise
    }

    #[getter]
    fn initial_condition(&self) -> &'static str {
        match self.inner.initial_condition {
            InitialCondition::ThermalEquilibrium => "thermal",
            InitialCondition::DeterministicZero => "zero",
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(thermal_noise={}, quantum_noise={}, initial_condition='{}')",
            py_bool(self.inner.thermal_noise),
            py_bool(self.inner.quantum_noise),
            self.initial_condition()
        )
    }
}

fn py_bool(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

/// Analytic work statistics for one protocol duration.
#[pyclass(name = "WorkStatistics", module = "freelunch", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyWorkStatistics {
    inner: core::WorkStatistics,
}

#[pymethods]
impl PyWorkStatistics {
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }

    #[getter]
    fn phonons(&self) -> f64 {
        self.inner.phonons
    }

    #[getter]
    fn mean_work(&self) -> f64 {
        self.inner.mean_work
    }

    #[getter]
    fn free_energy(&self) -> f64 {
        self.inner.free_energy
    }

    #[getter]
    fn irreversible_work(&self) -> f64 {
        self.inner.irreversible_work
    }

    #[getter]
    fn sigma2_thermal(&self) -> f64 {
        self.inner.budget.thermal
    }

    #[getter]
    fn sigma2_quantum_stationary(&self) -> f64 {
        self.inner.budget.quantum_stationary
    }

    #[getter]
    fn sigma2_quantum_nonstationary(&self) -> f64 {
        self.inner.budget.quantum_nonstationary
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    #[getter]
    fn significance(&self) -> f64 {
        self.inner.significance
    }

    #[getter]
    fn probability(&self) -> f64 {
        self.inner.probability
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let s = &self.inner;
        d.set_item("tau", s.duration)?;
        d.set_item("n", s.phonons)?;
        d.set_item("W", s.mean_work)?;
        d.set_item("dF", s.free_energy)?;
        d.set_item("W_irr", s.irreversible_work)?;
        d.set_item("sigma2_thermal", s.budget.thermal)?;
        d.set_item("sigma2_quantum_stationary", s.budget.quantum_stationary)?;
        d.set_item("sigma2_quantum_nonstationary", s.budget.quantum_nonstationary)?;
        d.set_item("sigma2_total", s.variance())?;
        d.set_item("I", s.significance)?;
        d.set_item("P", s.probability)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "WorkStatistics(tau={:e}, W_irr={:e}, variance={:e}, I={:e}, P={})",
            s.duration,
            s.irreversible_work,
            s.variance(),
            s.significance,
            s.probability
        )
    }
}

/// Monte Carlo work samples and their summary.
#[pyclass(name = "Ensemble", module = "freelunch", frozen)]
struct PyEnsemble {
    inner: TrajectoryEnsemble,
}

impl PyEnsemble {
    fn stats(&self) -> &EnsembleStats {
        &self.inner.stats
    }
}

#[pymethods]
impl PyEnsemble {
    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.inner.samples.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.stats().mean
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.stats().variance
    }

    #[getter]
    fn skewness(&self) -> f64 {
        self.stats().skewness
    }

    #[getter]
    fn excess_kurtosis(&self) -> f64 {
        self.stats().excess_kurtosis
    }

    #[getter]
    fn free_lunch_frequency(&self) -> f64 {
        self.stats().free_lunch_frequency
    }

    /// 99% Wilson interval of the free-lunch frequency.
    #[getter]
    fn wilson(&self) -> (f64, f64) {
        self.stats().wilson
    }

    /// Checks against analytic statistics: `{name: (value, criterion, passed)}`.
    fn compare<'py>(&self, py: Python<'py>, analytic: &PyWorkStatistics) -> PyResult<Bound<'py, PyDict>> {
        let report = core::compare_to_analytic(&self.inner, &analytic.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        for c in &report.checks {
            d.set_item(c.name, (c.value, c.criterion.clone(), c.passed))?;
        }
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        let s = self.stats();
        format!(
            "Ensemble(samples={}, mean={:e}, variance={:e}, free_lunch_frequency={})",
            self.inner.samples.len(),
            s.mean,
            s.variance,
            s.free_lunch_frequency
        )
    }
}

/// A driven protocol: parameters, quantum state, scenario and duration.
#[pyclass(name = "Experiment", module = "freelunch", frozen)]
struct PyExperiment {
    inner: core::Experiment,
}

#[pymethods]
impl PyExperiment {
    #[new]
    #[pyo3(signature = (*, n=1.0, theta=0.0, r=0.0, tau=1e-4, scenario=None, params=None))]
    fn new(
        n: f64,
        theta: f64,
        r: f64,
        tau: f64,
        scenario: Option<PyScenario>,
        params: Option<PySystemParams>,
    ) -> PyResult<Self> {
        let params = params.map_or_else(core::SystemParams::default, |p| p.inner);
        let flags = scenario.map_or_else(ScenarioFlags::hybrid, |s| s.inner);
        let inner = core::Experiment::new(&params, QuantumStateSpec::squeezed(n, theta, r), flags, tau)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.duration()
    }

    #[getter]
    fn n(&self) -> f64 {
        self.inner.state().n
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.state().theta
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.state().r
    }

    #[getter]
    fn scenario(&self) -> PyScenario {
        PyScenario {
            inner: *self.inner.flags(),
        }
    }

    /// ΔF = −f(τ)²/(2mω_x²) [J]
    #[getter]
    fn free_energy(&self) -> f64 {
        core::free_energy_difference(&core::ForceProtocol::from_experiment(&self.inner))
    }

    fn with_duration(&self, tau: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_duration(tau).map_err(to_py)?,
        })
    }

    fn analyze(&self, py: Python<'_>) -> PyResult<PyWorkStatistics> {
        let e = self.inner;
        let inner = py.detach(move || core::analyze(&e)).map_err(to_py)?;
        Ok(PyWorkStatistics { inner })
    }

    /// Statistics at every duration in `taus`, in input order.
    fn analyze_durations(&self, py: Python<'_>, taus: Vec<f64>) -> PyResult<Vec<PyWorkStatistics>> {
        let e = self.inner;
        let stats = py
            .detach(move || core::analyze_durations(&e, &taus))
            .map_err(to_py)?;
        Ok(stats.into_iter().map(|inner| PyWorkStatistics { inner }).collect())
    }

    #[pyo3(signature = (samples=20000, seed=0))]
    fn run_ensemble(&self, py: Python<'_>, samples: usize, seed: u64) -> PyResult<PyEnsemble> {
        let e = self.inner;
        let inner = py
            .detach(move || core::run_ensemble(&e, samples, seed))
            .map_err(to_py)?;
        Ok(PyEnsemble { inner })
    }

    /// Durations in `[lo, hi]` where W_irr vanishes: `(roots, tangential)`.
    fn reversible_points(&self, py: Python<'_>, lo: f64, hi: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let e = self.inner;
        let scan = py.detach(move || reversible_points(&e, lo, hi)).map_err(to_py)?;
        Ok((scan.roots, scan.tangential))
    }

    fn __repr__(&self) -> String {
        let s = self.inner.state();
        format!(
            "Experiment(n={}, theta={}, r={}, tau={:e}, scenario={})",
            s.n,
            s.theta,
            s.r,
            self.inner.duration(),
            self.scenario().__repr__()
        )
    }
}

/// Quantum force-noise covariance K(t, t') [N²] for a squeezed state.
#[pyfunction]
#[pyo3(signature = (t, t2, r=0.0, params=None))]
fn noise_kernel(t: f64, t2: f64, r: f64, params: Option<PySystemParams>) -> PyResult<f64> {
    let params = params.map_or_else(core::SystemParams::default, |p| p.inner);
    let system = params.validate().map_err(to_py)?;
    let state = QuantumStateSpec::squeezed(1.0, 0.0, r);
    state.validate().map_err(to_py)?;
    let model = core::build_noise_model(&system, &state, &ScenarioFlags::quantum_only());
    Ok(model.kernel_value(t, t2).map_err(to_py)?.smooth)
}

/// `(I, P)` for a Gaussian work distribution.
#[pyfunction]
fn free_lunch_probability(mean_work: f64, sigma: f64, free_energy: f64) -> PyResult<(f64, f64)> {
    let f = core::free_lunch_probability(mean_work, sigma, free_energy).map_err(to_py)?;
    Ok((f.significance, f.probability))
}

#[pymodule]
pub fn freelunch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyExperiment>()?;
    m.add_class::<PyWorkStatistics>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_function(wrap_pyfunction!(noise_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(free_lunch_probability, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
