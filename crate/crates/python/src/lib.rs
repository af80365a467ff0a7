//! Python bindings for the interferometer toolkit.
//!
//! Build with `cargo build -p qdc-python --release` and import the produced
//! `libqdc.so` as the module `qdc` (see `python/smoke_test.py`). The surface
//! mirrors the library: settings and hidden-variable parameter vectors as
//! classes, analyses as module functions.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qdc_core::circuit;
use qdc_core::experiment;
use qdc_core::hvm;
use qdc_core::noise;

fn to_py_err(err: qdc_core::Error) -> PyErr {
    match err {
        qdc_core::Error::InvalidArgument(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

/// Experimental knobs: preparation angle alpha, path phase phi, purity
/// weight epsilon.
#[pyclass(name = "ExperimentSetting", frozen, from_py_object)]
#[derive(Clone)]
struct PySetting {
    inner: circuit::ExperimentSetting,
}

#[pymethods]
impl PySetting {
    #[new]
    fn new(alpha: f64, phi: f64, epsilon: f64) -> PyResult<Self> {
        Ok(Self {
            inner: circuit::ExperimentSetting::new(alpha, phi, epsilon).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    fn __repr__(&self) -> String {
        format!(
            "ExperimentSetting(alpha={}, phi={}, epsilon={})",
            self.inner.alpha(),
            self.inner.phi(),
            self.inner.epsilon()
        )
    }
}

/// The five free probabilities (a, b, c, d, e) of the hidden-variable model.
#[pyclass(name = "HvParameters", frozen, from_py_object)]
#[derive(Clone)]
struct PyHvParameters {
    inner: hvm::HvParameters,
}

#[pymethods]
impl PyHvParameters {
    #[new]
    fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> PyResult<Self> {
        Ok(Self {
            inner: hvm::HvParameters::new(a, b, c, d, e).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }

    #[getter]
    fn e(&self) -> f64 {
        self.inner.e
    }

    fn as_tuple(&self) -> (f64, f64, f64, f64, f64) {
        let [a, b, c, d, e] = self.inner.as_array();
        (a, b, c, d, e)
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d, e] = self.inner.as_array();
        format!("HvParameters(a={a}, b={b}, c={c}, d={d}, e={e})")
    }
}

/// One exact solution manifold of the constraint system.
#[pyclass(name = "SolutionBranch", frozen)]
struct PyBranch {
    inner: hvm::SolutionBranch,
}

#[pymethods]
impl PyBranch {
    #[getter]
    fn constraints(&self) -> Vec<String> {
        self.inner.bindings().iter().map(|b| b.to_string()).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().iter().map(|l| l.to_string()).collect()
    }

    #[getter]
    fn satisfies_marginal(&self) -> bool {
        self.inner.satisfies_marginal()
    }

    /// Maps a point of the unit cube onto the manifold.
    fn sample_member(&self, u: [f64; 5]) -> PyHvParameters {
        PyHvParameters {
            inner: self.inner.sample_member(&u),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SolutionBranch({}; labels={:?})",
            self.inner.description(),
            self.labels()
        )
    }
}

/// Outcome of the cross-setting feasibility search.
#[pyclass(name = "FeasibilityVerdict", frozen)]
struct PyVerdict {
    #[pyo3(get)]
    feasible: bool,
    witness: Option<hvm::HvParameters>,
    #[pyo3(get)]
    min_max_residual: Option<f64>,
}

#[pymethods]
impl PyVerdict {
    #[getter]
    fn witness(&self) -> Option<PyHvParameters> {
        self.witness.map(|inner| PyHvParameters { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "FeasibilityVerdict(feasible={}, min_max_residual={:?})",
            self.feasible, self.min_max_residual
        )
    }
}

/// Joint (S, A) probabilities [p00, p01, p10, p11] of the pure circuit.
#[pyfunction]
fn joint_distribution(setting: PySetting) -> [f64; 4] {
    circuit::joint_distribution(&setting.inner).probabilities()
}

/// Joint probabilities of the white-noise mixture, eta + epsilon * P.
#[pyfunction]
fn noisy_joint_distribution(setting: PySetting) -> [f64; 4] {
    noise::noisy_joint_distribution(&setting.inner).probabilities()
}

/// The same statistics by explicit density-matrix evolution.
#[pyfunction]
fn evolved_noisy_distribution(setting: PySetting) -> PyResult<[f64; 4]> {
    Ok(noise::evolved_noisy_distribution(&setting.inner)
        .map_err(to_py_err)?
        .probabilities())
}

/// Amplitudes of the final pure state in the {00, 01, 10, 11} basis.
#[pyfunction]
fn final_state(setting: PySetting) -> Vec<Complex64> {
    circuit::final_state(&setting.inner).amplitudes().to_vec()
}

/// The interferometer unitary as a nested 4x4 list.
#[pyfunction]
fn interferometer_unitary(phi: f64) -> PyResult<Vec<Vec<Complex64>>> {
    let u = circuit::interferometer_unitary(phi).map_err(to_py_err)?;
    Ok((0..4)
        .map(|i| (0..4).map(|j| u.get(i, j)).collect())
        .collect())
}

/// [P(S=0|A=a), P(S=1|A=a)] from a joint probability 4-vector.
#[pyfunction]
fn conditional_system_distribution(p: [f64; 4], a_outcome: u8) -> PyResult<[f64; 2]> {
    let joint = circuit::JointDistribution::new(p).map_err(to_py_err)?;
    circuit::conditional_system_distribution(&joint, a_outcome).map_err(to_py_err)
}

/// Minimum eigenvalue of the partial transpose of the evolved state;
/// non-negative iff separable.
#[pyfunction]
fn ppt_min_eigenvalue(setting: PySetting) -> f64 {
    noise::ppt_min_eigenvalue(&setting.inner)
}

/// (epsilon_star, never_entangled): the noise level where separability ends.
#[pyfunction]
fn separability_threshold(alpha: f64, phi: f64) -> PyResult<(f64, bool)> {
    let threshold = noise::separability_threshold(alpha, phi).map_err(to_py_err)?;
    Ok((threshold.value(), threshold.never_entangled()))
}

/// Maximal CHSH expectation of the evolved state; > 2 violates the classical
/// bound, 2*sqrt(2) is the quantum ceiling.
#[pyfunction]
fn chsh_max(setting: PySetting) -> f64 {
    noise::chsh_max(&setting.inner)
}

/// (eta, p0, p1, beta) fixed by the observed statistics; beta is None at the
/// degenerate knob combination epsilon = 1, alpha = 0.
#[pyfunction]
fn derived_quantities(setting: PySetting) -> (f64, f64, f64, Option<f64>) {
    let d = hvm::derived_quantities(&setting.inner);
    (d.eta, d.p0, d.p1, d.beta)
}

/// Joint distribution the hidden-variable model predicts.
#[pyfunction]
fn model_distribution(params: PyHvParameters, setting: PySetting) -> PyResult<[f64; 4]> {
    Ok(hvm::model_distribution(&params.inner, &setting.inner)
        .map_err(to_py_err)?
        .probabilities())
}

/// Max-norm distance between the model's and the observed distribution.
#[pyfunction]
fn residual(params: PyHvParameters, setting: PySetting) -> PyResult<f64> {
    hvm::residual(&params.inner, &setting.inner).map_err(to_py_err)
}

/// The three polynomial constraints equivalent to a vanishing residual.
#[pyfunction]
fn constraint_triple(params: PyHvParameters, setting: PySetting) -> PyResult<(f64, f64, f64)> {
    let [x, y, z] = hvm::constraint_triple(&params.inner, &setting.inner).map_err(to_py_err)?;
    Ok((x, y, z))
}

/// Rejection labels of a near-solution; an empty list means a consistent
/// model. Raises if the residual exceeds `tol`.
#[pyfunction]
#[pyo3(signature = (params, setting, tol = hvm::CLASSIFY_TOL))]
fn classify(params: PyHvParameters, setting: PySetting, tol: f64) -> PyResult<Vec<String>> {
    Ok(hvm::classify(&params.inner, &setting.inner, tol)
        .map_err(to_py_err)?
        .iter()
        .map(|l| l.to_string())
        .collect())
}

/// The complete catalogue of solution manifolds at a setting.
#[pyfunction]
fn enumerate_branches(setting: PySetting) -> PyResult<Vec<PyBranch>> {
    Ok(hvm::enumerate_branches(&setting.inner)
        .map_err(to_py_err)?
        .into_iter()
        .map(|inner| PyBranch { inner })
        .collect())
}

/// Searches for one parameter vector reproducing every setting at once.
#[pyfunction]
#[pyo3(signature = (settings, grid_density = 21, refine_steps = 30, tol = 1e-9))]
fn feasibility_scan(
    settings: Vec<PySetting>,
    grid_density: usize,
    refine_steps: usize,
    tol: f64,
) -> PyResult<PyVerdict> {
    let settings: Vec<_> = settings.into_iter().map(|s| s.inner).collect();
    let verdict =
        hvm::feasibility_scan(&settings, grid_density, refine_steps, tol).map_err(to_py_err)?;
    Ok(PyVerdict {
        feasible: verdict.feasible,
        witness: verdict.witness,
        min_max_residual: verdict.min_max_residual,
    })
}

/// Seeded multinomial counts (n00, n01, n10, n11) from a joint distribution.
#[pyfunction]
fn sample_shots(p: [f64; 4], shots: u64, seed: u64) -> PyResult<(u64, u64, u64, u64)> {
    let joint = circuit::JointDistribution::new(p).map_err(to_py_err)?;
    let record = experiment::sample_shots(&joint, shots, seed).map_err(to_py_err)?;
    let [n00, n01, n10, n11] = record.counts;
    Ok((n00, n01, n10, n11))
}

/// Seeded counts of the noisy statistics at a setting.
#[pyfunction]
fn sample_at_setting(setting: PySetting, shots: u64, seed: u64) -> PyResult<(u64, u64, u64, u64)> {
    let record =
        experiment::sample_at_setting(&setting.inner, shots, seed).map_err(to_py_err)?;
    let [n00, n01, n10, n11] = record.counts;
    Ok((n00, n01, n10, n11))
}

/// Closed-form fringe visibility epsilon*sin^2(alpha)/(2*eta + epsilon*sin^2(alpha)).
#[pyfunction]
fn analytic_visibility(alpha: f64, epsilon: f64) -> PyResult<f64> {
    experiment::analytic_visibility(alpha, epsilon).map_err(to_py_err)
}

/// (value, std_error) of the sampled fringe visibility on the closed branch.
#[pyfunction]
#[pyo3(signature = (alpha, epsilon, phi_grid, shots_per_point = 100_000, seed = 1))]
fn estimate_visibility(
    alpha: f64,
    epsilon: f64,
    phi_grid: Vec<f64>,
    shots_per_point: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let estimate =
        experiment::estimate_visibility(alpha, epsilon, &phi_grid, shots_per_point, seed)
            .map_err(to_py_err)?;
    Ok((estimate.value, estimate.std_error))
}

/// Evenly spaced phase grid over [0, pi], endpoints included.
#[pyfunction]
fn fringe_grid(points: usize) -> Vec<f64> {
    experiment::fringe_grid(points)
}

#[pymodule]
fn qdc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetting>()?;
    m.add_class::<PyHvParameters>()?;
    m.add_class::<PyBranch>()?;
    m.add_class::<PyVerdict>()?;
    m.add_function(wrap_pyfunction!(joint_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_joint_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(evolved_noisy_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(final_state, m)?)?;
    m.add_function(wrap_pyfunction!(interferometer_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_system_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(ppt_min_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(separability_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_max, m)?)?;
    m.add_function(wrap_pyfunction!(derived_quantities, m)?)?;
    m.add_function(wrap_pyfunction!(model_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(constraint_triple, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_branches, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_scan, m)?)?;
    m.add_function(wrap_pyfunction!(sample_shots, m)?)?;
    m.add_function(wrap_pyfunction!(sample_at_setting, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_grid, m)?)?;
    Ok(())
}
