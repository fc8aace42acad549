//! Python bindings: `import iddm_py`.
//!
//! Parameters travel as a `ModelParams` object; results come back as plain
//! floats, tuples, and dicts. Invalid inputs raise `ValueError`, solver
//! failures raise `iddm_py.ConvergenceError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use iddm::ed::{self, EdConfig, ImpurityMode};
use iddm::fluctuations;
use iddm::meanfield::{self, ScanParameter};
use iddm::measurement::{self, Outcome, ProjectiveMeasurement, WernerState, C64};
use iddm::model;
use iddm::sweep::{self, AxisRange, GridSpec};
use iddm::{IddmError, ImpurityPopulation};

create_exception!(iddm_py, ConvergenceError, PyRuntimeError);

fn to_py(err: IddmError) -> PyErr {
    if err.is_convergence_failure() {
        ConvergenceError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn population(delta: f64) -> PyResult<ImpurityPopulation> {
    ImpurityPopulation::new(delta).map_err(to_py)
}

/// Hamiltonian coefficients in units of ω₀ (defaults: ω = 400, ω₀ = 1,
/// λ = 5, κ = −0.5, all other couplings 0).
#[pyclass(name = "ModelParams", from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams {
    inner: model::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (
        omega = 400.0, omega0 = 1.0, lambda_ = 5.0, kappa = -0.5, chi = 0.0,
        xi1 = 0.0, xi2 = 0.0, omega_q_prime = 0.0, n_atoms = 16
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        omega: f64,
        omega0: f64,
        lambda_: f64,
        kappa: f64,
        chi: f64,
        xi1: f64,
        xi2: f64,
        omega_q_prime: f64,
        n_atoms: usize,
    ) -> PyResult<Self> {
        let inner = model::ModelParams {
            omega,
            omega0,
            lambda: lambda_,
            kappa,
            chi,
            xi1,
            xi2,
            omega_q_prime,
            n_atoms,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.inner.omega0
    }

    #[getter(lambda_)]
    fn lambda(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn chi(&self) -> f64 {
        self.inner.chi
    }

    #[getter]
    fn xi1(&self) -> f64 {
        self.inner.xi1
    }

    #[getter]
    fn xi2(&self) -> f64 {
        self.inner.xi2
    }

    #[getter]
    fn omega_q_prime(&self) -> f64 {
        self.inner.omega_q_prime
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms
    }

    /// Copy with a different coupling λ.
    fn with_lambda(&self, lambda_: f64) -> PyResult<Self> {
        let inner = self.inner.with_lambda(lambda_);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(omega={}, omega0={}, lambda_={}, kappa={}, chi={}, xi1={}, xi2={}, \
             omega_q_prime={}, n_atoms={})",
            p.omega, p.omega0, p.lambda, p.kappa, p.chi, p.xi1, p.xi2, p.omega_q_prime, p.n_atoms
        )
    }
}

/// (f1, f2, nu); nu is None when λ = 0.
#[pyfunction]
fn effective_frequencies(params: &PyModelParams, delta: f64) -> PyResult<(f64, f64, Option<f64>)> {
    let f = model::effective_frequencies(&params.inner, population(delta)?).map_err(to_py)?;
    Ok((f.f1, f.f2, f.nu))
}

/// Mean-field ground state as a dict with alpha2, beta2, e0, jz_over_n,
/// i_over_n, nu, and phase.
#[pyfunction]
#[pyo3(signature = (params, delta, method = "closed", seeds = 64))]
fn equilibrium<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    delta: f64,
    method: &str,
    seeds: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let d = population(delta)?;
    let s = match method {
        "closed" => meanfield::equilibrium_closed_form(&params.inner, d),
        "numeric" => meanfield::equilibrium_numeric(&params.inner, d, seeds),
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    }
    .map_err(to_py)?;
    let (jz, i) = meanfield::observables(&s);
    let out = PyDict::new(py);
    out.set_item("alpha2", s.alpha * s.alpha)?;
    out.set_item("beta2", s.beta * s.beta)?;
    out.set_item("e0", s.e0)?;
    out.set_item("jz_over_n", jz)?;
    out.set_item("i_over_n", i)?;
    out.set_item("nu", s.nu)?;
    out.set_item("phase", s.phase.label())?;
    Ok(out)
}

/// Critical population δ_c at the coupling in `params`, or None.
#[pyfunction]
fn critical_delta(params: &PyModelParams) -> PyResult<Option<f64>> {
    meanfield::critical_delta(&params.inner).map_err(to_py)
}

/// Critical coupling λ_c at population `delta`, or None.
#[pyfunction]
fn critical_lambda(params: &PyModelParams, delta: f64) -> PyResult<Option<f64>> {
    meanfield::critical_lambda(&params.inner, population(delta)?).map_err(to_py)
}

/// (eps_minus, eps_plus) around the mean-field ground state.
#[pyfunction]
fn excitation_spectrum(params: &PyModelParams, delta: f64) -> PyResult<(f64, f64)> {
    let s = fluctuations::excitation_spectrum(&params.inner, population(delta)?).map_err(to_py)?;
    Ok((s.eps_minus, s.eps_plus))
}

/// E₀ and its derivatives along `wrt` ("delta" or "lambda") as a dict of lists.
#[pyfunction]
#[pyo3(signature = (params, wrt, start, stop, step, delta = 0.0))]
fn derivative_scan<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    wrt: &str,
    start: f64,
    stop: f64,
    step: f64,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let parameter = match wrt {
        "delta" => ScanParameter::Delta,
        "lambda" => ScanParameter::Lambda,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown scan variable `{other}`"
            )))
        }
    };
    let scan = meanfield::derivative_scan(
        &params.inner,
        population(delta)?,
        parameter,
        start,
        stop,
        step,
    )
    .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("grid", scan.grid.clone())?;
    out.set_item("e0", scan.e0_values.clone())?;
    out.set_item("d1", scan.d1_values.clone())?;
    out.set_item("d2", scan.d2_values.clone())?;
    out.set_item("largest_d2_jump", scan.largest_d2_jump())?;
    Ok(out)
}

fn grid_spec(
    params: &PyModelParams,
    delta: (f64, f64, usize),
    lambda: (f64, f64, usize),
) -> PyResult<GridSpec> {
    Ok(GridSpec {
        delta_range: AxisRange::new(delta.0, delta.1, delta.2).map_err(to_py)?,
        lambda_range: AxisRange::new(lambda.0, lambda.1, lambda.2).map_err(to_py)?,
        params: params.inner,
    })
}

/// Phase-diagram rows (δ outer, λ inner) as a list of dicts; error rows
/// carry None numerics and an `error` tag.
#[pyfunction]
#[pyo3(signature = (params, delta = (-1.0, 1.0, 201), lambda_ = (0.0, 12.0, 121)))]
fn run_grid<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    delta: (f64, f64, usize),
    lambda_: (f64, f64, usize),
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = grid_spec(params, delta, lambda_)?;
    let rows = py.detach(|| sweep::run_grid(&spec)).map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("delta", r.delta)?;
            d.set_item("lambda", r.lambda)?;
            d.set_item("alpha2", r.alpha2)?;
            d.set_item("beta2", r.beta2)?;
            d.set_item("e0", r.e0)?;
            d.set_item("jz_over_n", r.jz_over_n)?;
            d.set_item("i_over_n", r.i_over_n)?;
            d.set_item("phase", r.phase)?;
            d.set_item("error", r.error)?;
            Ok(d)
        })
        .collect()
}

/// The phase-diagram grid rendered in the CSV exchange format.
#[pyfunction]
#[pyo3(signature = (params, delta = (-1.0, 1.0, 201), lambda_ = (0.0, 12.0, 121)))]
fn sweep_csv(
    py: Python<'_>,
    params: &PyModelParams,
    delta: (f64, f64, usize),
    lambda_: (f64, f64, usize),
) -> PyResult<String> {
    let spec = grid_spec(params, delta, lambda_)?;
    let rows = py.detach(|| sweep::run_grid(&spec)).map_err(to_py)?;
    let mut buf = Vec::new();
    sweep::write_csv(&rows, &mut buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// [(delta, lambda_c or None)] along a δ axis.
#[pyfunction]
#[pyo3(signature = (params, delta = (-1.0, 1.0, 201)))]
fn critical_curve(
    params: &PyModelParams,
    delta: (f64, f64, usize),
) -> PyResult<Vec<(f64, Option<f64>)>> {
    let axis = AxisRange::new(delta.0, delta.1, delta.2).map_err(to_py)?;
    let points = sweep::trace_critical_curve(&params.inner, &axis).map_err(to_py)?;
    Ok(points.into_iter().map(|p| (p.delta, p.lambda_c)).collect())
}

/// Exact-diagonalization ground state for `n_atoms` atoms. Pass `delta` for a
/// fixed impurity population or leave it None for a dynamical qubit.
#[pyfunction]
#[pyo3(signature = (params, n_atoms, delta = None, cutoff = 1, include_chi = false))]
fn ed_ground_state<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    n_atoms: usize,
    delta: Option<f64>,
    cutoff: usize,
    include_chi: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match delta {
        Some(d) => ImpurityMode::FixedDelta(population(d)?),
        None => ImpurityMode::FullQubit,
    };
    let config = EdConfig {
        include_chi,
        ..EdConfig::new(n_atoms, mode).with_cutoff(cutoff)
    };
    let p = params.inner;
    let r = py.detach(|| ed::ground_state(&p, &config)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("n_atoms", r.n_atoms)?;
    out.set_item("photon_cutoff", r.photon_cutoff)?;
    out.set_item("energy_per_atom", r.energy_per_atom)?;
    out.set_item("jz_over_n", r.jz_over_n)?;
    out.set_item("photons_over_n", r.photons_over_n)?;
    out.set_item("parity", r.parity)?;
    out.set_item("cutoff_shift", r.cutoff_shift)?;
    out.set_item("converged", r.converged)?;
    out.set_item("residual", r.residual)?;
    Ok(out)
}

fn outcome(sign: &str) -> PyResult<Outcome> {
    match sign {
        "plus" | "+" => Ok(Outcome::Plus),
        "minus" | "-" => Ok(Outcome::Minus),
        other => Err(PyValueError::new_err(format!("unknown outcome `{other}`"))),
    }
}

/// Measures the auxiliary atom of a Werner pair at angle `theta` (radians)
/// and returns (delta, probability, rho) with rho a 2×2 list of complex.
#[pyfunction]
fn measure(z: f64, theta: f64, sign: &str) -> PyResult<(f64, f64, Vec<Vec<C64>>)> {
    let state = WernerState::new(z).map_err(to_py)?;
    let r = measurement::measure(&state, &ProjectiveMeasurement::new(theta, outcome(sign)?))
        .map_err(to_py)?;
    let rho = (0..2)
        .map(|i| (0..2).map(|j| r.density_matrix[(i, j)]).collect())
        .collect();
    Ok((r.delta, r.probability, rho))
}

/// (theta, sign) that steers the impurity to population `target`.
#[pyfunction]
fn angle_for_target_delta(z: f64, target: f64) -> PyResult<(f64, &'static str)> {
    let m = measurement::angle_for_target_delta(z, target).map_err(to_py)?;
    let sign = match m.outcome {
        Outcome::Plus => "plus",
        Outcome::Minus => "minus",
    };
    Ok((m.theta, sign))
}

#[pymodule]
fn iddm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_function(wrap_pyfunction!(effective_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(critical_delta, m)?)?;
    m.add_function(wrap_pyfunction!(critical_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(excitation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_scan, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(critical_curve, m)?)?;
    m.add_function(wrap_pyfunction!(ed_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(angle_for_target_delta, m)?)?;
    Ok(())
}
