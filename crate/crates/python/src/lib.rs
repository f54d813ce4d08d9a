//! Python bindings: configs, profiles, construction, simulation, the
//! multicoding scheme and the transform. Bit vectors come back as `bytes`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use polar_wom::channel::ModelSpec;
use polar_wom::harness::{self, ExperimentConfig};
use polar_wom::profile::CodeProfile;
use polar_wom::scheme::{self, MulticodeScheme, SideChannelPayload};
use polar_wom::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Experiment settings; same fields as the CLI's JSON config.
#[pyclass(name = "Config", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    model: String,
    params: BTreeMap<String, f64>,
    n: usize,
    sample_count: usize,
    z_high: f64,
    z_low: Option<f64>,
    rate: Option<f64>,
    rate_fraction: Option<f64>,
    error_target: f64,
    search: bool,
    search_budget: usize,
    trials: usize,
    k_blocks: usize,
    seed: u64,
}

impl PyConfig {
    fn to_core(&self) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model.clone(),
            params: self.params.clone(),
            n: self.n,
            sample_count: self.sample_count,
            z_high: self.z_high,
            z_low: self.z_low,
            rate: self.rate,
            rate_fraction: self.rate_fraction,
            error_target: self.error_target,
            search: self.search,
            search_budget: self.search_budget,
            trials: self.trials,
            k_blocks: self.k_blocks,
            seed: self.seed,
            ..ExperimentConfig::default()
        }
    }
}

#[pymethods]
impl PyConfig {
    /// Defaults, then any of the keyword fields.
    #[new]
    #[pyo3(signature = (model=None, params=None, **kwargs))]
    fn new(
        model: Option<String>,
        params: Option<BTreeMap<String, f64>>,
        kwargs: Option<&Bound<'_, pyo3::types::PyDict>>,
    ) -> PyResult<Self> {
        let d = ExperimentConfig::default();
        let mut cfg = PyConfig {
            model: d.model,
            params: d.params,
            n: d.n,
            sample_count: d.sample_count,
            z_high: d.z_high,
            z_low: d.z_low,
            rate: d.rate,
            rate_fraction: d.rate_fraction,
            error_target: d.error_target,
            search: d.search,
            search_budget: d.search_budget,
            trials: d.trials,
            k_blocks: d.k_blocks,
            seed: d.seed,
        };
        if let Some(m) = model {
            if m != cfg.model && params.is_none() {
                cfg.params.clear();
            }
            cfg.model = m;
        }
        if let Some(p) = params {
            cfg.params = p;
        }
        if let Some(kw) = kwargs {
            let this = Bound::new(kw.py(), cfg)?;
            for (k, v) in kw.iter() {
                this.setattr(k.extract::<String>()?.as_str(), v)?;
            }
            cfg = this.borrow().clone();
        }
        cfg.to_core().validate().map_err(py_err)?;
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(model={:?}, params={:?}, n={}, trials={}, k_blocks={}, seed={})",
            self.model, self.params, self.n, self.trials, self.k_blocks, self.seed
        )
    }
}

/// A constructed code.
#[pyclass(name = "Profile", skip_from_py_object)]
#[derive(Clone)]
struct PyProfile(CodeProfile);

#[pymethods]
impl PyProfile {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        CodeProfile::load(path).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CodeProfile::from_json(text).map(Self).map_err(py_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(path).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn model(&self) -> (String, BTreeMap<String, f64>) {
        (self.0.model.id.clone(), self.0.model.params.clone())
    }

    #[getter]
    fn message(&self) -> Vec<usize> {
        self.0.sets.message.clone()
    }

    #[getter]
    fn frozen(&self) -> Vec<usize> {
        self.0.sets.frozen.clone()
    }

    #[getter]
    fn random_low(&self) -> Vec<usize> {
        self.0.sets.random_low.clone()
    }

    #[getter]
    fn side(&self) -> Vec<usize> {
        self.0.sets.side.clone()
    }

    #[getter]
    fn frozen_bits(&self) -> Vec<u8> {
        self.0.frozen_bits.clone()
    }

    #[getter]
    fn z_source(&self) -> Vec<f64> {
        self.0.z.z_source.clone()
    }

    #[getter]
    fn z_channel(&self) -> Vec<f64> {
        self.0.z.z_channel.clone()
    }

    /// `|message| / n`.
    #[getter]
    fn code_rate(&self) -> f64 {
        self.0.code_rate()
    }

    /// `(|message| - |side|) / n`.
    #[getter]
    fn effective_rate(&self) -> f64 {
        scheme::effective_rate(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(model={:?}, n={}, message={}, side={})",
            self.0.model.id,
            self.0.n(),
            self.0.message_len(),
            self.0.side_len()
        )
    }
}

/// Encoder/decoder for a profile of a model with aux functions.
#[pyclass(name = "MulticodeScheme")]
struct PyMulticode(MulticodeScheme);

#[pymethods]
impl PyMulticode {
    #[new]
    fn new(profile: &PyProfile) -> PyResult<Self> {
        let spec = profile.0.model.build().map_err(py_err)?;
        MulticodeScheme::new(&profile.0, &spec).map(Self).map_err(py_err)
    }

    /// Draws a state sequence on the trial stream `(seed, index)`.
    fn sample_states(&self, seed: u64, index: u64) -> Vec<usize> {
        let mut rng = scheme::trial_stream(seed, index);
        self.0.spec().sample_states(self.0.profile().n(), &mut rng)
    }

    /// Returns `(x, side_bits)`.
    fn encode(&self, message: Vec<u8>, state: Vec<usize>, seed: u64, index: u64) -> PyResult<(Vec<u8>, Vec<u8>)> {
        let mut rng = scheme::trial_stream(seed, index);
        let e = self.0.encode(&message, &state, &mut rng).map_err(py_err)?;
        Ok((e.x, e.side.bits))
    }

    /// Passes `x` through the model's channel in the given state.
    fn transmit(&self, x: Vec<u8>, state: Vec<usize>, seed: u64, index: u64) -> PyResult<Vec<usize>> {
        let mut rng = scheme::trial_stream(seed, index);
        self.0.spec().simulate_channel(&x, &state, &mut rng).map_err(py_err)
    }

    /// Message estimate, or `None` when the output is impossible under the model.
    fn decode(&self, y: Vec<usize>, side_bits: Vec<u8>) -> PyResult<Option<Vec<u8>>> {
        let side = SideChannelPayload {
            bits: side_bits,
            block_index: 0,
        };
        self.0.decode(&y, &side).map_err(py_err)
    }

    fn cost_of(&self, x: Vec<u8>) -> f64 {
        self.0.cost_of(&x)
    }
}

/// `u G_n` for a block whose length is a power of two.
#[pyfunction]
fn polar_transform(bits: Vec<u8>) -> PyResult<Vec<u8>> {
    polar_wom::transform::transform_slice(&bits).map_err(py_err)
}

/// Closed-form and grid capacity of a model, as a dict.
#[pyfunction]
#[pyo3(signature = (model, params, resolution=0.01))]
fn capacity(py: Python<'_>, model: String, params: BTreeMap<String, f64>, resolution: f64) -> PyResult<Py<PyAny>> {
    let spec = ModelSpec { id: model, params };
    let report = py.detach(|| harness::capacity(&spec, resolution)).map_err(py_err)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

/// Builds a profile at `config.n`; returns `(profile, capacity)`.
#[pyfunction]
fn construct(py: Python<'_>, config: &PyConfig) -> PyResult<(PyProfile, f64)> {
    let cfg = config.to_core();
    let built = py.detach(|| harness::construct(&cfg, cfg.n)).map_err(py_err)?;
    Ok((PyProfile(built.profile), built.capacity))
}

/// Runs `config.trials` trials against `profile`; returns the report as a dict.
#[pyfunction]
fn simulate(py: Python<'_>, config: &PyConfig, profile: &PyProfile) -> PyResult<Py<PyAny>> {
    let cfg = config.to_core();
    let p = &profile.0;
    let report = py
        .detach(|| {
            let cap = p.model.capacity()?;
            harness::simulate(&cfg, p, cap)
        })
        .map_err(py_err)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

#[pymodule]
fn polar_wom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyMulticode>()?;
    m.add_function(wrap_pyfunction!(polar_transform, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
