//! Python bindings exposing the simulator's main types and operations.
//!
//! Build the extension with `cargo build -p waca-py --release`; the cdylib
//! in `target/release` imports as `waca_py` once renamed to
//! `waca_py.so` (see `python/smoke_test.py`).

use std::collections::BTreeSet;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use waca_core::dissemination::{self, ContentJob};
use waca_core::events::{self, TopologyEvent};
use waca_core::experiments::{self, SweepConfig};
use waca_core::netmodel::{self, NodeId, PowerModel, SignalModel};
use waca_core::rng::derive_seed;
use waca_core::waca;
use waca_core::wca;

fn to_py_err(e: waca_core::Error) -> PyErr {
    match e {
        waca_core::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Node set plus transmission range with a precomputed neighbor relation.
#[pyclass(frozen)]
struct Topology {
    inner: netmodel::Topology,
}

#[pymethods]
impl Topology {
    /// Drop `n` nodes uniformly on the square and apply the attribute
    /// models, exactly like the CLI's deploy flags.
    #[staticmethod]
    #[pyo3(signature = (n, side, range, seed, power="uniform:0.7:4", signal="uniform"))]
    fn deploy(
        n: u32,
        side: f64,
        range: f64,
        seed: u64,
        power: &str,
        signal: &str,
    ) -> PyResult<Self> {
        let power: PowerModel = power.parse().map_err(to_py_err)?;
        let signal: SignalModel = signal.parse().map_err(to_py_err)?;
        let mut nodes =
            netmodel::Topology::deploy_uniform(n as usize, side, derive_seed(seed, &[0]))
                .map_err(to_py_err)?;
        power
            .apply(&mut nodes, derive_seed(seed, &[1]))
            .map_err(to_py_err)?;
        signal
            .apply(&mut nodes, derive_seed(seed, &[2]))
            .map_err(to_py_err)?;
        let inner = netmodel::Topology::new(nodes, side, range).map_err(to_py_err)?;
        Ok(Topology { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Topology {
            inner: netmodel::Topology::from_json(text).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }

    fn node_count(&self) -> usize {
        self.inner.len()
    }

    fn side(&self) -> f64 {
        self.inner.side()
    }

    fn range(&self) -> f64 {
        self.inner.range()
    }

    fn neighbors(&self, id: NodeId) -> PyResult<Vec<NodeId>> {
        Ok(self.inner.neighbors(id).map_err(to_py_err)?.to_vec())
    }

    fn degree(&self, id: NodeId) -> PyResult<usize> {
        self.inner.degree(id).map_err(to_py_err)
    }

    fn clustering_coefficient(&self, id: NodeId) -> PyResult<f64> {
        self.inner
            .local_clustering_coefficient(id)
            .map_err(to_py_err)
    }

    fn partitions(&self) -> Vec<Vec<NodeId>> {
        self.inner
            .partitions()
            .into_iter()
            .map(|p| p.into_iter().collect())
            .collect()
    }

    fn min_pairwise_distance(&self) -> Option<f64> {
        self.inner.min_pairwise_distance()
    }

    /// Node records as dicts `{id, x, y, power_ratio, signal}`.
    fn nodes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let out = PyList::empty(py);
        for node in self.inner.nodes() {
            let d = PyDict::new(py);
            d.set_item("id", node.id)?;
            d.set_item("x", node.x)?;
            d.set_item("y", node.y)?;
            d.set_item("power_ratio", node.power_ratio)?;
            d.set_item("signal", node.signal)?;
            out.append(d)?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Topology(nodes={}, side={}, range={})",
            self.inner.len(),
            self.inner.side(),
            self.inner.range()
        )
    }
}

/// Weighing factors for the five weight terms.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct WeightConfig {
    inner: waca::WeightConfig,
}

#[pymethods]
impl WeightConfig {
    #[new]
    #[pyo3(signature = (
        power_factor=0.9, signal_factor=1.0, clustering_factor=0.85,
        degree_factor=0.65, stability_factor=0.6, ideal_degree=7,
        log_base=10.0, power_floor=0.0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        power_factor: f64,
        signal_factor: f64,
        clustering_factor: f64,
        degree_factor: f64,
        stability_factor: f64,
        ideal_degree: u32,
        log_base: f64,
        power_floor: f64,
    ) -> PyResult<Self> {
        let inner = waca::WeightConfig {
            power_factor,
            signal_factor,
            clustering_factor,
            degree_factor,
            stability_factor,
            ideal_degree,
            log_base,
            power_floor,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(WeightConfig { inner })
    }
}

/// Election outcome: weights, head choices, derived roles, and beacons.
#[pyclass(frozen)]
struct ClusteringState {
    inner: waca::ClusteringState,
}

#[pymethods]
impl ClusteringState {
    fn weights(&self) -> std::collections::BTreeMap<NodeId, f64> {
        self.inner.weights().clone()
    }

    fn heads(&self) -> std::collections::BTreeMap<NodeId, NodeId> {
        self.inner.heads().clone()
    }

    /// Role per node: "CH", "SH", or "SL".
    fn roles(&self) -> std::collections::BTreeMap<NodeId, &'static str> {
        self.inner
            .roles()
            .iter()
            .map(|(&id, role)| {
                let tag = match role {
                    waca::Role::Clusterhead => "CH",
                    waca::Role::SubHead => "SH",
                    waca::Role::Slave => "SL",
                };
                (id, tag)
            })
            .collect()
    }

    fn head_count(&self) -> usize {
        self.inner.head_count()
    }

    fn subhead_count(&self) -> usize {
        self.inner.subhead_count()
    }

    fn head_chain(&self, id: NodeId) -> PyResult<Vec<NodeId>> {
        self.inner.head_chain(id).map_err(to_py_err)
    }

    fn beacons(&self) -> u64 {
        self.inner.beacons()
    }

    fn settled(&self) -> bool {
        self.inner.settled()
    }

    fn rounds(&self) -> u32 {
        self.inner.rounds()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dot(&self, topology: &Topology) -> String {
        self.inner.to_dot(&topology.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "ClusteringState(heads={}, subheads={}, settled={})",
            self.inner.head_count(),
            self.inner.subhead_count(),
            self.inner.settled()
        )
    }
}

/// Settle the weighted election to a fixed point.
#[pyfunction]
#[pyo3(signature = (topology, config=None, max_rounds=32))]
fn settle(
    topology: &Topology,
    config: Option<WeightConfig>,
    max_rounds: u32,
) -> PyResult<ClusteringState> {
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let inner = waca::settle(&topology.inner, &cfg, max_rounds).map_err(to_py_err)?;
    Ok(ClusteringState { inner })
}

/// Apply one topology event (JSON, same format as the CLI event scripts)
/// and re-elect incrementally. Returns the new topology and state.
#[pyfunction]
#[pyo3(signature = (topology, state, event_json, config=None, max_rounds=32))]
fn apply_event(
    topology: &Topology,
    state: &ClusteringState,
    event_json: &str,
    config: Option<WeightConfig>,
    max_rounds: u32,
) -> PyResult<(Topology, ClusteringState)> {
    let event: TopologyEvent =
        serde_json::from_str(event_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let (t, st) = events::apply_event(&topology.inner, &state.inner, &event, &cfg, max_rounds)
        .map_err(to_py_err)?;
    Ok((Topology { inner: t }, ClusteringState { inner: st }))
}

/// One-shot WCA baseline election. Returns
/// `{"heads": [...], "assignment": {...}, "weights": {...}}`.
#[pyfunction]
#[pyo3(signature = (topology, ideal_degree=7))]
fn wca_elect<'py>(
    py: Python<'py>,
    topology: &Topology,
    ideal_degree: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = wca::WcaConfig {
        ideal_degree,
        ..wca::WcaConfig::default()
    };
    let clustering = wca::wca_elect(&topology.inner, &cfg).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item(
        "heads",
        clustering.heads().iter().copied().collect::<Vec<_>>(),
    )?;
    out.set_item("assignment", clustering.assignment().clone())?;
    out.set_item("weights", clustering.weights().clone())?;
    Ok(out)
}

/// Spread a chunked file from the backbone through the cluster hierarchy.
#[pyfunction]
#[pyo3(signature = (topology, state, chunks, interested, uplink_rate=1, adhoc_rate=1, max_injection_points=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn disseminate<'py>(
    py: Python<'py>,
    topology: &Topology,
    state: &ClusteringState,
    chunks: u32,
    interested: Vec<NodeId>,
    uplink_rate: u32,
    adhoc_rate: u32,
    max_injection_points: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let job = ContentJob {
        chunk_count: chunks,
        interested: interested.into_iter().collect::<BTreeSet<_>>(),
        uplink_rate,
        adhoc_rate,
        max_injection_points,
    };
    let report =
        dissemination::disseminate(&topology.inner, &state.inner, &job, seed).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("rounds", report.rounds)?;
    out.set_item("complete", report.complete)?;
    out.set_item("uplink_transmissions", report.uplink_transmissions)?;
    out.set_item("adhoc_transmissions", report.adhoc_transmissions)?;
    out.set_item(
        "injection_points",
        report.injection_points.iter().copied().collect::<Vec<_>>(),
    )?;
    out.set_item(
        "unreached",
        report.unreached.iter().copied().collect::<Vec<_>>(),
    )?;
    Ok(out)
}

/// Run a sweep. `config_json` uses the same schema as the CLI's
/// `experiment --config` file; missing fields take the defaults.
#[pyfunction]
#[pyo3(signature = (config_json=None, parallel=None))]
fn run_sweep<'py>(
    py: Python<'py>,
    config_json: Option<&str>,
    parallel: Option<usize>,
) -> PyResult<Bound<'py, PyList>> {
    let cfg: SweepConfig = match config_json {
        Some(text) => {
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => SweepConfig::default(),
    };
    let rows = experiments::run_sweep_parallel(&cfg, parallel).map_err(to_py_err)?;
    let out = PyList::empty(py);
    for row in rows {
        let d = PyDict::new(py);
        d.set_item("n", row.n)?;
        d.set_item("range", row.range)?;
        d.set_item("run", row.run)?;
        d.set_item("waca_heads", row.waca_heads)?;
        d.set_item("waca_subheads", row.waca_subheads)?;
        d.set_item("wca_heads", row.wca_heads)?;
        d.set_item("settled", row.settled)?;
        d.set_item("settle_rounds", row.settle_rounds)?;
        out.append(d)?;
    }
    Ok(out)
}

/// Run a sweep and return `(rows_csv, aggregate_csv, trends_json)` exactly
/// as the CLI would write them.
#[pyfunction]
#[pyo3(signature = (config_json=None, parallel=None))]
fn sweep_csv(
    config_json: Option<&str>,
    parallel: Option<usize>,
) -> PyResult<(String, String, String)> {
    let cfg: SweepConfig = match config_json {
        Some(text) => {
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => SweepConfig::default(),
    };
    let rows = experiments::run_sweep_parallel(&cfg, parallel).map_err(to_py_err)?;
    let aggregates = experiments::aggregate(&rows);
    let trends = experiments::trend_checks(&aggregates);

    let mut rows_buf = Vec::new();
    experiments::write_rows_csv(&mut rows_buf, &cfg, &rows)
        .map_err(|e| PyIOError::new_err(e.to_string()))?;
    let mut agg_buf = Vec::new();
    experiments::write_aggregate_csv(&mut agg_buf, &cfg, &aggregates)
        .map_err(|e| PyIOError::new_err(e.to_string()))?;
    let trends_doc = serde_json::json!({ "config": cfg, "per_n": trends.per_n });

    Ok((
        String::from_utf8(rows_buf).expect("csv is utf-8"),
        String::from_utf8(agg_buf).expect("csv is utf-8"),
        serde_json::to_string_pretty(&trends_doc).expect("serializes"),
    ))
}

#[pymodule]
fn waca_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Topology>()?;
    m.add_class::<WeightConfig>()?;
    m.add_class::<ClusteringState>()?;
    m.add_function(wrap_pyfunction!(settle, m)?)?;
    m.add_function(wrap_pyfunction!(apply_event, m)?)?;
    m.add_function(wrap_pyfunction!(wca_elect, m)?)?;
    m.add_function(wrap_pyfunction!(disseminate, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}
