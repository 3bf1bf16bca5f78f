//! Shared flag groups: topology sources, weight configuration, and the run
//! manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use waca_core::netmodel::{PowerModel, SignalModel};
use waca_core::rng::derive_seed;
use waca_core::waca::WeightConfig;
use waca_core::wca::WcaConfig;
use waca_core::Topology;

use crate::CliError;

/// Where the topology comes from: a JSON file or deploy parameters.
#[derive(Args, Clone, Debug)]
pub struct TopologySource {
    /// Topology JSON file `{side, range, nodes: [...]}`.
    #[arg(long, value_name = "FILE")]
    pub topology: Option<PathBuf>,

    /// Deploy: number of nodes dropped uniformly on the square.
    #[arg(long, conflicts_with = "topology")]
    pub n: Option<u32>,

    /// Deploy: side length of the square.
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,

    /// Transmission range. Required when deploying; overrides the file's
    /// range when loading.
    #[arg(long)]
    pub range: Option<f64>,

    /// Deploy: seed for positions and attribute models.
    #[arg(long, conflicts_with = "topology")]
    pub seed: Option<u64>,

    /// Deploy: power-ratio model (`const:<v>` | `uniform:<lo>:<hi>`).
    #[arg(long, default_value = "uniform:0.7:4")]
    pub power: String,

    /// Deploy: signal model (`const:<v>` | `uniform` | `stations:x,y;...@r`).
    #[arg(long, default_value = "uniform")]
    pub signal: String,
}

impl TopologySource {
    /// Materializes the topology. Returns it plus the manifest inputs and
    /// the seed that was used (0 for loaded files).
    pub fn resolve(&self) -> Result<(Topology, BTreeMap<String, String>, u64), CliError> {
        let mut inputs = BTreeMap::new();
        if let Some(path) = &self.topology {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut topology = Topology::from_json(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            if let Some(range) = self.range {
                topology = topology.with_range(range)?;
            }
            inputs.insert("topology".into(), path.display().to_string());
            return Ok((topology, inputs, 0));
        }

        let n = self
            .n
            .ok_or_else(|| CliError::Usage("either --topology or --n is required".into()))?;
        let range = self
            .range
            .ok_or_else(|| CliError::Usage("--range is required when deploying".into()))?;
        let seed = self
            .seed
            .ok_or_else(|| CliError::Usage("--seed is required when deploying".into()))?;
        let power: PowerModel = self.power.parse()?;
        let signal: SignalModel = self.signal.parse()?;

        // same substream discipline as the sweep harness
        let mut nodes = Topology::deploy_uniform(n as usize, self.side, derive_seed(seed, &[0]))?;
        power.apply(&mut nodes, derive_seed(seed, &[1]))?;
        signal.apply(&mut nodes, derive_seed(seed, &[2]))?;
        let topology = Topology::new(nodes, self.side, range)?;
        inputs.insert(
            "deploy".into(),
            format!("n={n} side={} range={range} seed={seed}", self.side),
        );
        Ok((topology, inputs, seed))
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "topology": self.topology.as_ref().map(|p| p.display().to_string()),
            "n": self.n,
            "side": self.side,
            "range": self.range,
            "seed": self.seed,
            "power": self.power,
            "signal": self.signal,
        })
    }
}

/// Weight-function flags shared by the election-running subcommands.
#[derive(Args, Clone, Debug)]
pub struct WeightFlags {
    /// Weighing factors `power,signal,clustering,degree,stability`.
    #[arg(long, value_name = "F,F,F,F,F")]
    pub weights: Option<String>,

    /// Neighbor count a clusterhead handles best.
    #[arg(long, default_value_t = 7)]
    pub ideal_degree: u32,

    /// Base of the logarithm in the power term.
    #[arg(long, default_value_t = 10.0)]
    pub log_base: f64,

    /// Floor substituted for undefined or tiny power terms.
    #[arg(long, default_value_t = 0.0)]
    pub power_floor: f64,

    /// Cap on election rounds before a run is flagged unsettled.
    #[arg(long, default_value_t = 32)]
    pub max_rounds: u32,
}

impl WeightFlags {
    pub fn to_config(&self) -> Result<WeightConfig, CliError> {
        let mut cfg = WeightConfig {
            ideal_degree: self.ideal_degree,
            log_base: self.log_base,
            power_floor: self.power_floor,
            ..WeightConfig::default()
        };
        if let Some(spec) = &self.weights {
            let parts = parse_f64_list(spec)?;
            if parts.len() != 5 {
                return Err(CliError::Usage(format!(
                    "--weights needs 5 comma-separated factors, got {}",
                    parts.len()
                )));
            }
            cfg.power_factor = parts[0];
            cfg.signal_factor = parts[1];
            cfg.clustering_factor = parts[2];
            cfg.degree_factor = parts[3];
            cfg.stability_factor = parts[4];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Baseline flags for the comparison subcommands.
#[derive(Args, Clone, Debug)]
pub struct WcaFlags {
    /// WCA factors `degree,distance,mobility,service`.
    #[arg(long, value_name = "F,F,F,F")]
    pub wca_factors: Option<String>,

    /// WCA ideal degree; defaults to --ideal-degree.
    #[arg(long)]
    pub wca_ideal_degree: Option<u32>,
}

impl WcaFlags {
    pub fn to_config(&self, fallback_ideal: u32) -> Result<WcaConfig, CliError> {
        let mut cfg = WcaConfig {
            ideal_degree: self.wca_ideal_degree.unwrap_or(fallback_ideal),
            ..WcaConfig::default()
        };
        if let Some(spec) = &self.wca_factors {
            let parts = parse_f64_list(spec)?;
            if parts.len() != 4 {
                return Err(CliError::Usage(format!(
                    "--wca-factors needs 4 comma-separated factors, got {}",
                    parts.len()
                )));
            }
            cfg.degree_factor = parts[0];
            cfg.distance_factor = parts[1];
            cfg.mobility_factor = parts[2];
            cfg.service_factor = parts[3];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number {part:?} in list")))
        })
        .collect()
}

pub fn parse_u32_list(spec: &str) -> Result<Vec<u32>, CliError> {
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("bad count {part:?} in list")))
        })
        .collect()
}

/// Ranges are either a comma list (`10,20,30`) or `start:end:step`.
pub fn parse_ranges(spec: &str) -> Result<Vec<f64>, CliError> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "bad range spec {spec:?}, want start:end:step"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::Usage("bad range start".into()))?;
        let end: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::Usage("bad range end".into()))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|_| CliError::Usage("bad range step".into()))?;
        if !step.is_finite() || step <= 0.0 || end < start {
            return Err(CliError::Usage(format!("bad range spec {spec:?}")));
        }
        let mut out = Vec::new();
        let mut i = 0;
        loop {
            let v = start + step * i as f64;
            if v > end + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        return Ok(out);
    }
    parse_f64_list(spec)
}

/// Record written beside every run's outputs; reruns from the manifest
/// reproduce the outputs byte for byte.
#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(path, &text)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Resolves an output path against the out-dir unless explicitly given.
pub fn out_path(out_dir: &Path, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(path) => path.clone(),
        None => out_dir.join(default_name),
    }
}
