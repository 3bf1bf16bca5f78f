//! Sweep harness: deploy, settle, count heads for WACA and WCA over a seeded
//! grid of node counts and transmission ranges, then aggregate and check the
//! qualitative trends.
//!
//! Cells are keyed by `derive_seed(base_seed, [n, range bits, run])`, so any
//! subset can run concurrently and in any order while producing identical
//! output. CSV files carry a `# key=value` config echo and fixed float
//! formatting, making reruns byte-identical.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{PowerModel, SignalModel, Topology};
use crate::rng::derive_seed;
use crate::waca::{settle, WeightConfig};
use crate::wca::{wca_elect, WcaConfig};

/// Full description of a sweep; every field has a default so partial config
/// files work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub side: f64,
    pub node_counts: Vec<u32>,
    pub ranges: Vec<f64>,
    /// Repetitions per (n, range) cell.
    pub runs: u32,
    pub base_seed: u64,
    pub weight_cfg: WeightConfig,
    pub wca_cfg: WcaConfig,
    pub power_model: PowerModel,
    pub signal_model: SignalModel,
    pub max_settle_rounds: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            side: 100.0,
            node_counts: vec![20, 30, 40, 50, 60],
            ranges: (2..=14).map(|i| (i * 5) as f64).collect(),
            runs: 30,
            base_seed: 1,
            weight_cfg: WeightConfig::default(),
            wca_cfg: WcaConfig::default(),
            power_model: PowerModel::Uniform { lo: 0.7, hi: 4.0 },
            signal_model: SignalModel::UniformRandom,
            max_settle_rounds: 32,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.side.is_finite() || self.side <= 0.0 {
            return Err(Error::config("side must be > 0"));
        }
        if self.node_counts.is_empty() || self.node_counts.iter().any(|&n| n < 1) {
            return Err(Error::config(
                "node_counts must be a non-empty list of counts >= 1",
            ));
        }
        if self.ranges.is_empty() || self.ranges.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(Error::config(
                "ranges must be a non-empty list of positive reals",
            ));
        }
        if self.runs < 1 {
            return Err(Error::config("runs must be >= 1"));
        }
        if self.max_settle_rounds < 1 {
            return Err(Error::config("max_settle_rounds must be >= 1"));
        }
        self.weight_cfg.validate()?;
        self.wca_cfg.validate()?;
        self.power_model.validate()?;
        self.signal_model.validate()?;
        Ok(())
    }

    /// `# key=value` lines reproduced at the top of every output file.
    pub fn echo_lines(&self) -> Vec<(String, String)> {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let w = &self.weight_cfg;
        vec![
            ("side".into(), self.side.to_string()),
            (
                "node_counts".into(),
                self.node_counts
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("ranges".into(), join(&self.ranges)),
            ("runs".into(), self.runs.to_string()),
            ("base_seed".into(), self.base_seed.to_string()),
            (
                "waca_factors".into(),
                join(&[
                    w.power_factor,
                    w.signal_factor,
                    w.clustering_factor,
                    w.degree_factor,
                    w.stability_factor,
                ]),
            ),
            ("waca_ideal_degree".into(), w.ideal_degree.to_string()),
            ("waca_log_base".into(), w.log_base.to_string()),
            ("waca_power_floor".into(), w.power_floor.to_string()),
            (
                "wca_factors".into(),
                join(&[
                    self.wca_cfg.degree_factor,
                    self.wca_cfg.distance_factor,
                    self.wca_cfg.mobility_factor,
                    self.wca_cfg.service_factor,
                ]),
            ),
            (
                "wca_ideal_degree".into(),
                self.wca_cfg.ideal_degree.to_string(),
            ),
            ("power_model".into(), self.power_model.to_string()),
            ("signal_model".into(), self.signal_model.to_string()),
            (
                "max_settle_rounds".into(),
                self.max_settle_rounds.to_string(),
            ),
        ]
    }
}

/// One sweep cell: both algorithms run on the identical topology instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: u32,
    pub range: f64,
    pub run: u32,
    pub waca_heads: u32,
    pub waca_subheads: u32,
    pub wca_heads: u32,
    pub settled: bool,
    pub settle_rounds: u32,
}

/// Per-(n, range) means and population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: u32,
    pub range: f64,
    pub waca_heads_mean: f64,
    pub waca_heads_sd: f64,
    pub waca_subheads_mean: f64,
    pub waca_subheads_sd: f64,
    pub wca_heads_mean: f64,
    pub wca_heads_sd: f64,
}

/// Per-n trend statistics; thresholds are applied by the acceptance tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: u32,
    /// Spearman rank correlation between range and mean WACA head count.
    pub heads_range_correlation: f64,
    /// Fraction of range points where mean WACA heads <= mean WCA heads.
    pub waca_below_wca_fraction: f64,
    /// Mean WACA head count over all range points.
    pub waca_heads_grand_mean: f64,
    pub wca_heads_grand_mean: f64,
    /// Smallest range attaining the maximum mean sub-head count.
    pub subhead_peak_range: f64,
    pub subhead_peak_mean: f64,
    pub subheads_at_min_range: f64,
    pub subheads_at_max_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub per_n: Vec<TrendRow>,
}

/// Runs every (n, range, run) cell sequentially in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ExperimentRow>> {
    run_sweep_parallel(cfg, None)
}

/// Runs the sweep on a rayon pool (`threads = None` uses the global pool).
/// Output order is the grid order regardless of scheduling.
pub fn run_sweep_parallel(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.node_counts {
        for &range in &cfg.ranges {
            for run in 0..cfg.runs {
                cells.push((n, range, run));
            }
        }
    }
    let compute = || {
        cells
            .par_iter()
            .map(|&(n, range, run)| run_cell(cfg, n, range, run))
            .collect::<Vec<_>>()
    };
    let rows = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(compute),
        None => compute(),
    };
    Ok(rows)
}

/// One cell: deploy with the cell's derived seed, apply the attribute
/// models, settle WACA, and run WCA on the identical topology.
pub fn run_cell(cfg: &SweepConfig, n: u32, range: f64, run: u32) -> ExperimentRow {
    let cell = derive_seed(cfg.base_seed, &[n as u64, range.to_bits(), run as u64]);
    let mut nodes = Topology::deploy_uniform(n as usize, cfg.side, derive_seed(cell, &[0]))
        .expect("grid was validated");
    cfg.power_model
        .apply(&mut nodes, derive_seed(cell, &[1]))
        .expect("model was validated");
    cfg.signal_model
        .apply(&mut nodes, derive_seed(cell, &[2]))
        .expect("model was validated");
    let topology = Topology::new(nodes, cfg.side, range).expect("grid was validated");

    let state =
        settle(&topology, &cfg.weight_cfg, cfg.max_settle_rounds).expect("config was validated");
    let wca = wca_elect(&topology, &cfg.wca_cfg).expect("config was validated");

    ExperimentRow {
        n,
        range,
        run,
        waca_heads: state.head_count() as u32,
        waca_subheads: state.subhead_count() as u32,
        wca_heads: wca.head_count() as u32,
        settled: state.settled(),
        settle_rounds: state.rounds(),
    }
}

/// Groups rows by (n, range) and reports means with the population standard
/// deviation, ordered n ascending then range ascending.
pub fn aggregate(rows: &[ExperimentRow]) -> Vec<AggregateRow> {
    use std::collections::BTreeMap;
    // positive floats order identically to their bit patterns
    let mut groups: BTreeMap<(u32, u64), Vec<&ExperimentRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.n, row.range.to_bits()))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((n, range_bits), members)| {
            let stat = |select: &dyn Fn(&ExperimentRow) -> f64| {
                let values: Vec<f64> = members.iter().map(|r| select(r)).collect();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let var =
                    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
                (mean, var.sqrt())
            };
            let (waca_heads_mean, waca_heads_sd) = stat(&|r| r.waca_heads as f64);
            let (waca_subheads_mean, waca_subheads_sd) = stat(&|r| r.waca_subheads as f64);
            let (wca_heads_mean, wca_heads_sd) = stat(&|r| r.wca_heads as f64);
            AggregateRow {
                n,
                range: f64::from_bits(range_bits),
                waca_heads_mean,
                waca_heads_sd,
                waca_subheads_mean,
                waca_subheads_sd,
                wca_heads_mean,
                wca_heads_sd,
            }
        })
        .collect()
}

/// Average-rank Spearman correlation; 0 when either series is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    pearson(&ranks(xs), &ranks(ys))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[order[k]] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx).powi(2);
        vy += (y - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    // single sqrt keeps perfectly monotone tie-free data at exactly +-1
    cov / (vx * vy).sqrt()
}

/// Trend statistics per node count over the aggregate grid.
pub fn trend_checks(aggregates: &[AggregateRow]) -> TrendReport {
    use std::collections::BTreeSet;
    let ns: BTreeSet<u32> = aggregates.iter().map(|a| a.n).collect();
    let per_n = ns
        .into_iter()
        .map(|n| {
            let mut group: Vec<&AggregateRow> = aggregates.iter().filter(|a| a.n == n).collect();
            group.sort_by(|a, b| a.range.partial_cmp(&b.range).expect("finite range"));
            let ranges: Vec<f64> = group.iter().map(|a| a.range).collect();
            let heads: Vec<f64> = group.iter().map(|a| a.waca_heads_mean).collect();
            let wca: Vec<f64> = group.iter().map(|a| a.wca_heads_mean).collect();
            let subheads: Vec<f64> = group.iter().map(|a| a.waca_subheads_mean).collect();

            let below = group
                .iter()
                .filter(|a| a.waca_heads_mean <= a.wca_heads_mean)
                .count() as f64
                / group.len() as f64;

            // smallest range attaining the maximum
            let mut peak_idx = 0;
            for (i, &v) in subheads.iter().enumerate() {
                if v > subheads[peak_idx] {
                    peak_idx = i;
                }
            }

            TrendRow {
                n,
                heads_range_correlation: spearman(&ranges, &heads),
                waca_below_wca_fraction: below,
                waca_heads_grand_mean: heads.iter().sum::<f64>() / heads.len() as f64,
                wca_heads_grand_mean: wca.iter().sum::<f64>() / wca.len() as f64,
                subhead_peak_range: ranges[peak_idx],
                subhead_peak_mean: subheads[peak_idx],
                subheads_at_min_range: subheads[0],
                subheads_at_max_range: *subheads.last().expect("non-empty grid"),
            }
        })
        .collect();
    TrendReport { per_n }
}

pub const ROWS_CSV_HEADER: &str =
    "n,range,run,waca_heads,waca_subheads,wca_heads,settled,settle_rounds";
pub const AGGREGATE_CSV_HEADER: &str =
    "n,range,waca_heads_mean,waca_heads_sd,waca_subheads_mean,waca_subheads_sd,wca_heads_mean,wca_heads_sd";

fn write_echo<W: Write>(w: &mut W, cfg: &SweepConfig) -> io::Result<()> {
    for (key, value) in cfg.echo_lines() {
        writeln!(w, "# {key}={value}")?;
    }
    Ok(())
}

pub fn write_rows_csv<W: Write>(
    mut w: W,
    cfg: &SweepConfig,
    rows: &[ExperimentRow],
) -> io::Result<()> {
    write_echo(&mut w, cfg)?;
    writeln!(w, "{ROWS_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.range,
            r.run,
            r.waca_heads,
            r.waca_subheads,
            r.wca_heads,
            r.settled,
            r.settle_rounds
        )?;
    }
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(
    mut w: W,
    cfg: &SweepConfig,
    aggregates: &[AggregateRow],
) -> io::Result<()> {
    write_echo(&mut w, cfg)?;
    writeln!(w, "{AGGREGATE_CSV_HEADER}")?;
    for a in aggregates {
        writeln!(
            w,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            a.n,
            a.range,
            a.waca_heads_mean,
            a.waca_heads_sd,
            a.waca_subheads_mean,
            a.waca_subheads_sd,
            a.wca_heads_mean,
            a.wca_heads_sd
        )?;
    }
    Ok(())
}
