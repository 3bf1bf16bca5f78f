//! The five subcommands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use waca_core::dissemination::{disseminate_traced, ContentJob};
use waca_core::events::{apply_event, event_oracle, parse_event_script};
use waca_core::experiments::{aggregate, run_sweep_parallel, trend_checks, SweepConfig};
use waca_core::netmodel::NodeId;
use waca_core::waca::settle;
use waca_core::wca::wca_elect;

use crate::source::{
    out_path, parse_f64_list, parse_ranges, parse_u32_list, write_file, RunManifest,
    TopologySource, WcaFlags, WeightFlags,
};
use crate::CliError;

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    source: TopologySource,

    #[command(flatten)]
    weight: WeightFlags,

    /// Settled state JSON output.
    #[arg(long, value_name = "FILE")]
    state_out: Option<PathBuf>,

    /// Materialized topology JSON output.
    #[arg(long, value_name = "FILE")]
    topology_out: Option<PathBuf>,

    /// Optional DOT export with role coloring and head edges.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    manifest_out: Option<PathBuf>,
}

pub fn run_cluster(out_dir: &Path, args: ClusterArgs) -> Result<(), CliError> {
    let (topology, inputs, seed) = args.source.resolve()?;
    let cfg = args.weight.to_config()?;
    let state = settle(&topology, &cfg, args.weight.max_rounds)?;
    if !state.settled() {
        eprintln!(
            "warning: election did not settle within {} rounds",
            args.weight.max_rounds
        );
    }

    let state_path = out_path(out_dir, &args.state_out, "state.json");
    let topology_path = out_path(out_dir, &args.topology_out, "topology.json");
    write_file(&state_path, &state.to_json())?;
    write_file(&topology_path, &topology.to_json())?;
    let mut outputs = BTreeMap::from([
        ("state".to_string(), state_path.display().to_string()),
        ("topology".to_string(), topology_path.display().to_string()),
    ]);
    if let Some(dot) = &args.dot {
        write_file(dot, &state.to_dot(&topology))?;
        outputs.insert("dot".into(), dot.display().to_string());
    }

    let manifest = RunManifest {
        subcommand: "cluster".into(),
        seed,
        config: serde_json::json!({
            "source": args.source.describe(),
            "weight_cfg": cfg,
            "max_rounds": args.weight.max_rounds,
        }),
        inputs,
        outputs,
    };
    manifest.write(&out_path(out_dir, &args.manifest_out, "manifest.json"))?;

    println!(
        "clusterheads: {}  sub-heads: {}  slaves: {}  rounds: {}  -> {}",
        state.head_count(),
        state.subhead_count(),
        state.count_role(waca_core::Role::Slave),
        state.rounds(),
        state_path.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    source: TopologySource,

    #[command(flatten)]
    weight: WeightFlags,

    #[command(flatten)]
    wca: WcaFlags,

    /// Comparison JSON output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Optional settled state export for the weighted election.
    #[arg(long, value_name = "FILE")]
    waca_state_out: Option<PathBuf>,

    /// Optional baseline export (same state schema, roles CH/SL only).
    #[arg(long, value_name = "FILE")]
    wca_state_out: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    manifest_out: Option<PathBuf>,
}

pub fn run_compare(out_dir: &Path, args: CompareArgs) -> Result<(), CliError> {
    let (topology, inputs, seed) = args.source.resolve()?;
    let cfg = args.weight.to_config()?;
    let wca_cfg = args.wca.to_config(cfg.ideal_degree)?;

    let state = settle(&topology, &cfg, args.weight.max_rounds)?;
    let baseline = wca_elect(&topology, &wca_cfg)?;

    let comparison = serde_json::json!({
        "waca": {
            "heads": state.head_count(),
            "subheads": state.subhead_count(),
            "slaves": state.count_role(waca_core::Role::Slave),
            "settled": state.settled(),
            "rounds": state.rounds(),
        },
        "wca": {
            "heads": baseline.head_count(),
        },
    });
    let out = out_path(out_dir, &args.out, "comparison.json");
    write_file(
        &out,
        &serde_json::to_string_pretty(&comparison).expect("serializes"),
    )?;
    let mut outputs = BTreeMap::from([("comparison".to_string(), out.display().to_string())]);
    if let Some(path) = &args.waca_state_out {
        write_file(path, &state.to_json())?;
        outputs.insert("waca_state".into(), path.display().to_string());
    }
    if let Some(path) = &args.wca_state_out {
        write_file(path, &baseline.to_state().to_json())?;
        outputs.insert("wca_state".into(), path.display().to_string());
    }

    let manifest = RunManifest {
        subcommand: "compare".into(),
        seed,
        config: serde_json::json!({
            "source": args.source.describe(),
            "weight_cfg": cfg,
            "wca_cfg": wca_cfg,
            "max_rounds": args.weight.max_rounds,
        }),
        inputs,
        outputs,
    };
    manifest.write(&out_path(out_dir, &args.manifest_out, "manifest.json"))?;

    println!(
        "waca heads: {}  wca heads: {}  -> {}",
        state.head_count(),
        baseline.head_count(),
        out.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Sweep config JSON; missing fields take the built-in defaults and
    /// flags override the file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Node counts, comma separated.
    #[arg(long, value_name = "N,N,...")]
    nodes: Option<String>,

    /// Ranges: comma list or `start:end:step`.
    #[arg(long, value_name = "SPEC")]
    ranges: Option<String>,

    /// Runs per grid cell.
    #[arg(long)]
    runs: Option<u32>,

    /// Base seed for the per-cell substreams.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    side: Option<f64>,

    /// Weighing factors `power,signal,clustering,degree,stability`.
    #[arg(long, value_name = "F,F,F,F,F")]
    weights: Option<String>,

    #[arg(long)]
    ideal_degree: Option<u32>,

    /// WCA factors `degree,distance,mobility,service`.
    #[arg(long, value_name = "F,F,F,F")]
    wca_factors: Option<String>,

    /// Power model (`const:<v>` | `uniform:<lo>:<hi>`).
    #[arg(long)]
    power: Option<String>,

    /// Signal model (`const:<v>` | `uniform` | `stations:...`).
    #[arg(long)]
    signal: Option<String>,

    #[arg(long)]
    max_settle_rounds: Option<u32>,

    /// Worker threads for the sweep.
    #[arg(long, value_name = "K")]
    parallel: Option<usize>,

    #[arg(long, value_name = "FILE")]
    rows_out: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    aggregate_out: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    trends_out: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    manifest_out: Option<PathBuf>,
}

impl ExperimentArgs {
    /// defaults < config file < flags
    fn resolve_config(&self) -> Result<(SweepConfig, BTreeMap<String, String>), CliError> {
        let mut inputs = BTreeMap::new();
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                inputs.insert("config".into(), path.display().to_string());
                serde_json::from_str::<SweepConfig>(&text)
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
            }
            None => SweepConfig::default(),
        };
        if let Some(nodes) = &self.nodes {
            cfg.node_counts = parse_u32_list(nodes)?;
        }
        if let Some(ranges) = &self.ranges {
            cfg.ranges = parse_ranges(ranges)?;
        }
        if let Some(runs) = self.runs {
            cfg.runs = runs;
        }
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(side) = self.side {
            cfg.side = side;
        }
        if let Some(spec) = &self.weights {
            let parts = parse_f64_list(spec)?;
            if parts.len() != 5 {
                return Err(CliError::Usage("--weights needs 5 factors".into()));
            }
            cfg.weight_cfg.power_factor = parts[0];
            cfg.weight_cfg.signal_factor = parts[1];
            cfg.weight_cfg.clustering_factor = parts[2];
            cfg.weight_cfg.degree_factor = parts[3];
            cfg.weight_cfg.stability_factor = parts[4];
        }
        if let Some(ideal) = self.ideal_degree {
            cfg.weight_cfg.ideal_degree = ideal;
            cfg.wca_cfg.ideal_degree = ideal;
        }
        if let Some(spec) = &self.wca_factors {
            let parts = parse_f64_list(spec)?;
            if parts.len() != 4 {
                return Err(CliError::Usage("--wca-factors needs 4 factors".into()));
            }
            cfg.wca_cfg.degree_factor = parts[0];
            cfg.wca_cfg.distance_factor = parts[1];
            cfg.wca_cfg.mobility_factor = parts[2];
            cfg.wca_cfg.service_factor = parts[3];
        }
        if let Some(power) = &self.power {
            cfg.power_model = power.parse()?;
        }
        if let Some(signal) = &self.signal {
            cfg.signal_model = signal.parse()?;
        }
        if let Some(cap) = self.max_settle_rounds {
            cfg.max_settle_rounds = cap;
        }
        cfg.validate()?;
        Ok((cfg, inputs))
    }
}

pub fn run_experiment(out_dir: &Path, args: ExperimentArgs) -> Result<(), CliError> {
    let (cfg, inputs) = args.resolve_config()?;

    let rows = run_sweep_parallel(&cfg, args.parallel)?;
    let aggregates = aggregate(&rows);
    let trends = trend_checks(&aggregates);

    let rows_path = out_path(out_dir, &args.rows_out, "rows.csv");
    let aggregate_path = out_path(out_dir, &args.aggregate_out, "aggregate.csv");
    let trends_path = out_path(out_dir, &args.trends_out, "trends.json");

    let mut rows_buf = Vec::new();
    waca_core::experiments::write_rows_csv(&mut rows_buf, &cfg, &rows)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(
        &rows_path,
        &String::from_utf8(rows_buf).expect("csv is utf-8"),
    )?;

    let mut agg_buf = Vec::new();
    waca_core::experiments::write_aggregate_csv(&mut agg_buf, &cfg, &aggregates)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(
        &aggregate_path,
        &String::from_utf8(agg_buf).expect("csv is utf-8"),
    )?;

    let trends_doc = serde_json::json!({
        "config": cfg,
        "per_n": trends.per_n,
    });
    write_file(
        &trends_path,
        &serde_json::to_string_pretty(&trends_doc).expect("serializes"),
    )?;

    let unsettled = rows.iter().filter(|r| !r.settled).count();
    if unsettled > 0 {
        eprintln!("warning: {unsettled} cells did not settle; see the settled column");
    }

    let manifest = RunManifest {
        subcommand: "experiment".into(),
        seed: cfg.base_seed,
        config: serde_json::to_value(&cfg).expect("serializes"),
        inputs,
        outputs: BTreeMap::from([
            ("rows".to_string(), rows_path.display().to_string()),
            (
                "aggregate".to_string(),
                aggregate_path.display().to_string(),
            ),
            ("trends".to_string(), trends_path.display().to_string()),
        ]),
    };
    manifest.write(&out_path(out_dir, &args.manifest_out, "manifest.json"))?;

    println!(
        "{} rows over {} cells -> {}",
        rows.len(),
        aggregates.len(),
        rows_path.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct DisseminateArgs {
    #[command(flatten)]
    source: TopologySource,

    #[command(flatten)]
    weight: WeightFlags,

    /// Settled state JSON; when omitted the election runs on the fly.
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,

    /// Number of chunks the file is split into.
    #[arg(long)]
    chunks: u32,

    /// Interested device ids, comma separated, or `all`.
    #[arg(long, value_name = "IDS|all")]
    interested: String,

    /// Chunks the backbone pushes per injection point per round.
    #[arg(long, default_value_t = 1)]
    uplink_rate: u32,

    /// Transmissions per device per round.
    #[arg(long, default_value_t = 1)]
    adhoc_rate: u32,

    /// Cap on injection points per partition (lowest ids kept).
    #[arg(long)]
    max_injection_points: Option<usize>,

    /// Seed recorded for the run; the baseline schedule is deterministic.
    #[arg(long, default_value_t = 0)]
    job_seed: u64,

    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,

    /// Per-round trace as line-delimited JSON events.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    manifest_out: Option<PathBuf>,
}

pub fn run_disseminate(out_dir: &Path, args: DisseminateArgs) -> Result<(), CliError> {
    let (topology, mut inputs, seed) = args.source.resolve()?;
    let cfg = args.weight.to_config()?;
    let state = match &args.state {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            inputs.insert("state".into(), path.display().to_string());
            waca_core::ClusteringState::from_json(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        }
        None => settle(&topology, &cfg, args.weight.max_rounds)?,
    };

    let interested: BTreeSet<NodeId> = if args.interested.trim() == "all" {
        topology.nodes().iter().map(|n| n.id).collect()
    } else {
        parse_u32_list(&args.interested)?.into_iter().collect()
    };
    if interested.is_empty() {
        return Err(CliError::Usage(
            "the interested set must not be empty".into(),
        ));
    }

    let job = ContentJob {
        chunk_count: args.chunks,
        interested,
        uplink_rate: args.uplink_rate,
        adhoc_rate: args.adhoc_rate,
        max_injection_points: args.max_injection_points,
    };
    let (report, trace) = disseminate_traced(&topology, &state, &job, args.job_seed)?;

    if !report.unreached.is_empty() {
        eprintln!(
            "warning: {} interested device(s) unreached: {:?}",
            report.unreached.len(),
            report.unreached
        );
    }

    let report_path = out_path(out_dir, &args.report_out, "report.json");
    write_file(
        &report_path,
        &serde_json::to_string_pretty(&report).expect("serializes"),
    )?;
    let mut outputs = BTreeMap::from([("report".to_string(), report_path.display().to_string())]);
    if let Some(trace_path) = &args.trace {
        let mut lines = String::new();
        for event in &trace {
            lines.push_str(&serde_json::to_string(event).expect("serializes"));
            lines.push('\n');
        }
        write_file(trace_path, &lines)?;
        outputs.insert("trace".into(), trace_path.display().to_string());
    }

    let manifest = RunManifest {
        subcommand: "disseminate".into(),
        seed,
        config: serde_json::json!({
            "source": args.source.describe(),
            "weight_cfg": cfg,
            "max_rounds": args.weight.max_rounds,
            "job": job,
            "job_seed": args.job_seed,
        }),
        inputs,
        outputs,
    };
    manifest.write(&out_path(out_dir, &args.manifest_out, "manifest.json"))?;

    println!(
        "rounds: {}  uplink: {}  adhoc: {}  complete: {}  -> {}",
        report.rounds,
        report.uplink_transmissions,
        report.adhoc_transmissions,
        report.complete,
        report_path.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct EventsArgs {
    #[command(flatten)]
    source: TopologySource,

    #[command(flatten)]
    weight: WeightFlags,

    /// Event script: one JSON event per line.
    #[arg(long, value_name = "FILE")]
    script: PathBuf,

    /// Check every incremental result against a from-scratch re-election.
    #[arg(long)]
    verify: bool,

    #[arg(long, value_name = "FILE")]
    timeline_out: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    manifest_out: Option<PathBuf>,
}

pub fn run_events(out_dir: &Path, args: EventsArgs) -> Result<(), CliError> {
    let (mut topology, mut inputs, seed) = args.source.resolve()?;
    let cfg = args.weight.to_config()?;
    let script_text = fs::read_to_string(&args.script)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.script.display())))?;
    let events = parse_event_script(&script_text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", args.script.display())))?;
    inputs.insert("script".into(), args.script.display().to_string());

    let mut state = settle(&topology, &cfg, args.weight.max_rounds)?;
    let mut timeline = vec![serde_json::json!({
        "event": serde_json::Value::Null,
        "settled": state.settled(),
        "state": state.to_json_value(),
    })];

    for (index, event) in events.iter().enumerate() {
        let (next_topology, next_state) =
            apply_event(&topology, &state, event, &cfg, args.weight.max_rounds)
                .map_err(|e| CliError::Parse(format!("event {}: {e}", index + 1)))?;
        if args.verify {
            let (_, oracle) = event_oracle(&topology, &state, event, &cfg, args.weight.max_rounds)?;
            if !next_state.settled() && !oracle.settled() {
                // the equivalence contract presumes quiescence; a capped run
                // is reported, not treated as divergence
                eprintln!(
                    "warning: event {}: round cap hit before quiescence, skipping verification",
                    index + 1
                );
            } else if !next_state.same_clustering(&oracle) {
                return Err(CliError::Internal(format!(
                    "event {}: incremental update diverged from full recomputation",
                    index + 1
                )));
            }
        }
        topology = next_topology;
        state = next_state;
        timeline.push(serde_json::json!({
            "event": event,
            "settled": state.settled(),
            "state": state.to_json_value(),
        }));
    }

    let doc = serde_json::json!({
        "timeline": timeline,
        "final_topology": topology.to_json_value(),
    });
    let timeline_path = out_path(out_dir, &args.timeline_out, "timeline.json");
    write_file(
        &timeline_path,
        &serde_json::to_string_pretty(&doc).expect("serializes"),
    )?;

    let manifest = RunManifest {
        subcommand: "events".into(),
        seed,
        config: serde_json::json!({
            "source": args.source.describe(),
            "weight_cfg": cfg,
            "max_rounds": args.weight.max_rounds,
            "verify": args.verify,
        }),
        inputs,
        outputs: BTreeMap::from([("timeline".to_string(), timeline_path.display().to_string())]),
    };
    manifest.write(&out_path(out_dir, &args.manifest_out, "manifest.json"))?;

    println!(
        "{} event(s) applied, {} timeline entries -> {}",
        events.len(),
        timeline.len(),
        timeline_path.display()
    );
    Ok(())
}
