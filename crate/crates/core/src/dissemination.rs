//! Chunked content distribution over the cluster hierarchy.
//!
//! The backbone splits a file into chunks and injects them concurrently to
//! the clusterheads of every partition holding interested devices, assigning
//! chunks round-robin across the partition's injection points. Devices then
//! exchange chunks with neighbors in synchronous rounds: interested devices
//! and the nodes on their head chains relay, other devices stay silent.
//!
//! The schedule is fully deterministic: per round, injection points receive
//! in ascending id order and transmissions fire in (sender id, receiver id,
//! chunk index) order, with at most one scheduled delivery per (receiver,
//! chunk) pair per round.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{NodeId, Topology};
use crate::waca::{ClusteringState, Role};

/// One content distribution task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentJob {
    /// Number of chunks the backbone splits the file into.
    pub chunk_count: u32,
    /// Devices that registered interest in the content.
    pub interested: BTreeSet<NodeId>,
    /// Chunks the backbone can push to each injection point per round.
    pub uplink_rate: u32,
    /// Transmissions each device may make per round.
    pub adhoc_rate: u32,
    /// Optional cap on injection points per partition (lowest ids kept);
    /// used to compare against forced single-injection runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_injection_points: Option<usize>,
}

impl ContentJob {
    pub fn new(chunk_count: u32, interested: BTreeSet<NodeId>) -> Self {
        ContentJob {
            chunk_count,
            interested,
            uplink_rate: 1,
            adhoc_rate: 1,
            max_injection_points: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_count < 1 {
            return Err(Error::config("chunk_count must be >= 1"));
        }
        if self.interested.is_empty() {
            return Err(Error::config("interested set must not be empty"));
        }
        if self.uplink_rate < 1 || self.adhoc_rate < 1 {
            return Err(Error::config("uplink_rate and adhoc_rate must be >= 1"));
        }
        if self.max_injection_points == Some(0) {
            return Err(Error::config("max_injection_points must be >= 1 when set"));
        }
        Ok(())
    }
}

/// Outcome of a dissemination run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisseminationReport {
    /// Rounds executed until completion or until no progress was possible.
    pub rounds: u32,
    /// Whether every interested device ended up holding all chunks.
    pub complete: bool,
    pub uplink_transmissions: u64,
    pub adhoc_transmissions: u64,
    pub injection_points: BTreeSet<NodeId>,
    /// Interested devices that never completed (unknown ids included).
    pub unreached: BTreeSet<NodeId>,
}

/// One transmission in the per-round trace log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub round: u32,
    pub kind: TraceKind,
    /// Sender id; `None` marks a backbone injection.
    pub from: Option<NodeId>,
    pub to: NodeId,
    pub chunk: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Inject,
    Forward,
}

/// All full clusterheads whose partition contains at least one interested
/// device. Multiple injection points per partition are kept on purpose:
/// concurrent injection is what shortens the uplink phase.
pub fn select_injection_points(
    topology: &Topology,
    state: &ClusteringState,
    job: &ContentJob,
) -> BTreeSet<NodeId> {
    let mut points = BTreeSet::new();
    for part in topology.partitions() {
        if part.iter().any(|id| job.interested.contains(id)) {
            points.extend(
                part.iter()
                    .copied()
                    .filter(|id| state.role(*id) == Some(Role::Clusterhead)),
            );
        }
    }
    points
}

/// Runs the dissemination and returns the report; see [`disseminate_traced`]
/// for the per-round transmission log.
///
/// The seed is recorded for reproducibility but the baseline schedule is
/// already deterministic and does not consume it.
pub fn disseminate(
    topology: &Topology,
    state: &ClusteringState,
    job: &ContentJob,
    seed: u64,
) -> Result<DisseminationReport> {
    Ok(disseminate_traced(topology, state, job, seed)?.0)
}

pub fn disseminate_traced(
    topology: &Topology,
    state: &ClusteringState,
    job: &ContentJob,
    _seed: u64,
) -> Result<(DisseminationReport, Vec<TraceEvent>)> {
    job.validate()?;
    let chunks = job.chunk_count as usize;

    let present: BTreeSet<NodeId> = job
        .interested
        .iter()
        .copied()
        .filter(|id| topology.contains(*id))
        .collect();
    let missing: BTreeSet<NodeId> = job.interested.difference(&present).copied().collect();

    // injection points, capped per partition
    let mut injection_points = BTreeSet::new();
    let mut queues: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
    for part in topology.partitions() {
        if !part.iter().any(|id| present.contains(id)) {
            continue;
        }
        let mut heads: Vec<NodeId> = part
            .iter()
            .copied()
            .filter(|id| state.role(*id) == Some(Role::Clusterhead))
            .collect();
        if let Some(cap) = job.max_injection_points {
            heads.truncate(cap);
        }
        // chunk j goes to the (j mod m)-th injection point of the partition
        for (slot, &head) in heads.iter().enumerate() {
            let assigned: Vec<u32> = (0..job.chunk_count)
                .filter(|j| *j as usize % heads.len() == slot)
                .collect();
            queues.insert(head, assigned);
        }
        injection_points.extend(heads);
    }

    if injection_points.is_empty() {
        return Ok((
            DisseminationReport {
                rounds: 0,
                complete: false,
                uplink_transmissions: 0,
                adhoc_transmissions: 0,
                injection_points,
                unreached: job.interested.clone(),
            },
            Vec::new(),
        ));
    }

    // participants: interested devices, their head chains, and the injection
    // points themselves
    let mut participants: BTreeSet<NodeId> = injection_points.clone();
    for &id in &present {
        participants.extend(state.head_chain(id)?);
    }

    let mut holdings: BTreeMap<NodeId, Vec<bool>> = participants
        .iter()
        .map(|&id| (id, vec![false; chunks]))
        .collect();
    let mut cursors: BTreeMap<NodeId, usize> = queues.keys().map(|&id| (id, 0)).collect();

    let complete_now = |holdings: &BTreeMap<NodeId, Vec<bool>>| {
        present.iter().all(|id| holdings[id].iter().all(|h| *h))
    };

    let mut trace = Vec::new();
    let mut rounds = 0u32;
    let mut uplink = 0u64;
    let mut adhoc = 0u64;

    while !present.is_empty() && !complete_now(&holdings) {
        let round = rounds + 1;
        let mut progress = false;

        // phase 1: backbone pushes up to uplink_rate queued chunks per point
        for (&point, queue) in &queues {
            let cursor = cursors.get_mut(&point).expect("cursor per queue");
            let take = (job.uplink_rate as usize).min(queue.len() - *cursor);
            for &chunk in &queue[*cursor..*cursor + take] {
                holdings.get_mut(&point).expect("points participate")[chunk as usize] = true;
                uplink += 1;
                progress = true;
                trace.push(TraceEvent {
                    round,
                    kind: TraceKind::Inject,
                    from: None,
                    to: point,
                    chunk,
                });
            }
            *cursor += take;
        }

        // phase 2: holders transmit to participating neighbors missing the
        // chunk; deliveries land at the end of the round
        let mut scheduled: BTreeSet<(NodeId, u32)> = BTreeSet::new();
        let mut deliveries: Vec<(NodeId, NodeId, u32)> = Vec::new();
        for &sender in &participants {
            if !holdings[&sender].iter().any(|h| *h) {
                continue;
            }
            let mut budget = job.adhoc_rate;
            'receivers: for &receiver in topology.neighbors(sender).expect("participants exist") {
                if !participants.contains(&receiver) {
                    continue;
                }
                for chunk in 0..job.chunk_count {
                    if budget == 0 {
                        break 'receivers;
                    }
                    if holdings[&sender][chunk as usize]
                        && !holdings[&receiver][chunk as usize]
                        && !scheduled.contains(&(receiver, chunk))
                    {
                        scheduled.insert((receiver, chunk));
                        deliveries.push((sender, receiver, chunk));
                        budget -= 1;
                    }
                }
            }
        }
        for &(from, to, chunk) in &deliveries {
            holdings.get_mut(&to).expect("receivers participate")[chunk as usize] = true;
            adhoc += 1;
            progress = true;
            trace.push(TraceEvent {
                round,
                kind: TraceKind::Forward,
                from: Some(from),
                to,
                chunk,
            });
        }

        if !progress {
            break; // stalled: some interested devices are unreachable
        }
        rounds = round;
    }

    let mut unreached = missing;
    for &id in &present {
        if !holdings[&id].iter().all(|h| *h) {
            unreached.insert(id);
        }
    }

    let report = DisseminationReport {
        rounds,
        complete: unreached.is_empty(),
        uplink_transmissions: uplink,
        adhoc_transmissions: adhoc,
        injection_points,
        unreached,
    };
    Ok((report, trace))
}
