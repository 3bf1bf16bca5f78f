//! One-shot WCA clusterhead election, the comparison baseline.
//!
//! WCA scores each node by how far its degree is from the ideal and by the
//! summed distances to its neighbors (mobility and service-time terms vanish
//! in this static one-shot setting), then greedily picks the uncovered node
//! with the lowest score as a clusterhead until every node is covered. The
//! result is a dominating set with 1-hop clusters: each non-head is assigned
//! to an adjacent head.
//!
//! Only the one-shot election is modeled; WCA's on-demand update and
//! detachment monitoring play no part in the static head-count comparison.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{NodeId, Topology};
use crate::waca::ClusteringState;

/// Weighing factors of the WCA score. Defaults follow the usual
/// parameterization (0.7, 0.2, 0.05, 0.05) with the same ideal degree as the
/// WACA configuration for a like-for-like comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WcaConfig {
    /// Factor on |degree - ideal_degree|.
    pub degree_factor: f64,
    /// Factor on the sum of distances to all neighbors.
    pub distance_factor: f64,
    /// Factor on node speed; the static setting has no movement, so the term
    /// is zero.
    pub mobility_factor: f64,
    /// Factor on cumulative head service time; zero in a one-shot election.
    pub service_factor: f64,
    pub ideal_degree: u32,
}

impl Default for WcaConfig {
    fn default() -> Self {
        WcaConfig {
            degree_factor: 0.7,
            distance_factor: 0.2,
            mobility_factor: 0.05,
            service_factor: 0.05,
            ideal_degree: 7,
        }
    }
}

impl WcaConfig {
    pub fn validate(&self) -> Result<()> {
        let factors = [
            ("degree_factor", self.degree_factor),
            ("distance_factor", self.distance_factor),
            ("mobility_factor", self.mobility_factor),
            ("service_factor", self.service_factor),
        ];
        for (name, value) in factors {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(format!("{name} must be >= 0, got {value}")));
            }
        }
        if self.ideal_degree < 1 {
            return Err(Error::config("ideal_degree must be >= 1"));
        }
        Ok(())
    }
}

/// WCA score of one node; lower scores make better clusterheads.
pub fn wca_weight(topology: &Topology, id: NodeId, cfg: &WcaConfig) -> Result<f64> {
    let node = topology.node(id)?;
    let neighbors = topology.neighbors(id)?;
    let degree_diff = (neighbors.len() as f64 - cfg.ideal_degree as f64).abs();
    let distance_sum: f64 = neighbors
        .iter()
        .map(|&nb| node.distance(topology.node(nb).expect("adjacency refers to known nodes")))
        .sum();
    // speed and head service time are 0 here
    Ok(cfg.degree_factor * degree_diff + cfg.distance_factor * distance_sum)
}

/// Result of a WCA election: the head set and the 1-hop assignment (heads
/// map to themselves).
#[derive(Debug, Clone, PartialEq)]
pub struct WcaClustering {
    weights: BTreeMap<NodeId, f64>,
    heads: BTreeSet<NodeId>,
    assignment: BTreeMap<NodeId, NodeId>,
}

impl WcaClustering {
    pub fn weights(&self) -> &BTreeMap<NodeId, f64> {
        &self.weights
    }

    pub fn heads(&self) -> &BTreeSet<NodeId> {
        &self.heads
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn is_head(&self, id: NodeId) -> bool {
        self.heads.contains(&id)
    }

    /// Assigned head of every node; heads point at themselves.
    pub fn assignment(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.assignment
    }

    /// View as a clustering state so the JSON and DOT exports match the
    /// WACA ones (roles come out as CH/SL only).
    pub fn to_state(&self) -> ClusteringState {
        ClusteringState::from_parts(
            self.weights.clone(),
            self.assignment.clone(),
            BTreeMap::new(),
            0,
            true,
            0,
        )
    }
}

/// Greedy dominating-set election: repeatedly take the uncovered node with
/// the minimum score (ties to the lowest id) as a clusterhead; it covers
/// itself and adopts its uncovered neighbors as 1-hop slaves.
pub fn wca_elect(topology: &Topology, cfg: &WcaConfig) -> Result<WcaClustering> {
    cfg.validate()?;
    let mut weights = BTreeMap::new();
    for node in topology.nodes() {
        weights.insert(node.id, wca_weight(topology, node.id, cfg)?);
    }

    let mut uncovered: BTreeSet<NodeId> = topology.nodes().iter().map(|n| n.id).collect();
    let mut heads = BTreeSet::new();
    let mut assignment = BTreeMap::new();

    while !uncovered.is_empty() {
        // ascending id iteration makes the lowest id win ties
        let head = uncovered
            .iter()
            .copied()
            .min_by(|a, b| {
                weights[a]
                    .partial_cmp(&weights[b])
                    .expect("weights are finite")
            })
            .expect("uncovered set is nonempty");
        heads.insert(head);
        assignment.insert(head, head);
        uncovered.remove(&head);
        for &nb in topology.neighbors(head).expect("known node") {
            if uncovered.remove(&nb) {
                assignment.insert(nb, head);
            }
        }
    }

    Ok(WcaClustering {
        weights,
        heads,
        assignment,
    })
}
