//! WACA weight function and local clusterhead election.
//!
//! Each device combines five terms into a weight: power appropriateness,
//! backbone signal strength, local clustering coefficient, distance to the
//! ideal degree, and a stability bonus for sitting clusterheads whose
//! neighborhood barely changed. Every device then elects, among itself and
//! its neighbors, the device with the strictly highest weight. Chains of
//! such elections end at self-electing devices, the full clusterheads;
//! intermediate elected devices are sub-heads.
//!
//! [`settle`] iterates weight recomputation and election synchronously until
//! a fixed point, resolving the feedback between the stability term and the
//! election outcome: each round recomputes weights using the previous
//! round's clusterhead set and neighborhood snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{NodeId, Topology};

/// Power ratio at and below which the power term is undefined and the
/// configured floor is substituted.
const POWER_CUTOFF: f64 = 0.6;

/// Weighing factors for the five weight terms plus the numeric guards of the
/// power term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightConfig {
    /// Factor on the power-appropriateness term.
    pub power_factor: f64,
    /// Factor on the backbone signal strength.
    pub signal_factor: f64,
    /// Factor on the local clustering coefficient.
    pub clustering_factor: f64,
    /// Factor on the ideal-degree difference term.
    pub degree_factor: f64,
    /// Factor on the neighborhood stability term.
    pub stability_factor: f64,
    /// Neighbor count the clusterhead's link layer handles best.
    pub ideal_degree: u32,
    /// Base of the logarithm in the power term.
    pub log_base: f64,
    /// Value substituted when the power term is undefined or falls below it.
    pub power_floor: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            power_factor: 0.9,
            signal_factor: 1.0,
            clustering_factor: 0.85,
            degree_factor: 0.65,
            stability_factor: 0.6,
            ideal_degree: 7,
            log_base: 10.0,
            power_floor: 0.0,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        let factors = [
            ("power_factor", self.power_factor),
            ("signal_factor", self.signal_factor),
            ("clustering_factor", self.clustering_factor),
            ("degree_factor", self.degree_factor),
            ("stability_factor", self.stability_factor),
        ];
        for (name, value) in factors {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(format!("{name} must be >= 0, got {value}")));
            }
        }
        if self.ideal_degree < 1 {
            return Err(Error::config("ideal_degree must be >= 1"));
        }
        if !self.log_base.is_finite() || self.log_base <= 1.0 {
            return Err(Error::config(format!(
                "log_base must be > 1, got {}",
                self.log_base
            )));
        }
        Ok(())
    }
}

/// Role a device ends up with after election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    /// Elects itself; top of a head chain.
    #[serde(rename = "CH")]
    Clusterhead,
    /// Elects another device and is elected by at least one device.
    #[serde(rename = "SH")]
    SubHead,
    /// Elects another device and is elected by nobody.
    #[serde(rename = "SL")]
    Slave,
}

/// Serialized form of a clustering state.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateDoc {
    weights: BTreeMap<NodeId, f64>,
    heads: BTreeMap<NodeId, NodeId>,
    roles: BTreeMap<NodeId, Role>,
    beacons: u64,
}

/// Outcome of an election: per-device weight, elected head, derived role,
/// the neighborhood snapshots of sitting clusterheads, and beacon
/// accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringState {
    weights: BTreeMap<NodeId, f64>,
    heads: BTreeMap<NodeId, NodeId>,
    roles: BTreeMap<NodeId, Role>,
    /// Neighborhood of each clusterhead, frozen at the moment it last became
    /// one; discarded when it loses the role.
    head_memory: BTreeMap<NodeId, BTreeSet<NodeId>>,
    beacons: u64,
    settled: bool,
    rounds: u32,
}

impl ClusteringState {
    /// Empty state with no elections run.
    pub fn empty() -> Self {
        ClusteringState {
            weights: BTreeMap::new(),
            heads: BTreeMap::new(),
            roles: BTreeMap::new(),
            head_memory: BTreeMap::new(),
            beacons: 0,
            settled: false,
            rounds: 0,
        }
    }

    /// State carrying precomputed weights, ready for [`elect`].
    pub fn with_weights(weights: BTreeMap<NodeId, f64>) -> Self {
        ClusteringState {
            weights,
            ..ClusteringState::empty()
        }
    }

    pub fn weight(&self, id: NodeId) -> Option<f64> {
        self.weights.get(&id).copied()
    }

    pub fn weights(&self) -> &BTreeMap<NodeId, f64> {
        &self.weights
    }

    pub fn head(&self, id: NodeId) -> Option<NodeId> {
        self.heads.get(&id).copied()
    }

    pub fn heads(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.heads
    }

    pub fn role(&self, id: NodeId) -> Option<Role> {
        self.roles.get(&id).copied()
    }

    pub fn roles(&self) -> &BTreeMap<NodeId, Role> {
        &self.roles
    }

    /// Neighborhood snapshots of the sitting clusterheads.
    pub fn head_memory(&self) -> &BTreeMap<NodeId, BTreeSet<NodeId>> {
        &self.head_memory
    }

    pub fn beacons(&self) -> u64 {
        self.beacons
    }

    pub fn settled(&self) -> bool {
        self.settled
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn clusterheads(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roles
            .iter()
            .filter(|(_, r)| **r == Role::Clusterhead)
            .map(|(id, _)| *id)
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.roles.values().filter(|r| **r == role).count()
    }

    pub fn head_count(&self) -> usize {
        self.count_role(Role::Clusterhead)
    }

    pub fn subhead_count(&self) -> usize {
        self.count_role(Role::SubHead)
    }

    /// Head chain starting at `id`, ending at the self-electing device.
    /// Walks at most n hops; a longer walk would mean a cycle, which the
    /// election rule rules out.
    pub fn head_chain(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let mut chain = vec![id];
        let mut current = id;
        loop {
            let next = self.head(current).ok_or(Error::UnknownNode(current))?;
            if next == current {
                return Ok(chain);
            }
            chain.push(next);
            if chain.len() > self.heads.len() {
                return Err(Error::config(format!(
                    "head chain from {id} does not terminate"
                )));
            }
            current = next;
        }
    }

    /// True when both states describe the same clustering: identical
    /// weights, heads, roles, and clusterhead snapshots. Beacon and round
    /// counters are bookkeeping and not compared.
    pub fn same_clustering(&self, other: &ClusteringState) -> bool {
        self.weights == other.weights
            && self.heads == other.heads
            && self.roles == other.roles
            && self.head_memory == other.head_memory
    }

    /// JSON export: `{weights, heads, roles, beacons}`.
    pub fn to_json(&self) -> String {
        let doc = StateDoc {
            weights: self.weights.clone(),
            heads: self.heads.clone(),
            roles: self.roles.clone(),
            beacons: self.beacons,
        };
        serde_json::to_string_pretty(&doc).expect("state serializes")
    }

    /// Same document as [`ClusteringState::to_json`], as a JSON value for
    /// embedding into larger documents.
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = StateDoc {
            weights: self.weights.clone(),
            heads: self.heads.clone(),
            roles: self.roles.clone(),
            beacons: self.beacons,
        };
        serde_json::to_value(doc).expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<ClusteringState> {
        let doc: StateDoc = serde_json::from_str(s).map_err(Error::parse)?;
        Ok(ClusteringState {
            weights: doc.weights,
            heads: doc.heads.clone(),
            roles: doc.roles,
            head_memory: BTreeMap::new(),
            beacons: doc.beacons,
            settled: true,
            rounds: 0,
        })
    }

    /// DOT export: roles colored distinctly, head choices drawn as directed
    /// edges on top of the plain adjacency.
    pub fn to_dot(&self, topology: &Topology) -> String {
        let mut out = String::from("digraph clustering {\n  node [shape=circle, style=filled];\n");
        for node in topology.nodes() {
            let color = match self.role(node.id) {
                Some(Role::Clusterhead) => "gold",
                Some(Role::SubHead) => "orange",
                Some(Role::Slave) => "gray85",
                None => "white",
            };
            writeln!(
                out,
                "  {} [label=\"{}\", fillcolor=\"{}\", pos=\"{:.3},{:.3}!\"];",
                node.id, node.id, color, node.x, node.y
            )
            .expect("write to string");
        }
        for node in topology.nodes() {
            for &nb in topology.neighbors(node.id).expect("node from topology") {
                if nb > node.id {
                    writeln!(out, "  {} -> {} [dir=none, color=gray70];", node.id, nb)
                        .expect("write to string");
                }
            }
        }
        for (&id, &head) in &self.heads {
            if head != id {
                writeln!(out, "  {id} -> {head} [color=red, penwidth=2];")
                    .expect("write to string");
            }
        }
        out.push_str("}\n");
        out
    }

    pub(crate) fn from_parts(
        weights: BTreeMap<NodeId, f64>,
        heads: BTreeMap<NodeId, NodeId>,
        head_memory: BTreeMap<NodeId, BTreeSet<NodeId>>,
        beacons: u64,
        settled: bool,
        rounds: u32,
    ) -> Self {
        let roles = derive_roles(&heads);
        ClusteringState {
            weights,
            heads,
            roles,
            head_memory,
            beacons,
            settled,
            rounds,
        }
    }
}

/// Power appropriateness: `1.5 + 0.5 * log_b(p - 0.6)` above the cutoff,
/// clamped below by the configured floor. At or below the cutoff the formula
/// is undefined (such a device is unfit to serve) and the floor is returned
/// directly.
pub fn power_appropriateness(power_ratio: f64, cfg: &WeightConfig) -> f64 {
    if power_ratio <= POWER_CUTOFF {
        return cfg.power_floor;
    }
    let value = 1.5 + 0.5 * (power_ratio - POWER_CUTOFF).log(cfg.log_base);
    value.max(cfg.power_floor)
}

/// Ideal-degree difference term: `1 - |deg - ideal| / ideal`. Unclamped, so
/// overloaded neighborhoods (deg > 2 * ideal) go negative.
pub fn degree_term(degree: usize, cfg: &WeightConfig) -> f64 {
    let ideal = cfg.ideal_degree as f64;
    1.0 - (degree as f64 - ideal).abs() / ideal
}

/// Stability term: fraction of the neighborhood unchanged since the device
/// became a clusterhead, `1 - |prev Δ curr| / (|prev| + |curr|)`.
///
/// Devices that are not sitting clusterheads (or have no snapshot yet) get
/// 0. Two empty neighborhoods count as unchanged, hence 1.
pub fn stability_term(
    prev: Option<&BTreeSet<NodeId>>,
    curr: &BTreeSet<NodeId>,
    is_current_head: bool,
) -> f64 {
    if !is_current_head {
        return 0.0;
    }
    let Some(prev) = prev else {
        return 0.0;
    };
    let total = prev.len() + curr.len();
    if total == 0 {
        return 1.0;
    }
    let sym_diff = prev.symmetric_difference(curr).count();
    1.0 - sym_diff as f64 / total as f64
}

/// Combined weight of device `id` under `state`'s roles and snapshots.
pub fn node_weight(
    topology: &Topology,
    id: NodeId,
    state: &ClusteringState,
    cfg: &WeightConfig,
) -> Result<f64> {
    let node = topology.node(id)?;
    let neighbors = topology.neighbor_set(id)?;
    let is_head = state.role(id) == Some(Role::Clusterhead);
    Ok(combine_weight(
        topology,
        node.id,
        node.power_ratio,
        node.signal,
        &neighbors,
        is_head,
        state.head_memory.get(&id),
        cfg,
    ))
}

/// The five-term sum. Terms are added in a fixed order so results are
/// bit-for-bit reproducible.
#[allow(clippy::too_many_arguments)]
fn combine_weight(
    topology: &Topology,
    id: NodeId,
    power_ratio: f64,
    signal: f64,
    neighbors: &BTreeSet<NodeId>,
    is_head: bool,
    snapshot: Option<&BTreeSet<NodeId>>,
    cfg: &WeightConfig,
) -> f64 {
    let cl = topology
        .local_clustering_coefficient(id)
        .expect("node from topology");
    cfg.power_factor * power_appropriateness(power_ratio, cfg)
        + cfg.signal_factor * signal
        + cfg.clustering_factor * cl
        + cfg.degree_factor * degree_term(neighbors.len(), cfg)
        + cfg.stability_factor * stability_term(snapshot, neighbors, is_head)
}

/// Weight of one node under explicit clusterhead status and snapshot; the
/// incremental event path recomputes exactly the nodes whose inputs changed.
pub(crate) fn event_weight(
    topology: &Topology,
    node: &crate::netmodel::Node,
    neighbors: &BTreeSet<NodeId>,
    is_head: bool,
    snapshot: Option<&BTreeSet<NodeId>>,
    cfg: &WeightConfig,
) -> f64 {
    combine_weight(
        topology,
        node.id,
        node.power_ratio,
        node.signal,
        neighbors,
        is_head,
        snapshot,
        cfg,
    )
}

/// Weights for every node given the current clusterhead set and snapshots.
fn compute_weights(
    topology: &Topology,
    ch_set: &BTreeSet<NodeId>,
    memory: &BTreeMap<NodeId, BTreeSet<NodeId>>,
    cfg: &WeightConfig,
) -> BTreeMap<NodeId, f64> {
    let mut weights = BTreeMap::new();
    for node in topology.nodes() {
        let neighbors = topology.neighbor_set(node.id).expect("node from topology");
        let w = combine_weight(
            topology,
            node.id,
            node.power_ratio,
            node.signal,
            &neighbors,
            ch_set.contains(&node.id),
            memory.get(&node.id),
            cfg,
        );
        weights.insert(node.id, w);
    }
    weights
}

/// Head choice for one device: itself, unless some neighbor has strictly
/// higher weight. Among strictly higher neighbors the highest weight wins
/// and weight ties go to the higher id; a neighbor merely tying with the
/// device's own weight never displaces self-election.
pub(crate) fn choose_head(
    id: NodeId,
    own_weight: f64,
    neighbors: &[NodeId],
    weights: &BTreeMap<NodeId, f64>,
) -> NodeId {
    let mut best: Option<(f64, NodeId)> = None;
    for &nb in neighbors {
        let w = *weights.get(&nb).expect("weights populated for all nodes");
        if w > own_weight {
            best = Some(match best {
                None => (w, nb),
                Some((bw, bid)) => {
                    if w > bw || (w == bw && nb > bid) {
                        (w, nb)
                    } else {
                        (bw, bid)
                    }
                }
            });
        }
    }
    best.map_or(id, |(_, nb)| nb)
}

fn elect_heads(topology: &Topology, weights: &BTreeMap<NodeId, f64>) -> BTreeMap<NodeId, NodeId> {
    let mut heads = BTreeMap::new();
    for node in topology.nodes() {
        let own = *weights
            .get(&node.id)
            .expect("weights populated for all nodes");
        let neighbors = topology.neighbors(node.id).expect("node from topology");
        heads.insert(node.id, choose_head(node.id, own, neighbors, weights));
    }
    heads
}

/// Roles derived from the head map: self-electors are clusterheads, elected
/// non-self-electors are sub-heads, the rest are slaves.
pub(crate) fn derive_roles(heads: &BTreeMap<NodeId, NodeId>) -> BTreeMap<NodeId, Role> {
    let elected: BTreeSet<NodeId> = heads
        .iter()
        .filter(|(id, head)| id != head)
        .map(|(_, head)| *head)
        .collect();
    heads
        .iter()
        .map(|(&id, &head)| {
            let role = if head == id {
                Role::Clusterhead
            } else if elected.contains(&id) {
                Role::SubHead
            } else {
                Role::Slave
            };
            (id, role)
        })
        .collect()
}

/// One synchronous election pass over precomputed weights. Every device
/// beacons its weight once, so the beacon counter grows by exactly n.
pub fn elect(topology: &Topology, state: &ClusteringState) -> ClusteringState {
    let heads = elect_heads(topology, &state.weights);
    let roles = derive_roles(&heads);
    ClusteringState {
        weights: state.weights.clone(),
        heads,
        roles,
        head_memory: state.head_memory.clone(),
        beacons: state.beacons + topology.len() as u64,
        settled: false,
        rounds: state.rounds,
    }
}

/// Cold-start fixed-point election: no device holds a snapshot, so the first
/// round is a pure election without the stability term.
pub fn settle(topology: &Topology, cfg: &WeightConfig, max_rounds: u32) -> Result<ClusteringState> {
    settle_with_memory(topology, cfg, max_rounds, BTreeMap::new())
}

/// Fixed-point election seeded with neighborhood snapshots carried over from
/// an earlier election. The nodes holding snapshots are treated as sitting
/// clusterheads for the first weight pass; topology events use this as the
/// from-scratch reference for incremental updates.
pub fn settle_with_memory(
    topology: &Topology,
    cfg: &WeightConfig,
    max_rounds: u32,
    memory: BTreeMap<NodeId, BTreeSet<NodeId>>,
) -> Result<ClusteringState> {
    cfg.validate()?;
    if max_rounds == 0 {
        return Err(Error::config("max_rounds must be >= 1"));
    }
    for id in memory.keys() {
        if !topology.contains(*id) {
            return Err(Error::UnknownNode(*id));
        }
    }

    let mut heads: BTreeMap<NodeId, NodeId> =
        topology.nodes().iter().map(|n| (n.id, n.id)).collect();
    let mut ch_set: BTreeSet<NodeId> = memory.keys().copied().collect();
    let mut memory = memory;
    let mut weights = BTreeMap::new();
    let mut beacons = 0u64;
    let mut rounds = 0u32;
    let mut settled = false;

    while rounds < max_rounds {
        weights = compute_weights(topology, &ch_set, &memory, cfg);
        let new_heads = elect_heads(topology, &weights);
        beacons += topology.len() as u64;
        rounds += 1;

        let new_ch: BTreeSet<NodeId> = new_heads
            .iter()
            .filter(|(id, head)| id == head)
            .map(|(&id, _)| id)
            .collect();
        let mut new_memory = memory.clone();
        for id in new_ch.difference(&ch_set) {
            new_memory.insert(*id, topology.neighbor_set(*id).expect("node from topology"));
        }
        for id in ch_set.difference(&new_ch) {
            new_memory.remove(id);
        }

        let unchanged = new_heads == heads && new_ch == ch_set && new_memory == memory;
        heads = new_heads;
        ch_set = new_ch;
        memory = new_memory;
        if unchanged {
            settled = true;
            break;
        }
    }

    Ok(ClusteringState::from_parts(
        weights, heads, memory, beacons, settled, rounds,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Node;
    use crate::rng::{rng_from_seed, uniform_u64};
    use crate::testutil::{path3, signal_only};

    fn cfg() -> WeightConfig {
        WeightConfig::default()
    }

    #[test]
    fn power_term_pins() {
        let c = cfg();
        assert!((power_appropriateness(1.6, &c) - 1.5).abs() < 1e-12);
        assert!((power_appropriateness(10.6, &c) - 2.0).abs() < 1e-12);
        assert_eq!(power_appropriateness(0.6, &c), 0.0);
        assert_eq!(power_appropriateness(0.0, &c), 0.0);
        // just above the cutoff the log dives below the floor
        assert_eq!(power_appropriateness(0.6 + 1e-9, &c), 0.0);
        let lifted = WeightConfig {
            power_floor: -1.0,
            ..cfg()
        };
        assert!(power_appropriateness(0.6 + 1e-9, &lifted) < -0.5);
    }

    #[test]
    fn degree_term_pins() {
        let c = cfg();
        assert_eq!(degree_term(7, &c), 1.0);
        assert_eq!(degree_term(0, &c), 0.0);
        assert_eq!(degree_term(21, &c), -1.0);
        // independent one-line oracle
        for deg in 0..30 {
            let oracle = 1.0 - ((deg as f64) - 7.0).abs() / 7.0;
            assert_eq!(degree_term(deg, &c), oracle);
        }
    }

    #[test]
    fn stability_term_pins() {
        let set = |ids: &[NodeId]| ids.iter().copied().collect::<BTreeSet<_>>();
        let same = set(&[1, 2, 3]);
        assert_eq!(stability_term(Some(&same), &same, true), 1.0);
        assert_eq!(
            stability_term(Some(&set(&[1, 2])), &set(&[3, 4]), true),
            0.0
        );
        let third = stability_term(Some(&set(&[1, 2, 3])), &set(&[2, 3, 4]), true);
        assert!((third - 2.0 / 3.0).abs() < 1e-12);
        // not currently head, or no snapshot
        assert_eq!(stability_term(Some(&same), &same, false), 0.0);
        assert_eq!(stability_term(None, &same, true), 0.0);
        // both empty counts as unchanged
        assert_eq!(stability_term(Some(&set(&[])), &set(&[]), true), 1.0);

        // set-enumeration oracle on random small sets
        let mut rng = rng_from_seed(31);
        for _ in 0..200 {
            let prev: BTreeSet<NodeId> = (0..uniform_u64(&mut rng, 8))
                .map(|_| uniform_u64(&mut rng, 10) as NodeId)
                .collect();
            let curr: BTreeSet<NodeId> = (0..uniform_u64(&mut rng, 8))
                .map(|_| uniform_u64(&mut rng, 10) as NodeId)
                .collect();
            let mut sym = 0usize;
            for x in 0..10u32 {
                if prev.contains(&x) != curr.contains(&x) {
                    sym += 1;
                }
            }
            let expected = if prev.is_empty() && curr.is_empty() {
                1.0
            } else {
                1.0 - sym as f64 / (prev.len() + curr.len()) as f64
            };
            let got = stability_term(Some(&prev), &curr, true);
            assert!((got - expected).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&got));
        }
    }

    #[test]
    fn isolated_node_weight_pins() {
        let mut node = Node::new(0, 50.0, 50.0);
        node.power_ratio = 1.6;
        node.signal = 1.0;
        let t = Topology::new(vec![node], 100.0, 10.0).unwrap();
        let st = ClusteringState::empty();
        let w = node_weight(&t, 0, &st, &cfg()).unwrap();
        assert!((w - 2.35).abs() < 1e-12);

        let zeroed = WeightConfig {
            power_factor: 0.0,
            signal_factor: 0.0,
            clustering_factor: 0.0,
            degree_factor: 0.0,
            stability_factor: 0.0,
            ..cfg()
        };
        assert_eq!(node_weight(&t, 0, &st, &zeroed).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_nodes_weigh_equal() {
        let mut a = Node::new(0, 40.0, 50.0);
        let mut b = Node::new(1, 60.0, 50.0);
        for n in [&mut a, &mut b] {
            n.power_ratio = 2.0;
            n.signal = 0.5;
        }
        let t = Topology::new(vec![a, b], 100.0, 30.0).unwrap();
        let st = ClusteringState::empty();
        let wa = node_weight(&t, 0, &st, &cfg()).unwrap();
        let wb = node_weight(&t, 1, &st, &cfg()).unwrap();
        assert_eq!(wa, wb);
    }

    #[test]
    fn elect_on_path_builds_one_chain() {
        let t = path3();
        let st = settle(&t, &signal_only(), 32).unwrap();
        assert!(st.settled());
        assert_eq!(st.head(0), Some(1));
        assert_eq!(st.head(1), Some(2));
        assert_eq!(st.head(2), Some(2));
        assert_eq!(st.role(2), Some(Role::Clusterhead));
        assert_eq!(st.role(1), Some(Role::SubHead));
        assert_eq!(st.role(0), Some(Role::Slave));
    }

    #[test]
    fn complete_graph_elects_single_head() {
        let nodes = Topology::deploy_uniform(10, 100.0, 5).unwrap();
        let mut t = Topology::new(nodes, 100.0, 100.0 * 2.0_f64.sqrt()).unwrap();
        t = t
            .assign_power(
                &crate::netmodel::PowerModel::Uniform { lo: 0.7, hi: 4.0 },
                50,
            )
            .unwrap();
        t = t
            .assign_signal(&crate::netmodel::SignalModel::UniformRandom, 51)
            .unwrap();
        let st = settle(&t, &cfg(), 32).unwrap();
        assert!(st.settled());
        assert_eq!(st.head_count(), 1);
        assert_eq!(st.subhead_count(), 0);
    }

    #[test]
    fn isolated_nodes_elect_themselves() {
        let nodes = Topology::deploy_uniform(6, 100.0, 8).unwrap();
        let t0 = Topology::new(nodes.clone(), 100.0, 200.0).unwrap();
        let min_dist = t0.min_pairwise_distance().unwrap();
        let t = Topology::new(nodes, 100.0, min_dist).unwrap();
        let st = settle(&t, &cfg(), 32).unwrap();
        assert!(st.settled());
        assert_eq!(st.head_count(), 6);
        for node in t.nodes() {
            assert_eq!(st.head(node.id), Some(node.id));
        }
    }

    #[test]
    fn equal_weight_tie_keeps_self_and_prefers_high_id() {
        // two neighbors tied strictly above the center
        let mut center = Node::new(0, 50.0, 50.0);
        let mut left = Node::new(1, 45.0, 50.0);
        let mut right = Node::new(2, 55.0, 50.0);
        center.signal = 0.1;
        left.signal = 0.9;
        right.signal = 0.9;
        // left and right are 10 apart: neighbors of center only at range 6
        let t = Topology::new(vec![center, left, right], 100.0, 6.0).unwrap();
        let st = settle(&t, &signal_only(), 32).unwrap();
        assert_eq!(
            st.head(0),
            Some(2),
            "higher id wins among tied greater neighbors"
        );
        // the tied pair are not neighbors of each other, both self-elect
        assert_eq!(st.head(1), Some(1));
        assert_eq!(st.head(2), Some(2));

        // all-equal weights: ties never displace self-election
        let mut nodes = Topology::deploy_uniform(5, 100.0, 77).unwrap();
        for n in &mut nodes {
            n.signal = 0.5;
        }
        let t = Topology::new(nodes, 100.0, 200.0).unwrap();
        let st = settle(&t, &signal_only(), 32).unwrap();
        for node in t.nodes() {
            assert_eq!(st.head(node.id), Some(node.id));
        }
    }

    #[test]
    fn first_round_matches_stability_free_election() {
        let nodes = Topology::deploy_uniform(20, 100.0, 21).unwrap();
        let mut t = Topology::new(nodes, 100.0, 30.0).unwrap();
        t = t
            .assign_power(
                &crate::netmodel::PowerModel::Uniform { lo: 0.7, hi: 4.0 },
                60,
            )
            .unwrap();
        t = t
            .assign_signal(&crate::netmodel::SignalModel::UniformRandom, 61)
            .unwrap();

        let one_round = settle(&t, &cfg(), 1).unwrap();

        // manual stability-free pass
        let empty = ClusteringState::empty();
        let mut weights = BTreeMap::new();
        for node in t.nodes() {
            weights.insert(node.id, node_weight(&t, node.id, &empty, &cfg()).unwrap());
        }
        let manual = elect(&t, &ClusteringState::with_weights(weights));
        assert_eq!(one_round.heads(), manual.heads());
    }

    #[test]
    fn stability_bonus_retains_the_sitting_head_and_caps_report_unsettled() {
        // line fixture: head(0) - swing(2) - rival(1) - anchor(3), range 10.
        // The rival's raw signal beats the head's, but the anchor keeps the
        // rival from ever becoming a clusterhead, so only the head collects
        // the stability bonus and wins the swing node back in round 2.
        let mut head = Node::new(0, 50.0, 50.0);
        let mut rival = Node::new(1, 62.0, 50.0);
        let mut swing = Node::new(2, 56.0, 50.0);
        let mut anchor = Node::new(3, 70.0, 50.0);
        head.signal = 0.50;
        rival.signal = 0.54;
        swing.signal = 0.10;
        anchor.signal = 0.80;
        let cfg = WeightConfig {
            stability_factor: 0.1,
            ..signal_only()
        };
        let t = Topology::new(vec![head, rival, swing, anchor], 100.0, 10.0).unwrap();

        let capped = settle(&t, &cfg, 1).unwrap();
        assert!(!capped.settled());
        assert_eq!(capped.rounds(), 1);
        assert_eq!(capped.head(2), Some(1), "round 1 follows the raw signals");

        let full = settle(&t, &cfg, 32).unwrap();
        assert!(full.settled());
        assert_eq!(
            full.head(2),
            Some(0),
            "the boosted sitting head wins the swing node"
        );
        assert_eq!(full.head(1), Some(3));
        assert!(full.weight(0).unwrap() > full.weight(1).unwrap());
    }

    #[test]
    fn settle_is_idempotent_and_counts_beacons() {
        let nodes = Topology::deploy_uniform(20, 100.0, 2).unwrap();
        let mut t = Topology::new(nodes, 100.0, 30.0).unwrap();
        t = t
            .assign_power(
                &crate::netmodel::PowerModel::Uniform { lo: 0.7, hi: 4.0 },
                70,
            )
            .unwrap();
        t = t
            .assign_signal(&crate::netmodel::SignalModel::UniformRandom, 71)
            .unwrap();
        let st = settle(&t, &cfg(), 32).unwrap();
        assert!(st.settled());
        assert_eq!(st.beacons(), st.rounds() as u64 * t.len() as u64);

        let again = settle(&t, &cfg(), 32).unwrap();
        assert!(st.same_clustering(&again));
    }

    #[test]
    fn thirty_random_deployments_settle_within_five_rounds() {
        for run in 0..30u64 {
            let nodes = Topology::deploy_uniform(20, 100.0, 9000 + run).unwrap();
            let mut t = Topology::new(nodes, 100.0, 30.0).unwrap();
            t = t
                .assign_power(
                    &crate::netmodel::PowerModel::Uniform { lo: 0.7, hi: 4.0 },
                    9100 + run,
                )
                .unwrap();
            t = t
                .assign_signal(&crate::netmodel::SignalModel::UniformRandom, 9200 + run)
                .unwrap();
            let st = settle(&t, &cfg(), 32).unwrap();
            assert!(st.settled(), "run {run} failed to settle");
            assert!(st.rounds() <= 5, "run {run} took {} rounds", st.rounds());
        }
    }

    #[test]
    fn chains_terminate_with_monotone_weights() {
        let mut rng = rng_from_seed(0xC0FFEE);
        for trial in 0..100u64 {
            let n = 2 + uniform_u64(&mut rng, 59) as usize;
            let range = 5.0 + uniform_u64(&mut rng, 80) as f64;
            let nodes = Topology::deploy_uniform(n, 100.0, 40_000 + trial).unwrap();
            let mut t = Topology::new(nodes, 100.0, range).unwrap();
            t = t
                .assign_power(
                    &crate::netmodel::PowerModel::Uniform { lo: 0.7, hi: 4.0 },
                    41_000 + trial,
                )
                .unwrap();
            t = t
                .assign_signal(&crate::netmodel::SignalModel::UniformRandom, 42_000 + trial)
                .unwrap();
            let st = settle(&t, &cfg(), 32).unwrap();
            for node in t.nodes() {
                let chain = st.head_chain(node.id).unwrap();
                assert!(chain.len() <= n);
                for hop in chain.windows(2) {
                    assert!(st.weight(hop[1]).unwrap() >= st.weight(hop[0]).unwrap());
                }
                assert_eq!(
                    st.head(*chain.last().unwrap()),
                    Some(*chain.last().unwrap())
                );
            }
        }
    }

    #[test]
    fn roles_partition_and_are_sound() {
        let nodes = Topology::deploy_uniform(40, 100.0, 13).unwrap();
        let mut t = Topology::new(nodes, 100.0, 25.0).unwrap();
        t = t
            .assign_power(
                &crate::netmodel::PowerModel::Uniform { lo: 0.7, hi: 4.0 },
                80,
            )
            .unwrap();
        t = t
            .assign_signal(&crate::netmodel::SignalModel::UniformRandom, 81)
            .unwrap();
        let st = settle(&t, &cfg(), 32).unwrap();
        let elected: BTreeSet<NodeId> = st
            .heads()
            .iter()
            .filter(|(id, head)| id != head)
            .map(|(_, head)| *head)
            .collect();
        for node in t.nodes() {
            let head = st.head(node.id).unwrap();
            match st.role(node.id).unwrap() {
                Role::Clusterhead => assert_eq!(head, node.id),
                Role::SubHead => {
                    assert_ne!(head, node.id);
                    assert!(elected.contains(&node.id));
                }
                Role::Slave => {
                    assert_ne!(head, node.id);
                    assert!(!elected.contains(&node.id));
                }
            }
            // head lives in the closed neighborhood
            assert!(head == node.id || t.neighbors(node.id).unwrap().contains(&head));
        }
    }

    #[test]
    fn state_json_round_trip() {
        let t = path3();
        let st = settle(&t, &signal_only(), 32).unwrap();
        let json = st.to_json();
        let back = ClusteringState::from_json(&json).unwrap();
        assert_eq!(st.heads(), back.heads());
        assert_eq!(st.roles(), back.roles());
        assert_eq!(st.beacons(), back.beacons());
        assert!(json.contains("\"SH\""));
    }

    #[test]
    fn dot_colors_roles() {
        let t = path3();
        let st = settle(&t, &signal_only(), 32).unwrap();
        let dot = st.to_dot(&t);
        assert!(dot.contains("gold"));
        assert!(dot.contains("orange"));
        assert!(dot.contains("gray85"));
        assert!(dot.contains("0 -> 1 [dir=none"));
        assert!(dot.contains("1 -> 2 [color=red"));
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = WeightConfig {
            power_factor: -0.1,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = WeightConfig {
            ideal_degree: 0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = WeightConfig {
            log_base: 1.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        assert!(settle(&path3(), &cfg(), 0).is_err());
    }
}
