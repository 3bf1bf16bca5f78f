//! Geometric network model: node deployment on a square, the range-induced
//! neighbor relation, local clustering coefficient, and connected-partition
//! discovery.
//!
//! Two nodes are neighbors iff their Euclidean distance is strictly below the
//! transmission range, so the relation is symmetric and irreflexive by
//! construction. [`Topology`] values are immutable once built; event handling
//! produces fresh values via the `with_*` constructors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, unit_f64};

pub type NodeId = u32;

/// A device: identity, position, and the two attributes feeding the weight
/// function (power ratio and backbone signal strength).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    /// Available power divided by the power the backbone job is estimated to
    /// need on this device. Must be >= 0.
    pub power_ratio: f64,
    /// Backbone signal strength in [0, 1].
    pub signal: f64,
}

impl Node {
    pub fn new(id: NodeId, x: f64, y: f64) -> Self {
        Node {
            id,
            x,
            y,
            power_ratio: 1.0,
            signal: 0.0,
        }
    }

    pub fn distance(&self, other: &Node) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::config(format!(
                "node {}: non-finite position",
                self.id
            )));
        }
        if !self.power_ratio.is_finite() || self.power_ratio < 0.0 {
            return Err(Error::config(format!(
                "node {}: power_ratio must be >= 0, got {}",
                self.id, self.power_ratio
            )));
        }
        if !(0.0..=1.0).contains(&self.signal) {
            return Err(Error::config(format!(
                "node {}: signal must lie in [0, 1], got {}",
                self.id, self.signal
            )));
        }
        Ok(())
    }
}

/// Generator for backbone signal strength. All variants produce values in
/// [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalModel {
    /// Every node gets the same strength.
    Constant { value: f64 },
    /// I.i.d. uniform [0, 1), seed-deterministic.
    UniformRandom,
    /// Strength decays linearly with distance to the closest base station:
    /// `max over stations of max(0, 1 - dist / bs_range)`.
    BaseStations {
        stations: Vec<(f64, f64)>,
        bs_range: f64,
    },
}

impl SignalModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SignalModel::Constant { value } => {
                if !(0.0..=1.0).contains(value) {
                    return Err(Error::config(format!(
                        "constant signal must lie in [0, 1], got {value}"
                    )));
                }
            }
            SignalModel::UniformRandom => {}
            SignalModel::BaseStations { stations, bs_range } => {
                if stations.is_empty() {
                    return Err(Error::config(
                        "base-stations signal model needs at least one station",
                    ));
                }
                if !bs_range.is_finite() || *bs_range <= 0.0 {
                    return Err(Error::config(format!(
                        "bs_range must be > 0, got {bs_range}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Assigns signal strengths to `nodes` in id order.
    pub fn apply(&self, nodes: &mut [Node], seed: u64) -> Result<()> {
        self.validate()?;
        match self {
            SignalModel::Constant { value } => {
                for node in nodes.iter_mut() {
                    node.signal = *value;
                }
            }
            SignalModel::UniformRandom => {
                let mut rng = rng::rng_from_seed(seed);
                for node in nodes.iter_mut() {
                    node.signal = unit_f64(&mut rng);
                }
            }
            SignalModel::BaseStations { stations, bs_range } => {
                for node in nodes.iter_mut() {
                    let best = stations
                        .iter()
                        .map(|&(sx, sy)| {
                            let dist = ((node.x - sx).powi(2) + (node.y - sy).powi(2)).sqrt();
                            (1.0 - dist / bs_range).max(0.0)
                        })
                        .fold(0.0_f64, f64::max);
                    node.signal = best.min(1.0);
                }
            }
        }
        Ok(())
    }
}

impl FromStr for SignalModel {
    type Err = Error;

    /// Mini-grammar used by the CLI and bindings:
    /// `const:<v>` | `uniform` | `stations:<x>,<y>[;<x>,<y>...]@<bs_range>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(SignalModel::UniformRandom);
        }
        if let Some(rest) = s.strip_prefix("const:") {
            let value: f64 = rest
                .parse()
                .map_err(|_| Error::parse(format!("bad constant signal value {rest:?}")))?;
            return Ok(SignalModel::Constant { value });
        }
        if let Some(rest) = s.strip_prefix("stations:") {
            let (list, range) = rest
                .rsplit_once('@')
                .ok_or_else(|| Error::parse("stations model needs `@<bs_range>`"))?;
            let bs_range: f64 = range
                .parse()
                .map_err(|_| Error::parse(format!("bad bs_range {range:?}")))?;
            let mut stations = Vec::new();
            for pair in list.split(';') {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| Error::parse(format!("bad station position {pair:?}")))?;
                let x: f64 = x
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad station x {x:?}")))?;
                let y: f64 = y
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad station y {y:?}")))?;
                stations.push((x, y));
            }
            return Ok(SignalModel::BaseStations { stations, bs_range });
        }
        Err(Error::parse(format!(
            "unknown signal model {s:?} (expected const:<v>, uniform, or stations:...)"
        )))
    }
}

impl std::fmt::Display for SignalModel {
    /// Renders the same mini-grammar `FromStr` accepts.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SignalModel::Constant { value } => write!(f, "const:{value}"),
            SignalModel::UniformRandom => write!(f, "uniform"),
            SignalModel::BaseStations { stations, bs_range } => {
                let list = stations
                    .iter()
                    .map(|(x, y)| format!("{x},{y}"))
                    .collect::<Vec<_>>()
                    .join(";");
                write!(f, "stations:{list}@{bs_range}")
            }
        }
    }
}

/// Generator for the per-node power ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerModel {
    Constant {
        value: f64,
    },
    /// I.i.d. uniform [lo, hi), seed-deterministic.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            PowerModel::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::config(format!(
                        "constant power must be >= 0, got {value}"
                    )));
                }
            }
            PowerModel::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || *lo < 0.0 || hi < lo {
                    return Err(Error::config(format!(
                        "uniform power bounds must satisfy 0 <= lo <= hi, got [{lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Assigns power ratios to `nodes` in id order.
    pub fn apply(&self, nodes: &mut [Node], seed: u64) -> Result<()> {
        self.validate()?;
        match self {
            PowerModel::Constant { value } => {
                for node in nodes.iter_mut() {
                    node.power_ratio = *value;
                }
            }
            PowerModel::Uniform { lo, hi } => {
                let mut rng = rng::rng_from_seed(seed);
                for node in nodes.iter_mut() {
                    node.power_ratio = rng::uniform_f64(&mut rng, *lo, *hi);
                }
            }
        }
        Ok(())
    }
}

impl FromStr for PowerModel {
    type Err = Error;

    /// `const:<v>` | `uniform:<lo>:<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("const:") {
            let value: f64 = rest
                .parse()
                .map_err(|_| Error::parse(format!("bad constant power value {rest:?}")))?;
            return Ok(PowerModel::Constant { value });
        }
        if let Some(rest) = s.strip_prefix("uniform:") {
            let (lo, hi) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse("uniform power model needs `uniform:<lo>:<hi>`"))?;
            let lo: f64 = lo
                .parse()
                .map_err(|_| Error::parse(format!("bad power lo {lo:?}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| Error::parse(format!("bad power hi {hi:?}")))?;
            return Ok(PowerModel::Uniform { lo, hi });
        }
        Err(Error::parse(format!(
            "unknown power model {s:?} (expected const:<v> or uniform:<lo>:<hi>)"
        )))
    }
}

impl std::fmt::Display for PowerModel {
    /// Renders the same mini-grammar `FromStr` accepts.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PowerModel::Constant { value } => write!(f, "const:{value}"),
            PowerModel::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

/// Serialized form of a topology: `{side, range, nodes: [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyDoc {
    side: f64,
    range: f64,
    nodes: Vec<Node>,
}

/// Node set plus transmission range. Adjacency is precomputed at
/// construction and never mutated; nodes are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct Topology {
    side: f64,
    range: f64,
    nodes: Vec<Node>,
    /// Sorted neighbor ids, indexed like `nodes`.
    adjacency: Vec<Vec<NodeId>>,
}

impl TryFrom<TopologyDoc> for Topology {
    type Error = Error;

    fn try_from(doc: TopologyDoc) -> Result<Self> {
        Topology::new(doc.nodes, doc.side, doc.range)
    }
}

impl From<Topology> for TopologyDoc {
    fn from(t: Topology) -> TopologyDoc {
        TopologyDoc {
            side: t.side,
            range: t.range,
            nodes: t.nodes,
        }
    }
}

impl Topology {
    /// Builds a topology, validating node attributes and id uniqueness and
    /// precomputing the strict-inequality adjacency.
    pub fn new(mut nodes: Vec<Node>, side: f64, range: f64) -> Result<Self> {
        if !side.is_finite() || side <= 0.0 {
            return Err(Error::config(format!("side must be > 0, got {side}")));
        }
        if !range.is_finite() || range <= 0.0 {
            return Err(Error::config(format!("range must be > 0, got {range}")));
        }
        nodes.sort_by_key(|n| n.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateNode(pair[0].id));
            }
        }
        for node in &nodes {
            node.validate()?;
        }
        let adjacency = build_adjacency(&nodes, range);
        Ok(Topology {
            side,
            range,
            nodes,
            adjacency,
        })
    }

    /// Drops `n` nodes uniformly at random on the `[0, side)` square, ids
    /// `0..n-1`. Power and signal keep their defaults until a model is
    /// applied.
    pub fn deploy_uniform(n: usize, side: f64, seed: u64) -> Result<Vec<Node>> {
        if n == 0 {
            return Err(Error::config("node count must be >= 1"));
        }
        if !side.is_finite() || side <= 0.0 {
            return Err(Error::config(format!("side must be > 0, got {side}")));
        }
        let mut rng = rng::rng_from_seed(seed);
        let mut nodes = Vec::with_capacity(n);
        for id in 0..n {
            let x = unit_f64(&mut rng) * side;
            let y = unit_f64(&mut rng) * side;
            nodes.push(Node::new(id as NodeId, x, y));
        }
        Ok(nodes)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_some()
    }

    fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.index_of(id)
            .map(|i| &self.nodes[i])
            .ok_or(Error::UnknownNode(id))
    }

    /// Ids strictly within transmission range of `id`, ascending.
    pub fn neighbors(&self, id: NodeId) -> Result<&[NodeId]> {
        self.index_of(id)
            .map(|i| self.adjacency[i].as_slice())
            .ok_or(Error::UnknownNode(id))
    }

    pub fn neighbor_set(&self, id: NodeId) -> Result<BTreeSet<NodeId>> {
        Ok(self.neighbors(id)?.iter().copied().collect())
    }

    pub fn degree(&self, id: NodeId) -> Result<usize> {
        Ok(self.neighbors(id)?.len())
    }

    pub fn are_neighbors(&self, a: NodeId, b: NodeId) -> bool {
        match self.index_of(a) {
            Some(i) => self.adjacency[i].binary_search(&b).is_ok(),
            None => false,
        }
    }

    /// Watts-Strogatz local clustering coefficient: links realized among the
    /// neighbors of `id` over `k(k-1)/2`. Defined as 0 for degree < 2, where
    /// no neighbor pair exists.
    pub fn local_clustering_coefficient(&self, id: NodeId) -> Result<f64> {
        let neighbors = self.neighbors(id)?;
        let k = neighbors.len();
        if k < 2 {
            return Ok(0.0);
        }
        let mut links = 0usize;
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                if self.are_neighbors(a, b) {
                    links += 1;
                }
            }
        }
        Ok(links as f64 / (k * (k - 1) / 2) as f64)
    }

    /// Connected components of the adjacency graph, each sorted, listed in
    /// ascending order of their smallest member.
    pub fn partitions(&self) -> Vec<BTreeSet<NodeId>> {
        let mut seen = vec![false; self.nodes.len()];
        let mut parts = Vec::new();
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            let mut part = BTreeSet::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                part.insert(self.nodes[i].id);
                for &nb in &self.adjacency[i] {
                    let j = self.index_of(nb).expect("adjacency refers to known nodes");
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            parts.push(part);
        }
        parts
    }

    /// Smallest distance over all node pairs, if there are at least two nodes.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                let d = a.distance(b);
                best = Some(match best {
                    Some(m) => m.min(d),
                    None => d,
                });
            }
        }
        best
    }

    /// Copy of this topology with signal strengths reassigned by `model`.
    pub fn assign_signal(&self, model: &SignalModel, seed: u64) -> Result<Topology> {
        let mut nodes = self.nodes.clone();
        model.apply(&mut nodes, seed)?;
        Ok(Topology {
            side: self.side,
            range: self.range,
            nodes,
            // attribute changes never touch positions
            adjacency: self.adjacency.clone(),
        })
    }

    /// Copy of this topology with power ratios reassigned by `model`.
    pub fn assign_power(&self, model: &PowerModel, seed: u64) -> Result<Topology> {
        let mut nodes = self.nodes.clone();
        model.apply(&mut nodes, seed)?;
        Ok(Topology {
            side: self.side,
            range: self.range,
            nodes,
            adjacency: self.adjacency.clone(),
        })
    }

    pub fn with_range(&self, range: f64) -> Result<Topology> {
        Topology::new(self.nodes.clone(), self.side, range)
    }

    pub fn with_node_moved(&self, id: NodeId, x: f64, y: f64) -> Result<Topology> {
        let mut nodes = self.nodes.clone();
        let i = self.index_of(id).ok_or(Error::UnknownNode(id))?;
        nodes[i].x = x;
        nodes[i].y = y;
        Topology::new(nodes, self.side, self.range)
    }

    pub fn with_node_removed(&self, id: NodeId) -> Result<Topology> {
        let i = self.index_of(id).ok_or(Error::UnknownNode(id))?;
        let mut nodes = self.nodes.clone();
        nodes.remove(i);
        let adjacency = build_adjacency(&nodes, self.range);
        Ok(Topology {
            side: self.side,
            range: self.range,
            nodes,
            adjacency,
        })
    }

    pub fn with_node_added(&self, node: Node) -> Result<Topology> {
        if self.contains(node.id) {
            return Err(Error::DuplicateNode(node.id));
        }
        let mut nodes = self.nodes.clone();
        nodes.push(node);
        Topology::new(nodes, self.side, self.range)
    }

    pub fn with_attributes(
        &self,
        id: NodeId,
        power_ratio: Option<f64>,
        signal: Option<f64>,
    ) -> Result<Topology> {
        let i = self.index_of(id).ok_or(Error::UnknownNode(id))?;
        let mut nodes = self.nodes.clone();
        if let Some(p) = power_ratio {
            nodes[i].power_ratio = p;
        }
        if let Some(s) = signal {
            nodes[i].signal = s;
        }
        nodes[i].validate()?;
        Ok(Topology {
            side: self.side,
            range: self.range,
            nodes,
            adjacency: self.adjacency.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    /// JSON value form of [`Topology::to_json`] for embedding.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("topology serializes")
    }

    pub fn from_json(s: &str) -> Result<Topology> {
        serde_json::from_str(s).map_err(Error::parse)
    }

    /// Adjacency graph in DOT form, node label = id, positions attached for
    /// `neato`-style layouts.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph topology {\n  node [shape=circle];\n");
        for node in &self.nodes {
            writeln!(
                out,
                "  {} [label=\"{}\", pos=\"{:.3},{:.3}!\"];",
                node.id, node.id, node.x, node.y
            )
            .expect("write to string");
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for &nb in &self.adjacency[i] {
                if nb > node.id {
                    writeln!(out, "  {} -- {};", node.id, nb).expect("write to string");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn build_adjacency(nodes: &[Node], range: f64) -> Vec<Vec<NodeId>> {
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (i, a) in nodes.iter().enumerate() {
        for (j, b) in nodes.iter().enumerate().skip(i + 1) {
            if a.distance(b) < range {
                adjacency[i].push(b.id);
                adjacency[j].push(a.id);
            }
        }
    }
    // nodes are id-sorted, so each list is already ascending
    adjacency
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, uniform_u64};
    use crate::testutil::golden_five;

    fn topology(nodes: Vec<Node>, range: f64) -> Topology {
        Topology::new(nodes, 100.0, range).unwrap()
    }

    #[test]
    fn deploy_respects_bounds_and_determinism() {
        let nodes = Topology::deploy_uniform(20, 100.0, 42).unwrap();
        assert_eq!(nodes.len(), 20);
        for node in &nodes {
            assert!((0.0..100.0).contains(&node.x));
            assert!((0.0..100.0).contains(&node.y));
        }
        let again = Topology::deploy_uniform(5, 100.0, 7).unwrap();
        let twice = Topology::deploy_uniform(5, 100.0, 7).unwrap();
        assert_eq!(again, twice);
        assert!(Topology::deploy_uniform(0, 100.0, 1).is_err());
        assert!(Topology::deploy_uniform(3, 0.0, 1).is_err());
    }

    #[test]
    fn singleton_has_no_neighbors() {
        let t = topology(vec![Node::new(0, 5.0, 5.0)], 50.0);
        assert!(t.neighbors(0).unwrap().is_empty());
    }

    #[test]
    fn distance_exactly_range_is_not_a_link() {
        let t = topology(vec![Node::new(0, 0.0, 0.0), Node::new(1, 10.0, 0.0)], 10.0);
        assert!(t.neighbors(0).unwrap().is_empty());
        assert!(t.neighbors(1).unwrap().is_empty());
    }

    #[test]
    fn three_four_five_triangle_links() {
        let t = topology(vec![Node::new(0, 0.0, 0.0), Node::new(1, 3.0, 4.0)], 6.0);
        assert_eq!(t.neighbors(0).unwrap(), &[1]);
        assert_eq!(t.neighbors(1).unwrap(), &[0]);
    }

    #[test]
    fn diagonal_range_gives_full_degree() {
        let nodes = Topology::deploy_uniform(20, 100.0, 3).unwrap();
        let t = Topology::new(nodes, 100.0, 100.0 * 2.0_f64.sqrt()).unwrap();
        for node in t.nodes() {
            assert_eq!(t.degree(node.id).unwrap(), 19);
        }
    }

    #[test]
    fn unknown_id_is_a_lookup_error() {
        let t = golden_five();
        assert!(matches!(t.neighbors(99), Err(Error::UnknownNode(99))));
        assert!(matches!(
            t.local_clustering_coefficient(99),
            Err(Error::UnknownNode(99))
        ));
    }

    #[test]
    fn clustering_coefficient_golden_cases() {
        // complete neighborhood
        let t = topology(
            vec![
                Node::new(0, 0.0, 0.0),
                Node::new(1, 1.0, 0.0),
                Node::new(2, 0.0, 1.0),
            ],
            5.0,
        );
        assert_eq!(t.local_clustering_coefficient(0).unwrap(), 1.0);

        // hub of a star: three pairwise non-adjacent neighbors
        let star = topology(
            vec![
                Node::new(0, 50.0, 50.0),
                Node::new(1, 59.0, 50.0),
                Node::new(2, 41.0, 50.0),
                Node::new(3, 50.0, 59.0),
            ],
            10.0,
        );
        assert_eq!(star.local_clustering_coefficient(0).unwrap(), 0.0);

        // golden five-node instance: 4 neighbors, 3 links among them
        let five = golden_five();
        assert_eq!(five.degree(0).unwrap(), 4);
        assert_eq!(five.local_clustering_coefficient(0).unwrap(), 0.5);

        // degree < 2
        let pair = topology(vec![Node::new(0, 0.0, 0.0), Node::new(1, 1.0, 0.0)], 5.0);
        assert_eq!(pair.local_clustering_coefficient(0).unwrap(), 0.0);
    }

    #[test]
    fn partitions_cover_and_separate() {
        let nodes = Topology::deploy_uniform(12, 100.0, 11).unwrap();
        let complete = Topology::new(nodes.clone(), 100.0, 400.0).unwrap();
        assert_eq!(complete.partitions().len(), 1);

        let min_dist = complete.min_pairwise_distance().unwrap();
        let isolated = Topology::new(nodes, 100.0, min_dist).unwrap();
        assert_eq!(isolated.partitions().len(), 12);

        // two triads far apart
        let two = topology(
            vec![
                Node::new(0, 0.0, 0.0),
                Node::new(1, 1.0, 0.0),
                Node::new(2, 0.0, 1.0),
                Node::new(3, 90.0, 90.0),
                Node::new(4, 91.0, 90.0),
                Node::new(5, 90.0, 91.0),
            ],
            5.0,
        );
        let parts = two.partitions();
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| p.len() == 3));
    }

    #[test]
    fn random_instances_keep_symmetry_and_bounds() {
        let mut rng = rng_from_seed(0xBEEF);
        for trial in 0..50 {
            let n = 2 + uniform_u64(&mut rng, 40) as usize;
            let range = 5.0 + uniform_u64(&mut rng, 80) as f64;
            let nodes = Topology::deploy_uniform(n, 100.0, 1000 + trial).unwrap();
            let t = Topology::new(nodes, 100.0, range).unwrap();
            let parts = t.partitions();
            let mut covered = BTreeSet::new();
            for part in &parts {
                for id in part {
                    assert!(covered.insert(*id), "partitions overlap");
                }
            }
            assert_eq!(covered.len(), n);
            for node in t.nodes() {
                assert!(t.degree(node.id).unwrap() < n);
                let cl = t.local_clustering_coefficient(node.id).unwrap();
                assert!((0.0..=1.0).contains(&cl));
                for &nb in t.neighbors(node.id).unwrap() {
                    assert!(nb != node.id, "self-adjacency");
                    assert!(
                        t.neighbors(nb).unwrap().contains(&node.id),
                        "asymmetric link"
                    );
                }
            }
            // nodes in different parts are never adjacent
            for part in &parts {
                for &id in part {
                    for &nb in t.neighbors(id).unwrap() {
                        assert!(part.contains(&nb));
                    }
                }
            }
        }
    }

    #[test]
    fn signal_models_produce_expected_values() {
        let mut nodes = vec![
            Node::new(0, 0.0, 0.0),
            Node::new(1, 30.0, 0.0),
            Node::new(2, 60.0, 0.0),
        ];

        SignalModel::Constant { value: 1.0 }
            .apply(&mut nodes, 0)
            .unwrap();
        assert!(nodes.iter().all(|n| n.signal == 1.0));

        assert!(SignalModel::Constant { value: 1.5 }
            .apply(&mut nodes, 0)
            .is_err());

        let stations = SignalModel::BaseStations {
            stations: vec![(0.0, 0.0)],
            bs_range: 60.0,
        };
        stations.apply(&mut nodes, 0).unwrap();
        assert_eq!(nodes[0].signal, 1.0); // co-located
        assert_eq!(nodes[1].signal, 0.5);
        assert_eq!(nodes[2].signal, 0.0); // exactly at bs_range

        let uniform = SignalModel::UniformRandom;
        uniform.apply(&mut nodes, 5).unwrap();
        let snapshot: Vec<f64> = nodes.iter().map(|n| n.signal).collect();
        uniform.apply(&mut nodes, 5).unwrap();
        let again: Vec<f64> = nodes.iter().map(|n| n.signal).collect();
        assert_eq!(snapshot, again);
        assert!(snapshot.iter().all(|s| (0.0..1.0).contains(s)));
    }

    #[test]
    fn power_models_apply() {
        let mut nodes = vec![Node::new(0, 0.0, 0.0), Node::new(1, 1.0, 0.0)];
        PowerModel::Constant { value: 2.5 }
            .apply(&mut nodes, 0)
            .unwrap();
        assert!(nodes.iter().all(|n| n.power_ratio == 2.5));
        PowerModel::Uniform { lo: 0.7, hi: 4.0 }
            .apply(&mut nodes, 9)
            .unwrap();
        assert!(nodes.iter().all(|n| (0.7..4.0).contains(&n.power_ratio)));
        assert!(PowerModel::Uniform { lo: 2.0, hi: 1.0 }.validate().is_err());
    }

    #[test]
    fn model_strings_parse() {
        assert_eq!(
            "uniform".parse::<SignalModel>().unwrap(),
            SignalModel::UniformRandom
        );
        assert_eq!(
            "const:0.8".parse::<SignalModel>().unwrap(),
            SignalModel::Constant { value: 0.8 }
        );
        assert_eq!(
            "stations:50,50;10,90@60".parse::<SignalModel>().unwrap(),
            SignalModel::BaseStations {
                stations: vec![(50.0, 50.0), (10.0, 90.0)],
                bs_range: 60.0
            }
        );
        assert_eq!(
            "uniform:0.7:4".parse::<PowerModel>().unwrap(),
            PowerModel::Uniform { lo: 0.7, hi: 4.0 }
        );
        assert!("triangular:1:2".parse::<PowerModel>().is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = golden_five();
        let json = t.to_json();
        let back = Topology::from_json(&json).unwrap();
        assert_eq!(t, back);

        let bad = r#"{"side": 100, "range": 10, "nodes": [{"id": 0, "x": 1, "y": 1, "power_ratio": 1, "signal": 3}]}"#;
        assert!(Topology::from_json(bad).is_err());
        let dup = r#"{"side": 100, "range": 10, "nodes": [
            {"id": 0, "x": 1, "y": 1, "power_ratio": 1, "signal": 0},
            {"id": 0, "x": 2, "y": 2, "power_ratio": 1, "signal": 0}]}"#;
        assert!(Topology::from_json(dup).is_err());
    }

    #[test]
    fn dot_lists_every_edge_once() {
        let t = golden_five();
        let dot = t.to_dot();
        assert!(dot.starts_with("graph topology {"));
        assert!(dot.contains("0 -- 1;"));
        assert!(!dot.contains("1 -- 0;"));
    }
}
