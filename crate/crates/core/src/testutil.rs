//! Shared fixtures for unit and integration tests.

use crate::netmodel::{Node, NodeId, PowerModel, SignalModel, Topology};
use crate::waca::WeightConfig;

/// Five-node golden fixture: node 0 sits in the middle with four neighbors
/// that have exactly three links among themselves, giving it a local
/// clustering coefficient of 3/6.
pub fn golden_five() -> Topology {
    let positions = [
        (50.0, 50.0),
        (56.0, 50.0),
        (44.0, 50.0),
        (50.0, 56.0),
        (53.0, 44.0),
    ];
    let nodes = positions
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| Node::new(id as NodeId, x, y))
        .collect();
    Topology::new(nodes, 100.0, 10.0).unwrap()
}

/// Weight configuration that copies each node's signal straight into its
/// weight, convenient for scripting election outcomes.
pub fn signal_only() -> WeightConfig {
    WeightConfig {
        power_factor: 0.0,
        signal_factor: 1.0,
        clustering_factor: 0.0,
        degree_factor: 0.0,
        stability_factor: 0.0,
        ..WeightConfig::default()
    }
}

/// Path a(0) - b(1) - c(2) with signals 0.1 < 0.2 < 0.3, so under
/// [`signal_only`] the chain elects c and b becomes a sub-head.
pub fn path3() -> Topology {
    let mut a = Node::new(0, 0.0, 0.0);
    let mut b = Node::new(1, 8.0, 0.0);
    let mut c = Node::new(2, 16.0, 0.0);
    a.signal = 0.1;
    b.signal = 0.2;
    c.signal = 0.3;
    Topology::new(vec![a, b, c], 100.0, 10.0).unwrap()
}

/// Random deployment with the default attribute models applied.
pub fn random_topology(seed: u64, n: usize, range: f64) -> Topology {
    let nodes = Topology::deploy_uniform(n, 100.0, seed).unwrap();
    let t = Topology::new(nodes, 100.0, range).unwrap();
    let t = t
        .assign_power(&PowerModel::Uniform { lo: 0.7, hi: 4.0 }, seed ^ 0xAAAA)
        .unwrap();
    t.assign_signal(&SignalModel::UniformRandom, seed ^ 0x5555)
        .unwrap()
}
