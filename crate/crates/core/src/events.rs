//! Scripted topology events and incremental re-election.
//!
//! [`apply_event`] reacts to a single change by recomputing weights and head
//! choices only where beacon-observable inputs changed, then iterating that
//! local wave until quiescence. The result is required to match
//! [`event_oracle`], a from-scratch fixed-point election on the changed
//! topology seeded with the same clusterhead snapshots; tests assert the two
//! agree exactly.
//!
//! Per round, a node's weight depends on its own attributes, its neighbor
//! set, the links among its neighbors, and its clusterhead status plus
//! snapshot; its head choice depends on its own and its neighbors' weights.
//! Dirty sets are propagated along exactly those edges, so untouched nodes
//! provably keep the values a full recomputation would give them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{Node, NodeId, Topology};
use crate::waca::{self, ClusteringState, WeightConfig};

/// A scripted change to the running network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyEvent {
    NodeMoved {
        id: NodeId,
        x: f64,
        y: f64,
    },
    NodeRemoved {
        id: NodeId,
    },
    NodeAdded {
        node: Node,
    },
    AttributeChanged {
        id: NodeId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power_ratio: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signal: Option<f64>,
    },
}

/// Parses a line-delimited JSON event script. Blank lines are skipped;
/// errors name the offending line.
pub fn parse_event_script(text: &str) -> Result<Vec<TopologyEvent>> {
    let mut events = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let event: TopologyEvent = serde_json::from_str(line).map_err(|e| Error::ParseLine {
            line: idx + 1,
            message: e.to_string(),
        })?;
        events.push(event);
    }
    Ok(events)
}

/// Dirty sets seeded by one event.
struct Touched {
    /// Ids whose neighbor set changed; they must re-elect even when no
    /// weight moved.
    links_changed: BTreeSet<NodeId>,
    /// Ids whose weight inputs may have changed: a flipped adjacency pair
    /// (x, y) shifts the clustering coefficient of every common neighbor,
    /// so all old and new neighbors of a moved node are suspects even when
    /// their own neighbor sets stay put.
    weights_touched: BTreeSet<NodeId>,
}

/// Applies `event` to the topology and reports which nodes it touched.
fn apply_to_topology(topology: &Topology, event: &TopologyEvent) -> Result<(Topology, Touched)> {
    let mut links_changed = BTreeSet::new();
    let mut weights_touched = BTreeSet::new();
    let next = match event {
        TopologyEvent::NodeMoved { id, x, y } => {
            let old_neighbors = topology.neighbor_set(*id)?;
            let next = topology.with_node_moved(*id, *x, *y)?;
            let new_neighbors = next.neighbor_set(*id)?;
            if old_neighbors != new_neighbors {
                links_changed.insert(*id);
                links_changed.extend(old_neighbors.symmetric_difference(&new_neighbors).copied());
                weights_touched.insert(*id);
                weights_touched.extend(old_neighbors.union(&new_neighbors).copied());
            }
            // identical neighbor sets mean no adjacency pair flipped at all,
            // so every weight input is untouched
            next
        }
        TopologyEvent::NodeRemoved { id } => {
            let old_neighbors = topology.neighbor_set(*id)?;
            let next = topology.with_node_removed(*id)?;
            links_changed.extend(old_neighbors.iter().copied());
            weights_touched.extend(old_neighbors);
            next
        }
        TopologyEvent::NodeAdded { node } => {
            let next = topology.with_node_added(*node)?;
            links_changed.insert(node.id);
            links_changed.extend(next.neighbors(node.id)?.iter().copied());
            weights_touched.insert(node.id);
            weights_touched.extend(next.neighbors(node.id)?.iter().copied());
            next
        }
        TopologyEvent::AttributeChanged {
            id,
            power_ratio,
            signal,
        } => {
            let next = topology.with_attributes(*id, *power_ratio, *signal)?;
            weights_touched.insert(*id);
            next
        }
    };
    Ok((
        next,
        Touched {
            links_changed,
            weights_touched,
        },
    ))
}

/// Clusterhead snapshots carried across the event: entries of removed nodes
/// are dropped, everything else stays frozen.
fn carry_memory(
    state: &ClusteringState,
    event: &TopologyEvent,
) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
    let mut memory = state.head_memory().clone();
    if let TopologyEvent::NodeRemoved { id } = event {
        memory.remove(id);
    }
    memory
}

/// Incremental reaction to one topology event.
///
/// Recomputes weights for nodes whose weight inputs changed, re-elects where
/// a weight or a neighbor set changed, and repeats with the nodes whose
/// clusterhead status flipped until nothing moves. Beacons grow by the
/// number of devices that re-broadcast a changed weight or head per wave, so
/// an event that changes nothing costs nothing.
pub fn apply_event(
    topology: &Topology,
    state: &ClusteringState,
    event: &TopologyEvent,
    cfg: &WeightConfig,
    max_rounds: u32,
) -> Result<(Topology, ClusteringState)> {
    cfg.validate()?;
    if max_rounds == 0 {
        return Err(Error::config("max_rounds must be >= 1"));
    }
    let (next, touched) = apply_to_topology(topology, event)?;
    let memory0 = carry_memory(state, event);

    let mut weights: BTreeMap<NodeId, f64> = state
        .weights()
        .iter()
        .filter(|(id, _)| next.contains(**id))
        .map(|(&id, &w)| (id, w))
        .collect();
    let mut heads: BTreeMap<NodeId, NodeId> = state
        .heads()
        .iter()
        .filter(|(id, _)| next.contains(**id))
        .map(|(&id, &h)| (id, h))
        .collect();
    if let TopologyEvent::NodeAdded { node } = event {
        // a fresh node starts self-electing with no snapshot
        heads.insert(node.id, node.id);
    }
    // sitting clusterheads are exactly the snapshot holders
    let mut ch_set: BTreeSet<NodeId> = memory0.keys().copied().collect();
    let mut memory = memory0;

    let mut weight_dirty: BTreeSet<NodeId> = touched
        .weights_touched
        .iter()
        .copied()
        .filter(|id| next.contains(*id))
        .collect();
    let mut head_dirty_extra: BTreeSet<NodeId> = touched
        .links_changed
        .iter()
        .copied()
        .filter(|id| next.contains(*id))
        .collect();

    let mut beacons_added = 0u64;
    let mut rounds = 0u32;
    let mut settled = false;

    while rounds < max_rounds {
        rounds += 1;

        let mut weight_changed = BTreeSet::new();
        for &id in &weight_dirty {
            let node = next.node(id).expect("dirty ids live in the topology");
            let neighbors = next
                .neighbor_set(id)
                .expect("dirty ids live in the topology");
            let w = waca::event_weight(
                &next,
                node,
                &neighbors,
                ch_set.contains(&id),
                memory.get(&id),
                cfg,
            );
            if weights.get(&id) != Some(&w) {
                weights.insert(id, w);
                weight_changed.insert(id);
            }
        }

        let mut head_dirty: BTreeSet<NodeId> = head_dirty_extra.clone();
        head_dirty.extend(weight_changed.iter().copied());
        for &id in &weight_changed {
            head_dirty.extend(next.neighbors(id).expect("known node").iter().copied());
        }

        let mut head_changed = BTreeSet::new();
        for &id in &head_dirty {
            let own = *weights.get(&id).expect("weights cover the topology");
            let choice =
                waca::choose_head(id, own, next.neighbors(id).expect("known node"), &weights);
            if heads.get(&id) != Some(&choice) {
                heads.insert(id, choice);
                head_changed.insert(id);
            }
        }

        beacons_added += weight_changed.union(&head_changed).count() as u64;

        let new_ch: BTreeSet<NodeId> = heads
            .iter()
            .filter(|(id, head)| id == head)
            .map(|(&id, _)| id)
            .collect();
        let entered: BTreeSet<NodeId> = new_ch.difference(&ch_set).copied().collect();
        let left: BTreeSet<NodeId> = ch_set.difference(&new_ch).copied().collect();
        for &id in &entered {
            memory.insert(id, next.neighbor_set(id).expect("known node"));
        }
        for id in &left {
            memory.remove(id);
        }
        ch_set = new_ch;

        if weight_changed.is_empty()
            && head_changed.is_empty()
            && entered.is_empty()
            && left.is_empty()
        {
            settled = true;
            break;
        }

        weight_dirty = entered.union(&left).copied().collect();
        head_dirty_extra.clear();
    }

    let result = ClusteringState::from_parts(
        weights,
        heads,
        memory,
        state.beacons() + beacons_added,
        settled,
        rounds,
    );
    Ok((next, result))
}

/// From-scratch reference for [`apply_event`]: the event applied to the
/// topology followed by a full fixed-point election seeded with the carried
/// snapshots. `apply_event` must produce the same clustering.
pub fn event_oracle(
    topology: &Topology,
    state: &ClusteringState,
    event: &TopologyEvent,
    cfg: &WeightConfig,
    max_rounds: u32,
) -> Result<(Topology, ClusteringState)> {
    let (next, _) = apply_to_topology(topology, event)?;
    let memory = carry_memory(state, event);
    let settled = waca::settle_with_memory(&next, cfg, max_rounds, memory)?;
    Ok((next, settled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, uniform_u64};
    use crate::testutil::random_topology;
    use crate::waca::settle;

    fn cfg() -> WeightConfig {
        WeightConfig::default()
    }

    #[test]
    fn event_script_parses_and_names_bad_lines() {
        let script = r#"
            {"kind": "node_moved", "id": 1, "x": 2.0, "y": 3.0}

            {"kind": "node_removed", "id": 0}
            {"kind": "attribute_changed", "id": 2, "signal": 0.25}
        "#;
        let events = parse_event_script(script).unwrap();
        assert_eq!(events.len(), 3);
        assert_eq!(
            events[2],
            TopologyEvent::AttributeChanged {
                id: 2,
                power_ratio: None,
                signal: Some(0.25)
            }
        );

        let bad = "{\"kind\": \"node_removed\", \"id\": 0}\n{\"kind\": \"warp\"}";
        match parse_event_script(bad) {
            Err(Error::ParseLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected line error, got {other:?}"),
        }
    }

    #[test]
    fn removing_the_only_clusterhead_triggers_reelection() {
        // complete 3-node graph with scripted weights
        let mut a = Node::new(0, 50.0, 50.0);
        let mut b = Node::new(1, 53.0, 50.0);
        let mut c = Node::new(2, 50.0, 53.0);
        a.signal = 0.1;
        b.signal = 0.5;
        c.signal = 0.9;
        let t = Topology::new(vec![a, b, c], 100.0, 10.0).unwrap();
        let cfg = crate::testutil::signal_only();
        let st = settle(&t, &cfg, 32).unwrap();
        assert_eq!(st.head(0), Some(2));
        assert_eq!(st.head(1), Some(2));

        let (t2, st2) =
            apply_event(&t, &st, &TopologyEvent::NodeRemoved { id: 2 }, &cfg, 32).unwrap();
        assert!(st2.settled());
        assert_eq!(st2.role(1), Some(crate::waca::Role::Clusterhead));
        assert_eq!(st2.role(0), Some(crate::waca::Role::Slave));
        assert_eq!(st2.head(0), Some(1));
        assert!(!t2.contains(2));
    }

    #[test]
    fn lowering_the_heads_attributes_reelects() {
        let mut a = Node::new(0, 50.0, 50.0);
        let mut b = Node::new(1, 53.0, 50.0);
        a.signal = 0.4;
        b.signal = 0.8;
        let t = Topology::new(vec![a, b], 100.0, 10.0).unwrap();
        let cfg = crate::testutil::signal_only();
        let st = settle(&t, &cfg, 32).unwrap();
        assert_eq!(st.head(0), Some(1));

        let drop = TopologyEvent::AttributeChanged {
            id: 1,
            power_ratio: None,
            signal: Some(0.0),
        };
        let (_, st2) = apply_event(&t, &st, &drop, &cfg, 32).unwrap();
        assert!(st2.settled());
        assert_eq!(
            st2.head(0),
            Some(0),
            "head's weight collapse induces re-election"
        );
        assert_eq!(st2.head(1), Some(0));
    }

    #[test]
    fn noop_move_changes_nothing_and_costs_no_beacons() {
        let t = random_topology(1234, 15, 30.0);
        let st = settle(&t, &cfg(), 32).unwrap();
        let node = t.nodes()[4];
        let noop = TopologyEvent::NodeMoved {
            id: node.id,
            x: node.x,
            y: node.y,
        };
        let (t2, st2) = apply_event(&t, &st, &noop, &cfg(), 32).unwrap();
        assert_eq!(t, t2);
        assert!(st.same_clustering(&st2));
        assert_eq!(
            st.beacons(),
            st2.beacons(),
            "no beacon beyond the periodic ones"
        );
    }

    #[test]
    fn unknown_ids_error() {
        let t = random_topology(5, 5, 30.0);
        let st = settle(&t, &cfg(), 32).unwrap();
        let ev = TopologyEvent::NodeRemoved { id: 99 };
        assert!(matches!(
            apply_event(&t, &st, &ev, &cfg(), 32),
            Err(Error::UnknownNode(99))
        ));
        let dup = TopologyEvent::NodeAdded {
            node: Node::new(0, 1.0, 1.0),
        };
        assert!(matches!(
            apply_event(&t, &st, &dup, &cfg(), 32),
            Err(Error::DuplicateNode(0))
        ));
    }

    fn random_event(
        rng: &mut rand_chacha::ChaCha8Rng,
        t: &Topology,
        fresh: &mut NodeId,
    ) -> TopologyEvent {
        let ids: Vec<NodeId> = t.nodes().iter().map(|n| n.id).collect();
        let pick = |rng: &mut rand_chacha::ChaCha8Rng, ids: &[NodeId]| {
            ids[uniform_u64(rng, ids.len() as u64) as usize]
        };
        match uniform_u64(rng, 4) {
            0 => TopologyEvent::NodeMoved {
                id: pick(rng, &ids),
                x: crate::rng::uniform_f64(rng, 0.0, 100.0),
                y: crate::rng::uniform_f64(rng, 0.0, 100.0),
            },
            1 if ids.len() > 2 => TopologyEvent::NodeRemoved {
                id: pick(rng, &ids),
            },
            2 => {
                *fresh += 1;
                let mut node = Node::new(
                    *fresh,
                    crate::rng::uniform_f64(rng, 0.0, 100.0),
                    crate::rng::uniform_f64(rng, 0.0, 100.0),
                );
                node.power_ratio = crate::rng::uniform_f64(rng, 0.7, 4.0);
                node.signal = crate::rng::uniform_f64(rng, 0.0, 1.0);
                TopologyEvent::NodeAdded { node }
            }
            _ => TopologyEvent::AttributeChanged {
                id: pick(rng, &ids),
                power_ratio: Some(crate::rng::uniform_f64(rng, 0.7, 4.0)),
                signal: Some(crate::rng::uniform_f64(rng, 0.0, 1.0)),
            },
        }
    }

    #[test]
    fn incremental_updates_match_full_recomputation() {
        let mut rng = rng_from_seed(0xD1CE);
        for trial in 0..40u64 {
            let n = 4 + uniform_u64(&mut rng, 20) as usize;
            let range = 15.0 + uniform_u64(&mut rng, 40) as f64;
            let mut t = random_topology(7000 + trial, n, range);
            let mut st = settle(&t, &cfg(), 32).unwrap();
            let mut fresh: NodeId = 1000;
            for _ in 0..6 {
                let ev = random_event(&mut rng, &t, &mut fresh);
                let (t_inc, st_inc) = apply_event(&t, &st, &ev, &cfg(), 64).unwrap();
                let (_, st_full) = event_oracle(&t, &st, &ev, &cfg(), 64).unwrap();
                assert!(st_inc.settled(), "incremental update failed to settle");
                assert!(
                    st_inc.same_clustering(&st_full),
                    "incremental and full recomputation diverged on {ev:?}"
                );
                t = t_inc;
                st = st_inc;
            }
        }
    }
}
