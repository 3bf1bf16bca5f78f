//! Deterministic simulator and library for weighted clusterhead election in
//! multi-hop ad-hoc networks.
//!
//! The crate models nodes deployed on a square, derives a symmetric neighbor
//! relation from a transmission range, and elects clusterheads with the WACA
//! weight function (power appropriateness, backbone signal strength, local
//! clustering coefficient, degree difference, and neighborhood stability).
//! A WCA-style one-shot election serves as the comparison baseline, a chunked
//! dissemination model spreads content from backbone injection points through
//! the cluster hierarchy, and a sweep harness aggregates head counts over
//! seeded ranges of node counts and transmission ranges.
//!
//! Everything that consumes randomness takes an explicit seed and is
//! reproducible bit-for-bit; see [`rng`] for the generator contract.

pub mod dissemination;
pub mod error;
pub mod events;
pub mod experiments;
pub mod netmodel;
pub mod rng;
pub mod testutil;
pub mod waca;
pub mod wca;

pub use error::{Error, Result};
pub use netmodel::{Node, NodeId, PowerModel, SignalModel, Topology};
pub use waca::{ClusteringState, Role, WeightConfig};
pub use wca::{WcaClustering, WcaConfig};
