//! Hybrid drawings of host-parasite reconciliations.
//!
//! The host tree is drawn as an icicle of tiled rectangles and the parasite
//! tree as an orthogonal node-link tree placed inside them. The crate
//! validates reconciliations, decides whether an instance can be drawn
//! without crossings, computes crossing-free drawings when possible and
//! falls back to two heuristics otherwise.

pub mod cli;
pub mod generate;
pub mod io;
pub mod layout;
pub mod oracle;
pub mod planar;
pub mod reconcile;
pub mod tree;

pub use reconcile::{
    CostVector, EventKind, EventReport, ExpandedParasite, ReconError, Reconciliation, TimeOrder,
    ValidationReport, Violation,
};
pub use tree::{parse_newick, NodeId, PhyloTree, TreeError};
