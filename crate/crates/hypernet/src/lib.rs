//! Growth simulator and mean-field analytics for an evolving hypernetwork.
//!
//! Nodes arrive in batches on a Poisson clock, each batch closes `m`
//! hyperedges with `m2` existing nodes chosen preferentially by
//! hyperdegree, attractiveness and age. The `analytics` module solves the
//! matching mean-field theory (characteristic value, hyperdegree
//! trajectory, stationary hyperdegree distribution) so simulated and
//! predicted distributions can be compared on the same grid.
//!
//! Layout:
//! - [`hypergraph`] — the growing hypergraph and hyperdegree bookkeeping
//! - [`stochastic`] — arrival clock, batch-size and attractiveness laws,
//!   seeded substreams
//! - [`attachment`] — aging-preferential target selection (exact scan and
//!   an equivalent bucketed accelerator)
//! - [`engine`] — the end-to-end growth loop
//! - [`analytics`] — characteristic equation, theoretical distributions,
//!   empirical estimators and tail fits
//! - [`config`] / [`report`] / [`commands`] — run configuration, output
//!   bundles and the operator commands behind the CLI

// parameter guards use `!(x > 0.0)` style so NaN fails validation too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod attachment;
pub mod commands;
pub mod config;
pub mod engine;
pub mod hypergraph;
pub mod report;
pub mod stochastic;

pub use engine::{GrowthEvent, ModelParams, RunOutput, Simulation, StopRule};
pub use hypergraph::{EdgeId, HyperEdge, Hypergraph, NodeId, NodeRecord};
pub use stochastic::{ArrivalClock, AttractivenessSpec, BatchSizeSpec, RngStreams};
