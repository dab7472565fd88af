//! Identification of additive link metrics from monitor-to-monitor path
//! measurements.
//!
//! The network is extended with a root and two virtual monitors. When the
//! extended graph is 3-vertex-connected, a nonseparating ear decomposition
//! and an s-t numbering yield three independent spanning trees, from which
//! exactly one linearly independent measurement path per link is built.
//! Path sums then determine every link metric.
//!
//! ```
//! use tomo_core::fixtures::{f1, f1_metrics};
//! use tomo_core::solver::{identify_all, max_relative_error};
//!
//! let gex = f1();
//! let out = identify_all(&gex, &f1_metrics()).unwrap();
//! assert_eq!(out.construction.paths.len(), 6);
//! assert!(max_relative_error(&f1_metrics(), &out.recovered) < 1e-12);
//! ```

pub mod connectivity;
pub mod ears;
pub mod error;
pub mod eval;
pub mod extended;
pub mod fixtures;
mod flow;
pub mod graph;
pub mod harness;
pub mod io;
pub mod par;
pub mod paths;
pub mod rank;
pub mod solver;
pub mod stnumber;
pub mod trees;

pub use connectivity::vertex_connectivity_at_least;
pub use error::{Error, Result};
pub use extended::{build_extended_graph, ExtendedGraph};
pub use flow::local_connectivity;
pub use graph::{Graph, Link, NodeId};
pub use paths::{construct, construct_all, Construction, PathSet};
pub use solver::{identify_all, MetricAssignment};
