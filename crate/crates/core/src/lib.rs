//! Decomposing bipartite graphs into copies of a fixed tree.
//!
//! The pipeline takes a host bipartite graph `G` and a tree `T` with `m`
//! edges, finds an equitable edge colouring, groups it into a
//! pseudo-decomposition (homomorphic images of `T` that partition `E(G)`),
//! and repairs the non-injective images by switching subtrees with
//! injective ones until every image is a genuine copy of `T`.

pub mod cli;
pub mod colouring;
pub mod graph;
pub mod oracle;
pub mod pseudo;
pub mod pipeline;
pub mod repair;
pub mod report;
pub mod seed;
pub mod tree;

pub use colouring::{find_equitable, synth_instance, verify_equitable, Colouring, EquitableSearch};
pub use graph::{edge_connectivity, Graph, Side};
pub use oracle::{brute_force_decompose, verify_decomposition, OracleLimits, OracleOutcome};
pub use pseudo::{build_pseudo_decomposition, BladeMode, PseudoCopy, PseudoDecomposition, Rational};
pub use tree::LabelledTree;
