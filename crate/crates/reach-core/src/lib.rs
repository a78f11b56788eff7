//! Dynamic reachability engines verified against brute-force oracles.
//!
//! The crate maintains reachability information for directed and undirected
//! graphs under batched edge insertions and deletions. Three engines are
//! provided, each with a different update structure:
//!
//! - [`tc_insert`]: transitive closure of a directed graph under bulk
//!   insertions. Each batch is compressed to a helper graph on the affected
//!   nodes, closed exactly, and composed with the stored closure.
//! - [`undirected`]: connectivity of an undirected graph under bulk
//!   insertions and deletions, maintaining a rooted spanning forest and its
//!   ancestor closure.
//! - [`algebraic`]: reachability via truncated power-series matrices over
//!   GF(2). The engine keeps an approximation of `(I - A)^{-1} mod 2` for a
//!   weighted adjacency matrix `A` under isolating edge weights, and updates
//!   it with Sherman-Morrison-Woodbury low-rank corrections.
//!
//! Every engine is paired with exhaustive reference computations in
//! [`oracle`], which the test suite treats as ground truth. The [`weights`]
//! module holds the weight constructions the algebraic engine depends on:
//! skew-symmetric non-zero circulation weights for bounded-treewidth graphs,
//! the additive shift that turns them into isolating weights, and the
//! prime-residue weight families used for insertions.

#![forbid(unsafe_code)]

pub mod algebraic;
pub mod decomp;
pub mod generate;
pub mod gf2;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod tc_insert;
pub mod undirected;
pub mod weights;

pub use decomp::{binarize_decomposition, validate_tree_decomposition, TreeDecomposition};
pub use graph::{affected_nodes, apply_change, normalize_change, BulkChange, Graph, GraphError};
pub use weights::{Certification, WeightAssignment};
