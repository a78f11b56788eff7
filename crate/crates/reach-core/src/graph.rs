//! Graph and change-script representation.
//!
//! Nodes are dense integers `0..n`. Directed graphs store their edge set as
//! ordered pairs; undirected graphs are materialized bidirected, so one edge
//! representation serves both the forest engine and the weight machinery.
//! A [`BulkChange`] is one update step: a set of inserted edges and a set of
//! deleted edges, applied insert-first.

use std::collections::BTreeSet;
use thiserror::Error;

/// Errors raised by graph construction and change application.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop ({0},{0}) is not a valid edge")]
    SelfLoop(usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("change is not normalized: edge ({0},{1}) is already present")]
    InsertPresent(usize, usize),
    #[error("change is not normalized: edge ({0},{1}) is absent")]
    DeleteAbsent(usize, usize),
    #[error("change is not normalized: edge ({0},{1}) is both inserted and deleted")]
    InsertDeleteOverlap(usize, usize),
    #[error("graph must have at least one node")]
    EmptyDomain,
}

/// A directed or undirected graph on nodes `0..n`.
///
/// Invariants: no self-loops, no duplicate edges; an undirected graph
/// contains both orientations of every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Creates an edgeless graph on `n` nodes.
    pub fn new(n: usize, directed: bool) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyDomain);
        }
        Ok(Graph { n, directed, edges: BTreeSet::new() })
    }

    /// Creates a graph from an edge list, validating node ranges and
    /// rejecting self-loops. For undirected graphs each listed edge is
    /// stored in both orientations; duplicates collapse.
    pub fn with_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::new(n, directed)?;
        for (u, v) in edges {
            g.check_pair(u, v)?;
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    /// All stored directed edges in ascending order. For undirected graphs
    /// this yields both orientations.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Undirected edges in canonical `(min,max)` form, each once.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied().filter(|&(u, v)| u < v || !self.has_edge(v, u))
    }

    pub fn out_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((u, 0)..(u, self.n)).map(|&(_, v)| v)
    }

    /// Number of distinct neighbors of `u`, ignoring edge orientation.
    pub fn degree(&self, u: usize) -> usize {
        let mut nbrs: BTreeSet<usize> = self.out_neighbors(u).collect();
        for v in 0..self.n {
            if self.has_edge(v, u) {
                nbrs.insert(v);
            }
        }
        nbrs.len()
    }

    /// The bidirected extension: both orientations of every edge, as a
    /// directed graph. For undirected graphs this is the graph itself.
    pub fn bidirected(&self) -> Graph {
        let mut edges = self.edges.clone();
        for &(u, v) in &self.edges {
            edges.insert((v, u));
        }
        Graph { n: self.n, directed: true, edges }
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for node in [u, v] {
            if node >= self.n {
                return Err(GraphError::NodeOutOfRange { node, n: self.n });
            }
        }
        Ok(())
    }

    fn insert_edge(&mut self, u: usize, v: usize) {
        self.edges.insert((u, v));
        if !self.directed {
            self.edges.insert((v, u));
        }
    }

    fn remove_edge(&mut self, u: usize, v: usize) {
        self.edges.remove(&(u, v));
        if !self.directed {
            self.edges.remove(&(v, u));
        }
    }
}

/// One change step: edges to insert and edges to delete.
///
/// Insertions are applied before deletions, so an edge listed in both sets
/// is absent afterwards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BulkChange {
    pub inserted: BTreeSet<(usize, usize)>,
    pub deleted: BTreeSet<(usize, usize)>,
}

impl BulkChange {
    pub fn new<I, D>(inserted: I, deleted: D) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
        D: IntoIterator<Item = (usize, usize)>,
    {
        BulkChange {
            inserted: inserted.into_iter().collect(),
            deleted: deleted.into_iter().collect(),
        }
    }

    pub fn insert_only<I: IntoIterator<Item = (usize, usize)>>(inserted: I) -> Self {
        Self::new(inserted, [])
    }

    pub fn delete_only<D: IntoIterator<Item = (usize, usize)>>(deleted: D) -> Self {
        Self::new([], deleted)
    }

    pub fn is_empty(&self) -> bool {
        self.inserted.is_empty() && self.deleted.is_empty()
    }

    pub fn size(&self) -> usize {
        self.inserted.len() + self.deleted.len()
    }
}

/// Applies a normalized change: inserts `E+`, then removes `E-`.
///
/// Rejects non-normalized changes: inserting a present edge, deleting an
/// absent one, an edge in both sets, a self-loop, or an out-of-range node.
pub fn apply_change(g: &Graph, c: &BulkChange) -> Result<Graph, GraphError> {
    let mut out = g.clone();
    for &(u, v) in &c.inserted {
        out.check_pair(u, v)?;
        if c.deleted.contains(&(u, v)) {
            return Err(GraphError::InsertDeleteOverlap(u, v));
        }
        if out.has_edge(u, v) {
            return Err(GraphError::InsertPresent(u, v));
        }
        out.insert_edge(u, v);
    }
    for &(u, v) in &c.deleted {
        out.check_pair(u, v)?;
        if !g.has_edge(u, v) {
            return Err(GraphError::DeleteAbsent(u, v));
        }
        out.remove_edge(u, v);
    }
    Ok(out)
}

/// Normalizes a change against a graph: drops inserts of present edges and
/// deletes of absent edges. An edge in both sets nets to "absent" (inserted
/// first, then deleted), so it leaves `E+` and stays in `E-` only if it was
/// present to begin with. For undirected graphs pairs are canonicalized to
/// `(min,max)` form first.
pub fn normalize_change(g: &Graph, c: &BulkChange) -> BulkChange {
    let canon = |(u, v): (usize, usize)| if g.directed || u <= v { (u, v) } else { (v, u) };
    let inserted: BTreeSet<_> = c.inserted.iter().copied().map(canon).collect();
    let deleted: BTreeSet<_> = c.deleted.iter().copied().map(canon).collect();
    let norm_inserted = inserted
        .iter()
        .copied()
        .filter(|e| !deleted.contains(e) && !g.has_edge(e.0, e.1))
        .collect();
    let norm_deleted = deleted.iter().copied().filter(|e| g.has_edge(e.0, e.1)).collect();
    BulkChange { inserted: norm_inserted, deleted: norm_deleted }
}

/// All endpoints of edges in the change.
pub fn affected_nodes(c: &BulkChange) -> BTreeSet<usize> {
    c.inserted.iter().chain(c.deleted.iter()).flat_map(|&(u, v)| [u, v]).collect()
}
