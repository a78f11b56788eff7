//! Transitive closure of a directed graph under bulk insertions.
//!
//! The auxiliary relation `Ans` always equals the irreflexive transitive
//! closure of the current graph. A bulk insertion builds a helper graph H on
//! the affected nodes, closes it exhaustively, and extends `Ans` with all
//! pairs that gained a path through the insertion: a path decomposes into an
//! old prefix, a stretch inside H, and an old suffix.

use crate::graph::{affected_nodes, apply_change, BulkChange, Graph, GraphError};
use crate::oracle;
use std::collections::BTreeSet;

/// Word-packed node subset, used for the helper-graph index space.
type Mask = Vec<u64>;

fn mask_new(k: usize) -> Mask {
    vec![0; k.div_ceil(64)]
}

fn mask_set(m: &mut Mask, i: usize) {
    m[i / 64] |= 1 << (i % 64);
}

fn mask_or(into: &mut Mask, from: &Mask) {
    for (a, b) in into.iter_mut().zip(from) {
        *a |= b;
    }
}

fn mask_intersects(a: &Mask, b: &Mask) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn mask_is_zero(m: &Mask) -> bool {
    m.iter().all(|w| *w == 0)
}

fn mask_ones(m: &Mask) -> impl Iterator<Item = usize> + '_ {
    m.iter()
        .enumerate()
        .flat_map(|(wi, w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b))
}

/// Dynamic transitive-closure state for insertion-only workloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TCState {
    graph: Graph,
    ans: BTreeSet<(usize, usize)>,
}

impl TCState {
    /// Starts from the edgeless directed graph on `n` nodes.
    pub fn init_empty(n: usize) -> Result<Self, GraphError> {
        Ok(TCState { graph: Graph::new(n, true)?, ans: BTreeSet::new() })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// The irreflexive closure relation.
    pub fn ans(&self) -> &BTreeSet<(usize, usize)> {
        &self.ans
    }

    /// Inserts a batch of edges and updates `Ans`.
    ///
    /// H lives on the affected nodes and carries the inserted edges plus all
    /// old `Ans` pairs between affected nodes; its exhaustive closure stands
    /// in for the recursion the asymptotic argument delegates to small depth.
    pub fn bulk_insert(&mut self, eplus: &BTreeSet<(usize, usize)>) -> Result<(), GraphError> {
        let change = BulkChange::insert_only(eplus.clone());
        let new_graph = apply_change(&self.graph, &change)?;
        let vaff: Vec<usize> = affected_nodes(&change).into_iter().collect();
        let k = vaff.len();
        let mut index = vec![usize::MAX; self.graph.n()];
        for (i, &v) in vaff.iter().enumerate() {
            index[v] = i;
        }

        let mut h_edges = BTreeSet::new();
        for &(u, v) in eplus {
            h_edges.insert((index[u], index[v]));
        }
        for i in 0..k {
            for j in 0..k {
                if i != j && self.ans.contains(&(vaff[i], vaff[j])) {
                    h_edges.insert((i, j));
                }
            }
        }
        let h = Graph::with_edges(k.max(1), true, h_edges)
            .expect("helper edges are in range and deduplicated");
        let tc_h = oracle::transitive_closure(&h);

        // reach[i] = nodes TC_H-reachable from i, reflexively.
        let mut reach = vec![mask_new(k); k];
        for i in 0..k {
            mask_set(&mut reach[i], i);
        }
        for (i, j) in tc_h {
            mask_set(&mut reach[i], j);
        }

        // enter[s] = candidate entry points x1 with Ans(s, x1), reflexively;
        // exit[t] = candidate exit points x2 with Ans(x2, t), reflexively.
        let n = self.graph.n();
        let mut enter = vec![mask_new(k); n];
        let mut exit = vec![mask_new(k); n];
        for (j, &v) in vaff.iter().enumerate() {
            mask_set(&mut enter[v], j);
            mask_set(&mut exit[v], j);
        }
        for &(u, v) in &self.ans {
            if index[v] != usize::MAX {
                mask_set(&mut enter[u], index[v]);
            }
            if index[u] != usize::MAX {
                mask_set(&mut exit[v], index[u]);
            }
        }

        let mut ans = self.ans.clone();
        for s in 0..n {
            if mask_is_zero(&enter[s]) {
                continue;
            }
            let mut via = mask_new(k);
            for i in mask_ones(&enter[s]) {
                mask_or(&mut via, &reach[i]);
            }
            for t in 0..n {
                if s != t && mask_intersects(&via, &exit[t]) {
                    ans.insert((s, t));
                }
            }
        }
        self.ans = ans;
        self.graph = new_graph;
        Ok(())
    }

    /// True iff `a` reaches `b`; a node reaches itself.
    pub fn query(&self, a: usize, b: usize) -> Result<bool, GraphError> {
        let n = self.graph.n();
        for node in [a, b] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        Ok(a == b || self.ans.contains(&(a, b)))
    }
}
