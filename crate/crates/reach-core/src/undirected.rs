//! Undirected connectivity under bulk insertions and deletions, maintained
//! through a rooted spanning forest.
//!
//! The forest S stores child→parent links; each tree is rooted at the
//! minimum node id of its component. Updates build a helper graph H on
//! component (or fragment) representatives, take a spanning forest of H by
//! the exhaustive oracle, and realize each H forest edge by the
//! lexicographically minimal concrete edge between the two parts, rerooting
//! the child part onto its attachment node.

use crate::graph::{apply_change, BulkChange, Graph, GraphError};
use crate::oracle;
use std::collections::{BTreeMap, BTreeSet};

/// Spanning-forest connectivity state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestState {
    graph: Graph,
    parent: Vec<Option<usize>>,
    root: Vec<usize>,
    tc_s: BTreeSet<(usize, usize)>,
}

fn canonical(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Climbs the child→parent links to the root.
fn climb(parent: &[Option<usize>], v: usize) -> usize {
    let mut cur = v;
    while let Some(p) = parent[cur] {
        cur = p;
    }
    cur
}

/// Makes `x` the root of its tree by reversing the chain from `x` upward.
fn reroot(parent: &mut [Option<usize>], x: usize) {
    let mut prev = None;
    let mut cur = Some(x);
    while let Some(node) = cur {
        let next = parent[node];
        parent[node] = prev;
        prev = Some(node);
        cur = next;
    }
}

impl ForestState {
    /// Starts from the edgeless undirected graph on `n` nodes.
    pub fn init_empty(n: usize) -> Result<Self, GraphError> {
        Ok(ForestState {
            graph: Graph::new(n, false)?,
            parent: vec![None; n],
            root: (0..n).collect(),
            tc_s: BTreeSet::new(),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Child→parent forest links; `None` marks roots.
    pub fn forest(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn root(&self, v: usize) -> usize {
        self.root[v]
    }

    /// The ancestor relation: (u, v) present iff v is a proper ancestor of u.
    pub fn tc_s(&self) -> &BTreeSet<(usize, usize)> {
        &self.tc_s
    }

    /// True iff `a` and `b` are connected.
    pub fn query(&self, a: usize, b: usize) -> Result<bool, GraphError> {
        let n = self.graph.n();
        for node in [a, b] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        Ok(a == b || self.root[a] == self.root[b])
    }

    /// Inserts a batch of undirected edges.
    ///
    /// H has one node per touched component: the smallest affected node in
    /// it. Components joined by some inserted edge become adjacent in H. A
    /// spanning forest of H decides which components merge along which tree
    /// edges; everything else in the batch becomes a non-tree edge.
    pub fn bulk_insert(&mut self, eplus: &BTreeSet<(usize, usize)>) -> Result<(), GraphError> {
        let change = BulkChange::insert_only(eplus.clone());
        let new_graph = apply_change(&self.graph, &change)?;
        let old_root = self.root.clone();

        // Smallest affected node per touched component.
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for &(u, v) in eplus {
            for node in [u, v] {
                let entry = rep.entry(old_root[node]).or_insert(node);
                *entry = (*entry).min(node);
            }
        }
        let h_nodes: Vec<usize> = rep.values().copied().collect();
        let mut h_index: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &v) in h_nodes.iter().enumerate() {
            h_index.insert(old_root[v], i);
        }
        let mut h_edges = BTreeSet::new();
        for &(u, v) in eplus {
            let (cu, cv) = (old_root[u], old_root[v]);
            if cu != cv {
                let (a, b) = canonical(h_index[&cu], h_index[&cv]);
                h_edges.insert((a, b));
            }
        }
        let h = Graph::with_edges(h_nodes.len().max(1), false, h_edges)
            .expect("helper edges are canonical and in range");
        let s_h = oracle::spanning_forest(&h).expect("helper graph is undirected");

        for (child, par) in s_h.iter().enumerate() {
            let Some(par) = *par else { continue };
            let child_comp = old_root[h_nodes[child]];
            let parent_comp = old_root[h_nodes[par]];
            let realizing = eplus
                .iter()
                .flat_map(|&(a, b)| [(a, b), (b, a)])
                .filter(|&(a, b)| old_root[a] == child_comp && old_root[b] == parent_comp)
                .min()
                .expect("every helper edge is witnessed by an inserted edge");
            reroot(&mut self.parent, realizing.0);
            self.parent[realizing.0] = Some(realizing.1);
        }
        self.graph = new_graph;
        self.finish();
        Ok(())
    }

    /// Deletes a batch of undirected edges.
    ///
    /// Severed tree edges split the forest into fragments. H has one node
    /// per fragment that contains an affected node: the smallest such node.
    /// Fragments joined by a surviving edge become adjacent in H; a spanning
    /// forest of H decides which surviving edges are promoted to tree edges.
    pub fn bulk_delete(&mut self, eminus: &BTreeSet<(usize, usize)>) -> Result<(), GraphError> {
        let change = BulkChange::delete_only(eminus.clone());
        let new_graph = apply_change(&self.graph, &change)?;
        let deleted: BTreeSet<(usize, usize)> =
            eminus.iter().map(|&(u, v)| canonical(u, v)).collect();

        let mut parent = self.parent.clone();
        for v in 0..parent.len() {
            if let Some(p) = parent[v] {
                if deleted.contains(&canonical(v, p)) {
                    parent[v] = None;
                }
            }
        }
        let frag: Vec<usize> = (0..parent.len()).map(|v| climb(&parent, v)).collect();

        // Smallest affected node per fragment.
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for &(u, v) in eminus {
            for node in [u, v] {
                let entry = rep.entry(frag[node]).or_insert(node);
                *entry = (*entry).min(node);
            }
        }
        let h_nodes: Vec<usize> = rep.values().copied().collect();
        let mut h_index: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &v) in h_nodes.iter().enumerate() {
            h_index.insert(frag[v], i);
        }
        let mut h_edges = BTreeSet::new();
        for (a, b) in new_graph.undirected_edges() {
            let (fa, fb) = (frag[a], frag[b]);
            if fa == fb {
                continue;
            }
            // Surviving edges stay inside old components, and every fragment
            // of a component that lost a tree edge contains an affected node,
            // so both sides are represented.
            let (ia, ib) = (h_index[&fa], h_index[&fb]);
            h_edges.insert(canonical(ia, ib));
        }
        let h = Graph::with_edges(h_nodes.len().max(1), false, h_edges)
            .expect("helper edges are canonical and in range");
        let s_h = oracle::spanning_forest(&h).expect("helper graph is undirected");

        for (child, par) in s_h.iter().enumerate() {
            let Some(par) = *par else { continue };
            let child_frag = frag[h_nodes[child]];
            let parent_frag = frag[h_nodes[par]];
            let realizing = new_graph
                .edges()
                .filter(|&(a, b)| frag[a] == child_frag && frag[b] == parent_frag)
                .min()
                .expect("every helper edge is witnessed by a surviving edge");
            reroot(&mut parent, realizing.0);
            parent[realizing.0] = Some(realizing.1);
        }
        self.parent = parent;
        self.graph = new_graph;
        self.finish();
        Ok(())
    }

    /// Reroots every tree at its component minimum, then rebuilds the root
    /// map and the ancestor closure.
    fn finish(&mut self) {
        let n = self.graph.n();
        let mut min_of: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..n {
            let r = climb(&self.parent, v);
            let entry = min_of.entry(r).or_insert(v);
            *entry = (*entry).min(v);
        }
        for (r, m) in min_of {
            if r != m {
                reroot(&mut self.parent, m);
            }
        }
        self.tc_s.clear();
        for v in 0..n {
            let mut cur = v;
            while let Some(p) = self.parent[cur] {
                self.tc_s.insert((v, p));
                cur = p;
            }
            self.root[v] = cur;
        }
    }
}
