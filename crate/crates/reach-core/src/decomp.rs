//! Rooted tree decompositions: validation and binarization.
//!
//! A decomposition is a rooted tree of bags over the graph's nodes. The
//! validator checks the three defining conditions (every node covered, every
//! edge covered, occurrence subtrees connected) and reports width, depth,
//! and binarity. The binarizer replaces high-degree tree nodes by spines of
//! duplicated bags so every tree node has at most two children.

use crate::graph::Graph;
use std::collections::BTreeSet;
use thiserror::Error;

/// Errors raised by decomposition construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompError {
    #[error("parent index {parent} of tree node {node} out of range")]
    ParentOutOfRange { node: usize, parent: usize },
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("parent links contain a cycle through tree node {0}")]
    ParentCycle(usize),
    #[error("decomposition has no tree nodes")]
    Empty,
}

/// A rooted tree of bags. Tree nodes are `0..len`; `parent[i]` is `None`
/// exactly for the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    parent: Vec<Option<usize>>,
    bags: Vec<BTreeSet<usize>>,
    root: usize,
    children: Vec<Vec<usize>>,
    height: Vec<usize>,
}

impl TreeDecomposition {
    /// Builds a decomposition from parent links and bags, checking that the
    /// links form a single rooted tree. Bag contents are not checked here;
    /// conditions relative to a graph are the validator's job.
    pub fn new(
        parent: Vec<Option<usize>>,
        bags: Vec<BTreeSet<usize>>,
    ) -> Result<Self, DecompError> {
        let len = parent.len();
        if len == 0 || bags.len() != len {
            return Err(DecompError::Empty);
        }
        let mut root = None;
        for (i, p) in parent.iter().enumerate() {
            match p {
                None => match root {
                    None => root = Some(i),
                    Some(_) => return Err(DecompError::RootCount(2)),
                },
                Some(p) if *p >= len => {
                    return Err(DecompError::ParentOutOfRange { node: i, parent: *p })
                }
                Some(_) => {}
            }
        }
        let root = root.ok_or(DecompError::RootCount(0))?;
        // A cycle in the parent links is a node from which the root is unreachable.
        for i in 0..len {
            let mut cur = i;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > len {
                    return Err(DecompError::ParentCycle(i));
                }
            }
        }
        let mut children = vec![Vec::new(); len];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut td = TreeDecomposition { parent, bags, root, children, height: Vec::new() };
        td.height = td.compute_heights();
        Ok(td)
    }

    fn compute_heights(&self) -> Vec<usize> {
        // Post-order over an explicit stack; h(leaf) = 1.
        let mut height = vec![0usize; self.len()];
        let mut stack = vec![(self.root, false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                height[i] = 1 + self.children[i].iter().map(|&c| height[c]).max().unwrap_or(0);
            } else {
                stack.push((i, true));
                for &c in &self.children[i] {
                    stack.push((c, false));
                }
            }
        }
        height
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn bag(&self, i: usize) -> &BTreeSet<usize> {
        &self.bags[i]
    }

    pub fn bags(&self) -> &[BTreeSet<usize>] {
        &self.bags
    }

    /// Height of tree node `i`: 1 for leaves, 1 + max child height otherwise.
    pub fn height(&self, i: usize) -> usize {
        self.height[i]
    }

    /// Max bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Length of a longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        self.height[self.root] - 1
    }

    pub fn max_children(&self) -> usize {
        self.children.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.max_children() <= 2
    }

    /// The highest bag containing graph node `v`, by tree-node height.
    ///
    /// Well-defined only when the occurrence subtree of `v` is connected
    /// (condition (3)); then the subtree has a unique topmost node. Returns
    /// `None` if `v` occurs in no bag.
    pub fn highest_bag(&self, v: usize) -> Option<usize> {
        (0..self.len())
            .filter(|&i| self.bags[i].contains(&v))
            .max_by_key(|&i| (self.height[i], std::cmp::Reverse(i)))
    }

    /// Height of the highest bag containing `v`.
    pub fn node_height(&self, v: usize) -> Option<usize> {
        self.highest_bag(v).map(|i| self.height[i])
    }

    /// True if `anc` is `i` or an ancestor of `i`.
    pub fn is_ancestor_or_self(&self, anc: usize, i: usize) -> bool {
        let mut cur = i;
        loop {
            if cur == anc {
                return true;
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }
}

/// A violation of one of the three decomposition conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Condition (1): graph node appears in no bag.
    NodeUncovered(usize),
    /// Condition (2): no bag contains both endpoints of the edge.
    EdgeUncovered(usize, usize),
    /// Condition (3): the bags containing the node do not form a connected subtree.
    OccurrenceDisconnected(usize),
}

/// Result of checking a decomposition against a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub width: usize,
    pub depth: usize,
    pub max_children: usize,
    pub binary: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three decomposition conditions for `t` against `g` and
/// reports computed width, depth, max tree-node degree, and binarity.
/// Violations are report entries, not failures.
pub fn validate_tree_decomposition(g: &Graph, t: &TreeDecomposition) -> ValidationReport {
    let mut violations = Vec::new();
    for v in 0..g.n() {
        let occ: Vec<usize> = (0..t.len()).filter(|&i| t.bag(i).contains(&v)).collect();
        if occ.is_empty() {
            violations.push(Violation::NodeUncovered(v));
            continue;
        }
        // Connectivity of the occurrence set: every member must reach the
        // topmost member by parent steps inside the set.
        let occ_set: BTreeSet<usize> = occ.iter().copied().collect();
        let top = *occ.iter().max_by_key(|&&i| t.height(i)).unwrap();
        let connected = occ.iter().all(|&i| {
            let mut cur = i;
            loop {
                if cur == top {
                    return true;
                }
                match t.parent(cur) {
                    Some(p) if occ_set.contains(&p) => cur = p,
                    _ => return false,
                }
            }
        });
        if !connected {
            violations.push(Violation::OccurrenceDisconnected(v));
        }
    }
    for (u, v) in g.undirected_edges() {
        if !(0..t.len()).any(|i| t.bag(i).contains(&u) && t.bag(i).contains(&v)) {
            violations.push(Violation::EdgeUncovered(u, v));
        }
    }
    ValidationReport {
        violations,
        width: t.width(),
        depth: t.depth(),
        max_children: t.max_children(),
        binary: t.is_binary(),
    }
}

/// Rewrites the tree so every node has at most two children. A node with
/// children `c1..cm`, m > 2, keeps `c1` and hands the rest to a spine of
/// duplicated copies of its own bag, each spine node carrying one original
/// child and the next spine node. Bags are otherwise unchanged, so width is
/// preserved exactly; depth may grow by the original degree per level.
pub fn binarize_decomposition(t: &TreeDecomposition) -> TreeDecomposition {
    if t.is_binary() {
        return t.clone();
    }
    let mut parent: Vec<Option<usize>> = t.parent.clone();
    let mut bags: Vec<BTreeSet<usize>> = t.bags.clone();
    for i in 0..t.len() {
        let kids = t.children(i).to_vec();
        if kids.len() <= 2 {
            continue;
        }
        // kids[0] stays on i; each spine node takes one further child.
        let mut anchor = i;
        for (idx, &child) in kids.iter().enumerate().skip(1) {
            if idx + 1 == kids.len() {
                parent[child] = Some(anchor);
            } else {
                let spine = bags.len();
                bags.push(t.bag(i).clone());
                parent.push(Some(anchor));
                parent[child] = Some(spine);
                anchor = spine;
            }
        }
    }
    TreeDecomposition::new(parent, bags).expect("spine rewrite preserves the tree shape")
}
