//! Seeded instance generators: G(n,p) graphs, disjoint path unions,
//! partial k-trees with their tree decompositions, and change scripts.

use crate::decomp::TreeDecomposition;
use crate::graph::{apply_change, BulkChange, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("probability {0} is not within [0, 1]")]
    BadProbability(f64),
    #[error("{0} must be positive")]
    ZeroParameter(&'static str),
    #[error("bag size needs k + 1 ≤ n, got k = {k}, n = {n}")]
    WidthTooLarge { k: usize, n: usize },
}

/// Erdős–Rényi G(n,p): every candidate pair independently with probability
/// `p`. Pair order is fixed, so the edge set is a function of the seed.
pub fn random_gnp(n: usize, p: f64, directed: bool, seed: u64) -> Result<Graph, GenError> {
    if n == 0 {
        return Err(GenError::ZeroParameter("n"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in 0..n {
            let candidate = if directed { u != v } else { u < v };
            if candidate && rng.gen_bool(p) {
                edges.insert((u, v));
            }
        }
    }
    Ok(Graph::with_edges(n, directed, edges).expect("generated pairs are in range"))
}

/// `q` disjoint directed paths of `len` edges each.
pub fn path_union(q: usize, len: usize) -> Result<Graph, GenError> {
    if q == 0 {
        return Err(GenError::ZeroParameter("q"));
    }
    if len == 0 {
        return Err(GenError::ZeroParameter("len"));
    }
    let stride = len + 1;
    let mut edges = BTreeSet::new();
    for path in 0..q {
        for i in 0..len {
            edges.insert((path * stride + i, path * stride + i + 1));
        }
    }
    Ok(Graph::with_edges(q * stride, true, edges).expect("generated pairs are in range"))
}

/// A partial k-tree together with a witnessing decomposition.
///
/// Bags form a heap-shaped binary tree (bag j under bag (j−1)/2), so the
/// depth stays logarithmic. The root bag holds nodes 0..k; every further
/// bag drops one random member of its parent and introduces one fresh
/// node. Candidate edges join the fresh node to its bag mates (all root
/// pairs at the root) and survive with probability `keep_prob`, subject to
/// an optional degree cap; directed output orients each kept edge randomly.
pub fn partial_k_tree(
    n: usize,
    k: usize,
    keep_prob: f64,
    directed: bool,
    max_degree: Option<usize>,
    seed: u64,
) -> Result<(Graph, TreeDecomposition), GenError> {
    if n == 0 {
        return Err(GenError::ZeroParameter("n"));
    }
    if k == 0 {
        return Err(GenError::ZeroParameter("k"));
    }
    if !(0.0..=1.0).contains(&keep_prob) {
        return Err(GenError::BadProbability(keep_prob));
    }
    if k + 1 > n {
        return Err(GenError::WidthTooLarge { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root: BTreeSet<usize> = (0..=k).collect();
    let mut bags = vec![root.clone()];
    let mut parents = vec![None];
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for u in 0..=k {
        for v in (u + 1)..=k {
            candidates.push((u, v));
        }
    }
    for fresh in (k + 1)..n {
        let j = bags.len();
        let parent = (j - 1) / 2;
        let mut inherited: Vec<usize> = bags[parent].iter().copied().collect();
        let drop = rng.gen_range(0..inherited.len());
        inherited.remove(drop);
        let mut bag: BTreeSet<usize> = inherited.iter().copied().collect();
        bag.insert(fresh);
        for &mate in &inherited {
            candidates.push((mate.min(fresh), mate.max(fresh)));
        }
        bags.push(bag);
        parents.push(Some(parent));
    }
    let mut degree = vec![0usize; n];
    let mut edges = BTreeSet::new();
    for (u, v) in candidates {
        if !rng.gen_bool(keep_prob) {
            continue;
        }
        if let Some(cap) = max_degree {
            if degree[u] >= cap || degree[v] >= cap {
                continue;
            }
        }
        let oriented = if directed && rng.gen_bool(0.5) { (v, u) } else { (u, v) };
        if edges.insert(oriented) {
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let g = Graph::with_edges(n, directed, edges).expect("generated pairs are in range");
    let t = TreeDecomposition::new(parents, bags).expect("heap-shaped parents form a tree");
    Ok((g, t))
}

/// A coherent random change script: each step inserts fresh non-edges and
/// (optionally) deletes current edges, tracked against a rolling graph so
/// every block applies cleanly in sequence.
pub fn random_change_script(
    g: &Graph,
    steps: usize,
    max_batch: usize,
    allow_deletes: bool,
    seed: u64,
) -> Vec<BulkChange> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = g.clone();
    let mut script = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut inserted = BTreeSet::new();
        let mut deleted = BTreeSet::new();
        let insert_target = rng.gen_range(0..=max_batch);
        for _ in 0..insert_target * 3 {
            if inserted.len() >= insert_target {
                break;
            }
            let u = rng.gen_range(0..current.n());
            let v = rng.gen_range(0..current.n());
            let (u, v) = if current.is_directed() { (u, v) } else { (u.min(v), u.max(v)) };
            if u != v && !current.has_edge(u, v) {
                inserted.insert((u, v));
            }
        }
        if allow_deletes {
            let pool: Vec<(usize, usize)> = if current.is_directed() {
                current.edges().collect()
            } else {
                current.undirected_edges().collect()
            };
            let delete_target = rng.gen_range(0..=max_batch.min(pool.len()));
            deleted = pool.choose_multiple(&mut rng, delete_target).copied().collect();
        }
        let change = BulkChange::new(inserted, deleted);
        current = apply_change(&current, &change).expect("script tracks the rolling graph");
        script.push(change);
    }
    script
}
