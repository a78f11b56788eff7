//! Weight constructions: skew-symmetric non-zero-circulation weights for
//! bounded-treewidth graphs, the isolating shift, deletion zeroing, and the
//! prime-residue insertion-weight family.
//!
//! Weights are arbitrary-precision integers throughout; the tree-based
//! constructions produce values far beyond 64 bits even on toy instances.

use crate::decomp::{binarize_decomposition, validate_tree_decomposition, TreeDecomposition};
use crate::graph::Graph;
use crate::oracle::{self, OracleError};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("assignment is not skew-symmetric at edge ({0}, {1})")]
    NotSkewSymmetric(usize, usize),
    #[error("assignment lacks certification `{0}`")]
    NotCertified(&'static str),
    #[error("weight of edge ({0}, {1}) exceeds the declared bound")]
    BoundViolation(usize, usize),
    #[error("edge ({0}, {1}) has no weight")]
    MissingWeight(usize, usize),
    #[error("node {node} has degree {degree}, limit {max}")]
    DegreeExceeded { node: usize, degree: usize, max: usize },
    #[error("decomposition width {width} exceeds limit {max}")]
    WidthExceeded { width: usize, max: usize },
    #[error("decomposition is not binary")]
    NotBinary,
    #[error("decomposition invalid: {0} violations")]
    InvalidDecomposition(usize),
    #[error("separating-prime set needs at least two elements")]
    NeedTwoElements,
    #[error("no separating prime within {bits} bits, last tried {last}")]
    PrimeBudgetExhausted { bits: u32, last: u64 },
    #[error("no admissible prime at level {level} within {bits} bits")]
    LevelSearchExhausted { level: usize, bits: u32 },
    #[error("inserted edge ({0}, {1}) already present")]
    InsertionOverlap(usize, usize),
    #[error("reach relation contains pairs outside the graph closure")]
    ReachMismatch,
    #[error("too many inserted edges for mask enumeration: {count} (limit {max})")]
    TooManyInsertions { count: usize, max: usize },
    #[error("too many affected nodes for path enumeration: {count} (limit {max})")]
    TooManyAffected { count: usize, max: usize },
    #[error("path enumeration budget exceeded")]
    EnumerationBudget,
    #[error("retries exhausted without an isolating draw")]
    RetriesExhausted,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// What has been established about an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    None,
    NonzeroCirculation,
    Isolating,
    StronglyRealIsolating,
}

/// A map from directed edges to integer weights, with metadata recording
/// skew-symmetry, a magnitude bound exponent, and certification status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAssignment {
    weights: BTreeMap<(usize, usize), BigInt>,
    skew_symmetric: bool,
    bound_exponent: Option<u32>,
    certification: Certification,
}

impl Default for WeightAssignment {
    fn default() -> Self {
        Self::new()
    }
}

impl WeightAssignment {
    pub fn new() -> Self {
        WeightAssignment {
            weights: BTreeMap::new(),
            skew_symmetric: false,
            bound_exponent: None,
            certification: Certification::None,
        }
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&BigInt> {
        self.weights.get(&(u, v))
    }

    pub fn set(&mut self, u: usize, v: usize, w: BigInt) {
        self.weights.insert((u, v), w);
    }

    /// Sets w(u,v) and w(v,u) = −w(u,v).
    pub fn set_skew(&mut self, u: usize, v: usize, w: BigInt) {
        self.weights.insert((v, u), -w.clone());
        self.weights.insert((u, v), w);
    }

    pub fn remove(&mut self, u: usize, v: usize) -> Option<BigInt> {
        self.weights.remove(&(u, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &BigInt)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn map(&self) -> &BTreeMap<(usize, usize), BigInt> {
        &self.weights
    }

    pub fn skew_symmetric(&self) -> bool {
        self.skew_symmetric
    }

    pub fn set_skew_symmetric(&mut self, value: bool) {
        self.skew_symmetric = value;
    }

    pub fn bound_exponent(&self) -> Option<u32> {
        self.bound_exponent
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn set_certification(&mut self, c: Certification) {
        self.certification = c;
    }

    /// First stored pair violating w(u,v) = −w(v,u), if any.
    pub fn skew_violation(&self) -> Option<(usize, usize)> {
        for ((u, v), w) in &self.weights {
            match self.weights.get(&(*v, *u)) {
                Some(back) if w + back == BigInt::zero() => {}
                _ => return Some((*u, *v)),
            }
        }
        None
    }

    /// Largest |w| over all entries.
    pub fn max_abs(&self) -> BigInt {
        self.weights.values().map(|w| w.abs()).max().unwrap_or_else(BigInt::zero)
    }
}

fn big_pow(base: usize, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// The isolating shift: w′(e) = w(e) + n^{k+2} per directed edge. The result
/// is positive everywhere (|w| ≤ n^k < n^{k+2}) and no longer skew-symmetric;
/// every minimum-weight path becomes unique.
pub fn shift_to_isolating(
    w: &WeightAssignment,
    n: usize,
    k: u32,
) -> Result<WeightAssignment, WeightError> {
    if let Some((u, v)) = w.skew_violation() {
        return Err(WeightError::NotSkewSymmetric(u, v));
    }
    if w.certification != Certification::NonzeroCirculation {
        return Err(WeightError::NotCertified("nonzero_circulation"));
    }
    let bound = big_pow(n, k);
    let shift = big_pow(n, k + 2);
    let mut out = WeightAssignment::new();
    for ((u, v), weight) in &w.weights {
        if weight.abs() > bound {
            return Err(WeightError::BoundViolation(*u, *v));
        }
        out.set(*u, *v, weight + &shift);
    }
    out.bound_exponent = Some(k + 3);
    out.certification = Certification::Isolating;
    Ok(out)
}

/// The bounded-degree circulation weight: (4β·3^β + 2)^h · 3^ℓ.
fn circulation_weight(beta: u32, h: u32, ell: u32) -> BigInt {
    let base = BigInt::from(4 * beta) * big_pow(3, beta) + 2;
    num_traits::pow(base, h as usize) * big_pow(3, ell)
}

/// Skew-symmetric non-zero-circulation weights for a bounded-degree graph
/// with a binary tree decomposition.
///
/// Each bidirected edge e is charged to B_e, the higher of its endpoints'
/// topmost bags; inside the bag's lexicographic enumeration of charged
/// ordered pairs the edge gets a 1-based index ℓ(e). The ascending-id
/// orientation receives (4β·3^β+2)^{h(B_e)}·3^{ℓ(e)} with β = 2d(k+1); the
/// reverse gets the negation. Within every simple cycle the largest
/// magnitude strictly outweighs the rest, so no cycle sums to zero.
pub fn btw_bounded_degree_weights(
    g: &Graph,
    t: &TreeDecomposition,
    d: usize,
    k: usize,
) -> Result<WeightAssignment, WeightError> {
    let report = validate_tree_decomposition(g, t);
    if !report.is_valid() {
        return Err(WeightError::InvalidDecomposition(report.violations.len()));
    }
    if !t.is_binary() {
        return Err(WeightError::NotBinary);
    }
    if report.width > k {
        return Err(WeightError::WidthExceeded { width: report.width, max: k });
    }
    for v in 0..g.n() {
        let degree = g.degree(v);
        if degree > d {
            return Err(WeightError::DegreeExceeded { node: v, degree, max: d });
        }
    }
    let beta = (2 * d * (k + 1)) as u32;
    let highest: Vec<Option<usize>> = (0..g.n()).map(|v| t.highest_bag(v)).collect();
    let mut charged: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (u, v) in g.undirected_edges() {
        let bu = highest[u].expect("validated decomposition covers every node");
        let bv = highest[v].expect("validated decomposition covers every node");
        let bag = if t.height(bu) >= t.height(bv) { bu } else { bv };
        let list = charged.entry(bag).or_default();
        list.push((u, v));
        list.push((v, u));
    }
    let mut out = WeightAssignment::new();
    for (bag, mut pairs) in charged {
        pairs.sort_unstable();
        let h = t.height(bag) as u32;
        for (idx, &(u, v)) in pairs.iter().enumerate() {
            if u < v {
                out.set_skew(u, v, circulation_weight(beta, h, idx as u32 + 1));
            }
        }
    }
    out.skew_symmetric = true;
    out.certification = Certification::NonzeroCirculation;
    Ok(out)
}

/// Skew-symmetric non-zero-circulation weights for any graph with a valid
/// tree decomposition, via the copy-graph reduction.
///
/// The copy graph has one node v_B per (bag, member) incidence, chain edges
/// between consecutive copies of the same node, and one intra-bag edge per
/// original edge placed at the topmost bag containing both endpoints. The
/// widened decomposition adds the parent bag's copies to each bag. The copy
/// graph has bounded degree, so the bounded-degree construction applies;
/// weights pull back by summing along the unique copy path of each edge.
pub fn btw_weights(g: &Graph, t: &TreeDecomposition) -> Result<WeightAssignment, WeightError> {
    let report = validate_tree_decomposition(g, t);
    if !report.is_valid() {
        return Err(WeightError::InvalidDecomposition(report.violations.len()));
    }
    let t = binarize_decomposition(t);

    // Dense copy ids in (bag, node) order.
    let mut copy: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for b in 0..t.len() {
        for &v in t.bag(b) {
            let id = copy.len();
            copy.insert((b, v), id);
        }
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for b in 0..t.len() {
        if let Some(p) = t.parent(b) {
            for &v in t.bag(b) {
                if t.bag(p).contains(&v) {
                    let (a, c) = (copy[&(b, v)], copy[&(p, v)]);
                    edges.insert((a.min(c), a.max(c)));
                }
            }
        }
    }
    // The topmost bag containing both endpoints hosts the intra-bag edge.
    let top_common = |u: usize, v: usize| -> usize {
        (0..t.len())
            .filter(|&b| t.bag(b).contains(&u) && t.bag(b).contains(&v))
            .max_by_key(|&b| t.height(b))
            .expect("validated decomposition covers every edge")
    };
    for (u, v) in g.undirected_edges() {
        let b = top_common(u, v);
        let (a, c) = (copy[&(b, u)], copy[&(b, v)]);
        edges.insert((a.min(c), a.max(c)));
    }
    let g_prime =
        Graph::with_edges(copy.len(), false, edges).expect("copy edges are canonical and in range");

    let mut bags_prime: Vec<BTreeSet<usize>> = Vec::with_capacity(t.len());
    let mut parents_prime: Vec<Option<usize>> = Vec::with_capacity(t.len());
    for b in 0..t.len() {
        let mut bag: BTreeSet<usize> = t.bag(b).iter().map(|&v| copy[&(b, v)]).collect();
        if let Some(p) = t.parent(b) {
            bag.extend(t.bag(p).iter().map(|&v| copy[&(p, v)]));
        }
        bags_prime.push(bag);
        parents_prime.push(t.parent(b));
    }
    let t_prime = TreeDecomposition::new(parents_prime, bags_prime)
        .expect("widened decomposition keeps the tree shape");
    let d_prime = (0..g_prime.n()).map(|v| g_prime.degree(v)).max().unwrap_or(0);
    let w_prime = btw_bounded_degree_weights(&g_prime, &t_prime, d_prime, t_prime.width())?;

    // Pull back along P(u,v): chain of copies of one endpoint between its
    // topmost bag and the topmost common bag, plus the intra-bag edge there.
    let highest: Vec<usize> = (0..g.n())
        .map(|v| t.highest_bag(v).expect("validated decomposition covers every node"))
        .collect();
    let chain_up = |v: usize, from: usize, to: usize| -> Vec<(usize, usize)> {
        let mut arcs = Vec::new();
        let mut cur = from;
        while cur != to {
            let p = t.parent(cur).expect("topmost bag is an ancestor");
            arcs.push((copy[&(cur, v)], copy[&(p, v)]));
            cur = p;
        }
        arcs
    };
    let mut out = WeightAssignment::new();
    for (u, v) in g.undirected_edges() {
        let b = top_common(u, v);
        let mut arcs = chain_up(u, b, highest[u]);
        arcs.reverse();
        let mut path: Vec<(usize, usize)> = arcs.into_iter().map(|(a, c)| (c, a)).collect();
        path.push((copy[&(b, u)], copy[&(b, v)]));
        path.extend(chain_up(v, b, highest[v]));
        let mut total = BigInt::zero();
        for (a, c) in path {
            total += w_prime.get(a, c).expect("copy path follows copy-graph edges");
        }
        out.set_skew(u, v, total);
    }
    out.skew_symmetric = true;
    out.certification = Certification::NonzeroCirculation;
    Ok(out)
}

/// Deletion support: both orientations of every deleted edge get weight 0;
/// the surviving graph keeps its non-zero circulation.
pub fn zero_deleted_weights(
    u: &WeightAssignment,
    eminus: &BTreeSet<(usize, usize)>,
) -> Result<WeightAssignment, WeightError> {
    if let Some((a, b)) = u.skew_violation() {
        return Err(WeightError::NotSkewSymmetric(a, b));
    }
    if u.certification != Certification::NonzeroCirculation {
        return Err(WeightError::NotCertified("nonzero_circulation"));
    }
    let mut out = u.clone();
    for &(a, b) in eminus {
        for key in [(a, b), (b, a)] {
            if out.weights.contains_key(&key) {
                out.weights.insert(key, BigInt::zero());
            }
        }
    }
    Ok(out)
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn next_prime(after: u64) -> u64 {
    let mut p = after + 1;
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Smallest prime under which all elements of `s` have pairwise distinct
/// residues; the search gives up past `bit_budget` bits.
pub fn find_separating_prime(s: &[BigUint], bit_budget: u32) -> Result<u64, WeightError> {
    if s.len() < 2 {
        return Err(WeightError::NeedTwoElements);
    }
    let limit = 1u64 << bit_budget.min(63);
    let mut p = 2;
    let mut last = 2;
    while p <= limit {
        let modulus = BigUint::from(p);
        let residues: BTreeSet<BigUint> = s.iter().map(|x| x % &modulus).collect();
        if residues.len() == s.len() {
            return Ok(p);
        }
        last = p;
        p = next_prime(p);
    }
    Err(WeightError::PrimeBudgetExhausted { bits: bit_budget, last })
}

/// Max inserted edges for the mask machinery (masks are packed in u32).
pub const MAX_INSERTED: usize = 20;

/// Max affected nodes for path enumeration.
pub const MAX_AFFECTED: usize = 16;

const MASK_STEP_BUDGET: u64 = 50_000_000;

/// The insertion analysis graph: affected nodes carry the inserted edges as
/// real edges and old reachability pairs as fictitious edges. Real and
/// fictitious sets may overlap. Nodes are renumbered densely, ascending.
#[derive(Debug, Clone)]
pub struct AdornedGraph {
    nodes: Vec<usize>,
    real: Vec<(usize, usize)>,
    fictitious: BTreeSet<(usize, usize)>,
}

impl AdornedGraph {
    /// Builds the adorned graph for an insertion batch: nodes are the batch
    /// endpoints, fictitious arcs are `reach` pairs between them.
    pub fn build(
        reach: &BTreeSet<(usize, usize)>,
        eplus: &BTreeSet<(usize, usize)>,
    ) -> Result<Self, WeightError> {
        if eplus.len() > MAX_INSERTED {
            return Err(WeightError::TooManyInsertions { count: eplus.len(), max: MAX_INSERTED });
        }
        let mut nodes: BTreeSet<usize> = BTreeSet::new();
        for &(u, v) in eplus {
            nodes.insert(u);
            nodes.insert(v);
        }
        let nodes: Vec<usize> = nodes.into_iter().collect();
        if nodes.len() > MAX_AFFECTED {
            return Err(WeightError::TooManyAffected { count: nodes.len(), max: MAX_AFFECTED });
        }
        let index: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let real: Vec<(usize, usize)> =
            eplus.iter().map(|&(u, v)| (index[&u], index[&v])).collect();
        let mut fictitious = BTreeSet::new();
        for &(u, v) in reach {
            if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
                fictitious.insert((a, b));
            }
        }
        Ok(AdornedGraph { nodes, real, fictitious })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Original node ids, ascending; position = dense index.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Real edges in dense indices, in insertion-set order.
    pub fn real_edges(&self) -> &[(usize, usize)] {
        &self.real
    }

    pub fn fictitious_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.fictitious
    }

    /// w₀(u,v) = 2^{(N+1)u+v} on 1-based renumbered endpoints.
    pub fn base_weight(&self, real_index: usize) -> BigUint {
        let n = self.n();
        let (a, b) = self.real[real_index];
        BigUint::one() << ((n + 1) * (a + 1) + (b + 1))
    }

    /// Real-edge usage masks of simple paths, keyed by (source, target)
    /// dense index pairs. Paths with two consecutive fictitious arcs are
    /// skipped: the fictitious relation is transitively closed, so a
    /// shortcut with the same mask always exists.
    pub fn path_masks(&self) -> Result<BTreeMap<(usize, usize), BTreeSet<u32>>, WeightError> {
        let n = self.n();
        let mut real_out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, &(u, v)) in self.real.iter().enumerate() {
            real_out[u].push((v, i));
        }
        let mut fict_out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in &self.fictitious {
            fict_out[u].push(v);
        }
        let mut masks: BTreeMap<(usize, usize), BTreeSet<u32>> = BTreeMap::new();
        let mut budget = MASK_STEP_BUDGET;
        for s in 0..n {
            self.extend_masks(
                s,
                s,
                1 << s,
                0,
                false,
                &real_out,
                &fict_out,
                &mut masks,
                &mut budget,
            )?;
        }
        Ok(masks)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_masks(
        &self,
        s: usize,
        cur: usize,
        visited: u32,
        mask: u32,
        last_fictitious: bool,
        real_out: &[Vec<(usize, usize)>],
        fict_out: &[Vec<usize>],
        masks: &mut BTreeMap<(usize, usize), BTreeSet<u32>>,
        budget: &mut u64,
    ) -> Result<(), WeightError> {
        if *budget == 0 {
            return Err(WeightError::EnumerationBudget);
        }
        *budget -= 1;
        if cur != s && mask != 0 {
            masks.entry((s, cur)).or_default().insert(mask);
        }
        for &(next, edge) in &real_out[cur] {
            if visited & (1 << next) == 0 {
                self.extend_masks(
                    s,
                    next,
                    visited | (1 << next),
                    mask | (1 << edge),
                    false,
                    real_out,
                    fict_out,
                    masks,
                    budget,
                )?;
            }
        }
        if !last_fictitious {
            for &next in &fict_out[cur] {
                if visited & (1 << next) == 0 {
                    self.extend_masks(
                        s,
                        next,
                        visited | (1 << next),
                        mask,
                        true,
                        real_out,
                        fict_out,
                        masks,
                        budget,
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// One candidate assignment with the prime sequence that produced it.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub primes: Vec<u64>,
    pub assignment: WeightAssignment,
}

/// The insertion-weight family: candidates agreeing with the base weights
/// on surviving edges and differing on the inserted ones.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    pub members: Vec<FamilyMember>,
    /// Levels used by the prime sequences (⌈log₂ N⌉ for N affected nodes).
    pub levels: usize,
}

/// Knobs for the family construction.
#[derive(Debug, Clone, Copy)]
pub struct FamilyOptions {
    /// Extra passing primes kept per level; 0 keeps only the greedy choice.
    pub sibling_width: usize,
    /// Soft per-level prime size limit, in bits.
    pub prime_bit_budget: u32,
    /// Insist on an isolating certification of the base weights. The
    /// faithful engine mode chains uncertified members and opts out.
    pub require_certified: bool,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions { sibling_width: 0, prime_bit_budget: 20, require_certified: true }
    }
}

/// Per-edge residue vectors for a prime prefix; digits[j][e] = w₀(e) mod p_j.
fn residue_digits(h: &AdornedGraph, primes: &[u64]) -> Vec<Vec<u64>> {
    let w0: Vec<BigUint> = (0..h.real_edges().len()).map(|e| h.base_weight(e)).collect();
    primes
        .iter()
        .map(|&p| {
            let modulus = BigUint::from(p);
            w0.iter().map(|w| (w % &modulus).to_u64().unwrap()).collect()
        })
        .collect()
}

/// The level-i strong-real-isolation check for a prime prefix p₁..p_i:
/// every real edge has a nonzero residue vector, and distinct real-edge
/// masks realizing pair minima get distinct vectors, both inside a pair
/// and across pairs. Pairs whose minimum is the same edge set share its
/// vector by construction; ties inside one set are broken by the base
/// weights, so only cross-mask collisions are rejected. Vectors compare
/// lexicographically with level 1 most significant.
fn level_check(
    h: &AdornedGraph,
    masks: &BTreeMap<(usize, usize), BTreeSet<u32>>,
    primes: &[u64],
) -> bool {
    let level = primes.len();
    let digits = residue_digits(h, primes);
    let edge_count = h.real_edges().len();
    for e in 0..edge_count {
        if (0..level).all(|j| digits[j][e] == 0) {
            return false;
        }
    }
    let cap = 1u32 << level.min(31);
    // Vector of each pair's minimum, with the mask realizing it. Two pairs
    // may share the same minimum mask (ties inside one real-edge set fall
    // to the base weights), but distinct masks must get distinct vectors,
    // within a pair and across pairs alike.
    let mut minima: BTreeMap<Vec<u64>, u32> = BTreeMap::new();
    for mask_set in masks.values() {
        let mut best: Option<(Vec<u64>, u32)> = None;
        let mut tied = false;
        for &mask in mask_set {
            if mask.count_ones() > cap {
                continue;
            }
            let vector: Vec<u64> = (0..level)
                .map(|j| {
                    (0..edge_count).filter(|&e| mask & (1 << e) != 0).map(|e| digits[j][e]).sum()
                })
                .collect();
            match &best {
                Some((b, _)) if vector > *b => {}
                Some((b, m)) if vector == *b => tied = tied || *m != mask,
                _ => {
                    best = Some((vector, mask));
                    tied = false;
                }
            }
        }
        if let Some((vector, mask)) = best {
            if tied {
                return false;
            }
            match minima.get(&vector) {
                Some(&other) if other != mask => return false,
                _ => {
                    minima.insert(vector, mask);
                }
            }
        }
    }
    true
}

/// Completes a prime prefix greedily, level by level, returning the full
/// sequence of ⌈log₂ N⌉ primes.
fn complete_prefix(
    h: &AdornedGraph,
    masks: &BTreeMap<(usize, usize), BTreeSet<u32>>,
    prefix: &[u64],
    levels: usize,
    budget_bits: u32,
) -> Result<Vec<u64>, WeightError> {
    let limit = 1u64 << budget_bits.min(63);
    let mut primes = prefix.to_vec();
    for level in primes.len()..levels {
        let mut p = 2;
        loop {
            if p > limit {
                return Err(WeightError::LevelSearchExhausted {
                    level: level + 1,
                    bits: budget_bits,
                });
            }
            primes.push(p);
            if level_check(h, masks, &primes) {
                break;
            }
            primes.pop();
            p = next_prime(p);
        }
    }
    Ok(primes)
}

/// Materializes one member: surviving edges keep w, inserted ones get
/// n^{k+2}·w_p̄(e) with w_p̄(e) = Σ_j N^{β(L−j)}·(w₀(e) mod p_j), where β is
/// the smallest exponent making the digit positions carry-free.
fn materialize_member(
    h: &AdornedGraph,
    w: &WeightAssignment,
    n: usize,
    k: u32,
    primes: &[u64],
) -> FamilyMember {
    let digits = residue_digits(h, primes);
    let levels = primes.len();
    let cap_n = h.n();
    let max_p = primes.iter().copied().max().unwrap_or(2);
    let mut beta = 1u32;
    while big_pow(cap_n, beta) <= BigInt::from((cap_n as u64 - 1) * (max_p - 1)) {
        beta += 1;
    }
    let scale = big_pow(n, k + 2);
    let mut assignment = w.clone();
    assignment.set_certification(Certification::None);
    assignment.set_skew_symmetric(false);
    for (e, &(a, b)) in h.real_edges().iter().enumerate() {
        let mut w_pbar = BigInt::zero();
        for j in 0..levels {
            w_pbar += big_pow(cap_n, beta * (levels - 1 - j) as u32) * BigInt::from(digits[j][e]);
        }
        assignment.set(h.nodes()[a], h.nodes()[b], &scale * w_pbar);
    }
    FamilyMember { primes: primes.to_vec(), assignment }
}

/// Builds the insertion-weight family for a batch E⁺ on top of an isolating
/// base assignment.
///
/// The adorned graph on the batch endpoints carries E⁺ as real edges and
/// old reachability as fictitious edges. Primes are chosen greedily level
/// by level so that real-edge usage masks of simple paths are strongly
/// isolated; with `sibling_width` > 0, the next passing primes per level
/// spawn additional members (completed greedily), making the family a
/// genuine set. Every member agrees with `w` on the old edges.
pub fn insertion_weight_family(
    g: &Graph,
    reach: &BTreeSet<(usize, usize)>,
    eplus: &BTreeSet<(usize, usize)>,
    w: &WeightAssignment,
    options: &FamilyOptions,
) -> Result<WeightFamily, WeightError> {
    for &(u, v) in eplus {
        if g.has_edge(u, v) {
            return Err(WeightError::InsertionOverlap(u, v));
        }
    }
    // Fictitious arcs must be genuine reachabilities; a caller reading
    // reach off its own maintained state may legitimately underapproximate.
    let closure = oracle::transitive_closure(g);
    if reach.iter().any(|pair| !closure.contains(pair)) {
        return Err(WeightError::ReachMismatch);
    }
    if options.require_certified && w.certification != Certification::Isolating {
        return Err(WeightError::NotCertified("isolating"));
    }
    for (u, v) in g.edges() {
        match w.get(u, v) {
            Some(weight) if weight.is_positive() => {}
            Some(_) => return Err(WeightError::BoundViolation(u, v)),
            None => return Err(WeightError::MissingWeight(u, v)),
        }
    }
    if eplus.is_empty() {
        return Ok(WeightFamily {
            members: vec![FamilyMember { primes: Vec::new(), assignment: w.clone() }],
            levels: 0,
        });
    }
    let n = g.n();
    // Smallest k with max |w| ≤ n^k keeps the n^{k+2} scale dominant over
    // every pure-fictitious path segment.
    let max_w = w.max_abs();
    let mut k = 1u32;
    while big_pow(n, k) < max_w {
        k += 1;
    }

    let h = AdornedGraph::build(reach, eplus)?;
    let masks = h.path_masks()?;
    let levels = h.n().next_power_of_two().trailing_zeros().max(1) as usize;

    let greedy = complete_prefix(&h, &masks, &[], levels, options.prime_bit_budget)?;
    let mut sequences: Vec<Vec<u64>> = vec![greedy.clone()];
    if options.sibling_width > 0 {
        let limit = 1u64 << options.prime_bit_budget.min(63);
        for level in 0..levels {
            let mut found = 0;
            let mut p = next_prime(greedy[level]);
            while found < options.sibling_width && p <= limit {
                let mut prefix = greedy[..level].to_vec();
                prefix.push(p);
                if level_check(&h, &masks, &prefix) {
                    if let Ok(full) =
                        complete_prefix(&h, &masks, &prefix, levels, options.prime_bit_budget)
                    {
                        if !sequences.contains(&full) {
                            sequences.push(full);
                        }
                    }
                    found += 1;
                }
                p = next_prime(p);
            }
        }
    }
    let members = sequences.iter().map(|primes| materialize_member(&h, w, n, k, primes)).collect();
    Ok(WeightFamily { members, levels })
}

/// Independent uniform weights in [1, cap] per directed edge, redrawn until
/// the exhaustive oracle certifies isolation.
pub fn random_isolating_weights(
    g: &Graph,
    seed: u64,
    weight_cap: u64,
) -> Result<WeightAssignment, WeightError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = weight_cap.max(1);
    for _ in 0..32 {
        let mut w = WeightAssignment::new();
        for (u, v) in g.edges() {
            w.set(u, v, BigInt::from(rng.gen_range(1..=cap)));
        }
        let report = oracle::isolation_report(g, &w)?;
        if report.is_isolating {
            w.certification = Certification::Isolating;
            let mut k = 1u32;
            while big_pow(g.n(), k) < BigInt::from(cap) {
                k += 1;
            }
            w.bound_exponent = Some(k);
            return Ok(w);
        }
    }
    Err(WeightError::RetriesExhausted)
}
