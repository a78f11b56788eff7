//! The algebraic reachability engine: maintains truncated power-series
//! approximations of (I − A_{(G,w)}(x))⁻¹ over ℤ₂ for one or more weight
//! assignments, updates them through bulk edge changes with the
//! Sherman-Morrison-Woodbury identity, and answers reachability queries
//! from nonzero matrix entries.
//!
//! Coefficient i of entry (s,t) is the parity of the number of s-t walks of
//! weight exactly i. With isolating weights the minimum path weight has an
//! odd walk count, so reachability appears as a nonzero entry.

use crate::gf2::{decompose_delta, mat_add, mat_mul, Gf2Error, PolyMatrix, TruncatedPoly};
use crate::graph::{apply_change, BulkChange, Graph, GraphError};
use crate::oracle::{self, OracleError};
use crate::weights::{
    insertion_weight_family, random_isolating_weights, shift_to_isolating, zero_deleted_weights,
    Certification, FamilyOptions, WeightAssignment, WeightError,
};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraicError {
    #[error("required degree bound {required} exceeds the engine limit {max}")]
    BoundExceeded { required: usize, max: usize },
    #[error("edge ({0}, {1}) has no positive weight")]
    BadEdgeWeight(usize, usize),
    #[error("weights lack the certification required by this mode")]
    NotCertified,
    #[error("verified mode requires at most {max} nodes, got {n}")]
    TooLargeForVerified { n: usize, max: usize },
    #[error("no family member passed isolation verification")]
    NoIsolatingMember,
    #[error("node {0} out of range for {1} nodes")]
    NodeOutOfRange(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Algebra(#[from] Gf2Error),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Hard ceiling on the truncation bound; beyond it the dense polynomial
/// arithmetic stops being desk-scale.
pub const MAX_BOUND: usize = 8192;

/// Degree-bound budget for random draws, stricter than MAX_BOUND so that
/// repeated random-scheme runs stay fast; paper-scheme weights may use the
/// full headroom on tiny instances.
const RANDOM_BOUND_BUDGET: usize = 4096;

/// Most members kept after a faithful-mode insertion.
pub const MEMBER_CAP: usize = 4;

/// Candidate weight draws per insertion in faithful random mode.
const SPAWN_WIDTH: usize = 2;

/// Redraw attempts before giving up on small insertion weights.
const INSERT_RETRIES: usize = 8;

/// b = n·wmax: every simple path has at most n−1 edges, so all minimal
/// path weights fit strictly below the bound.
pub fn degree_bound(n: usize, wmax: usize) -> usize {
    n * wmax
}

/// How the engine treats its members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    /// One member, kept oracle-certified isolating at every step; queries
    /// are sound and complete.
    Verified,
    /// A capped family of members updated without verification; queries
    /// are sound (a nonzero entry always witnesses a walk) but complete
    /// only when some member happens to isolate.
    Faithful,
}

/// Where weights come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// Small uniform random weights, redrawn until isolating; the degree
    /// bound stays fixed across changes.
    Random,
    /// The n^{k+2} shift of a non-zero-circulation assignment and the
    /// prime-residue insertion family; bounds grow quickly, so this only
    /// runs on tiny instances.
    Paper,
}

/// One maintained approximation and the weights it belongs to.
#[derive(Debug, Clone)]
pub struct MemberState {
    pub weights: WeightAssignment,
    pub matrix: PolyMatrix,
    /// Prime sequence that produced the weights, if any.
    pub primes: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct AlgebraicState {
    graph: Graph,
    base: Option<WeightAssignment>,
    members: Vec<MemberState>,
    bound: usize,
    mode: EngineMode,
    scheme: WeightScheme,
    exponent: u32,
    weight_cap: u64,
    rng: ChaCha8Rng,
}

fn weight_exponent(edge: (usize, usize), w: &WeightAssignment) -> Result<usize, AlgebraicError> {
    let (u, v) = edge;
    let value = w.get(u, v).ok_or(AlgebraicError::BadEdgeWeight(u, v))?;
    if !value.is_positive() {
        return Err(AlgebraicError::BadEdgeWeight(u, v));
    }
    value.to_usize().ok_or(AlgebraicError::BoundExceeded { required: usize::MAX, max: MAX_BOUND })
}

/// A_{(G,w)}(x): entry (u,v) is x^{w(u,v)} per edge.
fn build_matrix(
    g: &Graph,
    w: &WeightAssignment,
    bound: usize,
) -> Result<PolyMatrix, AlgebraicError> {
    let mut a = PolyMatrix::zero(g.n(), g.n(), bound);
    for (u, v) in g.edges() {
        a.set(u, v, TruncatedPoly::monomial(weight_exponent((u, v), w)?, bound));
    }
    Ok(a)
}

/// The truncation of Σ_i A^i = (I − A)⁻¹ mod 2, by geometric doubling:
/// D ← D + P·D with P = A^{2^j} until 2^j·wmin exceeds the bound.
pub fn series_approximation(
    g: &Graph,
    w: &WeightAssignment,
    bound: usize,
) -> Result<PolyMatrix, AlgebraicError> {
    let mut d = PolyMatrix::identity(g.n(), bound);
    if g.edge_count() == 0 {
        return Ok(d);
    }
    let a = build_matrix(g, w, bound)?;
    let mut wmin = usize::MAX;
    for (u, v) in g.edges() {
        wmin = wmin.min(weight_exponent((u, v), w)?);
    }
    let mut p = a;
    let mut span = wmin;
    loop {
        d = mat_add(&d, &mat_mul(&p, &d)?)?;
        span = span.saturating_mul(2);
        if span > bound {
            return Ok(d);
        }
        p = mat_mul(&p, &p)?;
        if (0..g.n()).all(|r| (0..g.n()).all(|c| p.get(r, c).is_zero())) {
            return Ok(d);
        }
    }
}

fn max_weight_usize(members: &[MemberState]) -> Result<usize, AlgebraicError> {
    let mut max = BigInt::from(1);
    for m in members {
        let w = m.weights.max_abs();
        if w > max {
            max = w;
        }
    }
    max.to_usize().ok_or(AlgebraicError::BoundExceeded { required: usize::MAX, max: MAX_BOUND })
}

fn checked_bound(n: usize, wmax: usize) -> Result<usize, AlgebraicError> {
    let required = degree_bound(n, wmax);
    if required > MAX_BOUND {
        return Err(AlgebraicError::BoundExceeded { required, max: MAX_BOUND });
    }
    Ok(required)
}

impl AlgebraicState {
    /// Paper-scheme initialization: shifts a certified non-zero-circulation
    /// assignment into an isolating one and approximates its series.
    pub fn init(
        g: &Graph,
        u: &WeightAssignment,
        k: u32,
        mode: EngineMode,
        seed: u64,
    ) -> Result<Self, AlgebraicError> {
        if u.certification() != Certification::NonzeroCirculation {
            return Err(AlgebraicError::NotCertified);
        }
        Self::check_mode(g, mode)?;
        let w = shift_to_isolating(u, g.n(), k)?;
        let members = vec![MemberState {
            weights: w,
            matrix: PolyMatrix::identity(0, 0),
            primes: Vec::new(),
        }];
        let wmax = max_weight_usize(&members)?;
        let mut state = AlgebraicState {
            graph: g.clone(),
            base: Some(u.clone()),
            members,
            bound: checked_bound(g.n(), wmax)?,
            mode,
            scheme: WeightScheme::Paper,
            exponent: k,
            weight_cap: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        state.reinitialize()?;
        Ok(state)
    }

    /// Random-scheme initialization: draws small isolating weights and
    /// fixes the degree bound for the lifetime of the state.
    pub fn init_random(g: &Graph, mode: EngineMode, seed: u64) -> Result<Self, AlgebraicError> {
        Self::check_mode(g, mode)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = Self::draw_cap(g);
        let w = random_isolating_weights(g, rng.gen(), cap)?;
        let members = vec![MemberState {
            weights: w,
            matrix: PolyMatrix::identity(0, 0),
            primes: Vec::new(),
        }];
        let mut state = AlgebraicState {
            graph: g.clone(),
            base: None,
            members,
            bound: checked_bound(g.n(), cap as usize)?,
            mode,
            scheme: WeightScheme::Random,
            exponent: 1,
            weight_cap: cap,
            rng,
        };
        state.reinitialize()?;
        Ok(state)
    }

    /// Initialization from explicit weights. Verified mode insists on an
    /// isolating certification; faithful mode takes any positive weights,
    /// which is how arbitrary walk-parity series get materialized.
    pub fn init_with_weights(
        g: &Graph,
        w: &WeightAssignment,
        mode: EngineMode,
        seed: u64,
    ) -> Result<Self, AlgebraicError> {
        if mode == EngineMode::Verified && w.certification() != Certification::Isolating {
            return Err(AlgebraicError::NotCertified);
        }
        Self::check_mode(g, mode)?;
        let members = vec![MemberState {
            weights: w.clone(),
            matrix: PolyMatrix::identity(0, 0),
            primes: Vec::new(),
        }];
        let wmax = max_weight_usize(&members)?.max(1);
        let cap = Self::draw_cap(g).max(wmax as u64);
        let mut state = AlgebraicState {
            graph: g.clone(),
            base: None,
            members,
            bound: checked_bound(g.n(), cap as usize)?,
            mode,
            scheme: WeightScheme::Random,
            exponent: 1,
            weight_cap: cap,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        state.reinitialize()?;
        Ok(state)
    }

    fn check_mode(g: &Graph, mode: EngineMode) -> Result<(), AlgebraicError> {
        if mode == EngineMode::Verified && g.n() > oracle::MAX_ENUM_NODES {
            return Err(AlgebraicError::TooLargeForVerified {
                n: g.n(),
                max: oracle::MAX_ENUM_NODES,
            });
        }
        Ok(())
    }

    /// Weight cap for random draws, clamped so the bound stays in budget.
    fn draw_cap(g: &Graph) -> u64 {
        let n = g.n().max(1);
        let target = 2 * (n as u64) * (g.edge_count().max(1) as u64);
        target.clamp(64, (RANDOM_BOUND_BUDGET / n).max(64) as u64)
    }

    /// Recomputes every member's matrix from scratch at the current bound.
    fn reinitialize(&mut self) -> Result<(), AlgebraicError> {
        for member in &mut self.members {
            member.matrix = series_approximation(&self.graph, &member.weights, self.bound)?;
        }
        Ok(())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn members(&self) -> &[MemberState] {
        &self.members
    }

    /// Bound exponent k of the base weights (paper scheme).
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn base_weights(&self) -> Option<&WeightAssignment> {
        self.base.as_ref()
    }

    /// Reachability read off the maintained matrices: union of nonzero
    /// entries over members, which the dynamic program feeds back as the
    /// old reach relation when building insertion weights.
    pub fn reach_from_matrices(&self) -> BTreeSet<(usize, usize)> {
        let n = self.graph.n();
        let mut reach = BTreeSet::new();
        for s in 0..n {
            for t in 0..n {
                if s != t && self.members.iter().any(|m| !m.matrix.get(s, t).is_zero()) {
                    reach.insert((s, t));
                }
            }
        }
        reach
    }

    pub fn query(&self, a: usize, b: usize) -> Result<bool, AlgebraicError> {
        let n = self.graph.n();
        if a >= n {
            return Err(AlgebraicError::NodeOutOfRange(a, n));
        }
        if b >= n {
            return Err(AlgebraicError::NodeOutOfRange(b, n));
        }
        Ok(a == b || self.members.iter().any(|m| !m.matrix.get(a, b).is_zero()))
    }

    /// The series is a unit in the truncated ring: constant term I. The
    /// SMW inner inverse relies on this, so it is checked before updates.
    fn assert_unit_constant(&self) {
        for member in &self.members {
            let n = self.graph.n();
            for r in 0..n {
                for c in 0..n {
                    debug_assert_eq!(
                        member.matrix.get(r, c).constant_term(),
                        r == c,
                        "series constant term must be the identity"
                    );
                }
            }
        }
    }

    /// Applies one member's edge-set delta via SMW. Over ℤ₂, both setting
    /// and clearing an entry x^w adds x^w.
    fn apply_delta(
        matrix: &PolyMatrix,
        entries: &[(usize, usize, TruncatedPoly)],
        n: usize,
        bound: usize,
    ) -> Result<PolyMatrix, AlgebraicError> {
        let delta = decompose_delta(entries, n, bound);
        Ok(crate::gf2::smw_update(matrix, &delta)?)
    }

    /// Bulk deletion: every member's matrix drops the deleted entries via
    /// SMW; verified mode re-certifies isolation on the shrunk graph and
    /// redraws from scratch when certification fails.
    pub fn delete_edges(
        &mut self,
        eminus: &BTreeSet<(usize, usize)>,
    ) -> Result<(), AlgebraicError> {
        let change = BulkChange::delete_only(eminus.iter().copied());
        let new_graph = apply_change(&self.graph, &change)?;
        if eminus.is_empty() {
            return Ok(());
        }
        self.assert_unit_constant();
        let n = self.graph.n();
        for member in &mut self.members {
            let mut entries = Vec::with_capacity(eminus.len());
            for &(u, v) in eminus {
                let w = weight_exponent((u, v), &member.weights)?;
                entries.push((u, v, TruncatedPoly::monomial(w, self.bound)));
            }
            member.matrix = Self::apply_delta(&member.matrix, &entries, n, self.bound)?;
            for &(u, v) in eminus {
                member.weights.remove(u, v);
            }
            member.weights.set_certification(Certification::None);
        }
        if let Some(base) = &self.base {
            self.base = Some(zero_deleted_weights(base, eminus)?);
        }
        self.graph = new_graph;
        if self.mode == EngineMode::Verified {
            self.recertify_after_delete()?;
        }
        Ok(())
    }

    fn recertify_after_delete(&mut self) -> Result<(), AlgebraicError> {
        let member = &mut self.members[0];
        let report = oracle::isolation_report(&self.graph, &member.weights)?;
        if report.is_isolating {
            member.weights.set_certification(Certification::Isolating);
            return Ok(());
        }
        // Restriction of paper-scheme weights stays isolating; a failure
        // here means random weights lost a tiebreak, so redraw.
        let w = random_isolating_weights(&self.graph, self.rng.gen(), self.weight_cap.max(64))?;
        self.members = vec![MemberState {
            weights: w,
            matrix: PolyMatrix::identity(0, 0),
            primes: Vec::new(),
        }];
        self.reinitialize()
    }

    /// Bulk insertion: spawns candidate weights for the new edges (small
    /// random draws, or the prime-residue family in the paper scheme),
    /// pushes them through SMW, and in verified mode keeps exactly one
    /// oracle-certified member.
    pub fn insert_edges(&mut self, eplus: &BTreeSet<(usize, usize)>) -> Result<(), AlgebraicError> {
        let change = BulkChange::insert_only(eplus.iter().copied());
        let new_graph = apply_change(&self.graph, &change)?;
        if eplus.is_empty() {
            return Ok(());
        }
        self.assert_unit_constant();
        match self.scheme {
            WeightScheme::Random => self.insert_random(&new_graph, eplus),
            WeightScheme::Paper => self.insert_paper(&new_graph, eplus),
        }
    }

    fn spawn_member(
        &self,
        parent: &MemberState,
        extension: &WeightAssignment,
        eplus: &BTreeSet<(usize, usize)>,
        primes: Vec<u64>,
    ) -> Result<MemberState, AlgebraicError> {
        let n = self.graph.n();
        let mut entries = Vec::with_capacity(eplus.len());
        for &(u, v) in eplus {
            let w = weight_exponent((u, v), extension)?;
            entries.push((u, v, TruncatedPoly::monomial(w, self.bound)));
        }
        let matrix = Self::apply_delta(&parent.matrix, &entries, n, self.bound)?;
        let mut weights = parent.weights.clone();
        for &(u, v) in eplus {
            weights.set(u, v, extension.get(u, v).expect("extension covers eplus").clone());
        }
        weights.set_certification(Certification::None);
        Ok(MemberState { weights, matrix, primes })
    }

    fn insert_random(
        &mut self,
        new_graph: &Graph,
        eplus: &BTreeSet<(usize, usize)>,
    ) -> Result<(), AlgebraicError> {
        let cap = self.weight_cap.max(64);
        let draw = |rng: &mut ChaCha8Rng| {
            let mut ext = WeightAssignment::new();
            for &(u, v) in eplus {
                ext.set(u, v, BigInt::from(rng.gen_range(1..=cap)));
            }
            ext
        };
        match self.mode {
            EngineMode::Verified => {
                for _ in 0..INSERT_RETRIES {
                    let ext = draw(&mut self.rng);
                    let candidate = self.spawn_member(&self.members[0], &ext, eplus, Vec::new())?;
                    let report = oracle::isolation_report(new_graph, &candidate.weights)?;
                    if report.is_isolating {
                        let mut candidate = candidate;
                        candidate.weights.set_certification(Certification::Isolating);
                        self.members = vec![candidate];
                        self.graph = new_graph.clone();
                        return Ok(());
                    }
                }
                // No extension kept the old weights isolating; redraw the
                // whole assignment and rebuild at the same bound.
                let w = random_isolating_weights(new_graph, self.rng.gen(), cap)?;
                self.members = vec![MemberState {
                    weights: w,
                    matrix: PolyMatrix::identity(0, 0),
                    primes: Vec::new(),
                }];
                self.graph = new_graph.clone();
                self.reinitialize()
            }
            EngineMode::Faithful => {
                let mut spawned = Vec::new();
                for parent in &self.members {
                    for _ in 0..SPAWN_WIDTH {
                        let ext = draw(&mut self.rng);
                        spawned.push(self.spawn_member(parent, &ext, eplus, Vec::new())?);
                        if spawned.len() == MEMBER_CAP {
                            break;
                        }
                    }
                    if spawned.len() == MEMBER_CAP {
                        break;
                    }
                }
                self.members = spawned;
                self.graph = new_graph.clone();
                Ok(())
            }
        }
    }

    fn insert_paper(
        &mut self,
        new_graph: &Graph,
        eplus: &BTreeSet<(usize, usize)>,
    ) -> Result<(), AlgebraicError> {
        let reach = self.reach_from_matrices();
        let options = FamilyOptions {
            sibling_width: if self.mode == EngineMode::Faithful { 1 } else { 0 },
            require_certified: self.mode == EngineMode::Verified,
            ..FamilyOptions::default()
        };
        let family = insertion_weight_family(
            &self.graph,
            &reach,
            eplus,
            &self.members[0].weights,
            &options,
        )?;
        // Family weights can outgrow the current bound; recheck before any
        // matrix work and rebuild from scratch at the larger bound.
        let mut wmax = BigInt::from(1);
        for member in &family.members {
            let w = member.assignment.max_abs();
            if w > wmax {
                wmax = w;
            }
        }
        let wmax = wmax
            .to_usize()
            .ok_or(AlgebraicError::BoundExceeded { required: usize::MAX, max: MAX_BOUND })?;
        let required = checked_bound(new_graph.n(), wmax.max(1))?;
        let grow = required > self.bound;
        let parent = self.members[0].clone();
        let mut spawned = Vec::new();
        for fm in family.members.iter().take(MEMBER_CAP.max(1)) {
            let mut ext = WeightAssignment::new();
            for &(u, v) in eplus {
                ext.set(u, v, fm.assignment.get(u, v).expect("family covers eplus").clone());
            }
            if grow {
                spawned.push(MemberState {
                    weights: {
                        let mut w = parent.weights.clone();
                        for &(u, v) in eplus {
                            w.set(u, v, ext.get(u, v).unwrap().clone());
                        }
                        w.set_certification(Certification::None);
                        w
                    },
                    matrix: PolyMatrix::identity(0, 0),
                    primes: fm.primes.clone(),
                });
            } else {
                spawned.push(self.spawn_member(&parent, &ext, eplus, fm.primes.clone())?);
            }
        }
        self.graph = new_graph.clone();
        if grow {
            self.bound = required;
            self.members = spawned;
            self.reinitialize()?;
        } else {
            self.members = spawned;
        }
        if self.mode == EngineMode::Verified {
            let mut kept = None;
            for (i, member) in self.members.iter().enumerate() {
                let report = oracle::isolation_report(&self.graph, &member.weights)?;
                if report.is_isolating {
                    kept = Some(i);
                    break;
                }
            }
            let Some(i) = kept else {
                return Err(AlgebraicError::NoIsolatingMember);
            };
            let mut member = self.members.swap_remove(i);
            member.weights.set_certification(Certification::Isolating);
            self.members = vec![member];
        }
        Ok(())
    }
}
