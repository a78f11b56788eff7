//! Property-based invariants. Instances come from the crate's own seeded
//! generators driven by proptest-chosen seeds, so failures shrink to a seed
//! that reproduces directly.

use num_bigint::BigInt;
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

use reach_core::algebraic::{AlgebraicState, EngineMode};
use reach_core::generate::{random_change_script, random_gnp};
use reach_core::gf2::{
    mat_add, mat_inverse_adjugate, mat_inverse_local, mat_mul, poly_add, poly_mul,
    poly_series_inverse, PolyMatrix, TruncatedPoly,
};
use reach_core::oracle;
use reach_core::tc_insert::TCState;
use reach_core::undirected::ForestState;
use reach_core::weights::random_isolating_weights;
use reach_core::{apply_change, normalize_change, BulkChange, Graph, WeightAssignment};

fn permuted_graph(g: &Graph, perm: &[usize]) -> Graph {
    Graph::with_edges(g.n(), g.is_directed(), g.edges().map(|(u, v)| (perm[u], perm[v])))
        .expect("permutation keeps nodes in range")
}

fn permuted_weights(w: &WeightAssignment, perm: &[usize]) -> WeightAssignment {
    let mut out = WeightAssignment::new();
    for (&(u, v), weight) in w.map() {
        out.set(perm[u], perm[v], weight.clone());
    }
    out
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    perm
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_engine_tracks_oracle(seed in 0u64..1 << 48, n in 3usize..12) {
        let base = random_gnp(n, 0.2, true, seed).unwrap();
        let mut state = TCState::init_empty(n).unwrap();
        state.bulk_insert(&base.edges().collect()).unwrap();
        for change in random_change_script(&base, 4, 3, false, seed ^ 1) {
            state.bulk_insert(&change.inserted).unwrap();
        }
        prop_assert_eq!(state.ans(), &oracle::transitive_closure(state.graph()));
    }

    #[test]
    fn forest_engine_tracks_components(seed in 0u64..1 << 48, n in 3usize..12) {
        let base = random_gnp(n, 0.3, false, seed).unwrap();
        let mut state = ForestState::init_empty(n).unwrap();
        state.bulk_insert(&base.undirected_edges().collect()).unwrap();
        for change in random_change_script(&base, 4, 3, true, seed ^ 2) {
            state.bulk_insert(&change.inserted).unwrap();
            state.bulk_delete(&change.deleted).unwrap();
        }
        let comp = oracle::connected_components(state.graph()).unwrap();
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(state.query(a, b).unwrap(), comp[a] == comp[b]);
            }
        }
    }

    #[test]
    fn normalized_changes_apply_cleanly(
        seed in 0u64..1 << 48,
        n in 2usize..10,
        raw in proptest::collection::vec((0usize..10, 0usize..10, any::<bool>()), 0..20),
    ) {
        let g = random_gnp(n, 0.3, true, seed).unwrap();
        let mut change = BulkChange::default();
        for (u, v, insert) in raw {
            if u < n && v < n && u != v {
                if insert {
                    change.inserted.insert((u, v));
                } else {
                    change.deleted.insert((u, v));
                }
            }
        }
        let norm = normalize_change(&g, &change);
        let g2 = apply_change(&g, &norm).unwrap();
        let expected: BTreeSet<(usize, usize)> = g
            .edges()
            .chain(norm.inserted.iter().copied())
            .filter(|e| !norm.deleted.contains(e))
            .collect();
        prop_assert_eq!(g2.edges().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn gf2_multiplication_distributes(
        a in proptest::collection::vec(0usize..64, 0..10),
        b in proptest::collection::vec(0usize..64, 0..10),
        c in proptest::collection::vec(0usize..64, 0..10),
    ) {
        let bound = 63;
        let p = TruncatedPoly::from_degrees(&a, bound);
        let q = TruncatedPoly::from_degrees(&b, bound);
        let r = TruncatedPoly::from_degrees(&c, bound);
        let left = poly_mul(&poly_add(&p, &q).unwrap(), &r).unwrap();
        let right =
            poly_add(&poly_mul(&p, &r).unwrap(), &poly_mul(&q, &r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn series_inverse_multiplies_to_one(
        degrees in proptest::collection::vec(1usize..48, 0..8),
        bound in 8usize..64,
    ) {
        let mut p = TruncatedPoly::from_degrees(
            &degrees.iter().copied().filter(|&d| d <= bound).collect::<Vec<_>>(),
            bound,
        );
        p.set_coeff(0, true);
        let inv = poly_series_inverse(&p).unwrap();
        prop_assert_eq!(poly_mul(&p, &inv).unwrap(), TruncatedPoly::one(bound));
    }

    #[test]
    fn local_and_adjugate_inverses_agree(seed in 0u64..1 << 48, n in 1usize..5) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bound = 24;
        let mut a = PolyMatrix::zero(n, n, bound);
        for r in 0..n {
            for c in 0..n {
                if r != c && rng.gen_bool(0.5) {
                    a.set(r, c, TruncatedPoly::monomial(rng.gen_range(1..=6), bound));
                }
            }
        }
        let m = mat_add(&PolyMatrix::identity(n, bound), &a).unwrap();
        let local = mat_inverse_local(&m).unwrap();
        let adj = mat_inverse_adjugate(&m).unwrap();
        prop_assert_eq!(&local, &adj);
        prop_assert_eq!(mat_mul(&m, &local).unwrap(), PolyMatrix::identity(n, bound));
    }

    #[test]
    fn walk_parity_satisfies_first_step_recurrence(seed in 0u64..1 << 48, n in 2usize..7) {
        use rand::{Rng, SeedableRng};
        let g = random_gnp(n, 0.4, true, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 3);
        let mut w = WeightAssignment::new();
        let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (u, v) in g.edges() {
            let wt = rng.gen_range(1..=5usize);
            w.set(u, v, BigInt::from(wt));
            out[u].push((v, wt));
        }
        let bound = 30;
        // The oracle fills the table over last edges; the first-step
        // expansion is an independent identity it must also satisfy.
        let table = oracle::count_weighted_walks_mod2(&g, &w, bound).unwrap();
        for s in 0..n {
            for t in 0..n {
                for i in 0..=bound {
                    let mut expected = s == t && i == 0;
                    for &(v, wt) in &out[s] {
                        if wt <= i {
                            expected ^= table.get(v, t, i - wt);
                        }
                    }
                    prop_assert_eq!(table.get(s, t, i), expected);
                }
            }
        }
    }

    #[test]
    fn isolation_is_permutation_equivariant(seed in 0u64..1 << 48, n in 3usize..9) {
        let g = random_gnp(n, 0.3, true, seed).unwrap();
        prop_assume!(g.edge_count() > 0);
        let Ok(w) = random_isolating_weights(&g, seed ^ 4, 24) else {
            return Ok(());
        };
        let perm = permutation(n, seed ^ 5);
        let pg = permuted_graph(&g, &perm);
        let pw = permuted_weights(&w, &perm);
        let original = oracle::isolation_report(&g, &w).unwrap();
        let relabeled = oracle::isolation_report(&pg, &pw).unwrap();
        prop_assert_eq!(original.is_isolating, relabeled.is_isolating);
        let mapped: BTreeMap<(usize, usize), _> = original
            .pairs
            .iter()
            .map(|(&(s, t), stats)| ((perm[s], perm[t]), stats.clone()))
            .collect();
        prop_assert_eq!(mapped, relabeled.pairs);
    }

    #[test]
    fn circulation_is_permutation_equivariant(seed in 0u64..1 << 48, n in 3usize..9) {
        use rand::{Rng, SeedableRng};
        let g = random_gnp(n, 0.35, false, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 6);
        let mut w = WeightAssignment::new();
        for (u, v) in g.undirected_edges() {
            w.set_skew(u, v, BigInt::from(rng.gen_range(-20i64..=20)));
        }
        if w.skew_violation().is_some() {
            return Ok(());
        }
        let perm = permutation(n, seed ^ 7);
        let original = oracle::circulation_report(&g, &w).unwrap();
        let relabeled =
            oracle::circulation_report(&permuted_graph(&g, &perm), &permuted_weights(&w, &perm))
                .unwrap();
        prop_assert_eq!(original.has_nonzero_circulation, relabeled.has_nonzero_circulation);
        prop_assert_eq!(original.cycles.len(), relabeled.cycles.len());
        let weights = |cycles: &[oracle::Cycle]| {
            let mut ws: Vec<BigInt> = cycles.iter().map(|c| c.weight.clone()).collect();
            ws.sort();
            ws
        };
        prop_assert_eq!(weights(&original.cycles), weights(&relabeled.cycles));
    }

    #[test]
    fn algebraic_queries_match_closure(seed in 0u64..1 << 48, n in 3usize..8) {
        let g = random_gnp(n, 0.25, true, seed).unwrap();
        prop_assume!(g.edge_count() > 0);
        let Ok(mut state) = AlgebraicState::init_random(&g, EngineMode::Verified, seed) else {
            return Ok(());
        };
        for change in random_change_script(&g, 2, 2, true, seed ^ 8) {
            state.insert_edges(&change.inserted).unwrap();
            state.delete_edges(&change.deleted).unwrap();
        }
        let closure = oracle::transitive_closure(state.graph());
        for s in 0..n {
            for t in 0..n {
                let expected = s == t || closure.contains(&(s, t));
                prop_assert_eq!(state.query(s, t).unwrap(), expected);
            }
        }
    }
}
