#![allow(clippy::needless_range_loop)]

mod common;

use cheaptalk::assignment::{best_non_identity, brute_force_best};
use cheaptalk::block_sim::{
    best_reply_sender, evaluate_rule, exact_joint_distribution, fictitious_schedule, QuotaAutomaton, QuotaState,
    DEFAULT_BUDGET,
};
use cheaptalk::chain::{invariant_measure, quota_distribution, TransitionMatrix};
use cheaptalk::copula::{birkhoff_decompose, extreme_points, is_copula, is_vertex_by_lp, sample_copula};
use cheaptalk::coupling::{build_kernel, check_property_p, kernel_claims};
use cheaptalk::equilibrium::compute_e_polygon;
use cheaptalk::game::{babbling_strategy, truthful_payoff};
use cheaptalk::gamefile::GameFile;
use cheaptalk::rational::{rat, sum, Rat};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn birkhoff_terms_rebuild_the_matrix(seed in any::<u64>(), n in 2usize..=5) {
        let j = common::random_doubly_stochastic(&mut common::rng(seed), n);
        let d = birkhoff_decompose(&j).unwrap();
        prop_assert_eq!(d.reconstruct(n), j);
        prop_assert!(d.terms.len() <= (n - 1) * (n - 1) + 1);
        prop_assert_eq!(sum(d.terms.iter().map(|t| &t.0)), Rat::one());
    }

    #[test]
    fn assignment_matches_enumeration(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = common::rng(seed);
        let w = common::random_payoffs(&mut r, n, n);
        prop_assert_eq!(best_non_identity(&w).map(|x| x.0), brute_force_best(&w, true).map(|x| x.0));
    }

    #[test]
    fn invariant_measure_is_fixed(seed in any::<u64>(), n in 2usize..=5) {
        let p = common::random_chain(&mut common::rng(seed), n);
        let m = invariant_measure(&p).unwrap();
        prop_assert_eq!(sum(&m), Rat::one());
        prop_assert_eq!(p.step(&m), m);
    }

    #[test]
    fn quotas_round_the_measure(seed in any::<u64>(), n in 2usize..=5, big_n in 1usize..60) {
        let p = common::random_chain(&mut common::rng(seed), n);
        let m = invariant_measure(&p).unwrap();
        let q = quota_distribution(&m, big_n).unwrap();
        prop_assert_eq!(q.quotas.iter().sum::<usize>(), big_n);
        for (k, ms) in q.quotas.iter().zip(&m) {
            let diff = Rat::from_integer((*k).into()) - ms * Rat::from_integer(big_n.into());
            prop_assert!(diff < Rat::one() && diff > -Rat::one());
        }
    }

    #[test]
    fn schedule_fills_every_quota(quotas in proptest::collection::vec(0usize..5, 2..5), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let counts: Vec<usize> = quotas.iter().map(|&q| r.gen_range(0..=q)).collect();
        let remaining = quotas.iter().sum::<usize>() - counts.iter().sum::<usize>();
        let tail = fictitious_schedule(&counts, &quotas, remaining).unwrap();
        prop_assert_eq!(tail.len(), remaining);
        prop_assert!(tail.windows(2).all(|w| w[0] <= w[1]));
        for (s, (&q, &c)) in quotas.iter().zip(&counts).enumerate() {
            prop_assert_eq!(tail.iter().filter(|&&x| x == s).count(), q - c);
        }
    }

    #[test]
    fn assumption_a_chains_accept_every_copula(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = common::rng(seed);
        let alpha: Vec<Rat> = (0..n).map(|_| rat(r.gen_range(1..=4), 4 * n as i64)).collect();
        let rows = (0..n)
            .map(|s| {
                let mut row: Vec<Rat> = alpha.clone();
                row[s] = Rat::zero();
                let off = sum(&row);
                row[s] = Rat::one() - off;
                row
            })
            .collect();
        let p = TransitionMatrix::new(rows).unwrap();
        let m = invariant_measure(&p).unwrap();
        let mu = sample_copula(&m, seed);
        prop_assert!(is_copula(mu.matrix(), &m));
        prop_assert!(check_property_p(&mu, &p, &m).holds);
        let k = build_kernel(&mu, &p, &m).unwrap();
        prop_assert!(kernel_claims(&k, &mu, &p, &m).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn block_law_has_both_margins(seed in any::<u64>(), big_n in 1usize..9) {
        let mut r = common::rng(seed);
        let g = common::random_game(&mut r, 3, 2);
        let y = common::random_strategy(&mut r, 3, 2);
        let aut = QuotaAutomaton::new(&g, y, big_n).unwrap();
        let delta = rat(9, 10);
        let best = best_reply_sender(&g, &aut, &delta, DEFAULT_BUDGET).unwrap();
        let rule = |q: &QuotaState, s: usize| best.message(q, s);
        let joint = exact_joint_distribution(&g, &aut, &rule);
        let m_n = aut.quotas.m_n();
        for s in 0..3 {
            prop_assert_eq!(sum(&joint.mu_hat[s]), g.m[s].clone());
            prop_assert_eq!(sum(joint.mu_hat.iter().map(|row| &row[s])), m_n[s].clone());
        }
        // the best reply weakly beats truth-telling from every state
        let truthful = evaluate_rule(&g, &aut, &|_: &QuotaState, s: usize| s, &delta);
        for s in 0..3 {
            prop_assert!(best.value(s) >= truthful[s].v1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn extreme_copulas_are_vertices(seed in any::<u64>(), n in 2usize..=4) {
        let p = common::random_chain(&mut common::rng(seed), n);
        let m = invariant_measure(&p).unwrap();
        let pts = extreme_points(&m, 5).unwrap();
        prop_assert!(!pts.is_empty());
        for c in &pts {
            prop_assert!(is_copula(c.matrix(), &m));
            prop_assert!(is_vertex_by_lp(c, &m));
        }
    }

    #[test]
    fn polygon_is_convex_and_holds_babbling(seed in any::<u64>(), n_s in 2usize..=3, n_b in 2usize..=3) {
        let g = common::random_game(&mut common::rng(seed), n_s, n_b);
        let e = compute_e_polygon(&g).unwrap();
        prop_assert!(e.polygon.is_convex_ccw());
        prop_assert!(e.polygon.contains(&truthful_payoff(&babbling_strategy(&g), &g)));
        for (v, w) in e.polygon.vertices.iter().zip(&e.witnesses) {
            prop_assert_eq!(&truthful_payoff(w, &g), v);
        }
    }

    #[test]
    fn game_files_round_trip(seed in any::<u64>(), n_s in 2usize..=4, n_b in 1usize..=3) {
        let g = common::random_game(&mut common::rng(seed), n_s, n_b);
        let text = GameFile::from_game(&g).to_json();
        let back = GameFile::from_json(&text).unwrap().to_game().unwrap();
        prop_assert_eq!(back.u1, g.u1);
        prop_assert_eq!(back.u2, g.u2);
        prop_assert_eq!(back.chain.rows(), g.chain.rows());
    }
}
