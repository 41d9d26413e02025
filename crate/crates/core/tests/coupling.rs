#![allow(clippy::needless_range_loop)]

mod common;

use cheaptalk::catalog;
use cheaptalk::chain::{sample_path, TransitionMatrix};
use cheaptalk::copula::{mu_zero, sample_copula, swap_copula, Copula};
use cheaptalk::coupling::*;
use cheaptalk::game::{payoff_u, GameSpec, PayoffPoint, StationaryStrategy};
use cheaptalk::rational::{int, rat, to_f64};
use num_traits::Signed;

fn persistent_game() -> GameSpec {
    let p = TransitionMatrix::new(vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]]).unwrap();
    let base = catalog::two_state();
    GameSpec::unnamed(base.u1.clone(), base.u2.clone(), p).unwrap()
}

#[test]
fn swapping_two_states_trades_the_payoffs() {
    let g = catalog::triangle();
    let y2 = StationaryStrategy::pure(&[0, 1, 2], 3);
    let mu = swap_copula(&g.m, 1, 2);
    let r = payoff_identity_check(&g, &y2, &mu, 0.9, 200, 4000, 1).unwrap();
    assert_eq!(r.analytic, PayoffPoint::new(rat(1, 3), int(1)));
    assert!(r.within, "{r:?}");
    let truthful = payoff_identity_check(&g, &y2, &mu_zero(&g.m), 0.9, 200, 4000, 2).unwrap();
    assert_eq!(truthful.analytic, PayoffPoint::new(int(1), rat(1, 3)));
    assert!(truthful.within);
}

#[test]
fn random_copula_payoff_identity_is_tight() {
    let g = persistent_game();
    let mu = sample_copula(&g.m, 77);
    let y = common::random_strategy(&mut common::rng(77), 2, 2);
    let r = payoff_identity_check(&g, &y, &mu, 0.95, 500, 10_000, 5).unwrap();
    assert!(r.gap < 0.02, "{r:?}");
    assert!(r.within);
}

#[test]
fn sampled_pairs_follow_the_copula() {
    let g = catalog::triangle();
    let mu = sample_copula(&g.m, 4);
    let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
    let runs = 100_000u64;
    let mut counts = [[0u32; 3]; 3];
    for seed in 0..runs {
        let s = sample_path(&g.chain, 3, seed, None).unwrap();
        let t = sample_fictitious(&k, &s, seed + runs).unwrap();
        counts[s[2]][t.states()[2]] += 1;
    }
    for s in 0..3 {
        for t in 0..3 {
            let p = to_f64(mu.get(s, t));
            let f = counts[s][t] as f64 / runs as f64;
            let sigma = (p * (1.0 - p) / runs as f64).sqrt();
            assert!((f - p).abs() <= 3.0 * sigma + 1e-12, "cell ({s},{t}): {f} vs {p}");
        }
    }
}

#[test]
fn swap_deviation_plays_the_other_row() {
    let g = catalog::two_state();
    let mu = swap_copula(&g.m, 0, 1);
    let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
    let s = sample_path(&g.chain, 400, 9, None).unwrap();
    let t = sample_fictitious(&k, &s, 9).unwrap();
    let messages = deviation_messages(truth_telling, &t);
    assert!(s.iter().zip(&messages).all(|(s, a)| *a == 1 - s));
    // identical kernel from μ₀ reproduces the original strategy
    let k0 = build_kernel(&mu_zero(&g.m), &g.chain, &g.m).unwrap();
    let t0 = sample_fictitious(&k0, &s, 9).unwrap();
    assert_eq!(deviation_messages(truth_telling, &t0), s);
}

#[test]
fn necessity_on_example_six() {
    let g = catalog::two_state();
    let y = StationaryStrategy::pure(&[0, 1], 2);
    let r = copula_deviation_check(&g, &y, 5).unwrap();
    assert!(r.consistent);
    let swap = swap_copula(&g.m, 0, 1);
    assert_eq!(payoff_u(swap.matrix(), &y, &g).unwrap().v1, rat(1, 2));
    assert_eq!(r.max_gap, int(0));
}

#[test]
fn exact_law_rejects_long_horizons() {
    let g = catalog::triangle();
    let mu = mu_zero(&g.m);
    let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
    assert!(exact_law_check(&k, &mu, &g.chain, &g.m, 5).is_ok());
    assert!(exact_law_check(&k, &mu, &g.chain, &g.m, 6).is_err());
}

#[test]
fn three_state_law_holds_for_random_copulas() {
    let g = catalog::triangle();
    for seed in 0..5 {
        let mu: Copula = sample_copula(&g.m, seed);
        let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
        let r = exact_law_check(&k, &mu, &g.chain, &g.m, 3).unwrap();
        assert!(r.all_hold(), "{r:?}");
    }
}

#[test]
fn violating_copula_breaks_the_chain_law() {
    let g = catalog::five_cycle_game(rat(6, 5));
    let (mu, v) = find_property_p_violation(&g.chain, &g.m).unwrap();
    assert!(v.is_positive());
    let k = build_kernel_unchecked(&mu, &g.chain, &g.m);
    let claims = kernel_claims(&k, &mu, &g.chain, &g.m);
    assert!(claims[0] == int(0) && claims[1] == int(0) && claims[3] == int(0));
    assert!(claims[2].is_positive());
    let r = exact_law_check(&k, &mu, &g.chain, &g.m, 2).unwrap();
    assert!(!r.all_hold());
    assert!(r.p2_first_failure.is_some());
}
