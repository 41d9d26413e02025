#![allow(dead_code)]

use cheaptalk::chain::TransitionMatrix;
use cheaptalk::game::{GameSpec, StationaryStrategy};
use cheaptalk::rational::{rat, zero_matrix, Matrix, Rat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-stochastic matrix with strictly positive entries.
pub fn random_chain(rng: &mut impl Rng, n: usize) -> TransitionMatrix {
    let rows = (0..n)
        .map(|_| {
            let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
            let total: i64 = w.iter().sum();
            w.iter().map(|&x| rat(x, total)).collect()
        })
        .collect();
    TransitionMatrix::new(rows).unwrap()
}

pub fn random_payoffs(rng: &mut impl Rng, n_s: usize, n_b: usize) -> Matrix {
    (0..n_s)
        .map(|_| {
            (0..n_b)
                .map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=3)))
                .collect()
        })
        .collect()
}

pub fn random_game(rng: &mut impl Rng, n_s: usize, n_b: usize) -> GameSpec {
    let chain = random_chain(rng, n_s);
    let u1 = random_payoffs(rng, n_s, n_b);
    let u2 = random_payoffs(rng, n_s, n_b);
    GameSpec::unnamed(u1, u2, chain).unwrap()
}

pub fn random_strategy(rng: &mut impl Rng, n_msgs: usize, n_b: usize) -> StationaryStrategy {
    let rows = (0..n_msgs)
        .map(|_| {
            let w: Vec<i64> = (0..n_b).map(|_| rng.gen_range(0..=4)).collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                let mut r = vec![rat(0, 1); n_b];
                r[0] = rat(1, 1);
                r
            } else {
                w.iter().map(|&x| rat(x, total)).collect()
            }
        })
        .collect();
    StationaryStrategy::new(rows).unwrap()
}

/// Convex combination of a few random permutation matrices.
pub fn random_doubly_stochastic(rng: &mut impl Rng, n: usize) -> Matrix {
    let k = rng.gen_range(1..=n + 2);
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    let mut j = zero_matrix(n, n);
    for &w in &weights {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, &c) in perm.iter().enumerate() {
            j[i][c] += rat(w, total);
        }
    }
    j
}

/// Entries uniform on multiples of 1/1000 in `[-eps, eps]`.
pub fn perturb(rng: &mut impl Rng, u: &Matrix, eps: &Rat) -> Matrix {
    u.iter()
        .map(|row| {
            row.iter()
                .map(|x| x + eps * rat(rng.gen_range(-1000..=1000), 1000))
                .collect()
        })
        .collect()
}
