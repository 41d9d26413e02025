//! Couplings between the realized state process and a fictitious copy
//! with prescribed pair law, and the deviation that plays on the copy.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{One, Signed, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block_sim::{summarize, ChainSampler};
use crate::chain::{check_assumption_a, TransitionMatrix};
use crate::copula::{extreme_points, mu_zero, Copula};
use crate::error::{Error, Result};
use crate::game::{payoff_u, GameSpec, PayoffPoint, StationaryStrategy};
use crate::lp::{LinearProgram, Relation};
use crate::rational::{to_f64, zeros, Matrix, Rat};

fn conditional(mu: &[Vec<Rat>], m: &[Rat], s: usize, t: usize) -> Rat {
    &mu[s][t] / &m[t]
}

/// Left minus right side of the compatibility identity at `(s, t)`:
/// `Σ_{s'} μ(s'|t) p(s|s') − Σ_{t'} μ(s|t') p(t'|t)`.
fn property_p_residual(mu: &[Vec<Rat>], p: &TransitionMatrix, m: &[Rat], s: usize, t: usize) -> Rat {
    let n = m.len();
    let left = (0..n).fold(Rat::zero(), |acc, s2| acc + conditional(mu, m, s2, t) * p.get(s2, s));
    let right = (0..n).fold(Rat::zero(), |acc, t2| acc + conditional(mu, m, s, t2) * p.get(t, t2));
    left - right
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyP {
    pub holds: bool,
    pub worst_violation: Rat,
    /// Cell `(s, t)` attaining the worst violation.
    pub worst_cell: (usize, usize),
}

pub fn check_property_p(mu: &Copula, p: &TransitionMatrix, m: &[Rat]) -> PropertyP {
    let n = m.len();
    let mut worst = (Rat::zero(), (0, 0));
    for s in 0..n {
        for t in 0..n {
            let r = property_p_residual(mu.matrix(), p, m, s, t).abs();
            if r > worst.0 {
                worst = (r, (s, t));
            }
        }
    }
    PropertyP {
        holds: worst.0.is_zero(),
        worst_violation: worst.0,
        worst_cell: worst.1,
    }
}

/// Searches the copula polytope for the largest violation of the
/// compatibility identity, one LP per cell and sign. `None` means every
/// copula satisfies it.
pub fn find_property_p_violation(p: &TransitionMatrix, m: &[Rat]) -> Option<(Copula, Rat)> {
    let n = m.len();
    let nn = n * n;
    let mut best: Option<(Copula, Rat)> = None;
    for s in 0..n {
        for t in 0..n {
            // residual is linear in μ: coefficient of μ(i, j)
            let mut coeff = zeros(nn);
            for s2 in 0..n {
                coeff[s2 * n + t] += p.get(s2, s) / &m[t];
            }
            for t2 in 0..n {
                coeff[s * n + t2] -= p.get(t, t2) / &m[t2];
            }
            for sign in [Rat::one(), -Rat::one()] {
                let obj: Vec<Rat> = coeff.iter().map(|c| c * &sign).collect();
                let mut lp = LinearProgram::new(nn).maximize(obj);
                for k in 0..n {
                    let mut row = zeros(nn);
                    let mut col = zeros(nn);
                    for j in 0..n {
                        row[k * n + j] = Rat::one();
                        col[j * n + k] = Rat::one();
                    }
                    lp.add(row, Relation::Eq, m[k].clone());
                    lp.add(col, Relation::Eq, m[k].clone());
                }
                let Some((value, x)) = lp.solve().optimal() else {
                    continue;
                };
                if value.is_positive() && best.as_ref().is_none_or(|(_, v)| value > *v) {
                    let mu: Matrix = (0..n).map(|i| x[i * n..(i + 1) * n].to_vec()).collect();
                    let c = Copula::new(mu, m).expect("LP solution lies in the copula polytope");
                    best = Some((c, value));
                }
            }
        }
    }
    best
}

/// Two-state chain with off-diagonal rates `α₀ = p(0|1)`, `α₁ = p(1|0)`:
/// every copula is `μ₀` plus `x` times a fixed direction, so each residual
/// is affine in `x`. Returns true iff both coefficients vanish at every cell.
pub fn property_p_two_state_symbolic(alpha0: &Rat, alpha1: &Rat) -> Result<bool> {
    let p = TransitionMatrix::new(vec![
        vec![Rat::one() - alpha1, alpha1.clone()],
        vec![alpha0.clone(), Rat::one() - alpha0],
    ])?;
    let c = alpha0 + alpha1;
    let m = vec![alpha0 / &c, alpha1 / &c];
    let base = mu_zero(&m).into_matrix();
    let dir = [vec![-Rat::one(), Rat::one()], vec![Rat::one(), -Rat::one()]];
    let at = |x: &Rat| -> Matrix {
        (0..2)
            .map(|i| (0..2).map(|j| &base[i][j] + x * &dir[i][j]).collect())
            .collect()
    };
    let zero_mu = at(&Rat::zero());
    let one_mu = at(&Rat::one());
    for s in 0..2 {
        for t in 0..2 {
            let constant = property_p_residual(&zero_mu, &p, &m, s, t);
            let slope = property_p_residual(&one_mu, &p, &m, s, t) - &constant;
            if !constant.is_zero() || !slope.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Joint law on (previous fictitious, current realized, current fictitious).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingKernel {
    /// `bar_mu[t'][s][t]`.
    pub bar_mu: Vec<Matrix>,
}

impl CouplingKernel {
    pub fn n(&self) -> usize {
        self.bar_mu.len()
    }

    /// Mass of `(t', s)` summed over `t`.
    pub fn pair_mass(&self, t_prev: usize, s: usize) -> Rat {
        self.bar_mu[t_prev][s].iter().sum()
    }

    /// Law of `t` given `(t', s)`, or `None` on a null event.
    pub fn next_given(&self, t_prev: usize, s: usize) -> Option<Vec<Rat>> {
        let total = self.pair_mass(t_prev, s);
        if total.is_zero() {
            return None;
        }
        Some(self.bar_mu[t_prev][s].iter().map(|x| x / &total).collect())
    }

    /// Law of `(t', t)` given `s`, flattened as `t' * n + t`.
    pub fn start_given(&self, s: usize) -> Option<Vec<Rat>> {
        let n = self.n();
        let cells: Vec<Rat> = (0..n * n).map(|k| self.bar_mu[k / n][s][k % n].clone()).collect();
        let total: Rat = cells.iter().sum();
        if total.is_zero() {
            return None;
        }
        Some(cells.into_iter().map(|x| x / &total).collect())
    }
}

/// `bar μ(t', s, t) = μ(s, t) p(t|t') m(t') / m(t)` with no checks.
pub fn build_kernel_unchecked(mu: &Copula, p: &TransitionMatrix, m: &[Rat]) -> CouplingKernel {
    let n = m.len();
    let bar_mu = (0..n)
        .map(|tp| {
            (0..n)
                .map(|s| (0..n).map(|t| mu.get(s, t) * p.get(tp, t) * &m[tp] / &m[t]).collect())
                .collect()
        })
        .collect();
    CouplingKernel { bar_mu }
}

/// Worst absolute discrepancy in each of the four kernel identities:
/// the (s,t) marginal is μ; the (t',t) marginal is `m(t')p(t|t')`; the
/// (t',s) marginal is μ pushed one step through the chain; and the law of
/// `s` given `(t', t)` is `μ(·|t)`.
pub fn kernel_claims(kernel: &CouplingKernel, mu: &Copula, p: &TransitionMatrix, m: &[Rat]) -> [Rat; 4] {
    let n = m.len();
    let b = &kernel.bar_mu;
    let mut worst: [Rat; 4] = Default::default();
    let mut bump = |k: usize, x: Rat| {
        let x = x.abs();
        if x > worst[k] {
            worst[k] = x;
        }
    };
    for s in 0..n {
        for t in 0..n {
            let m23: Rat = (0..n).map(|tp| &b[tp][s][t]).sum();
            bump(0, m23 - mu.get(s, t));
        }
    }
    for tp in 0..n {
        for t in 0..n {
            let m13: Rat = (0..n).map(|s| &b[tp][s][t]).sum();
            bump(1, m13.clone() - &m[tp] * p.get(tp, t));
            if m13.is_positive() {
                for s in 0..n {
                    bump(3, &b[tp][s][t] / &m13 - conditional(mu.matrix(), m, s, t));
                }
            }
        }
        for s2 in 0..n {
            let m12 = kernel.pair_mass(tp, s2);
            let pushed: Rat = (0..n).map(|s| mu.get(s, tp) * p.get(s, s2)).sum();
            bump(2, m12 - pushed);
        }
    }
    worst
}

/// Builds the kernel for a copula satisfying the compatibility identity and
/// asserts all four kernel identities exactly.
pub fn build_kernel(mu: &Copula, p: &TransitionMatrix, m: &[Rat]) -> Result<CouplingKernel> {
    if m.iter().any(|x| !x.is_positive()) {
        return Err(Error::Precondition("invariant measure must be positive".into()));
    }
    let pp = check_property_p(mu, p, m);
    if !pp.holds {
        return Err(Error::Precondition(format!(
            "copula violates Property P at cell {:?} by {}",
            pp.worst_cell,
            crate::rational::fmt_rat(&pp.worst_violation)
        )));
    }
    let kernel = build_kernel_unchecked(mu, p, m);
    let claims = kernel_claims(&kernel, mu, p, m);
    if let Some(k) = claims.iter().position(|c| !c.is_zero()) {
        return Err(Error::Internal(format!("kernel identity {} fails", k + 1)));
    }
    Ok(kernel)
}

/// Fictitious states `t₀, t₁, …, t_n` aligned with `s₁, …, s_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FictitiousPath {
    pub t: Vec<usize>,
}

impl FictitiousPath {
    /// `t₁, …, t_n`, dropping the bootstrap draw.
    pub fn states(&self) -> &[usize] {
        &self.t[1..]
    }
}

fn table(weights: Option<Vec<Rat>>) -> Option<WeightedIndex<f64>> {
    weights.map(|w| WeightedIndex::new(w.iter().map(to_f64)).expect("positive total mass"))
}

/// Floating-point sampling tables for a kernel, built once.
pub(crate) struct KernelSampler {
    n: usize,
    start: Vec<Option<WeightedIndex<f64>>>,
    next: Vec<Vec<Option<WeightedIndex<f64>>>>,
}

impl KernelSampler {
    pub(crate) fn new(kernel: &CouplingKernel) -> Self {
        let n = kernel.n();
        KernelSampler {
            n,
            start: (0..n).map(|s| table(kernel.start_given(s))).collect(),
            next: (0..n)
                .map(|tp| (0..n).map(|s| table(kernel.next_given(tp, s))).collect())
                .collect(),
        }
    }

    pub(crate) fn sample(&self, s_path: &[usize], rng: &mut impl Rng) -> Result<FictitiousPath> {
        let Some(&s1) = s_path.first() else {
            return Ok(FictitiousPath { t: Vec::new() });
        };
        let start = self.start[s1]
            .as_ref()
            .ok_or_else(|| Error::ZeroProbability(format!("first state {s1} has no kernel mass")))?;
        let k = start.sample(rng);
        let mut t = Vec::with_capacity(s_path.len() + 1);
        t.extend([k / self.n, k % self.n]);
        for (i, &s) in s_path.iter().enumerate().skip(1) {
            let prev = t[i];
            let law = self.next[prev][s].as_ref().ok_or_else(|| {
                Error::ZeroProbability(format!(
                    "stage {}: fictitious state {prev} followed by realized state {s} has probability zero",
                    i + 1
                ))
            })?;
            t.push(law.sample(rng));
        }
        Ok(FictitiousPath { t })
    }
}

/// Draws the fictitious path for a realized path. Deterministic in `seed`.
pub fn sample_fictitious(kernel: &CouplingKernel, s_path: &[usize], seed: u64) -> Result<FictitiousPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KernelSampler::new(kernel).sample(s_path, &mut rng)
}

/// Messages of the deviation: the original strategy evaluated on the
/// fictitious history `t₁..t_k` at every stage `k`.
pub fn deviation_messages<F>(sigma: F, path: &FictitiousPath) -> Vec<usize>
where
    F: Fn(&[usize]) -> usize,
{
    let t = path.states();
    (1..=t.len()).map(|k| sigma(&t[..k])).collect()
}

/// Truth-telling on whatever history it is handed.
pub fn truth_telling(history: &[usize]) -> usize {
    *history.last().expect("nonempty history")
}

/// Exact verification of the coupled process on a short horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub horizon: usize,
    /// Worst discrepancy in the law of `(t_{k−1}, s_k, t_k)` against the kernel.
    pub kernel_law: Rat,
    /// Conditional independence of `t₁..t_k` and later states given `s_k`.
    pub p1: Rat,
    /// Law of `t₁..t_k` against the chain law.
    pub p2: Rat,
    /// Smallest prefix length whose fictitious law differs from the chain's.
    pub p2_first_failure: Option<usize>,
    /// Law of `(s_k, t_k)` against μ.
    pub p3: Rat,
    /// Law of `s_k` given `t₁..t_k` against `μ(·|t_k)`.
    pub p4: Rat,
    /// Probability lost to null conditioning events.
    pub undefined_mass: Rat,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        [
            &self.kernel_law,
            &self.p1,
            &self.p2,
            &self.p3,
            &self.p4,
            &self.undefined_mass,
        ]
        .iter()
        .all(|x| x.is_zero())
    }
}

/// Cap on enumerated joint paths.
pub const LAW_PATH_CAP: usize = 200_000;

fn add<K: Hash + Eq>(map: &mut HashMap<K, Rat>, key: K, x: &Rat) {
    *map.entry(key).or_insert_with(Rat::zero) += x;
}

fn worst_gap<'a>(pairs: impl Iterator<Item = (&'a Rat, Rat)>) -> Rat {
    pairs.map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rat::zero)
}

pub fn exact_law_check(
    kernel: &CouplingKernel,
    mu: &Copula,
    p: &TransitionMatrix,
    m: &[Rat],
    horizon: usize,
) -> Result<LawReport> {
    let n = m.len();
    let paths = (n as f64).powi(2 * horizon as i32 + 1);
    if horizon == 0 || horizon > 6 || paths > LAW_PATH_CAP as f64 {
        return Err(Error::CapExceeded {
            what: "exact law horizon",
            value: horizon,
            cap: 6.min(((LAW_PATH_CAP as f64).ln() / (n as f64).ln()).floor() as usize / 2),
        });
    }
    // (s₁..s_k, t₀..t_k) with probability
    let mut layer: Vec<(Vec<usize>, Vec<usize>, Rat)> = Vec::new();
    let mut undefined = Rat::zero();
    for s1 in 0..n {
        if m[s1].is_zero() {
            continue;
        }
        match kernel.start_given(s1) {
            Some(law) => {
                for (k, w) in law.iter().enumerate() {
                    if w.is_positive() {
                        layer.push((vec![s1], vec![k / n, k % n], &m[s1] * w));
                    }
                }
            }
            None => undefined += &m[s1],
        }
    }
    let mut layers = vec![layer];
    for _ in 1..horizon {
        let last = layers.last().unwrap();
        let mut next = Vec::with_capacity(last.len() * n * n);
        for (s_hist, t_hist, w) in last {
            let s = *s_hist.last().unwrap();
            let tp = *t_hist.last().unwrap();
            for s2 in 0..n {
                let ps = p.get(s, s2);
                if ps.is_zero() {
                    continue;
                }
                let Some(law) = kernel.next_given(tp, s2) else {
                    undefined += w * ps;
                    continue;
                };
                for (t2, pt) in law.iter().enumerate() {
                    if pt.is_positive() {
                        let mut sh = s_hist.clone();
                        sh.push(s2);
                        let mut th = t_hist.clone();
                        th.push(t2);
                        next.push((sh, th, w * ps * pt));
                    }
                }
            }
        }
        layers.push(next);
    }
    let full = layers.last().unwrap();

    let chain_law = |seq: &[usize]| -> Rat { seq.windows(2).fold(m[seq[0]].clone(), |acc, w| acc * p.get(w[0], w[1])) };

    let mut kernel_law = Rat::zero();
    let mut p1 = Rat::zero();
    let mut p2 = Rat::zero();
    let mut p2_first_failure = None;
    let mut p3 = Rat::zero();
    let mut p4 = Rat::zero();
    for k in 1..=horizon {
        let mut triple: HashMap<(usize, usize, usize), Rat> = HashMap::new();
        let mut pair: HashMap<(usize, usize), Rat> = HashMap::new();
        let mut t_prefix: HashMap<Vec<usize>, Rat> = HashMap::new();
        let mut s_and_prefix: HashMap<(usize, Vec<usize>), Rat> = HashMap::new();
        // stage-k laws come from the layer that ends at k
        for (s_hist, t_hist, w) in &layers[k - 1] {
            let s = s_hist[k - 1];
            let t = t_hist[k];
            let prefix = t_hist[1..=k].to_vec();
            add(&mut triple, (t_hist[k - 1], s, t), w);
            add(&mut pair, (s, t), w);
            add(&mut t_prefix, prefix.clone(), w);
            add(&mut s_and_prefix, (s, prefix), w);
        }
        // independence from the future needs the full horizon
        let mut prefix_and_future: HashMap<(Vec<usize>, Vec<usize>), Rat> = HashMap::new();
        let mut s_and_prefix_full: HashMap<(usize, Vec<usize>), Rat> = HashMap::new();
        let mut future: HashMap<Vec<usize>, Rat> = HashMap::new();
        let mut s_k: HashMap<usize, Rat> = HashMap::new();
        for (s_hist, t_hist, w) in full {
            let prefix = t_hist[1..=k].to_vec();
            let fut = s_hist[k - 1..].to_vec();
            add(&mut s_and_prefix_full, (fut[0], prefix.clone()), w);
            add(&mut s_k, fut[0], w);
            add(&mut prefix_and_future, (prefix, fut.clone()), w);
            add(&mut future, fut, w);
        }
        let mut cells = Vec::new();
        for tp in 0..n {
            for s in 0..n {
                for t in 0..n {
                    let got = triple.get(&(tp, s, t)).cloned().unwrap_or_else(Rat::zero);
                    cells.push((got, kernel.bar_mu[tp][s][t].clone()));
                }
            }
        }
        kernel_law = kernel_law.max(worst_gap(cells.iter().map(|(a, b)| (a, b.clone()))));

        let mut cells = Vec::new();
        for s in 0..n {
            for t in 0..n {
                cells.push((
                    pair.get(&(s, t)).cloned().unwrap_or_else(Rat::zero),
                    mu.get(s, t).clone(),
                ));
            }
        }
        p3 = p3.max(worst_gap(cells.iter().map(|(a, b)| (a, b.clone()))));

        // the fictitious prefix must reproduce every chain path, including
        // those it never visits
        let mut gap = Rat::zero();
        let mut seq = vec![0usize; k];
        loop {
            let got = t_prefix.get(&seq).cloned().unwrap_or_else(Rat::zero);
            gap = gap.max((got - chain_law(&seq)).abs());
            let Some(i) = (0..k).rev().find(|&i| seq[i] + 1 < n) else {
                break;
            };
            seq[i] += 1;
            for x in seq[i + 1..].iter_mut() {
                *x = 0;
            }
        }
        if gap.is_positive() && p2_first_failure.is_none() {
            p2_first_failure = Some(k);
        }
        p2 = p2.max(gap);

        for ((s, prefix), w) in &s_and_prefix {
            let t = *prefix.last().unwrap();
            let expect = &t_prefix[prefix] * conditional(mu.matrix(), m, *s, t);
            p4 = p4.max((w - expect).abs());
        }

        for ((prefix, fut), w) in &prefix_and_future {
            let s = fut[0];
            let lhs = w * &s_k[&s];
            let rhs = &s_and_prefix_full[&(s, prefix.clone())] * &future[fut];
            p1 = p1.max((lhs - rhs).abs());
        }
    }
    Ok(LawReport {
        horizon,
        kernel_law,
        p1,
        p2,
        p2_first_failure,
        p3,
        p4,
        undefined_mass: undefined,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffIdentity {
    pub simulated: (f64, f64),
    pub std_error: (f64, f64),
    pub analytic: PayoffPoint,
    /// Largest coordinate gap between simulated and analytic values.
    pub gap: f64,
    /// Three standard errors plus the truncation bound.
    pub bound: f64,
    pub within: bool,
}

/// Simulates truth-telling on the fictitious process against a stationary
/// receiver and compares the discounted payoff with `U(μ, y)`.
#[allow(clippy::too_many_arguments)]
pub fn payoff_identity_check(
    game: &GameSpec,
    y: &StationaryStrategy,
    mu: &Copula,
    delta: f64,
    horizon: usize,
    replications: usize,
    seed: u64,
) -> Result<PayoffIdentity> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Precondition("discount factor must lie in (0,1)".into()));
    }
    if replications < 2 {
        return Err(Error::Precondition("at least two replications are needed".into()));
    }
    let kernel = KernelSampler::new(&build_kernel(mu, &game.chain, &game.m)?);
    let analytic = payoff_u(mu.matrix(), y, game)?;
    let sampler = ChainSampler::new(game);
    let u1: Vec<Vec<f64>> = game.u1.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let u2: Vec<Vec<f64>> = game.u2.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let actions: Vec<WeightedIndex<f64>> = y
        .rows()
        .iter()
        .map(|r| WeightedIndex::new(r.iter().map(to_f64)).expect("mixed action"))
        .collect();
    let samples: Result<Vec<(f64, f64)>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let mut s_path = Vec::with_capacity(horizon);
            let mut s = sampler.first(&mut rng);
            for k in 0..horizon {
                if k > 0 {
                    s = sampler.step(s, &mut rng);
                }
                s_path.push(s);
            }
            let t = kernel.sample(&s_path, &mut rng)?;
            let messages = deviation_messages(truth_telling, &t);
            let mut weight = 1.0 - delta;
            let mut total = (0.0, 0.0);
            for (&s, &a) in s_path.iter().zip(&messages) {
                let b = actions[a].sample(&mut rng);
                total.0 += weight * u1[s][b];
                total.1 += weight * u2[s][b];
                weight *= delta;
            }
            Ok(total)
        })
        .collect();
    let (simulated, std_error) = summarize(&samples?);
    let gap = (simulated.0 - to_f64(&analytic.v1))
        .abs()
        .max((simulated.1 - to_f64(&analytic.v2)).abs());
    let truncation = to_f64(&game.max_abs_payoff()) * delta.powi(horizon as i32);
    let bound = 3.0 * std_error.0.max(std_error.1) + truncation;
    Ok(PayoffIdentity {
        simulated,
        std_error,
        analytic,
        gap,
        bound,
        within: gap <= bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessityReport {
    /// `max_μ U¹(μ, y) − U¹(μ₀, y)` over extreme copulas.
    pub max_gap: Rat,
    pub best_copula: Copula,
    /// True when no copula deviation gains, i.e. the gap is at most zero.
    pub consistent: bool,
}

/// For a stationary receiver strategy, the largest sender gain from playing
/// on a coupled fictitious process. A positive gain rules out any
/// equilibrium whose receiver behaviour averages to `y`.
pub fn copula_deviation_check(game: &GameSpec, y: &StationaryStrategy, cap: usize) -> Result<NecessityReport> {
    let a = check_assumption_a(&game.chain);
    if !a.holds() {
        return Err(Error::Precondition(
            "Assumption A fails for this chain; copulas outside M' cannot be reached by a coupling".into(),
        ));
    }
    let base = payoff_u(mu_zero(&game.m).matrix(), y, game)?.v1;
    let mut best: Option<(Rat, Copula)> = None;
    for c in extreme_points(&game.m, cap)? {
        let gap = payoff_u(c.matrix(), y, game)?.v1 - &base;
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, c));
        }
    }
    let (max_gap, best_copula) = best.expect("μ₀ is always extreme");
    Ok(NecessityReport {
        consistent: !max_gap.is_positive(),
        max_gap,
        best_copula,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::copula::{sample_copula, swap_copula};
    use crate::rational::{int, rat};

    fn persistent() -> (TransitionMatrix, Vec<Rat>) {
        let p = TransitionMatrix::new(vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]]).unwrap();
        (p, vec![rat(1, 2), rat(1, 2)])
    }

    #[test]
    fn diagonal_kernel_copies_the_state() {
        let g = catalog::triangle();
        let mu = mu_zero(&g.m);
        let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
        for tp in 0..3 {
            for s in 0..3 {
                for t in 0..3 {
                    if t != s {
                        assert!(k.bar_mu[tp][s][t].is_zero());
                    }
                }
            }
        }
        let path = [0, 2, 1, 0, 1, 2];
        assert_eq!(sample_fictitious(&k, &path, 3).unwrap().states(), &path);
    }

    #[test]
    fn swap_kernel_on_fair_coin() {
        let g = catalog::two_state();
        let mu = swap_copula(&g.m, 0, 1);
        let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
        for tp in 0..2 {
            for s in 0..2 {
                for t in 0..2 {
                    assert_eq!(k.bar_mu[tp][s][t], mu.get(s, t) / int(2));
                }
            }
        }
        let path = [0, 0, 1, 0, 1, 1];
        let t = sample_fictitious(&k, &path, 11).unwrap();
        let swapped: Vec<usize> = path.iter().map(|s| 1 - s).collect();
        assert_eq!(t.states(), swapped.as_slice());
        assert_eq!(deviation_messages(truth_telling, &t), swapped);
    }

    #[test]
    fn persistent_chain_off_diagonal_law() {
        let (p, m) = persistent();
        let mu = Copula::new(vec![vec![rat(3, 8), rat(1, 8)], vec![rat(1, 8), rat(3, 8)]], &m).unwrap();
        let k = build_kernel(&mu, &p, &m).unwrap();
        let r = exact_law_check(&k, &mu, &p, &m, 4).unwrap();
        assert!(r.all_hold(), "{r:?}");
    }

    #[test]
    fn cycle_chain_has_incompatible_copulas() {
        let g = catalog::five_cycle_game(rat(6, 5));
        let (mu, v) = find_property_p_violation(&g.chain, &g.m).unwrap();
        assert!(v.is_positive());
        assert!(!check_property_p(&mu, &g.chain, &g.m).holds);
        assert!(build_kernel(&mu, &g.chain, &g.m).is_err());
        let k = build_kernel_unchecked(&mu, &g.chain, &g.m);
        let r = exact_law_check(&k, &mu, &g.chain, &g.m, 2).unwrap();
        assert!(!r.p2.is_zero() || !r.undefined_mass.is_zero());
        assert_eq!(r.p2_first_failure, Some(2));
    }

    #[test]
    fn two_state_identity_is_symbolic() {
        for (a, b) in [(rat(1, 4), rat(1, 4)), (rat(1, 3), rat(1, 2)), (rat(1, 10), rat(9, 10))] {
            assert!(property_p_two_state_symbolic(&a, &b).unwrap());
        }
        assert!(find_property_p_violation(&persistent().0, &persistent().1).is_none());
    }

    #[test]
    fn random_copulas_on_assumption_a_chain() {
        let g = catalog::triangle();
        for seed in 0..20 {
            let mu = sample_copula(&g.m, seed);
            assert!(check_property_p(&mu, &g.chain, &g.m).holds);
            let k = build_kernel(&mu, &g.chain, &g.m).unwrap();
            assert!(kernel_claims(&k, &mu, &g.chain, &g.m).iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn zero_probability_path_is_an_error() {
        let g = catalog::triangle();
        let k = build_kernel(&mu_zero(&g.m), &g.chain, &g.m).unwrap();
        // the chain never stays put, so t = 0 followed by s = 0 is null
        let err = sample_fictitious(&k, &[0, 0], 1).unwrap_err();
        assert!(matches!(err, Error::ZeroProbability(_)));
    }

    #[test]
    fn necessity_on_triangle_and_cycle() {
        let g = catalog::triangle();
        let y2 = StationaryStrategy::pure(&[0, 1, 2], 3);
        let r = copula_deviation_check(&g, &y2, 5).unwrap();
        assert!(r.consistent);
        let g7 = catalog::five_cycle_game(rat(6, 5));
        let y = StationaryStrategy::pure(&[0, 1, 2, 3, 4], 5);
        assert!(matches!(
            copula_deviation_check(&g7, &y, 5),
            Err(Error::Precondition(_))
        ));
    }
}
