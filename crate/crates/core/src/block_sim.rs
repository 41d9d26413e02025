//! Block-periodic profiles: the receiver's quota automaton, the sender's
//! best reply by backward induction, exact and simulated payoffs, and the
//! receiver's incentive gap.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{One, Signed, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{quota_distribution, QuotaDistribution};
use crate::copula::{l1_distance, mu_zero};
use crate::error::{Error, Result};
use crate::game::{babbling_value, payoff_u, GameSpec, PayoffPoint, Player, StationaryStrategy};
use crate::rational::{dot, pow, solve_linear, to_f64, zero_matrix, zeros, Matrix, Rat};

/// Default cap on memoized `(automaton state, chain state)` pairs.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// The receiver's behaviour inside one block.
pub trait ReceiverAutomaton: Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync;

    /// Stages per block.
    fn horizon(&self) -> usize;
    fn initial(&self) -> Self::State;
    fn is_terminal(&self, q: &Self::State) -> bool;
    /// Mixed action taken after message `a`.
    fn action_mix(&self, q: &Self::State, a: usize) -> Vec<Rat>;
    fn next(&self, q: &Self::State, a: usize, b: usize) -> Self::State;
    /// The report the receiver acts on after message `a`, if it has one.
    fn announcement(&self, q: &Self::State, a: usize) -> Option<usize>;
    /// True when the message at `q` cannot affect anything.
    fn ignores_message(&self, _q: &Self::State) -> bool {
        false
    }
    /// True when message `a` at `q` is acted on as sent.
    fn listens(&self, q: &Self::State, a: usize) -> bool {
        self.announcement(q, a) == Some(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QuotaState {
    /// Reports used so far per state; the stage is their sum.
    Listening(Vec<usize>),
    /// Reports still owed to each state by the fictitious tail.
    Busted(Vec<usize>),
}

/// Listens until some state is reported beyond its quota, then plays
/// against a fixed schedule that completes every quota in ascending
/// state order.
#[derive(Debug, Clone)]
pub struct QuotaAutomaton {
    pub quotas: QuotaDistribution,
    pub y: StationaryStrategy,
}

impl QuotaAutomaton {
    pub fn new(game: &GameSpec, y: StationaryStrategy, block_length: usize) -> Result<Self> {
        Ok(QuotaAutomaton {
            quotas: quota_distribution(&game.m, block_length)?,
            y,
        })
    }

    fn theta(&self, q: &QuotaState, a: usize) -> usize {
        match q {
            QuotaState::Listening(counts) if counts[a] < self.quotas.quotas[a] => a,
            QuotaState::Listening(counts) => first_owed(&residual(&self.quotas.quotas, counts)),
            QuotaState::Busted(owed) => first_owed(owed),
        }
    }
}

fn residual(quotas: &[usize], counts: &[usize]) -> Vec<usize> {
    quotas.iter().zip(counts).map(|(q, c)| q - c).collect()
}

fn first_owed(owed: &[usize]) -> usize {
    owed.iter()
        .position(|&x| x > 0)
        .expect("quota left while the block is running")
}

impl ReceiverAutomaton for QuotaAutomaton {
    type State = QuotaState;

    fn horizon(&self) -> usize {
        self.quotas.block_length
    }

    fn initial(&self) -> QuotaState {
        QuotaState::Listening(vec![0; self.quotas.quotas.len()])
    }

    fn is_terminal(&self, q: &QuotaState) -> bool {
        match q {
            QuotaState::Listening(c) => c.iter().sum::<usize>() == self.horizon(),
            QuotaState::Busted(owed) => owed.iter().all(|&x| x == 0),
        }
    }

    fn action_mix(&self, q: &QuotaState, a: usize) -> Vec<Rat> {
        self.y.row(self.theta(q, a)).to_vec()
    }

    fn next(&self, q: &QuotaState, a: usize, _b: usize) -> QuotaState {
        match q {
            QuotaState::Listening(counts) if counts[a] < self.quotas.quotas[a] => {
                let mut c = counts.clone();
                c[a] += 1;
                QuotaState::Listening(c)
            }
            QuotaState::Listening(counts) => {
                let mut owed = residual(&self.quotas.quotas, counts);
                let theta = first_owed(&owed);
                owed[theta] -= 1;
                QuotaState::Busted(owed)
            }
            QuotaState::Busted(owed) => {
                let mut o = owed.clone();
                o[first_owed(owed)] -= 1;
                QuotaState::Busted(o)
            }
        }
    }

    fn announcement(&self, q: &QuotaState, a: usize) -> Option<usize> {
        Some(self.theta(q, a))
    }

    fn ignores_message(&self, q: &QuotaState) -> bool {
        matches!(q, QuotaState::Busted(_))
    }

    fn listens(&self, q: &QuotaState, a: usize) -> bool {
        matches!(q, QuotaState::Listening(c) if c[a] < self.quotas.quotas[a])
    }
}

/// The reports the receiver acts on from the bust stage to the end of the
/// block: each state repeated by its unused quota, in ascending order.
pub fn fictitious_schedule(counts_at_bust: &[usize], quotas: &[usize], remaining: usize) -> Result<Vec<usize>> {
    if counts_at_bust.iter().zip(quotas).any(|(c, q)| c > q) {
        return Err(Error::Internal("counts exceed quotas before the bust stage".into()));
    }
    let owed = residual(quotas, counts_at_bust);
    if owed.iter().sum::<usize>() != remaining {
        return Err(Error::Internal(format!(
            "unused quotas sum to {}, but {remaining} stages remain",
            owed.iter().sum::<usize>()
        )));
    }
    Ok(owed
        .iter()
        .enumerate()
        .flat_map(|(s, &k)| std::iter::repeat_n(s, k))
        .collect())
}

/// Two-stage block for two actions: the first report is acted on through
/// `first[a]`; in the second stage the receiver plays the other action.
#[derive(Debug, Clone)]
pub struct TwoStageAlternation {
    pub first: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AlternationState {
    First,
    Second(usize),
    Done,
}

impl ReceiverAutomaton for TwoStageAlternation {
    type State = AlternationState;

    fn horizon(&self) -> usize {
        2
    }

    fn initial(&self) -> AlternationState {
        AlternationState::First
    }

    fn is_terminal(&self, q: &AlternationState) -> bool {
        *q == AlternationState::Done
    }

    fn action_mix(&self, q: &AlternationState, a: usize) -> Vec<Rat> {
        let b = match q {
            AlternationState::First => self.first[a],
            AlternationState::Second(prev) => 1 - prev,
            AlternationState::Done => unreachable!("no stage after the block"),
        };
        let mut v = zeros(2);
        v[b] = Rat::one();
        v
    }

    fn next(&self, q: &AlternationState, _a: usize, b: usize) -> AlternationState {
        match q {
            AlternationState::First => AlternationState::Second(b),
            _ => AlternationState::Done,
        }
    }

    fn announcement(&self, q: &AlternationState, a: usize) -> Option<usize> {
        (*q == AlternationState::First).then_some(a)
    }

    fn ignores_message(&self, q: &AlternationState) -> bool {
        matches!(q, AlternationState::Second(_))
    }
}

fn support(mix: &[Rat]) -> impl Iterator<Item = (usize, &Rat)> {
    mix.iter().enumerate().filter(|(_, p)| p.is_positive())
}

/// Pure best reply of the sender in the `N`-stage discounted block game.
#[derive(Debug, Clone)]
pub struct BestReply<Q: Eq + Hash> {
    pub delta: Rat,
    values: HashMap<(Q, usize), Rat>,
    choice: HashMap<(Q, usize), usize>,
    initial: Q,
}

impl<Q: Clone + Eq + Hash> BestReply<Q> {
    /// Chosen message at automaton state `q` and chain state `s`; 0 where the
    /// message is irrelevant or the state was never reached.
    pub fn message(&self, q: &Q, s: usize) -> usize {
        self.choice.get(&(q.clone(), s)).copied().unwrap_or(0)
    }

    /// Optimal block value (unnormalized discounted sum) from chain state `s`.
    pub fn value(&self, s: usize) -> Rat {
        self.values
            .get(&(self.initial.clone(), s))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn states_explored(&self) -> usize {
        self.values.len()
    }
}

struct Dp<'a, A: ReceiverAutomaton> {
    game: &'a GameSpec,
    aut: &'a A,
    delta: &'a Rat,
    budget: usize,
    values: HashMap<(A::State, usize), Rat>,
    choice: HashMap<(A::State, usize), usize>,
}

impl<A: ReceiverAutomaton> Dp<'_, A> {
    fn solve(&mut self, q: &A::State, s: usize) -> Result<Rat> {
        if self.aut.is_terminal(q) {
            return Ok(Rat::zero());
        }
        if let Some(v) = self.values.get(&(q.clone(), s)) {
            return Ok(v.clone());
        }
        if self.values.len() >= self.budget {
            return Err(Error::CapExceeded {
                what: "best-reply states",
                value: self.values.len() + 1,
                cap: self.budget,
            });
        }
        let n_s = self.game.n_states();
        let candidates = if self.aut.ignores_message(q) { 1 } else { n_s };
        let mut best: Option<(Rat, usize)> = None;
        for a in 0..candidates {
            let mix = self.aut.action_mix(q, a);
            let mut v = Rat::zero();
            for (b, pb) in support(&mix) {
                let next = self.aut.next(q, a, b);
                let mut cont = Rat::zero();
                for (s2, p) in support(&self.game.chain.rows()[s]) {
                    cont += p * self.solve(&next, s2)?;
                }
                v += pb * (&self.game.u1[s][b] + self.delta * cont);
            }
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, a));
            }
        }
        let (v, a) = best.expect("at least one message");
        self.values.insert((q.clone(), s), v.clone());
        self.choice.insert((q.clone(), s), a);
        Ok(v)
    }
}

/// Backward induction over `(automaton state, chain state)`; ties go to
/// the smallest message.
pub fn best_reply_sender<A: ReceiverAutomaton>(
    game: &GameSpec,
    aut: &A,
    delta: &Rat,
    budget: usize,
) -> Result<BestReply<A::State>> {
    check_delta(delta)?;
    let mut dp = Dp {
        game,
        aut,
        delta,
        budget,
        values: HashMap::new(),
        choice: HashMap::new(),
    };
    let q0 = aut.initial();
    for s in 0..game.n_states() {
        dp.solve(&q0, s)?;
    }
    Ok(BestReply {
        delta: delta.clone(),
        values: dp.values,
        choice: dp.choice,
        initial: q0,
    })
}

fn check_delta(delta: &Rat) -> Result<()> {
    if !delta.is_positive() || *delta >= Rat::one() {
        return Err(Error::Precondition("discount factor must lie in (0,1)".into()));
    }
    Ok(())
}

/// Unnormalized discounted block payoffs `(sender, receiver)` from each
/// initial chain state, for an arbitrary pure sender rule.
pub fn evaluate_rule<A, F>(game: &GameSpec, aut: &A, rule: &F, delta: &Rat) -> Vec<PayoffPoint>
where
    A: ReceiverAutomaton,
    F: Fn(&A::State, usize) -> usize,
{
    fn go<A: ReceiverAutomaton, F: Fn(&A::State, usize) -> usize>(
        game: &GameSpec,
        aut: &A,
        rule: &F,
        delta: &Rat,
        q: &A::State,
        s: usize,
        memo: &mut HashMap<(A::State, usize), PayoffPoint>,
    ) -> PayoffPoint {
        if aut.is_terminal(q) {
            return PayoffPoint::new(Rat::zero(), Rat::zero());
        }
        if let Some(v) = memo.get(&(q.clone(), s)) {
            return v.clone();
        }
        let a = rule(q, s);
        let mix = aut.action_mix(q, a);
        let mut out = PayoffPoint::new(Rat::zero(), Rat::zero());
        for (b, pb) in support(&mix) {
            let next = aut.next(q, a, b);
            let mut c1 = Rat::zero();
            let mut c2 = Rat::zero();
            for (s2, p) in support(&game.chain.rows()[s]) {
                let v = go(game, aut, rule, delta, &next, s2, memo);
                c1 += p * v.v1;
                c2 += p * v.v2;
            }
            out.v1 += pb * (&game.u1[s][b] + delta * c1);
            out.v2 += pb * (&game.u2[s][b] + delta * c2);
        }
        memo.insert((q.clone(), s), out.clone());
        out
    }
    let mut memo = HashMap::new();
    let q0 = aut.initial();
    (0..game.n_states())
        .map(|s| go(game, aut, rule, delta, &q0, s, &mut memo))
        .collect()
}

/// Normalized discounted payoff of the block-periodic profile with the
/// first state drawn from `m`: `(1−δ) B / (1−δ^N)`.
pub fn discounted_payoff<A, F>(game: &GameSpec, aut: &A, rule: &F, delta: &Rat) -> Result<PayoffPoint>
where
    A: ReceiverAutomaton,
    F: Fn(&A::State, usize) -> usize,
{
    check_delta(delta)?;
    let per_state = evaluate_rule(game, aut, rule, delta);
    let scale = (Rat::one() - delta) / (Rat::one() - pow(delta, aut.horizon()));
    let mut out = PayoffPoint::new(Rat::zero(), Rat::zero());
    for (ms, v) in game.m.iter().zip(&per_state) {
        out.v1 += ms * &v.v1;
        out.v2 += ms * &v.v2;
    }
    out.v1 *= &scale;
    out.v2 *= &scale;
    Ok(out)
}

/// True iff some pure sender deviation beats the rule against the
/// automaton from some initial state, with the best reply's gain.
pub fn profitable_deviation<A, F>(game: &GameSpec, aut: &A, rule: &F, delta: &Rat) -> Result<(bool, Rat)>
where
    A: ReceiverAutomaton,
    F: Fn(&A::State, usize) -> usize,
{
    let best = best_reply_sender(game, aut, delta, DEFAULT_BUDGET)?;
    let prescribed = evaluate_rule(game, aut, rule, delta);
    let gain = (0..game.n_states())
        .map(|s| best.value(s) - &prescribed[s].v1)
        .max()
        .unwrap_or_else(Rat::zero);
    Ok((gain.is_positive(), gain))
}

/// Expected frequencies of (state, acted-on report) over one block.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub mu_hat: Matrix,
    /// Expected share of stages at which the message was acted on as sent.
    pub listening_share: Rat,
}

/// Forward recursion over the reachable `(automaton state, chain state)`
/// distribution, exact.
pub fn exact_joint_distribution<A, F>(game: &GameSpec, aut: &A, rule: &F) -> JointDistribution
where
    A: ReceiverAutomaton,
    F: Fn(&A::State, usize) -> usize,
{
    let n = game.n_states();
    let big_n = Rat::from_integer(aut.horizon().into());
    let mut mu_hat = zero_matrix(n, n);
    let mut listening = Rat::zero();
    let mut layer: HashMap<A::State, Vec<Rat>> = HashMap::new();
    layer.insert(aut.initial(), game.m.clone());
    for _ in 0..aut.horizon() {
        let mut next_layer: HashMap<A::State, Vec<Rat>> = HashMap::new();
        for (q, dist) in &layer {
            if aut.is_terminal(q) {
                continue;
            }
            for (s, ps) in support(dist) {
                let a = rule(q, s);
                let theta = aut.announcement(q, a).unwrap_or(a);
                let w = ps / &big_n;
                mu_hat[s][theta] += &w;
                if aut.listens(q, a) {
                    listening += &w;
                }
                let mix = aut.action_mix(q, a);
                for (b, pb) in support(&mix) {
                    let target = next_layer.entry(aut.next(q, a, b)).or_insert_with(|| zeros(n));
                    for (s2, p) in support(&game.chain.rows()[s]) {
                        target[s2] += ps * pb * p;
                    }
                }
            }
        }
        layer = next_layer;
    }
    JointDistribution {
        mu_hat,
        listening_share: listening,
    }
}

/// Everything about one block profile built from `y`.
#[derive(Debug, Clone)]
pub struct BlockAnalysis {
    pub automaton: QuotaAutomaton,
    pub policy: BestReply<QuotaState>,
    pub joint: JointDistribution,
    /// `‖μ̂ − μ₀‖₁`.
    pub distance: Rat,
    pub discounted: PayoffPoint,
    /// `U(μ̂, y)`: the undiscounted block average.
    pub average: PayoffPoint,
}

pub fn analyze_block(
    game: &GameSpec,
    y: &StationaryStrategy,
    block_length: usize,
    delta: &Rat,
) -> Result<BlockAnalysis> {
    let automaton = QuotaAutomaton::new(game, y.clone(), block_length)?;
    let policy = best_reply_sender(game, &automaton, delta, DEFAULT_BUDGET)?;
    let rule = |q: &QuotaState, s: usize| policy.message(q, s);
    let joint = exact_joint_distribution(game, &automaton, &rule);
    let distance = l1_distance(&joint.mu_hat, mu_zero(&game.m).matrix());
    let discounted = discounted_payoff(game, &automaton, &rule, delta)?;
    let average = payoff_u(&joint.mu_hat, y, game)?;
    Ok(BlockAnalysis {
        automaton,
        policy,
        joint,
        distance,
        discounted,
        average,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub block_length: usize,
    pub delta: Rat,
    pub distance: Rat,
}

/// `‖μ_{σ₀,τ₀} − μ₀‖₁` over a grid of block lengths and discount factors.
pub fn block_distance_sweep(
    game: &GameSpec,
    y: &StationaryStrategy,
    block_lengths: &[usize],
    deltas: &[Rat],
) -> Result<Vec<SweepRow>> {
    let mut out = Vec::new();
    for &n in block_lengths {
        for d in deltas {
            out.push(SweepRow {
                block_length: n,
                delta: d.clone(),
                distance: analyze_block(game, y, n, d)?.distance,
            });
        }
    }
    Ok(out)
}

/// Receiver's best payoff after abandoning the profile with belief `p` on
/// the current state: `(1−δ) Σ_k δ^k max_b u²(p_k, b)`, with `p_k` pushed
/// through the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationBound {
    pub value: Rat,
    /// Upper bound on `|value − exact series|`.
    pub error: Rat,
}

pub fn receiver_deviation_bound(game: &GameSpec, belief: &[Rat], delta: &Rat) -> Result<DeviationBound> {
    check_delta(delta)?;
    let tolerance = Rat::new(1.into(), 10_000_000_000_000i64.into());
    let max_u = crate::rational::max_abs(game.u2.iter().flatten());
    let v2 = babbling_value(game);
    let one_minus = Rat::one() - delta;
    let mut p = belief.to_vec();
    let mut weight = Rat::one();
    let mut value = Rat::zero();
    for _ in 0..10_000 {
        let gap = l1_distance(&[p.clone()], std::slice::from_ref(&game.m));
        if gap.is_zero() {
            return Ok(DeviationBound {
                value: value + &weight * v2,
                error: Rat::zero(),
            });
        }
        let err = &weight * &max_u * &gap;
        if err <= tolerance {
            return Ok(DeviationBound {
                value: value + &weight * v2,
                error: err,
            });
        }
        let best = (0..game.n_actions())
            .map(|b| (0..game.n_states()).fold(Rat::zero(), |acc, s| acc + &p[s] * &game.u2[s][b]))
            .max()
            .unwrap();
        value += &one_minus * &weight * best;
        weight *= delta;
        p = game.chain.step(&p);
    }
    Err(Error::Internal("belief did not approach the invariant measure".into()))
}

#[derive(Debug, Clone)]
pub struct GapReport {
    /// Always zero: the sender plays an exact best reply.
    pub sender_gap: Rat,
    /// Largest (deviation bound − continuation) over the receiver's on-path
    /// information sets; `None` when enumeration exceeded its cap.
    pub receiver_gap: Option<Rat>,
    /// Same quantity maximized over point-mass beliefs at every reachable
    /// automaton state: an upper bound valid for all beliefs.
    pub receiver_gap_worst_case: Rat,
    pub information_sets: usize,
    pub certified: bool,
    pub sender_value: Rat,
    pub receiver_value: Rat,
    pub distance: Rat,
}

/// Cap on enumerated receiver information sets.
pub const INFO_SET_CAP: usize = 200_000;

/// Receiver continuation values `g(q, s)` including all later blocks.
fn receiver_continuations(
    game: &GameSpec,
    aut: &QuotaAutomaton,
    policy: &BestReply<QuotaState>,
    delta: &Rat,
) -> Result<HashMap<(QuotaState, usize), Rat>> {
    let n = game.n_states();
    let rule = |q: &QuotaState, s: usize| policy.message(q, s);
    let block = evaluate_rule(game, aut, &rule, delta);
    // F = (I − δ^N P^N)^{-1} (1−δ) B
    let mut pn = crate::rational::identity(n);
    for _ in 0..aut.horizon() {
        pn = pn.iter().map(|row| game.chain.step(row)).collect();
    }
    let dn = pow(delta, aut.horizon());
    let a: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { Rat::one() } else { Rat::zero() };
                    id - &dn * &pn[i][j]
                })
                .collect()
        })
        .collect();
    let rhs: Vec<Rat> = block.iter().map(|v| (Rat::one() - delta) * &v.v2).collect();
    let fresh = solve_linear(&a, &rhs).ok_or_else(|| Error::Internal("block renewal system singular".into()))?;

    #[allow(clippy::too_many_arguments)]
    fn go(
        game: &GameSpec,
        aut: &QuotaAutomaton,
        policy: &BestReply<QuotaState>,
        delta: &Rat,
        fresh: &[Rat],
        q: &QuotaState,
        s: usize,
        memo: &mut HashMap<(QuotaState, usize), Rat>,
    ) -> Rat {
        if aut.is_terminal(q) {
            return fresh[s].clone();
        }
        if let Some(v) = memo.get(&(q.clone(), s)) {
            return v.clone();
        }
        let a = policy.message(q, s);
        let mix = aut.action_mix(q, a);
        let mut v = Rat::zero();
        for (b, pb) in support(&mix) {
            let next = aut.next(q, a, b);
            let mut cont = Rat::zero();
            for (s2, p) in support(&game.chain.rows()[s]) {
                cont += p * go(game, aut, policy, delta, fresh, &next, s2, memo);
            }
            v += pb * ((Rat::one() - delta) * &game.u2[s][b] + delta * cont);
        }
        memo.insert((q.clone(), s), v.clone());
        v
    }
    let mut memo = HashMap::new();
    let mut stack = vec![aut.initial()];
    let mut seen = HashSet::new();
    // evaluate every automaton state reachable under any message
    while let Some(q) = stack.pop() {
        if aut.is_terminal(&q) || !seen.insert(q.clone()) {
            continue;
        }
        for s in 0..n {
            go(game, aut, policy, delta, &fresh, &q, s, &mut memo);
        }
        for a in 0..n {
            stack.push(aut.next(&q, a, 0));
        }
    }
    Ok(memo)
}

/// Receiver incentive check for the quota profile built from `y`.
pub fn equilibrium_gap_report(
    game: &GameSpec,
    y: &StationaryStrategy,
    block_length: usize,
    delta: &Rat,
) -> Result<GapReport> {
    let analysis = analyze_block(game, y, block_length, delta)?;
    let aut = &analysis.automaton;
    let policy = &analysis.policy;
    let n = game.n_states();
    let g = receiver_continuations(game, aut, policy, delta)?;

    let mut bounds: HashMap<Vec<Rat>, Rat> = HashMap::new();
    let mut bound_of = |p: &[Rat]| -> Result<Rat> {
        if let Some(v) = bounds.get(p) {
            return Ok(v.clone());
        }
        let d = receiver_deviation_bound(game, p, delta)?;
        let v = d.value + d.error;
        bounds.insert(p.to_vec(), v.clone());
        Ok(v)
    };

    let mut worst: Option<Rat> = None;
    for ((_, s), value) in &g {
        let mut e = zeros(n);
        e[*s] = Rat::one();
        let gap = bound_of(&e)? - value;
        worst = Some(worst.map_or(gap.clone(), |w| w.max(gap)));
    }
    let worst = worst.unwrap_or_else(Rat::zero);

    // on-path information sets: (automaton state, belief before the message)
    let mut receiver_gap: Option<Rat> = None;
    let mut seen: HashSet<(QuotaState, Vec<Rat>)> = HashSet::new();
    let mut queue = VecDeque::from([(aut.initial(), game.m.clone())]);
    let mut exhausted = false;
    while let Some((q, prior)) = queue.pop_front() {
        if aut.is_terminal(&q) || !seen.insert((q.clone(), prior.clone())) {
            continue;
        }
        if seen.len() > INFO_SET_CAP {
            exhausted = true;
            break;
        }
        let mut by_message: Vec<Vec<Rat>> = vec![zeros(n); n];
        for (s, ps) in support(&prior) {
            by_message[policy.message(&q, s)][s] = ps.clone();
        }
        for (a, mass) in by_message.into_iter().enumerate() {
            let total: Rat = mass.iter().sum();
            if total.is_zero() {
                continue;
            }
            let posterior: Vec<Rat> = mass.iter().map(|x| x / &total).collect();
            let cont = posterior
                .iter()
                .enumerate()
                .fold(Rat::zero(), |acc, (s, p)| acc + p * &g[&(q.clone(), s)]);
            let gap = bound_of(&posterior)? - &cont;
            receiver_gap = Some(receiver_gap.map_or(gap.clone(), |r| r.max(gap)));
            let next_prior = game.chain.step(&posterior);
            let mix = aut.action_mix(&q, a);
            for (b, _) in support(&mix) {
                queue.push_back((aut.next(&q, a, b), next_prior.clone()));
            }
        }
    }
    let receiver_gap = if exhausted { None } else { receiver_gap };
    let certified = match &receiver_gap {
        Some(gap) => gap.is_negative(),
        None => worst.is_negative(),
    };
    Ok(GapReport {
        sender_gap: Rat::zero(),
        receiver_gap,
        receiver_gap_worst_case: worst,
        information_sets: seen.len(),
        certified,
        sender_value: analysis.discounted.v1,
        receiver_value: analysis.discounted.v2,
        distance: analysis.distance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: (f64, f64),
    pub std_error: (f64, f64),
    /// Bound on the discounted weight beyond the simulated horizon.
    pub truncation: f64,
    pub replications: usize,
}

fn rng_for(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Action drawn by the public device: the first `b` whose cumulative
/// probability exceeds a uniform draw.
fn device_action(mix: &[f64], x: f64) -> usize {
    let mut acc = 0.0;
    for (b, p) in mix.iter().enumerate() {
        acc += p;
        if x < acc {
            return b;
        }
    }
    mix.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

pub(crate) struct ChainSampler {
    rows: Vec<WeightedIndex<f64>>,
    initial: WeightedIndex<f64>,
}

impl ChainSampler {
    pub(crate) fn new(game: &GameSpec) -> Self {
        ChainSampler {
            rows: game
                .chain
                .rows()
                .iter()
                .map(|r| WeightedIndex::new(r.iter().map(to_f64)).expect("stochastic row"))
                .collect(),
            initial: WeightedIndex::new(game.m.iter().map(to_f64)).expect("invariant measure"),
        }
    }

    pub(crate) fn first(&self, rng: &mut ChaCha8Rng) -> usize {
        self.initial.sample(rng)
    }

    pub(crate) fn step(&self, s: usize, rng: &mut ChaCha8Rng) -> usize {
        self.rows[s].sample(rng)
    }
}

pub(crate) fn summarize(samples: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
    let k = samples.len() as f64;
    let mean = samples.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let mean = (mean.0 / k, mean.1 / k);
    if samples.len() < 2 {
        return (mean, (0.0, 0.0));
    }
    let var = samples.iter().fold((0.0, 0.0), |acc, x| {
        (acc.0 + (x.0 - mean.0).powi(2), acc.1 + (x.1 - mean.1).powi(2))
    });
    let se = ((var.0 / (k - 1.0) / k).sqrt(), (var.1 / (k - 1.0) / k).sqrt());
    (mean, se)
}

/// Simulated normalized discounted payoff of the block-periodic profile
/// over `horizon` stages. Replication `r` uses stream `r` of `seed`.
pub fn monte_carlo_payoff<A, F>(
    game: &GameSpec,
    aut: &A,
    rule: &F,
    delta: f64,
    horizon: usize,
    replications: usize,
    seed: u64,
) -> MonteCarloEstimate
where
    A: ReceiverAutomaton,
    F: Fn(&A::State, usize) -> usize + Sync,
{
    let sampler = ChainSampler::new(game);
    let u1: Vec<Vec<f64>> = game.u1.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let u2: Vec<Vec<f64>> = game.u2.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let samples: Vec<(f64, f64)> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(seed, rep);
            let mut s = sampler.first(&mut rng);
            let mut q = aut.initial();
            let mut weight = 1.0 - delta;
            let mut total = (0.0, 0.0);
            for t in 0..horizon {
                if t > 0 {
                    s = sampler.step(s, &mut rng);
                }
                if aut.is_terminal(&q) {
                    q = aut.initial();
                }
                let a = rule(&q, s);
                let mix: Vec<f64> = aut.action_mix(&q, a).iter().map(to_f64).collect();
                let b = device_action(&mix, rng.gen::<f64>());
                total.0 += weight * u1[s][b];
                total.1 += weight * u2[s][b];
                weight *= delta;
                q = aut.next(&q, a, b);
            }
            total
        })
        .collect();
    let (mean, std_error) = summarize(&samples);
    let max_u = to_f64(&game.max_abs_payoff());
    MonteCarloEstimate {
        mean,
        std_error,
        truncation: max_u * delta.powi(horizon as i32),
        replications,
    }
}

/// Simulated share of listening stages over independent blocks.
pub fn monte_carlo_listening_share<A, F>(game: &GameSpec, aut: &A, rule: &F, blocks: usize, seed: u64) -> (f64, f64)
where
    A: ReceiverAutomaton,
    F: Fn(&A::State, usize) -> usize + Sync,
{
    let sampler = ChainSampler::new(game);
    let samples: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(seed, rep);
            let mut s = sampler.first(&mut rng);
            let mut q = aut.initial();
            let mut listened = 0usize;
            for t in 0..aut.horizon() {
                if t > 0 {
                    s = sampler.step(s, &mut rng);
                }
                let a = rule(&q, s);
                if aut.listens(&q, a) {
                    listened += 1;
                }
                let mix: Vec<f64> = aut.action_mix(&q, a).iter().map(to_f64).collect();
                let b = device_action(&mix, rng.gen::<f64>());
                q = aut.next(&q, a, b);
            }
            (listened as f64 / aut.horizon() as f64, 0.0)
        })
        .collect();
    let (mean, se) = summarize(&samples);
    (mean.0, se.0)
}

/// Stage payoff helper used by reports: `u(s, y(·|a))` for one player.
pub fn stage_payoff(game: &GameSpec, player: Player, s: usize, mix: &[Rat]) -> Rat {
    dot(&game.payoff(player)[s], mix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{int, rat};

    fn alternation_profile() -> TwoStageAlternation {
        TwoStageAlternation { first: vec![0, 1] }
    }

    fn truthful<Q>(_: &Q, s: usize) -> usize {
        s
    }

    #[test]
    fn schedule_completes_quotas() {
        assert_eq!(fictitious_schedule(&[1, 0], &[2, 2], 3).unwrap(), vec![0, 1, 1]);
        assert_eq!(fictitious_schedule(&[2, 0], &[2, 2], 2).unwrap(), vec![1, 1]);
        assert!(fictitious_schedule(&[2, 0], &[2, 2], 3).is_err());
    }

    #[test]
    fn alternation_matches_closed_form() {
        let c = rat(3, 2);
        let g = catalog::alternation_game(c.clone());
        for d in [rat(3, 5), rat(7, 10), rat(9, 10)] {
            let v = discounted_payoff(&g, &alternation_profile(), &truthful, &d).unwrap();
            let k = Rat::one() / (Rat::one() + &d);
            let v1 = &k * ((int(2) + &c) / int(2) + &d * (int(5) + &c) / int(4));
            let v2 = &k * (rat(3, 2) + &d * rat(3, 4));
            assert_eq!(v, PayoffPoint::new(v1, v2));
        }
        let (dev, _) = profitable_deviation(&g, &alternation_profile(), &truthful, &rat(7, 10)).unwrap();
        assert!(!dev);
        let (dev, gain) = profitable_deviation(&g, &alternation_profile(), &truthful, &rat(3, 5)).unwrap();
        assert!(dev && gain.is_positive());
        let best = best_reply_sender(&g, &alternation_profile(), &rat(3, 5), DEFAULT_BUDGET).unwrap();
        assert_eq!(best.message(&AlternationState::First, 0), 1);
    }

    #[test]
    fn single_stage_quota_forces_the_message() {
        let g = catalog::two_state();
        let y = StationaryStrategy::pure(&[0, 1], 2);
        let aut = QuotaAutomaton {
            quotas: QuotaDistribution {
                block_length: 1,
                quotas: vec![1, 0],
            },
            y: y.clone(),
        };
        let best = best_reply_sender(&g, &aut, &rat(1, 2), DEFAULT_BUDGET).unwrap();
        for s in 0..2 {
            assert_eq!(best.message(&aut.initial(), s), 0);
            assert_eq!(best.value(s), stage_payoff(&g, Player::Sender, s, y.row(0)));
        }
    }

    #[test]
    fn truthful_joint_distribution_for_two_stage_block() {
        let g = catalog::two_state();
        let aut = QuotaAutomaton::new(&g, StationaryStrategy::pure(&[0, 1], 2), 2).unwrap();
        let j = exact_joint_distribution(&g, &aut, &truthful);
        // paths LL, LR, RL, RR each 1/4; LL and RR bust at stage 2
        let expect = vec![vec![rat(3, 8), rat(1, 8)], vec![rat(1, 8), rat(3, 8)]];
        assert_eq!(j.mu_hat, expect);
        assert_eq!(j.listening_share, rat(3, 4));
    }

    #[test]
    fn iid_deviation_bound_closed_form() {
        let g = catalog::device();
        let d = rat(9, 10);
        let p = vec![int(1), int(0)];
        let b = receiver_deviation_bound(&g, &p, &d).unwrap();
        // in state L the best action is m (4); then beliefs return to m
        assert_eq!(b.value, (Rat::one() - &d) * int(4) + &d * babbling_value(&g));
        assert!(b.error.is_zero());
        let at_m = receiver_deviation_bound(&g, &g.m, &d).unwrap();
        assert_eq!(at_m.value, babbling_value(&g));
    }

    #[test]
    fn babbling_profile_has_zero_gap() {
        let g = catalog::two_state();
        let y = crate::game::babbling_strategy(&g);
        let r = equilibrium_gap_report(&g, &y, 4, &rat(9, 10)).unwrap();
        assert_eq!(r.receiver_gap, Some(Rat::zero()));
        assert!(!r.certified);
    }
}
