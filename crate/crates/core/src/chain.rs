//! Finite Markov chains with exact rational transitions.

use std::collections::VecDeque;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, sum, to_f64, zeros, Matrix, Rat};

/// Row-stochastic matrix: `p[s][t]` is the probability of moving from `s` to `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: Matrix,
}

impl TransitionMatrix {
    pub fn new(p: Matrix) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::InvalidTransition("no states".into()));
        }
        for (s, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTransition(format!(
                    "row {s} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| x.is_negative() || **x > Rat::one()) {
                return Err(Error::InvalidTransition(format!(
                    "row {s} has entry {} outside [0,1]",
                    fmt_rat(x)
                )));
            }
            let total = sum(row);
            if !total.is_one() {
                return Err(Error::InvalidTransition(format!("row {s} sums to {}", fmt_rat(&total))));
            }
        }
        Ok(TransitionMatrix { p })
    }

    /// i.i.d. chain: every row equals `dist`.
    pub fn iid(dist: &[Rat]) -> Result<Self> {
        TransitionMatrix::new(vec![dist.to_vec(); dist.len()])
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn get(&self, from: usize, to: usize) -> &Rat {
        &self.p[from][to]
    }

    pub fn rows(&self) -> &Matrix {
        &self.p
    }

    /// One step of the chain applied to a distribution.
    pub fn step(&self, dist: &[Rat]) -> Vec<Rat> {
        let n = self.n();
        let mut out = zeros(n);
        for (s, ps) in dist.iter().enumerate() {
            if ps.is_zero() {
                continue;
            }
            for (t, o) in out.iter_mut().enumerate() {
                if !self.p[s][t].is_zero() {
                    *o += ps * &self.p[s][t];
                }
            }
        }
        out
    }

    fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.p[s]
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_positive())
            .map(|(t, _)| t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ergodicity {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub period: usize,
}

fn reach(n: usize, start: usize, edges: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in edges(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Strong connectivity of the positive-entry digraph, and the period of
/// the class containing state 0.
pub fn check_ergodic(p: &TransitionMatrix) -> Ergodicity {
    let n = p.n();
    let fwd = reach(n, 0, |u| p.successors(u).collect());
    let bwd = reach(n, 0, |u| (0..n).filter(|&v| p.get(v, u).is_positive()).collect());
    let class: Vec<bool> = fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect();
    let irreducible = class.iter().all(|&x| x);

    let mut level: Vec<Option<i64>> = vec![None; n];
    level[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in p.successors(u).filter(|&v| class[v]) {
            if level[v].is_none() {
                level[v] = Some(level[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    let mut g: i64 = 0;
    for u in (0..n).filter(|&u| class[u]) {
        for v in p.successors(u).filter(|&v| class[v]) {
            let diff = level[u].unwrap() + 1 - level[v].unwrap();
            g = g.gcd(&diff);
        }
    }
    let period = g.max(1) as usize;
    Ergodicity {
        irreducible,
        aperiodic: period == 1,
        period,
    }
}

/// Exact stationary distribution of an irreducible chain.
pub fn invariant_measure(p: &TransitionMatrix) -> Result<Vec<Rat>> {
    if !check_ergodic(p).irreducible {
        return Err(Error::NotIrreducible);
    }
    let n = p.n();
    // (P^T - I) m = 0 with the last equation replaced by Σ m = 1
    let mut a = vec![zeros(n); n];
    for (t, row) in a.iter_mut().enumerate().take(n - 1) {
        for (s, x) in row.iter_mut().enumerate() {
            *x = p.get(s, t).clone();
        }
        row[t] -= Rat::one();
    }
    a[n - 1] = vec![Rat::one(); n];
    let mut b = zeros(n);
    b[n - 1] = Rat::one();
    crate::rational::solve_linear(&a, &b)
        .ok_or_else(|| Error::Internal("stationary system singular for an irreducible chain".into()))
}

/// Outcome of the constant-off-diagonal-columns test.
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionA {
    /// `p(t|s) = alpha[t]` whenever `t != s`.
    Holds { alpha: Vec<Rat> },
    /// Column `destination` has different off-diagonal entries in rows
    /// `from_a` and `from_b`; or, when `from_a == from_b`, the row sum
    /// condition fails at that row.
    Fails {
        destination: usize,
        from_a: usize,
        from_b: usize,
        p_a: Rat,
        p_b: Rat,
    },
}

impl AssumptionA {
    pub fn holds(&self) -> bool {
        matches!(self, AssumptionA::Holds { .. })
    }
}

pub fn check_assumption_a(p: &TransitionMatrix) -> AssumptionA {
    let n = p.n();
    let mut alpha = zeros(n);
    for t in 0..n {
        let mut rows = (0..n).filter(|&s| s != t);
        let Some(first) = rows.next() else {
            continue;
        };
        if let Some(other) = rows.find(|&s| p.get(s, t) != p.get(first, t)) {
            return AssumptionA::Fails {
                destination: t,
                from_a: first,
                from_b: other,
                p_a: p.get(first, t).clone(),
                p_b: p.get(other, t).clone(),
            };
        }
        alpha[t] = p.get(first, t).clone();
    }
    let total = sum(&alpha);
    for s in 0..n {
        let off = &total - &alpha[s];
        if off > Rat::one() {
            return AssumptionA::Fails {
                destination: s,
                from_a: s,
                from_b: s,
                p_a: off,
                p_b: Rat::one(),
            };
        }
    }
    AssumptionA::Holds { alpha }
}

/// Integer quotas `N·m_N(s)` summing to `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotaDistribution {
    pub block_length: usize,
    pub quotas: Vec<usize>,
}

impl QuotaDistribution {
    pub fn m_n(&self) -> Vec<Rat> {
        let n = Rat::from_integer(self.block_length.into());
        self.quotas.iter().map(|&q| Rat::from_integer(q.into()) / &n).collect()
    }
}

/// Largest-remainder rounding of `N·m`; ties go to the lower state index.
pub fn quota_distribution(m: &[Rat], block_length: usize) -> Result<QuotaDistribution> {
    if block_length == 0 {
        return Err(Error::Precondition("block length must be at least 1".into()));
    }
    let big_n = Rat::from_integer(block_length.into());
    let scaled: Vec<Rat> = m.iter().map(|x| x * &big_n).collect();
    let mut quotas: Vec<usize> = scaled
        .iter()
        .map(|x| x.floor().to_integer().try_into().unwrap_or(0))
        .collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..m.len()).collect();
    // stable sort keeps ascending index among equal remainders
    order.sort_by(|&a, &b| scaled[b].fract().cmp(&scaled[a].fract()));
    for &s in order.iter().take(block_length.saturating_sub(assigned)) {
        quotas[s] += 1;
    }
    Ok(QuotaDistribution { block_length, quotas })
}

/// Draws `s_1..s_n`; `initial = None` starts from the invariant measure.
pub fn sample_path(p: &TransitionMatrix, horizon: usize, seed: u64, initial: Option<&[Rat]>) -> Result<Vec<usize>> {
    let start = match initial {
        Some(d) => d.to_vec(),
        None => invariant_measure(p)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<WeightedIndex<f64>> = p
        .rows()
        .iter()
        .map(|r| WeightedIndex::new(r.iter().map(to_f64)).expect("stochastic row"))
        .collect();
    let first = WeightedIndex::new(start.iter().map(to_f64)).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut path = Vec::with_capacity(horizon);
    let mut s = first.sample(&mut rng);
    for k in 0..horizon {
        if k > 0 {
            s = rows[s].sample(&mut rng);
        }
        path.push(s);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn cycle5() -> TransitionMatrix {
        let mut p = vec![zeros(5); 5];
        for s in 0..5 {
            p[s][(s + 1) % 5] = rat(1, 2);
            p[s][(s + 4) % 5] = rat(1, 2);
        }
        TransitionMatrix::new(p).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(TransitionMatrix::new(vec![vec![rat(1, 2), rat(1, 3)], vec![int(0), int(1)]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![int(2), int(-1)], vec![int(0), int(1)]]).is_err());
    }

    #[test]
    fn uniform_off_diagonal_chain() {
        let h = rat(1, 2);
        let p = TransitionMatrix::new(vec![
            vec![int(0), h.clone(), h.clone()],
            vec![h.clone(), int(0), h.clone()],
            vec![h.clone(), h.clone(), int(0)],
        ])
        .unwrap();
        assert_eq!(invariant_measure(&p).unwrap(), vec![rat(1, 3); 3]);
        assert_eq!(
            check_assumption_a(&p),
            AssumptionA::Holds {
                alpha: vec![h.clone(), h.clone(), h]
            }
        );
    }

    #[test]
    fn periods() {
        let e = check_ergodic(&cycle5());
        assert!(e.irreducible && e.aperiodic);
        let id = TransitionMatrix::new(vec![vec![int(1), int(0)], vec![int(0), int(1)]]).unwrap();
        assert!(!check_ergodic(&id).irreducible);
        assert_eq!(invariant_measure(&id), Err(Error::NotIrreducible));
        let flip = TransitionMatrix::new(vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(check_ergodic(&flip).period, 2);
    }

    #[test]
    fn cycle_walk_fails_assumption_a() {
        match check_assumption_a(&cycle5()) {
            AssumptionA::Fails {
                destination,
                from_a,
                from_b,
                p_a,
                p_b,
            } => {
                assert_eq!(cycle5().get(from_a, destination), &p_a);
                assert_eq!(cycle5().get(from_b, destination), &p_b);
                assert_ne!(p_a, p_b);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn quotas() {
        let half = vec![rat(1, 2); 2];
        assert_eq!(quota_distribution(&half, 4).unwrap().quotas, vec![2, 2]);
        assert_eq!(quota_distribution(&half, 5).unwrap().m_n(), vec![rat(3, 5), rat(2, 5)]);
        assert_eq!(
            quota_distribution(&vec![rat(1, 3); 3], 10).unwrap().quotas,
            vec![4, 3, 3]
        );
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = cycle5();
        let a = sample_path(&p, 50, 9, None).unwrap();
        assert_eq!(a, sample_path(&p, 50, 9, None).unwrap());
        assert!(a.windows(2).all(|w| w[0] != w[1]));
        let point = [int(0), int(0), int(1), int(0), int(0)];
        assert_eq!(sample_path(&p, 1, 3, Some(&point)).unwrap(), vec![2]);
    }
}
