//! Joint distributions on states × messages with both margins equal to `m`.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assignment::Permutation;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::rational::{fmt_rat, null_space, sum, zero_matrix, zeros, Matrix, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Copula {
    mu: Matrix,
}

impl Copula {
    pub fn new(mu: Matrix, m: &[Rat]) -> Result<Self> {
        check_copula(&mu, m)?;
        Ok(Copula { mu })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mu
    }

    pub fn into_matrix(self) -> Matrix {
        self.mu
    }

    pub fn get(&self, s: usize, a: usize) -> &Rat {
        &self.mu[s][a]
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }
}

fn check_copula(mu: &[Vec<Rat>], m: &[Rat]) -> Result<()> {
    let n = m.len();
    if mu.len() != n || mu.iter().any(|r| r.len() != n) {
        return Err(Error::NotCopula(format!("expected a {n}x{n} matrix")));
    }
    if let Some((s, a)) = (0..n)
        .flat_map(|s| (0..n).map(move |a| (s, a)))
        .find(|&(s, a)| mu[s][a].is_negative())
    {
        return Err(Error::NotCopula(format!("negative entry at ({s},{a})")));
    }
    for s in 0..n {
        let row = sum(&mu[s]);
        if row != m[s] {
            return Err(Error::NotCopula(format!(
                "row {s} sums to {}, margin is {}",
                fmt_rat(&row),
                fmt_rat(&m[s])
            )));
        }
        let col = mu.iter().fold(Rat::zero(), |acc, r| acc + &r[s]);
        if col != m[s] {
            return Err(Error::NotCopula(format!(
                "column {s} sums to {}, margin is {}",
                fmt_rat(&col),
                fmt_rat(&m[s])
            )));
        }
    }
    Ok(())
}

pub fn is_copula(mu: &[Vec<Rat>], m: &[Rat]) -> bool {
    check_copula(mu, m).is_ok()
}

/// The truthful copula `μ₀ = diag(m)`.
pub fn mu_zero(m: &[Rat]) -> Copula {
    let mut mu = zero_matrix(m.len(), m.len());
    for (s, ms) in m.iter().enumerate() {
        mu[s][s] = ms.clone();
    }
    Copula { mu }
}

/// Moves mass `min(m_i, m_j)` from the diagonal cells `i, j` to the
/// crossed cells `(i, j)` and `(j, i)`.
pub fn swap_copula(m: &[Rat], i: usize, j: usize) -> Copula {
    let mut c = mu_zero(m);
    if i != j {
        let w = m[i].clone().min(m[j].clone());
        c.mu[i][i] -= &w;
        c.mu[j][j] -= &w;
        c.mu[i][j] += &w;
        c.mu[j][i] += &w;
    }
    c
}

pub fn l1_distance(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Rat {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(Rat::zero(), |acc, (x, y)| acc + (x - y).abs())
}

pub fn is_doubly_stochastic(j: &[Vec<Rat>]) -> bool {
    let n = j.len();
    j.iter()
        .all(|r| r.len() == n && r.iter().all(|x| !x.is_negative()) && sum(r).is_one())
        && (0..n).all(|c| j.iter().fold(Rat::zero(), |acc, r| acc + &r[c]).is_one())
}

/// `J = μ + I − μ₀`; doubly stochastic for every copula.
pub fn lift_to_doubly_stochastic(mu: &Copula, m: &[Rat]) -> Matrix {
    let mut j = mu.mu.clone();
    for (s, row) in j.iter_mut().enumerate() {
        row[s] += Rat::one() - &m[s];
    }
    j
}

pub fn permutation_matrix(perm: &[usize]) -> Matrix {
    let mut p = zero_matrix(perm.len(), perm.len());
    for (i, &j) in perm.iter().enumerate() {
        p[i][j] = Rat::one();
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffDecomposition {
    pub terms: Vec<(Rat, Permutation)>,
}

impl BirkhoffDecomposition {
    pub fn reconstruct(&self, n: usize) -> Matrix {
        let mut out = zero_matrix(n, n);
        for (w, perm) in &self.terms {
            for (i, &j) in perm.iter().enumerate() {
                out[i][j] += w;
            }
        }
        out
    }
}

/// Perfect matching using only cells `>= threshold`.
fn matching_above(j: &[Vec<Rat>], threshold: &Rat) -> Option<Permutation> {
    let n = j.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];
    fn augment(r: usize, j: &[Vec<Rat>], t: &Rat, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for c in 0..j.len() {
            if seen[c] || j[r][c] < *t || j[r][c].is_zero() {
                continue;
            }
            seen[c] = true;
            if owner[c].is_none_or(|o| augment(o, j, t, seen, owner)) {
                owner[c] = Some(r);
                return true;
            }
        }
        false
    }
    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(r, j, threshold, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (c, o) in col_owner.iter().enumerate() {
        perm[o.unwrap()] = c;
    }
    Some(perm)
}

/// Greedy max-min extraction followed by a Carathéodory pass that brings
/// the number of terms down to at most `(n−1)² + 1`.
pub fn birkhoff_decompose(j: &[Vec<Rat>]) -> Result<BirkhoffDecomposition> {
    if !is_doubly_stochastic(j) {
        return Err(Error::NotDoublyStochastic(
            "rows and columns must be nonnegative and sum to 1".into(),
        ));
    }
    let n = j.len();
    let mut residual = j.to_vec();
    let mut terms: Vec<(Rat, Permutation)> = Vec::new();
    while residual.iter().flatten().any(|x| x.is_positive()) {
        let values: BTreeSet<Rat> = residual.iter().flatten().filter(|x| x.is_positive()).cloned().collect();
        let perm = values
            .iter()
            .rev()
            .find_map(|t| matching_above(&residual, t))
            .ok_or_else(|| Error::Internal("no perfect matching on a positive residual".into()))?;
        let w = perm
            .iter()
            .enumerate()
            .map(|(r, &c)| residual[r][c].clone())
            .min()
            .unwrap();
        for (r, &c) in perm.iter().enumerate() {
            residual[r][c] -= &w;
        }
        terms.push((w, perm));
    }
    reduce_terms(&mut terms, n);
    Ok(BirkhoffDecomposition { terms })
}

fn reduce_terms(terms: &mut Vec<(Rat, Permutation)>, n: usize) {
    let limit = (n.saturating_sub(1)).pow(2) + 1;
    while terms.len() > limit {
        // rows: the n² matrix entries and the weight sum; columns: terms
        let k = terms.len();
        let mut a = vec![zeros(k); n * n + 1];
        for (t, (_, perm)) in terms.iter().enumerate() {
            for (i, &j) in perm.iter().enumerate() {
                a[i * n + j][t] = Rat::one();
            }
            a[n * n][t] = Rat::one();
        }
        let lambda = null_space(&a, k).into_iter().next().expect("affinely dependent terms");
        // shift along lambda until some weight hits zero
        let step = terms
            .iter()
            .zip(&lambda)
            .filter(|(_, l)| l.is_positive())
            .map(|((w, _), l)| w / l)
            .min()
            .expect("lambda sums to zero, so it has a positive entry");
        for ((w, _), l) in terms.iter_mut().zip(&lambda) {
            *w -= &step * l;
        }
        terms.retain(|(w, _)| w.is_positive());
    }
}

/// Vertices of the copula polytope for margin `m`, sorted.
pub fn extreme_points(m: &[Rat], cap: usize) -> Result<Vec<Copula>> {
    let n = m.len();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "states for vertex enumeration",
            value: n,
            cap,
        });
    }
    if m.iter().any(|x| !x.is_positive()) {
        return Err(Error::Precondition("margin must be strictly positive".into()));
    }
    let mut memo = HashMap::new();
    let cells = vertices_of(m.to_vec(), m.to_vec(), &mut memo);
    Ok(cells
        .into_iter()
        .map(|entries| {
            let mut mu = zero_matrix(n, n);
            for (i, j, x) in entries {
                mu[i][j] = x;
            }
            Copula { mu }
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect())
}

type Cells = Vec<(usize, usize, Rat)>;
type Memo = HashMap<(Vec<Rat>, Vec<Rat>), BTreeSet<Cells>>;

// Every vertex has a line carrying a single positive cell; that cell takes
// the whole line margin. Removing the line leaves a vertex of the reduced
// problem, so recursing over all (leaf line, partner) choices finds every
// vertex.
fn vertices_of(rows: Vec<Rat>, cols: Vec<Rat>, memo: &mut Memo) -> BTreeSet<Cells> {
    let key = (rows.clone(), cols.clone());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut out = BTreeSet::new();
    if rows.iter().all(|x| x.is_zero()) {
        out.insert(Vec::new());
        memo.insert(key, out.clone());
        return out;
    }
    for (is_row, lines, others) in [(true, &rows, &cols), (false, &cols, &rows)] {
        for (l, ml) in lines.iter().enumerate().filter(|(_, x)| x.is_positive()) {
            for (k, mk) in others.iter().enumerate().filter(|(_, x)| *x >= ml) {
                let (mut r2, mut c2) = (rows.clone(), cols.clone());
                let (i, j) = if is_row { (l, k) } else { (k, l) };
                r2[i] -= ml;
                c2[j] -= ml;
                debug_assert!(mk >= ml);
                for mut sub in vertices_of(r2, c2, memo) {
                    sub.push((i, j, ml.clone()));
                    sub.sort();
                    out.insert(sub);
                }
            }
        }
    }
    memo.insert(key, out.clone());
    out
}

/// True iff no other copula shares `mu`'s support, checked by maximizing and
/// minimizing every support cell over copulas restricted to that support.
pub fn is_vertex_by_lp(mu: &Copula, m: &[Rat]) -> bool {
    let n = m.len();
    let support: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| mu.mu[i][j].is_positive())
        .collect();
    let k = support.len();
    let base = {
        let mut lp = LinearProgram::new(k);
        for s in 0..n {
            let row: Vec<Rat> = support
                .iter()
                .map(|&(i, _)| if i == s { Rat::one() } else { Rat::zero() })
                .collect();
            lp.add(row, Relation::Eq, m[s].clone());
            let col: Vec<Rat> = support
                .iter()
                .map(|&(_, j)| if j == s { Rat::one() } else { Rat::zero() })
                .collect();
            lp.add(col, Relation::Eq, m[s].clone());
        }
        lp
    };
    (0..k).all(|c| {
        let mut e = zeros(k);
        e[c] = Rat::one();
        let hi = base.clone().maximize(e.clone()).solve().optimal().map(|(v, _)| v);
        let lo = base
            .clone()
            .maximize(e.iter().map(|x| -x).collect())
            .solve()
            .optimal()
            .map(|(v, _)| -v);
        hi.is_some() && hi == lo
    })
}

/// Northwest-corner vertex after permuting rows and columns.
pub fn northwest_corner(m: &[Rat], row_order: &[usize], col_order: &[usize]) -> Copula {
    let n = m.len();
    let mut mu = zero_matrix(n, n);
    let mut r = m.to_vec();
    let mut c = m.to_vec();
    let (mut i, mut j) = (0, 0);
    while i < n && j < n {
        let (ri, cj) = (row_order[i], col_order[j]);
        let x = r[ri].clone().min(c[cj].clone());
        mu[ri][cj] = x.clone();
        r[ri] -= &x;
        c[cj] -= &x;
        if r[ri].is_zero() {
            i += 1;
        } else {
            j += 1;
        }
    }
    Copula { mu }
}

/// Random convex combination of `μ₀` and a few random northwest-corner
/// vertices, with small-denominator rational weights.
pub fn sample_copula(m: &[Rat], seed: u64) -> Copula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.len();
    let mut points = vec![mu_zero(m)];
    for _ in 0..rng.gen_range(1..=3) {
        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        points.push(northwest_corner(m, &rows, &cols));
    }
    let mut weights: Vec<i64> = points.iter().map(|_| rng.gen_range(0..=12)).collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: i64 = weights.iter().sum();
    let mut mu = zero_matrix(n, n);
    for (p, &w) in points.iter().zip(&weights) {
        let w = Rat::new(w.into(), total.into());
        for (row, prow) in mu.iter_mut().zip(&p.mu) {
            for (x, y) in row.iter_mut().zip(prow) {
                *x += &w * y;
            }
        }
    }
    Copula { mu }
}

/// A copula nearest to `target` in L1, by linear programming.
pub fn project_l1(target: &[Vec<Rat>], m: &[Rat]) -> Copula {
    let n = m.len();
    let nn = n * n;
    // variables: x (nn), d (nn); maximize −Σ d
    let mut lp = LinearProgram::new(2 * nn);
    let mut obj = zeros(2 * nn);
    for o in obj[nn..].iter_mut() {
        *o = -Rat::one();
    }
    lp = lp.maximize(obj);
    for s in 0..n {
        let mut row = zeros(2 * nn);
        let mut col = zeros(2 * nn);
        for t in 0..n {
            row[s * n + t] = Rat::one();
            col[t * n + s] = Rat::one();
        }
        lp.add(row, Relation::Eq, m[s].clone());
        lp.add(col, Relation::Eq, m[s].clone());
    }
    for c in 0..nn {
        let v = &target[c / n][c % n];
        let mut up = zeros(2 * nn);
        up[c] = Rat::one();
        up[nn + c] = -Rat::one();
        lp.add(up, Relation::Le, v.clone());
        let mut down = zeros(2 * nn);
        down[c] = -Rat::one();
        down[nn + c] = -Rat::one();
        lp.add(down, Relation::Le, -v.clone());
    }
    let (_, x) = lp.solve().optimal().expect("copula polytope is nonempty");
    let mu = (0..n).map(|s| x[s * n..(s + 1) * n].to_vec()).collect();
    Copula { mu }
}
