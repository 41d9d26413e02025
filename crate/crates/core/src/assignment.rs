//! Maximum-weight assignment over exact rationals.
//!
//! Shortest-augmenting-path Hungarian method (potentials form). A `None`
//! weight marks a forbidden cell. Lexicographically smallest optimal
//! permutations are obtained by fixing rows one at a time and re-solving.

use num_traits::{Signed, Zero};

use crate::rational::Rat;

/// A permutation as `perm[row] = column`.
pub type Permutation = Vec<usize>;

/// Solves max Σ w[i][perm[i]]. Returns `None` when every perfect matching
/// uses a forbidden cell.
pub fn max_assignment(w: &[Vec<Option<Rat>>]) -> Option<(Rat, Permutation)> {
    let n = w.len();
    if n == 0 {
        return Some((Rat::zero(), Vec::new()));
    }
    // minimize cost = -w; 1-indexed arrays, column 0 is the virtual root
    let cost = |i: usize, j: usize| w[i - 1][j - 1].as_ref().map(|x| -x);
    let mut u = vec![Rat::zero(); n + 1];
    let mut v = vec![Rat::zero(); n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<Rat>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta: Option<Rat> = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0, j) {
                    let cur = c - &u[i0] - &v[j];
                    if minv[j].as_ref().is_none_or(|m| cur < *m) {
                        minv[j] = Some(cur);
                        way[j] = j0;
                    }
                }
                if let Some(m) = &minv[j] {
                    if delta.as_ref().is_none_or(|d| m < d) {
                        delta = Some(m.clone());
                        j1 = j;
                    }
                }
            }
            let delta = delta?;
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = minv[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[matched_row[j] - 1] = j - 1;
    }
    let value = perm
        .iter()
        .enumerate()
        .fold(Rat::zero(), |acc, (i, &j)| acc + w[i][j].as_ref().unwrap());
    Some((value, perm))
}

fn allowed(w: &[Vec<Rat>]) -> Vec<Vec<Option<Rat>>> {
    w.iter().map(|row| row.iter().cloned().map(Some).collect()).collect()
}

/// Optimal assignment with ties broken toward the lexicographically
/// smallest permutation.
pub fn lex_max_assignment(w: &[Vec<Rat>]) -> (Rat, Permutation) {
    let mut cells = allowed(w);
    let (best, _) = max_assignment(&cells).expect("dense matrix always has a matching");
    let n = w.len();
    let mut perm = Vec::with_capacity(n);
    for i in 0..n {
        let mut fixed = None;
        for j in 0..n {
            if cells[i][j].is_none() {
                continue;
            }
            let trial = fix_cell(&cells, i, j);
            if let Some((val, _)) = max_assignment(&trial) {
                if val == best {
                    fixed = Some((j, trial));
                    break;
                }
            }
        }
        let (j, trial) = fixed.expect("optimal extension exists");
        perm.push(j);
        cells = trial;
    }
    (best, perm)
}

fn fix_cell(cells: &[Vec<Option<Rat>>], i: usize, j: usize) -> Vec<Vec<Option<Rat>>> {
    let mut out = cells.to_vec();
    for (r, row) in out.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            if (r == i) != (c == j) {
                *x = None;
            }
        }
    }
    out
}

/// Best permutation other than the identity under cell restrictions.
fn best_non_identity_in(cells: &[Vec<Option<Rat>>], from_row: usize) -> Option<Rat> {
    let n = cells.len();
    let mut best: Option<Rat> = None;
    for t in from_row..n {
        if cells[t][t].is_none() {
            // the identity is already excluded by the restrictions
            return max_assignment(cells).map(|(v, _)| v).max(best);
        }
    }
    for t in from_row..n {
        let mut trial = cells.to_vec();
        trial[t][t] = None;
        if let Some((v, _)) = max_assignment(&trial) {
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
    }
    best
}

/// The best permutation different from the identity, lexicographically
/// smallest among ties. `None` for `n < 2`.
pub fn best_non_identity(w: &[Vec<Rat>]) -> Option<(Rat, Permutation)> {
    let n = w.len();
    if n < 2 {
        return None;
    }
    let mut cells = allowed(w);
    let best = best_non_identity_in(&cells, 0)?;
    let mut perm = Vec::with_capacity(n);
    let mut deviated = false;
    for i in 0..n {
        let mut chosen = None;
        for j in 0..n {
            if cells[i][j].is_none() {
                continue;
            }
            let trial = fix_cell(&cells, i, j);
            let now_deviated = deviated || i != j;
            let val = if now_deviated {
                max_assignment(&trial).map(|(v, _)| v)
            } else {
                best_non_identity_in(&trial, i + 1)
            };
            if val.as_ref() == Some(&best) {
                chosen = Some((j, trial, now_deviated));
                break;
            }
        }
        let (j, trial, d) = chosen.expect("optimal extension exists");
        perm.push(j);
        cells = trial;
        deviated = d;
    }
    Some((best, perm))
}

/// Σ_i w[i][perm[i]].
pub fn assignment_value(w: &[Vec<Rat>], perm: &[usize]) -> Rat {
    perm.iter().enumerate().fold(Rat::zero(), |acc, (i, &j)| acc + &w[i][j])
}

pub fn is_identity(perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(i, &j)| i == j)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Permutation> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Exhaustive best permutation (optionally excluding the identity); first
/// in lexicographic order among ties.
pub fn brute_force_best(w: &[Vec<Rat>], skip_identity: bool) -> Option<(Rat, Permutation)> {
    let mut best: Option<(Rat, Permutation)> = None;
    for perm in permutations(w.len()) {
        if skip_identity && is_identity(&perm) {
            continue;
        }
        let v = assignment_value(w, &perm);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, perm));
        }
    }
    best
}

/// Sign helper used by callers that only need the gap to the identity.
pub fn identity_gap(w: &[Vec<Rat>]) -> Option<Rat> {
    let id: Permutation = (0..w.len()).collect();
    best_non_identity(w).map(|(v, _)| assignment_value(w, &id) - v)
}

/// True iff the identity strictly beats every other permutation.
pub fn identity_strictly_best(w: &[Vec<Rat>]) -> bool {
    identity_gap(w).is_none_or(|g| g.is_positive())
}
