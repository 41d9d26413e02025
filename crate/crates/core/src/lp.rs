//! Dense two-phase simplex over exact rationals.
//!
//! Bland's rule picks both the entering and the leaving variable, so the
//! method terminates on degenerate problems. Every variable is
//! nonnegative; the objective is maximized.

use num_traits::{One, Signed, Zero};

use crate::rational::{zeros, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub relation: Relation,
    pub rhs: Rat,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rat>, relation: Relation, rhs: Rat) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rat>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rat, x: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Rat, Vec<Rat>)> {
        match self {
            LpOutcome::Optimal { value, x } => Some((value, x)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: zeros(num_vars),
            constraints: Vec::new(),
        }
    }

    pub fn maximize(mut self, objective: Vec<Rat>) -> Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self
    }

    pub fn add(&mut self, coeffs: Vec<Rat>, relation: Relation, rhs: Rat) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// rows[i] = coefficients over all columns followed by the rhs.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    num_original: usize,
    num_cols: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        let mut normalized: Vec<(Vec<Rat>, Relation, Rat)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|x| -x).collect(), flipped, -c.rhs.clone())
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let num_slack = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let num_art = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let artificial_start = n + num_slack;
        let num_cols = artificial_start + num_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut slack = n;
        let mut art = artificial_start;
        for (coeffs, relation, rhs) in normalized.drain(..) {
            let mut row = zeros(num_cols + 1);
            for (j, c) in coeffs.into_iter().enumerate() {
                row[j] = c;
            }
            row[num_cols] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = Rat::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rat::one();
                    slack += 1;
                    row[art] = Rat::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rat::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_original: n,
            num_cols,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over the current basis restricted to columns
    /// `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rat], allowed: usize) -> bool {
        loop {
            // reduced profit of column j: cost_j - sum_i cost_{basis_i} * a_ij
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() && !row[j].is_zero() {
                        d -= cb * &row[j];
                    }
                }
                d.is_positive()
            });
            let Some(c) = entering else {
                return true;
            };
            let rhs = self.num_cols;
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn run(mut self, objective: &[Rat]) -> LpOutcome {
        let rhs = self.num_cols;
        if self.artificial_start < self.num_cols {
            let mut phase1 = zeros(self.num_cols);
            for x in phase1[self.artificial_start..].iter_mut() {
                *x = -Rat::one();
            }
            self.optimize(&phase1, self.num_cols);
            let infeasibility: Rat = self
                .basis
                .iter()
                .zip(&self.rows)
                .filter(|(b, _)| **b >= self.artificial_start)
                .fold(Rat::zero(), |acc, (_, row)| acc + &row[rhs]);
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // drive zero-level artificials out of the basis
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    let col = (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero());
                    match col {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = zeros(self.num_cols);
        cost[..self.num_original].clone_from_slice(objective);
        if !self.optimize(&cost, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = zeros(self.num_original);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_original {
                x[b] = self.rows[i][rhs].clone();
            }
        }
        let value = objective.iter().zip(&x).fold(Rat::zero(), |acc, (c, v)| acc + c * v);
        LpOutcome::Optimal { value, x }
    }
}
