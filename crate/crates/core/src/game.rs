//! Game instances, stationary receiver strategies and the payoff functional.

use num_traits::{One, Signed, Zero};

use crate::assignment::{assignment_value, best_non_identity, Permutation};
use crate::chain::{check_ergodic, invariant_measure, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rational::{dot, sum, zeros, Matrix, Rat};

/// Immutable problem instance. Messages coincide with states.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub label: Option<String>,
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    /// Sender payoff, `u1[s][b]`.
    pub u1: Matrix,
    /// Receiver payoff, `u2[s][b]`.
    pub u2: Matrix,
    pub chain: TransitionMatrix,
    /// Invariant measure of `chain`.
    pub m: Vec<Rat>,
}

fn check_shape(name: &str, u: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if u.len() != rows || u.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "{name} must be {rows}x{cols} (states x actions)"
        )));
    }
    Ok(())
}

impl GameSpec {
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        u1: Matrix,
        u2: Matrix,
        chain: TransitionMatrix,
    ) -> Result<Self> {
        let n_s = state_names.len();
        let n_b = action_names.len();
        if n_s < 2 {
            return Err(Error::Dimension("a game needs at least two states".into()));
        }
        if n_b < 1 {
            return Err(Error::Dimension("a game needs at least one action".into()));
        }
        check_shape("u1", &u1, n_s, n_b)?;
        check_shape("u2", &u2, n_s, n_b)?;
        if chain.n() != n_s {
            return Err(Error::Dimension(format!(
                "transition matrix has {} states, game has {n_s}",
                chain.n()
            )));
        }
        let erg = check_ergodic(&chain);
        if !erg.irreducible {
            return Err(Error::NotIrreducible);
        }
        if !erg.aperiodic {
            return Err(Error::Periodic(erg.period));
        }
        let m = invariant_measure(&chain)?;
        Ok(GameSpec {
            label: None,
            state_names,
            action_names,
            u1,
            u2,
            chain,
            m,
        })
    }

    /// Builds a game with generated names `s0, s1, ...` and `b0, b1, ...`.
    pub fn unnamed(u1: Matrix, u2: Matrix, chain: TransitionMatrix) -> Result<Self> {
        let n_s = u1.len();
        let n_b = u1.first().map_or(0, |r| r.len());
        GameSpec::new(
            (0..n_s).map(|s| format!("s{s}")).collect(),
            (0..n_b).map(|b| format!("b{b}")).collect(),
            u1,
            u2,
            chain,
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn n_actions(&self) -> usize {
        self.action_names.len()
    }

    /// Same game with new payoff matrices (chain and names kept).
    pub fn with_payoffs(&self, u1: Matrix, u2: Matrix) -> Result<Self> {
        check_shape("u1", &u1, self.n_states(), self.n_actions())?;
        check_shape("u2", &u2, self.n_states(), self.n_actions())?;
        Ok(GameSpec { u1, u2, ..self.clone() })
    }

    /// Expected payoff of player 1 or 2 in state `s` under mixed action `dist`.
    pub fn u(&self, player: Player, s: usize, dist: &[Rat]) -> Rat {
        dot(&self.payoff(player)[s], dist)
    }

    pub fn payoff(&self, player: Player) -> &Matrix {
        match player {
            Player::Sender => &self.u1,
            Player::Receiver => &self.u2,
        }
    }

    /// Largest absolute payoff entry over both players.
    pub fn max_abs_payoff(&self) -> Rat {
        crate::rational::max_abs(self.u1.iter().chain(&self.u2).flatten())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Sender,
    Receiver,
}

/// Receiver rule: row `a` is the mixed action taken after announcement `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StationaryStrategy {
    rows: Matrix,
}

impl StationaryStrategy {
    pub fn new(rows: Matrix) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.len());
        for (a, row) in rows.iter().enumerate() {
            if row.len() != width || width == 0 {
                return Err(Error::InvalidStrategy(format!("row {a} has wrong length")));
            }
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidStrategy(format!("row {a} has a negative entry")));
            }
            if !sum(row).is_one() {
                return Err(Error::InvalidStrategy(format!("row {a} does not sum to 1")));
            }
        }
        Ok(StationaryStrategy { rows })
    }

    /// Pure strategy: announcement `a` leads to action `actions[a]`.
    pub fn pure(actions: &[usize], n_actions: usize) -> Self {
        let rows = actions
            .iter()
            .map(|&b| {
                let mut r = zeros(n_actions);
                r[b] = Rat::one();
                r
            })
            .collect();
        StationaryStrategy { rows }
    }

    pub fn constant(n_states: usize, b: usize, n_actions: usize) -> Self {
        StationaryStrategy::pure(&vec![b; n_states], n_actions)
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn row(&self, a: usize) -> &[Rat] {
        &self.rows[a]
    }

    pub fn get(&self, a: usize, b: usize) -> &Rat {
        &self.rows[a][b]
    }

    pub fn n_messages(&self) -> usize {
        self.rows.len()
    }

    pub fn n_actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_constant(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }

    /// Distinct announcements lead to distinct mixed actions.
    pub fn is_one_to_one(&self) -> bool {
        let n = self.rows.len();
        (0..n).all(|i| (i + 1..n).all(|j| self.rows[i] != self.rows[j]))
    }

    /// `w·self + (1−w)·other`.
    pub fn mix(&self, w: &Rat, other: &StationaryStrategy) -> StationaryStrategy {
        let rest = Rat::one() - w;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| w * x + &rest * y).collect())
            .collect();
        StationaryStrategy { rows }
    }

    /// Flattened variables `y(b|a)` at index `a·n_b + b`.
    pub fn to_vars(&self) -> Vec<Rat> {
        self.rows.iter().flatten().cloned().collect()
    }

    pub fn from_vars(x: &[Rat], n_messages: usize, n_actions: usize) -> Self {
        let rows = (0..n_messages)
            .map(|a| x[a * n_actions..(a + 1) * n_actions].to_vec())
            .collect();
        StationaryStrategy { rows }
    }
}

/// A payoff vector `(sender, receiver)`. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PayoffPoint {
    pub v1: Rat,
    pub v2: Rat,
}

impl PayoffPoint {
    pub fn new(v1: Rat, v2: Rat) -> Self {
        PayoffPoint { v1, v2 }
    }
}

fn check_dims(game: &GameSpec, y: &StationaryStrategy) -> Result<()> {
    if y.n_messages() != game.n_states() || y.n_actions() != game.n_actions() {
        return Err(Error::Dimension(format!(
            "strategy is {}x{}, game has {} states and {} actions",
            y.n_messages(),
            y.n_actions(),
            game.n_states(),
            game.n_actions()
        )));
    }
    Ok(())
}

/// `U(μ, y) = Σ_{s,a} μ(s,a) u(s, y(·|a))`, exact.
pub fn payoff_u(mu: &[Vec<Rat>], y: &StationaryStrategy, game: &GameSpec) -> Result<PayoffPoint> {
    check_dims(game, y)?;
    let n = game.n_states();
    if mu.len() != n || mu.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("joint distribution must be states x states".into()));
    }
    let mut v1 = Rat::zero();
    let mut v2 = Rat::zero();
    for (s, row) in mu.iter().enumerate() {
        for (a, w) in row.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            v1 += w * game.u(Player::Sender, s, y.row(a));
            v2 += w * game.u(Player::Receiver, s, y.row(a));
        }
    }
    Ok(PayoffPoint { v1, v2 })
}

/// `U(μ₀, y)` without materializing the diagonal copula.
pub fn truthful_payoff(y: &StationaryStrategy, game: &GameSpec) -> PayoffPoint {
    let mut v1 = Rat::zero();
    let mut v2 = Rat::zero();
    for (s, ms) in game.m.iter().enumerate() {
        v1 += ms * game.u(Player::Sender, s, y.row(s));
        v2 += ms * game.u(Player::Receiver, s, y.row(s));
    }
    PayoffPoint { v1, v2 }
}

/// Receiver's expected payoff of each action under the invariant measure.
pub fn action_values(game: &GameSpec) -> Vec<Rat> {
    (0..game.n_actions())
        .map(|b| {
            game.m
                .iter()
                .zip(&game.u2)
                .fold(Rat::zero(), |acc, (ms, row)| acc + ms * &row[b])
        })
        .collect()
}

/// `v² = max_b Σ_s m(s) u²(s,b)`.
pub fn babbling_value(game: &GameSpec) -> Rat {
    action_values(game).into_iter().max().expect("at least one action")
}

/// Lowest-index receiver action attaining `v²`.
pub fn babbling_action(game: &GameSpec) -> usize {
    let values = action_values(game);
    let best = values.iter().max().unwrap();
    values.iter().position(|v| v == best).unwrap()
}

pub fn babbling_strategy(game: &GameSpec) -> StationaryStrategy {
    StationaryStrategy::constant(game.n_states(), babbling_action(game), game.n_actions())
}

/// `M[s][a] = u¹(s, y(·|a))`: the sender's stage payoff of reporting `a` in `s`.
pub fn sender_matrix(y: &StationaryStrategy, game: &GameSpec) -> Matrix {
    (0..game.n_states())
        .map(|s| {
            (0..game.n_states())
                .map(|a| game.u(Player::Sender, s, y.row(a)))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct C1Report {
    pub holds: bool,
    /// `Σ_s u¹(s, y(·|s))`.
    pub identity_value: Rat,
    /// Best permutation other than the identity (lexicographically smallest among ties).
    pub best_deviation: Permutation,
    pub deviation_value: Rat,
    /// `deviation_value − identity_value`; C1 holds iff this is `≤ 0`, D1 iff `< 0`.
    pub gain: Rat,
}

/// Truth-telling against every relabelling of the states, as an assignment problem.
pub fn check_c1(y: &StationaryStrategy, game: &GameSpec) -> Result<C1Report> {
    check_dims(game, y)?;
    let w = sender_matrix(y, game);
    let identity: Permutation = (0..w.len()).collect();
    let identity_value = assignment_value(&w, &identity);
    let (deviation_value, best_deviation) =
        best_non_identity(&w).ok_or_else(|| Error::Internal("fewer than two states".into()))?;
    let gain = &deviation_value - &identity_value;
    Ok(C1Report {
        holds: !gain.is_positive(),
        identity_value,
        best_deviation,
        deviation_value,
        gain,
    })
}

pub fn check_d1(y: &StationaryStrategy, game: &GameSpec) -> Result<bool> {
    Ok(check_c1(y, game)?.gain.is_negative())
}

pub fn check_c2(y: &StationaryStrategy, game: &GameSpec) -> Result<bool> {
    check_dims(game, y)?;
    Ok(truthful_payoff(y, game).v2 >= babbling_value(game))
}

pub fn check_d2(y: &StationaryStrategy, game: &GameSpec) -> Result<bool> {
    check_dims(game, y)?;
    Ok(truthful_payoff(y, game).v2 > babbling_value(game))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub in_e: bool,
    pub payoff: PayoffPoint,
}

pub fn membership_in_e(y: &StationaryStrategy, game: &GameSpec) -> Result<Membership> {
    let c1 = check_c1(y, game)?.holds;
    let c2 = check_c2(y, game)?;
    Ok(Membership {
        in_e: c1 && c2,
        payoff: truthful_payoff(y, game),
    })
}

/// Turns a one-shot profile (sender rule `sigma[s][a]`, receiver rule
/// `tau[a][b]`) into the stationary strategy that acts on a truthful report
/// exactly as the composed profile would: `y(b|s) = Σ_a σ(a|s) τ(b|a)`.
pub fn one_shot_embed(sigma: &Matrix, tau: &Matrix, game: &GameSpec) -> Result<StationaryStrategy> {
    let n = game.n_states();
    let nb = game.n_actions();
    check_shape("sigma", sigma, n, n)?;
    check_shape("tau", tau, n, nb)?;
    let rows = sigma
        .iter()
        .map(|sig| {
            let mut row = zeros(nb);
            for (a, w) in sig.iter().enumerate() {
                for (b, x) in row.iter_mut().enumerate() {
                    *x += w * &tau[a][b];
                }
            }
            row
        })
        .collect();
    StationaryStrategy::new(rows)
}

/// Expected stage payoff of a one-shot profile with the state drawn from `m`.
pub fn one_shot_payoff(sigma: &Matrix, tau: &Matrix, game: &GameSpec) -> PayoffPoint {
    let mut v1 = Rat::zero();
    let mut v2 = Rat::zero();
    for s in 0..game.n_states() {
        for a in 0..game.n_states() {
            let w = &game.m[s] * &sigma[s][a];
            if w.is_zero() {
                continue;
            }
            v1 += &w * game.u(Player::Sender, s, &tau[a]);
            v2 += &w * game.u(Player::Receiver, s, &tau[a]);
        }
    }
    PayoffPoint { v1, v2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{int, rat};

    #[test]
    fn triangle_values() {
        let g = catalog::triangle();
        let y2 = StationaryStrategy::pure(&[0, 1, 2], 3);
        assert_eq!(truthful_payoff(&y2, &g), PayoffPoint::new(int(1), rat(1, 3)));
        let h = rat(1, 2);
        let y1 = StationaryStrategy::new(vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), h.clone(), h.clone()],
            vec![int(0), h.clone(), h.clone()],
        ])
        .unwrap();
        assert_eq!(truthful_payoff(&y1, &g), PayoffPoint::new(rat(2, 3), rat(2, 3)));
        assert_eq!(babbling_value(&g), rat(1, 3));
        assert!(check_c1(&y2, &g).unwrap().holds);
        assert!(check_c2(&y2, &g).unwrap());
        assert!(!check_d2(&y2, &g).unwrap());
    }

    #[test]
    fn constant_strategy_ties_every_permutation() {
        let g = catalog::triangle();
        let y = StationaryStrategy::constant(3, 1, 3);
        let r = check_c1(&y, &g).unwrap();
        assert!(r.holds);
        assert!(r.gain.is_zero());
        assert!(!check_d1(&y, &g).unwrap());
        assert!(membership_in_e(&babbling_strategy(&g), &g).unwrap().in_e);
    }

    #[test]
    fn matching_strategy_fails_in_cycle_game() {
        let c = rat(6, 5);
        let g = catalog::five_cycle_game(c.clone());
        let y = StationaryStrategy::pure(&[0, 1, 2, 3, 4], 5);
        let r = check_c1(&y, &g).unwrap();
        assert!(!r.holds);
        assert_eq!(r.identity_value, int(5));
        let swap = vec![1, 0, 2, 3, 4];
        assert_eq!(assignment_value(&sender_matrix(&y, &g), &swap), int(2) * &c + int(3));
        assert!(!membership_in_e(&y, &g).unwrap().in_e);
    }

    #[test]
    fn embedding_composes_rules() {
        let g = catalog::triangle();
        let tau = StationaryStrategy::pure(&[0, 1, 2], 3).rows().clone();
        let truthful = crate::rational::identity(3);
        let y = one_shot_embed(&truthful, &tau, &g).unwrap();
        assert_eq!(y.rows(), &tau);
        let pooling = vec![vec![int(1), int(0), int(0)]; 3];
        let y = one_shot_embed(&pooling, &tau, &g).unwrap();
        assert!(y.is_constant());
        assert_eq!(y.row(2), &tau[0][..]);
        assert_eq!(truthful_payoff(&y, &g), one_shot_payoff(&pooling, &tau, &g));
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = TransitionMatrix::iid(&[rat(1, 2), rat(1, 2)]).unwrap();
        let u = vec![vec![int(1)], vec![int(0)]];
        assert!(GameSpec::unnamed(u.clone(), vec![vec![int(1)]], p.clone()).is_err());
        let g = GameSpec::unnamed(u.clone(), u, p).unwrap();
        let y = StationaryStrategy::pure(&[0, 0, 0], 1);
        assert!(payoff_u(&crate::rational::identity(2), &y, &g).is_err());
        assert!(StationaryStrategy::new(vec![vec![rat(1, 2)]]).is_err());
    }
}
