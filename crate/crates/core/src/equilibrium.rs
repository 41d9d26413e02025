//! The limit equilibrium payoff set as an exact polygon, its strict
//! interior test, the non-constant-strategy condition, and the payoff
//! perturbations that make strict equilibria appear.

use num_traits::{One, Signed, Zero};

use crate::assignment::{best_non_identity, is_identity, lex_max_assignment, permutations, Permutation};
use crate::copula::{extreme_points, l1_distance, mu_zero, Copula};
use crate::error::{Error, Result};
use crate::game::{
    babbling_value, check_c1, check_c2, check_d1, check_d2, payoff_u, truthful_payoff, GameSpec, PayoffPoint, Player,
    StationaryStrategy,
};
use crate::lp::{LinearProgram, Relation};
use crate::rational::{dot, fmt_rat, max_abs, rat, zeros, Matrix, Rat};

/// Permutation rows are written out in full up to this many states;
/// larger games generate them on demand from the assignment oracle.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 5;

/// Default perturbation size for the strict-equilibrium pipeline.
pub fn default_epsilon() -> Rat {
    rat(1, 100)
}

/// Convex polygon, vertices counterclockwise starting from the
/// lexicographically smallest point. May degenerate to a segment or point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygon2D {
    pub vertices: Vec<PayoffPoint>,
}

fn cross(o: &PayoffPoint, a: &PayoffPoint, b: &PayoffPoint) -> Rat {
    (&a.v1 - &o.v1) * (&b.v2 - &o.v2) - (&a.v2 - &o.v2) * (&b.v1 - &o.v1)
}

impl Polygon2D {
    pub fn contains(&self, p: &PayoffPoint) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => v[0] == *p,
            2 => {
                cross(&v[0], &v[1], p).is_zero()
                    && p.v1 >= v[0].v1.clone().min(v[1].v1.clone())
                    && p.v1 <= v[0].v1.clone().max(v[1].v1.clone())
                    && p.v2 >= v[0].v2.clone().min(v[1].v2.clone())
                    && p.v2 <= v[0].v2.clone().max(v[1].v2.clone())
            }
            n => (0..n).all(|i| !cross(&v[i], &v[(i + 1) % n], p).is_negative()),
        }
    }

    pub fn is_convex_ccw(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        n < 3 || (0..n).all(|i| cross(&v[i], &v[(i + 1) % n], &v[(i + 2) % n]).is_positive())
    }
}

/// Polygon together with a strategy attaining each vertex.
#[derive(Debug, Clone)]
pub struct PayoffSet {
    pub polygon: Polygon2D,
    pub witnesses: Vec<StationaryStrategy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Probability rows only.
    Feasible,
    /// Probability rows, truth-telling constraints and the receiver floor.
    Equilibrium,
    /// As `Equilibrium`, with a shared slack variable `t` added to every
    /// incentive row.
    Strict,
}

/// Linear description of the receiver strategies that satisfy the
/// truth-telling and individual-rationality conditions. Variable
/// `a·n_b + b` is `y(b|a)`.
#[derive(Debug, Clone)]
pub struct StrategyPolytope {
    n_s: usize,
    n_b: usize,
    u1: Matrix,
    /// Coefficients of `U¹(μ₀,·)` and `U²(μ₀,·)`.
    value1: Vec<Rat>,
    value2: Vec<Rat>,
    v2: Rat,
    /// Materialized permutations; `None` means lazy separation.
    perms: Option<Vec<Permutation>>,
}

impl StrategyPolytope {
    pub fn new(game: &GameSpec) -> Self {
        StrategyPolytope::with_limit(game, DEFAULT_MATERIALIZE_LIMIT)
    }

    pub fn with_limit(game: &GameSpec, materialize_limit: usize) -> Self {
        let n_s = game.n_states();
        let n_b = game.n_actions();
        let mut value1 = zeros(n_s * n_b);
        let mut value2 = zeros(n_s * n_b);
        for s in 0..n_s {
            for b in 0..n_b {
                value1[s * n_b + b] = &game.m[s] * &game.u1[s][b];
                value2[s * n_b + b] = &game.m[s] * &game.u2[s][b];
            }
        }
        let perms =
            (n_s <= materialize_limit).then(|| permutations(n_s).into_iter().filter(|p| !is_identity(p)).collect());
        StrategyPolytope {
            n_s,
            n_b,
            u1: game.u1.clone(),
            value1,
            value2,
            v2: babbling_value(game),
            perms,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n_s * self.n_b
    }

    /// `Σ_s u¹(s, y(·|φ(s))) − Σ_s u¹(s, y(·|s))` as coefficients on `y`.
    fn deviation_row(&self, phi: &[usize]) -> Vec<Rat> {
        let mut row = zeros(self.num_vars());
        for (s, &a) in phi.iter().enumerate() {
            for b in 0..self.n_b {
                row[a * self.n_b + b] += &self.u1[s][b];
                row[s * self.n_b + b] -= &self.u1[s][b];
            }
        }
        row
    }

    fn base_program(&self, width: usize) -> LinearProgram {
        let mut lp = LinearProgram::new(width);
        for a in 0..self.n_s {
            let mut row = zeros(width);
            for b in 0..self.n_b {
                row[a * self.n_b + b] = Rat::one();
            }
            lp.add(row, Relation::Eq, Rat::one());
        }
        lp
    }

    fn pad(&self, row: &[Rat], width: usize, t_coeff: Option<Rat>) -> Vec<Rat> {
        let mut out = row.to_vec();
        out.resize(width, Rat::zero());
        if let Some(c) = t_coeff {
            out[width - 1] = c;
        }
        out
    }

    /// Maximizes `objective · (y, t)` (`t` present only in strict mode).
    fn optimize(&self, mode: Mode, objective: &[Rat], extra: &[(Vec<Rat>, Relation, Rat)]) -> Result<(Rat, Vec<Rat>)> {
        let strict = mode == Mode::Strict;
        let width = self.num_vars() + usize::from(strict);
        let t = |c: i64| strict.then(|| Rat::from_integer(c.into()));
        let mut lp = self.base_program(width).maximize(self.pad(objective, width, None));
        for (row, rel, rhs) in extra {
            lp.add(self.pad(row, width, None), *rel, rhs.clone());
        }
        if mode != Mode::Feasible {
            lp.add(self.pad(&self.value2, width, t(-1)), Relation::Ge, self.v2.clone());
        }
        let mut cuts: Vec<Permutation> = match (&self.perms, mode) {
            (_, Mode::Feasible) => Vec::new(),
            (Some(all), _) => all.clone(),
            (None, _) => Vec::new(),
        };
        let mut added = 0;
        loop {
            for phi in &cuts[added..] {
                lp.add(
                    self.pad(&self.deviation_row(phi), width, t(1)),
                    Relation::Le,
                    Rat::zero(),
                );
            }
            added = cuts.len();
            let (value, x) = lp
                .solve()
                .optimal()
                .ok_or_else(|| Error::Internal("strategy program infeasible or unbounded".into()))?;
            if mode == Mode::Feasible || self.perms.is_some() {
                return Ok((value, x));
            }
            // separation: most profitable relabelling at the current point
            let y = StationaryStrategy::from_vars(&x, self.n_s, self.n_b);
            let m: Matrix = (0..self.n_s)
                .map(|s| (0..self.n_s).map(|a| dot(&self.u1[s], y.row(a))).collect())
                .collect();
            let (dev, phi) = best_non_identity(&m).expect("at least two states");
            let id: Rat = (0..self.n_s).map(|s| m[s][s].clone()).sum();
            let slack = if strict { x[width - 1].clone() } else { Rat::zero() };
            if dev - id + slack > Rat::zero() && !cuts.contains(&phi) {
                cuts.push(phi);
            } else {
                return Ok((value, x));
            }
        }
    }

    fn strategy(&self, x: &[Rat]) -> StationaryStrategy {
        StationaryStrategy::from_vars(&x[..self.num_vars()], self.n_s, self.n_b)
    }

    fn point(&self, x: &[Rat]) -> PayoffPoint {
        let y = &x[..self.num_vars()];
        PayoffPoint::new(dot(&self.value1, y), dot(&self.value2, y))
    }

    fn direction(&self, d1: &Rat, d2: &Rat) -> Vec<Rat> {
        self.value1
            .iter()
            .zip(&self.value2)
            .map(|(a, b)| d1 * a + d2 * b)
            .collect()
    }

    /// Lexicographic maximum of `(d·U, e·U)`: an exact vertex of the image.
    fn extreme(&self, mode: Mode, d: (&Rat, &Rat), e: (&Rat, &Rat)) -> Result<(PayoffPoint, StationaryStrategy)> {
        let first = self.direction(d.0, d.1);
        let (opt, _) = self.optimize(mode, &first, &[])?;
        let second = self.direction(e.0, e.1);
        let (_, x) = self.optimize(mode, &second, &[(first, Relation::Eq, opt)])?;
        Ok((self.point(&x), self.strategy(&x)))
    }

    /// Image polygon of the polytope under `y ↦ U(μ₀,y)`.
    fn sweep(&self, mode: Mode) -> Result<PayoffSet> {
        let (one, zero, neg) = (Rat::one(), Rat::zero(), -Rat::one());
        let hi = self.extreme(mode, (&one, &zero), (&zero, &one))?;
        let lo = self.extreme(mode, (&neg, &zero), (&zero, &neg))?;
        let mut out = vec![lo.clone()];
        if hi.0 == lo.0 {
            return Ok(collect(out));
        }
        if hi.0.v1 == lo.0.v1 {
            out.push(hi);
            return Ok(collect(out));
        }
        self.expand(mode, &lo.0, &hi.0, &mut out)?;
        out.push(hi.clone());
        self.expand(mode, &hi.0, &lo.0, &mut out)?;
        Ok(collect(out))
    }

    /// Appends the vertices strictly to the right of the chord `a → b`.
    fn expand(
        &self,
        mode: Mode,
        a: &PayoffPoint,
        b: &PayoffPoint,
        out: &mut Vec<(PayoffPoint, StationaryStrategy)>,
    ) -> Result<()> {
        let dx = &b.v1 - &a.v1;
        let dy = &b.v2 - &a.v2;
        let (n1, n2) = (dy.clone(), -dx.clone());
        let (opt, _) = self.optimize(mode, &self.direction(&n1, &n2), &[])?;
        if opt <= &n1 * &a.v1 + &n2 * &a.v2 {
            return Ok(());
        }
        let c = self.extreme(mode, (&n1, &n2), (&dx, &dy))?;
        self.expand(mode, a, &c.0, out)?;
        out.push(c.clone());
        self.expand(mode, &c.0, b, out)
    }
}

fn collect(points: Vec<(PayoffPoint, StationaryStrategy)>) -> PayoffSet {
    let (vertices, witnesses) = points.into_iter().unzip();
    PayoffSet {
        polygon: Polygon2D { vertices },
        witnesses,
    }
}

/// The set `E(M)` of payoffs `U(μ₀,y)` over strategies satisfying the
/// truth-telling and receiver-floor conditions.
pub fn compute_e_polygon(game: &GameSpec) -> Result<PayoffSet> {
    StrategyPolytope::new(game).sweep(Mode::Equilibrium)
}

/// All payoffs `U(μ₀,y)`, ignoring incentives.
pub fn compute_feasible_polygon(game: &GameSpec) -> Result<PayoffSet> {
    StrategyPolytope::new(game).sweep(Mode::Feasible)
}

/// Largest receiver payoff over the equilibrium polytope.
pub fn max_receiver_payoff(game: &GameSpec) -> Result<(Rat, StationaryStrategy)> {
    let poly = StrategyPolytope::new(game);
    let (v, x) = poly.optimize(Mode::Equilibrium, &poly.value2, &[])?;
    Ok((v, poly.strategy(&x)))
}

/// True iff exactly one strategy in the equilibrium polytope attains
/// receiver payoff `level`.
pub fn unique_strategy_at_receiver_level(game: &GameSpec, level: &Rat) -> Result<bool> {
    let poly = StrategyPolytope::new(game);
    let fix = [(poly.value2.clone(), Relation::Eq, level.clone())];
    for k in 0..poly.num_vars() {
        let mut e = zeros(poly.num_vars());
        e[k] = Rat::one();
        let (hi, _) = poly.optimize(Mode::Equilibrium, &e, &fix)?;
        let (neg_lo, _) = poly.optimize(Mode::Equilibrium, &e.iter().map(|x| -x).collect::<Vec<_>>(), &fix)?;
        if hi != -neg_lo {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct EHat {
    pub nonempty: bool,
    pub witness: StationaryStrategy,
    /// Largest common slack `t` in all incentive rows.
    pub slack: Rat,
}

/// Maximizes a common slack in every truth-telling row and in the receiver
/// floor; strict equilibria exist iff the optimum is positive.
pub fn e_hat_nonempty(game: &GameSpec) -> Result<EHat> {
    let poly = StrategyPolytope::new(game);
    let mut obj = zeros(poly.num_vars() + 1);
    obj[poly.num_vars()] = Rat::one();
    let (slack, x) = poly.optimize(Mode::Strict, &obj, &[])?;
    Ok(EHat {
        nonempty: slack.is_positive(),
        witness: poly.strategy(&x),
        slack,
    })
}

#[derive(Debug, Clone)]
pub struct ConditionB {
    pub holds: bool,
    /// A non-constant equilibrium strategy when the condition holds.
    pub witness: Option<StationaryStrategy>,
}

/// Searches for a non-constant strategy in the equilibrium polytope by
/// maximizing `y(b|s) − y(b|s')` for every ordered pair and action.
pub fn check_condition_b(game: &GameSpec) -> Result<ConditionB> {
    let poly = StrategyPolytope::new(game);
    let (n_s, n_b) = (game.n_states(), game.n_actions());
    for s in 0..n_s {
        for s2 in (0..n_s).filter(|&x| x != s) {
            for b in 0..n_b {
                let mut obj = zeros(poly.num_vars());
                obj[s * n_b + b] = Rat::one();
                obj[s2 * n_b + b] = -Rat::one();
                let (v, x) = poly.optimize(Mode::Equilibrium, &obj, &[])?;
                if v.is_positive() {
                    return Ok(ConditionB {
                        holds: true,
                        witness: Some(poly.strategy(&x)),
                    });
                }
            }
        }
    }
    Ok(ConditionB {
        holds: false,
        witness: None,
    })
}

/// `P(s,b) = m(s) y(b|s)` and its action margin.
fn joint_and_margin(game: &GameSpec, y: &StationaryStrategy) -> (Matrix, Vec<Rat>) {
    let n_b = game.n_actions();
    let joint: Matrix = (0..game.n_states())
        .map(|s| (0..n_b).map(|b| &game.m[s] * y.get(s, b)).collect())
        .collect();
    let margin = (0..n_b).map(|b| joint.iter().map(|r| r[b].clone()).sum()).collect();
    (joint, margin)
}

/// Adds `ε P(s,b) / (m(s) P(b))` to the receiver payoff, which makes the
/// receiver floor strict for `y`.
pub fn perturb_u2(game: &GameSpec, y: &StationaryStrategy, eps: &Rat) -> Result<GameSpec> {
    if y.is_constant() {
        return Err(Error::Precondition(
            "receiver perturbation needs a non-constant strategy".into(),
        ));
    }
    if !check_c2(y, game)? {
        return Err(Error::Precondition("strategy is below the babbling value".into()));
    }
    let (joint, margin) = joint_and_margin(game, y);
    let mut u2 = game.u2.clone();
    for (s, row) in u2.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            if margin[b].is_positive() {
                *x += eps * &joint[s][b] / (&game.m[s] * &margin[b]);
            }
        }
    }
    let out = game.with_payoffs(game.u1.clone(), u2)?;
    if eps.is_positive() && !check_d2(y, &out)? {
        return Err(Error::Internal(
            "receiver perturbation did not make the floor strict".into(),
        ));
    }
    Ok(out)
}

/// Mixes `y` with distinct points of the action simplex, assigned to
/// states so that truth-telling stays optimal, giving a one-to-one
/// strategy. `eps` is halved until the mixture is one-to-one.
pub fn make_one_to_one(game: &GameSpec, y: &StationaryStrategy, eps: &Rat) -> Result<StationaryStrategy> {
    let (n_s, n_b) = (game.n_states(), game.n_actions());
    if n_b == 1 {
        return Err(Error::Precondition("one action cannot separate several states".into()));
    }
    if !check_c1(y, game)?.holds {
        return Err(Error::Precondition("strategy violates truth-telling".into()));
    }
    let levels = n_s.div_ceil(n_b);
    let bary = Rat::new(1.into(), n_b.into());
    let z: Matrix = (0..n_s)
        .map(|s| {
            let w = Rat::new((s / n_b).into(), (levels + 1).into());
            let mut row = vec![&w * &bary; n_b];
            row[s % n_b] += Rat::one() - &w;
            row
        })
        .collect();
    let gains: Matrix = (0..n_s)
        .map(|s| z.iter().map(|zk| game.u(Player::Sender, s, zk)).collect())
        .collect();
    let (_, psi) = lex_max_assignment(&gains);
    let z_sorted = StationaryStrategy::new(psi.iter().map(|&k| z[k].clone()).collect())?;
    let mut e = eps.clone();
    for _ in 0..64 {
        let mixed = z_sorted.mix(&e, y);
        if mixed.is_one_to_one() || e.is_zero() {
            return Ok(mixed);
        }
        e /= Rat::from_integer(2.into());
    }
    Err(Error::Internal("could not reach a one-to-one mixture".into()))
}

/// Adds `ε y(b|s)` to the sender payoff; truth-telling becomes strictly
/// optimal for a one-to-one `y`.
pub fn perturb_u1(game: &GameSpec, y: &StationaryStrategy, eps: &Rat) -> Result<GameSpec> {
    if !y.is_one_to_one() {
        return Err(Error::Precondition(
            "sender perturbation needs a one-to-one strategy".into(),
        ));
    }
    if !check_c1(y, game)?.holds {
        return Err(Error::Precondition("strategy violates truth-telling".into()));
    }
    let u1: Matrix = game
        .u1
        .iter()
        .enumerate()
        .map(|(s, row)| row.iter().enumerate().map(|(b, x)| x + eps * y.get(s, b)).collect())
        .collect();
    let out = game.with_payoffs(u1, game.u2.clone())?;
    if eps.is_positive() && !check_d1(y, &out)? {
        return Err(Error::Internal(
            "sender perturbation did not make truth-telling strict".into(),
        ));
    }
    Ok(out)
}

/// Largest entrywise payoff difference between two games on the same chain.
pub fn sup_distance(a: &GameSpec, b: &GameSpec) -> Rat {
    let d: Vec<Rat> =
        a.u1.iter()
            .chain(&a.u2)
            .flatten()
            .zip(b.u1.iter().chain(&b.u2).flatten())
            .map(|(x, y)| x - y)
            .collect();
    max_abs(&d)
}

#[derive(Debug, Clone)]
pub struct PerturbationResult {
    pub perturbed: GameSpec,
    pub witness: StationaryStrategy,
    pub distance: Rat,
    /// A priori bound on `distance` from the perturbation formulas.
    pub bound: Rat,
}

/// Perturbs a game with a non-constant equilibrium strategy into a nearby
/// game with strict equilibria: receiver perturbation first, then the
/// one-to-one repair (shrunk until the receiver floor stays strict), then
/// the sender perturbation.
pub fn perturb_to_strict(game: &GameSpec, eps: &Rat) -> Result<PerturbationResult> {
    if !eps.is_positive() {
        return Err(Error::Precondition("perturbation size must be positive".into()));
    }
    let cond = check_condition_b(game)?;
    let Some(y) = cond.witness else {
        return Err(Error::Precondition(
            "every equilibrium strategy is constant, so no nearby game has strict equilibria".into(),
        ));
    };
    let g1 = perturb_u2(game, &y, eps)?;
    let (_, margin) = joint_and_margin(game, &y);
    let u2_bound = (0..game.n_states())
        .flat_map(|s| margin.iter().filter(|p| p.is_positive()).map(move |p| (s, p)))
        .map(|(s, p)| eps / (&game.m[s] * p))
        .max()
        .unwrap_or_else(Rat::zero);

    let mut e = eps.clone();
    let y1 = loop {
        let candidate = make_one_to_one(&g1, &y, &e)?;
        if check_d2(&candidate, &g1)? {
            break candidate;
        }
        e /= Rat::from_integer(2.into());
        if e < rat(1, 1 << 40) {
            return Err(Error::Internal(
                "one-to-one repair keeps breaking the receiver floor".into(),
            ));
        }
    };
    let g2 = perturb_u1(&g1, &y1, eps)?;
    if !(check_d1(&y1, &g2)? && check_d2(&y1, &g2)?) {
        return Err(Error::Internal("pipeline witness is not strict".into()));
    }
    Ok(PerturbationResult {
        distance: sup_distance(game, &g2),
        bound: u2_bound.max(eps.clone()),
        perturbed: g2,
        witness: y1,
    })
}

#[derive(Debug, Clone)]
pub struct StrictnessConstants {
    /// Smallest sender loss from moving `μ₀` to another vertex, under `y0`.
    pub c1: Rat,
    /// Largest L1 distance from `μ₀` to another vertex.
    pub c2: Rat,
    pub y0: StationaryStrategy,
    pub vertices: Vec<Copula>,
}

pub fn strictness_constants(game: &GameSpec, y0: &StationaryStrategy, cap: usize) -> Result<StrictnessConstants> {
    let mu0 = mu_zero(&game.m);
    let vertices = extreme_points(&game.m, cap)?;
    let base = payoff_u(mu0.matrix(), y0, game)?.v1;
    let mut c1: Option<Rat> = None;
    let mut c2 = Rat::zero();
    for v in vertices.iter().filter(|v| **v != mu0) {
        let loss = &base - payoff_u(v.matrix(), y0, game)?.v1;
        c1 = Some(c1.map_or(loss.clone(), |c| c.min(loss)));
        c2 = c2.max(l1_distance(v.matrix(), mu0.matrix()));
    }
    let c1 = c1.ok_or_else(|| Error::Internal("copula polytope has a single vertex".into()))?;
    if !c1.is_positive() {
        return Err(Error::Precondition(format!(
            "witness is not strict: smallest vertex loss is {}",
            fmt_rat(&c1)
        )));
    }
    Ok(StrictnessConstants {
        c1,
        c2,
        y0: y0.clone(),
        vertices,
    })
}

#[derive(Debug, Clone)]
pub struct DistanceBoundCheck {
    pub lhs: Rat,
    pub rhs: Rat,
    pub holds: bool,
}

/// For `y = ε y0 + (1−ε) ȳ`, compares `U¹(μ₀,y) − U¹(μ,y)` with
/// `(ε c₁ / c₂) ‖μ − μ₀‖₁`.
pub fn distance_bound_check(
    game: &GameSpec,
    constants: &StrictnessConstants,
    y_bar: &StationaryStrategy,
    eps: &Rat,
    mu: &Copula,
) -> Result<DistanceBoundCheck> {
    let y = constants.y0.mix(eps, y_bar);
    let mu0 = mu_zero(&game.m);
    let lhs = truthful_payoff(&y, game).v1 - payoff_u(mu.matrix(), &y, game)?.v1;
    let rhs = eps * &constants.c1 / &constants.c2 * l1_distance(mu.matrix(), mu0.matrix());
    Ok(DistanceBoundCheck {
        holds: lhs >= rhs,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::int;

    fn pts(v: &[(i64, i64, i64, i64)]) -> Vec<PayoffPoint> {
        v.iter()
            .map(|&(a, b, c, d)| PayoffPoint::new(rat(a, b), rat(c, d)))
            .collect()
    }

    #[test]
    fn triangle_polygon() {
        let g = catalog::triangle();
        let e = compute_e_polygon(&g).unwrap();
        assert_eq!(e.polygon.vertices, pts(&[(1, 3, 1, 3), (1, 1, 1, 3), (2, 3, 2, 3)]));
        assert!(e.polygon.is_convex_ccw());
        for (w, v) in e.witnesses.iter().zip(&e.polygon.vertices) {
            assert_eq!(&truthful_payoff(w, &g), v);
        }
        let f = compute_feasible_polygon(&g).unwrap();
        assert_eq!(
            f.polygon.vertices,
            pts(&[(0, 1, 0, 1), (2, 3, 0, 1), (1, 1, 1, 3), (1, 3, 1, 1), (0, 1, 2, 3)])
        );
    }

    #[test]
    fn lazy_separation_agrees_with_materialized_rows() {
        let g = catalog::triangle();
        let lazy = StrategyPolytope::with_limit(&g, 0).sweep(Mode::Equilibrium).unwrap();
        assert_eq!(lazy.polygon, compute_e_polygon(&g).unwrap().polygon);
        let strict = StrategyPolytope::with_limit(&catalog::device(), 0);
        let mut obj = zeros(strict.num_vars() + 1);
        obj[strict.num_vars()] = Rat::one();
        let (t, _) = strict.optimize(Mode::Strict, &obj, &[]).unwrap();
        assert_eq!(t, e_hat_nonempty(&catalog::device()).unwrap().slack);
    }

    #[test]
    fn identical_payoffs_collapse_to_a_point() {
        let g = catalog::aligned();
        let e = compute_e_polygon(&g).unwrap();
        assert_eq!(e.polygon.vertices, pts(&[(1, 1, 1, 1)]));
        assert!(!e_hat_nonempty(&g).unwrap().nonempty);
        assert!(!check_condition_b(&g).unwrap().holds);
        assert!(perturb_to_strict(&g, &default_epsilon()).is_err());
    }

    #[test]
    fn strict_witness_passes_strict_tests() {
        let g = catalog::device();
        let h = e_hat_nonempty(&g).unwrap();
        assert!(h.nonempty);
        assert!(check_d1(&h.witness, &g).unwrap());
        assert!(check_d2(&h.witness, &g).unwrap());
    }

    #[test]
    fn pipeline_creates_strict_equilibria() {
        for g in [catalog::two_state(), catalog::triangle()] {
            let r = perturb_to_strict(&g, &rat(1, 10)).unwrap();
            assert!(e_hat_nonempty(&r.perturbed).unwrap().nonempty);
            assert!(r.distance <= r.bound);
        }
    }

    #[test]
    fn zero_perturbations_are_identities() {
        let g = catalog::two_state();
        let y = StationaryStrategy::pure(&[0, 1], 2);
        assert_eq!(perturb_u2(&g, &y, &int(0)).unwrap(), g);
        assert_eq!(perturb_u1(&g, &y, &int(0)).unwrap(), g);
        let r = perturb_u2(&g, &y, &rat(1, 10)).unwrap();
        assert!(check_d2(&y, &r).unwrap());
    }
}
