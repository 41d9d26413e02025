use cheaptalk::chain::{check_assumption_a, check_ergodic, AssumptionA};
use cheaptalk::equilibrium::{
    check_condition_b, compute_e_polygon, compute_feasible_polygon, e_hat_nonempty, PayoffSet,
};
use cheaptalk::game::{babbling_action, babbling_value, GameSpec};
use serde_json::{json, Value};

use crate::error::Result;
use crate::report::{point, rat, strategy, vector};

fn payoff_set(set: &PayoffSet) -> Value {
    json!({
        "vertices": set.polygon.vertices.iter().map(point).collect::<Vec<_>>(),
        "witnesses": set.witnesses.iter().map(strategy).collect::<Vec<_>>(),
    })
}

pub fn assumption_a(game: &GameSpec) -> Value {
    match check_assumption_a(&game.chain) {
        AssumptionA::Holds { alpha } => json!({ "holds": true, "alpha": vector(&alpha) }),
        AssumptionA::Fails {
            destination,
            from_a,
            from_b,
            p_a,
            p_b,
        } => json!({
            "holds": false,
            "destination": destination,
            "from": [from_a, from_b],
            "probabilities": [rat(&p_a), rat(&p_b)],
        }),
    }
}

pub fn analyze(game: &GameSpec) -> Result<Value> {
    let e = compute_e_polygon(game)?;
    let feasible = compute_feasible_polygon(game)?;
    let e_hat = e_hat_nonempty(game)?;
    let b = check_condition_b(game)?;
    Ok(json!({
        "label": game.label,
        "states": game.state_names,
        "actions": game.action_names,
        "invariant_measure": vector(&game.m),
        "ergodicity": serde_json::to_value(check_ergodic(&game.chain))?,
        "babbling_value": rat(&babbling_value(game)),
        "babbling_action": game.action_names[babbling_action(game)],
        "assumption_a": assumption_a(game),
        "e_polygon": payoff_set(&e),
        "feasible_polygon": payoff_set(&feasible),
        "e_hat": {
            "nonempty": e_hat.nonempty,
            "slack": rat(&e_hat.slack),
            "witness": strategy(&e_hat.witness),
        },
        "condition_b": {
            "holds": b.holds,
            "witness": b.witness.as_ref().map(strategy),
        },
    }))
}
