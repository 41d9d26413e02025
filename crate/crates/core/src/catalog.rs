//! Bundled example games.

use crate::chain::TransitionMatrix;
use crate::game::GameSpec;
use crate::gamefile::parse_game;
use crate::rational::{int, rat, zeros, Rat};

pub const ALTERNATION_JSON: &str = include_str!("../games/alternation.json");
pub const TRIANGLE_JSON: &str = include_str!("../games/triangle.json");
pub const ALIGNED_JSON: &str = include_str!("../games/aligned.json");
pub const TWO_STATE_JSON: &str = include_str!("../games/two_state.json");
pub const FIVE_CYCLE_JSON: &str = include_str!("../games/five_cycle.json");
pub const DEVICE_JSON: &str = include_str!("../games/device.json");

/// `(file name, contents)` of every bundled game.
pub const BUNDLED: [(&str, &str); 6] = [
    ("alternation.json", ALTERNATION_JSON),
    ("triangle.json", TRIANGLE_JSON),
    ("aligned.json", ALIGNED_JSON),
    ("two_state.json", TWO_STATE_JSON),
    ("device.json", DEVICE_JSON),
    ("five_cycle.json", FIVE_CYCLE_JSON),
];

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn fair_coin() -> TransitionMatrix {
    TransitionMatrix::iid(&[rat(1, 2), rat(1, 2)]).unwrap()
}

fn lr(u1: [[Rat; 2]; 2], u2: [[Rat; 2]; 2], label: &str) -> GameSpec {
    GameSpec::new(
        vec!["L".into(), "R".into()],
        vec!["l".into(), "r".into()],
        u1.into_iter().map(Vec::from).collect(),
        u2.into_iter().map(Vec::from).collect(),
        fair_coin(),
    )
    .unwrap()
    .with_label(label)
}

/// Two i.i.d. equally likely states; the sender's payoff from `l` in `L` is `c`.
pub fn alternation_game(c: Rat) -> GameSpec {
    lr(
        [[c.clone(), int(2)], [int(1), int(2)]],
        [[int(2), int(1)], [int(-1), int(1)]],
        &format!("two-state alternation example (c = {c})"),
    )
}

pub fn triangle() -> GameSpec {
    parse_game(TRIANGLE_JSON).unwrap()
}

pub fn aligned() -> GameSpec {
    parse_game(ALIGNED_JSON).unwrap()
}

pub fn two_state() -> GameSpec {
    parse_game(TWO_STATE_JSON).unwrap()
}

pub fn device() -> GameSpec {
    parse_game(DEVICE_JSON).unwrap()
}

/// Five-state walk moving ±1 mod 5; states 0 and 1 pay the sender `c`
/// for the other's action.
pub fn five_cycle_game(c: Rat) -> GameSpec {
    let n = 5;
    let mut p = vec![zeros(n); n];
    let mut u1 = vec![zeros(n); n];
    let mut u2 = vec![zeros(n); n];
    for s in 0..n {
        p[s][(s + 1) % n] = rat(1, 2);
        p[s][(s + n - 1) % n] = rat(1, 2);
        u1[s][s] = int(1);
        u2[s][s] = int(1);
    }
    u1[0][1] = c.clone();
    u1[1][0] = c.clone();
    GameSpec::new(names("s", n), names("b", n), u1, u2, TransitionMatrix::new(p).unwrap())
        .unwrap()
        .with_label(format!("five-state cycle walk (c = {c})"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_match_constructors() {
        let alternation = parse_game(ALTERNATION_JSON).unwrap();
        assert_eq!(alternation, alternation_game(rat(3, 2)));
        let cycle = parse_game(FIVE_CYCLE_JSON).unwrap();
        assert_eq!(cycle, five_cycle_game(rat(6, 5)));
        for (name, text) in BUNDLED {
            assert!(parse_game(text).is_ok(), "{name}");
        }
    }
}
