//! JSON game definitions.
//!
//! Numbers may be written as strings (`"3/4"`, `"-0.25"`) or as JSON
//! numbers; both are read exactly.

use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::rational::{fmt_rat, parse_rational, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Number {
    pub fn to_rat(&self) -> Result<crate::rational::Rat> {
        match self {
            Number::Text(s) => parse_rational(s),
            Number::Int(i) => Ok(crate::rational::int(*i)),
            // shortest round-trip decimal, so 0.7 reads as 7/10
            Number::Float(f) if f.is_finite() => parse_rational(&format!("{f}")),
            Number::Float(f) => Err(Error::Parse(format!("non-finite number {f}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub u1: Vec<Vec<Number>>,
    pub u2: Vec<Vec<Number>>,
    pub transition: Vec<Vec<Number>>,
}

fn matrix(name: &str, rows: &[Vec<Number>]) -> Result<Matrix> {
    rows.iter()
        .map(|r| r.iter().map(Number::to_rat).collect::<Result<Vec<_>>>())
        .collect::<Result<Matrix>>()
        .map_err(|e| Error::Parse(format!("{name}: {e}")))
}

fn strings(m: &Matrix) -> Vec<Vec<Number>> {
    m.iter()
        .map(|r| r.iter().map(|x| Number::Text(fmt_rat(x))).collect())
        .collect()
}

impl GameFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_game(&self) -> Result<GameSpec> {
        let u1 = matrix("u1", &self.u1)?;
        let u2 = matrix("u2", &self.u2)?;
        let p = matrix("transition", &self.transition)?;
        let chain = TransitionMatrix::new(p)?;
        let game = GameSpec::new(self.states.clone(), self.actions.clone(), u1, u2, chain)?;
        Ok(match &self.label {
            Some(l) => game.with_label(l.clone()),
            None => game,
        })
    }

    pub fn from_game(game: &GameSpec) -> Self {
        GameFile {
            label: game.label.clone(),
            states: game.state_names.clone(),
            actions: game.action_names.clone(),
            u1: strings(&game.u1),
            u2: strings(&game.u2),
            transition: strings(game.chain.rows()),
        }
    }
}

/// Reads a bare JSON matrix such as `[["1/2", 0], [0, "1/2"]]`.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let rows: Vec<Vec<Number>> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    matrix("matrix", &rows)
}

pub fn parse_game(text: &str) -> Result<GameSpec> {
    GameFile::from_json(text)?.to_game()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn reads_mixed_number_forms() {
        let text = r#"{"states":["a","b"],"actions":["x"],
            "u1":[[1],[0.7]],"u2":[["1/3"],["-2"]],
            "transition":[[0.25,"3/4"],["1/2",0.5]]}"#;
        let g = parse_game(text).unwrap();
        assert_eq!(g.u1[1][0], rat(7, 10));
        assert_eq!(g.u2[0][0], rat(1, 3));
        let again = GameFile::from_game(&g).to_game().unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn reports_parse_and_chain_errors() {
        assert!(matches!(parse_game("{"), Err(Error::Parse(_))));
        let bad = r#"{"states":["a","b"],"actions":["x"],"u1":[["q"],[0]],"u2":[[0],[0]],
            "transition":[[1,0],[0,1]]}"#;
        assert!(matches!(parse_game(bad), Err(Error::Parse(_))));
        let reducible = r#"{"states":["a","b"],"actions":["x"],"u1":[[0],[0]],"u2":[[0],[0]],
            "transition":[[1,0],[0,1]]}"#;
        assert_eq!(parse_game(reducible), Err(Error::NotIrreducible));
    }
}
