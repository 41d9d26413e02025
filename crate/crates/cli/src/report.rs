use std::io::Write;
use std::path::Path;

use cheaptalk::game::{GameSpec, PayoffPoint, StationaryStrategy};
use cheaptalk::gamefile::parse_game;
use cheaptalk::rational::{fmt_matrix, fmt_rat, fmt_vec, Rat};
use serde_json::{json, Value};

use crate::error::{read_file, CliError, Result};

pub fn load_game(path: &Path) -> Result<GameSpec> {
    Ok(parse_game(&read_file(path)?)?)
}

pub fn write_json(out: &mut dyn Write, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out).map_err(io_error)
}

pub fn io_error(source: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

pub fn rat(x: &Rat) -> Value {
    Value::String(fmt_rat(x))
}

pub fn vector(v: &[Rat]) -> Value {
    json!(fmt_vec(v))
}

pub fn matrix(m: &[Vec<Rat>]) -> Value {
    json!(fmt_matrix(m))
}

pub fn point(p: &PayoffPoint) -> Value {
    json!([fmt_rat(&p.v1), fmt_rat(&p.v2)])
}

pub fn strategy(y: &StationaryStrategy) -> Value {
    matrix(y.rows())
}
