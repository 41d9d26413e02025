use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use cheaptalk::block_sim::{discounted_payoff, profitable_deviation, AlternationState, TwoStageAlternation};
use cheaptalk::catalog::BUNDLED;
use cheaptalk::chain::check_assumption_a;
use cheaptalk::coupling::find_property_p_violation;
use cheaptalk::equilibrium::{
    check_condition_b, compute_e_polygon, e_hat_nonempty, max_receiver_payoff, unique_strategy_at_receiver_level,
};
use cheaptalk::game::{babbling_value, check_c1, truthful_payoff, GameSpec, PayoffPoint, StationaryStrategy};
use cheaptalk::gamefile::parse_game;
use cheaptalk::rational::{int, rat, Rat};
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::error::{read_file, CliError, Result};
use crate::report::{io_error, write_json};

#[derive(clap::Args)]
pub struct Args {
    /// Print a JSON bundle instead of one line per check.
    #[arg(long)]
    json: bool,
    /// Read the game files from this directory instead of the built-in copies.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Write the built-in game files to this directory and exit.
    #[arg(long, conflicts_with_all = ["dir", "json"])]
    export: Option<PathBuf>,
}

struct Outcome {
    check: String,
    expected: String,
    actual: String,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Default)]
struct Checks(Vec<Outcome>);

impl Checks {
    fn expect(&mut self, check: &str, expected: impl Display, actual: impl Display) {
        self.0.push(Outcome {
            check: check.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        });
    }
}

fn show(p: &PayoffPoint) -> String {
    format!("({}, {})", p.v1, p.v2)
}

fn vertices(game: &GameSpec) -> Result<String> {
    let e = compute_e_polygon(game)?;
    Ok(e.polygon.vertices.iter().map(show).collect::<Vec<_>>().join(" "))
}

fn alternation(g: &GameSpec, c: &mut Checks) -> Result<()> {
    let u = &g.u1[0][0];
    let profile = TwoStageAlternation { first: vec![0, 1] };
    let truthful = |_: &AlternationState, s: usize| s;
    for d in [rat(3, 5), rat(7, 10), rat(9, 10)] {
        let k = Rat::one() / (Rat::one() + &d);
        let v1 = &k * ((int(2) + u) / int(2) + &d * (int(5) + u) / int(4));
        let v2 = &k * (rat(3, 2) + &d * rat(3, 4));
        let got = discounted_payoff(g, &profile, &truthful, &d)?;
        c.expect(
            &format!("alternation payoff at delta {d}"),
            show(&PayoffPoint::new(v1, v2)),
            show(&got),
        );
    }
    for (d, expected) in [(rat(7, 10), false), (rat(3, 5), true)] {
        let (dev, _) = profitable_deviation(g, &profile, &truthful, &d)?;
        c.expect(&format!("profitable sender deviation at delta {d}"), expected, dev);
    }
    Ok(())
}

fn triangle(g: &GameSpec, c: &mut Checks) -> Result<()> {
    c.expect("E(M) vertices", "(1/3, 1/3) (1, 1/3) (2/3, 2/3)", vertices(g)?);
    c.expect("babbling value", "1/3", babbling_value(g));
    Ok(())
}

fn aligned(g: &GameSpec, c: &mut Checks) -> Result<()> {
    c.expect("E(M) vertices", "(1, 1)", vertices(g)?);
    c.expect("strict set nonempty", false, e_hat_nonempty(g)?.nonempty);
    c.expect("Condition B", false, check_condition_b(g)?.holds);
    Ok(())
}

fn two_state(g: &GameSpec, c: &mut Checks) -> Result<()> {
    let e = compute_e_polygon(g)?;
    c.expect(
        "(3/4, 1) in E(M)",
        true,
        e.polygon.contains(&PayoffPoint::new(rat(3, 4), int(1))),
    );
    c.expect("babbling value", "1", babbling_value(g));
    c.expect("strict set nonempty", false, e_hat_nonempty(g)?.nonempty);
    Ok(())
}

fn device(g: &GameSpec, c: &mut Checks) -> Result<()> {
    c.expect("babbling value", "1", babbling_value(g));
    let (best, y_star) = max_receiver_payoff(g)?;
    c.expect("max receiver payoff", "7/6", &best);
    c.expect(
        "payoff of the maximizer",
        "(2, 7/6)",
        show(&truthful_payoff(&y_star, g)),
    );
    c.expect("maximizer unique", true, unique_strategy_at_receiver_level(g, &best)?);
    let e = compute_e_polygon(g)?;
    c.expect(
        "(2, 7/6) in E(M)",
        true,
        e.polygon.contains(&PayoffPoint::new(int(2), rat(7, 6))),
    );
    c.expect("strict set nonempty", true, e_hat_nonempty(g)?.nonempty);
    Ok(())
}

fn five_cycle(g: &GameSpec, c: &mut Checks) -> Result<()> {
    c.expect("Assumption A", false, check_assumption_a(&g.chain).holds());
    let r = check_c1(&StationaryStrategy::pure(&[0, 1, 2, 3, 4], 5), g)?;
    c.expect("C1 identity value", "5", &r.identity_value);
    c.expect("C1 best deviation value", "27/5", &r.deviation_value);
    c.expect("C1 holds", false, r.holds);
    let violation = find_property_p_violation(&g.chain, &g.m).map(|(_, v)| v.is_positive());
    c.expect("Property P violated by some copula", true, violation.unwrap_or(false));
    Ok(())
}

type Runner = fn(&GameSpec, &mut Checks) -> Result<()>;

fn runner(file: &str) -> Runner {
    match file {
        "alternation.json" => alternation,
        "triangle.json" => triangle,
        "aligned.json" => aligned,
        "two_state.json" => two_state,
        "device.json" => device,
        "five_cycle.json" => five_cycle,
        other => unreachable!("no checks for {other}"),
    }
}

fn export(dir: &std::path::Path, out: &mut dyn Write) -> Result<()> {
    let io = |source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, text) in BUNDLED {
        std::fs::write(dir.join(name), text).map_err(io)?;
        writeln!(out, "{}", dir.join(name).display()).map_err(io_error)?;
    }
    Ok(())
}

pub fn run(args: &Args, out: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &args.export {
        return export(dir, out);
    }
    let mut games = Vec::new();
    let mut failed = 0;
    for (name, builtin) in BUNDLED {
        let text = match &args.dir {
            Some(dir) => read_file(&dir.join(name))?,
            None => builtin.to_string(),
        };
        let game = parse_game(&text)?;
        let mut checks = Checks::default();
        runner(name)(&game, &mut checks)?;
        failed += checks.0.iter().filter(|o| !o.passed()).count();
        games.push((name, game.label.clone(), checks));
    }

    if args.json {
        let bundle: Vec<Value> = games
            .iter()
            .map(|(name, label, checks)| {
                json!({
                    "file": name,
                    "label": label,
                    "checks": checks.0.iter().map(|o| json!({
                        "check": o.check,
                        "expected": o.expected,
                        "actual": o.actual,
                        "passed": o.passed(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        write_json(out, &json!({ "games": bundle, "failed": failed }))?;
    } else {
        for (name, _, checks) in &games {
            for o in &checks.0 {
                if o.passed() {
                    writeln!(out, "PASS {name}: {} = {}", o.check, o.actual)
                } else {
                    writeln!(
                        out,
                        "FAIL {name}: {}\n  - expected {}\n  + actual   {}",
                        o.check, o.expected, o.actual
                    )
                }
                .map_err(io_error)?;
            }
        }
    }
    match failed {
        0 => Ok(()),
        n => Err(CliError::Mismatch(n)),
    }
}
