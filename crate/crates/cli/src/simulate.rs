use std::io::Write;
use std::path::PathBuf;

use cheaptalk::block_sim::{
    best_reply_sender, equilibrium_gap_report, monte_carlo_payoff, QuotaAutomaton, QuotaState, DEFAULT_BUDGET,
};
use cheaptalk::equilibrium::{compute_e_polygon, e_hat_nonempty};
use cheaptalk::game::{truthful_payoff, GameSpec, StationaryStrategy};
use cheaptalk::rational::{fmt_f64, fmt_rat, parse_rational, to_f64, Rat};
use num_traits::{One, Zero};

use crate::error::{CliError, Result};
use crate::report::load_game;

#[derive(clap::Args)]
pub struct Args {
    file: PathBuf,
    /// Block lengths, comma separated.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    block_lengths: Vec<usize>,
    /// Discount factors, comma separated; read exactly ("0.99" or "99/100").
    #[arg(long, value_delimiter = ',', required = true)]
    delta: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo replications per row; 0 leaves those columns empty.
    #[arg(long, default_value_t = 0)]
    replications: usize,
    /// Weight on the strict witness in the target strategy.
    #[arg(long, default_value = "1/10")]
    epsilon: String,
    /// Periods simulated per replication; by default the first T with delta^T <= 1e-9.
    #[arg(long)]
    horizon: Option<usize>,
    /// Run even when no strict equilibrium strategy exists.
    #[arg(long)]
    force: bool,
}

const HEADER: [&str; 12] = [
    "N",
    "delta",
    "distance_L1",
    "sender_value",
    "receiver_value",
    "receiver_gap",
    "seed",
    "certified",
    "mc_sender",
    "mc_receiver",
    "mc_sender_se",
    "mc_receiver_se",
];

/// `epsilon * y0 + (1 - epsilon) * ybar`, where `ybar` is the polygon vertex
/// best for the sender (ties broken toward the receiver).
pub fn target_strategy(game: &GameSpec, epsilon: &Rat, force: bool) -> Result<StationaryStrategy> {
    let strict = e_hat_nonempty(game)?;
    if !strict.nonempty && !force {
        return Err(CliError::Precondition(
            "no strict equilibrium strategy exists (rerun with --force)".into(),
        ));
    }
    let e = compute_e_polygon(game)?;
    let ybar = e
        .witnesses
        .iter()
        .max_by(|a, b| {
            let (pa, pb) = (truthful_payoff(a, game), truthful_payoff(b, game));
            pa.v1.cmp(&pb.v1).then(pa.v2.cmp(&pb.v2))
        })
        .ok_or_else(|| CliError::Precondition("empty payoff polygon".into()))?;
    Ok(strict.witness.mix(epsilon, ybar))
}

fn default_horizon(delta: f64, block_length: usize) -> usize {
    let t = (1e-9f64.ln() / delta.ln()).ceil() as usize;
    t.max(block_length)
}

pub fn run(args: &Args, out: &mut dyn Write) -> Result<()> {
    let game = load_game(&args.file)?;
    let epsilon = parse_rational(&args.epsilon)?;
    if epsilon <= Rat::zero() || epsilon > Rat::one() {
        return Err(CliError::Argument("--epsilon must lie in (0,1]".into()));
    }
    let deltas = args
        .delta
        .iter()
        .map(|d| parse_rational(d))
        .collect::<cheaptalk::Result<Vec<Rat>>>()?;
    if deltas.iter().any(|d| d <= &Rat::zero() || d >= &Rat::one()) {
        return Err(CliError::Argument("every --delta must lie in (0,1)".into()));
    }
    if args.replications == 1 {
        return Err(CliError::Argument("--replications must be 0 or at least 2".into()));
    }
    let y = target_strategy(&game, &epsilon, args.force)?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for &n in &args.block_lengths {
        for delta in &deltas {
            let r = equilibrium_gap_report(&game, &y, n, delta)?;
            let mut row = vec![
                n.to_string(),
                fmt_rat(delta),
                fmt_rat(&r.distance),
                fmt_rat(&r.sender_value),
                fmt_rat(&r.receiver_value),
                r.receiver_gap.as_ref().map(fmt_rat).unwrap_or_default(),
                args.seed.to_string(),
                r.certified.to_string(),
            ];
            if args.replications > 0 {
                let aut = QuotaAutomaton::new(&game, y.clone(), n)?;
                let best = best_reply_sender(&game, &aut, delta, DEFAULT_BUDGET)?;
                let rule = |q: &QuotaState, s: usize| best.message(q, s);
                let d = to_f64(delta);
                let horizon = args.horizon.unwrap_or_else(|| default_horizon(d, n));
                let mc = monte_carlo_payoff(&game, &aut, &rule, d, horizon, args.replications, args.seed);
                row.extend([mc.mean.0, mc.mean.1, mc.std_error.0, mc.std_error.1].map(fmt_f64));
            } else {
                row.extend(std::iter::repeat_n(String::new(), 4));
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(crate::report::io_error)
}
