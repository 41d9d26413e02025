use std::io::Write;
use std::path::PathBuf;

use cheaptalk::copula::{mu_zero, sample_copula, swap_copula, Copula};
use cheaptalk::coupling::{
    build_kernel_unchecked, check_property_p, exact_law_check, find_property_p_violation, kernel_claims,
    payoff_identity_check,
};
use cheaptalk::game::{GameSpec, StationaryStrategy};
use cheaptalk::gamefile::parse_matrix;
use cheaptalk::rational::{fmt_f64, Rat};
use cheaptalk::Error as CoreError;
use serde_json::{json, Value};

use crate::error::{read_file, CliError, Result};
use crate::report::{load_game, matrix, point, rat, strategy, write_json};

#[derive(clap::Args)]
pub struct Args {
    file: PathBuf,
    /// mu0, swap (states 0 and 1), swap:I,J, random, violating, or a JSON matrix file.
    #[arg(long, default_value = "mu0")]
    copula: String,
    /// Horizon of the exact path-law check.
    #[arg(long, default_value_t = 4)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replications for the payoff-identity simulation; 0 skips it.
    #[arg(long, default_value_t = 2000)]
    replications: usize,
    #[arg(long, default_value_t = 0.9)]
    delta: f64,
    /// Periods simulated per replication.
    #[arg(long, default_value_t = 200)]
    sim_horizon: usize,
}

fn swap_states(spec: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || {
        CliError::Argument(format!(
            "expected swap:I,J with distinct states below {n}, got {spec:?}"
        ))
    };
    let (i, j) = match spec.strip_prefix("swap:") {
        Some(rest) => {
            let (i, j) = rest.split_once(',').ok_or_else(bad)?;
            (
                i.trim().parse().map_err(|_| bad())?,
                j.trim().parse().map_err(|_| bad())?,
            )
        }
        None => (0, 1),
    };
    if i >= n || j >= n || i == j {
        return Err(bad());
    }
    Ok((i, j))
}

pub fn select_copula(spec: &str, game: &GameSpec, seed: u64) -> Result<Copula> {
    let m = &game.m;
    match spec {
        "mu0" => Ok(mu_zero(m)),
        "random" => Ok(sample_copula(m, seed)),
        "violating" => find_property_p_violation(&game.chain, m)
            .map(|(mu, _)| mu)
            .ok_or_else(|| CliError::Precondition("every copula satisfies Property P on this chain".into())),
        s if s == "swap" || s.starts_with("swap:") => {
            let (i, j) = swap_states(s, m.len())?;
            Ok(swap_copula(m, i, j))
        }
        path => Ok(Copula::new(parse_matrix(&read_file(path.as_ref())?)?, m)?),
    }
}

/// Announcement `a` is answered with the receiver's best action in state `a`.
pub fn myopic_receiver(game: &GameSpec) -> StationaryStrategy {
    let actions: Vec<usize> = game
        .u2
        .iter()
        .map(|row| {
            let best = row.iter().max().expect("at least one action");
            row.iter().position(|x| x == best).unwrap_or(0)
        })
        .collect();
    StationaryStrategy::pure(&actions, game.n_actions())
}

fn claims(c: &[Rat; 4]) -> Value {
    json!({
        "state_pair_marginal": rat(&c[0]),
        "fictitious_transition_marginal": rat(&c[1]),
        "pushed_forward_marginal": rat(&c[2]),
        "state_given_fictitious_pair": rat(&c[3]),
    })
}

pub fn run(args: &Args, out: &mut dyn Write) -> Result<()> {
    let game = load_game(&args.file)?;
    let mu = select_copula(&args.copula, &game, args.seed)?;
    let p = check_property_p(&mu, &game.chain, &game.m);
    let kernel = build_kernel_unchecked(&mu, &game.chain, &game.m);

    let law = match exact_law_check(&kernel, &mu, &game.chain, &game.m, args.horizon) {
        Ok(r) => json!({
            "horizon": r.horizon,
            "all_hold": r.all_hold(),
            "kernel_law": rat(&r.kernel_law),
            "p1_conditional_independence": rat(&r.p1),
            "p2_fictitious_chain_law": rat(&r.p2),
            "p2_first_failure": r.p2_first_failure,
            "p3_stage_pair_law": rat(&r.p3),
            "p4_state_given_history": rat(&r.p4),
            "undefined_mass": rat(&r.undefined_mass),
        }),
        Err(e @ (CoreError::CapExceeded { .. } | CoreError::Precondition(_))) => json!({ "skipped": e.to_string() }),
        Err(e) => return Err(e.into()),
    };

    let identity = if !p.holds {
        json!({ "skipped": "Property P fails, the fictitious process is not a Markov chain" })
    } else if args.replications == 0 {
        json!({ "skipped": "no replications requested" })
    } else {
        let y = myopic_receiver(&game);
        let r = payoff_identity_check(
            &game,
            &y,
            &mu,
            args.delta,
            args.sim_horizon,
            args.replications,
            args.seed,
        )?;
        json!({
            "receiver_strategy": strategy(&y),
            "analytic": point(&r.analytic),
            "simulated": [fmt_f64(r.simulated.0), fmt_f64(r.simulated.1)],
            "std_error": [fmt_f64(r.std_error.0), fmt_f64(r.std_error.1)],
            "gap": fmt_f64(r.gap),
            "bound": fmt_f64(r.bound),
            "within": r.within,
        })
    };

    let report = json!({
        "copula": matrix(mu.matrix()),
        "property_p": {
            "holds": p.holds,
            "worst_violation": rat(&p.worst_violation),
            "worst_cell": [p.worst_cell.0, p.worst_cell.1],
        },
        "kernel_violations": claims(&kernel_claims(&kernel, &mu, &game.chain, &game.m)),
        "law": law,
        "payoff_identity": identity,
    });
    write_json(out, &report)
}
