//! `coalform`: stability and equilibrium analysis for the congestion game and
//! the Kelly resource sharing game.
//!
//! Exit status: 0 on success, 2 for input errors, 3 when a size cap refuses
//! the request, 1 otherwise.

mod fail;
mod kelly_cmd;
mod queue_cmd;
mod report;
mod scenario;
mod sweep;
mod system;
mod table;

use clap::{Parser, Subcommand};

use crate::fail::{input, CliError, EXIT_INPUT};
use crate::scenario::{Flags, Game, Scenario};

#[derive(Debug, Parser)]
#[command(name = "coalform", version, about = "Coalition formation analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Wardrop split of a partition: per-coalition rates and the common blocking
    We,
    /// Verdict per partition and payoff rule (queue or kelly)
    Stability,
    /// Long-format sweep along an axis
    Sweep,
    /// Seeded blocking dynamics; JSONL traces and a CSV summary
    Dynamics,
    /// NE partitions of the Kelly game (n ≤ 5)
    KellyNe,
    /// U/C-stability with Shapley shares for every partition
    KellyStability,
    /// JSON summary of a system
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    system::set_jobs(cli.flags.jobs)?;
    let sc = Scenario::resolve(&cli.flags)?;
    let need = |g: Game| -> Result<(), CliError> {
        match sc.game()? {
            x if x == g => Ok(()),
            _ => Err(input(format!("this command needs the {g:?} game").to_lowercase())),
        }
    };
    match cli.cmd {
        Cmd::We => need(Game::Queue).and_then(|_| queue_cmd::we(&sc)),
        Cmd::Stability => match sc.game()? {
            Game::Queue => queue_cmd::stability(&sc),
            Game::Kelly => kelly_cmd::stability(&sc),
        },
        Cmd::Sweep => sweep::sweep(&sc),
        Cmd::Dynamics => need(Game::Queue).and_then(|_| queue_cmd::dynamics(&sc)),
        Cmd::KellyNe => need(Game::Kelly).and_then(|_| kelly_cmd::kelly_ne(&sc)),
        Cmd::KellyStability => need(Game::Kelly).and_then(|_| kelly_cmd::kelly_stability(&sc)),
        Cmd::Report => report::report(&sc),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        if e.is_broken_pipe() {
            return;
        }
        eprintln!("coalform: {e}");
        std::process::exit(e.exit_code());
    }
}
