//! Scenario files and their merge with command-line flags.
//!
//! A scenario is TOML with a `schema` version and four optional tables:
//! `system`, `analysis`, `sweep` and `output`. Flags always win over the file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::fail::{input, CliError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Game {
    Queue,
    Kelly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Gbpa,
    Rbpa,
    Rbia,
    Ustable,
    Cstable,
}

impl RuleArg {
    pub fn name(self) -> &'static str {
        match self {
            RuleArg::Gbpa => "gbpa",
            RuleArg::Rbpa => "rbpa",
            RuleArg::Rbia => "rbia",
            RuleArg::Ustable => "ustable",
            RuleArg::Cstable => "cstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Market size Λ (queue)
    Lambda,
    /// Servers of agent 1 (queue, two-coalition partitions under RB-PA)
    N1,
    /// Larger-side server count k for Ψ(k)/Λ (queue)
    Psi,
    /// δ in λ_j = base − α_j δ (kelly)
    Delta,
    /// Adamant strength η (kelly)
    Eta,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    schema: u32,
    game: Option<Game>,
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    analysis: AnalysisSection,
    sweep: Option<SweepSection>,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    servers: Option<Vec<u32>>,
    lambda: Option<f64>,
    mu: Option<f64>,
    influence: Option<Vec<f64>>,
    eta: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisSection {
    partition: Option<String>,
    rule: Option<RuleArg>,
    payoff: Option<String>,
    seed: Option<u64>,
    runs: Option<usize>,
    max_steps: Option<usize>,
    stable_only: Option<bool>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Option<Axis>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    pub points: Option<usize>,
    pub log: Option<bool>,
    pub alpha: Option<Vec<f64>>,
    pub base: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<PathBuf>,
    format: Option<Format>,
}

/// Flags shared by every subcommand.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// TOML scenario file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub game: Option<Game>,
    /// Servers per agent, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub servers: Option<Vec<u32>>,
    /// Market size Λ
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Service rate per server
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Influence factors λ_i, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub influence: Option<Vec<f64>>,
    /// Adamant player strength (factor η·max λ_i)
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Partition text such as "{{1,2},{3}}"
    #[arg(long, global = true)]
    pub partition: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub rule: Option<RuleArg>,
    /// proportional, shapley, or file:PATH (one payoff per agent)
    #[arg(long, global = true)]
    pub payoff: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    /// Output path (a directory for dynamics)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Emit only stable rows
    #[arg(long, global = true)]
    pub stable_only: bool,
    #[arg(long, global = true, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Log-spaced grid between --from and --to
    #[arg(long, global = true)]
    pub log: bool,
    /// δ-family coefficients α_j, comma separated
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// δ-family base value
    #[arg(long, global = true)]
    pub base: Option<f64>,
    /// Re-run the seeds of a trace file and compare byte for byte
    #[arg(long, global = true, value_name = "TRACES")]
    pub replay: Option<PathBuf>,
}

/// Flags merged over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Scenario {
    pub game: Option<Game>,
    pub servers: Option<Vec<u32>>,
    pub lambda: Option<f64>,
    pub mu: f64,
    pub influence: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub gamma: f64,
    pub partition: Option<String>,
    pub rule: Option<RuleArg>,
    pub payoff: Option<String>,
    pub seed: u64,
    pub runs: usize,
    pub max_steps: Option<usize>,
    pub stable_only: bool,
    pub sweep: SweepSection,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub replay: Option<PathBuf>,
    /// Directory of the scenario file; relative `file:` payoff paths resolve here.
    pub base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn resolve(flags: &Flags) -> Result<Scenario, CliError> {
        let (file, base_dir) = match &flags.scenario {
            Some(path) => (read_file(path)?, path.parent().map(Path::to_path_buf)),
            None => (File::default(), None),
        };
        let sweep_file = file.sweep.unwrap_or_default();
        Ok(Scenario {
            game: flags.game.or(file.game),
            servers: flags.servers.clone().or(file.system.servers),
            lambda: flags.lambda.or(file.system.lambda),
            mu: flags.mu.or(file.system.mu).unwrap_or(1.0),
            influence: flags.influence.clone().or(file.system.influence),
            eta: flags.eta.or(file.system.eta),
            gamma: flags.gamma.or(file.system.gamma).unwrap_or(1.0),
            partition: flags.partition.clone().or(file.analysis.partition),
            rule: flags.rule.or(file.analysis.rule),
            payoff: flags.payoff.clone().or(file.analysis.payoff),
            seed: flags.seed.or(file.analysis.seed).unwrap_or(0),
            runs: flags.runs.or(file.analysis.runs).unwrap_or(1),
            max_steps: flags.max_steps.or(file.analysis.max_steps),
            stable_only: flags.stable_only || file.analysis.stable_only.unwrap_or(false),
            sweep: SweepSection {
                axis: flags.axis.or(sweep_file.axis),
                from: flags.from.or(sweep_file.from),
                to: flags.to.or(sweep_file.to),
                step: flags.step.or(sweep_file.step),
                points: flags.points.or(sweep_file.points),
                log: Some(flags.log || sweep_file.log.unwrap_or(false)),
                alpha: flags.alpha.clone().or(sweep_file.alpha),
                base: flags.base.or(sweep_file.base),
            },
            out: flags.out.clone().or(file.output.path),
            format: flags.format.or(file.output.format).unwrap_or_default(),
            replay: flags.replay.clone(),
            base_dir,
        })
    }

    pub fn servers(&self) -> Result<&[u32], CliError> {
        self.servers.as_deref().ok_or_else(|| input("--servers is required for the queue game"))
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        self.lambda.ok_or_else(|| input("--lambda is required for the queue game"))
    }

    pub fn influence(&self) -> Result<&[f64], CliError> {
        self.influence
            .as_deref()
            .ok_or_else(|| input("--influence is required for the kelly game"))
    }

    /// The game named explicitly, else inferred from which parameters are present.
    pub fn game(&self) -> Result<Game, CliError> {
        if let Some(g) = self.game {
            return Ok(g);
        }
        match (self.servers.is_some(), self.influence.is_some()) {
            (true, false) => Ok(Game::Queue),
            (false, true) => Ok(Game::Kelly),
            (true, true) => Err(input("both --servers and --influence given; pick one with --game")),
            (false, false) => Err(input("no system given: pass --servers or --influence")),
        }
    }
}

fn read_file(path: &Path) -> Result<File, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let file: File = toml::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if file.schema != SCHEMA_VERSION {
        return Err(input(format!(
            "{}: schema {} is not supported (expected {SCHEMA_VERSION})",
            path.display(),
            file.schema
        )));
    }
    Ok(file)
}
