use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use wsnsim_core::config::parse_config;
use wsnsim_core::harness::{run_matrix, write_outputs};
use wsnsim_core::{RunOutcome, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "wsnsim",
    version,
    about = "Clustering protocol simulator for wireless sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single protocol / sink / seed scenario.
    Run(ScenarioArgs),
    /// Run every protocol × sink × seed combination.
    Compare(ScenarioArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Protocol list: leach, teen, deec, hteen, campteen or `all`.
    #[arg(long)]
    protocol: Option<String>,
    /// Sink mode list: static_center, static_top, mobile_top or `all`.
    #[arg(long)]
    sink: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    /// Field side length in meters.
    #[arg(long)]
    field: Option<String>,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<String>,
    /// Seed list, e.g. `1,2,5-9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Extra `key=value` override; repeatable, applied after the other flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum Stage {
    Config,
    Simulation,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Simulation => "simulation",
            Stage::Output => "output",
        })
    }
}

struct Failure {
    stage: Stage,
    error: anyhow::Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, Failure> {
        self.map_err(|e| Failure { stage, error: e.into() })
    }
}

fn load_config(args: &ScenarioArgs) -> anyhow::Result<ScenarioConfig> {
    let file_text = match &args.config {
        Some(path) => Some(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };
    let flags = [
        ("protocol", &args.protocol),
        ("sink", &args.sink),
        ("rounds", &args.rounds),
        ("nodes", &args.nodes),
        ("field", &args.field),
        ("seed", &args.seed),
        ("seeds", &args.seeds),
    ];
    let mut overrides: Vec<(String, String)> = flags
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
    for item in &args.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{item}`"))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(parse_config(file_text.as_deref(), &overrides)?)
}

fn print_table(outcomes: &[RunOutcome]) {
    println!(
        "{:<9} {:<13} {:>6} {:>9} {:>10} {:>9} {:>11} {:>12}",
        "protocol", "sink", "seed", "stability", "lifetime", "avg_alive", "throughput", "avg_thrpt"
    );
    for o in outcomes {
        let s = &o.summary;
        let stability = s.stability_period.map_or("-".to_string(), |r| r.to_string());
        let lifetime = match s.lifetime {
            wsnsim_core::Lifetime::LastDeath(r) => r.to_string(),
            wsnsim_core::Lifetime::Survived(r) => format!(">={r}"),
        };
        println!(
            "{:<9} {:<13} {:>6} {:>9} {:>10} {:>9.2} {:>11} {:>12.1}",
            s.protocol.name(),
            s.sink_mode.name(),
            s.seed,
            stability,
            lifetime,
            s.avg_alive,
            s.total_throughput,
            s.avg_throughput
        );
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    let (args, single) = match command {
        Command::Run(a) => (a, true),
        Command::Compare(a) => (a, false),
    };
    let config = load_config(&args).at(Stage::Config)?;
    if single {
        let count = |n: usize, what: &str| {
            if n == 1 {
                Ok(())
            } else {
                Err(anyhow!(
                    "`run` needs exactly one {what}, got {n}; use `compare` for several"
                ))
            }
        };
        count(config.protocols.len(), "protocol").at(Stage::Config)?;
        count(config.sink_modes.len(), "sink mode").at(Stage::Config)?;
        count(config.seeds.len(), "seed").at(Stage::Config)?;
    }

    let outcomes = run_matrix(&config, &config.protocols, &config.sink_modes, &config.seeds).at(Stage::Simulation)?;
    let written = write_outputs(&outcomes, &args.out_dir).at(Stage::Output)?;

    print_table(&outcomes);
    println!(
        "wrote {} files to {} (config {})",
        written.len(),
        args.out_dir.display(),
        config.fingerprint()
    );
    Ok(())
}

fn exit_code(stage: Stage) -> u8 {
    match stage {
        Stage::Config => 2,
        Stage::Simulation => 3,
        Stage::Output => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wsnsim: {} stage failed: {:#}", f.stage, f.error);
            ExitCode::from(exit_code(f.stage))
        }
    }
}
