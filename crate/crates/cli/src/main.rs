use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use drsim::config::{load_config_from, preset, Override, Preset, SimConfig};
use drsim::harness::{
    env_server, run_episodes, sweep_credit, validate_market, write_frontier_csv, RunOptions, DEFAULT_SWEEP_LEVELS,
};
use drsim::Policy;

#[derive(Parser)]
#[command(name = "drsim", version, about = "Demand-response credit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file, applied on top of the preset.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Starting preset: default, uri_analog or portfolio500.
    #[arg(long, default_value = "default")]
    preset: Preset,
    /// Override a configuration key, e.g. `--set price.rho=0.85`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<Override>,
    /// Master seed (episode i of a batch uses seed + i).
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<Arc<SimConfig>> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(Override::new("seed", seed.to_string()));
        }
        let cfg = load_config_from(preset(self.preset), self.config.as_deref(), &overrides)
            .context("invalid configuration")?;
        Ok(Arc::new(cfg))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes under a policy; prints the summary as JSON.
    Run {
        #[command(flatten)]
        common: Common,
        /// nocredit, uniform[:c], rule, budget-rule or random.
        #[arg(long, default_value = "nocredit")]
        policy: Policy,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        /// Per-step JSONL trajectory file.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write the summary JSON here.
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
        /// Run episodes on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Market statistics over an agent-free price trace.
    ValidateMarket {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4380)]
        steps: usize,
        /// Report JSON file (stdout if absent).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Uniform-credit sweep with matched seeds; writes a CSV frontier.
    SweepCredit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated credit levels in $/kWh.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_LEVELS)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        /// CSV file (stdout if absent).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Serve one environment over newline-delimited JSON on stdin/stdout.
    EnvServer {
        #[command(flatten)]
        common: Common,
    },
    /// Print a preset as TOML.
    Preset {
        /// Preset to print; omit to list the names.
        name: Option<Preset>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn emit_json(value: &impl serde::Serialize, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("cannot write {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            policy,
            episodes,
            out,
            summary,
            serial,
        } => {
            let cfg = common.load()?;
            let mut opts = RunOptions::new(episodes, cfg.seed);
            opts.parallel = !serial;
            let mut writer = out.as_deref().map(create).transpose()?;
            let result = run_episodes(
                cfg,
                policy,
                &opts,
                writer.as_mut().map(|w| w as &mut dyn Write),
            )?;
            if let Some(path) = summary.as_deref() {
                emit_json(&result, Some(path))?;
            }
            emit_json(&result, None)
        }
        Command::ValidateMarket { common, steps, out } => {
            let cfg = common.load()?;
            let report = validate_market(&cfg, steps)?;
            emit_json(&report, out.as_deref())
        }
        Command::SweepCredit {
            common,
            levels,
            episodes,
            out,
        } => {
            let cfg = common.load()?;
            let seed = cfg.seed;
            let points = sweep_credit(cfg, &levels, episodes, seed)?;
            match out.as_deref() {
                Some(p) => write_frontier_csv(&points, create(p)?)?,
                None => write_frontier_csv(&points, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::EnvServer { common } => {
            let cfg = common.load()?;
            let stdin = io::stdin();
            env_server(cfg, BufReader::new(stdin.lock()), io::stdout().lock())?;
            Ok(())
        }
        Command::Preset { name } => {
            match name {
                Some(p) => print!("{}", preset(p).to_toml_string()),
                None => {
                    for p in Preset::ALL {
                        println!("{p}");
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rejects_bad_policy_and_override() {
        assert!(Cli::try_parse_from(["drsim", "run", "--policy", "greedy"]).is_err());
        assert!(Cli::try_parse_from(["drsim", "run", "--set", "novalue"]).is_err());
        assert!(Cli::try_parse_from(["drsim", "run", "--preset", "nope"]).is_err());
    }

    #[test]
    fn seed_flag_wins_over_set() {
        let cli = Cli::try_parse_from(["drsim", "run", "--set", "seed=5", "--seed", "9"]).unwrap();
        let Command::Run { common, .. } = cli.command else {
            panic!("expected run");
        };
        assert_eq!(common.load().unwrap().seed, 9);
    }
}
