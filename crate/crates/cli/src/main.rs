use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sfcrl::experiments::{
    cmd_evaluate, cmd_rbd, cmd_report, cmd_scenario_series, cmd_sweep, cmd_train, load_config, AgentKind,
    ExperimentConfig, Scenario, SeriesAxis, SummaryRow, CHECKPOINT_FILE, SWEEP_TRAINING_STEPS,
};

#[derive(Parser)]
#[command(name = "sfcrl", version, about = "Availability- and energy-aware SFC placement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a PPO2 or A2C agent; writes model.ckpt, curve.csv and config.json.
    Train(RunArgs),
    /// Evaluate a checkpoint or a baseline; writes metrics.csv and summary.csv.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Checkpoint of a trained agent (defaults to <out>/model.ckpt).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Learning-rate × discount grid; one mean curve file per cell.
    Sweep(RunArgs),
    /// Train and evaluate once per value of one scenario parameter.
    ScenarioSeries {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values, e.g. 0.9995,0.99955,0.9996.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Recompute statistics from a metrics or series CSV.
    Report {
        #[arg(long)]
        metrics: PathBuf,
        /// Where to write the recomputed summary CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional acceptance-rate box plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print the reliability block diagram and availability of a placement.
    Rbd {
        #[command(flatten)]
        source: ConfigSource,
        /// `server:replicas` per VNF, e.g. 0:1,0:2,5:1.
        #[arg(long, value_delimiter = ',', required = true)]
        placement: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Theta,
    Customers,
    Capacity,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Table1,
    Table3,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Ppo2,
    A2c,
    Greedy,
    Random,
}

#[derive(Args)]
struct ConfigSource {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset when no config file is given.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Overrides the configured agent.
    #[arg(long, value_enum)]
    agent: Option<AgentArg>,
    /// Replace the topology with this many generated servers.
    #[arg(long)]
    servers: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: ConfigSource,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Training steps.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    horizon_hours: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ConfigSource {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.scenario) {
            (Some(path), None) => load_config(path)?,
            (Some(_), Some(_)) => bail!("--scenario cannot be combined with --config"),
            (None, scenario) => {
                let scenario = match scenario.unwrap_or(ScenarioArg::Table1) {
                    ScenarioArg::Table1 => Scenario::Table1,
                    ScenarioArg::Table3 => Scenario::Table3,
                    ScenarioArg::Custom => Scenario::Custom,
                };
                ExperimentConfig::new(scenario, AgentKind::Greedy)
            }
        };
        if let Some(a) = self.agent {
            cfg.agent = match a {
                AgentArg::Ppo2 => AgentKind::Ppo2,
                AgentArg::A2c => AgentKind::A2c,
                AgentArg::Greedy => AgentKind::Greedy,
                AgentArg::Random => AgentKind::Random,
            };
        }
        if self.servers.is_some() {
            cfg.servers = self.servers;
        }
        Ok(cfg)
    }
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = self.source.load()?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        if let Some(s) = self.steps {
            cfg.training_steps = s;
        }
        if let Some(h) = self.horizon_hours {
            cfg.horizon_hours = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_summary(rows: &[SummaryRow]) {
    println!("{:<28} {:<24} {:>5} {:>14} {:>14} {:>14}", "group", "metric", "n", "median", "mean", "std");
    for r in rows {
        println!(
            "{:<28} {:<24} {:>5} {:>14.6} {:>14.6} {:>14.6e}",
            r.group, r.metric, r.count, r.median, r.mean, r.std
        );
    }
}

fn parse_placement(items: &[String]) -> Result<Vec<(usize, u32)>> {
    items
        .iter()
        .map(|item| {
            let (s, q) = item
                .split_once(':')
                .with_context(|| format!("expected server:replicas, got {item:?}"))?;
            Ok((s.trim().parse()?, q.trim().parse()?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.config()?;
            let outcome = cmd_train(&cfg, &args.out)?;
            let last = outcome.curve.last();
            println!(
                "trained {} for {} steps ({} updates, {} episodes); cumulative reward {:.3}",
                cfg.agent.label(),
                outcome.steps,
                outcome.updates,
                outcome.episodes.len(),
                last.map_or(0.0, |p| p.cumulative_reward)
            );
            println!("wrote {}", args.out.display());
        }
        Command::Evaluate { run, checkpoint } => {
            let cfg = run.config()?;
            let default_ckpt = run.out.join(CHECKPOINT_FILE);
            let ckpt: Option<&Path> = match &checkpoint {
                Some(p) => Some(p),
                None if cfg.agent.is_learning() => Some(&default_ckpt),
                None => None,
            };
            let rows = cmd_evaluate(&cfg, ckpt, &run.out)?;
            print_summary(&sfcrl::experiments::summarize_rows(&rows));
        }
        Command::Sweep(args) => {
            let mut cfg = args.config()?;
            if args.steps.is_none() {
                cfg.training_steps = SWEEP_TRAINING_STEPS;
            }
            for cell in cmd_sweep(&cfg, &args.out)? {
                println!(
                    "lr {:<8} gamma {:<5} runs {:>3} final cumulative reward {:>14.3}",
                    cell.learning_rate, cell.gamma, cell.runs, cell.final_cumulative_reward
                );
            }
        }
        Command::ScenarioSeries { run, axis, values } => {
            let cfg = run.config()?;
            let axis = match axis {
                Axis::Theta => SeriesAxis::Theta,
                Axis::Customers => SeriesAxis::Customers,
                Axis::Capacity => SeriesAxis::Capacity,
            };
            let rows = cmd_scenario_series(&cfg, axis, &values, &run.out)?;
            print_summary(&sfcrl::experiments::summarize_rows(&rows));
        }
        Command::Report { metrics, out, svg } => {
            let rows = cmd_report(&metrics, out.as_deref(), svg.as_deref())?;
            print_summary(&rows);
        }
        Command::Rbd { source, placement } => {
            let cfg = source.load()?;
            let (diagram, availability) = cmd_rbd(&cfg, &parse_placement(&placement)?)?;
            println!("{diagram}");
            println!("availability {availability:.15}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
