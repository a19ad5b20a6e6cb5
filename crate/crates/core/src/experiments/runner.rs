use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AgentKind, ExperimentConfig};
use super::metrics::{summarize, write_csv, MetricsRow, SummaryRow};
use crate::agents::{evaluate_policy, train, CurvePoint, GreedyPlacer, RandomPlacer, TrainingOutcome};
use crate::error::{Error, Result};
use crate::model::{Assignment, Placement, SfcRequest};
use crate::nn::{checkpoint, Mlp};
use crate::rbd;
use crate::sim::{Placer, Simulation};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const CURVE_FILE: &str = "curve.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SERIES_FILE: &str = "series.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Trains the configured agent and writes the checkpoint, the learning curve and
/// the configuration used into `out`.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<TrainingOutcome> {
    cfg.validate()?;
    let outcome = train(&cfg.env_config()?, &cfg.train_config()?)?;
    create_dir(out)?;
    checkpoint::save(&outcome.net, &out.join(CHECKPOINT_FILE))?;
    write_csv(&out.join(CURVE_FILE), &outcome.curve)?;
    write_json(&out.join("config.json"), cfg)?;
    Ok(outcome)
}

/// Seed of evaluation repetition `rep`.
pub fn evaluation_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    cfg.seed.wrapping_add(rep as u64)
}

/// One evaluation horizon with a fixed seed. Learning agents need `net` and act
/// with their most likely action.
pub fn evaluate_once(cfg: &ExperimentConfig, net: Option<&Mlp>, seed: u64, run_id: String) -> Result<MetricsRow> {
    let scenario = cfg.scenario_label();
    let agent = cfg.agent.label();
    if cfg.agent.is_learning() {
        let net = net.ok_or_else(|| Error::Usage(format!("agent {agent} needs a checkpoint")))?;
        let stats = evaluate_policy(&cfg.env_config()?, net, seed, cfg.horizon_hours)?;
        return Ok(MetricsRow::from_episode(run_id, seed, scenario, agent, &stats));
    }
    let mut placer: Box<dyn Placer> = match cfg.agent {
        AgentKind::Greedy => Box::new(GreedyPlacer::new(seed)),
        _ => Box::new(RandomPlacer::new(seed)),
    };
    let mut sim = Simulation::new(cfg.sim_config()?, seed)?;
    let report = sim.run_until(cfg.horizon_hours, placer.as_mut())?;
    Ok(MetricsRow::from_report(run_id, seed, scenario, agent, &report))
}

/// `repetitions` evaluation runs, in parallel, rows in repetition order.
pub fn evaluate_runs(cfg: &ExperimentConfig, net: Option<&Mlp>, prefix: &str) -> Result<Vec<MetricsRow>> {
    (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let id = format!("{prefix}{}-{}-{rep:03}", cfg.scenario_label(), cfg.agent.label());
            evaluate_once(cfg, net, evaluation_seed(cfg, rep), id)
        })
        .collect()
}

fn group_key(row: &MetricsRow) -> String {
    format!("{}/{}", row.scenario, row.agent)
}

/// Summary rows keyed by `scenario/agent`.
pub fn summarize_rows(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    summarize(rows.iter().map(|r| (group_key(r), r)))
}

/// Evaluates a checkpoint (learning agents) or a baseline over `repetitions`
/// seeds; writes `metrics.csv` and `summary.csv`.
pub fn cmd_evaluate(cfg: &ExperimentConfig, checkpoint_path: Option<&Path>, out: &Path) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let net = match (cfg.agent.is_learning(), checkpoint_path) {
        (true, Some(p)) => {
            if !p.exists() {
                return Err(Error::Usage(format!("checkpoint {} does not exist", p.display())));
            }
            Some(checkpoint::load(p)?)
        }
        (true, None) => {
            return Err(Error::Usage(format!(
                "agent {} needs --checkpoint",
                cfg.agent.label()
            )))
        }
        (false, _) => None,
    };
    let rows = evaluate_runs(cfg, net.as_ref(), "")?;
    create_dir(out)?;
    write_csv(&out.join(METRICS_FILE), &rows)?;
    write_csv(&out.join(SUMMARY_FILE), &summarize_rows(&rows))?;
    Ok(rows)
}

/// Learning curve of one sweep cell averaged over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvePoint {
    pub step: u64,
    pub runs: usize,
    pub cumulative_reward: f64,
    /// Mean over runs that finished an episode in the interval.
    pub mean_episode_reward: Option<f64>,
    pub mean_step_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub learning_rate: f64,
    pub gamma: f64,
    pub runs: usize,
    pub final_cumulative_reward: f64,
    pub final_mean_step_reward: f64,
    pub curve_file: String,
}

fn mean_curve(curves: &[Vec<CurvePoint>]) -> Vec<MeanCurvePoint> {
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let pts: Vec<&CurvePoint> = curves.iter().map(|c| &c[i]).collect();
            let n = pts.len() as f64;
            let eps: Vec<f64> = pts.iter().filter_map(|p| p.mean_episode_reward).collect();
            MeanCurvePoint {
                step: pts[0].step,
                runs: pts.len(),
                cumulative_reward: pts.iter().map(|p| p.cumulative_reward).sum::<f64>() / n,
                mean_episode_reward: (!eps.is_empty()).then(|| eps.iter().sum::<f64>() / eps.len() as f64),
                mean_step_reward: pts.iter().map(|p| p.mean_step_reward).sum::<f64>() / n,
            }
        })
        .collect()
}

fn cell_config(cfg: &ExperimentConfig, lr: f64, gamma: f64, rep: usize) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.ppo2.learning_rate = lr;
    c.ppo2.gamma = gamma;
    c.a2c.learning_rate = lr;
    c.a2c.gamma = gamma;
    c.seed = cfg.seed.wrapping_add(rep as u64);
    c
}

/// Trains `repetitions` agents per (learning rate, γ) cell and writes one mean
/// curve file per cell plus `sweep_summary.csv`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    cfg.train_config()?;
    let env = cfg.env_config()?;
    let mut jobs = Vec::new();
    for &lr in &cfg.sweep.learning_rates {
        for &gamma in &cfg.sweep.gammas {
            for rep in 0..cfg.repetitions {
                jobs.push((lr, gamma, rep));
            }
        }
    }
    let curves = jobs
        .par_iter()
        .map(|&(lr, gamma, rep)| {
            let c = cell_config(cfg, lr, gamma, rep);
            train(&env, &c.train_config()?).map(|o| o.curve)
        })
        .collect::<Result<Vec<_>>>()?;

    create_dir(out)?;
    let mut cells = Vec::new();
    for (chunk, job) in curves.chunks(cfg.repetitions).zip(jobs.chunks(cfg.repetitions)) {
        let (lr, gamma, _) = job[0];
        let mean = mean_curve(chunk);
        let name = format!("curve_lr{lr}_gamma{gamma}.csv");
        write_csv(&out.join(&name), &mean)?;
        let last = mean.last();
        cells.push(SweepCell {
            learning_rate: lr,
            gamma,
            runs: chunk.len(),
            final_cumulative_reward: last.map_or(0.0, |p| p.cumulative_reward),
            final_mean_step_reward: last.map_or(0.0, |p| p.mean_step_reward),
            curve_file: name,
        });
    }
    write_csv(&out.join(SWEEP_SUMMARY_FILE), &cells)?;
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesAxis {
    Theta,
    Customers,
    Capacity,
}

impl SeriesAxis {
    pub fn label(self) -> &'static str {
        match self {
            SeriesAxis::Theta => "theta",
            SeriesAxis::Customers => "customers",
            SeriesAxis::Capacity => "capacity",
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: f64) -> Result<()> {
        let whole = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as u64)
            } else {
                Err(Error::Config(format!("{} values must be positive integers, got {value}", self.label())))
            }
        };
        match self {
            SeriesAxis::Theta => cfg.availability_requirement = Some(value),
            SeriesAxis::Customers => cfg.customers = Some(whole()? as usize),
            SeriesAxis::Capacity => cfg.capacity = Some(whole()? as u32),
        }
        Ok(())
    }
}

/// Train (learning agents) and evaluate once per axis value. Rows carry the
/// scenario label `axis=value`; all rows go to `series.csv`, statistics per
/// value to `summary.csv`.
pub fn cmd_scenario_series(cfg: &ExperimentConfig, axis: SeriesAxis, values: &[f64], out: &Path) -> Result<Vec<MetricsRow>> {
    if values.is_empty() {
        return Err(Error::Usage("scenario series needs at least one value".into()));
    }
    let mut rows = Vec::new();
    for &v in values {
        let mut c = cfg.clone();
        axis.apply(&mut c, v)?;
        c.validate()?;
        let net = if c.agent.is_learning() {
            Some(train(&c.env_config()?, &c.train_config()?)?.net)
        } else {
            None
        };
        let label = format!("{}={v}", axis.label());
        for mut row in evaluate_runs(&c, net.as_ref(), "")? {
            row.run_id = format!("{label}-{}", row.run_id);
            row.scenario = label.clone();
            rows.push(row);
        }
    }
    create_dir(out)?;
    write_csv(&out.join(SERIES_FILE), &rows)?;
    write_csv(&out.join(SUMMARY_FILE), &summarize_rows(&rows))?;
    Ok(rows)
}

/// Structure and availability of a hand-written placement on the configured
/// infrastructure. Each assignment is `(server, replicas)`.
pub fn cmd_rbd(cfg: &ExperimentConfig, assignments: &[(usize, u32)]) -> Result<(String, f64)> {
    let sim = cfg.sim_config()?;
    let infra = crate::model::build_infrastructure(&sim.infrastructure)?;
    let request = SfcRequest {
        id: 0,
        customer: 0,
        vnf_sequence: vec![0; assignments.len()],
        availability_requirement: cfg.theta(),
        arrival_time: 0.0,
        lifetime: 0.0,
    };
    let mut placement = Placement::new(&request);
    for &(server, replicas) in assignments {
        if server >= infra.len() {
            return Err(Error::Usage(format!("server {server} out of range (0..{})", infra.len())));
        }
        if replicas == 0 {
            return Err(Error::Usage("replicas must be at least 1".into()));
        }
        placement.assignments.push(Assignment { server, replicas });
    }
    let block = rbd::sfc_rbd(&placement, &infra, sim.vnf_availability()?)?;
    let value = block.evaluate();
    Ok((block.to_string(), value))
}
