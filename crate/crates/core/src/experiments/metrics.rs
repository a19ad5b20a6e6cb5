use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::env::EpisodeStats;
use crate::error::{Error, Result};
use crate::sim::SimulationReport;

/// Outcome of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub scenario: String,
    pub agent: String,
    pub acceptance_rate: Option<f64>,
    /// Mean watts per placed chain.
    pub mean_energy_per_sfc: Option<f64>,
    /// Same, restricted to chains spanning exactly two servers.
    pub mean_energy_two_server: Option<f64>,
    pub requests: u64,
    pub accepted: u64,
    pub rejected: u64,
    /// Only defined for learning agents.
    pub cumulative_reward: Option<f64>,
}

impl MetricsRow {
    pub fn from_report(run_id: String, seed: u64, scenario: &str, agent: &str, r: &SimulationReport) -> Self {
        Self {
            run_id,
            seed,
            scenario: scenario.into(),
            agent: agent.into(),
            acceptance_rate: r.acceptance_rate(),
            mean_energy_per_sfc: r.mean_energy_per_placed(),
            mean_energy_two_server: r.mean_energy_two_server(),
            requests: r.requests,
            accepted: r.accepted,
            rejected: r.rejected,
            cumulative_reward: None,
        }
    }

    pub fn from_episode(run_id: String, seed: u64, scenario: &str, agent: &str, s: &EpisodeStats) -> Self {
        Self {
            run_id,
            seed,
            scenario: scenario.into(),
            agent: agent.into(),
            acceptance_rate: s.acceptance_rate,
            mean_energy_per_sfc: s.mean_energy_per_placed,
            mean_energy_two_server: s.mean_energy_two_server,
            requests: s.requests,
            accepted: s.accepted,
            rejected: s.rejected,
            cumulative_reward: Some(s.cumulative_reward),
        }
    }
}

/// Median, mean and population standard deviation of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    /// `None` when `values` is empty. Non-finite values are an error upstream.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            count: values.len(),
            median: quantile(&sorted, 0.5),
            mean,
            std: var.sqrt(),
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// One line of `summary.csv`: statistics of one metric for one group of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub metric: String,
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

const SUMMARY_METRICS: [&str; 4] = [
    "acceptance_rate",
    "mean_energy_per_sfc",
    "mean_energy_two_server",
    "cumulative_reward",
];

fn metric(row: &MetricsRow, name: &str) -> Option<f64> {
    match name {
        "acceptance_rate" => row.acceptance_rate,
        "mean_energy_per_sfc" => row.mean_energy_per_sfc,
        "mean_energy_two_server" => row.mean_energy_two_server,
        "cumulative_reward" => row.cumulative_reward,
        _ => None,
    }
}

/// Summaries per `(group, metric)`, groups in order of first appearance. Runs
/// where a metric is undefined are left out of that metric's statistics.
pub fn summarize<'a>(rows: impl IntoIterator<Item = (String, &'a MetricsRow)>) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, Vec<&MetricsRow>)> = Vec::new();
    for (g, row) in rows {
        match groups.iter_mut().find(|(name, _)| *name == g) {
            Some((_, v)) => v.push(row),
            None => groups.push((g, vec![row])),
        }
    }
    let mut out = Vec::new();
    for (g, members) in &groups {
        for m in SUMMARY_METRICS {
            let values: Vec<f64> = members.iter().filter_map(|r| metric(r, m)).collect();
            if let Some(s) = Stats::of(&values) {
                out.push(SummaryRow {
                    group: g.clone(),
                    metric: m.into(),
                    count: s.count,
                    median: s.median,
                    mean: s.mean,
                    std: s.std,
                    min: s.min,
                    max: s.max,
                });
            }
        }
    }
    out
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| Error::csv(path, e))).collect()
}
