use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{A2cConfig, Algorithm, PpoConfig, TrainConfig};
use crate::env::{EnvConfig, RewardConfig};
use crate::error::{Error, Result};
use crate::model::{params, GroupParams, InfrastructureConfig, Topology, VnfCatalog};
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Homogeneous servers, 5 customers, θ = 0.999.
    Table1,
    /// Two reliability groups, 10 customers, θ = 0.99955.
    Table3,
    /// Table-1 defaults; every parameter is expected to come from the file.
    Custom,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Table1 => "table1",
            Scenario::Table3 => "table3",
            Scenario::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Ppo2,
    A2c,
    Greedy,
    Random,
}

impl AgentKind {
    pub fn label(self) -> &'static str {
        match self {
            AgentKind::Ppo2 => "ppo2",
            AgentKind::A2c => "a2c",
            AgentKind::Greedy => "greedy",
            AgentKind::Random => "random",
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, AgentKind::Ppo2 | AgentKind::A2c)
    }
}

/// Learning-rate and discount grids of the parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub learning_rates: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            learning_rates: vec![0.00005, 0.00025, 0.0005, 0.00075],
            gammas: vec![0.85, 0.9, 0.99, 0.95],
        }
    }
}

/// A complete experiment description. Fields left out of the JSON file take the
/// scenario's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub agent: AgentKind,
    /// Topology JSON; without one the built-in 28-node backbone is used.
    #[serde(default)]
    pub topology: Option<PathBuf>,
    /// Replaces the topology with this many generated servers split like the
    /// scenario's groups.
    #[serde(default)]
    pub servers: Option<usize>,
    /// Per-group parameters, in group order. Defaults to the scenario's groups.
    #[serde(default)]
    pub groups: Option<Vec<GroupParams>>,
    /// Overrides every group's capacity.
    #[serde(default)]
    pub capacity: Option<u32>,
    #[serde(default = "default_vm_max")]
    pub vm_max: u32,
    #[serde(default)]
    pub customers: Option<usize>,
    #[serde(default)]
    pub availability_requirement: Option<f64>,
    #[serde(default = "default_arrival_rate")]
    pub arrival_rate: f64,
    #[serde(default = "default_mean_lifetime")]
    pub mean_lifetime: f64,
    #[serde(default = "default_vnf_mttf")]
    pub vnf_mttf: f64,
    #[serde(default = "default_vnf_mttr")]
    pub vnf_mttr: f64,
    #[serde(default)]
    pub vnf_catalog: Option<Vec<(String, u32)>>,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_episode_hours")]
    pub episode_hours: f64,
    #[serde(default)]
    pub ppo2: PpoConfig,
    #[serde(default)]
    pub a2c: A2cConfig,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_training_steps")]
    pub training_steps: u64,
    #[serde(default = "default_log_interval")]
    pub log_interval: u64,
    #[serde(default = "default_horizon")]
    pub horizon_hours: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepGrid,
}

fn default_vm_max() -> u32 {
    params::VM_MAX
}
fn default_arrival_rate() -> f64 {
    params::ARRIVAL_RATE
}
fn default_mean_lifetime() -> f64 {
    params::SFC_LIFETIME_H
}
fn default_vnf_mttf() -> f64 {
    params::VNF_MTTF_H
}
fn default_vnf_mttr() -> f64 {
    params::VNF_MTTR_H
}
fn default_max_retries() -> u32 {
    3
}
fn default_episode_hours() -> f64 {
    params::HOURS_PER_YEAR
}
fn default_workers() -> usize {
    1
}
fn default_training_steps() -> u64 {
    500_000
}
fn default_log_interval() -> u64 {
    8760
}
fn default_horizon() -> f64 {
    params::EVALUATION_HORIZON_H
}
fn default_repetitions() -> usize {
    30
}

/// Steps of one parametrization run: ten one-year episodes' worth of hours.
pub const SWEEP_TRAINING_STEPS: u64 = 87_600;

impl ExperimentConfig {
    /// Defaults for `scenario` with the given agent.
    pub fn new(scenario: Scenario, agent: AgentKind) -> Self {
        serde_json::from_value(serde_json::json!({
            "scenario": scenario,
            "agent": agent,
        }))
        .expect("defaults deserialize")
    }

    pub fn customers(&self) -> usize {
        self.customers.unwrap_or(match self.scenario {
            Scenario::Table3 => params::CUSTOMERS_TWO_GROUP,
            _ => params::CUSTOMERS,
        })
    }

    pub fn theta(&self) -> f64 {
        self.availability_requirement.unwrap_or(match self.scenario {
            Scenario::Table3 => params::AVAILABILITY_REQUIREMENT_TWO_GROUP,
            _ => params::AVAILABILITY_REQUIREMENT,
        })
    }

    /// Label used in output rows, e.g. `table3`.
    pub fn scenario_label(&self) -> &'static str {
        self.scenario.label()
    }

    fn group_defaults(&self) -> Vec<GroupParams> {
        if let Some(g) = &self.groups {
            return g.clone();
        }
        let group1 = GroupParams::reference("group1");
        match self.scenario {
            Scenario::Table3 => {
                let mut group2 = GroupParams::reference("group2");
                group2.mttf = params::SERVER_MTTF_GROUP2_H;
                vec![group1, group2]
            }
            _ => vec![group1],
        }
    }

    pub fn infrastructure(&self) -> Result<InfrastructureConfig> {
        let defaults = self.group_defaults();
        if defaults.is_empty() {
            return Err(Error::Config("groups must not be empty".into()));
        }
        let mut infra = match self.servers {
            Some(n) => {
                // Split n as evenly as possible, earlier groups taking the remainder.
                let k = defaults.len();
                let blocks = defaults
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (g.clone(), n / k + usize::from(i < n % k)));
                InfrastructureConfig::from_groups(blocks, self.vm_max)
            }
            None => {
                let topo = match &self.topology {
                    Some(p) => Topology::load(p)?,
                    None => Topology::rnp(),
                };
                topo.to_config(&defaults, self.vm_max)?
            }
        };
        if let Some(c) = self.capacity {
            infra = infra.with_capacity(c);
        }
        Ok(infra)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let catalog = match &self.vnf_catalog {
            Some(entries) => VnfCatalog::new(entries.iter().map(|(n, d)| (n.clone(), *d)))?,
            None => VnfCatalog::default(),
        };
        Ok(SimConfig {
            infrastructure: self.infrastructure()?,
            catalog,
            customers: self.customers(),
            arrival_rate: self.arrival_rate,
            mean_lifetime: self.mean_lifetime,
            availability_requirement: self.theta(),
            vnf_mttf: self.vnf_mttf,
            vnf_mttr: self.vnf_mttr,
            trace: false,
        })
    }

    pub fn env_config(&self) -> Result<EnvConfig> {
        Ok(EnvConfig {
            sim: self.sim_config()?,
            reward: self.reward.clone(),
            max_retries: self.max_retries,
            episode_hours: self.episode_hours,
            max_episode_steps: None,
        })
    }

    /// Training setup for the configured learning agent.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let algorithm = match self.agent {
            AgentKind::Ppo2 => Algorithm::Ppo2(self.ppo2.clone()),
            AgentKind::A2c => Algorithm::A2c(self.a2c.clone()),
            other => {
                return Err(Error::Usage(format!(
                    "agent {} does not train",
                    other.label()
                )))
            }
        };
        Ok(TrainConfig {
            algorithm,
            total_steps: self.training_steps,
            workers: self.workers,
            seed: self.seed,
            log_interval: self.log_interval,
        })
    }

    /// Checks value ranges the type system cannot express.
    pub fn validate(&self) -> Result<()> {
        let theta = self.theta();
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Config(format!(
                "availability_requirement must lie in (0, 1), got {theta}"
            )));
        }
        let positive = [
            ("arrival_rate", self.arrival_rate),
            ("mean_lifetime", self.mean_lifetime),
            ("vnf_mttf", self.vnf_mttf),
            ("vnf_mttr", self.vnf_mttr),
            ("episode_hours", self.episode_hours),
            ("horizon_hours", self.horizon_hours),
            ("ppo2.learning_rate", self.ppo2.learning_rate),
            ("a2c.learning_rate", self.a2c.learning_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.customers() == 0 {
            return Err(Error::Config("customers must be at least 1".into()));
        }
        if self.servers == Some(0) {
            return Err(Error::Config("servers must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        for g in [&self.ppo2.gamma, &self.a2c.gamma] {
            if !(0.0..=1.0).contains(g) {
                return Err(Error::Config(format!("gamma must lie in [0, 1], got {g}")));
            }
        }
        if self.sweep.learning_rates.is_empty() || self.sweep.gammas.is_empty() {
            return Err(Error::Config("sweep grids must not be empty".into()));
        }
        self.infrastructure()?;
        Ok(())
    }
}

/// Parses and validates a JSON experiment file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::Config(format!("{}: empty config file", path.display())));
    }
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}
