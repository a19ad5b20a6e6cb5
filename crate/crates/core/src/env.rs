//! The placement MDP. One step places one VNF of the current request; a request
//! is a short sub-episode at a single instant of simulated time, and the
//! simulator advances to the next arrival when the request completes or is
//! rejected.
//!
//! Observation layout, for `n` servers: `[R_1..R_n, A_1..A_n, ω, θ]` where `R_i`
//! is the free fraction of server `i` (0 while it is down), `A_i` its
//! steady-state availability, `ω` the current VNF's demand over the largest
//! catalog demand and `θ` the availability requirement.
//!
//! Rewards: `-1` for an allocation that does not fit, `0` for an intermediate VNF,
//! `(A_sfc - θ)·ϱ - energy·ς + 2` when the last VNF is placed, and `-5` when the
//! retry budget for one VNF runs out and the whole request is rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{params, Assignment, Placement, SfcRequest};
use crate::rbd::steady_state_availability;
use crate::sim::{SimConfig, Simulation, SimulationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    /// Weight ϱ on the availability margin `A_sfc - θ`.
    pub availability_scale: f64,
    /// Weight ς on the chain's power draw in watts.
    pub energy_scale: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            availability_scale: 1000.0,
            energy_scale: 0.005,
        }
    }
}

pub const REWARD_INVALID: f64 = -1.0;
pub const REWARD_INTERMEDIATE: f64 = 0.0;
pub const REWARD_REJECTED: f64 = -5.0;
pub const COMPLETION_BONUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub sim: SimConfig,
    pub reward: RewardConfig,
    /// Consecutive failed allocations of one VNF before the request is rejected.
    pub max_retries: u32,
    /// Simulated hours per episode.
    pub episode_hours: f64,
    /// Optional cap on agent steps per episode.
    pub max_episode_steps: Option<u64>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::base(),
            reward: RewardConfig::default(),
            max_retries: 3,
            episode_hours: params::HOURS_PER_YEAR,
            max_episode_steps: None,
        }
    }
}

/// A flat discrete action: server `a / vm_max` with `a % vm_max + 1` replicas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionIndex(pub usize);

impl ActionIndex {
    pub fn encode(server: usize, replicas: u32, vm_max: u32) -> Self {
        debug_assert!(replicas >= 1 && replicas <= vm_max);
        Self(server * vm_max as usize + (replicas as usize - 1))
    }

    /// `(server, replicas)`.
    pub fn decode(self, vm_max: u32) -> (usize, u32) {
        let m = vm_max as usize;
        (self.0 / m, (self.0 % m) as u32 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvObservation(pub Vec<f64>);

impl EnvObservation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RewardBranch {
    InvalidPlacement,
    Intermediate,
    Completed,
    Rejected,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepInfo {
    pub sfc_completed: bool,
    pub sfc_accepted: bool,
    pub sfc_rejected: bool,
    pub sfc_availability: Option<f64>,
    pub sfc_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub observation: EnvObservation,
    pub reward: f64,
    pub done: bool,
    pub branch: RewardBranch,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub requests: u64,
    pub placed: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub acceptance_rate: Option<f64>,
    pub mean_energy_per_placed: Option<f64>,
    pub mean_energy_two_server: Option<f64>,
    pub cumulative_reward: f64,
    pub steps: u64,
}

impl EpisodeStats {
    pub fn from_report(report: &SimulationReport, cumulative_reward: f64, steps: u64) -> Self {
        Self {
            requests: report.requests,
            placed: report.placed,
            accepted: report.accepted,
            rejected: report.rejected,
            acceptance_rate: report.acceptance_rate(),
            mean_energy_per_placed: report.mean_energy_per_placed(),
            mean_energy_two_server: report.mean_energy_two_server(),
            cumulative_reward,
            steps,
        }
    }
}

#[derive(Debug, Clone)]
struct Pending {
    request: SfcRequest,
    placement: Placement,
    retries: u32,
}

impl Pending {
    fn new(request: SfcRequest) -> Self {
        let placement = Placement::new(&request);
        Self {
            request,
            placement,
            retries: 0,
        }
    }

    fn current_vnf(&self) -> usize {
        self.request.vnf_sequence[self.placement.assignments.len()]
    }
}

#[derive(Debug, Clone)]
pub struct SfcEnv {
    config: EnvConfig,
    server_availability: Vec<f64>,
    max_demand: f64,
    vm_max: u32,
    sim: Option<Simulation>,
    pending: Option<Pending>,
    cumulative_reward: f64,
    steps: u64,
    done: bool,
}

impl SfcEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        if config.max_retries == 0 {
            return Err(Error::Config("max_retries must be at least 1".into()));
        }
        if !(config.episode_hours > 0.0) {
            return Err(Error::Config("episode_hours must be positive".into()));
        }
        let infra = crate::model::build_infrastructure(&config.sim.infrastructure)?;
        let server_availability = infra
            .servers()
            .iter()
            .map(|s| steady_state_availability(s.spec.mttf, s.spec.mttr))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            max_demand: config.sim.catalog.max_demand() as f64,
            vm_max: infra.vm_max(),
            server_availability,
            config,
            sim: None,
            pending: None,
            cumulative_reward: 0.0,
            steps: 0,
            done: true,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn observation_len(&self) -> usize {
        2 * self.server_availability.len() + 2
    }

    pub fn num_actions(&self) -> usize {
        self.server_availability.len() * self.vm_max as usize
    }

    pub fn vm_max(&self) -> u32 {
        self.vm_max
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn simulation(&self) -> Option<&Simulation> {
        self.sim.as_ref()
    }

    /// The request currently being placed.
    pub fn current_request(&self) -> Option<&SfcRequest> {
        self.pending.as_ref().map(|p| &p.request)
    }

    /// Starts a new episode: fresh simulator and customers from `seed`, advanced
    /// to the first arrival.
    pub fn reset(&mut self, seed: u64) -> Result<EnvObservation> {
        self.sim = Some(Simulation::new(self.config.sim.clone(), seed)?);
        self.pending = None;
        self.cumulative_reward = 0.0;
        self.steps = 0;
        self.done = false;
        self.advance()?;
        Ok(self.observation())
    }

    fn sim_mut(&mut self) -> Result<&mut Simulation> {
        self.sim
            .as_mut()
            .ok_or_else(|| Error::Usage("environment used before reset".into()))
    }

    fn advance(&mut self) -> Result<()> {
        let horizon = self.config.episode_hours;
        match self.sim_mut()?.next_arrival(horizon)? {
            Some(request) => self.pending = Some(Pending::new(request)),
            None => {
                self.pending = None;
                self.done = true;
            }
        }
        Ok(())
    }

    /// Encodes the current state. Without a pending request `ω` is 0.
    pub fn observation(&self) -> EnvObservation {
        let n = self.server_availability.len();
        let mut v = Vec::with_capacity(2 * n + 2);
        match &self.sim {
            Some(sim) => v.extend(
                sim.infrastructure()
                    .servers()
                    .iter()
                    .map(|s| s.free_resources() as f64 / s.spec.capacity as f64),
            ),
            None => v.extend(std::iter::repeat(1.0).take(n)),
        }
        v.extend_from_slice(&self.server_availability);
        let (omega, theta) = match &self.pending {
            Some(p) => {
                let demand = self.config.sim.catalog.types()[p.current_vnf()].resource_demand;
                (demand as f64 / self.max_demand, p.request.availability_requirement)
            }
            None => (0.0, self.config.sim.availability_requirement),
        };
        v.push(omega);
        v.push(theta);
        EnvObservation(v)
    }

    pub fn step(&mut self, action: ActionIndex) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::Usage("step called on a finished episode".into()));
        }
        if action.0 >= self.num_actions() {
            return Err(Error::Usage(format!(
                "action {} out of range (0..{})",
                action.0,
                self.num_actions()
            )));
        }
        let (server, replicas) = action.decode(self.vm_max);
        let max_retries = self.config.max_retries;
        let reward_cfg = self.config.reward.clone();

        let mut pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Internal("episode live without a pending request".into()))?;
        let sim = self.sim.as_mut().expect("pending implies a simulation");
        let vnf = sim.catalog().types()[pending.current_vnf()].clone();
        let request_id = pending.request.id;

        let mut info = StepInfo::default();
        let (reward, branch, finished) = match sim.infrastructure_mut().allocate(server, &vnf, replicas, request_id) {
            Err(_) => {
                pending.retries += 1;
                if pending.retries >= max_retries {
                    sim.infrastructure_mut().deallocate(request_id);
                    sim.resolve(&pending.request, None)?;
                    info.sfc_rejected = true;
                    (REWARD_REJECTED, RewardBranch::Rejected, true)
                } else {
                    (REWARD_INVALID, RewardBranch::InvalidPlacement, false)
                }
            }
            Ok(()) => {
                pending.retries = 0;
                pending.placement.assignments.push(Assignment { server, replicas });
                if pending.placement.is_complete() {
                    let placement = std::mem::replace(&mut pending.placement, Placement::new(&pending.request));
                    let r = sim.resolve(&pending.request, Some(placement))?;
                    let availability = r.availability.expect("placed");
                    let energy = r.energy.expect("placed");
                    info.sfc_completed = true;
                    info.sfc_accepted = r.accepted;
                    info.sfc_availability = Some(availability);
                    info.sfc_energy = Some(energy);
                    let reward = completion_reward(availability, pending.request.availability_requirement, energy, &reward_cfg);
                    (reward, RewardBranch::Completed, true)
                } else {
                    (REWARD_INTERMEDIATE, RewardBranch::Intermediate, false)
                }
            }
        };

        if finished {
            self.advance()?;
        } else {
            self.pending = Some(pending);
        }
        self.steps += 1;
        self.cumulative_reward += reward;
        if let Some(cap) = self.config.max_episode_steps {
            if self.steps >= cap {
                self.done = true;
            }
        }
        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            done: self.done,
            branch,
            info,
        })
    }

    /// Counters of the current (or just finished) episode.
    pub fn episode_metrics(&self) -> EpisodeStats {
        let report = self.sim.as_ref().map(|s| s.report().clone()).unwrap_or_default();
        EpisodeStats::from_report(&report, self.cumulative_reward, self.steps)
    }
}

/// Reward for a completed chain: `(availability - θ)·ϱ - energy·ς + 2`.
pub fn completion_reward(availability: f64, theta: f64, energy: f64, cfg: &RewardConfig) -> f64 {
    (availability - theta) * cfg.availability_scale - energy * cfg.energy_scale + COMPLETION_BONUS
}
