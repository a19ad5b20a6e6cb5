use serde::Serialize;

use crate::env::{ActionIndex, EnvObservation, EpisodeStats, SfcEnv};
use crate::error::{Error, Result};
use crate::nn::{Categorical, Mlp};
use crate::sim::RngStream;

/// `n_steps` consecutive transitions of one worker.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    /// `dones[t]`: the episode ended with step `t`.
    pub dones: Vec<bool>,
    /// Log-probability of the action under the behaviour policy.
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    /// Critic estimate of the state after the last step.
    pub bootstrap_value: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn push(&mut self, obs: Vec<f64>, action: usize, reward: f64, done: bool, log_prob: f64, value: f64) {
        self.observations.push(obs);
        self.actions.push(action);
        self.rewards.push(reward);
        self.dones.push(done);
        self.log_probs.push(log_prob);
        self.values.push(value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    /// Global step count (of this worker) at which the episode ended.
    pub end_step: u64,
    pub reward: f64,
    pub stats: EpisodeStats,
}

/// One environment plus the sampling stream that drives it. Episodes restart
/// automatically with a seed drawn from the stream.
#[derive(Debug, Clone)]
pub struct RolloutWorker {
    env: SfcEnv,
    obs: EnvObservation,
    rng: RngStream,
    steps: u64,
    episodes: Vec<EpisodeRecord>,
}

impl RolloutWorker {
    pub fn new(env: SfcEnv, rng: RngStream) -> Result<Self> {
        let mut worker = Self {
            obs: EnvObservation(Vec::new()),
            env,
            rng,
            steps: 0,
            episodes: Vec::new(),
        };
        worker.restart()?;
        Ok(worker)
    }

    fn restart(&mut self) -> Result<()> {
        for _ in 0..1000 {
            let seed = self.rng.next_u64();
            self.obs = self.env.reset(seed)?;
            if !self.env.is_done() {
                return Ok(());
            }
        }
        Err(Error::Config("episodes contain no requests; increase episode_hours".into()))
    }

    pub fn env(&self) -> &SfcEnv {
        &self.env
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn episodes(&self) -> &[EpisodeRecord] {
        &self.episodes
    }

    /// Samples `n_steps` actions from the current policy.
    pub fn collect(&mut self, net: &Mlp, n_steps: usize) -> Result<Trajectory> {
        let mut traj = Trajectory::default();
        for _ in 0..n_steps {
            let (logits, value) = net.forward(self.obs.as_slice())?;
            let dist = Categorical::from_logits(&logits);
            let action = dist.sample(&mut self.rng);
            let out = self.env.step(ActionIndex(action))?;
            self.steps += 1;
            let obs = std::mem::replace(&mut self.obs, out.observation);
            traj.push(obs.0, action, out.reward, out.done, dist.log_prob(action), value);
            if out.done {
                let stats = self.env.episode_metrics();
                self.episodes.push(EpisodeRecord {
                    end_step: self.steps,
                    reward: stats.cumulative_reward,
                    stats,
                });
                self.restart()?;
            }
        }
        traj.bootstrap_value = net.forward(self.obs.as_slice())?.1;
        Ok(traj)
    }
}

/// Collects `n_steps` transitions from `worker` with `net`'s sampling policy.
pub fn collect_rollout(worker: &mut RolloutWorker, net: &Mlp, n_steps: usize) -> Result<Trajectory> {
    worker.collect(net, n_steps)
}
