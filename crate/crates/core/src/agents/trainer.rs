use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::a2c::{a2c_update, A2cConfig};
use super::advantage::compute_advantages;
use super::loss::SampleBatch;
use super::ppo::{ppo_update, PpoConfig};
use super::rollout::{EpisodeRecord, RolloutWorker, Trajectory};
use crate::env::{ActionIndex, EnvConfig, EpisodeStats, SfcEnv};
use crate::error::{Error, Result};
use crate::nn::{Categorical, Mlp, MlpShape, Optimizer};
use crate::sim::RngStream;

/// Learning algorithm and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Algorithm {
    A2c(A2cConfig),
    Ppo2(PpoConfig),
}

impl Algorithm {
    pub fn n_steps(&self) -> usize {
        match self {
            Algorithm::A2c(c) => c.n_steps,
            Algorithm::Ppo2(c) => c.n_steps,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::A2c(_) => "a2c",
            Algorithm::Ppo2(_) => "ppo2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    /// Environment steps summed over workers.
    pub total_steps: u64,
    pub workers: usize,
    pub seed: u64,
    /// Steps between learning-curve points.
    pub log_interval: u64,
}

/// One row of the learning curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub step: u64,
    pub episodes: u64,
    pub cumulative_reward: f64,
    /// Mean reward of the episodes finished since the previous point.
    pub mean_episode_reward: Option<f64>,
    /// Mean per-step reward since the previous point.
    pub mean_step_reward: f64,
    pub entropy: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub net: Mlp,
    pub curve: Vec<CurvePoint>,
    /// Finished episodes with `end_step` on the global step counter.
    pub episodes: Vec<EpisodeRecord>,
    pub steps: u64,
    pub updates: u64,
}

impl TrainingOutcome {
    /// Mean reward of episodes ending in `[from, to)` global steps.
    pub fn mean_episode_reward_between(&self, from: u64, to: u64) -> Option<f64> {
        let r: Vec<f64> = self
            .episodes
            .iter()
            .filter(|e| e.end_step >= from && e.end_step < to)
            .map(|e| e.reward)
            .collect();
        (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
    }
}

/// Pools trajectories into one batch with returns and advantages.
pub fn build_batch(trajs: &[Trajectory], gamma: f64, gae_lambda: Option<f64>) -> SampleBatch {
    let mut b = SampleBatch::default();
    for t in trajs {
        let (returns, advantages) = compute_advantages(t, gamma, gae_lambda);
        b.observations.extend(t.observations.iter().cloned());
        b.actions.extend_from_slice(&t.actions);
        b.old_log_probs.extend_from_slice(&t.log_probs);
        b.returns.extend(returns);
        b.advantages.extend(advantages);
    }
    b
}

/// Builds a freshly initialized network sized for `env`.
pub fn init_network(env: &SfcEnv, seed: u64) -> Mlp {
    Mlp::new(
        MlpShape::actor_critic(env.observation_len(), env.num_actions()),
        &mut RngStream::new(seed, 100),
    )
}

/// Trains a policy on `env_config`. Workers collect rollouts in parallel; the
/// coordinator updates the shared network on the pooled batch. Results depend
/// only on the configuration, not on thread scheduling.
pub fn train(env_config: &EnvConfig, cfg: &TrainConfig) -> Result<TrainingOutcome> {
    if cfg.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let n_steps = cfg.algorithm.n_steps();
    if n_steps == 0 {
        return Err(Error::Config("n_steps must be at least 1".into()));
    }
    let env = SfcEnv::new(env_config.clone())?;
    let mut net = init_network(&env, cfg.seed);
    let mut workers = (0..cfg.workers)
        .map(|w| RolloutWorker::new(env.clone(), RngStream::new(cfg.seed, 200 + w as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut opt = match cfg.algorithm {
        Algorithm::A2c(_) => Optimizer::rmsprop(net.params().len()),
        Algorithm::Ppo2(_) => Optimizer::adam(net.params().len()),
    };
    let mut shuffle = RngStream::new(cfg.seed, 300);
    let log_interval = cfg.log_interval.max(1);

    let mut steps = 0u64;
    let mut updates = 0u64;
    let mut seen = vec![0usize; cfg.workers];
    let mut episodes = Vec::new();
    let mut curve = Vec::new();
    let mut cumulative = 0.0;
    let mut window_reward = 0.0;
    let mut window_steps = 0u64;
    let mut window_episodes: Vec<f64> = Vec::new();
    let mut next_log = log_interval;

    while steps < cfg.total_steps {
        let trajs = workers
            .par_iter_mut()
            .map(|w| w.collect(&net, n_steps))
            .collect::<Result<Vec<_>>>()?;
        steps += (n_steps * cfg.workers) as u64;
        for t in &trajs {
            let r: f64 = t.rewards.iter().sum();
            cumulative += r;
            window_reward += r;
            window_steps += t.len() as u64;
        }
        for (w, s) in workers.iter().zip(seen.iter_mut()) {
            for e in &w.episodes()[*s..] {
                window_episodes.push(e.reward);
                episodes.push(EpisodeRecord { end_step: steps, ..e.clone() });
            }
            *s = w.episodes().len();
        }

        let last = match &cfg.algorithm {
            Algorithm::A2c(c) => a2c_update(&mut net, &mut opt, &build_batch(&trajs, c.gamma, None), c)?,
            Algorithm::Ppo2(c) => ppo_update(
                &mut net,
                &mut opt,
                &build_batch(&trajs, c.gamma, Some(c.gae_lambda)),
                c,
                &mut shuffle,
            )?,
        };
        updates += 1;

        if steps >= next_log || steps >= cfg.total_steps {
            curve.push(CurvePoint {
                step: steps,
                episodes: episodes.len() as u64,
                cumulative_reward: cumulative,
                mean_episode_reward: (!window_episodes.is_empty())
                    .then(|| window_episodes.iter().sum::<f64>() / window_episodes.len() as f64),
                mean_step_reward: window_reward / window_steps.max(1) as f64,
                entropy: last.entropy,
                policy_loss: last.policy_loss,
                value_loss: last.value_loss,
            });
            window_reward = 0.0;
            window_steps = 0;
            window_episodes.clear();
            while next_log <= steps {
                next_log += log_interval;
            }
        }
    }
    Ok(TrainingOutcome {
        net,
        curve,
        episodes,
        steps,
        updates,
    })
}

/// Runs one episode of `horizon_hours` with the network's most likely action at
/// every step.
pub fn evaluate_policy(env_config: &EnvConfig, net: &Mlp, seed: u64, horizon_hours: f64) -> Result<EpisodeStats> {
    let mut cfg = env_config.clone();
    cfg.episode_hours = horizon_hours;
    cfg.max_episode_steps = None;
    let mut env = SfcEnv::new(cfg)?;
    if net.shape().input != env.observation_len() || net.shape().actions != env.num_actions() {
        return Err(Error::Config(format!(
            "network expects {} inputs and {} actions, environment has {} and {}",
            net.shape().input,
            net.shape().actions,
            env.observation_len(),
            env.num_actions()
        )));
    }
    let mut obs = env.reset(seed)?;
    while !env.is_done() {
        let (logits, _) = net.forward(obs.as_slice())?;
        let action = Categorical::from_logits(&logits).argmax();
        obs = env.step(ActionIndex(action))?.observation;
    }
    Ok(env.episode_metrics())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InfrastructureConfig;

    fn small_env() -> EnvConfig {
        let mut cfg = EnvConfig::default();
        cfg.sim.infrastructure = InfrastructureConfig::base(4).with_capacity(6);
        cfg.sim.customers = 1;
        cfg.episode_hours = 500.0;
        cfg
    }

    fn run(algorithm: Algorithm, workers: usize) -> TrainingOutcome {
        let cfg = TrainConfig {
            algorithm,
            total_steps: 2000,
            workers,
            seed: 5,
            log_interval: 500,
        };
        train(&small_env(), &cfg).unwrap()
    }

    #[test]
    fn training_is_deterministic() {
        for alg in [Algorithm::A2c(A2cConfig::default()), Algorithm::Ppo2(PpoConfig::default())] {
            let a = run(alg.clone(), 2);
            let b = run(alg, 2);
            assert_eq!(a.net.params(), b.net.params());
            assert_eq!(a.curve, b.curve);
        }
    }

    #[test]
    fn curve_is_logged_at_intervals() {
        let out = run(Algorithm::A2c(A2cConfig::default()), 1);
        let steps: Vec<u64> = out.curve.iter().map(|p| p.step).collect();
        assert_eq!(steps, [500, 1000, 1500, 2000]);
        assert_eq!(out.updates, 400);
        assert!(!out.episodes.is_empty());
    }

    #[test]
    fn evaluation_counts_every_request() {
        let env = SfcEnv::new(small_env()).unwrap();
        let net = init_network(&env, 0);
        let stats = evaluate_policy(&small_env(), &net, 3, 2000.0).unwrap();
        assert_eq!(stats.placed + stats.rejected, stats.requests);
        assert!(stats.requests > 0);
    }

    #[test]
    fn evaluation_rejects_mismatched_network() {
        let net = Mlp::zeros(MlpShape::actor_critic(3, 2));
        assert!(evaluate_policy(&small_env(), &net, 0, 100.0).is_err());
    }
}
