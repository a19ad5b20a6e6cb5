//! Placement agents: A2C and PPO2 trained on [`crate::env::SfcEnv`], plus greedy
//! and random baselines that plug into the simulator directly.

mod a2c;
mod advantage;
mod baselines;
mod loss;
mod ppo;
mod rollout;
mod trainer;

pub use a2c::{a2c_update, A2cConfig};
pub use advantage::compute_advantages;
pub use baselines::{most_free_server, GreedyPlacer, RandomPlacer};
pub use loss::{
    loss_and_gradient, ppo_clip_loss, ppo_ratio, LossCoefficients, LossReport, PolicyObjective, SampleBatch,
};
pub use ppo::{mean_ratio, ppo_update, PpoConfig};
pub use rollout::{collect_rollout, EpisodeRecord, RolloutWorker, Trajectory};
pub use trainer::{build_batch, evaluate_policy, init_network, train, Algorithm, CurvePoint, TrainConfig, TrainingOutcome};
