//! Dense actor-critic network with exact reverse-mode gradients, a categorical
//! policy head and the optimizers used by the agents.

mod categorical;
pub mod checkpoint;
mod mlp;
mod optim;

pub use categorical::Categorical;
pub use mlp::{Activations, GradientTape, Mlp, MlpShape, OutputGradient};
pub use optim::{clip_grad_norm, Optimizer};
