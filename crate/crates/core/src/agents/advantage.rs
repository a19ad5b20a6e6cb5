use super::rollout::Trajectory;

/// Returns and advantages for a trajectory.
///
/// Without `gae_lambda`: n-step bootstrapped returns `R_t = r_t + γ R_{t+1}` and
/// `A_t = R_t - V(s_t)`. With it: generalized advantage estimation and
/// `R_t = A_t + V(s_t)`. An episode end at step `t` cuts the bootstrap.
pub fn compute_advantages(traj: &Trajectory, gamma: f64, gae_lambda: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = traj.len();
    let mut returns = vec![0.0; n];
    let mut advantages = vec![0.0; n];
    match gae_lambda {
        None => {
            let mut ret = traj.bootstrap_value;
            for t in (0..n).rev() {
                let cont = if traj.dones[t] { 0.0 } else { 1.0 };
                ret = traj.rewards[t] + gamma * ret * cont;
                returns[t] = ret;
                advantages[t] = ret - traj.values[t];
            }
        }
        Some(lambda) => {
            let mut gae = 0.0;
            for t in (0..n).rev() {
                let cont = if traj.dones[t] { 0.0 } else { 1.0 };
                let next_value = if t + 1 < n { traj.values[t + 1] } else { traj.bootstrap_value };
                let delta = traj.rewards[t] + gamma * next_value * cont - traj.values[t];
                gae = delta + gamma * lambda * cont * gae;
                advantages[t] = gae;
                returns[t] = gae + traj.values[t];
            }
        }
    }
    (returns, advantages)
}
