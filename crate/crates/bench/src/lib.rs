//! Fixtures shared by the benchmarks.

use sfcrl::env::{EnvConfig, SfcEnv};
use sfcrl::model::{build_infrastructure, Assignment, Infrastructure, InfrastructureConfig, Placement, SfcRequest};
use sfcrl::nn::{Mlp, MlpShape};
use sfcrl::sim::RngStream;

/// A three-VNF chain over two servers with mixed redundancy.
pub fn sample_placement() -> (Placement, Infrastructure) {
    let infra = build_infrastructure(&InfrastructureConfig::base(28)).expect("valid config");
    let request = SfcRequest {
        id: 1,
        customer: 0,
        vnf_sequence: vec![0, 1, 2],
        availability_requirement: 0.999,
        arrival_time: 0.0,
        lifetime: 100.0,
    };
    let mut p = Placement::new(&request);
    p.assignments = vec![
        Assignment { server: 0, replicas: 2 },
        Assignment { server: 0, replicas: 1 },
        Assignment { server: 7, replicas: 3 },
    ];
    (p, infra)
}

/// Base-scenario environment and a randomly initialized network sized for it.
pub fn env_and_net(seed: u64) -> (SfcEnv, Mlp) {
    let env = SfcEnv::new(EnvConfig::default()).expect("default config is valid");
    let net = Mlp::new(
        MlpShape::actor_critic(env.observation_len(), env.num_actions()),
        &mut RngStream::new(seed, 0),
    );
    (env, net)
}
