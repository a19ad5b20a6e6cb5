use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use sfcrl::agents::{loss_and_gradient, GreedyPlacer, LossCoefficients, PolicyObjective, RolloutWorker, SampleBatch};
use sfcrl::env::ActionIndex;
use sfcrl::nn::Categorical;
use sfcrl::rbd::sfc_rbd;
use sfcrl::sim::{RngStream, SimConfig, Simulation};
use sfcrl_bench::{env_and_net, sample_placement};

fn bench_rbd(c: &mut Criterion) {
    let (placement, infra) = sample_placement();
    let block = sfc_rbd(&placement, &infra, 0.9999).unwrap();
    c.bench_function("rbd/build_and_evaluate", |b| {
        b.iter(|| sfc_rbd(&placement, &infra, 0.9999).unwrap().evaluate())
    });
    c.bench_function("rbd/evaluate", |b| b.iter(|| block.evaluate()));
}

fn bench_env(c: &mut Criterion) {
    let (mut env, net) = env_and_net(1);
    let mut obs = env.reset(1).unwrap();
    let mut seed = 1;
    c.bench_function("env/step_with_policy", |b| {
        b.iter(|| {
            if env.is_done() {
                seed += 1;
                obs = env.reset(seed).unwrap();
            }
            let (logits, _) = net.forward(obs.as_slice()).unwrap();
            let a = Categorical::from_logits(&logits).argmax();
            obs = env.step(ActionIndex(a)).unwrap().observation;
        })
    });
}

fn bench_nn(c: &mut Criterion) {
    let (env, net) = env_and_net(2);
    let mut worker = RolloutWorker::new(env, RngStream::new(2, 1)).unwrap();
    let traj = worker.collect(&net, 128).unwrap();
    let batch = SampleBatch {
        observations: traj.observations.clone(),
        actions: traj.actions.clone(),
        old_log_probs: traj.log_probs.clone(),
        returns: traj.rewards.clone(),
        advantages: traj.rewards.clone(),
    };
    let coef = LossCoefficients {
        value_coef: 0.5,
        entropy_coef: 0.01,
    };
    c.bench_function("nn/forward", |b| b.iter(|| net.forward(&batch.observations[0]).unwrap()));
    c.bench_function("nn/ppo_gradient_128", |b| {
        b.iter(|| loss_and_gradient(&net, &batch, coef, PolicyObjective::Clipped(0.2)).unwrap())
    });
}

fn bench_greedy(c: &mut Criterion) {
    let mut group = c.benchmark_group("sim");
    group.sample_size(20);
    group.bench_function("greedy_one_year", |b| {
        b.iter_batched(
            || Simulation::new(SimConfig::base(), 3).unwrap(),
            |mut sim| sim.run_until(8760.0, &mut GreedyPlacer::new(3)).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_rbd, bench_env, bench_nn, bench_greedy);
criterion_main!(benches);
