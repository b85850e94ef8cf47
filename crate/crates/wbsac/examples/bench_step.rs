//! Quick wall-clock probe of train_step at a few desk-scale settings.
use std::time::Instant;
use wbsac::agents::{AgentConfig, AgentKind, ReplayBuffer, Transition, WbsacAgent};
use wbsac::rngs::seeded;

fn bench(hidden: Vec<usize>, batch: usize, kind: AgentKind, label: &str) {
    let cfg = AgentConfig {
        hidden_sizes: hidden,
        batch_size: batch,
        warmup_steps: 0,
        total_env_steps: 100_000,
        ..AgentConfig::default()
    };
    let mut agent = WbsacAgent::new(4, 2, cfg, kind, 0).unwrap();
    let mut rng = seeded(1, "bench");
    let mut buf = ReplayBuffer::new(1_000_000);
    use rand::Rng;
    for _ in 0..2000 {
        buf.push(Transition {
            state: (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: (0..2).map(|_| rng.random_range(-0.99..0.99)).collect(),
            reward: rng.random_range(-1.0..1.0),
            next_state: (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
            done: false,
        })
        .unwrap();
    }
    // warm
    for _ in 0..50 {
        agent.train_step(&buf, &mut rng).unwrap();
    }
    let n = 500;
    let t0 = Instant::now();
    for _ in 0..n {
        agent.train_step(&buf, &mut rng).unwrap();
        agent.advance_env_step();
    }
    let dt = t0.elapsed().as_secs_f64();
    let per = dt / n as f64;
    println!(
        "{label}: {:.3} ms/step -> 100k steps = {:.0} s",
        per * 1e3,
        per * 1e5
    );
}

fn main() {
    bench(vec![32, 32], 256, AgentKind::Wbsac, "wbsac h[32,32] b256");
    bench(vec![32, 32], 256, AgentKind::Sac, "sac   h[32,32] b256");
    bench(vec![32, 32], 128, AgentKind::Wbsac, "wbsac h[32,32] b128");
    bench(vec![64, 64], 256, AgentKind::Wbsac, "wbsac h[64,64] b256");
    bench(vec![24, 24], 128, AgentKind::Wbsac, "wbsac h[24,24] b128");
}
