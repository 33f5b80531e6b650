use optimarl::envs::{EnvSpec, MatrixGameSpec};
use optimarl::learners::{TrainConfig, Trainer};
use std::time::Instant;

fn main() {
    for eta in [0.0, 1.0] {
        for seed in 0..5 {
            let cfg = TrainConfig { eta, seed, ..TrainConfig::default() };
            let mut t = Trainer::new(EnvSpec::Matrix(MatrixGameSpec::climbing()), cfg).unwrap();
            let start = Instant::now();
            for _ in 0..2000 {
                t.train_iteration().unwrap();
            }
            let (mean, _) = t.evaluate(5, true, 0).unwrap();
            println!(
                "climbing eta={eta} seed={seed} greedy_return={mean} per_step={} ({:.1?})",
                mean / 25.0,
                start.elapsed()
            );
        }
    }
}
