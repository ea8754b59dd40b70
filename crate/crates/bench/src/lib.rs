//! Deterministic inputs shared by the benchmarks.

use lyap_core::sampling::InstanceGenerator;
use lyap_core::MomentInstance;

/// `count` instances from the default generator.
pub fn random_instances(seed: u64, count: usize) -> Vec<MomentInstance> {
    InstanceGenerator::new(seed).take(count).collect()
}

/// `n` unit masses at spacing `gap`, all merging for large `t`.
pub fn chain(n: usize, gap: f64, t: f64) -> MomentInstance {
    let x: Vec<f64> = (0..n).map(|i| i as f64 * gap).collect();
    MomentInstance::new(t, &x, &vec![1; n]).expect("increasing locations")
}
