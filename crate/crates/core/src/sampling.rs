//! Seeded random instances for the verification suites and sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::MomentInstance;

/// Smallest spacing accepted between sorted locations.
pub const MIN_LOCATION_GAP: f64 = 1e-3;

/// `t ~ U[0.1, 5]`, `n ~ U{1..6}`, `m_i ~ U{1..5}`, `x` sorted uniforms on
/// `[−3, 3]` resampled until consecutive gaps are at least [`MIN_LOCATION_GAP`].
#[derive(Debug, Clone)]
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        InstanceGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> MomentInstance {
        let t = self.rng.random_range(0.1..=5.0);
        let n = self.rng.random_range(1..=6usize);
        let m: Vec<i64> = (0..n).map(|_| self.rng.random_range(1..=5)).collect();
        let x = loop {
            let mut x: Vec<f64> = (0..n).map(|_| self.rng.random_range(-3.0..=3.0)).collect();
            x.sort_by(f64::total_cmp);
            if x.windows(2).all(|w| w[1] - w[0] >= MIN_LOCATION_GAP) {
                break x;
            }
        };
        MomentInstance::new(t, &x, &m).expect("generator respects the instance invariants")
    }

    /// Next instance satisfying `keep`.
    pub fn sample_where(&mut self, keep: impl Fn(&MomentInstance) -> bool) -> MomentInstance {
        loop {
            let inst = self.sample();
            if keep(&inst) {
                return inst;
            }
        }
    }
}

impl Iterator for InstanceGenerator {
    type Item = MomentInstance;

    fn next(&mut self) -> Option<MomentInstance> {
        Some(self.sample())
    }
}
