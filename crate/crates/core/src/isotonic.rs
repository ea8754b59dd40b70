//! Weighted isotonic regression onto non-increasing sequences by pooling
//! adjacent violators.

use std::ops::Range;

use crate::error::{check_len, Error, Result};

/// `min Σ w_i (c_i − z_i)²` subject to `c_1 ≥ c_2 ≥ …`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicProblem {
    targets: Vec<f64>,
    weights: Vec<f64>,
}

/// Solution together with its pooling blocks. Every block is a maximal run
/// sharing one fitted value, the weighted mean of its targets.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub values: Vec<f64>,
    pub blocks: Vec<Range<usize>>,
}

impl IsotonicProblem {
    pub fn new(targets: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_len(targets.len(), weights.len())?;
        if let Some(index) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveWeight {
                index,
                value: weights[index],
            });
        }
        Ok(IsotonicProblem { targets, weights })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn solve(&self) -> IsotonicFit {
        struct Pool {
            start: usize,
            weight: f64,
            weighted_sum: f64,
        }
        impl Pool {
            fn mean(&self) -> f64 {
                self.weighted_sum / self.weight
            }
        }

        let mut pools: Vec<Pool> = Vec::with_capacity(self.targets.len());
        for (i, (&z, &w)) in self.targets.iter().zip(&self.weights).enumerate() {
            let mut cur = Pool {
                start: i,
                weight: w,
                weighted_sum: w * z,
            };
            while let Some(prev) = pools.last() {
                if prev.mean() > cur.mean() {
                    break;
                }
                let prev = pools.pop().expect("checked above");
                cur = Pool {
                    start: prev.start,
                    weight: prev.weight + cur.weight,
                    weighted_sum: prev.weighted_sum + cur.weighted_sum,
                };
            }
            pools.push(cur);
        }

        let mut values = vec![0.0; self.targets.len()];
        let mut blocks = Vec::with_capacity(pools.len());
        let ends = pools
            .iter()
            .skip(1)
            .map(|p| p.start)
            .chain([self.targets.len()]);
        for (pool, end) in pools.iter().zip(ends) {
            values[pool.start..end].fill(pool.mean());
            blocks.push(pool.start..end);
        }
        IsotonicFit { values, blocks }
    }
}

/// Convenience wrapper returning only the fitted values.
pub fn isotonic_nonincreasing(z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    Ok(IsotonicProblem::new(z.to_vec(), w.to_vec())?.solve().values)
}
