//! The partition-driven closed form γ₃, the explicit one- and two-point
//! exponents, the first-merge recursion, and the three-route report.

use serde::{Deserialize, Serialize};

use crate::clusters::{first_optimal_merge, simulate_inertia, ClusterResult, EVENT_TOLERANCE};
use crate::error::{Error, Result};
use crate::instance::MomentInstance;
use crate::one_based;
use crate::variational::{check_minimizer_structure, solve_gamma1, solve_gamma2};

/// Contribution of one block `B` of the partition:
/// `(M³ − M)t/24 − Σ_{k<ℓ ∈ B} m_k m_ℓ |x_k − x_ℓ|/2 − (Σ_{k∈B} m_k x_k)²/(2tM)`.
pub fn gamma3_block(inst: &MomentInstance, block: &[usize]) -> f64 {
    let t = inst.t();
    let (x, m) = (inst.x(), inst.m());
    let mass: f64 = block.iter().map(|&k| f64::from(m[k])).sum();
    let mut pairs = 0.0;
    for (p, &k) in block.iter().enumerate() {
        for &l in &block[p + 1..] {
            pairs += 0.5 * f64::from(m[k]) * f64::from(m[l]) * (x[k] - x[l]).abs();
        }
    }
    let moment: f64 = block.iter().map(|&k| f64::from(m[k]) * x[k]).sum();
    (mass * mass * mass - mass) * t / 24.0 - pairs - moment * moment / (2.0 * t * mass)
}

pub fn gamma3(inst: &MomentInstance, res: &ClusterResult) -> f64 {
    res.partition.iter().map(|b| gamma3_block(inst, b)).sum()
}

/// One-point exponent `(m³ − m)t/24 − m x²/(2t)`.
pub fn corollary_n1(t: f64, x1: f64, m1: u32) -> f64 {
    let m = f64::from(m1);
    (m * m * m - m) * t / 24.0 - m * x1 * x1 / (2.0 * t)
}

/// Two-point branch for points that merge by time `t`.
pub fn corollary_n2_merged(t: f64, x: [f64; 2], m: [u32; 2]) -> f64 {
    let (m1, m2) = (f64::from(m[0]), f64::from(m[1]));
    let total = m1 + m2;
    let moment = m1 * x[0] + m2 * x[1];
    (total * total * total - total) * t / 24.0
        - m1 * m2 * (x[1] - x[0]) / 2.0
        - moment * moment / (2.0 * total * t)
}

/// Two-point branch for points that stay apart.
pub fn corollary_n2_separate(t: f64, x: [f64; 2], m: [u32; 2]) -> f64 {
    corollary_n1(t, x[0], m[0]) + corollary_n1(t, x[1], m[1])
}

/// Two-point exponent; the merged branch applies when
/// `(x₂ − x₁)/t ≤ (m₁ + m₂)/2`.
pub fn corollary_n2(t: f64, x: [f64; 2], m: [u32; 2]) -> f64 {
    if (x[1] - x[0]) / t <= 0.5 * f64::from(m[0] + m[1]) {
        corollary_n2_merged(t, x, m)
    } else {
        corollary_n2_separate(t, x, m)
    }
}

/// Both sides of the first-merge recursion
/// `Σ_k [(m_k³ − m_k)s₀/24 − m_k(x_k − ξ_k(s₀))²/(2s₀)] + γ₃(t − s₀, x′, m′) = γ₃(t, x, m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub s0: f64,
    pub first_segment: f64,
    pub remainder: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
}

/// Requires a single final cluster and at least two locations. The
/// remainder term is computed from a fresh simulation of `(t − s₀, x′, m′)`.
pub fn verify_recursion_identity(inst: &MomentInstance) -> Result<RecursionReport> {
    let res = simulate_inertia(inst);
    if inst.n() < 2 || res.num_blocks() != 1 {
        return Err(Error::HypothesisNotMet {
            n: inst.n(),
            clusters: res.num_blocks(),
        });
    }
    let merge = first_optimal_merge(&res, inst)?;
    let s0 = merge.s0;
    let first_segment: f64 = inst
        .x()
        .iter()
        .zip(inst.m())
        .zip(&merge.xi_at_s0)
        .map(|((&x, &m), &xi)| {
            let m = f64::from(m);
            (m * m * m - m) * s0 / 24.0 - m * (x - xi) * (x - xi) / (2.0 * s0)
        })
        .sum();

    let rest = inst.t() - s0;
    let remainder = if rest <= EVENT_TOLERANCE * (1.0 + inst.t()) {
        // every ξ has reached 0, so the remaining segment carries no cost
        0.0
    } else {
        let m_prime: Vec<i64> = merge.m_prime.iter().map(|&v| i64::from(v)).collect();
        let next = MomentInstance::new(rest, &merge.x_prime, &m_prime)?;
        gamma3(&next, &simulate_inertia(&next))
    };
    let lhs = first_segment + remainder;
    let rhs = gamma3(inst, &res);
    Ok(RecursionReport {
        s0,
        first_segment,
        remainder,
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
    })
}

/// The three routes to the exponent side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    #[serde(rename = "max_dev")]
    pub max_pairwise_dev: f64,
    #[serde(with = "one_based::sets")]
    pub partition: Vec<Vec<usize>>,
    #[serde(rename = "a")]
    pub minimizer_a: Vec<f64>,
    #[serde(rename = "b")]
    pub minimizer_b: Vec<f64>,
    pub structure_ok: bool,
}

impl GammaReport {
    /// The common value, taken from the closed form.
    pub fn gamma(&self) -> f64 {
        self.gamma3
    }

    /// `max_pairwise_dev / (1 + |γ₃|)`.
    pub fn relative_dev(&self) -> f64 {
        self.max_pairwise_dev / (1.0 + self.gamma3.abs())
    }
}

pub fn gamma_report(inst: &MomentInstance) -> GammaReport {
    let flat = inst.flatten();
    let sol1 = solve_gamma1(&flat, inst.t());
    let sol2 = solve_gamma2(inst);
    let res = simulate_inertia(inst);
    let g3 = gamma3(inst, &res);
    let structure = check_minimizer_structure(&sol1, &flat, &res);
    let (g1, g2) = (sol1.objective, sol2.objective);
    let max_pairwise_dev = (g1 - g2).abs().max((g1 - g3).abs()).max((g2 - g3).abs());
    GammaReport {
        gamma1: g1,
        gamma2: g2,
        gamma3: g3,
        max_pairwise_dev,
        partition: res.partition,
        minimizer_a: sol1.values,
        minimizer_b: sol2.values,
        structure_ok: structure.ok(),
    }
}
