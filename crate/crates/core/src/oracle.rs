//! Exhaustive active-set oracle for margin-chain quadratic programs.
//!
//! Every subset `S` of the margins is tried as the equality set. Variables
//! chained by equalities collapse to one anchor per run, `v_k = A − o_k`, and
//! the anchor has the closed form
//! `A = Σ_k (w_k o_k − l_k) / Σ_k w_k`. The least-objective candidate that
//! satisfies the remaining margins is the global minimizer. Nothing here
//! shares code with the isotonic path.

use crate::error::{check_len, Error, Result};
use crate::instance::{FlatInstance, MomentInstance};
use crate::variational::{active_set, gamma2_margins, VariationalSolution};

/// Largest dimension accepted; enumeration visits `2^(d−1)` subsets.
pub const MAX_ORACLE_DIM: usize = 20;

/// `min Σ (w_i/2) v_i² + l_i v_i + constant` s.t. `v_i − v_{i+1} ≥ g_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginChainQp {
    pub quadratic: Vec<f64>,
    pub linear: Vec<f64>,
    pub margins: Vec<f64>,
    pub constant: f64,
}

impl MarginChainQp {
    /// γ₁ in `a`: `w = t`, `l = u`.
    pub fn gamma1(flat: &FlatInstance, t: f64) -> Self {
        MarginChainQp {
            quadratic: vec![t; flat.nu()],
            linear: flat.u().to_vec(),
            margins: vec![1.0; flat.nu().saturating_sub(1)],
            constant: 0.0,
        }
    }

    /// γ₂ in `b`: expanding the square gives `w = m t`, `l = m x` and the
    /// constant `Σ (m³ − m) t/24`.
    pub fn gamma2(inst: &MomentInstance) -> Self {
        let t = inst.t();
        let m: Vec<f64> = inst.m().iter().map(|&v| f64::from(v)).collect();
        MarginChainQp {
            quadratic: m.iter().map(|mi| mi * t).collect(),
            linear: m.iter().zip(inst.x()).map(|(mi, xi)| mi * xi).collect(),
            margins: gamma2_margins(inst.m()),
            constant: m.iter().map(|mi| (mi * mi * mi - mi) * t / 24.0).sum(),
        }
    }

    pub fn dim(&self) -> usize {
        self.quadratic.len()
    }

    pub fn objective(&self, v: &[f64]) -> f64 {
        self.constant
            + v.iter()
                .zip(&self.quadratic)
                .zip(&self.linear)
                .map(|((vi, w), l)| 0.5 * w * vi * vi + l * vi)
                .sum::<f64>()
    }
}

pub fn bruteforce_qp_oracle(qp: &MarginChainQp) -> Result<VariationalSolution> {
    let d = qp.dim();
    check_len(d, qp.linear.len())?;
    check_len(d.saturating_sub(1), qp.margins.len())?;
    if d > MAX_ORACLE_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    if d == 0 {
        return Ok(VariationalSolution {
            values: Vec::new(),
            objective: qp.constant,
            active: Vec::new(),
        });
    }

    let scale = 1.0 + qp.margins.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    let feasibility_slack = 1e-12 * scale;
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut v = vec![0.0; d];
    for mask in 0u32..(1u32 << (d - 1)) {
        let mut start = 0;
        while start < d {
            let mut end = start;
            while end + 1 < d && mask & (1 << end) != 0 {
                end += 1;
            }
            let mut offset = 0.0;
            let (mut num, mut den) = (0.0, 0.0);
            for k in start..=end {
                if k > start {
                    offset += qp.margins[k - 1];
                }
                num += qp.quadratic[k] * offset - qp.linear[k];
                den += qp.quadratic[k];
            }
            let anchor = num / den;
            let mut offset = 0.0;
            for (k, vk) in (start..=end).zip(&mut v[start..=end]) {
                if k > start {
                    offset += qp.margins[k - 1];
                }
                *vk = anchor - offset;
            }
            start = end + 1;
        }
        let feasible = (0..d - 1).all(|i| v[i] - v[i + 1] >= qp.margins[i] - feasibility_slack);
        if !feasible {
            continue;
        }
        let objective = qp.objective(&v);
        let chosen: Vec<usize> = (0..d - 1).filter(|i| mask & (1 << i) != 0).collect();
        let better = match &best {
            None => true,
            Some((obj, set, _)) => objective < *obj || (objective == *obj && chosen < *set),
        };
        if better {
            best = Some((objective, chosen, v.clone()));
        }
    }
    let (objective, _, values) = best.expect("the all-active candidate is always feasible");
    let active = active_set(&values, &qp.margins);
    Ok(VariationalSolution {
        values,
        objective,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::{solve_gamma1, solve_gamma2};

    fn inst(t: f64, x: &[f64], m: &[i64]) -> MomentInstance {
        MomentInstance::new(t, x, m).unwrap()
    }

    #[test]
    fn matches_gamma1_example() {
        let i = inst(1.0, &[0.0, 0.5], &[1, 1]);
        let flat = i.flatten();
        let o = bruteforce_qp_oracle(&MarginChainQp::gamma1(&flat, 1.0)).unwrap();
        let s = solve_gamma1(&flat, 1.0);
        assert!((o.objective - s.objective).abs() < 1e-14);
        assert!((o.values[0] - 0.25).abs() < 1e-14 && (o.values[1] + 0.75).abs() < 1e-14);
    }

    #[test]
    fn empty_active_set_wins() {
        let o =
            bruteforce_qp_oracle(&MarginChainQp::gamma2(&inst(1.0, &[0.0, 2.0], &[1, 1]))).unwrap();
        assert_eq!(o.values, vec![0.0, -2.0]);
        assert!(o.active.is_empty());
    }

    #[test]
    fn single_variable_is_vertex() {
        let qp = MarginChainQp {
            quadratic: vec![2.0],
            linear: vec![3.0],
            margins: vec![],
            constant: 1.0,
        };
        let o = bruteforce_qp_oracle(&qp).unwrap();
        assert_eq!(o.values, vec![-1.5]);
        assert_eq!(o.objective, 1.0 - 2.25);
    }

    #[test]
    fn gamma2_objective_form_matches_direct_evaluation() {
        let i = inst(1.3, &[-0.4, 0.2, 1.1], &[2, 1, 3]);
        let qp = MarginChainQp::gamma2(&i);
        let b = [0.7, -1.2, -3.0];
        let direct = crate::instance::gamma2_objective(&i, &b).unwrap();
        assert!((qp.objective(&b) - direct).abs() < 1e-12);
        let o = bruteforce_qp_oracle(&qp).unwrap();
        assert!((o.objective - solve_gamma2(&i).objective).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_dimension() {
        let flat = inst(1.0, &[0.0], &[21]).flatten();
        assert_eq!(
            bruteforce_qp_oracle(&MarginChainQp::gamma1(&flat, 1.0)),
            Err(Error::DimensionTooLarge(21))
        );
    }
}
