//! Randomized self-check suites driven by the `verify` command.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{gamma_report, verify_recursion_identity};
use crate::clusters::{block_mean, block_speed, separation_margins, simulate_inertia_observed};
use crate::instance::MomentInstance;
use crate::oracle::{bruteforce_qp_oracle, MarginChainQp};
use crate::quadrature::{contour_moment, heat_kernel, ContourConfig, DEFAULT_TRUNCATION_SIGMAS};
use crate::sampling::InstanceGenerator;
use crate::variational::{
    check_minimizer_structure, solve_gamma1, solve_gamma2, VariationalSolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Triple,
    Oracle,
    Structure,
    Recursion,
    Momentum,
    Quadrature,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Triple,
        Suite::Oracle,
        Suite::Structure,
        Suite::Recursion,
        Suite::Momentum,
        Suite::Quadrature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Triple => "triple",
            Suite::Oracle => "oracle",
            Suite::Structure => "structure",
            Suite::Recursion => "recursion",
            Suite::Momentum => "momentum",
            Suite::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Outcome of one check on one instance.
enum Outcome {
    Pass,
    Skip,
    Fail(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub checked: usize,
    pub passed: usize,
    pub skipped: usize,
    pub failed: usize,
    /// Up to five failure descriptions, in instance order.
    pub failures: Vec<String>,
}

impl SuiteSummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

pub fn run_suite(suite: Suite, seed: u64, count: usize) -> SuiteSummary {
    let mut gen = InstanceGenerator::new(seed);
    let instances: Vec<MomentInstance> = match suite {
        Suite::Oracle => (0..count)
            .map(|_| gen.sample_where(|i| i.nu() <= 10))
            .collect(),
        Suite::Quadrature => (0..count)
            .map(|_| gen.sample_where(|i| i.nu() == 1))
            .collect(),
        _ => gen.take(count).collect(),
    };
    let outcomes: Vec<Outcome> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| match suite {
            Suite::Triple => check_triple(inst),
            Suite::Oracle => check_oracle(inst),
            Suite::Structure => check_structure(inst),
            Suite::Recursion => check_recursion(inst),
            Suite::Momentum => check_physics(inst),
            Suite::Quadrature => check_single_factor(inst, [1.0, 4.0, 10.0][k % 3]),
        })
        .collect();

    let mut summary = SuiteSummary {
        suite,
        checked: outcomes.len(),
        passed: 0,
        skipped: 0,
        failed: 0,
        failures: Vec::new(),
    };
    for (inst, outcome) in instances.iter().zip(outcomes) {
        match outcome {
            Outcome::Pass => summary.passed += 1,
            Outcome::Skip => summary.skipped += 1,
            Outcome::Fail(why) => {
                summary.failed += 1;
                if summary.failures.len() < 5 {
                    summary.failures.push(format!(
                        "t={} x={:?} m={:?}: {why}",
                        inst.t(),
                        inst.x(),
                        inst.m()
                    ));
                }
            }
        }
    }
    summary
}

fn check_triple(inst: &MomentInstance) -> Outcome {
    let r = gamma_report(inst);
    if r.relative_dev() <= 1e-8 {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("γ = ({}, {}, {})", r.gamma1, r.gamma2, r.gamma3))
    }
}

fn compare(fast: &VariationalSolution, exact: &VariationalSolution) -> Option<String> {
    if (fast.objective - exact.objective).abs() > 1e-10 {
        return Some(format!(
            "objective {} vs oracle {}",
            fast.objective, exact.objective
        ));
    }
    let worst = fast
        .values
        .iter()
        .zip(&exact.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (worst > 1e-8).then(|| format!("minimizer off by {worst}"))
}

fn check_oracle(inst: &MomentInstance) -> Outcome {
    let flat = inst.flatten();
    let results = [
        bruteforce_qp_oracle(&MarginChainQp::gamma1(&flat, inst.t()))
            .map(|o| compare(&solve_gamma1(&flat, inst.t()), &o)),
        bruteforce_qp_oracle(&MarginChainQp::gamma2(inst))
            .map(|o| compare(&solve_gamma2(inst), &o)),
    ];
    for r in results {
        match r {
            Err(e) => return Outcome::Fail(e.to_string()),
            Ok(Some(why)) => return Outcome::Fail(why),
            Ok(None) => {}
        }
    }
    Outcome::Pass
}

fn check_structure(inst: &MomentInstance) -> Outcome {
    let flat = inst.flatten();
    let res = crate::clusters::simulate_inertia(inst);
    let report = check_minimizer_structure(&solve_gamma1(&flat, inst.t()), &flat, &res);
    if report.boundary_count() > 0 {
        Outcome::Skip
    } else if report.ok() {
        Outcome::Pass
    } else {
        let bad = report.gaps.iter().find(|g| !g.agrees).map(|g| g.index);
        Outcome::Fail(format!("gap {bad:?} disagrees with the partition"))
    }
}

fn check_recursion(inst: &MomentInstance) -> Outcome {
    match verify_recursion_identity(inst) {
        Err(crate::Error::HypothesisNotMet { .. }) => Outcome::Skip,
        Err(e) => Outcome::Fail(e.to_string()),
        Ok(r) if r.abs_diff <= 1e-9 * (1.0 + r.rhs.abs()) => Outcome::Pass,
        Ok(r) => Outcome::Fail(format!("lhs {} rhs {}", r.lhs, r.rhs)),
    }
}

fn check_physics(inst: &MomentInstance) -> Outcome {
    let nu = inst.nu() as u64;
    let mut problems = Vec::new();
    let res = simulate_inertia_observed(inst, |s, clusters| {
        let momentum: f64 = clusters.iter().map(|c| c.momentum()).sum();
        if momentum.abs() > 1e-12 {
            problems.push(format!("momentum {momentum} at s={s}"));
        }
        if clusters.iter().map(|c| c.mass).sum::<u64>() != nu {
            problems.push(format!("mass not conserved at s={s}"));
        }
        if clusters.windows(2).any(|w| w[0].position >= w[1].position) {
            problems.push(format!("ordering lost at s={s}"));
        }
    });
    let t = inst.t();
    for p in &res.optimal_paths {
        let end = p.evaluate(t).unwrap_or(f64::NAN);
        if !(end.abs() <= 1e-12) {
            problems.push(format!("ξ(t) = {end}"));
        }
    }
    for block in &res.partition {
        let psi = block_speed(inst, block);
        let start = block_mean(inst, block, inst.x());
        for s in [0.0, 0.5 * t, t] {
            let zeta: Vec<f64> = res
                .inertia_paths
                .iter()
                .map(|p| p.evaluate(s).unwrap_or(f64::NAN))
                .collect();
            let com = block_mean(inst, block, &zeta);
            if !((com - (start + psi * s)).abs() <= 1e-10) {
                problems.push(format!("block center off its line at s={s}"));
            }
        }
    }
    if separation_margins(inst, &res).iter().any(|&g| !(g > 0.0)) {
        problems.push("block separation fails".into());
    }
    match problems.into_iter().next() {
        None => Outcome::Pass,
        Some(why) => Outcome::Fail(why),
    }
}

fn check_single_factor(inst: &MomentInstance, big_t: f64) -> Outcome {
    let cfg = ContourConfig::around_minimizer(inst, big_t, DEFAULT_TRUNCATION_SIGMAS);
    let exact = heat_kernel(big_t * inst.t(), big_t * inst.x()[0]).expect("t > 0");
    match contour_moment(big_t, inst, &cfg) {
        Err(e) => Outcome::Fail(e.to_string()),
        Ok(est) if ((est.moment - exact) / exact).abs() <= 1e-8 => Outcome::Pass,
        Ok(est) => Outcome::Fail(format!("moment {} vs heat kernel {exact}", est.moment)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_small_sample() {
        for suite in Suite::ALL {
            let s = run_suite(suite, 3, 40);
            assert!(s.ok(), "{suite}: {:?}", s.failures);
            assert_eq!(s.checked, 40);
        }
    }

    #[test]
    fn zero_count_is_vacuous() {
        let s = run_suite(Suite::Triple, 0, 0);
        assert!(s.ok() && s.checked == 0);
    }

    #[test]
    fn suite_names_parse() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
