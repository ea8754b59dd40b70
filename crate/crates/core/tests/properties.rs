use lyap_core::closed_form::gamma3_block;
use lyap_core::instance::{gamma1_objective, gamma2_objective};
use lyap_core::variational::{build_b_from_clusters, gamma2_margins, lift_b_to_a};
use lyap_core::{
    gamma3, gamma_report, simulate_inertia, solve_gamma1, solve_gamma2, MomentInstance,
};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = MomentInstance> {
    (
        0.1f64..5.0,
        prop::collection::vec((0.01f64..1.5, 1i64..=5), 1..=6),
        -3.0f64..3.0,
    )
        .prop_map(|(t, steps, start)| {
            let mut x = Vec::with_capacity(steps.len());
            let mut pos = start;
            for (dx, _) in &steps {
                x.push(pos);
                pos += dx;
            }
            let m: Vec<i64> = steps.iter().map(|&(_, m)| m).collect();
            MomentInstance::new(t, &x, &m).unwrap()
        })
}

fn feasible(values: &[f64], margins: &[f64], slack: f64) -> bool {
    values
        .windows(2)
        .zip(margins)
        .all(|(w, g)| w[0] - w[1] >= g - slack)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn three_routes_agree(inst in instance()) {
        let r = gamma_report(&inst);
        prop_assert!(r.relative_dev() <= 1e-9, "{r:?}");
        prop_assert!(r.structure_ok || r.max_pairwise_dev <= 1e-9);
    }

    #[test]
    fn minimizers_are_feasible(inst in instance()) {
        let flat = inst.flatten();
        let a = solve_gamma1(&flat, inst.t());
        prop_assert!(feasible(&a.values, &vec![1.0; flat.nu() - 1], 1e-9));
        let b = solve_gamma2(&inst);
        prop_assert!(feasible(&b.values, &gamma2_margins(inst.m()), 1e-9));
    }

    #[test]
    fn cluster_point_is_feasible_and_optimal(inst in instance()) {
        let res = simulate_inertia(&inst);
        let b = build_b_from_clusters(&res, &inst);
        prop_assert!(feasible(&b, &gamma2_margins(inst.m()), 1e-9));
        let value = gamma2_objective(&inst, &b).unwrap();
        prop_assert!((value - gamma3(&inst, &res)).abs() <= 1e-9 * (1.0 + value.abs()));
        let best = solve_gamma2(&inst);
        for (p, q) in b.iter().zip(&best.values) {
            prop_assert!((p - q).abs() <= 1e-7);
        }
    }

    #[test]
    fn lift_preserves_objective_and_feasibility(inst in instance()) {
        let b = solve_gamma2(&inst);
        let a = lift_b_to_a(&b.values, &inst).unwrap();
        let flat = inst.flatten();
        prop_assert!(feasible(&a, &vec![1.0; flat.nu() - 1], 1e-9));
        let lifted = gamma1_objective(&flat, inst.t(), &a).unwrap();
        prop_assert!((lifted - b.objective).abs() <= 1e-9 * (1.0 + b.objective.abs()));
    }

    #[test]
    fn feasible_perturbations_do_not_improve(inst in instance(), dirs in prop::collection::vec(-1.0f64..1.0, 30), eps in 1e-4f64..1e-1) {
        let flat = inst.flatten();
        let best = solve_gamma1(&flat, inst.t());
        let margins = vec![1.0; flat.nu() - 1];
        let moved: Vec<f64> = best.values.iter().zip(dirs.iter().cycle()).map(|(a, d)| a + eps * d).collect();
        if feasible(&moved, &margins, 0.0) {
            let value = gamma1_objective(&flat, inst.t(), &moved).unwrap();
            prop_assert!(value > best.objective - 1e-12);
        }
    }

    #[test]
    fn stationarity_with_nonnegative_multipliers(inst in instance()) {
        let flat = inst.flatten();
        let t = inst.t();
        let sol = solve_gamma1(&flat, t);
        let mut lambda = 0.0;
        let nu = flat.nu();
        for k in 0..nu {
            lambda += t * sol.values[k] + flat.u()[k];
            if k + 1 < nu {
                prop_assert!(lambda >= -1e-9 * (1.0 + lambda.abs()));
                let slack = sol.values[k] - sol.values[k + 1] - 1.0;
                prop_assert!((lambda * slack).abs() <= 1e-8);
            }
        }
        prop_assert!(lambda.abs() <= 1e-8 * (1.0 + nu as f64 * t));
    }

    #[test]
    fn closed_form_is_block_sum(inst in instance()) {
        let res = simulate_inertia(&inst);
        let sum: f64 = res.partition.iter().map(|b| gamma3_block(&inst, b)).sum();
        prop_assert_eq!(sum, gamma3(&inst, &res));
    }

    #[test]
    fn instance_json_round_trip(inst in instance()) {
        let text = serde_json::to_string(&inst).unwrap();
        let back: MomentInstance = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, inst);
    }
}

#[test]
fn invalid_json_is_rejected() {
    for text in [
        r#"{"t": 0, "x": [0], "m": [1]}"#,
        r#"{"t": 1, "x": [1, 0], "m": [1, 1]}"#,
        r#"{"t": 1, "x": [0], "m": [0]}"#,
        r#"{"t": 1, "x": [0, 1], "m": [1]}"#,
        r#"{"t": 1, "x": [], "m": []}"#,
    ] {
        assert!(
            serde_json::from_str::<MomentInstance>(text).is_err(),
            "{text}"
        );
    }
}

#[test]
fn report_partition_is_one_based_on_the_wire() {
    let inst = MomentInstance::new(1.0, &[0.0, 2.0], &[1, 1]).unwrap();
    let v = serde_json::to_value(gamma_report(&inst)).unwrap();
    assert_eq!(v["partition"], serde_json::json!([[1], [2]]));
}
