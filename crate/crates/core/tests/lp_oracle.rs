mod common;

use common::*;
use mmx_core::data::VariableMeta;
use mmx_core::example;
use mmx_core::linalg::Matrix;
use mmx_core::mixopt::{
    allocation_report, compose_objective, solve_lp, BoundState, LinearConstraint, LpError,
    LpProblem, LpSolution, LpStatus, ObjectiveSpec, Sense,
};
use rand::Rng;

fn objective(c: Vec<f64>) -> ObjectiveSpec {
    ObjectiveSpec {
        names: (0..c.len()).map(|j| format!("v{j}")).collect(),
        coefficients: c,
        intercept: 0.0,
    }
}

fn published_problem() -> LpProblem {
    let p = example::PREDICTORS.len();
    LpProblem::boxed(
        ObjectiveSpec {
            names: example::PREDICTORS.iter().map(|s| s.to_string()).collect(),
            coefficients: example::OBJECTIVE_COEFFICIENTS.to_vec(),
            intercept: example::FACTOR_INTERCEPT,
        },
        example::Z_LOWER,
        example::Z_UPPER,
    )
    .with_constraint(LinearConstraint::sum(
        "sum_z",
        p,
        Sense::Le,
        example::Z_SUM_LIMIT,
    ))
}

fn assert_feasible(problem: &LpProblem, sol: &LpSolution) {
    for j in 0..sol.z_star.len() {
        assert!(
            sol.z_star[j] >= problem.lower[j] - 1e-9 && sol.z_star[j] <= problem.upper[j] + 1e-9
        );
    }
    for c in &problem.linear_constraints {
        assert!(c.is_satisfied(&sol.z_star, 1e-9), "{} violated", c.label);
    }
    let recomputed: f64 = problem
        .objective
        .coefficients
        .iter()
        .zip(&sol.z_star)
        .map(|(c, z)| c * z)
        .sum();
    let scale = problem
        .objective
        .coefficients
        .iter()
        .fold(1.0f64, |m, c| m.max(c.abs()));
    assert!((sol.objective_value - recomputed).abs() <= 1e-9 * scale * sol.z_star.len() as f64);
    let total: f64 = sol.contributions.iter().sum();
    assert!((sol.objective_value - total).abs() <= 1e-9 * scale * sol.z_star.len() as f64);
}

/// No single variable can move to either bound, others fixed, and improve a
/// feasible objective.
fn assert_probe_optimal(problem: &LpProblem, sol: &LpSolution) {
    let base = sol.objective_value;
    let scale = problem
        .objective
        .coefficients
        .iter()
        .fold(1.0f64, |m, c| m.max(c.abs()));
    for j in 0..sol.z_star.len() {
        for target in [problem.lower[j], problem.upper[j]] {
            let mut z = sol.z_star.clone();
            z[j] = target;
            if problem
                .linear_constraints
                .iter()
                .all(|c| c.is_satisfied(&z, 1e-9))
            {
                let v = problem.objective.evaluate(&z);
                assert!(
                    v <= base + 1e-9 * scale,
                    "probe {j} → {target} improves {base} to {v}"
                );
            }
        }
    }
}

#[test]
fn published_instance() {
    let problem = published_problem();
    let sol = solve_lp(&problem).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_eq!(sol.z_star, example::OPTIMAL_Z.to_vec());
    assert!((sol.objective_value - example::OPTIMAL_OBJECTIVE).abs() <= 0.05);
    assert_eq!(sol.binding_constraints, vec!["sum_z".to_string()]);
    assert!((sol.contributions[3] - 92866.48).abs() <= 0.005);
    assert_feasible(&problem, &sol);
    assert_probe_optimal(&problem, &sol);
    // adp is the only variable strictly inside its bounds.
    assert_eq!(sol.bound_states[7], BoundState::Interior);
    assert!(sol.reduced_costs[7].abs() <= 1e-9 * 6e4);
}

#[test]
fn published_allocation_levels() {
    let problem = published_problem();
    let sol = solve_lp(&problem).unwrap();
    let rep = allocation_report(&problem, &sol, &example::predictor_meta());
    assert!((rep.rows[0].level - 140540.76).abs() < 1e-6);
    assert!((rep.predicted_volume - 2930738.58).abs() < 0.05);
    let shares: f64 = rep.rows.iter().map(|r| r.contribution).sum();
    assert!((shares - rep.objective_value).abs() < 1e-6);
}

#[test]
fn zero_allocation_predicts_intercept() {
    let problem = LpProblem::boxed(
        ObjectiveSpec {
            intercept: example::FACTOR_INTERCEPT,
            ..objective(example::OBJECTIVE_COEFFICIENTS.to_vec())
        },
        0.0,
        0.0,
    );
    let sol = solve_lp(&problem).unwrap();
    let rep = allocation_report(&problem, &sol, &example::predictor_meta());
    assert_eq!(rep.predicted_volume, example::FACTOR_INTERCEPT);
}

#[test]
fn negative_coefficients_sit_at_lower_bounds() {
    let problem = LpProblem::boxed(objective(vec![-1.0, -2.5, -0.1]), -2.0, 4.0);
    let sol = solve_lp(&problem).unwrap();
    assert_eq!(sol.z_star, vec![-2.0, -2.0, -2.0]);
}

#[test]
fn single_variable_with_cap() {
    let problem = LpProblem::boxed(objective(vec![1.0]), 0.0, 5.0)
        .with_constraint(LinearConstraint::sum("cap", 1, Sense::Le, 3.0));
    let sol = solve_lp(&problem).unwrap();
    assert_eq!(sol.z_star, vec![3.0]);
    assert_eq!(sol.objective_value, 3.0);
}

#[test]
fn greedy_knapsack_oracle() {
    let mut r = rng(500);
    for case in 0..500 {
        let p = 11;
        let c: Vec<f64> = (0..p)
            .map(|_| {
                let v: f64 = r.random_range(-60_000.0..70_000.0);
                (v * 100.0).round() / 100.0
            })
            .collect();
        let lo: Vec<f64> = (0..p).map(|_| -r.random_range(0..4) as f64).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + r.random_range(1..7) as f64).collect();
        let min_sum: f64 = lo.iter().sum();
        let max_sum: f64 = hi.iter().sum();
        let budget = r.random_range(min_sum..max_sum + 5.0);
        let problem = LpProblem {
            objective: objective(c.clone()),
            lower: lo.clone(),
            upper: hi.clone(),
            linear_constraints: vec![LinearConstraint::sum("budget", p, Sense::Le, budget)],
        };
        let sol = solve_lp(&problem).unwrap();
        let want = greedy_knapsack(&c, &lo, &hi, budget);
        for j in 0..p {
            assert!(
                (sol.z_star[j] - want[j]).abs() <= 1e-9,
                "case {case} var {j}: {:?} vs {:?}",
                sol.z_star,
                want
            );
        }
        assert_feasible(&problem, &sol);
        assert_probe_optimal(&problem, &sol);
    }
}

#[test]
fn multi_constraint_certificates() {
    let mut r = rng(501);
    for _ in 0..200 {
        let p = r.random_range(2..9);
        let c: Vec<f64> = (0..p).map(|_| r.random_range(-5.0..10.0)).collect();
        let mut problem = LpProblem::boxed(objective(c), -2.0, 4.0);
        for k in 0..r.random_range(1..4) {
            let w: Vec<f64> = (0..p).map(|_| r.random_range(0.0..3.0)).collect();
            let bound = r.random_range(0.0..10.0);
            problem = problem.with_constraint(LinearConstraint {
                label: format!("c{k}"),
                weights: w,
                sense: Sense::Le,
                bound,
            });
        }
        let sol = solve_lp(&problem).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_feasible(&problem, &sol);
        assert_probe_optimal(&problem, &sol);
    }
}

#[test]
fn statuses() {
    let infeasible = LpProblem::boxed(objective(vec![1.0, 1.0]), 0.0, 1.0)
        .with_constraint(LinearConstraint::sum("min", 2, Sense::Ge, 5.0));
    assert_eq!(solve_lp(&infeasible).unwrap().status, LpStatus::Infeasible);

    let unbounded = LpProblem::boxed(objective(vec![1.0]), 0.0, f64::INFINITY);
    assert_eq!(solve_lp(&unbounded).unwrap().status, LpStatus::Unbounded);

    let mut bad = LpProblem::boxed(objective(vec![1.0, 1.0]), 0.0, 1.0);
    bad.lower[1] = 2.0;
    assert!(
        matches!(solve_lp(&bad), Err(LpError::InfeasibleBounds { variable, .. }) if variable == "v1")
    );

    let eq = LpProblem::boxed(objective(vec![1.0, 2.0]), 0.0, 4.0)
        .with_constraint(LinearConstraint::sum("eq", 2, Sense::Eq, 3.0));
    let sol = solve_lp(&eq).unwrap();
    assert_eq!(sol.z_star, vec![0.0, 3.0]);
}

#[test]
fn composition_from_published_tables() {
    let names: Vec<String> = example::PREDICTORS.iter().map(|s| s.to_string()).collect();
    let obj = compose_objective(
        &names,
        &example::FACTOR_BETAS,
        &example::score_coefficients(),
        example::FACTOR_INTERCEPT,
    )
    .unwrap();
    assert!((obj.coefficients[0] - 59414.6).abs() < 0.1);
    for (a, b) in obj.coefficients.iter().zip(example::OBJECTIVE_COEFFICIENTS) {
        assert!((a - b).abs() <= 300.0);
    }
    let zero = compose_objective(&names, &[0.0, 0.0], &example::score_coefficients(), 1.0).unwrap();
    assert!(zero.coefficients.iter().all(|&c| c == 0.0));
    let basis = Matrix::from_fn(3, 1, |i, _| if i == 1 { 1.0 } else { 0.0 });
    let one = compose_objective(&names[..3], &[7.5], &basis, 0.0).unwrap();
    assert_eq!(one.coefficients, vec![0.0, 7.5, 0.0]);
}

#[test]
fn natural_levels_use_metadata() {
    let meta = vec![VariableMeta::new("v0", 10.0, 2.0, 0.0, 30.0)];
    let problem = LpProblem::boxed(objective(vec![1.0]), -1.0, 3.0);
    let sol = solve_lp(&problem).unwrap();
    let rep = allocation_report(&problem, &sol, &meta);
    assert_eq!(rep.rows[0].level, 16.0);
}
