//! Standalone re-validation of a solved instance: every constraint is
//! re-checked and the cost recomputed from scratch, independent of the
//! solvers' own bookkeeping.

use std::fmt;

use crate::model::{
    local_execution_time, mm1_execution_time, offloader_set, system_cost, Decision, Resource,
    StabilityMode, SystemModel, COEFF_SUM_TOL,
};
use crate::solver::Solution;

/// Relative tolerance for the recomputed-cost comparison.
pub const COST_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// 10a: malformed decision vector (wrong length or index out of range).
    DecisionShape(String),
    /// 10b: offloaded execution time exceeds local execution time.
    OffloadNotBeneficial { wd: usize },
    /// 10c: queue unstable at the allocated service rate.
    UnstableQueue { node: usize, slice: usize },
    /// 10d: inter-slice coefficients of an AP exceed the unit budget.
    OmegaRowSum { ap: usize, sum: f64 },
    /// 10e: intra-slice coefficients on a resource exceed the unit budget.
    PhiSum {
        resource: Resource,
        slice: usize,
        sum: f64,
    },
    /// A coefficient lies outside [0, 1].
    CoefficientRange(String),
    /// Recomputed system cost disagrees with the reported one.
    CostMismatch { reported: f64, recomputed: f64 },
    /// Cost could not be recomputed at the reported policies.
    DegeneratePolicy(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DecisionShape(msg) => write!(f, "10a: {msg}"),
            Violation::OffloadNotBeneficial { wd } => {
                write!(f, "10b at WD {wd}: offloading slower than local execution")
            }
            Violation::UnstableQueue { node, slice } => {
                write!(f, "10c at node {node}, slice {slice}: queue unstable")
            }
            Violation::OmegaRowSum { ap, sum } => {
                write!(f, "10d at AP {ap}: inter-slice coefficients sum to {sum}")
            }
            Violation::PhiSum {
                resource,
                slice,
                sum,
            } => match resource {
                Resource::Ap(a) => write!(
                    f,
                    "10e at AP {a}, slice {slice}: radio coefficients sum to {sum}"
                ),
                Resource::Node(j) => write!(
                    f,
                    "10e at node {j}, slice {slice}: compute coefficients sum to {sum}"
                ),
            },
            Violation::CoefficientRange(msg) => write!(f, "coefficient out of [0, 1]: {msg}"),
            Violation::CostMismatch {
                reported,
                recomputed,
            } => write!(
                f,
                "cost mismatch: reported {reported}, recomputed {recomputed}"
            ),
            Violation::DegeneratePolicy(msg) => write!(f, "degenerate policy: {msg}"),
        }
    }
}

fn check_unit_interval(value: f64, what: impl Fn() -> String) -> Result<(), Violation> {
    if !(0.0..=1.0 + COEFF_SUM_TOL).contains(&value) {
        return Err(Violation::CoefficientRange(format!("{} = {value}", what())));
    }
    Ok(())
}

/// Re-checks constraints 10a-10e and the reported system cost. Returns the
/// first violation found, checking structure first, then budgets, then
/// queueing, then cost.
pub fn validate_solution(
    model: &SystemModel,
    solution: &Solution,
    stability_mode: StabilityMode,
) -> Result<(), Violation> {
    let delta = &solution.delta;
    let policies = &solution.policies;

    // 10a
    if let Err(e) = delta.validate(model) {
        return Err(Violation::DecisionShape(e.to_string()));
    }
    if policies.inter_radio.len() != model.num_aps()
        || policies.intra_radio.len() != model.num_slices
        || policies.intra_compute.len() != model.num_slices
    {
        return Err(Violation::DecisionShape(
            "policy matrices do not match the model dimensions".into(),
        ));
    }

    // 10d
    for (a, row) in policies.inter_radio.iter().enumerate() {
        if row.len() != model.num_slices {
            return Err(Violation::DecisionShape(format!(
                "inter-slice row of AP {a} has length {}",
                row.len()
            )));
        }
        for (n, &omega) in row.iter().enumerate() {
            check_unit_interval(omega, || format!("omega[{a}][{n}]"))?;
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + COEFF_SUM_TOL {
            return Err(Violation::OmegaRowSum { ap: a, sum });
        }
    }

    // 10e over both resource kinds
    for n in 0..model.num_slices {
        for a in 0..model.num_aps() {
            let mut sum = 0.0;
            for i in offloader_set(model, delta, Resource::Ap(a), n) {
                let phi = policies.intra_radio[n][a][i];
                check_unit_interval(phi, || format!("phi_radio[{n}][{a}][{i}]"))?;
                sum += phi;
            }
            if sum > 1.0 + COEFF_SUM_TOL {
                return Err(Violation::PhiSum {
                    resource: Resource::Ap(a),
                    slice: n,
                    sum,
                });
            }
        }
        for j in 0..model.num_nodes() {
            let mut sum = 0.0;
            for i in offloader_set(model, delta, Resource::Node(j), n) {
                let phi = policies.intra_compute[n][j][i];
                check_unit_interval(phi, || format!("phi_compute[{n}][{j}][{i}]"))?;
                sum += phi;
            }
            if sum > 1.0 + COEFF_SUM_TOL {
                return Err(Violation::PhiSum {
                    resource: Resource::Node(j),
                    slice: n,
                    sum,
                });
            }
        }
    }

    // 10c then 10b per offloader, at the reported coefficients
    for (i, d) in delta.decisions.iter().enumerate() {
        if let Decision::Offload { node, slice, .. } = *d {
            match mm1_execution_time(model, delta, i, node, slice, policies, stability_mode) {
                Err(_) => return Err(Violation::UnstableQueue { node, slice }),
                Ok(t) => {
                    if t > local_execution_time(model, i) {
                        return Err(Violation::OffloadNotBeneficial { wd: i });
                    }
                }
            }
        }
    }

    // cost, recomputed from scratch
    let recomputed = system_cost(model, delta, policies)
        .map_err(|e| Violation::DegeneratePolicy(e.to_string()))?;
    let reported = solution.cost.system_cost;
    let scale = recomputed.system_cost.abs().max(1.0);
    if (reported - recomputed.system_cost).abs() > COST_REL_TOL * scale {
        return Err(Violation::CostMismatch {
            reported,
            recomputed: recomputed.system_cost,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::InterSliceMode;
    use crate::scenario::{generate, ScenarioConfig};
    use crate::solver::{best_response_solve, exhaustive_solve, DEFAULT_MAX_SPACE};

    fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            num_wds: 3,
            num_aps: 2,
            num_coins: 1,
            num_mecs: 1,
            num_slices: 2,
            ..Default::default()
        }
    }

    #[test]
    fn solver_outputs_pass_validation() {
        let config = small_config();
        for seed in 0..10 {
            let model = generate(&config, seed).unwrap();
            let ex = exhaustive_solve(
                &model,
                InterSliceMode::Optimal,
                StabilityMode::NodeTotal,
                DEFAULT_MAX_SPACE,
            )
            .unwrap();
            validate_solution(&model, &ex, StabilityMode::NodeTotal).unwrap();
            let br = best_response_solve(
                &model,
                InterSliceMode::EqualShare,
                StabilityMode::NodeTotal,
                100,
                seed,
            )
            .unwrap();
            validate_solution(&model, &br, StabilityMode::NodeTotal).unwrap();
        }
    }

    #[test]
    fn detects_omega_row_violation() {
        let config = small_config();
        let model = generate(&config, 1).unwrap();
        let mut s = exhaustive_solve(
            &model,
            InterSliceMode::Optimal,
            StabilityMode::NodeTotal,
            DEFAULT_MAX_SPACE,
        )
        .unwrap();
        s.policies.inter_radio[0] = vec![0.9, 0.6];
        let v = validate_solution(&model, &s, StabilityMode::NodeTotal).unwrap_err();
        assert!(matches!(v, Violation::OmegaRowSum { ap: 0, .. }));
        assert!(v.to_string().starts_with("10d"));
    }

    #[test]
    fn detects_cost_perturbation() {
        let config = small_config();
        let model = generate(&config, 2).unwrap();
        let mut s = exhaustive_solve(
            &model,
            InterSliceMode::Optimal,
            StabilityMode::NodeTotal,
            DEFAULT_MAX_SPACE,
        )
        .unwrap();
        s.cost.system_cost *= 1.01;
        let v = validate_solution(&model, &s, StabilityMode::NodeTotal).unwrap_err();
        assert!(matches!(v, Violation::CostMismatch { .. }));
    }

    #[test]
    fn detects_truncated_decision_vector() {
        let config = small_config();
        let model = generate(&config, 3).unwrap();
        let mut s = exhaustive_solve(
            &model,
            InterSliceMode::Optimal,
            StabilityMode::NodeTotal,
            DEFAULT_MAX_SPACE,
        )
        .unwrap();
        s.delta.decisions.pop();
        let v = validate_solution(&model, &s, StabilityMode::NodeTotal).unwrap_err();
        assert!(matches!(v, Violation::DecisionShape(_)));
    }
}
