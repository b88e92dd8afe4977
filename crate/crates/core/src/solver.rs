//! Discrete outer layer of the joint problem: choose the offloading
//! decision vector, using the closed-form allocation layer as the exact
//! inner solver, subject to the per-WD benefit (10b) and queue-stability
//! (10c) constraints.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{optimal_policies_for_decision, InterSliceMode};
use crate::error::{Error, Result};
use crate::model::{
    local_execution_time, min_execution_time, min_transmission_time, system_cost, CostBreakdown,
    Decision, DecisionVector, Policies, StabilityMode, SystemModel, STABILITY_EPS,
};

/// Default cap on the enumerated decision-space size.
pub const DEFAULT_MAX_SPACE: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    BestResponse,
}

/// Why a decision vector is infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infeasibility {
    /// 10b: offloaded completion time exceeds local execution.
    OffloadNotBeneficial { wd: usize },
    /// 10c: arrival rate reaches the allocated service rate.
    UnstableQueue { wd: usize, node: usize, slice: usize },
    /// The chosen node has zero capability in the chosen slice.
    InfeasibleSliceNode { node: usize, slice: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Feasible { cost: f64 },
    Infeasible(Infeasibility),
}

/// A solved instance: decisions, continuous policies, cost and bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub delta: DecisionVector,
    pub policies: Policies,
    pub cost: CostBreakdown,
    pub method: Method,
    pub iterations: u64,
}

/// Precomputed per-instance tables for fast repeated evaluation of
/// decision vectors without building full policy structures.
pub struct Evaluator<'a> {
    model: &'a SystemModel,
    inter_mode: InterSliceMode,
    stability_mode: StabilityMode,
    /// sqrt of S_i / R_{i,a}, indexed [i][a]
    tx_sqrt: Vec<Vec<f64>>,
    /// sqrt of L_{i,n} / F_j^n (infinity when the node is absent from the
    /// slice), indexed [i][j][n]
    ex_sqrt: Vec<Vec<Vec<f64>>>,
    local_time: Vec<f64>,
}

/// Scratch buffers reused across evaluations.
#[derive(Clone)]
pub struct Scratch {
    /// per (AP, slice) sum of sqrt transmission times
    s_radio: Vec<f64>,
    /// per (node, slice) sum of sqrt execution times
    s_comp: Vec<f64>,
    /// per node total arrival rate of routed WDs
    arrivals: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        model: &'a SystemModel,
        inter_mode: InterSliceMode,
        stability_mode: StabilityMode,
    ) -> Self {
        let tx_sqrt = (0..model.num_wds())
            .map(|i| {
                (0..model.num_aps())
                    .map(|a| min_transmission_time(model, i, a).sqrt())
                    .collect()
            })
            .collect();
        let ex_sqrt = (0..model.num_wds())
            .map(|i| {
                (0..model.num_nodes())
                    .map(|j| {
                        (0..model.num_slices)
                            .map(|n| match min_execution_time(model, i, j, n) {
                                Ok(t) => t.sqrt(),
                                Err(_) => f64::INFINITY,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let local_time = (0..model.num_wds())
            .map(|i| local_execution_time(model, i))
            .collect();
        Self {
            model,
            inter_mode,
            stability_mode,
            tx_sqrt,
            ex_sqrt,
            local_time,
        }
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            s_radio: vec![0.0; self.model.num_aps() * self.model.num_slices],
            s_comp: vec![0.0; self.model.num_nodes() * self.model.num_slices],
            arrivals: vec![0.0; self.model.num_nodes()],
        }
    }

    /// Number of decision options per WD: Local plus every (AP, node, slice).
    pub fn options_per_wd(&self) -> u64 {
        1 + (self.model.num_aps() * self.model.num_nodes() * self.model.num_slices) as u64
    }

    /// Option index -> decision, ascending (a, j, n) after Local.
    pub fn decode_option(&self, option: u64) -> Decision {
        if option == 0 {
            return Decision::Local;
        }
        let k = option as usize - 1;
        let per_ap = self.model.num_nodes() * self.model.num_slices;
        Decision::Offload {
            ap: k / per_ap,
            node: (k % per_ap) / self.model.num_slices,
            slice: k % self.model.num_slices,
        }
    }

    /// Checks 10b/10c and computes the conditional system cost under the
    /// optimal intra-slice shares, all from the precomputed tables.
    pub fn evaluate(&self, decisions: &[Decision], scratch: &mut Scratch) -> Evaluation {
        let n_slices = self.model.num_slices;
        scratch.s_radio.fill(0.0);
        scratch.s_comp.fill(0.0);
        scratch.arrivals.fill(0.0);

        let mut local_total = 0.0;
        for (i, d) in decisions.iter().enumerate() {
            match *d {
                Decision::Local => local_total += self.local_time[i],
                Decision::Offload { ap, node, slice } => {
                    let ex = self.ex_sqrt[i][node][slice];
                    if !ex.is_finite() {
                        return Evaluation::Infeasible(Infeasibility::InfeasibleSliceNode {
                            node,
                            slice,
                        });
                    }
                    scratch.s_radio[ap * n_slices + slice] += self.tx_sqrt[i][ap];
                    scratch.s_comp[node * n_slices + slice] += ex;
                    scratch.arrivals[node] += self.model.wds[i].arrival_rate;
                }
            }
        }

        // 10b / 10c at the optimal compute shares: the service rate WD i
        // receives is 1 / (sqrt(T_ex_min) * sum of sqrt times at its node)
        for (i, d) in decisions.iter().enumerate() {
            if let Decision::Offload { node, slice, .. } = *d {
                let service = 1.0 / (self.ex_sqrt[i][node][slice] * scratch.s_comp[node * n_slices + slice]);
                let arrival = match self.stability_mode {
                    StabilityMode::NodeTotal => scratch.arrivals[node],
                    StabilityMode::PerWdShare => self.model.wds[i].arrival_rate,
                };
                let margin = service - arrival;
                if margin <= STABILITY_EPS {
                    return Evaluation::Infeasible(Infeasibility::UnstableQueue {
                        wd: i,
                        node,
                        slice,
                    });
                }
                if 1.0 / margin > self.local_time[i] {
                    return Evaluation::Infeasible(Infeasibility::OffloadNotBeneficial { wd: i });
                }
            }
        }

        let mut cost = local_total;
        for a in 0..self.model.num_aps() {
            let row = &scratch.s_radio[a * n_slices..(a + 1) * n_slices];
            match self.inter_mode {
                InterSliceMode::Optimal => {
                    let total: f64 = row.iter().sum();
                    cost += total * total;
                }
                InterSliceMode::EqualShare => {
                    let n = n_slices as f64;
                    cost += row.iter().map(|s| n * s * s).sum::<f64>();
                }
            }
        }
        cost += scratch.s_comp.iter().map(|s| s * s).sum::<f64>();
        Evaluation::Feasible { cost }
    }
}

/// Evaluates one decision vector: inner allocation plus 10b/10c checks.
pub fn evaluate_decision(
    model: &SystemModel,
    delta: &DecisionVector,
    inter_mode: InterSliceMode,
    stability_mode: StabilityMode,
) -> Result<Evaluation> {
    delta.validate(model)?;
    let evaluator = Evaluator::new(model, inter_mode, stability_mode);
    let mut scratch = evaluator.scratch();
    Ok(evaluator.evaluate(&delta.decisions, &mut scratch))
}

fn build_solution(
    model: &SystemModel,
    delta: DecisionVector,
    inter_mode: InterSliceMode,
    method: Method,
    iterations: u64,
) -> Result<Solution> {
    let alloc = optimal_policies_for_decision(model, &delta, inter_mode)?;
    let cost = system_cost(model, &delta, &alloc.policies)?;
    Ok(Solution {
        delta,
        policies: alloc.policies,
        cost,
        method,
        iterations,
    })
}

fn decode_vector(evaluator: &Evaluator, mut code: u64, out: &mut Vec<Decision>) {
    let m = evaluator.options_per_wd();
    // WD 0 is the most significant digit so code order is lexicographic
    for slot in out.iter_mut().rev() {
        *slot = evaluator.decode_option(code % m);
        code /= m;
    }
}

/// Size of the full decision space, `(1 + A*J*N)^I`.
pub fn decision_space_size(model: &SystemModel) -> u128 {
    let m = 1 + (model.num_aps() * model.num_nodes() * model.num_slices) as u128;
    let mut size: u128 = 1;
    for _ in 0..model.num_wds() {
        size = size.saturating_mul(m);
    }
    size
}

/// Enumerates the whole decision space and returns the feasible minimum.
/// Ties break toward the lexicographically smallest encoding (Local first,
/// then ascending (a, j, n)). All-local is always feasible, so a solution
/// always exists.
pub fn exhaustive_solve(
    model: &SystemModel,
    inter_mode: InterSliceMode,
    stability_mode: StabilityMode,
    max_space: u128,
) -> Result<Solution> {
    model.validate()?;
    let size = decision_space_size(model);
    if size > max_space {
        return Err(Error::SearchSpaceTooLarge {
            size,
            cap: max_space,
        });
    }
    let size = size as u64;
    let evaluator = Evaluator::new(model, inter_mode, stability_mode);
    let num_wds = model.num_wds();

    // per-thread fold, then a deterministic min-reduce keyed on (cost, code)
    let best = (0..size)
        .into_par_iter()
        .fold(
            || (f64::INFINITY, u64::MAX, evaluator.scratch(), vec![Decision::Local; num_wds]),
            |(mut best_cost, mut best_code, mut scratch, mut decisions), code| {
                decode_vector(&evaluator, code, &mut decisions);
                if let Evaluation::Feasible { cost } = evaluator.evaluate(&decisions, &mut scratch)
                {
                    if cost < best_cost || (cost == best_cost && code < best_code) {
                        best_cost = cost;
                        best_code = code;
                    }
                }
                (best_cost, best_code, scratch, decisions)
            },
        )
        .map(|(cost, code, _, _)| (cost, code))
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    debug_assert!(best.0.is_finite(), "all-local is always feasible");
    let mut decisions = vec![Decision::Local; num_wds];
    decode_vector(&evaluator, best.1, &mut decisions);
    build_solution(
        model,
        DecisionVector { decisions },
        inter_mode,
        Method::Exhaustive,
        size,
    )
}

/// Best-response sweeps from the all-local start: WDs take turns (seeded
/// random order per round) switching to their cost-minimizing feasible
/// decision with the others fixed. A WD whose best alternative only ties
/// its current cost stays put, so the system cost strictly decreases at
/// every accepted switch and the dynamics terminate.
pub fn best_response_solve(
    model: &SystemModel,
    inter_mode: InterSliceMode,
    stability_mode: StabilityMode,
    max_rounds: u64,
    seed: u64,
) -> Result<Solution> {
    best_response_solve_traced(model, inter_mode, stability_mode, max_rounds, seed)
        .map(|(solution, _)| solution)
}

/// [`best_response_solve`] that also returns the conditional-cost trace,
/// one entry per accepted switch after the all-local start.
pub fn best_response_solve_traced(
    model: &SystemModel,
    inter_mode: InterSliceMode,
    stability_mode: StabilityMode,
    max_rounds: u64,
    seed: u64,
) -> Result<(Solution, Vec<f64>)> {
    model.validate()?;
    assert!(max_rounds >= 1);
    let evaluator = Evaluator::new(model, inter_mode, stability_mode);
    let mut scratch = evaluator.scratch();
    let mut decisions = vec![Decision::Local; model.num_wds()];
    let mut current_cost = match evaluator.evaluate(&decisions, &mut scratch) {
        Evaluation::Feasible { cost } => cost,
        Evaluation::Infeasible(_) => unreachable!("all-local is always feasible"),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..model.num_wds()).collect();
    let options = evaluator.options_per_wd();
    let mut trace = vec![current_cost];
    let mut rounds = 0;
    for _ in 0..max_rounds {
        rounds += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &i in &order {
            let incumbent = decisions[i];
            let mut best = (current_cost, incumbent);
            for option in 0..options {
                let candidate = evaluator.decode_option(option);
                if candidate == incumbent {
                    continue;
                }
                decisions[i] = candidate;
                if let Evaluation::Feasible { cost } = evaluator.evaluate(&decisions, &mut scratch)
                {
                    if cost < best.0 {
                        best = (cost, candidate);
                    }
                }
            }
            decisions[i] = best.1;
            if best.1 != incumbent {
                debug_assert!(best.0 < current_cost);
                current_cost = best.0;
                trace.push(current_cost);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let solution = build_solution(
        model,
        DecisionVector { decisions },
        inter_mode,
        Method::BestResponse,
        rounds,
    )?;
    Ok((solution, trace))
}

/// Exhaustive when the space fits under `max_space`, best response
/// otherwise.
pub fn auto_solve(
    model: &SystemModel,
    inter_mode: InterSliceMode,
    stability_mode: StabilityMode,
    max_space: u128,
    max_rounds: u64,
    seed: u64,
) -> Result<Solution> {
    if decision_space_size(model) <= max_space {
        exhaustive_solve(model, inter_mode, stability_mode, max_space)
    } else {
        best_response_solve(model, inter_mode, stability_mode, max_rounds, seed)
    }
}
