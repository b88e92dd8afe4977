//! Domain types and closed-form time/cost evaluations for the slice-enabled
//! edge network: uplink rates, transmission times, M/M/1 execution times,
//! queue stability, and the per-WD / per-slice / system cost model.
//!
//! Everything here is a pure function of immutable inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for coefficient-sum constraints (rows of omega, phi sums).
pub const COEFF_SUM_TOL: f64 = 1e-9;

/// Strictness margin for queue stability: the service-minus-arrival
/// denominator must exceed this to count as stable.
pub const STABILITY_EPS: f64 = 1e-9;

/// A task-generating wireless device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirelessDevice {
    pub id: usize,
    /// Local computing capability, giga-instructions per second.
    pub local_capability: f64,
    /// Transmission power, watts.
    pub tx_power: f64,
    /// Task input size, bits.
    pub task_size: f64,
    /// Expected instructions when executed locally, giga-instructions.
    pub local_instructions: f64,
    /// Expected instructions when executed in each slice, giga-instructions.
    pub slice_instructions: Vec<f64>,
    /// Task arrival rate, tasks per second.
    pub arrival_rate: f64,
}

/// A radio access point shared across slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: usize,
    /// Radio bandwidth, hertz.
    pub bandwidth: f64,
    /// Achievable physical rate per WD, bits per second.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Coin,
    Mec,
}

/// An edge node (COIN or MEC) with per-slice computing capability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeNode {
    pub id: usize,
    pub kind: NodeKind,
    /// Capability available to each slice, giga-instructions per second.
    pub slice_capability: Vec<f64>,
}

/// Immutable description of one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub wds: Vec<WirelessDevice>,
    pub aps: Vec<AccessPoint>,
    pub nodes: Vec<EdgeNode>,
    pub num_slices: usize,
}

impl SystemModel {
    /// Checks structural invariants: non-empty sets, consistent vector
    /// lengths, strictly positive parameters.
    pub fn validate(&self) -> Result<()> {
        if self.num_slices == 0 {
            return Err(Error::ConfigInvalid("num_slices must be >= 1".into()));
        }
        if self.wds.is_empty() || self.aps.is_empty() || self.nodes.is_empty() {
            return Err(Error::ConfigInvalid(
                "need at least one WD, one AP and one node".into(),
            ));
        }
        for wd in &self.wds {
            if wd.local_capability <= 0.0
                || wd.tx_power <= 0.0
                || wd.task_size <= 0.0
                || wd.local_instructions <= 0.0
                || wd.arrival_rate <= 0.0
            {
                return Err(Error::ConfigInvalid(format!(
                    "WD {} has a non-positive parameter",
                    wd.id
                )));
            }
            if wd.slice_instructions.len() != self.num_slices {
                return Err(Error::ConfigInvalid(format!(
                    "WD {} slice_instructions length {} != num_slices {}",
                    wd.id,
                    wd.slice_instructions.len(),
                    self.num_slices
                )));
            }
            if wd.slice_instructions.iter().any(|&l| l <= 0.0) {
                return Err(Error::ConfigInvalid(format!(
                    "WD {} has a non-positive slice instruction count",
                    wd.id
                )));
            }
        }
        for ap in &self.aps {
            if ap.rates.len() != self.wds.len() {
                return Err(Error::ConfigInvalid(format!(
                    "AP {} rates length {} != num WDs {}",
                    ap.id,
                    ap.rates.len(),
                    self.wds.len()
                )));
            }
            if ap.rates.iter().any(|&r| r <= 0.0) {
                return Err(Error::ConfigInvalid(format!(
                    "AP {} has a non-positive rate",
                    ap.id
                )));
            }
        }
        for node in &self.nodes {
            if node.slice_capability.len() != self.num_slices {
                return Err(Error::ConfigInvalid(format!(
                    "node {} slice_capability length {} != num_slices {}",
                    node.id,
                    node.slice_capability.len(),
                    self.num_slices
                )));
            }
            if node.slice_capability.iter().any(|&f| f < 0.0)
                || node.slice_capability.iter().all(|&f| f == 0.0)
            {
                return Err(Error::ConfigInvalid(format!(
                    "node {} needs non-negative capabilities, at least one positive",
                    node.id
                )));
            }
        }
        Ok(())
    }

    pub fn num_wds(&self) -> usize {
        self.wds.len()
    }

    pub fn num_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// One WD's offloading decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Local,
    Offload { ap: usize, node: usize, slice: usize },
}

/// One decision per WD.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub decisions: Vec<Decision>,
}

impl DecisionVector {
    pub fn all_local(num_wds: usize) -> Self {
        Self {
            decisions: vec![Decision::Local; num_wds],
        }
    }

    pub fn validate(&self, model: &SystemModel) -> Result<()> {
        if self.decisions.len() != model.num_wds() {
            return Err(Error::IndexOutOfRange(format!(
                "decision vector length {} != num WDs {}",
                self.decisions.len(),
                model.num_wds()
            )));
        }
        for (i, d) in self.decisions.iter().enumerate() {
            if let Decision::Offload { ap, node, slice } = *d {
                if ap >= model.num_aps() || node >= model.num_nodes() || slice >= model.num_slices {
                    return Err(Error::IndexOutOfRange(format!(
                        "WD {i} decision ({ap}, {node}, {slice}) out of range"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A resource in the edge set: an AP (communication) or a node (computing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Ap(usize),
    Node(usize),
}

/// Inter-slice and intra-slice provisioning coefficients.
///
/// `inter_radio[a][n]` is the fraction of AP `a`'s radio given to slice `n`.
/// `intra_radio[n][a][i]` is WD `i`'s share of slice `n`'s radio at AP `a`;
/// `intra_compute[n][j][i]` is WD `i`'s share of node `j`'s capability in
/// slice `n`. Entries of WDs not offloading on a resource are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policies {
    pub inter_radio: Vec<Vec<f64>>,
    pub intra_radio: Vec<Vec<Vec<f64>>>,
    pub intra_compute: Vec<Vec<Vec<f64>>>,
}

impl Policies {
    /// All coefficients 1: every WD treated as sole offloader. Violates the
    /// sum constraints for more than one offloader; useful for single-WD
    /// examples and formula checks only.
    pub fn identity(model: &SystemModel) -> Self {
        let (i, a, j, n) = (
            model.num_wds(),
            model.num_aps(),
            model.num_nodes(),
            model.num_slices,
        );
        Self {
            inter_radio: vec![vec![1.0; n]; a],
            intra_radio: vec![vec![vec![1.0; i]; a]; n],
            intra_compute: vec![vec![vec![1.0; i]; j]; n],
        }
    }

    pub fn zeros(model: &SystemModel) -> Self {
        let (i, a, j, n) = (
            model.num_wds(),
            model.num_aps(),
            model.num_nodes(),
            model.num_slices,
        );
        Self {
            inter_radio: vec![vec![0.0; n]; a],
            intra_radio: vec![vec![vec![0.0; i]; a]; n],
            intra_compute: vec![vec![vec![0.0; i]; j]; n],
        }
    }
}

/// Interpretation of the arrival-rate sum in the M/M/1 stability condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    /// The queue at node j sees the total arrival rate of every WD routed
    /// to j, across slices.
    #[default]
    NodeTotal,
    /// Each WD's allocated partition forms its own queue seeing only that
    /// WD's arrival rate.
    PerWdShare,
}

/// Per-WD, per-slice and total cost components, all in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub wd_costs: Vec<f64>,
    pub slice_costs: Vec<f64>,
    pub local_total: f64,
    pub system_cost: f64,
}

/// Uplink rate of WD `i` at AP `a` in slice `n`: `omega * phi * R`.
pub fn uplink_rate(
    model: &SystemModel,
    i: usize,
    a: usize,
    n: usize,
    policies: &Policies,
) -> f64 {
    policies.inter_radio[a][n] * policies.intra_radio[n][a][i] * model.aps[a].rates[i]
}

/// Transmission time `S_i / uplink_rate`. Errors when the rate is zero.
pub fn transmission_time(
    model: &SystemModel,
    i: usize,
    a: usize,
    n: usize,
    policies: &Policies,
) -> Result<f64> {
    let rate = uplink_rate(model, i, a, n, policies);
    if rate <= 0.0 {
        return Err(Error::DegenerateAllocation(format!(
            "zero uplink rate for WD {i} at AP {a}, slice {n}"
        )));
    }
    // evaluated as T_min / (omega * phi) so the scaled and minimum times
    // agree exactly, matching the cost model's term structure
    let scale = policies.inter_radio[a][n] * policies.intra_radio[n][a][i];
    Ok(min_transmission_time(model, i, a) / scale)
}

/// Computing capability allocated to WD `i` at node `j` in slice `n`.
pub fn allocated_compute(
    model: &SystemModel,
    i: usize,
    j: usize,
    n: usize,
    policies: &Policies,
) -> f64 {
    policies.intra_compute[n][j][i] * model.nodes[j].slice_capability[n]
}

/// Total arrival rate seen by WD `i`'s queue at node `j` under `mode`.
fn queue_arrival_rate(
    model: &SystemModel,
    delta: &DecisionVector,
    i: usize,
    j: usize,
    mode: StabilityMode,
) -> f64 {
    match mode {
        StabilityMode::NodeTotal => delta
            .decisions
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, Decision::Offload { node, .. } if *node == j))
            .map(|(k, _)| model.wds[k].arrival_rate)
            .sum(),
        StabilityMode::PerWdShare => model.wds[i].arrival_rate,
    }
}

/// Service-minus-arrival denominator of the M/M/1 time for WD `i` at node
/// `j` in slice `n`.
pub fn queue_margin(
    model: &SystemModel,
    delta: &DecisionVector,
    i: usize,
    j: usize,
    n: usize,
    policies: &Policies,
    mode: StabilityMode,
) -> f64 {
    let service = allocated_compute(model, i, j, n, policies) / model.wds[i].slice_instructions[n];
    service - queue_arrival_rate(model, delta, i, j, mode)
}

/// True iff the queue for WD `i` at node `j` in slice `n` is strictly stable.
pub fn queue_stable(
    model: &SystemModel,
    delta: &DecisionVector,
    i: usize,
    j: usize,
    n: usize,
    policies: &Policies,
    mode: StabilityMode,
) -> bool {
    queue_margin(model, delta, i, j, n, policies, mode) > STABILITY_EPS
}

/// Average M/M/1 computation time `1 / (service_rate - arrival_rate)`.
pub fn mm1_execution_time(
    model: &SystemModel,
    delta: &DecisionVector,
    i: usize,
    j: usize,
    n: usize,
    policies: &Policies,
    mode: StabilityMode,
) -> Result<f64> {
    let margin = queue_margin(model, delta, i, j, n, policies, mode);
    if margin <= 0.0 {
        return Err(Error::UnstableQueue { node: j, slice: n });
    }
    Ok(1.0 / margin)
}

/// Local execution latency `L_i / F_i^l`.
pub fn local_execution_time(model: &SystemModel, i: usize) -> f64 {
    model.wds[i].local_instructions / model.wds[i].local_capability
}

/// Minimum transmission time of WD `i` through AP `a`, achieved as the sole
/// offloader (`omega = phi = 1`). Independent of the slice.
pub fn min_transmission_time(model: &SystemModel, i: usize, a: usize) -> f64 {
    model.wds[i].task_size / model.aps[a].rates[i]
}

/// Minimum execution time of WD `i` at node `j` in slice `n` as the sole
/// offloader, under the linear-share model `L_{i,n} / F_j^n`.
pub fn min_execution_time(model: &SystemModel, i: usize, j: usize, n: usize) -> Result<f64> {
    let cap = model.nodes[j].slice_capability[n];
    if cap <= 0.0 {
        return Err(Error::InfeasibleSliceNode { node: j, slice: n });
    }
    Ok(model.wds[i].slice_instructions[n] / cap)
}

/// WDs whose decision offloads through resource `e` within slice `n`.
pub fn offloader_set(
    model: &SystemModel,
    delta: &DecisionVector,
    e: Resource,
    n: usize,
) -> Vec<usize> {
    debug_assert_eq!(delta.decisions.len(), model.num_wds());
    delta
        .decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| match (e, d) {
            (Resource::Ap(a), Decision::Offload { ap, slice, .. }) => *ap == a && *slice == n,
            (Resource::Node(j), Decision::Offload { node, slice, .. }) => *node == j && *slice == n,
            _ => false,
        })
        .map(|(i, _)| i)
        .collect()
}

/// Completion-time cost of WD `i`: local latency if local, otherwise the
/// scaled minimum transmission plus execution times along its chosen path.
pub fn wd_cost(
    model: &SystemModel,
    delta: &DecisionVector,
    policies: &Policies,
    i: usize,
) -> Result<f64> {
    match delta.decisions[i] {
        Decision::Local => Ok(local_execution_time(model, i)),
        Decision::Offload { ap, node, slice } => {
            let omega = policies.inter_radio[ap][slice];
            let phi_radio = policies.intra_radio[slice][ap][i];
            let phi_comp = policies.intra_compute[slice][node][i];
            if omega <= 0.0 || phi_radio <= 0.0 {
                return Err(Error::DegenerateAllocation(format!(
                    "zero radio coefficient for WD {i} at AP {ap}, slice {slice}"
                )));
            }
            if phi_comp <= 0.0 {
                return Err(Error::DegenerateAllocation(format!(
                    "zero compute coefficient for WD {i} at node {node}, slice {slice}"
                )));
            }
            let tx = min_transmission_time(model, i, ap) / (omega * phi_radio);
            let ex = min_execution_time(model, i, node, slice)? / phi_comp;
            Ok(tx + ex)
        }
    }
}

/// Cost of slice `n`: scaled minimum times summed over every edge resource
/// and its offloaders (`omega = 1` on computing resources).
pub fn slice_cost(
    model: &SystemModel,
    delta: &DecisionVector,
    policies: &Policies,
    n: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for a in 0..model.num_aps() {
        for i in offloader_set(model, delta, Resource::Ap(a), n) {
            let omega = policies.inter_radio[a][n];
            let phi = policies.intra_radio[n][a][i];
            if omega <= 0.0 || phi <= 0.0 {
                return Err(Error::DegenerateAllocation(format!(
                    "zero radio coefficient for WD {i} at AP {a}, slice {n}"
                )));
            }
            total += min_transmission_time(model, i, a) / (omega * phi);
        }
    }
    for j in 0..model.num_nodes() {
        for i in offloader_set(model, delta, Resource::Node(j), n) {
            let phi = policies.intra_compute[n][j][i];
            if phi <= 0.0 {
                return Err(Error::DegenerateAllocation(format!(
                    "zero compute coefficient for WD {i} at node {j}, slice {n}"
                )));
            }
            total += min_execution_time(model, i, j, n)? / phi;
        }
    }
    Ok(total)
}

/// System cost: sum of slice costs plus local execution of every local WD,
/// with all components reported.
pub fn system_cost(
    model: &SystemModel,
    delta: &DecisionVector,
    policies: &Policies,
) -> Result<CostBreakdown> {
    let slice_costs: Vec<f64> = (0..model.num_slices)
        .map(|n| slice_cost(model, delta, policies, n))
        .collect::<Result<_>>()?;
    let wd_costs: Vec<f64> = (0..model.num_wds())
        .map(|i| wd_cost(model, delta, policies, i))
        .collect::<Result<_>>()?;
    let local_total: f64 = delta
        .decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| matches!(d, Decision::Local))
        .map(|(i, _)| local_execution_time(model, i))
        .sum();
    let system_cost = slice_costs.iter().sum::<f64>() + local_total;
    Ok(CostBreakdown {
        wd_costs,
        slice_costs,
        local_total,
        system_cost,
    })
}
