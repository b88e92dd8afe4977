//! Closed-form solution of the continuous inner problem for a fixed
//! decision vector: intra-slice radio/compute shares and inter-slice radio
//! shares that minimize the system cost.
//!
//! Minimizing `sum_i c_i / phi_i` over the simplex `sum phi_i <= 1` has the
//! KKT solution `phi_i = sqrt(c_i) / sum_k sqrt(c_k)` with optimal value
//! `(sum_k sqrt(c_k))^2` (Cauchy-Schwarz lower bound, attained). The
//! inter-slice split per AP nests the same structure one level up, so the
//! same square-root rule applies to the per-slice aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    local_execution_time, min_execution_time, min_transmission_time, offloader_set, Decision,
    DecisionVector, Policies, Resource, SystemModel,
};

/// Largest input dimension accepted by [`numeric_allocation_oracle`].
pub const ORACLE_MAX_DIM: usize = 4;

/// How the inter-slice radio coefficients are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterSliceMode {
    /// Square-root-rule optimal split per AP.
    #[default]
    Optimal,
    /// Every slice gets `1/N` of every AP.
    EqualShare,
}

/// Optimal continuous policies for one decision vector, with the system
/// cost they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub policies: Policies,
    pub conditional_cost: f64,
}

/// Optimal shares for minimizing `sum_i c_i / phi_i` on the unit simplex.
///
/// Returns the coefficients (summing to 1) and the minimum aggregate cost
/// `(sum sqrt(c_i))^2`.
pub fn sqrt_rule(min_times: &[f64]) -> Result<(Vec<f64>, f64)> {
    if min_times.is_empty() {
        return Err(Error::EmptyOffloaderSet);
    }
    if let Some(k) = min_times.iter().position(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(Error::NonPositiveCost(k));
    }
    let roots: Vec<f64> = min_times.iter().map(|&c| c.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    let coefficients: Vec<f64> = roots.iter().map(|r| r / total).collect();
    Ok((coefficients, total * total))
}

/// Exact minimizer of `sum_i c_i / phi_i` over the simplex discretized at
/// resolution `1/grid_points`, independent of [`sqrt_rule`].
///
/// Each coordinate holds an integer number of grid units (at least one).
/// Because every term `c_i / phi_i` is convex and decreasing in its own
/// share, handing out the remaining units one at a time to the coordinate
/// with the largest marginal decrease reaches the discrete optimum, the
/// same point full enumeration would find.
pub fn numeric_allocation_oracle(
    min_times: &[f64],
    grid_points: usize,
) -> Result<(Vec<f64>, f64)> {
    let d = min_times.len();
    if d == 0 {
        return Err(Error::EmptyOffloaderSet);
    }
    if d > ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge(d, ORACLE_MAX_DIM));
    }
    if let Some(k) = min_times.iter().position(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(Error::NonPositiveCost(k));
    }
    assert!(grid_points >= 100, "grid_points must be >= 100");
    assert!(grid_points >= d, "grid too coarse for dimension");

    let g = grid_points as f64;
    let mut units = vec![1u64; d];
    // marginal decrease of giving coordinate i one more unit:
    // c_i * g * (1/k - 1/(k+1))
    let gain = |c: f64, k: u64| c * g * (1.0 / k as f64 - 1.0 / (k + 1) as f64);

    let mut heap: std::collections::BinaryHeap<(OrderedF64, usize)> = min_times
        .iter()
        .enumerate()
        .map(|(i, &c)| (OrderedF64(gain(c, 1)), i))
        .collect();
    for _ in 0..(grid_points - d) {
        let (_, i) = heap.pop().expect("heap never empty");
        units[i] += 1;
        heap.push((OrderedF64(gain(min_times[i], units[i])), i));
    }

    let coefficients: Vec<f64> = units.iter().map(|&k| k as f64 / g).collect();
    let cost: f64 = min_times
        .iter()
        .zip(&coefficients)
        .map(|(&c, &phi)| c / phi)
        .sum();
    Ok((coefficients, cost))
}

// f64 is not Ord; wrap with total_cmp for heap keys.
#[derive(PartialEq)]
struct OrderedF64(f64);
impl Eq for OrderedF64 {}
impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Per-AP, per-slice aggregate `s_{a,n} = sum_{i in O_{a,n}} sqrt(T_{i,a})`.
fn slice_aggregates(model: &SystemModel, delta: &DecisionVector) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; model.num_slices]; model.num_aps()];
    for (i, d) in delta.decisions.iter().enumerate() {
        if let Decision::Offload { ap, slice, .. } = *d {
            s[ap][slice] += min_transmission_time(model, i, ap).sqrt();
        }
    }
    s
}

/// Optimal inter-slice radio split: per AP, each slice's share is
/// proportional to its square-root aggregate. Slices with no offloaders at
/// an AP get 0; APs with no offloaders at all get a uniform `1/N` row.
pub fn optimal_inter_slice(model: &SystemModel, delta: &DecisionVector) -> Vec<Vec<f64>> {
    let aggregates = slice_aggregates(model, delta);
    aggregates
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter().map(|s| s / total).collect()
            } else {
                vec![1.0 / model.num_slices as f64; model.num_slices]
            }
        })
        .collect()
}

/// Equal-share inter-slice split: `1/N` for every (AP, slice).
pub fn equal_share_inter_slice(num_slices: usize, num_aps: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0 / num_slices as f64; num_slices]; num_aps]
}

/// Optimal intra-slice policies (and inter-slice per `inter_mode`) for a
/// fixed decision vector, with the resulting system cost.
pub fn optimal_policies_for_decision(
    model: &SystemModel,
    delta: &DecisionVector,
    inter_mode: InterSliceMode,
) -> Result<AllocationResult> {
    delta.validate(model)?;
    let inter_radio = match inter_mode {
        InterSliceMode::Optimal => optimal_inter_slice(model, delta),
        InterSliceMode::EqualShare => equal_share_inter_slice(model.num_slices, model.num_aps()),
    };
    let mut policies = Policies::zeros(model);
    policies.inter_radio = inter_radio;

    let mut cost = 0.0;
    for n in 0..model.num_slices {
        for a in 0..model.num_aps() {
            let offloaders = offloader_set(model, delta, Resource::Ap(a), n);
            if offloaders.is_empty() {
                continue;
            }
            let times: Vec<f64> = offloaders
                .iter()
                .map(|&i| min_transmission_time(model, i, a))
                .collect();
            let (phi, aggregate) = sqrt_rule(&times)?;
            for (&i, &p) in offloaders.iter().zip(&phi) {
                policies.intra_radio[n][a][i] = p;
            }
            let omega = policies.inter_radio[a][n];
            debug_assert!(omega > 0.0);
            cost += aggregate / omega;
        }
        for j in 0..model.num_nodes() {
            let offloaders = offloader_set(model, delta, Resource::Node(j), n);
            if offloaders.is_empty() {
                continue;
            }
            let times: Vec<f64> = offloaders
                .iter()
                .map(|&i| min_execution_time(model, i, j, n))
                .collect::<Result<_>>()?;
            let (phi, aggregate) = sqrt_rule(&times)?;
            for (&i, &p) in offloaders.iter().zip(&phi) {
                policies.intra_compute[n][j][i] = p;
            }
            cost += aggregate;
        }
    }
    for (i, d) in delta.decisions.iter().enumerate() {
        if matches!(d, Decision::Local) {
            cost += local_execution_time(model, i);
        }
    }
    Ok(AllocationResult {
        policies,
        conditional_cost: cost,
    })
}
