//! Constellation-plane (in-plane) replenishment chain.
//!
//! Each plane reviews its stock at every RAAN contact with a parking orbit
//! and orders enough batches of `q_c` satellites to climb back above the
//! reorder point. Orders are filled only as far as the contacted parking
//! orbit has batches on hand, which the availability vector `kappa` encodes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{
    self, StateDistribution, TransitionMatrix, POWER_ITERATION_CAP, POWER_ITERATION_TOLERANCE,
};

/// In-plane `(r, q)` policy in units of satellites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InplanePolicy {
    /// Batch size `q_c`.
    pub order_qty: u32,
    /// Reorder point `r_c`.
    pub reorder_point: u32,
}

impl InplanePolicy {
    pub fn new(order_qty: u32, reorder_point: u32) -> Result<Self> {
        if order_qty == 0 {
            return Err(Error::Config("in-plane order quantity must be >= 1".into()));
        }
        Ok(Self {
            order_qty,
            reorder_point,
        })
    }

    /// Highest reachable stock level, `q_c + r_c`.
    pub fn max_state(&self) -> u32 {
        self.order_qty + self.reorder_point
    }

    /// Largest possible batch demand, `ceil((r_c + 1) / q_c)`.
    pub fn max_demand(&self) -> u32 {
        (self.reorder_point + 1).div_ceil(self.order_qty)
    }
}

/// Probability that at least `j` batches are on hand at contact.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityVector {
    kappa: Vec<f64>,
}

impl AvailabilityVector {
    /// Full availability, every entry 1 (the fixed-point starting guess).
    pub fn full(max_demand: u32) -> Self {
        Self {
            kappa: vec![1.0; max_demand as usize + 1],
        }
    }

    /// Validates `kappa_0 = 1`, monotone nonincreasing, entries in [0, 1].
    pub fn from_values(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() || (kappa[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidAvailability(
                "kappa_0 must be 1 (demand of zero is always served)".into(),
            ));
        }
        for w in kappa.windows(2) {
            if w[1] > w[0] + 1e-12 {
                return Err(Error::InvalidAvailability(format!(
                    "kappa must be nonincreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if kappa.iter().any(|&k| !(-1e-12..=1.0 + 1e-12).contains(&k)) {
            return Err(Error::InvalidAvailability("entries outside [0, 1]".into()));
        }
        Ok(Self { kappa })
    }

    /// `kappa_j`; zero beyond the stored range.
    pub fn get(&self, j: u32) -> f64 {
        self.kappa.get(j as usize).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.kappa
    }

    /// Infinity-norm distance, used as the fixed-point residual.
    pub fn max_abs_diff(&self, other: &AvailabilityVector) -> f64 {
        let n = self.kappa.len().max(other.kappa.len());
        (0..n as u32)
            .map(|j| (self.get(j) - other.get(j)).abs())
            .fold(0.0, f64::max)
    }
}

/// PMF of the batch demand a contacted plane presents to the parking orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandPmf {
    chi: Vec<f64>,
}

impl DemandPmf {
    pub fn from_values(chi: Vec<f64>) -> Result<Self> {
        let sum: f64 = chi.iter().sum();
        if chi.iter().any(|&c| c < -1e-12) || (sum - 1.0).abs() > markov::MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "demand PMF must be nonnegative with unit mass, got mass {sum}"
            )));
        }
        Ok(Self { chi })
    }

    /// `chi_j`; zero beyond the stored range.
    pub fn get(&self, j: u32) -> f64 {
        self.chi.get(j as usize).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.chi
    }
}

/// Batches demanded at review from stock level `x`.
pub fn demand_of_state(x: u32, policy: &InplanePolicy) -> u32 {
    if x > policy.reorder_point {
        0
    } else {
        (policy.reorder_point + 1 - x).div_ceil(policy.order_qty)
    }
}

/// Availability-weighted replenishment matrix `P_{q_c}`.
///
/// Column for stock `x` with demand `d`: mass `kappa_d` jumps the full
/// `d * q_c`, and each partial fill of `j < d` batches carries
/// `kappa_j - kappa_{j+1}` (including the no-fill weight `1 - kappa_1`).
pub fn replenishment_matrix_inplane(
    kappa: &AvailabilityVector,
    policy: &InplanePolicy,
) -> Result<TransitionMatrix> {
    // Revalidate monotonicity so partial-fill weights cannot go negative.
    AvailabilityVector::from_values(kappa.values().to_vec())?;
    let n = policy.max_state() as usize;
    let q = policy.order_qty as usize;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        let x = (n - col) as u32;
        let d = demand_of_state(x, policy);
        if d == 0 {
            m[(col, col)] = 1.0;
            continue;
        }
        m[(col - d as usize * q, col)] += kappa.get(d);
        for served in 0..d {
            let weight = kappa.get(served) - kappa.get(served + 1);
            m[(col - served as usize * q, col)] += weight;
        }
    }
    Ok(TransitionMatrix::new_unchecked(m))
}

/// Stationary pair `(pi^{q_c}, pi^{r_c})` of the contact cycle.
///
/// `pi^{q_c}` is the stationary distribution of `P_{q_c} (P_f)^{k_c}` found
/// by power iteration; `pi^{r_c}` is its image under `(P_f)^{k_c}`.
pub fn solve_inplane_cycle(
    p_f: &TransitionMatrix,
    p_qc: &TransitionMatrix,
    k_c: u32,
) -> Result<(StateDistribution, StateDistribution)> {
    let p_fc = p_f.pow(k_c as u64);
    solve_inplane_cycle_with(&p_fc, p_qc)
}

/// Same as [`solve_inplane_cycle`] with `(P_f)^{k_c}` precomputed.
pub fn solve_inplane_cycle_with(
    p_fc: &TransitionMatrix,
    p_qc: &TransitionMatrix,
) -> Result<(StateDistribution, StateDistribution)> {
    let cycle = p_qc.matrix() * p_fc.matrix();
    let (pi, _) = markov::stationary_distribution(
        &cycle,
        POWER_ITERATION_TOLERANCE,
        POWER_ITERATION_CAP,
        None,
    )?;
    let pi_q = StateDistribution::from_vector(pi)?;
    let pi_r = StateDistribution::from_vector(p_fc.matrix() * pi_q.as_vector())?;
    Ok((pi_q, pi_r))
}

/// Per-step average over one review period,
/// `(1/k_c) (I + P_f + ... + P_f^{k_c - 1}) pi^{q_c}`.
pub fn cycle_average_inplane(
    pi_q: &StateDistribution,
    p_f: &TransitionMatrix,
    k_c: u32,
) -> Result<StateDistribution> {
    let sum = markov::geometric_matrix_sum(p_f.matrix(), k_c as u64);
    StateDistribution::from_vector(sum * pi_q.as_vector() / k_c as f64)
}

/// Batch-demand PMF `chi` seen by the parking orbit at contact.
pub fn demand_pmf(pi_r: &StateDistribution, policy: &InplanePolicy) -> Result<DemandPmf> {
    let n = policy.max_state() as usize;
    assert_eq!(pi_r.max_state(), n, "distribution size mismatch");
    let q = policy.order_qty as usize;
    let j_max = policy.max_demand() as usize;
    let mut chi = vec![0.0; j_max + 1];
    // Demand is constant on index windows [j q_c, (j+1) q_c - 1].
    for (j, slot) in chi.iter_mut().enumerate() {
        for idx in (j * q)..=((j + 1) * q - 1).min(n) {
            *slot += pi_r.as_vector()[idx];
        }
    }
    DemandPmf::from_values(chi)
}
