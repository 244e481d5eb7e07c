//! Parking-orbit replenishment chain.
//!
//! The parking orbit holds spare batches, loses them to in-plane demand at
//! RAAN contacts (every `k_p` steps), and refills by ground resupply with a
//! shifted-exponential lead time. The geometric lead-time tail admits closed
//! forms for every period-average distribution; each one is checked against
//! its truncated-series definition in the tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inplane::{AvailabilityVector, DemandPmf};
use crate::markov::{
    self, StateDistribution, TransitionMatrix, POWER_ITERATION_CAP, POWER_ITERATION_TOLERANCE,
};
use crate::stochastic::LeadTimeGrid;

/// Parking `(r, q)` policy in units of batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParkingPolicy {
    /// Order size `q_p`.
    pub order_qty: u32,
    /// Reorder point `r_p`.
    pub reorder_point: u32,
}

impl ParkingPolicy {
    pub fn new(order_qty: u32, reorder_point: u32) -> Result<Self> {
        if order_qty == 0 {
            return Err(Error::Config("parking order quantity must be >= 1".into()));
        }
        Ok(Self {
            order_qty,
            reorder_point,
        })
    }

    /// Highest reachable stock level in batches, `q_p + r_p`.
    pub fn max_state(&self) -> u32 {
        self.order_qty + self.reorder_point
    }
}

/// Diagonal 0/1 projectors onto the regions above and at-or-below `r_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProjectors {
    /// Keeps states `X > r_p`.
    pub above: DMatrix<f64>,
    /// Keeps states `X <= r_p`.
    pub below: DMatrix<f64>,
}

/// `(C+, C-)` for the given policy.
pub fn threshold_projectors(policy: &ParkingPolicy) -> ThresholdProjectors {
    let n = policy.max_state() as usize;
    let mut above = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let state = n - i;
        if state > policy.reorder_point as usize {
            above[(i, i)] = 1.0;
        }
    }
    let below = DMatrix::identity(n + 1, n + 1) - &above;
    ThresholdProjectors { above, below }
}

/// Demand-induced depletion matrix `P_{f_p}` at a RAAN contact.
///
/// Column for stock `s`: mass `chi_j` moves to `max(s - j, 0)`; demand beyond
/// the stock is served partially, so the excess clamps at zero.
pub fn demand_failure_matrix(chi: &DemandPmf, policy: &ParkingPolicy) -> TransitionMatrix {
    let n = policy.max_state() as usize;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        let s = n - col;
        for j in 0..chi.len() {
            let target = s.saturating_sub(j);
            m[(n - target, col)] += chi.get(j as u32);
        }
    }
    TransitionMatrix::new_unchecked(m)
}

/// Ground-resupply delivery matrix `P_{q_p}`: `x -> x + q_p` for `x <= r_p`,
/// identity elsewhere (that region carries no mass just before a delivery).
pub fn replenishment_matrix_parking(policy: &ParkingPolicy) -> TransitionMatrix {
    let n = policy.max_state() as usize;
    let q = policy.order_qty as usize;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        let s = n - col;
        if s <= policy.reorder_point as usize {
            m[(col - q, col)] = 1.0;
        } else {
            m[(col, col)] = 1.0;
        }
    }
    TransitionMatrix::new_unchecked(m)
}

fn ensure_demand_nondegenerate(p_fp: &TransitionMatrix) -> Result<()> {
    // chi_0 is the top-left entry: mass that never leaves the full state.
    if 1.0 - p_fp.matrix()[(0, 0)] < 1e-12 {
        return Err(Error::NoDemand);
    }
    Ok(())
}

/// `pi^{r_p} = C- P_{f_p} (I - C+ P_{f_p})^{-1} pi^{q_p}`:
/// the stock distribution at the review that triggers the next reorder.
pub fn delivery_to_reorder(
    pi_q: &StateDistribution,
    p_fp: &TransitionMatrix,
    projectors: &ThresholdProjectors,
) -> Result<StateDistribution> {
    ensure_demand_nondegenerate(p_fp)?;
    let survive = &projectors.above * p_fp.matrix();
    let resolved = markov::solve_resolvent(&survive, 1.0, pi_q.as_vector(), "delivery_to_reorder")?;
    let reorder = &projectors.below * (p_fp.matrix() * resolved);
    StateDistribution::from_vector(reorder)
}

/// Delivery-step decomposition of the reorder-to-delivery transition.
///
/// The weighted post-delivery component for a delivery at step `i` of a
/// review period is a scalar multiple of one of two vectors, depending on
/// whether the fixed delay is still running (`i <= k_left`) or expired.
#[derive(Debug, Clone)]
pub struct DeliveryKernel {
    /// `P_q P^{m_lv+1} (I - a^{k_p} P)^{-1} pi^r`, the `i <= k_left` branch.
    early: DVector<f64>,
    /// `P_q P^{m_lv} (I - a^{k_p} P)^{-1} pi^r`, the `i > k_left` branch.
    late: DVector<f64>,
    grid: LeadTimeGrid,
    alpha: f64,
}

impl DeliveryKernel {
    fn scalar_weight(&self, i: u32) -> f64 {
        debug_assert!((1..=self.grid.k_p).contains(&i));
        if i <= self.grid.k_left {
            (1.0 - self.alpha) * self.alpha.powi((i - 1 + self.grid.k_right) as i32)
        } else {
            (1.0 - self.alpha) * self.alpha.powi((i as i32) - 1 - self.grid.k_left as i32)
        }
    }

    /// Marginal probability `eta_i` that the delivery lands at step `i`.
    pub fn eta(&self, i: u32) -> f64 {
        let branch = if i <= self.grid.k_left {
            &self.early
        } else {
            &self.late
        };
        self.scalar_weight(i) * branch.sum()
    }

    /// `sum_i f(i) eta_i pi^{q_p}_i` without materializing each component.
    pub fn weighted_sum(&self, f: impl Fn(u32) -> f64) -> DVector<f64> {
        let mut early_scale = 0.0;
        let mut late_scale = 0.0;
        for i in 1..=self.grid.k_p {
            let w = f(i) * self.scalar_weight(i);
            if i <= self.grid.k_left {
                early_scale += w;
            } else {
                late_scale += w;
            }
        }
        &self.early * early_scale + &self.late * late_scale
    }

    pub fn k_p(&self) -> u32 {
        self.grid.k_p
    }
}

/// Closed-form reorder-to-delivery map: returns the average post-delivery
/// distribution `pi^{q_p}` together with its per-step decomposition.
pub fn reorder_to_delivery(
    pi_r: &StateDistribution,
    p_fp: &TransitionMatrix,
    p_qp: &TransitionMatrix,
    grid: &LeadTimeGrid,
    alpha: f64,
) -> Result<(StateDistribution, DeliveryKernel)> {
    let p = p_fp.matrix();
    let alpha_kp = alpha.powi(grid.k_p as i32);
    let alpha_kr = alpha.powi(grid.k_right as i32);
    let resolved = markov::solve_resolvent(p, alpha_kp, pi_r.as_vector(), "reorder_to_delivery")?;
    // Walk the resolvent through the m_lv covered review periods.
    let mut covered = resolved.clone();
    for _ in 0..grid.m_lv {
        covered = p * covered;
    }
    let late = p_qp.matrix() * &covered;
    let early = p_qp.matrix() * (p * &covered);

    // pi^q = P_q P^m [(1 - a^{k_right}) I + (1 - a^{k_p}) a^{k_right} P B] pi^r
    let mut inner = pi_r.as_vector() * (1.0 - alpha_kr);
    inner += (p * &resolved) * ((1.0 - alpha_kp) * alpha_kr);
    for _ in 0..grid.m_lv {
        inner = p * inner;
    }
    let pi_q = StateDistribution::from_vector(p_qp.matrix() * inner)?;

    Ok((
        pi_q,
        DeliveryKernel {
            early,
            late,
            grid: *grid,
            alpha,
        },
    ))
}

/// Joint stationary pair `(pi^{q_p}, pi^{r_p})` of the reorder cycle.
///
/// Power-iterates the explicitly composed cycle map
/// `reorder_to_delivery . delivery_to_reorder`.
pub fn solve_parking_cycle(
    p_fp: &TransitionMatrix,
    p_qp: &TransitionMatrix,
    grid: &LeadTimeGrid,
    alpha: f64,
    projectors: &ThresholdProjectors,
) -> Result<(StateDistribution, StateDistribution)> {
    ensure_demand_nondegenerate(p_fp)?;
    let n = p_fp.n_states();
    let p = p_fp.matrix();
    let alpha_kp = alpha.powi(grid.k_p as i32);
    let alpha_kr = alpha.powi(grid.k_right as i32);

    // M_q2r = C- P (I - C+ P)^{-1}
    let survive = &projectors.above * p;
    let io_inverse = markov::solve_resolvent_matrix(
        &survive,
        1.0,
        &DMatrix::identity(n, n),
        "solve_parking_cycle",
    )?;
    let to_reorder = &projectors.below * (p * io_inverse);

    // M_r2q = P_q P^m [(1 - a^{k_right}) I + (1 - a^{k_p}) a^{k_right} P B]
    let lead_inverse = markov::solve_resolvent_matrix(
        p,
        alpha_kp,
        &DMatrix::identity(n, n),
        "solve_parking_cycle",
    )?;
    let mut bracket = DMatrix::identity(n, n) * (1.0 - alpha_kr);
    bracket += p * lead_inverse * ((1.0 - alpha_kp) * alpha_kr);
    let mut to_delivery = bracket;
    for _ in 0..grid.m_lv {
        to_delivery = p * to_delivery;
    }
    to_delivery = p_qp.matrix() * to_delivery;

    let cycle = &to_delivery * &to_reorder;
    let (pi, _) = markov::stationary_distribution(
        &cycle,
        POWER_ITERATION_TOLERANCE,
        POWER_ITERATION_CAP,
        None,
    )?;
    let pi_q = StateDistribution::from_vector(pi)?;
    let pi_r = StateDistribution::from_vector(&to_reorder * pi_q.as_vector())?;
    Ok((pi_q, pi_r))
}

/// Time-average distribution over the inter-order period and its expected
/// length in steps.
pub fn io_distribution(
    kernel: &DeliveryKernel,
    pi_q: &StateDistribution,
    p_fp: &TransitionMatrix,
    projectors: &ThresholdProjectors,
) -> Result<(StateDistribution, f64)> {
    let k_p = kernel.k_p();
    // Remaining steps of the delivery review period, then whole periods that
    // pass review without reordering.
    let mut unnorm = kernel.weighted_sum(|i| (k_p - i) as f64);
    let survive = &projectors.above * p_fp.matrix();
    let resolved = markov::solve_resolvent(&survive, 1.0, pi_q.as_vector(), "io_distribution")?;
    unnorm += (&survive * resolved) * k_p as f64;
    let k_io = unnorm.sum();
    if k_io <= 0.0 {
        return Err(Error::InvalidDistribution(
            "inter-order period has zero expected length".into(),
        ));
    }
    Ok((StateDistribution::from_vector(unnorm / k_io)?, k_io))
}

/// Time-average distribution while a ground order is outstanding, and the
/// expected lead-time period length in steps.
///
/// Four segments: whole review periods inside the fixed delay, the residual
/// fixed-delay steps, the geometric steps remaining in that period, and the
/// geometric tail over later periods.
pub fn lt_distribution(
    pi_r: &StateDistribution,
    p_fp: &TransitionMatrix,
    grid: &LeadTimeGrid,
    alpha: f64,
) -> Result<(StateDistribution, f64)> {
    let p = p_fp.matrix();
    let alpha_kp = alpha.powi(grid.k_p as i32);
    let alpha_kr = alpha.powi(grid.k_right as i32);
    let n = pi_r.len();

    let mut unnorm = DVector::zeros(n);
    let mut power = pi_r.as_vector().clone(); // P^j pi^r
    for _ in 0..grid.m_lv {
        unnorm += &power * grid.k_p as f64;
        power = p * power;
    }
    // power is now P^{m_lv} pi^r.
    unnorm += &power * (grid.k_left as f64 + 1.0);
    let geometric_head: f64 = (1..grid.k_right).map(|u| alpha.powi(u as i32)).sum();
    unnorm += &power * geometric_head;

    let resolved = markov::solve_resolvent(p, alpha_kp, pi_r.as_vector(), "lt_distribution")?;
    let mut tail = p * resolved;
    for _ in 0..grid.m_lv {
        tail = p * tail;
    }
    unnorm += tail * (alpha_kr * (1.0 - alpha_kp) / (1.0 - alpha));

    let k_lt = unnorm.sum();
    Ok((StateDistribution::from_vector(unnorm / k_lt)?, k_lt))
}

/// Time-weighted mixture of the IO and LT averages over one full cycle.
pub fn cycle_average_parking(
    pi_io: &StateDistribution,
    k_io: f64,
    pi_lt: &StateDistribution,
    k_lt: f64,
    tau_mc_days: f64,
) -> Result<(StateDistribution, f64)> {
    let total = k_io + k_lt;
    if total <= 0.0 {
        return Err(Error::InvalidDistribution(
            "replenishment cycle has zero expected length".into(),
        ));
    }
    let mixed = pi_io.as_vector() * (k_io / total) + pi_lt.as_vector() * (k_lt / total);
    Ok((StateDistribution::from_vector(mixed)?, total * tau_mc_days))
}

/// Distributions conditioned on a RAAN contact, and the availability vector.
#[derive(Debug, Clone)]
pub struct ContactConditional {
    pub inter_order: StateDistribution,
    pub lead_time: StateDistribution,
    pub cycle: StateDistribution,
    /// Expected contacts per cycle spent in the IO period.
    pub k_io: f64,
    /// Expected contacts per cycle spent awaiting delivery.
    pub k_lt: f64,
    pub availability: AvailabilityVector,
}

/// Contact-conditioned averages and the availability vector `kappa`.
///
/// During IO a contact sees `(I - C+ P)^{-1} pi^q`; during LT it sees the
/// reorder state propagated through the reviews that have already passed.
pub fn contact_conditional(
    pi_q: &StateDistribution,
    pi_r: &StateDistribution,
    p_fp: &TransitionMatrix,
    projectors: &ThresholdProjectors,
    grid: &LeadTimeGrid,
    alpha: f64,
    max_demand: u32,
) -> Result<ContactConditional> {
    let p = p_fp.matrix();
    let survive = &projectors.above * p;
    let io_unnorm =
        markov::solve_resolvent(&survive, 1.0, pi_q.as_vector(), "contact_conditional")?;
    let k_io = io_unnorm.sum();

    let alpha_kp = alpha.powi(grid.k_p as i32);
    let alpha_kr = alpha.powi(grid.k_right as i32);
    let mut lt_unnorm = DVector::zeros(pi_r.len());
    let mut power = pi_r.as_vector().clone();
    for _ in 0..grid.m_lv {
        lt_unnorm += &power;
        power = p * power;
    }
    let resolved = markov::solve_resolvent(p, alpha_kp, pi_r.as_vector(), "contact_conditional")?;
    let mut tail = resolved;
    for _ in 0..grid.m_lv {
        tail = p * tail;
    }
    lt_unnorm += tail * alpha_kr;
    let k_lt = lt_unnorm.sum();

    let total = k_io + k_lt;
    let cycle = StateDistribution::from_vector((&io_unnorm + &lt_unnorm) / total)?;
    let kappa = AvailabilityVector::from_values(
        (0..=max_demand)
            .map(|j| cycle.prob_at_least(j as usize))
            .collect(),
    )?;
    Ok(ContactConditional {
        inter_order: StateDistribution::from_vector(io_unnorm / k_io)?,
        lead_time: StateDistribution::from_vector(lt_unnorm / k_lt)?,
        cycle,
        k_io,
        k_lt,
        availability: kappa,
    })
}

/// Full stationary solution of one parking echelon.
#[derive(Debug, Clone)]
pub struct ParkingCycleSolution {
    /// Average stock distribution right after a ground delivery.
    pub post_delivery: StateDistribution,
    /// Stock distribution at the review that triggers a reorder.
    pub at_reorder: StateDistribution,
    /// Time-average over the inter-order period.
    pub inter_order: StateDistribution,
    /// Time-average while an order is outstanding.
    pub lead_time: StateDistribution,
    /// Time-average over the whole replenishment cycle.
    pub cycle: StateDistribution,
    /// Expected IO length, steps.
    pub k_io: f64,
    /// Expected LT length, steps.
    pub k_lt: f64,
    /// Cycle duration, days.
    pub cycle_days: f64,
    pub contact: ContactConditional,
}

/// Solves one parking echelon end to end for a given demand PMF.
pub fn solve_parking_chain(
    chi: &DemandPmf,
    policy: &ParkingPolicy,
    grid: &LeadTimeGrid,
    alpha: f64,
    max_demand: u32,
    tau_mc_days: f64,
) -> Result<ParkingCycleSolution> {
    let p_fp = demand_failure_matrix(chi, policy);
    solve_parking_chain_with(&p_fp, policy, grid, alpha, max_demand, tau_mc_days)
}

/// Same as [`solve_parking_chain`] with the depletion matrix supplied
/// directly. The direct strategy routes the per-step satellite failure
/// matrix through here with `k_p = 1`.
pub fn solve_parking_chain_with(
    p_fp: &TransitionMatrix,
    policy: &ParkingPolicy,
    grid: &LeadTimeGrid,
    alpha: f64,
    max_demand: u32,
    tau_mc_days: f64,
) -> Result<ParkingCycleSolution> {
    let p_qp = replenishment_matrix_parking(policy);
    let projectors = threshold_projectors(policy);
    let (pi_q, pi_r) = solve_parking_cycle(p_fp, &p_qp, grid, alpha, &projectors)?;
    let (_, kernel) = reorder_to_delivery(&pi_r, p_fp, &p_qp, grid, alpha)?;
    let (pi_io, k_io) = io_distribution(&kernel, &pi_q, p_fp, &projectors)?;
    let (pi_lt, k_lt) = lt_distribution(&pi_r, p_fp, grid, alpha)?;
    let (cycle, cycle_days) = cycle_average_parking(&pi_io, k_io, &pi_lt, k_lt, tau_mc_days)?;
    let contact = contact_conditional(&pi_q, &pi_r, p_fp, &projectors, grid, alpha, max_demand)?;
    Ok(ParkingCycleSolution {
        post_delivery: pi_q,
        at_reorder: pi_r,
        inter_order: pi_io,
        lead_time: pi_lt,
        cycle,
        k_io,
        k_lt,
        cycle_days,
        contact,
    })
}
