//! Coupled solution of the in-plane and parking chains.
//!
//! The two echelons are linked in both directions: in-plane replenishment
//! depends on parking availability (`kappa`) while parking depletion is
//! driven by in-plane demand (`chi`). Starting from full availability, a
//! fixed-point iteration alternates the two chain solves until `kappa`
//! stabilizes.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inplane::{self, AvailabilityVector, DemandPmf, InplanePolicy};
use crate::markov::{self, StateDistribution, TransitionMatrix};
use crate::metrics::CostParams;
use crate::orbital::{self, ConstellationGeometry, EarthConstants};
use crate::parking::{self, ParkingCycleSolution, ParkingPolicy};
use crate::stochastic::{lead_time_grid, FailureModel, LeadTimeGrid, LeadTimeModel};

/// A fully assembled analysis case.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub constants: EarthConstants,
    pub geometry: ConstellationGeometry,
    pub inplane_policy: InplanePolicy,
    pub parking_policy: ParkingPolicy,
    /// Per-satellite failure rate, failures/year.
    pub lambda_per_year: f64,
    pub tau_mc_days: f64,
    /// Heavy-LV ground resupply lead time.
    pub lead_time: LeadTimeModel,
    pub costs: CostParams,
}

/// Direct-strategy overrides: small LV ordering straight to the planes.
#[derive(Debug, Clone)]
pub struct DirectParams {
    /// `(r, q)` policy in satellites.
    pub policy: ParkingPolicy,
    /// Small-LV lead time.
    pub lead_time: LeadTimeModel,
    pub c_lv_full_musd: f64,
    pub m_payload_kg: f64,
}

/// Fixed-point iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointParams {
    /// Stop when the availability update moves less than this (inf-norm).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

/// Derived timing of the two review cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTiming {
    pub drift_constellation_rad_day: f64,
    pub drift_parking_rad_day: f64,
    pub tau_c_days: f64,
    pub tau_p_days: f64,
    pub k_c: u32,
    pub k_p: u32,
    pub grid: LeadTimeGrid,
    pub alpha: f64,
}

/// Computes drift rates, alignment periods, and their step quantization.
pub fn compute_timing(scenario: &Scenario) -> Result<CycleTiming> {
    let c = &scenario.constants;
    let g = &scenario.geometry;
    let drift_constellation =
        orbital::raan_drift_rate(g.a_constellation_km(c), g.inclination_rad, c)?;
    let drift_parking = orbital::raan_drift_rate(g.a_parking_km(c), g.inclination_rad, c)?;
    let (tau_c, tau_p) = orbital::alignment_periods(g, c)?;
    let (k_c, k_p) = orbital::quantize_periods(tau_c, tau_p, scenario.tau_mc_days)?;
    Ok(CycleTiming {
        drift_constellation_rad_day: drift_constellation,
        drift_parking_rad_day: drift_parking,
        tau_c_days: tau_c,
        tau_p_days: tau_p,
        k_c,
        k_p,
        grid: lead_time_grid(&scenario.lead_time, k_p),
        alpha: scenario.lead_time.alpha,
    })
}

/// Stationary summary of one echelon.
#[derive(Debug, Clone)]
pub struct EchelonSolution {
    /// Distribution right after replenishment.
    pub post_replenishment: StateDistribution,
    /// Distribution at the review point.
    pub at_review: StateDistribution,
    /// Time-average over the replenishment cycle.
    pub cycle: StateDistribution,
    pub cycle_days: f64,
}

/// Converged coupled solution with diagnostics.
#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub inplane: EchelonSolution,
    pub parking: ParkingCycleSolution,
    pub availability: AvailabilityVector,
    pub demand: DemandPmf,
    pub iterations: usize,
    /// Final `kappa` update size (inf-norm).
    pub residual: f64,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub timing: CycleTiming,
    /// Stationarity defect of the in-plane cycle at the returned solution.
    pub inplane_stationarity: f64,
    /// Stationarity defect of the parking cycle at the returned solution.
    pub parking_stationarity: f64,
    /// Raised when the stockout probability breaches the i.i.d. heuristic
    /// `P(X_p = 0) < 1/(N_sat_p + 1)`.
    pub validity_warning: bool,
}

impl CoupledSolution {
    /// The i.i.d.-assumption heuristic threshold for this parking size.
    pub fn validity_threshold(&self) -> f64 {
        1.0 / (self.parking.cycle.max_state() as f64 + 1.0)
    }
}

/// Runs the coupled fixed-point iteration for the indirect strategy.
///
/// Starts from 100% parking availability and alternates in-plane and parking
/// solves until the availability vector stops moving. A solution that fails
/// to converge is returned with `converged = false` rather than as an error
/// so that callers (notably the optimizer) can penalize it.
pub fn solve_indirect(scenario: &Scenario, params: &FixedPointParams) -> Result<CoupledSolution> {
    let timing = compute_timing(scenario)?;
    let failure = FailureModel::from_annual_rate(
        scenario.lambda_per_year,
        scenario.tau_mc_days,
        scenario.geometry.n_sat_nominal,
    )?;
    let inplane_policy = &scenario.inplane_policy;
    let parking_policy = &scenario.parking_policy;
    let max_demand = inplane_policy.max_demand();

    let p_f = crate::stochastic::failure_matrix(inplane_policy.max_state(), &failure);
    let p_fc = p_f.pow(timing.k_c as u64);
    let cycle_avg =
        markov::geometric_matrix_sum(p_f.matrix(), timing.k_c as u64) / timing.k_c as f64;

    let mut kappa = AvailabilityVector::full(max_demand);
    let mut residual_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut last: Option<(EchelonSolution, ParkingCycleSolution, DemandPmf, TransitionMatrix)> =
        None;

    while iterations < params.max_iterations {
        iterations += 1;
        let p_qc = inplane::replenishment_matrix_inplane(&kappa, inplane_policy)?;
        let (pi_q, pi_r) = inplane::solve_inplane_cycle_with(&p_fc, &p_qc)?;
        let pi_rc = StateDistribution::from_vector(&cycle_avg * pi_q.as_vector())?;
        let chi = inplane::demand_pmf(&pi_r, inplane_policy)?;

        let parking_solution = parking::solve_parking_chain(
            &chi,
            parking_policy,
            &timing.grid,
            timing.alpha,
            max_demand,
            scenario.tau_mc_days,
        )?;
        let kappa_next = parking_solution.contact.availability.clone();
        residual = kappa_next.max_abs_diff(&kappa);
        residual_history.push(residual);
        kappa = kappa_next;
        last = Some((
            EchelonSolution {
                post_replenishment: pi_q,
                at_review: pi_r,
                cycle: pi_rc,
                cycle_days: timing.k_c as f64 * scenario.tau_mc_days,
            },
            parking_solution,
            chi,
            p_qc,
        ));
        if residual <= params.tolerance {
            converged = true;
            break;
        }
    }

    let (inplane_sol, parking_sol, chi, p_qc) = last.expect("at least one iteration ran");

    // Stationarity diagnostics at the returned solution.
    let inplane_cycle = p_qc.matrix() * p_fc.matrix();
    let inplane_stationarity = markov::stationarity_residual(
        &inplane_cycle,
        inplane_sol.post_replenishment.as_vector(),
    );
    let p_fp = parking::demand_failure_matrix(&chi, parking_policy);
    let p_qp = parking::replenishment_matrix_parking(parking_policy);
    let projectors = parking::threshold_projectors(parking_policy);
    let roundtrip_r =
        parking::delivery_to_reorder(&parking_sol.post_delivery, &p_fp, &projectors)?;
    let (roundtrip_q, _) =
        parking::reorder_to_delivery(&roundtrip_r, &p_fp, &p_qp, &timing.grid, timing.alpha)?;
    let parking_stationarity = roundtrip_q
        .as_vector()
        .iter()
        .zip(parking_sol.post_delivery.as_vector().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let stockout = parking_sol.cycle.prob_state(0);
    let validity_warning =
        stockout >= 1.0 / (parking_policy.max_state() as f64 + 1.0);

    Ok(CoupledSolution {
        inplane: inplane_sol,
        parking: parking_sol,
        availability: kappa,
        demand: chi,
        iterations,
        residual,
        converged,
        residual_history,
        timing,
        inplane_stationarity,
        parking_stationarity,
        validity_warning,
    })
}

/// Direct-strategy stationary solution.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub echelon: EchelonSolution,
    /// Time-average over the inter-order period.
    pub inter_order: StateDistribution,
    /// Time-average while an order is outstanding.
    pub lead_time: StateDistribution,
    /// Expected period lengths, steps.
    pub k_io: f64,
    pub k_lt: f64,
}

/// Solves the direct strategy as the `k_p = 1` special case of the parking
/// machinery, with the per-step satellite failure matrix as the depletion
/// matrix.
pub fn solve_direct(scenario: &Scenario, direct: &DirectParams) -> Result<DirectSolution> {
    let failure = FailureModel::from_annual_rate(
        scenario.lambda_per_year,
        scenario.tau_mc_days,
        scenario.geometry.n_sat_nominal,
    )?;
    let p_f = crate::stochastic::failure_matrix(direct.policy.max_state(), &failure);
    let grid = lead_time_grid(&direct.lead_time, 1);
    let solution = parking::solve_parking_chain_with(
        &p_f,
        &direct.policy,
        &grid,
        direct.lead_time.alpha,
        0,
        scenario.tau_mc_days,
    )?;
    Ok(DirectSolution {
        echelon: EchelonSolution {
            post_replenishment: solution.post_delivery,
            at_review: solution.at_reorder,
            cycle: solution.cycle,
            cycle_days: solution.cycle_days,
        },
        inter_order: solution.inter_order,
        lead_time: solution.lead_time,
        k_io: solution.k_io,
        k_lt: solution.k_lt,
    })
}
