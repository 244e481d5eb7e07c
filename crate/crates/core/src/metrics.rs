//! Cost and resilience evaluation of stationary solutions.
//!
//! All cost rates are in M$/day; holding rates are configured per year and
//! converted with the 365.25-day year.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::markov::StateDistribution;
use crate::orbital::{TransferCosting, DAYS_PER_YEAR};
use crate::policy::{CoupledSolution, DirectParams, DirectSolution, Scenario};

/// Cost-model parameters (Table-style inputs; see the shipped config).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Manufacturing cost of one spare satellite, M$.
    pub c_build_musd: f64,
    /// In-orbit spare holding cost, M$/satellite/year.
    pub c_hold_c_musd_per_year: f64,
    /// Parking spare holding cost, M$/satellite/year.
    pub c_hold_p_musd_per_year: f64,
    /// Fuel cost, M$/kg.
    pub c_fuel_musd_per_kg: f64,
    /// Non-fuel transfer cost per batch maneuver, M$.
    pub c_trans_musd: f64,
    /// Heavy-LV launch cost per unit mass, $/kg.
    pub c_lv_unit_usd_per_kg: f64,
    /// Heavy-LV full-vehicle contract price, M$.
    pub c_lv_full_musd: f64,
    /// Heavy-LV maximum payload, kg.
    pub m_payload_kg: f64,
    /// Satellite mass, kg.
    pub m_sat_kg: f64,
    /// Transfer-bus mass, kg.
    pub m_bus_kg: f64,
    /// Effective exhaust velocity, km/s.
    pub v_ex_km_s: f64,
    /// Whether rideshare pricing is available for the parking altitude.
    pub rideshare: bool,
}

/// Per-component expected operating cost, M$/day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub build: f64,
    pub hold: f64,
    pub transfer: f64,
    pub launch: f64,
    pub total: f64,
}

/// Resilience summary of a coupled solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResilienceMetrics {
    /// Expected satellites below nominal per plane.
    pub shortage_c: f64,
    /// Long-run fraction of time a parking orbit is empty.
    pub stockout_p: f64,
    /// Mean in-plane stock, satellites.
    pub mean_c: f64,
    /// Mean parking stock, batches.
    pub mean_p: f64,
}

/// Hohmann batch costing for the scenario's transfer geometry, with
/// `m_dry = q_c m_sat + m_bus`.
pub fn transfer_costing(scenario: &Scenario) -> Result<TransferCosting> {
    let m_dry = scenario.inplane_policy.order_qty as f64 * scenario.costs.m_sat_kg
        + scenario.costs.m_bus_kg;
    TransferCosting::new(
        scenario.geometry.a_parking_km(&scenario.constants),
        scenario.geometry.a_constellation_km(&scenario.constants),
        m_dry,
        scenario.costs.v_ex_km_s,
        &scenario.constants,
    )
}

/// Total launched mass per heavy-LV order, `(m_fuel + m_dry) q_p` in kg.
pub fn launch_mass_kg(scenario: &Scenario) -> Result<f64> {
    Ok(transfer_costing(scenario)?.m_batch_kg * scenario.parking_policy.order_qty as f64)
}

/// Expected operating cost of the indirect strategy.
pub fn cost_breakdown(solution: &CoupledSolution, scenario: &Scenario) -> Result<CostBreakdown> {
    let costs = &scenario.costs;
    let geometry = &scenario.geometry;
    let q_c = scenario.inplane_policy.order_qty as f64;
    let q_p = scenario.parking_policy.order_qty as f64;
    let n_orbit_c = geometry.n_orbit_constellation as f64;
    let n_orbit_p = geometry.n_orbit_parking as f64;
    let tau_rc_c = solution.inplane.cycle_days;
    let tau_rc_p = solution.parking.cycle_days;

    // q_p batches of q_c satellites reach each parking orbit every cycle.
    let build = costs.c_build_musd * n_orbit_p * q_c * q_p / tau_rc_p;

    let excess_inplane = excess_above_nominal(&solution.inplane.cycle, geometry.n_sat_nominal);
    let hold = costs.c_hold_c_musd_per_year / DAYS_PER_YEAR * n_orbit_c * excess_inplane
        + costs.c_hold_p_musd_per_year / DAYS_PER_YEAR
            * n_orbit_p
            * q_c
            * solution.parking.cycle.mean_level();

    // Expected satellites replenished per contact cycle, in batches.
    let transfer_costing = transfer_costing(scenario)?;
    let replenished = solution.inplane.post_replenishment.mean_level()
        - solution.inplane.at_review.mean_level();
    let transfer = n_orbit_c / (tau_rc_c * q_c)
        * (costs.c_fuel_musd_per_kg * transfer_costing.m_fuel_kg + costs.c_trans_musd)
        * replenished;

    let m_total = transfer_costing.m_batch_kg * q_p;
    let full_contract = costs.c_lv_full_musd;
    let per_order = if costs.rideshare {
        (costs.c_lv_unit_usd_per_kg * 1e-6 * m_total).min(full_contract)
    } else {
        full_contract
    };
    let launch = n_orbit_p / tau_rc_p * per_order;

    Ok(CostBreakdown {
        build,
        hold,
        transfer,
        launch,
        total: build + hold + transfer + launch,
    })
}

/// Expected operating cost of the direct strategy: no parking terms, no
/// transfers, small-LV full contracts only.
pub fn cost_breakdown_direct(
    solution: &DirectSolution,
    scenario: &Scenario,
    direct: &DirectParams,
) -> CostBreakdown {
    let costs = &scenario.costs;
    let n_orbit_c = scenario.geometry.n_orbit_constellation as f64;
    let q = direct.policy.order_qty as f64;
    let tau_rc = solution.echelon.cycle_days;

    let build = costs.c_build_musd * n_orbit_c * q / tau_rc;
    let hold = costs.c_hold_c_musd_per_year / DAYS_PER_YEAR
        * n_orbit_c
        * excess_above_nominal(&solution.echelon.cycle, scenario.geometry.n_sat_nominal);
    let launch = n_orbit_c / tau_rc * direct.c_lv_full_musd;

    CostBreakdown {
        build,
        hold,
        transfer: 0.0,
        launch,
        total: build + hold + launch,
    }
}

/// `E[(X - n_nominal)+]`: expected spares held above the nominal count.
fn excess_above_nominal(pi: &StateDistribution, n_nominal: u32) -> f64 {
    pi.iter_states()
        .take_while(|&(x, _)| x > n_nominal as usize)
        .map(|(x, p)| (x - n_nominal as usize) as f64 * p)
        .sum()
}

/// Expected shortage `S_c = sum_{i<=nominal} (nominal - i) P(X = i)`.
pub fn expected_shortage(pi_cycle: &StateDistribution, n_nominal: u32) -> f64 {
    pi_cycle
        .iter_states()
        .filter(|&(x, _)| x <= n_nominal as usize)
        .map(|(x, p)| (n_nominal as usize - x) as f64 * p)
        .sum()
}

/// `P(X_p = 0)` under the cycle-average distribution.
pub fn stockout_probability(pi_cycle: &StateDistribution) -> f64 {
    pi_cycle.prob_state(0)
}

/// Mean stock level `sum_i i P(X = i)`.
pub fn mean_stock(pi_cycle: &StateDistribution) -> f64 {
    pi_cycle.mean_level()
}

/// Resilience metrics of a coupled solution.
pub fn resilience(solution: &CoupledSolution, scenario: &Scenario) -> ResilienceMetrics {
    ResilienceMetrics {
        shortage_c: expected_shortage(&solution.inplane.cycle, scenario.geometry.n_sat_nominal),
        stockout_p: stockout_probability(&solution.parking.cycle),
        mean_c: mean_stock(&solution.inplane.cycle),
        mean_p: mean_stock(&solution.parking.cycle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    use crate::policy::{solve_direct, solve_indirect, FixedPointParams};
    use crate::test_fixtures::{baseline_direct, baseline_scenario};

    #[test]
    fn zero_cost_parameters_zero_the_breakdown() {
        let mut scenario = baseline_scenario();
        scenario.costs = CostParams {
            c_build_musd: 0.0,
            c_hold_c_musd_per_year: 0.0,
            c_hold_p_musd_per_year: 0.0,
            c_fuel_musd_per_kg: 0.0,
            c_trans_musd: 0.0,
            c_lv_unit_usd_per_kg: 0.0,
            c_lv_full_musd: 0.0,
            ..scenario.costs
        };
        let solution = solve_indirect(&scenario, &FixedPointParams::default()).unwrap();
        let costs = cost_breakdown(&solution, &scenario).unwrap();
        assert_eq!(costs.build, 0.0);
        assert_eq!(costs.hold, 0.0);
        assert_eq!(costs.transfer, 0.0);
        assert_eq!(costs.launch, 0.0);
        assert_eq!(costs.total, 0.0);
    }

    #[test]
    fn total_is_exactly_additive() {
        let scenario = baseline_scenario();
        let solution = solve_indirect(&scenario, &FixedPointParams::default()).unwrap();
        let c = cost_breakdown(&solution, &scenario).unwrap();
        assert_eq!(c.total, c.build + c.hold + c.transfer + c.launch);
        assert!(c.build >= 0.0 && c.hold >= 0.0 && c.transfer >= 0.0 && c.launch >= 0.0);
    }

    #[test]
    fn shortage_decreases_as_reorder_point_rises() {
        let mut previous = f64::INFINITY;
        for r_c in [38u32, 40, 42] {
            let mut scenario = baseline_scenario();
            scenario.inplane_policy = crate::inplane::InplanePolicy::new(4, r_c).unwrap();
            let solution = solve_indirect(&scenario, &FixedPointParams::default()).unwrap();
            let shortage =
                expected_shortage(&solution.inplane.cycle, scenario.geometry.n_sat_nominal);
            assert!(shortage < previous, "S_c not decreasing at r_c = {r_c}");
            previous = shortage;
        }
    }

    #[test]
    fn rideshare_never_costs_more_to_launch() {
        // A single light batch per order makes the per-kg rate win the min.
        let mut scenario = baseline_scenario();
        scenario.parking_policy = crate::parking::ParkingPolicy::new(1, 2).unwrap();
        let solution = solve_indirect(&scenario, &FixedPointParams::default()).unwrap();
        let without = cost_breakdown(&solution, &scenario).unwrap();
        scenario.costs.rideshare = true;
        let with = cost_breakdown(&solution, &scenario).unwrap();
        assert!(with.launch < without.launch);
        // One ~780 kg batch at 6500 $/kg is about 5 M$ versus the 67 M$
        // full contract.
        assert!(with.launch < without.launch * 0.2);
    }

    #[test]
    fn direct_launch_cost_scales_linearly_with_contract_price() {
        let scenario = baseline_scenario();
        let direct = baseline_direct();
        let solution = solve_direct(&scenario, &direct).unwrap();
        let base = cost_breakdown_direct(&solution, &scenario, &direct);
        let mut doubled = direct.clone();
        doubled.c_lv_full_musd *= 2.0;
        let twice = cost_breakdown_direct(&solution, &scenario, &doubled);
        assert!((twice.launch - 2.0 * base.launch).abs() < 1e-15);
        assert_eq!(twice.transfer, 0.0);
    }

    #[test]
    fn shortage_edge_cases() {
        let above = StateDistribution::point_mass(6, 6);
        assert_eq!(expected_shortage(&above, 4), 0.0);
        let below = StateDistribution::point_mass(6, 2);
        assert_eq!(expected_shortage(&below, 4), 2.0);
        // Mixture.
        let mix = StateDistribution::from_vector(DVector::from_vec(vec![
            0.5, 0.0, 0.25, 0.0, 0.25, 0.0, 0.0,
        ]))
        .unwrap();
        // States 6 (0.5), 4 (0.25), 2 (0.25) with nominal 4: shortage 0.5.
        assert!((expected_shortage(&mix, 4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shortage_with_nominal_above_max_state() {
        // r_c below nominal makes every state a shortage state.
        let pi = StateDistribution::point_mass(3, 3);
        assert_eq!(expected_shortage(&pi, 5), 2.0);
    }

    #[test]
    fn excess_and_means() {
        let pi = StateDistribution::from_vector(DVector::from_vec(vec![0.25, 0.25, 0.25, 0.25]))
            .unwrap();
        // States 3,2,1,0 uniform: mean 1.5.
        assert!((mean_stock(&pi) - 1.5).abs() < 1e-15);
        assert!((excess_above_nominal(&pi, 1) - (2.0 * 0.25 + 1.0 * 0.25)).abs() < 1e-15);
        let point = StateDistribution::point_mass(5, 4);
        assert_eq!(mean_stock(&point), 4.0);
        assert_eq!(stockout_probability(&point), 0.0);
    }
}
