//! Shared baseline fixtures for unit tests.

use crate::inplane::InplanePolicy;
use crate::metrics::CostParams;
use crate::optimize::{DesignBounds, GaParams, OptimizerParams, StockoutThreshold};
use crate::orbital::{ConstellationGeometry, EarthConstants};
use crate::parking::ParkingPolicy;
use crate::policy::{DirectParams, FixedPointParams, Scenario};
use crate::stochastic::LeadTimeModel;

/// The representative case study: 40 planes at 1200 km / 50 deg, one parking
/// orbit at 735 km, heavy-LV resupply, policy (4, 40, 23, 2).
pub fn baseline_scenario() -> Scenario {
    Scenario {
        constants: EarthConstants::default(),
        geometry: ConstellationGeometry {
            h_constellation_km: 1200.0,
            h_parking_km: 735.0,
            inclination_rad: 50f64.to_radians(),
            n_orbit_constellation: 40,
            n_orbit_parking: 1,
            n_sat_nominal: 40,
        },
        inplane_policy: InplanePolicy::new(4, 40).unwrap(),
        parking_policy: ParkingPolicy::new(23, 2).unwrap(),
        lambda_per_year: 0.05,
        tau_mc_days: 0.5,
        lead_time: LeadTimeModel::new(20.0, 20.0, 0.5).unwrap(),
        costs: baseline_costs(),
    }
}

pub fn baseline_costs() -> CostParams {
    CostParams {
        c_build_musd: 0.5,
        c_hold_c_musd_per_year: 0.5,
        c_hold_p_musd_per_year: 0.5,
        c_fuel_musd_per_kg: 0.001,
        c_trans_musd: 0.5,
        c_lv_unit_usd_per_kg: 6500.0,
        c_lv_full_musd: 67.0,
        m_payload_kg: 18_500.0,
        m_sat_kg: 150.0,
        m_bus_kg: 100.0,
        v_ex_km_s: 2.16,
        rideshare: false,
    }
}

/// Small-LV direct strategy at (2, 39).
pub fn baseline_direct() -> DirectParams {
    DirectParams {
        policy: ParkingPolicy::new(2, 39).unwrap(),
        lead_time: LeadTimeModel::new(10.0, 10.0, 0.5).unwrap(),
        c_lv_full_musd: 7.5,
        m_payload_kg: 300.0,
    }
}

pub fn default_optimizer_params() -> OptimizerParams {
    OptimizerParams {
        epsilon_shortage: 0.25,
        epsilon_stockout: StockoutThreshold::auto(),
        bounds: DesignBounds {
            q_c: (1, 20),
            r_c: (35, 45),
            q_p: (1, 40),
            r_p: (0, 10),
            n_orbit_p: (1, 20),
            h_p_km: (500, 1100),
        },
        ga: GaParams::default(),
        fixed_point: FixedPointParams::default(),
    }
}

/// JSON form of the baseline, shared by config and CLI tests.
pub fn baseline_config_json() -> String {
    r#"{
  "schema": 1,
  "geometry": {
    "h_constellation_km": 1200.0,
    "h_parking_km": 735.0,
    "inclination_deg": 50.0,
    "n_orbit_constellation": 40,
    "n_orbit_parking": 1,
    "n_sat_nominal": 40
  },
  "stochastic": {
    "lambda_sat_per_year": 0.05,
    "mu_lv_days": 20.0,
    "tau_lv_days": 20.0,
    "tau_mc_days": 0.5
  },
  "policy": { "q_c": 4, "r_c": 40, "q_p": 23, "r_p": 2 },
  "costs": {
    "c_build_musd": 0.5,
    "c_hold_c_musd_per_year": 0.5,
    "c_hold_p_musd_per_year": 0.5,
    "c_fuel_musd_per_kg": 0.001,
    "c_trans_musd": 0.5,
    "c_lv_unit_usd_per_kg": 6500.0,
    "c_lv_full_musd": 67.0,
    "m_payload_kg": 18500.0,
    "m_sat_kg": 150.0,
    "m_bus_kg": 100.0,
    "v_ex_km_s": 2.16,
    "rideshare": false
  },
  "direct": {
    "q": 2,
    "r": 39,
    "mu_lv_days": 10.0,
    "tau_lv_days": 10.0,
    "c_lv_full_musd": 7.5,
    "m_payload_kg": 300.0
  },
  "optimizer": {
    "epsilon_shortage": 0.25,
    "epsilon_stockout": "auto"
  },
  "sim": {
    "horizon_years": 20.0,
    "n_replications": 20,
    "seed": 20240815,
    "warmup_years": 2.0
  }
}
"#
    .to_string()
}
