//! Strict JSON scenario configuration.
//!
//! Unknown keys are rejected everywhere to catch parameter-name typos, and
//! every module-level precondition is checked at parse time. Units are
//! spelled out in the field names.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inplane::InplanePolicy;
use crate::metrics::CostParams;
use crate::optimize::{
    DesignBounds, DirectBounds, GaParams, OptimizerParams, StockoutThreshold,
};
use crate::orbital::{ConstellationGeometry, EarthConstants};
use crate::parking::ParkingPolicy;
use crate::policy::{DirectParams, FixedPointParams, Scenario};
use crate::sim::SimConfig;
use crate::stochastic::LeadTimeModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default)]
    pub constants: ConstantsConfig,
    pub geometry: GeometryConfig,
    pub stochastic: StochasticConfig,
    pub policy: PolicyConfig,
    pub costs: CostsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectConfig>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub fixed_point: FixedPointConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub mu_km3_s2: f64,
    pub r_earth_km: f64,
    pub j2: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        let c = EarthConstants::default();
        Self {
            mu_km3_s2: c.mu_km3_s2,
            r_earth_km: c.r_earth_km,
            j2: c.j2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub h_constellation_km: f64,
    pub h_parking_km: f64,
    pub inclination_deg: f64,
    pub n_orbit_constellation: u32,
    pub n_orbit_parking: u32,
    pub n_sat_nominal: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticConfig {
    /// Per-satellite failure rate, failures/year. Must be positive: a
    /// failure-free chain has no unique stationary distribution.
    pub lambda_sat_per_year: f64,
    pub mu_lv_days: f64,
    pub tau_lv_days: f64,
    pub tau_mc_days: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub q_c: u32,
    pub r_c: u32,
    pub q_p: u32,
    pub r_p: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsConfig {
    pub c_build_musd: f64,
    pub c_hold_c_musd_per_year: f64,
    pub c_hold_p_musd_per_year: f64,
    pub c_fuel_musd_per_kg: f64,
    pub c_trans_musd: f64,
    pub c_lv_unit_usd_per_kg: f64,
    pub c_lv_full_musd: f64,
    pub m_payload_kg: f64,
    pub m_sat_kg: f64,
    pub m_bus_kg: f64,
    pub v_ex_km_s: f64,
    pub rideshare: bool,
}

/// Direct-strategy block: small-LV parameters and its `(q, r)` policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectConfig {
    pub q: u32,
    pub r: u32,
    pub mu_lv_days: f64,
    pub tau_lv_days: f64,
    pub c_lv_full_musd: f64,
    pub m_payload_kg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_bounds: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_bounds: Option<[u32; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub epsilon_shortage: f64,
    /// Either a number or the string "auto" (validity-heuristic threshold).
    pub epsilon_stockout: StockoutThreshold,
    pub bounds: BoundsConfig,
    pub ga: GaParams,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epsilon_shortage: 0.25,
            epsilon_stockout: StockoutThreshold::auto(),
            bounds: BoundsConfig::default(),
            ga: GaParams::default(),
        }
    }
}

/// Design-box bounds; unspecified entries fall back to defaults derived
/// from the geometry.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub q_c: Option<[u32; 2]>,
    pub r_c: Option<[u32; 2]>,
    pub q_p: Option<[u32; 2]>,
    pub r_p: Option<[u32; 2]>,
    pub n_orbit_p: Option<[u32; 2]>,
    pub h_p_km: Option<[u32; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub horizon_years: f64,
    pub n_replications: u32,
    pub seed: u64,
    pub warmup_years: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            horizon_years: 20.0,
            n_replications: 100,
            seed: 20240815,
            warmup_years: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        let p = FixedPointParams::default();
        Self {
            tolerance: p.tolerance,
            max_iterations: p.max_iterations,
        }
    }
}

impl ScenarioConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema version {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        // Assembling the domain objects runs every module-level check.
        let scenario = self.scenario()?;
        self.sim_config().validate()?;
        self.optimizer_params()?;
        if let Some(direct) = &self.direct {
            let params = self.direct_params()?.expect("direct block present");
            if direct.q == 0 {
                return Err(Error::Config("direct q must be >= 1".into()));
            }
            if params.c_lv_full_musd < 0.0 || params.m_payload_kg <= 0.0 {
                return Err(Error::Config(
                    "direct launch cost must be nonnegative and payload positive".into(),
                ));
            }
            self.direct_bounds()?;
        }
        if let StockoutThreshold::Auto(word) = &self.optimizer.epsilon_stockout {
            if word != "auto" {
                return Err(Error::Config(format!(
                    "epsilon_stockout must be a number or \"auto\", got \"{word}\""
                )));
            }
        }
        let fp = self.fixed_point_params();
        if fp.tolerance <= 0.0 || !fp.tolerance.is_finite() || fp.max_iterations == 0 {
            return Err(Error::Config(
                "fixed-point tolerance must be positive and max_iterations >= 1".into(),
            ));
        }
        let _ = scenario;
        Ok(())
    }

    pub fn earth_constants(&self) -> EarthConstants {
        EarthConstants {
            mu_km3_s2: self.constants.mu_km3_s2,
            r_earth_km: self.constants.r_earth_km,
            j2: self.constants.j2,
        }
    }

    /// Assembles and validates the analysis scenario.
    pub fn scenario(&self) -> Result<Scenario> {
        let constants = self.earth_constants();
        constants.validate()?;
        let geometry = ConstellationGeometry {
            h_constellation_km: self.geometry.h_constellation_km,
            h_parking_km: self.geometry.h_parking_km,
            inclination_rad: self.geometry.inclination_deg.to_radians(),
            n_orbit_constellation: self.geometry.n_orbit_constellation,
            n_orbit_parking: self.geometry.n_orbit_parking,
            n_sat_nominal: self.geometry.n_sat_nominal,
        };
        geometry.validate()?;
        let s = &self.stochastic;
        if s.lambda_sat_per_year <= 0.0 {
            return Err(Error::Config(
                "lambda_sat_per_year must be strictly positive".into(),
            ));
        }
        let lead_time = LeadTimeModel::new(s.mu_lv_days, s.tau_lv_days, s.tau_mc_days)?;
        let costs = self.cost_params()?;
        Ok(Scenario {
            constants,
            geometry,
            inplane_policy: InplanePolicy::new(self.policy.q_c, self.policy.r_c)?,
            parking_policy: ParkingPolicy::new(self.policy.q_p, self.policy.r_p)?,
            lambda_per_year: s.lambda_sat_per_year,
            tau_mc_days: s.tau_mc_days,
            lead_time,
            costs,
        })
    }

    fn cost_params(&self) -> Result<CostParams> {
        let c = &self.costs;
        let params = CostParams {
            c_build_musd: c.c_build_musd,
            c_hold_c_musd_per_year: c.c_hold_c_musd_per_year,
            c_hold_p_musd_per_year: c.c_hold_p_musd_per_year,
            c_fuel_musd_per_kg: c.c_fuel_musd_per_kg,
            c_trans_musd: c.c_trans_musd,
            c_lv_unit_usd_per_kg: c.c_lv_unit_usd_per_kg,
            c_lv_full_musd: c.c_lv_full_musd,
            m_payload_kg: c.m_payload_kg,
            m_sat_kg: c.m_sat_kg,
            m_bus_kg: c.m_bus_kg,
            v_ex_km_s: c.v_ex_km_s,
            rideshare: c.rideshare,
        };
        let nonnegative = [
            params.c_build_musd,
            params.c_hold_c_musd_per_year,
            params.c_hold_p_musd_per_year,
            params.c_fuel_musd_per_kg,
            params.c_trans_musd,
            params.c_lv_unit_usd_per_kg,
            params.c_lv_full_musd,
            params.m_sat_kg,
            params.m_bus_kg,
        ];
        if nonnegative.iter().any(|&v| v < 0.0) {
            return Err(Error::Config("costs and masses must be nonnegative".into()));
        }
        if params.m_payload_kg <= 0.0 || params.v_ex_km_s <= 0.0 {
            return Err(Error::Config(
                "payload capacity and exhaust velocity must be positive".into(),
            ));
        }
        Ok(params)
    }

    /// Direct-strategy parameters, if the `direct` block is present.
    pub fn direct_params(&self) -> Result<Option<DirectParams>> {
        let Some(d) = &self.direct else {
            return Ok(None);
        };
        Ok(Some(DirectParams {
            policy: ParkingPolicy::new(d.q, d.r)?,
            lead_time: LeadTimeModel::new(d.mu_lv_days, d.tau_lv_days, self.stochastic.tau_mc_days)?,
            c_lv_full_musd: d.c_lv_full_musd,
            m_payload_kg: d.m_payload_kg,
        }))
    }

    /// Direct-strategy `(q, r)` search box; defaults to `q` in [1, 20] and
    /// `r` within 5 of the nominal count.
    pub fn direct_bounds(&self) -> Result<DirectBounds> {
        let d = self
            .direct
            .as_ref()
            .ok_or_else(|| Error::Config("no direct block in config".into()))?;
        let nominal = self.geometry.n_sat_nominal;
        let q = d.q_bounds.unwrap_or([1, 20]);
        let r = d
            .r_bounds
            .unwrap_or([nominal.saturating_sub(5), nominal + 5]);
        let bounds = DirectBounds {
            q: (q[0], q[1]),
            r: (r[0], r[1]),
        };
        if bounds.q.0 == 0 || bounds.q.0 > bounds.q.1 || bounds.r.0 > bounds.r.1 {
            return Err(Error::Config("invalid direct bounds".into()));
        }
        Ok(bounds)
    }

    pub fn optimizer_params(&self) -> Result<OptimizerParams> {
        let o = &self.optimizer;
        if o.epsilon_shortage <= 0.0 {
            return Err(Error::Config("epsilon_shortage must be positive".into()));
        }
        if let StockoutThreshold::Fixed(v) = o.epsilon_stockout {
            if v <= 0.0 {
                return Err(Error::Config("epsilon_stockout must be positive".into()));
            }
        }
        let nominal = self.geometry.n_sat_nominal;
        let h_c = self.geometry.h_constellation_km;
        let pick = |v: Option<[u32; 2]>, d: (u32, u32)| v.map(|b| (b[0], b[1])).unwrap_or(d);
        let default_h_hi = ((h_c - 1.0).floor() as u32).min(1100);
        let b = &o.bounds;
        let bounds = DesignBounds {
            q_c: pick(b.q_c, (1, 20)),
            r_c: pick(b.r_c, (nominal.saturating_sub(5), nominal + 5)),
            // Wider than the validation sampling box so that payload-limited
            // optima stay reachable; the mass constraint caps it anyway.
            q_p: pick(b.q_p, (1, 40)),
            r_p: pick(b.r_p, (0, 10)),
            n_orbit_p: pick(b.n_orbit_p, (1, 20)),
            h_p_km: pick(b.h_p_km, (500, default_h_hi)),
        };
        bounds.validate(h_c)?;
        o.ga.validate()?;
        Ok(OptimizerParams {
            epsilon_shortage: o.epsilon_shortage,
            epsilon_stockout: o.epsilon_stockout.clone(),
            bounds,
            ga: o.ga,
            fixed_point: self.fixed_point_params(),
        })
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            horizon_years: self.sim.horizon_years,
            n_replications: self.sim.n_replications,
            seed: self.sim.seed,
            warmup_years: self.sim.warmup_years,
        }
    }

    pub fn fixed_point_params(&self) -> FixedPointParams {
        FixedPointParams {
            tolerance: self.fixed_point.tolerance,
            max_iterations: self.fixed_point.max_iterations,
        }
    }
}
