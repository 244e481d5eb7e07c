//! JSON report and CSV emission.
//!
//! Every emitted quantity declares its unit, either in a field name or in
//! the `units` block, so the per-day/per-year and satellite/batch
//! conventions never leak ambiguously.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{self, CostBreakdown, ResilienceMetrics};
use crate::optimize::GenerationStat;
use crate::policy::{CoupledSolution, DirectParams, DirectSolution, Scenario};
use crate::sim::SimStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub cost: String,
    pub time: String,
    pub inplane_stock: String,
    pub parking_stock: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            cost: "M$/day".into(),
            time: "days".into(),
            inplane_stock: "satellites".into(),
            parking_stock: "batches".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationsReport {
    pub tau_c_days: f64,
    pub tau_p_days: f64,
    pub k_c: u32,
    pub k_p: u32,
    pub tau_rc_c_days: f64,
    pub tau_rc_p_days: f64,
    pub k_io_p_steps: f64,
    pub k_lt_p_steps: f64,
}

/// Distribution tables, highest stock level first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionsReport {
    pub inplane_post_replenishment: Vec<f64>,
    pub inplane_at_review: Vec<f64>,
    pub inplane_cycle: Vec<f64>,
    pub parking_post_delivery: Vec<f64>,
    pub parking_at_reorder: Vec<f64>,
    pub parking_inter_order: Vec<f64>,
    pub parking_lead_time: Vec<f64>,
    pub parking_cycle: Vec<f64>,
    pub parking_contact_cycle: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub inplane_stationarity: f64,
    pub parking_stationarity: f64,
    pub validity_warning: bool,
    pub validity_threshold: f64,
}

/// Full analysis report for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub schema: u32,
    pub strategy: String,
    pub units: Units,
    pub costs: CostBreakdown,
    pub metrics: ResilienceMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub durations: Option<DurationsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributions: Option<DistributionsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub availability: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demand_pmf: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    /// Direct strategy only: cycle duration, days.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_days: Option<f64>,
}

impl AnalysisReport {
    pub fn for_indirect(solution: &CoupledSolution, scenario: &Scenario) -> Result<Self> {
        let costs = metrics::cost_breakdown(solution, scenario)?;
        let resilience = metrics::resilience(solution, scenario);
        Ok(Self {
            schema: crate::config::SCHEMA_VERSION,
            strategy: "indirect".into(),
            units: Units::default(),
            costs,
            metrics: resilience,
            durations: Some(DurationsReport {
                tau_c_days: solution.timing.tau_c_days,
                tau_p_days: solution.timing.tau_p_days,
                k_c: solution.timing.k_c,
                k_p: solution.timing.k_p,
                tau_rc_c_days: solution.inplane.cycle_days,
                tau_rc_p_days: solution.parking.cycle_days,
                k_io_p_steps: solution.parking.k_io,
                k_lt_p_steps: solution.parking.k_lt,
            }),
            distributions: Some(DistributionsReport {
                inplane_post_replenishment: solution.inplane.post_replenishment.to_vec(),
                inplane_at_review: solution.inplane.at_review.to_vec(),
                inplane_cycle: solution.inplane.cycle.to_vec(),
                parking_post_delivery: solution.parking.post_delivery.to_vec(),
                parking_at_reorder: solution.parking.at_reorder.to_vec(),
                parking_inter_order: solution.parking.inter_order.to_vec(),
                parking_lead_time: solution.parking.lead_time.to_vec(),
                parking_cycle: solution.parking.cycle.to_vec(),
                parking_contact_cycle: solution.parking.contact.cycle.to_vec(),
            }),
            availability: Some(solution.availability.values().to_vec()),
            demand_pmf: Some(solution.demand.values().to_vec()),
            convergence: Some(ConvergenceReport {
                converged: solution.converged,
                iterations: solution.iterations,
                residual: solution.residual,
                residual_history: solution.residual_history.clone(),
                inplane_stationarity: solution.inplane_stationarity,
                parking_stationarity: solution.parking_stationarity,
                validity_warning: solution.validity_warning,
                validity_threshold: solution.validity_threshold(),
            }),
            cycle_days: None,
        })
    }

    pub fn for_direct(
        solution: &DirectSolution,
        scenario: &Scenario,
        direct: &DirectParams,
    ) -> Self {
        let costs = metrics::cost_breakdown_direct(solution, scenario, direct);
        Self {
            schema: crate::config::SCHEMA_VERSION,
            strategy: "direct".into(),
            units: Units::default(),
            costs,
            metrics: ResilienceMetrics {
                shortage_c: metrics::expected_shortage(
                    &solution.echelon.cycle,
                    scenario.geometry.n_sat_nominal,
                ),
                stockout_p: f64::NAN,
                mean_c: solution.echelon.cycle.mean_level(),
                mean_p: f64::NAN,
            },
            durations: None,
            distributions: None,
            availability: None,
            demand_pmf: None,
            convergence: None,
            cycle_days: Some(solution.echelon.cycle_days),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Writes a stock histogram as `state,probability` with states descending.
pub fn write_state_histogram(path: &Path, probs_descending: &[f64]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "state,probability")?;
    let top = probs_descending.len() - 1;
    for (i, p) in probs_descending.iter().enumerate() {
        writeln!(file, "{},{}", top - i, p)?;
    }
    Ok(())
}

/// Writes an index-ascending PMF (lead-time steps, demand batches).
pub fn write_index_pmf(path: &Path, header: &str, pmf: &[f64]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{header},probability")?;
    for (i, p) in pmf.iter().enumerate() {
        writeln!(file, "{i},{p}")?;
    }
    Ok(())
}

/// Writes the GA history as `generation,best_cost,feasible_count`.
pub fn write_history_csv(path: &Path, history: &[GenerationStat]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "generation,best_cost,feasible_count")?;
    for row in history {
        writeln!(file, "{},{},{}", row.generation, row.best_cost, row.feasible_count)?;
    }
    Ok(())
}

/// Writes simulation histograms alongside the stats JSON.
pub fn write_sim_outputs(dir: &Path, stats: &SimStats) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("stats.json"),
        serde_json::to_string_pretty(stats)?,
    )?;
    write_state_histogram(&dir.join("histogram_constellation.csv"), &stats.histogram_c)?;
    write_state_histogram(&dir.join("histogram_parking.csv"), &stats.histogram_p)?;
    write_index_pmf(
        &dir.join("lead_time_histogram.csv"),
        "steps",
        &stats.lead_time_pmf,
    )?;
    write_index_pmf(&dir.join("demand_histogram.csv"), "batches", &stats.demand_pmf)?;
    Ok(())
}
