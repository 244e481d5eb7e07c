//! Discrete-time Monte Carlo simulation of the full constellation.
//!
//! Simulates every plane and parking orbit on the `tau_mc` grid with the
//! true (unquantized) RAAN contact times, capped-Poisson failures, and
//! sampled shifted-exponential LV lead times. Serves as the independent
//! oracle for the chain analysis.
//!
//! Replications are embarrassingly parallel; per-replication statistics are
//! exact integer counts and the cross-replication reduction runs in a fixed
//! order, so results are bit-identical for a given seed regardless of
//! execution mode or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode, KahanSum};
use crate::inplane::demand_of_state;
use crate::metrics;
use crate::orbital::DAYS_PER_YEAR;
use crate::policy::{self, CoupledSolution, Scenario};
use crate::stochastic::FailureModel;

/// Monte Carlo run controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon_years: f64,
    pub n_replications: u32,
    /// Master seed; replication `i` is seeded with `seed ^ i` (ChaCha8).
    pub seed: u64,
    /// Initial transient discarded from all statistics.
    pub warmup_years: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_replications == 0 {
            return Err(Error::Config("n_replications must be >= 1".into()));
        }
        if !(self.warmup_years >= 0.0 && self.horizon_years > self.warmup_years) {
            return Err(Error::Config(
                "need horizon_years > warmup_years >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// A point estimate with its across-replication standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Aggregated simulation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    /// Mean in-plane stock per plane, satellites.
    pub mean_c: Estimate,
    /// Mean parking stock per orbit, batches.
    pub mean_p: Estimate,
    /// Expected shortage below nominal per plane, satellites.
    pub shortage_c: Estimate,
    /// Fraction of time a parking orbit holds zero batches.
    pub stockout_p: Estimate,
    /// Time-average in-plane stock PMF, highest state first.
    pub histogram_c: Vec<f64>,
    /// Time-average parking stock PMF, highest state first.
    pub histogram_p: Vec<f64>,
    /// Empirical PMF of sampled LV lead times, by step count from zero.
    pub lead_time_pmf: Vec<f64>,
    /// Empirical PMF of in-plane batch demand at contacts.
    pub demand_pmf: Vec<f64>,
    pub n_replications: u32,
    pub steps_per_replication: u64,
    pub warmup_steps: u64,
    pub seed: u64,
}

/// One scheduled RAAN alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct ContactEvent {
    step: u64,
    plane: u32,
    park: u32,
}

/// Contact schedule from evenly spaced initial RAANs and the true drift
/// rates. Plane 0 and parking orbit 0 align at t = 0; that initial contact
/// is absorbed into the initial conditions and not replayed.
fn contact_schedule(scenario: &Scenario, n_steps: u64) -> Result<Vec<ContactEvent>> {
    let timing = policy::compute_timing(scenario)?;
    let relative = timing.drift_constellation_rad_day - timing.drift_parking_rad_day;
    let period = std::f64::consts::TAU / relative.abs();
    let n_c = scenario.geometry.n_orbit_constellation;
    let n_p = scenario.geometry.n_orbit_parking;
    let tau_mc = scenario.tau_mc_days;
    let horizon_days = n_steps as f64 * tau_mc;

    let mut events = Vec::new();
    for plane in 0..n_c {
        let theta = std::f64::consts::TAU * plane as f64 / n_c as f64;
        for park in 0..n_p {
            let phi = std::f64::consts::TAU * park as f64 / n_p as f64;
            let mut t = ((phi - theta) / relative).rem_euclid(period);
            if t < period * 1e-9 {
                t = period;
            }
            while t <= horizon_days {
                let step = ((t / tau_mc).round() as u64).max(1);
                if step <= n_steps {
                    events.push(ContactEvent { step, plane, park });
                }
                t += period;
            }
        }
    }
    events.sort_unstable();
    Ok(events)
}

/// Exact per-replication tallies.
#[derive(Debug, Clone)]
struct RepTally {
    plane_counts: Vec<u64>,
    park_counts: Vec<u64>,
    shortage_sum: u64,
    stockout_steps: u64,
    lead_counts: Vec<u64>,
    demand_counts: Vec<u64>,
    sampled_steps: u64,
}

fn run_replication(
    scenario: &Scenario,
    events: &[ContactEvent],
    failure: &FailureModel,
    n_steps: u64,
    warmup_steps: u64,
    seed: u64,
) -> RepTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_nominal = scenario.geometry.n_sat_nominal;
    let inplane = &scenario.inplane_policy;
    let parking = &scenario.parking_policy;
    let n_c_max = inplane.max_state();
    let n_p_max = parking.max_state();
    let lead = &scenario.lead_time;
    let tau_mc = scenario.tau_mc_days;

    // One sampler per operational-satellite count.
    let poisson: Vec<Poisson<f64>> = (1..=n_nominal)
        .map(|n| Poisson::new(n as f64 * failure.lambda_step).expect("positive rate"))
        .collect();
    let exponential = Exp::new(1.0 / lead.mu_lv_days).expect("positive rate");

    let mut planes = vec![n_c_max; scenario.geometry.n_orbit_constellation as usize];
    let mut parks = vec![n_p_max; scenario.geometry.n_orbit_parking as usize];
    let mut pending_delivery: Vec<Option<u64>> = vec![None; parks.len()];

    let mut tally = RepTally {
        plane_counts: vec![0; n_c_max as usize + 1],
        park_counts: vec![0; n_p_max as usize + 1],
        shortage_sum: 0,
        stockout_steps: 0,
        lead_counts: Vec::new(),
        demand_counts: vec![0; inplane.max_demand() as usize + 1],
        sampled_steps: 0,
    };

    let mut next_event = 0usize;
    for step in 1..=n_steps {
        let recording = step > warmup_steps;

        // 1. Failures: capped Poisson per plane; draws beyond the nominal
        //    count wipe the plane to zero (spares cannot fail).
        for stock in planes.iter_mut() {
            if *stock == 0 {
                continue;
            }
            let operational = (*stock).min(n_nominal);
            let draw = poisson[operational as usize - 1].sample(&mut rng) as u32;
            *stock = if draw > n_nominal {
                0
            } else {
                stock.saturating_sub(draw)
            };
        }

        // This step's alignments, in ascending (plane, park) order.
        let first = next_event;
        while next_event < events.len() && events[next_event].step == step {
            next_event += 1;
        }
        let due = &events[first..next_event];

        // 2. Alignment transfers: serve as much of the demand as the
        //    contacted parking orbit holds.
        for ev in due {
            let plane = &mut planes[ev.plane as usize];
            let park = &mut parks[ev.park as usize];
            let demand = demand_of_state(*plane, inplane);
            let served = demand.min(*park);
            *plane += served * inplane.order_qty;
            *park -= served;
            debug_assert!(*plane <= n_c_max);
            if recording {
                tally.demand_counts[demand as usize] += 1;
            }
        }

        // 3. Reviews: a contact is the contacted parking orbit's review
        //    instant; order unless one is already outstanding.
        for ev in due {
            let park = ev.park as usize;
            if parks[park] <= parking.reorder_point && pending_delivery[park].is_none() {
                let lead_days = lead.tau_lv_days + exponential.sample(&mut rng);
                let lead_steps = (lead_days / tau_mc).floor() as u64 + 1;
                pending_delivery[park] = Some(step + lead_steps);
                if recording {
                    let idx = lead_steps as usize;
                    if tally.lead_counts.len() <= idx {
                        tally.lead_counts.resize(idx + 1, 0);
                    }
                    tally.lead_counts[idx] += 1;
                }
            }
        }

        // 4. Deliveries due this step.
        for (park, pending) in pending_delivery.iter_mut().enumerate() {
            if *pending == Some(step) {
                parks[park] += parking.order_qty;
                debug_assert!(parks[park] <= n_p_max);
                *pending = None;
            }
        }

        if recording {
            tally.sampled_steps += 1;
            for &stock in &planes {
                tally.plane_counts[stock as usize] += 1;
                tally.shortage_sum += (n_nominal.saturating_sub(stock)) as u64;
            }
            for &stock in &parks {
                tally.park_counts[stock as usize] += 1;
                if stock == 0 {
                    tally.stockout_steps += 1;
                }
            }
        }
    }
    tally
}

/// Runs the Monte Carlo with the default execution mode.
pub fn run_monte_carlo(scenario: &Scenario, config: &SimConfig) -> Result<SimStats> {
    run_monte_carlo_with(scenario, config, ExecMode::default())
}

/// Runs `n_replications` independent replications and aggregates them.
pub fn run_monte_carlo_with(
    scenario: &Scenario,
    config: &SimConfig,
    mode: ExecMode,
) -> Result<SimStats> {
    config.validate()?;
    let tau_mc = scenario.tau_mc_days;
    let n_steps = (config.horizon_years * DAYS_PER_YEAR / tau_mc).round() as u64;
    let warmup_steps = (config.warmup_years * DAYS_PER_YEAR / tau_mc).round() as u64;
    if n_steps <= warmup_steps {
        return Err(Error::Config("horizon shorter than warm-up".into()));
    }
    let failure = FailureModel::from_annual_rate(
        scenario.lambda_per_year,
        tau_mc,
        scenario.geometry.n_sat_nominal,
    )?;
    let events = contact_schedule(scenario, n_steps)?;

    let tallies = exec::map_indexed(config.n_replications as usize, mode, |rep| {
        run_replication(
            scenario,
            &events,
            &failure,
            n_steps,
            warmup_steps,
            config.seed ^ rep as u64,
        )
    });

    let n_planes = scenario.geometry.n_orbit_constellation as u64;
    let n_parks = scenario.geometry.n_orbit_parking as u64;

    // Per-replication means feed the standard errors; pooled integer counts
    // give the point estimates.
    let per_rep = |f: &dyn Fn(&RepTally) -> f64| -> Vec<f64> { tallies.iter().map(f).collect() };
    let mean_c_reps = per_rep(&|t| {
        weighted_level_sum(&t.plane_counts) / (t.sampled_steps * n_planes) as f64
    });
    let mean_p_reps = per_rep(&|t| {
        weighted_level_sum(&t.park_counts) / (t.sampled_steps * n_parks) as f64
    });
    let shortage_reps =
        per_rep(&|t| t.shortage_sum as f64 / (t.sampled_steps * n_planes) as f64);
    let stockout_reps =
        per_rep(&|t| t.stockout_steps as f64 / (t.sampled_steps * n_parks) as f64);

    let mut plane_counts = vec![0u64; tallies[0].plane_counts.len()];
    let mut park_counts = vec![0u64; tallies[0].park_counts.len()];
    let mut demand_counts = vec![0u64; tallies[0].demand_counts.len()];
    let mut lead_counts: Vec<u64> = Vec::new();
    for t in &tallies {
        accumulate(&mut plane_counts, &t.plane_counts);
        accumulate(&mut park_counts, &t.park_counts);
        accumulate(&mut demand_counts, &t.demand_counts);
        if lead_counts.len() < t.lead_counts.len() {
            lead_counts.resize(t.lead_counts.len(), 0);
        }
        accumulate(&mut lead_counts, &t.lead_counts);
    }

    Ok(SimStats {
        mean_c: estimate(&mean_c_reps),
        mean_p: estimate(&mean_p_reps),
        shortage_c: estimate(&shortage_reps),
        stockout_p: estimate(&stockout_reps),
        histogram_c: normalize_descending(&plane_counts),
        histogram_p: normalize_descending(&park_counts),
        lead_time_pmf: normalize(&lead_counts),
        demand_pmf: normalize(&demand_counts),
        n_replications: config.n_replications,
        steps_per_replication: n_steps,
        warmup_steps,
        seed: config.seed,
    })
}

fn weighted_level_sum(counts: &[u64]) -> f64 {
    counts
        .iter()
        .enumerate()
        .map(|(level, &c)| level as f64 * c as f64)
        .sum()
}

fn accumulate(into: &mut [u64], from: &[u64]) {
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

fn estimate(per_rep: &[f64]) -> Estimate {
    let n = per_rep.len();
    let mut sum = KahanSum::default();
    for &v in per_rep {
        sum.add(v);
    }
    let mean = sum.value() / n as f64;
    if n < 2 {
        return Estimate {
            value: mean,
            std_error: 0.0,
        };
    }
    let mut sq = KahanSum::default();
    for &v in per_rep {
        sq.add((v - mean) * (v - mean));
    }
    Estimate {
        value: mean,
        std_error: (sq.value() / (n - 1) as f64).sqrt() / (n as f64).sqrt(),
    }
}

/// Counts by level -> PMF with the highest state first.
fn normalize_descending(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .rev()
        .map(|&c| c as f64 / total as f64)
        .collect()
}

fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Analysis-vs-simulation error rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub analysis_mean_c: f64,
    pub sim_mean_c: f64,
    /// Relative error of the in-plane mean stock.
    pub rel_mean_c: f64,
    pub analysis_mean_p: f64,
    pub sim_mean_p: f64,
    pub rel_mean_p: f64,
    pub analysis_shortage_c: f64,
    pub sim_shortage_c: f64,
    pub rel_shortage_c: f64,
    pub analysis_stockout_p: f64,
    pub sim_stockout_p: f64,
    /// Absolute stockout error in percentage points.
    pub stockout_diff_pp: f64,
    /// Whether the analysis satisfies the i.i.d. validity heuristic.
    pub analysis_valid: bool,
}

/// Table-style error comparison between the chain analysis and a simulation
/// of the same scenario. Relative errors are against the simulated value.
pub fn compare(analysis: &CoupledSolution, sim: &SimStats, scenario: &Scenario) -> ErrorReport {
    let m = metrics::resilience(analysis, scenario);
    let rel = |a: f64, s: f64| {
        if s == 0.0 {
            if a == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (a - s).abs() / s.abs()
        }
    };
    ErrorReport {
        analysis_mean_c: m.mean_c,
        sim_mean_c: sim.mean_c.value,
        rel_mean_c: rel(m.mean_c, sim.mean_c.value),
        analysis_mean_p: m.mean_p,
        sim_mean_p: sim.mean_p.value,
        rel_mean_p: rel(m.mean_p, sim.mean_p.value),
        analysis_shortage_c: m.shortage_c,
        sim_shortage_c: sim.shortage_c.value,
        rel_shortage_c: rel(m.shortage_c, sim.shortage_c.value),
        analysis_stockout_p: m.stockout_p,
        sim_stockout_p: sim.stockout_p.value,
        stockout_diff_pp: (m.stockout_p - sim.stockout_p.value).abs() * 100.0,
        analysis_valid: !analysis.validity_warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::baseline_scenario;

    fn quick_config() -> SimConfig {
        SimConfig {
            horizon_years: 3.0,
            n_replications: 3,
            seed: 99,
            warmup_years: 0.5,
        }
    }

    #[test]
    fn schedule_has_expected_contact_rate() {
        let scenario = baseline_scenario();
        let n_steps = 4000; // 2000 days
        let events = contact_schedule(&scenario, n_steps).unwrap();
        // Parking orbit 0 is contacted roughly every tau_p days.
        let timing = policy::compute_timing(&scenario).unwrap();
        let expected = (n_steps as f64 * scenario.tau_mc_days / timing.tau_p_days).floor();
        let got = events.len() as f64;
        assert!(
            (got - expected).abs() <= 1.0,
            "expected about {expected} contacts, got {got}"
        );
        // Sorted and within range.
        assert!(events.windows(2).all(|w| w[0] <= w[1]));
        assert!(events.iter().all(|e| e.step >= 1 && e.step <= n_steps));
        // Successive contacts of the single parking orbit cycle planes in
        // drift order and are about k_p steps apart.
        for w in events.windows(2) {
            let gap = w[1].step - w[0].step;
            assert!((20..=21).contains(&gap), "gap {gap}");
        }
    }

    #[test]
    fn deterministic_under_seed_and_mode() {
        let scenario = baseline_scenario();
        let cfg = quick_config();
        let a = run_monte_carlo_with(&scenario, &cfg, ExecMode::Sequential).unwrap();
        let b = run_monte_carlo_with(&scenario, &cfg, ExecMode::Sequential).unwrap();
        assert_eq!(a, b);
        let c = run_monte_carlo_with(&scenario, &cfg, ExecMode::Parallel).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn different_seed_changes_outcome() {
        let scenario = baseline_scenario();
        let cfg = quick_config();
        let a = run_monte_carlo(&scenario, &cfg).unwrap();
        let b = run_monte_carlo(
            &scenario,
            &SimConfig {
                seed: 100,
                ..cfg
            },
        )
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn near_zero_failure_rate_keeps_full_stock() {
        let mut scenario = baseline_scenario();
        scenario.lambda_per_year = 1e-9;
        let stats = run_monte_carlo(&scenario, &quick_config()).unwrap();
        let full = scenario.inplane_policy.max_state() as f64;
        assert!((stats.mean_c.value - full).abs() < 1e-3);
        assert!(stats.shortage_c.value < 1e-6);
        assert!(stats.stockout_p.value == 0.0);
    }

    #[test]
    fn histograms_are_pmfs() {
        let scenario = baseline_scenario();
        let stats = run_monte_carlo(&scenario, &quick_config()).unwrap();
        let sum_c: f64 = stats.histogram_c.iter().sum();
        let sum_p: f64 = stats.histogram_p.iter().sum();
        assert!((sum_c - 1.0).abs() < 1e-12);
        assert!((sum_p - 1.0).abs() < 1e-12);
        assert_eq!(
            stats.histogram_c.len(),
            scenario.inplane_policy.max_state() as usize + 1
        );
        // Sampled lead times respect the fixed processing delay.
        let k_lv = scenario.lead_time.k_lv as usize;
        for (l, &p) in stats.lead_time_pmf.iter().enumerate() {
            if l <= k_lv {
                assert_eq!(p, 0.0, "lead time of {l} steps below the fixed delay");
            }
        }
    }

    #[test]
    fn compare_is_zero_against_itself() {
        let scenario = baseline_scenario();
        let analysis =
            policy::solve_indirect(&scenario, &crate::policy::FixedPointParams::default())
                .unwrap();
        let m = metrics::resilience(&analysis, &scenario);
        let fake_sim = SimStats {
            mean_c: Estimate { value: m.mean_c, std_error: 0.0 },
            mean_p: Estimate { value: m.mean_p, std_error: 0.0 },
            shortage_c: Estimate { value: m.shortage_c, std_error: 0.0 },
            stockout_p: Estimate { value: m.stockout_p, std_error: 0.0 },
            histogram_c: vec![],
            histogram_p: vec![],
            lead_time_pmf: vec![],
            demand_pmf: vec![],
            n_replications: 0,
            steps_per_replication: 0,
            warmup_steps: 0,
            seed: 0,
        };
        let report = compare(&analysis, &fake_sim, &scenario);
        assert_eq!(report.rel_mean_c, 0.0);
        assert_eq!(report.rel_mean_p, 0.0);
        assert_eq!(report.rel_shortage_c, 0.0);
        assert_eq!(report.stockout_diff_pp, 0.0);
    }
}
