//! Constrained design optimization of the indirect strategy, direct-strategy
//! search, and failure-rate sweeps.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::inplane::InplanePolicy;
use crate::metrics::{self, CostBreakdown};
use crate::parking::ParkingPolicy;
use crate::policy::{self, DirectParams, FixedPointParams, Scenario};

/// Fitness assigned to designs whose chain solve failed or did not converge.
const NONCONVERGED_FITNESS: f64 = 1e6;

/// Integer design point `(q_c, r_c, q_p, r_p, N_orbit_p, h_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignVector {
    pub q_c: u32,
    pub r_c: u32,
    pub q_p: u32,
    pub r_p: u32,
    pub n_orbit_p: u32,
    /// Parking altitude on a 1 km grid.
    pub h_p_km: u32,
}

impl DesignVector {
    fn to_genes(self) -> [u32; 6] {
        [
            self.q_c,
            self.r_c,
            self.q_p,
            self.r_p,
            self.n_orbit_p,
            self.h_p_km,
        ]
    }

    fn from_genes(g: &[u32]) -> Self {
        Self {
            q_c: g[0],
            r_c: g[1],
            q_p: g[2],
            r_p: g[3],
            n_orbit_p: g[4],
            h_p_km: g[5],
        }
    }
}

/// Inclusive per-gene bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBounds {
    pub q_c: (u32, u32),
    pub r_c: (u32, u32),
    pub q_p: (u32, u32),
    pub r_p: (u32, u32),
    pub n_orbit_p: (u32, u32),
    pub h_p_km: (u32, u32),
}

impl DesignBounds {
    fn as_array(&self) -> [(u32, u32); 6] {
        [
            self.q_c,
            self.r_c,
            self.q_p,
            self.r_p,
            self.n_orbit_p,
            self.h_p_km,
        ]
    }

    pub fn contains(&self, x: &DesignVector) -> bool {
        self.as_array()
            .iter()
            .zip(x.to_genes())
            .all(|(&(lo, hi), g)| (lo..=hi).contains(&g))
    }

    pub fn validate(&self, h_constellation_km: f64) -> Result<()> {
        for (lo, hi) in self.as_array() {
            if lo > hi {
                return Err(Error::Config(format!("bounds [{lo}, {hi}] are inverted")));
            }
        }
        if self.q_c.0 == 0 || self.q_p.0 == 0 || self.n_orbit_p.0 == 0 {
            return Err(Error::Config(
                "order quantities and plane counts must be >= 1".into(),
            ));
        }
        if (self.h_p_km.1 as f64) >= h_constellation_km {
            return Err(Error::Config(format!(
                "parking altitude bound {} must stay below the constellation at {} km",
                self.h_p_km.1, h_constellation_km
            )));
        }
        Ok(())
    }
}

/// Genetic-algorithm controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: u32,
    pub generations: u32,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: u32,
    pub seed: u64,
    pub penalty_weight: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 120,
            crossover_rate: 0.9,
            mutation_rate: 0.15,
            tournament_size: 3,
            seed: 42,
            penalty_weight: 100.0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::Config("GA population must be >= 4".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate)
            || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return Err(Error::Config("GA rates must lie in [0, 1]".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Stockout constraint threshold: fixed, or the validity heuristic
/// `1 / (N_sat_p + 1)` recomputed from each candidate's own parking size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StockoutThreshold {
    Fixed(f64),
    Auto(String),
}

impl StockoutThreshold {
    pub fn auto() -> Self {
        StockoutThreshold::Auto("auto".into())
    }

    fn resolve(&self, parking_max_state: u32) -> f64 {
        match self {
            StockoutThreshold::Fixed(v) => *v,
            StockoutThreshold::Auto(_) => 1.0 / (parking_max_state as f64 + 1.0),
        }
    }
}

/// Full optimizer configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    /// Shortage threshold `epsilon_1`.
    pub epsilon_shortage: f64,
    /// Stockout threshold `epsilon_2`.
    pub epsilon_stockout: StockoutThreshold,
    pub bounds: DesignBounds,
    pub ga: GaParams,
    pub fixed_point: FixedPointParams,
}

/// One evaluated design with constraint values and penalized fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedDesign {
    pub design: DesignVector,
    pub cost: Option<CostBreakdown>,
    pub shortage_c: f64,
    pub stockout_p: f64,
    pub m_total_kg: f64,
    /// `S_c - epsilon_1`.
    pub g1: f64,
    /// `P(X_p = 0) - epsilon_2`.
    pub g2: f64,
    /// `m_total - m_payload`, kg.
    pub g3: f64,
    pub feasible: bool,
    pub converged: bool,
    pub fitness: f64,
}

/// Applies a design to the base scenario.
pub fn apply_design(base: &Scenario, x: &DesignVector) -> Result<Scenario> {
    let mut scenario = base.clone();
    scenario.inplane_policy = InplanePolicy::new(x.q_c, x.r_c)?;
    scenario.parking_policy = ParkingPolicy::new(x.q_p, x.r_p)?;
    scenario.geometry.n_orbit_parking = x.n_orbit_p;
    scenario.geometry.h_parking_km = x.h_p_km as f64;
    scenario.geometry.validate()?;
    Ok(scenario)
}

/// Solves one candidate and scores it. Solver failures and non-convergence
/// come back flagged with the fixed large fitness rather than as errors so
/// the search can move past them.
pub fn evaluate_design(
    x: &DesignVector,
    base: &Scenario,
    params: &OptimizerParams,
) -> EvaluatedDesign {
    let epsilon_2 = params.epsilon_stockout.resolve(x.q_p + x.r_p);
    let mut out = EvaluatedDesign {
        design: *x,
        cost: None,
        shortage_c: f64::NAN,
        stockout_p: f64::NAN,
        m_total_kg: f64::NAN,
        g1: f64::NAN,
        g2: f64::NAN,
        g3: f64::NAN,
        feasible: false,
        converged: false,
        fitness: NONCONVERGED_FITNESS,
    };
    let Ok(scenario) = apply_design(base, x) else {
        return out;
    };
    let Ok(m_total) = metrics::launch_mass_kg(&scenario) else {
        return out;
    };
    out.m_total_kg = m_total;
    out.g3 = m_total - scenario.costs.m_payload_kg;

    let Ok(solution) = policy::solve_indirect(&scenario, &params.fixed_point) else {
        return out;
    };
    let Ok(cost) = metrics::cost_breakdown(&solution, &scenario) else {
        return out;
    };
    let resilience = metrics::resilience(&solution, &scenario);
    out.cost = Some(cost);
    out.shortage_c = resilience.shortage_c;
    out.stockout_p = resilience.stockout_p;
    out.g1 = resilience.shortage_c - params.epsilon_shortage;
    out.g2 = resilience.stockout_p - epsilon_2;
    out.converged = solution.converged;
    if !solution.converged {
        return out;
    }
    out.feasible = out.g1 <= 0.0 && out.g2 <= 0.0 && out.g3 <= 0.0;
    out.fitness = cost.total
        + params.ga.penalty_weight * (out.g1.max(0.0) + out.g2.max(0.0) + out.g3.max(0.0));
    out
}

/// Per-generation search progress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStat {
    pub generation: u32,
    /// Best feasible total cost found so far (best fitness until one exists).
    pub best_cost: f64,
    /// Feasible designs in the current population.
    pub feasible_count: u32,
    pub best_fitness: f64,
}

/// Generic integer-coded GA: tournament selection, uniform crossover,
/// per-gene uniform reset mutation, elitism of one.
mod ga {
    use super::*;

    pub struct HistoryEntry {
        pub generation: u32,
        pub gen_best_fitness: f64,
        pub feasible_count: u32,
        /// Lowest fitness among feasible genomes evaluated so far; equals
        /// their cost because feasible designs carry zero penalty.
        pub best_feasible_so_far: Option<f64>,
    }

    pub struct Outcome {
        pub best_fitness_genes: Vec<u32>,
        pub history: Vec<HistoryEntry>,
        pub evaluations: HashMap<Vec<u32>, (f64, bool)>,
    }

    pub fn run<F>(
        bounds: &[(u32, u32)],
        params: &GaParams,
        mode: ExecMode,
        evaluate: F,
    ) -> Outcome
    where
        F: Fn(&[u32]) -> (f64, bool) + Sync,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let pop_size = params.population as usize;
        let sample_gene = |rng: &mut ChaCha8Rng, (lo, hi): (u32, u32)| -> u32 {
            rng.random_range(lo..=hi)
        };
        let mut population: Vec<Vec<u32>> = (0..pop_size)
            .map(|_| bounds.iter().map(|&b| sample_gene(&mut rng, b)).collect())
            .collect();

        let mut cache: HashMap<Vec<u32>, (f64, bool)> = HashMap::new();
        let mut history = Vec::new();
        let mut best: Option<(Vec<u32>, f64)> = None;
        let mut best_feasible: Option<f64> = None;

        for generation in 0..params.generations {
            // Evaluate the genomes not seen before, in parallel.
            let fresh: Vec<Vec<u32>> = {
                let mut seen: Vec<Vec<u32>> = Vec::new();
                for genome in &population {
                    if !cache.contains_key(genome) && !seen.contains(genome) {
                        seen.push(genome.clone());
                    }
                }
                seen
            };
            let scores = exec::map_indexed(fresh.len(), mode, |i| evaluate(&fresh[i]));
            for (genome, score) in fresh.into_iter().zip(scores) {
                if score.1 && best_feasible.map(|b| score.0 < b).unwrap_or(true) {
                    best_feasible = Some(score.0);
                }
                cache.insert(genome, score);
            }

            let fitness_of = |genome: &Vec<u32>| cache[genome].0;
            let feasible_count = population
                .iter()
                .filter(|genome| cache[*genome].1)
                .count() as u32;
            let gen_best = population
                .iter()
                .min_by(|a, b| {
                    fitness_of(a)
                        .partial_cmp(&fitness_of(b))
                        .unwrap()
                        .then_with(|| a.cmp(b))
                })
                .expect("nonempty population")
                .clone();
            let gen_best_fitness = fitness_of(&gen_best);
            if best
                .as_ref()
                .map(|(_, f)| gen_best_fitness < *f)
                .unwrap_or(true)
            {
                best = Some((gen_best.clone(), gen_best_fitness));
            }
            history.push(HistoryEntry {
                generation,
                gen_best_fitness,
                feasible_count,
                best_feasible_so_far: best_feasible,
            });

            if generation + 1 == params.generations {
                break;
            }

            // Breed the next generation.
            let mut next: Vec<Vec<u32>> = vec![best.as_ref().unwrap().0.clone()];
            while next.len() < pop_size {
                let tournament = |rng: &mut ChaCha8Rng| -> Vec<u32> {
                    let mut champion: Option<&Vec<u32>> = None;
                    for _ in 0..params.tournament_size {
                        let contender = population.choose(rng).expect("nonempty");
                        if champion
                            .map(|c| fitness_of(contender) < fitness_of(c))
                            .unwrap_or(true)
                        {
                            champion = Some(contender);
                        }
                    }
                    champion.expect("tournament ran").clone()
                };
                let mut a = tournament(&mut rng);
                let mut b = tournament(&mut rng);
                if rng.random::<f64>() < params.crossover_rate {
                    for g in 0..bounds.len() {
                        if rng.random::<f64>() < 0.5 {
                            std::mem::swap(&mut a[g], &mut b[g]);
                        }
                    }
                }
                for child in [&mut a, &mut b] {
                    for (g, &bound) in bounds.iter().enumerate() {
                        if rng.random::<f64>() < params.mutation_rate {
                            child[g] = sample_gene(&mut rng, bound);
                        }
                    }
                }
                next.push(a);
                if next.len() < pop_size {
                    next.push(b);
                }
            }
            population = next;
        }

        Outcome {
            best_fitness_genes: best.expect("at least one generation").0,
            history,
            evaluations: cache,
        }
    }
}

/// GA search over the design box with the default execution mode.
pub fn optimize(
    base: &Scenario,
    params: &OptimizerParams,
) -> Result<(EvaluatedDesign, Vec<GenerationStat>)> {
    optimize_with(base, params, ExecMode::default())
}

/// GA search over the design box.
///
/// Returns the best feasible design found (or the best-fitness design,
/// flagged infeasible, if none was) and the per-generation history.
pub fn optimize_with(
    base: &Scenario,
    params: &OptimizerParams,
    mode: ExecMode,
) -> Result<(EvaluatedDesign, Vec<GenerationStat>)> {
    params.ga.validate()?;
    params
        .bounds
        .validate(base.geometry.h_constellation_km)?;

    let bounds = params.bounds.as_array();
    let outcome = ga::run(&bounds, &params.ga, mode, |genes| {
        let evaluated = evaluate_design(&DesignVector::from_genes(genes), base, params);
        (evaluated.fitness, evaluated.feasible)
    });

    // Re-evaluate the winners to recover the full records (cached solves are
    // cheap relative to the search itself).
    let best_feasible = outcome
        .evaluations
        .iter()
        .filter(|(_, &(_, feasible))| feasible)
        .min_by(|(ga_, (fa, _)), (gb, (fb, _))| {
            fa.partial_cmp(fb).unwrap().then_with(|| ga_.cmp(gb))
        })
        .map(|(genes, _)| genes.clone());
    let winner_genes = best_feasible.unwrap_or(outcome.best_fitness_genes);
    let winner = evaluate_design(&DesignVector::from_genes(&winner_genes), base, params);

    let mut running_best_fitness = f64::INFINITY;
    let history = outcome
        .history
        .into_iter()
        .map(|entry| {
            running_best_fitness = running_best_fitness.min(entry.gen_best_fitness);
            GenerationStat {
                generation: entry.generation,
                best_cost: entry.best_feasible_so_far.unwrap_or(running_best_fitness),
                feasible_count: entry.feasible_count,
                best_fitness: entry.gen_best_fitness,
            }
        })
        .collect();
    Ok((winner, history))
}

/// Direct-strategy `(q, r)` optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectBest {
    pub q: u32,
    pub r: u32,
    pub cost: CostBreakdown,
    pub shortage_c: f64,
    pub feasible: bool,
}

/// Direct-strategy search space bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectBounds {
    pub q: (u32, u32),
    pub r: (u32, u32),
}

/// Optimizes the direct strategy over the `(q, r)` box.
///
/// Exhaustive enumeration when the box holds at most 10^4 points (exactness
/// is cheap in two dimensions), the integer GA otherwise.
pub fn optimize_direct(
    base: &Scenario,
    direct: &DirectParams,
    bounds: &DirectBounds,
    epsilon_shortage: f64,
    ga: &GaParams,
    mode: ExecMode,
) -> Result<DirectBest> {
    if bounds.q.0 == 0 || bounds.q.0 > bounds.q.1 || bounds.r.0 > bounds.r.1 {
        return Err(Error::Config("invalid direct-strategy bounds".into()));
    }
    let evaluate = |q: u32, r: u32| -> (f64, Option<DirectBest>) {
        let policy = match ParkingPolicy::new(q, r) {
            Ok(p) => p,
            Err(_) => return (NONCONVERGED_FITNESS, None),
        };
        let params = DirectParams {
            policy,
            ..direct.clone()
        };
        let Ok(solution) = policy::solve_direct(base, &params) else {
            return (NONCONVERGED_FITNESS, None);
        };
        let cost = metrics::cost_breakdown_direct(&solution, base, &params);
        let shortage =
            metrics::expected_shortage(&solution.echelon.cycle, base.geometry.n_sat_nominal);
        let g1 = shortage - epsilon_shortage;
        let g3 = q as f64 * base.costs.m_sat_kg - direct.m_payload_kg;
        let feasible = g1 <= 0.0 && g3 <= 0.0;
        let fitness = cost.total + ga.penalty_weight * (g1.max(0.0) + g3.max(0.0));
        (
            fitness,
            Some(DirectBest {
                q,
                r,
                cost,
                shortage_c: shortage,
                feasible,
            }),
        )
    };

    let box_size =
        (bounds.q.1 - bounds.q.0 + 1) as u64 * (bounds.r.1 - bounds.r.0 + 1) as u64;
    let candidates: Vec<(u32, u32)> = if box_size <= 10_000 {
        (bounds.q.0..=bounds.q.1)
            .flat_map(|q| (bounds.r.0..=bounds.r.1).map(move |r| (q, r)))
            .collect()
    } else {
        let outcome = ga::run(&[bounds.q, bounds.r], ga, mode, |genes| {
            let (fitness, best) = evaluate(genes[0], genes[1]);
            (fitness, best.map(|b| b.feasible).unwrap_or(false))
        });
        outcome
            .evaluations
            .keys()
            .map(|g| (g[0], g[1]))
            .collect()
    };

    let evaluated = exec::map_indexed(candidates.len(), mode, |i| {
        let (q, r) = candidates[i];
        evaluate(q, r)
    });
    evaluated
        .into_iter()
        .filter_map(|(_, best)| best)
        .filter(|b| b.feasible)
        .min_by(|a, b| {
            a.cost
                .total
                .partial_cmp(&b.cost.total)
                .unwrap()
                .then_with(|| (a.q, a.r).cmp(&(b.q, b.r)))
        })
        .ok_or(Error::NonConvergence {
            op: "direct-strategy search (no feasible design)",
            iterations: box_size as usize,
        })
}

/// One row of the failure-rate sensitivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_per_year: f64,
    pub indirect: EvaluatedDesign,
    pub direct: DirectBest,
    /// `(C_direct - C_indirect) / C_direct`.
    pub savings_fraction: f64,
}

/// Re-optimizes both strategies across a grid of failure rates.
pub fn sweep_failure_rate(
    base: &Scenario,
    direct: &DirectParams,
    direct_bounds: &DirectBounds,
    params: &OptimizerParams,
    rates: &[f64],
    mode: ExecMode,
) -> Result<Vec<SweepRow>> {
    if rates.is_empty() {
        return Err(Error::Config("sweep needs at least one rate".into()));
    }
    if rates.iter().any(|&r| !(0.01..=0.5).contains(&r)) {
        return Err(Error::Config(
            "sweep rates must lie in [0.01, 0.5] failures/year".into(),
        ));
    }
    let mut rows = Vec::with_capacity(rates.len());
    for &rate in rates {
        let mut scenario = base.clone();
        scenario.lambda_per_year = rate;
        let (indirect, _) = optimize_with(&scenario, params, mode)?;
        let direct_best = optimize_direct(
            &scenario,
            direct,
            direct_bounds,
            params.epsilon_shortage,
            &params.ga,
            mode,
        )?;
        let indirect_cost = indirect
            .cost
            .map(|c| c.total)
            .unwrap_or(f64::INFINITY);
        let savings = (direct_best.cost.total - indirect_cost) / direct_best.cost.total;
        rows.push(SweepRow {
            lambda_per_year: rate,
            indirect,
            direct: direct_best,
            savings_fraction: savings,
        });
    }
    Ok(rows)
}
