#![allow(dead_code)] // each test binary uses its own subset of these oracles

//! Independent oracles shared by the integration suites.
//!
//! Everything here evaluates the chain definitions directly (truncated
//! series, dense linear solves) without touching the closed-form paths
//! under test.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use spares_core::inplane::DemandPmf;
use spares_core::markov::StateDistribution;
use spares_core::parking::{ParkingPolicy, ThresholdProjectors};
use spares_core::stochastic::{lead_time_pmf, lead_time_survival, LeadTimeModel};

/// `sum_{j<=terms} sum_{i=1..k_p} rho_{i+j k_p} P_q P^j pi_r`, the series
/// definition of the average post-delivery distribution.
pub fn series_post_delivery(
    pi_r: &DVector<f64>,
    p_fp: &DMatrix<f64>,
    p_qp: &DMatrix<f64>,
    lead: &LeadTimeModel,
    k_p: u32,
    terms: u32,
) -> DVector<f64> {
    let mut acc = DVector::zeros(pi_r.len());
    let mut propagated = pi_r.clone();
    for j in 0..=terms {
        let weight: f64 = (1..=k_p)
            .map(|i| lead_time_pmf(i + j * k_p - 1, lead))
            .sum();
        if weight > 0.0 {
            acc += (p_qp * &propagated) * weight;
        }
        propagated = p_fp * propagated;
    }
    acc
}

/// Unnormalized lead-time average from the survival function,
/// `sum_j sum_{i<k_p} rho^c_{i+j k_p} P^j pi_r`.
pub fn series_lt_average(
    pi_r: &DVector<f64>,
    p_fp: &DMatrix<f64>,
    lead: &LeadTimeModel,
    k_p: u32,
    terms: u32,
) -> DVector<f64> {
    let mut acc = DVector::zeros(pi_r.len());
    let mut propagated = pi_r.clone();
    for j in 0..=terms {
        let weight: f64 = (0..k_p)
            .map(|i| lead_time_survival(i + j * k_p, lead))
            .sum();
        acc += &propagated * weight;
        propagated = p_fp * propagated;
    }
    acc
}

/// Unnormalized contact-conditioned IO average, `sum_j (C+ P)^j pi_q`.
pub fn series_contact_io(
    pi_q: &DVector<f64>,
    p_fp: &DMatrix<f64>,
    projectors: &ThresholdProjectors,
    terms: u32,
) -> DVector<f64> {
    let survive = &projectors.above * p_fp;
    let mut acc = DVector::zeros(pi_q.len());
    let mut term = pi_q.clone();
    for _ in 0..=terms {
        acc += &term;
        term = &survive * term;
    }
    acc
}

/// Unnormalized contact-conditioned LT average: review epochs inside the
/// fixed delay see the propagated reorder state surely; later epochs are
/// weighted by the still-outstanding probability.
pub fn series_contact_lt(
    pi_r: &DVector<f64>,
    p_fp: &DMatrix<f64>,
    lead: &LeadTimeModel,
    k_p: u32,
    terms: u32,
) -> DVector<f64> {
    let mut acc = DVector::zeros(pi_r.len());
    let mut propagated = pi_r.clone();
    for epoch in 1..=terms {
        let weight = lead_time_survival(epoch * k_p, lead);
        acc += &propagated * weight;
        propagated = p_fp * propagated;
    }
    acc
}

/// Dense stationary solve: replaces the last row of `(M - I)` with the
/// normalization constraint and solves the linear system directly.
pub fn dense_stationary(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut a = m - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("stationary system is solvable")
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A randomized small parking instance for oracle comparisons.
pub struct SmallScenario {
    pub policy: ParkingPolicy,
    pub chi: DemandPmf,
    pub lead: LeadTimeModel,
    pub k_p: u32,
}

/// Draws `q_p, r_p <= 5`, `k_p <= 20`, and lead-time parameters whose
/// geometric tail is negligible after 500 review periods.
pub fn random_small_scenario(rng: &mut ChaCha8Rng) -> SmallScenario {
    let q_p = rng.random_range(1..=5u32);
    let r_p = rng.random_range(0..=5u32);
    let k_p = rng.random_range(1..=20u32);
    let tau_mc = 0.5;
    let mu_lv = rng.random_range(1.0..=7.0f64);
    let tau_lv = rng.random_range(0..=20u32) as f64 * tau_mc;
    let lead = LeadTimeModel::new(mu_lv, tau_lv, tau_mc).unwrap();
    // 500-term truncation must be far below the comparison tolerance.
    assert!(lead.alpha.powf(500.0 * k_p as f64) < 1e-14);

    let chi = loop {
        let len = rng.random_range(2..=5usize);
        let mut weights: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..1.0f64)).collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        if weights[0] < 0.9 {
            break DemandPmf::from_values(weights).unwrap();
        }
    };
    SmallScenario {
        policy: ParkingPolicy::new(q_p, r_p).unwrap(),
        chi,
        lead,
        k_p,
    }
}

/// Random nonincreasing availability vector with `kappa_0 = 1`.
pub fn random_availability(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut kappa = vec![1.0; len];
    for j in 1..len {
        kappa[j] = kappa[j - 1] * rng.random_range(0.3..=1.0f64);
    }
    kappa
}

/// Random probability vector, highest state first.
pub fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> StateDistribution {
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..1.0f64)).collect();
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
    StateDistribution::from_vector(DVector::from_vec(v)).unwrap()
}
