//! Failure and launch-vehicle lead-time laws on the discrete time grid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::TransitionMatrix;
use crate::orbital::DAYS_PER_YEAR;

/// State-dependent Poisson failure law for one plane.
///
/// Only operational satellites fail; stock above the nominal count is spare
/// and immune, which caps the total rate at `n_nominal * lambda_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureModel {
    /// Failures per operational satellite per time step.
    pub lambda_step: f64,
    /// Nominal operational satellites per plane.
    pub n_nominal: u32,
}

impl FailureModel {
    /// Converts an annual per-satellite rate to the per-step rate.
    pub fn from_annual_rate(lambda_per_year: f64, tau_mc_days: f64, n_nominal: u32) -> Result<Self> {
        if lambda_per_year <= 0.0 {
            // A zero rate makes the cycle chains reducible.
            return Err(Error::Config(
                "satellite failure rate must be strictly positive".into(),
            ));
        }
        if tau_mc_days <= 0.0 {
            return Err(Error::Config("tau_mc must be positive".into()));
        }
        Ok(Self {
            lambda_step: lambda_per_year * tau_mc_days / DAYS_PER_YEAR,
            n_nominal,
        })
    }
}

/// `P(F = k | X = n)`: probability of `k` failures in one step from stock `n`.
pub fn failure_pmf(k: u32, n: u32, model: &FailureModel) -> f64 {
    if k > model.n_nominal {
        return 0.0;
    }
    let rate = model.lambda_step * n.min(model.n_nominal) as f64;
    poisson_pmf(k, rate)
}

fn poisson_pmf(k: u32, rate: f64) -> f64 {
    let mut term = (-rate).exp();
    for i in 1..=k {
        term *= rate / i as f64;
    }
    term
}

/// One-step failure transition matrix over levels `0..=n_max`.
///
/// Lower triangular in the descending-state ordering; the bottom row absorbs the residual
/// mass so that every column is a valid PMF.
pub fn failure_matrix(n_max: u32, model: &FailureModel) -> TransitionMatrix {
    let size = n_max as usize + 1;
    let mut m = DMatrix::zeros(size, size);
    for j in 0..size {
        let n = (n_max as usize - j) as u32;
        let mut absorbed = 1.0;
        // Failures that leave at least one unit: target level n - k >= 1.
        for k in 0..n {
            let p = failure_pmf(k, n, model);
            m[(j + k as usize, j)] = p;
            absorbed -= p;
        }
        // Everything else (including the k > n_nominal truncation) drops the
        // level to zero.
        m[(size - 1, j)] = absorbed.max(0.0);
    }
    TransitionMatrix::new_unchecked(m)
}

/// Shifted-exponential launch lead time quantized to the step grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadTimeModel {
    /// Mean of the exponential component, days.
    pub mu_lv_days: f64,
    /// Fixed processing delay, days (an exact multiple of `tau_mc_days`).
    pub tau_lv_days: f64,
    pub tau_mc_days: f64,
    /// Per-step geometric decay `exp(-tau_mc / mu_lv)`.
    pub alpha: f64,
    /// Fixed delay in steps, `tau_lv / tau_mc`.
    pub k_lv: u32,
}

impl LeadTimeModel {
    /// Builds the model, rounding `tau_lv` to the nearest step multiple.
    pub fn new(mu_lv_days: f64, tau_lv_days: f64, tau_mc_days: f64) -> Result<Self> {
        if mu_lv_days <= 0.0 {
            return Err(Error::Config("mu_lv must be positive".into()));
        }
        if tau_mc_days <= 0.0 {
            return Err(Error::Config("tau_mc must be positive".into()));
        }
        if tau_lv_days < 0.0 {
            return Err(Error::Config("tau_lv must be nonnegative".into()));
        }
        let k_lv = (tau_lv_days / tau_mc_days).round() as u32;
        Ok(Self {
            mu_lv_days,
            tau_lv_days: k_lv as f64 * tau_mc_days,
            tau_mc_days,
            alpha: (-tau_mc_days / mu_lv_days).exp(),
            k_lv,
        })
    }

    /// Expected lead time in steps for the quantized law.
    pub fn mean_steps(&self) -> f64 {
        self.k_lv as f64 + 1.0 / (1.0 - self.alpha)
    }
}

/// `rho_{k+1}`: probability the lead time lands between `k` and `k+1` steps.
pub fn lead_time_pmf(k: u32, model: &LeadTimeModel) -> f64 {
    if k < model.k_lv {
        return 0.0;
    }
    model.alpha.powi((k - model.k_lv) as i32) * (1.0 - model.alpha)
}

/// Survival `rho^c_l = P(lead time > l steps)`, with `rho^c_0 = 1`.
pub fn lead_time_survival(l: u32, model: &LeadTimeModel) -> f64 {
    if l <= model.k_lv {
        return 1.0;
    }
    model.alpha.powi((l - model.k_lv) as i32)
}

/// Integer decomposition of the fixed delay against the review period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadTimeGrid {
    /// Review periods fully covered by the fixed delay, `floor(k_lv / k_p)`.
    pub m_lv: u32,
    /// Steps of fixed delay left over in period `m_lv + 1`.
    pub k_left: u32,
    /// Steps remaining in that period once the delay expires.
    pub k_right: u32,
    /// Review period length in steps.
    pub k_p: u32,
}

/// Splits the fixed delay across review periods of `k_p` steps.
pub fn lead_time_grid(model: &LeadTimeModel, k_p: u32) -> LeadTimeGrid {
    assert!(k_p >= 1, "review period must be at least one step");
    let m_lv = model.k_lv / k_p;
    let k_left = model.k_lv - m_lv * k_p;
    LeadTimeGrid {
        m_lv,
        k_left,
        k_right: (m_lv + 1) * k_p - model.k_lv,
        k_p,
    }
}

#[cfg(test)]
mod tests {
    #![allow(clippy::excessive_precision)] // regression constants keep their computed digits

    use super::*;

    fn model(lambda_step: f64, n_nominal: u32) -> FailureModel {
        FailureModel {
            lambda_step,
            n_nominal,
        }
    }

    #[test]
    fn failure_pmf_branches() {
        let m = model(0.1, 5);
        // Independently evaluated: 0.2 e^{-0.2}.
        assert!((failure_pmf(1, 2, &m) - 0.16374615061559637).abs() < 1e-16);
        // Spares never fail.
        assert_eq!(failure_pmf(6, 3, &m), 0.0);
        assert_eq!(failure_pmf(6, 20, &m), 0.0);
        // Rate saturates at the nominal count.
        assert_eq!(failure_pmf(2, 9, &m), failure_pmf(2, 5, &m));
        // Tiny rate puts almost all mass at zero failures.
        assert!(failure_pmf(0, 3, &model(1e-12, 5)) > 1.0 - 1e-11);
    }

    #[test]
    fn failure_matrix_small_instance() {
        // n_max = 2, lambda = 0.1, nominal 2; column for state 2 evaluated
        // independently: [e^{-0.2}, 0.2 e^{-0.2}, 1 - 1.2 e^{-0.2}].
        let p = failure_matrix(2, &model(0.1, 2));
        let m = p.matrix();
        assert!((m[(0, 0)] - 0.81873075307798186).abs() < 1e-15);
        assert!((m[(1, 0)] - 0.16374615061559637).abs() < 1e-15);
        assert!((m[(2, 0)] - 0.01752309630642177).abs() < 1e-15);
    }

    #[test]
    fn failure_matrix_is_stochastic_and_never_raises_stock() {
        for (n_max, lam, nominal) in [(5u32, 0.3, 3u32), (12, 0.01, 12), (8, 1.5, 4), (1, 0.2, 1)]
        {
            let p = failure_matrix(n_max, &model(lam, nominal));
            assert!(p.column_sum_defect() < 1e-12);
            let m = p.matrix();
            for j in 0..m.ncols() {
                for i in 0..j {
                    assert_eq!(m[(i, j)], 0.0, "stock increase at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn lead_time_pmf_normalizes_and_shifts() {
        let m = LeadTimeModel::new(20.0, 20.0, 0.5).unwrap();
        assert_eq!(m.k_lv, 40);
        for k in 0..m.k_lv {
            assert_eq!(lead_time_pmf(k, &m), 0.0);
        }
        // Geometric tail sums to 1: finite part + closed-form remainder.
        let partial: f64 = (0..5000).map(|k| lead_time_pmf(k, &m)).sum();
        let tail = m.alpha.powi(5000 - m.k_lv as i32);
        assert!((partial + tail - 1.0).abs() < 1e-12);

        let zero_delay = LeadTimeModel::new(10.0, 0.0, 0.5).unwrap();
        assert!((lead_time_pmf(0, &zero_delay) - (1.0 - zero_delay.alpha)).abs() < 1e-16);
    }

    #[test]
    fn survival_telescopes_against_pmf() {
        let m = LeadTimeModel::new(7.0, 3.0, 0.5).unwrap();
        assert_eq!(lead_time_survival(0, &m), 1.0);
        assert_eq!(lead_time_survival(m.k_lv, &m), 1.0);
        assert!((lead_time_survival(m.k_lv + 1, &m) - m.alpha).abs() < 1e-16);
        for l in 0..200 {
            let diff = lead_time_survival(l, &m) - lead_time_survival(l + 1, &m);
            assert!((diff - lead_time_pmf(l, &m)).abs() < 1e-14, "l={l}");
        }
    }

    #[test]
    fn grid_examples() {
        // tau_lv = 20 d, tau_p = 8 d, tau_mc = 0.5 d.
        let m = LeadTimeModel::new(30.0, 20.0, 0.5).unwrap();
        let g = lead_time_grid(&m, 16);
        assert_eq!((g.m_lv, g.k_left, g.k_right), (2, 8, 8));
        assert_eq!(g.k_left + g.k_right, g.k_p);

        let zero = LeadTimeModel::new(30.0, 0.0, 0.5).unwrap();
        let g0 = lead_time_grid(&zero, 16);
        assert_eq!((g0.m_lv, g0.k_left, g0.k_right), (0, 0, 16));

        // Continuous-review grid: k_p = 1.
        let g1 = lead_time_grid(&m, 1);
        assert_eq!((g1.m_lv, g1.k_left, g1.k_right), (m.k_lv, 0, 1));
    }

    #[test]
    fn tau_lv_rounded_to_step_multiple() {
        let m = LeadTimeModel::new(10.0, 1.3, 0.5).unwrap();
        assert_eq!(m.k_lv, 3);
        assert!((m.tau_lv_days - 1.5).abs() < 1e-15);
        assert!(m.alpha > 0.0 && m.alpha < 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LeadTimeModel::new(0.0, 1.0, 0.5).is_err());
        assert!(LeadTimeModel::new(10.0, -1.0, 0.5).is_err());
        assert!(FailureModel::from_annual_rate(0.0, 0.5, 40).is_err());
    }
}
