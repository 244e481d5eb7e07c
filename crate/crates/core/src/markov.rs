//! Probability vectors and column-stochastic transition matrices.
//!
//! All state distributions use the same ordering convention: entry `i` holds
//! the probability of stock level `N - i`, where `N` is the highest level.
//! Matrices are column-stochastic and act on the left, `next = P * current`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Entries more negative than this are treated as genuine errors rather than
/// floating-point noise.
pub const NEGATIVE_NOISE_LIMIT: f64 = 1e-12;
/// Negative noise smaller in magnitude than [`NEGATIVE_NOISE_LIMIT`] is
/// clamped to zero before renormalizing.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Column sums of constructed transition matrices must match 1 this tightly.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-12;

/// Successive-difference tolerance for the power iteration.
pub const POWER_ITERATION_TOLERANCE: f64 = 1e-13;
/// Iteration cap for the power iteration.
pub const POWER_ITERATION_CAP: usize = 100_000;

/// Probability vector over stock levels `0..=N`.
///
/// Entry `i` is the probability of level `N - i` (highest level first).
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    probs: DVector<f64>,
}

impl StateDistribution {
    /// Uniform distribution over `n_states` levels (`N = n_states - 1`).
    pub fn uniform(n_states: usize) -> Self {
        assert!(n_states > 0);
        Self {
            probs: DVector::from_element(n_states, 1.0 / n_states as f64),
        }
    }

    /// All mass on a single stock level.
    pub fn point_mass(max_state: usize, state: usize) -> Self {
        assert!(state <= max_state);
        let mut probs = DVector::zeros(max_state + 1);
        probs[max_state - state] = 1.0;
        Self { probs }
    }

    /// Validates, clamps negative noise to zero, and renormalizes.
    pub fn from_vector(v: DVector<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        let mut probs = v;
        for p in probs.iter_mut() {
            if *p < 0.0 {
                if *p < -NEGATIVE_NOISE_LIMIT {
                    return Err(Error::InvalidDistribution(format!(
                        "entry {p} is negative beyond noise level"
                    )));
                }
                *p = 0.0;
            }
        }
        let sum = probs.sum();
        if !(sum.is_finite()) || (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "mass {sum} is not 1 within {MASS_TOLERANCE:e}"
            )));
        }
        probs /= sum;
        Ok(Self { probs })
    }

    /// Number of levels, `N + 1`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Highest stock level `N`.
    pub fn max_state(&self) -> usize {
        self.probs.len() - 1
    }

    /// `P(X = x)`.
    pub fn prob_state(&self, x: usize) -> f64 {
        assert!(x <= self.max_state());
        self.probs[self.max_state() - x]
    }

    /// Tail probability `P(X >= x)`; zero when `x` exceeds the top level.
    pub fn prob_at_least(&self, x: usize) -> f64 {
        let n = self.max_state();
        if x > n {
            return 0.0;
        }
        self.probs.iter().take(n - x + 1).sum()
    }

    /// Expected stock level `E[X]`.
    pub fn mean_level(&self) -> f64 {
        let n = self.max_state();
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (n - i) as f64 * p)
            .sum()
    }

    /// Iterates `(state, probability)` from the highest level down.
    pub fn iter_states(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.max_state();
        self.probs.iter().enumerate().map(move |(i, &p)| (n - i, p))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.probs
    }

    /// Probabilities with the highest level first.
    pub fn to_vec(&self) -> Vec<f64> {
        self.probs.iter().copied().collect()
    }
}

/// Column-stochastic square matrix acting by `next = P * current`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    m: DMatrix<f64>,
}

impl TransitionMatrix {
    /// Wraps a matrix after checking squareness, nonnegativity (up to noise),
    /// and unit column sums.
    pub fn try_new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidDistribution(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for j in 0..m.ncols() {
            let col = m.column(j);
            if let Some(bad) = col.iter().find(|&&v| v < -NEGATIVE_NOISE_LIMIT) {
                return Err(Error::InvalidDistribution(format!(
                    "column {j} has negative entry {bad}"
                )));
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "column {j} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { m })
    }

    /// Wraps a matrix whose stochasticity is guaranteed by construction.
    pub(crate) fn new_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(Self::try_new(m.clone()).is_ok());
        Self { m }
    }

    pub fn n_states(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `P * pi`.
    pub fn apply(&self, pi: &StateDistribution) -> StateDistribution {
        StateDistribution {
            probs: &self.m * pi.as_vector(),
        }
    }

    /// `P^k` by binary exponentiation.
    pub fn pow(&self, k: u64) -> TransitionMatrix {
        TransitionMatrix {
            m: mat_power(&self.m, k),
        }
    }

    /// Maximum deviation of any column sum from 1.
    pub fn column_sum_defect(&self) -> f64 {
        (0..self.m.ncols())
            .map(|j| (self.m.column(j).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `M^k` by repeated squaring.
pub fn mat_power(m: &DMatrix<f64>, k: u64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `I + M + ... + M^(k-1)` without forming each power separately.
///
/// Uses the doubling identities `S(2k) = S(k) + M^k S(k)` and
/// `S(k+1) = S(k) + M^k`.
pub fn geometric_matrix_sum(m: &DMatrix<f64>, k: u64) -> DMatrix<f64> {
    let n = m.nrows();
    if k == 0 {
        return DMatrix::zeros(n, n);
    }
    // Accumulate over the binary digits of k, tracking (S(len), M^len).
    let mut sum = DMatrix::identity(n, n); // S(1)
    let mut pow = m.clone(); // M^1
    let bits = 63 - k.leading_zeros() as u64;
    for b in (0..bits).rev() {
        // double
        sum = &sum + &pow * &sum;
        pow = &pow * &pow;
        if (k >> b) & 1 == 1 {
            sum = &sum + &pow;
            pow = &pow * m;
        }
    }
    sum
}

/// Dominant-eigenvector solve by power iteration with L1 renormalization.
///
/// Returns the stationary distribution and the iteration count. Stops when
/// the successive infinity-norm difference falls below `tol`.
pub fn stationary_distribution(
    cycle: &DMatrix<f64>,
    tol: f64,
    cap: usize,
    warm_start: Option<&DVector<f64>>,
) -> Result<(DVector<f64>, usize)> {
    let n = cycle.nrows();
    let mut v = match warm_start {
        Some(w) if w.len() == n => w.clone(),
        _ => DVector::from_element(n, 1.0 / n as f64),
    };
    let mut next = DVector::zeros(n);
    for it in 0..cap {
        next.gemv(1.0, cycle, &v, 0.0);
        let mass = next.sum();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Singular("power iteration"));
        }
        next /= mass;
        let diff = v
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if diff <= tol {
            return Ok((v, it + 1));
        }
    }
    Err(Error::NonConvergence {
        op: "power iteration",
        iterations: cap,
    })
}

/// `max_i |pi_i - (P pi)_i|` for a stationarity check.
pub fn stationarity_residual(cycle: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let mapped = cycle * pi;
    pi.iter()
        .zip(mapped.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solves `(I - scale * M) x = rhs` by LU decomposition.
pub fn solve_resolvent(
    m: &DMatrix<f64>,
    scale: f64,
    rhs: &DVector<f64>,
    context: &'static str,
) -> Result<DVector<f64>> {
    let n = m.nrows();
    let a = DMatrix::identity(n, n) - m * scale;
    a.lu().solve(rhs).ok_or(Error::Singular(context))
}

/// Dense `(I - scale * M)^{-1} B` for composing cycle maps.
pub fn solve_resolvent_matrix(
    m: &DMatrix<f64>,
    scale: f64,
    rhs: &DMatrix<f64>,
    context: &'static str,
) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let a = DMatrix::identity(n, n) - m * scale;
    let lu = a.lu();
    let mut out = rhs.clone();
    if !lu.solve_mut(&mut out) {
        return Err(Error::Singular(context));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descending_ordering_accessors() {
        // N = 3, states 3,2,1,0 with probs 0.4,0.3,0.2,0.1
        let d = StateDistribution::from_vector(DVector::from_vec(vec![0.4, 0.3, 0.2, 0.1]))
            .unwrap();
        assert_eq!(d.max_state(), 3);
        assert!((d.prob_state(3) - 0.4).abs() < 1e-15);
        assert!((d.prob_state(0) - 0.1).abs() < 1e-15);
        assert!((d.prob_at_least(2) - 0.7).abs() < 1e-15);
        assert!((d.prob_at_least(0) - 1.0).abs() < 1e-12);
        assert_eq!(d.prob_at_least(4), 0.0);
        let mean = 3.0 * 0.4 + 2.0 * 0.3 + 1.0 * 0.2;
        assert!((d.mean_level() - mean).abs() < 1e-14);
    }

    #[test]
    fn from_vector_clamps_noise_and_rejects_garbage() {
        let d = StateDistribution::from_vector(DVector::from_vec(vec![0.5, 0.5, -1e-14])).unwrap();
        assert_eq!(d.prob_state(0), 0.0);
        assert!(StateDistribution::from_vector(DVector::from_vec(vec![0.5, 0.6])).is_err());
        assert!(StateDistribution::from_vector(DVector::from_vec(vec![1.1, -0.1])).is_err());
    }

    #[test]
    fn mat_power_and_geometric_sum_agree_with_naive() {
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.0, 0.5, 0.5, 0.3, 0.0, 0.3, 0.7]);
        for k in 0..9u64 {
            let mut naive_pow = DMatrix::identity(3, 3);
            let mut naive_sum = DMatrix::zeros(3, 3);
            for _ in 0..k {
                naive_sum += &naive_pow;
                naive_pow = &naive_pow * &m;
            }
            assert!((mat_power(&m, k) - &naive_pow).abs().max() < 1e-13, "pow k={k}");
            assert!(
                (geometric_matrix_sum(&m, k) - &naive_sum).abs().max() < 1e-13,
                "sum k={k}"
            );
        }
    }

    #[test]
    fn power_iteration_matches_known_stationary() {
        // Column-stochastic 2x2 with known stationary [0.6, 0.4]:
        // P = [[0.8, 0.3], [0.2, 0.7]]
        let p = DMatrix::from_row_slice(2, 2, &[0.8, 0.3, 0.2, 0.7]);
        let (pi, _) = stationary_distribution(&p, 1e-14, 100_000, None).unwrap();
        assert!((pi[0] - 0.6).abs() < 1e-12);
        assert!((pi[1] - 0.4).abs() < 1e-12);
        assert!(stationarity_residual(&p, &pi) < 1e-12);
    }

    #[test]
    fn resolvent_solve_matches_series() {
        let m = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.2, 0.3]);
        let rhs = DVector::from_vec(vec![1.0, 2.0]);
        let x = solve_resolvent(&m, 0.9, &rhs, "test").unwrap();
        let mut series = DVector::zeros(2);
        let mut term = rhs.clone();
        for _ in 0..400 {
            series += &term;
            term = &m * &term * 0.9;
        }
        assert!((x - series).abs().max() < 1e-10);
    }
}
