//! K-armed bandit sufficient statistics, Hoeffding-style confidence bounds and
//! a Beta-Bernoulli posterior.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::scoring::ConfidenceBounds;

/// Per-arm pull counts and reward sums.
///
/// `horizon` only enters the confidence radius `sqrt(3 ln T / N(a))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KArmStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
    horizon: u64,
}

impl KArmStats {
    pub fn new(arms: usize, horizon: u64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::invalid("need at least one arm"));
        }
        if horizon < 2 {
            // ln 1 = 0 would give zero-width bounds.
            return Err(Error::invalid(format!("horizon must be at least 2, got {horizon}")));
        }
        Ok(KArmStats {
            counts: vec![0; arms],
            sums: vec![0.0; arms],
            horizon,
        })
    }

    /// Builds statistics directly from counts and sums.
    pub fn from_parts(counts: Vec<u64>, sums: Vec<f64>, horizon: u64) -> Result<Self> {
        if counts.len() != sums.len() {
            return Err(Error::invalid("counts and sums differ in length"));
        }
        let mut stats = KArmStats::new(counts.len(), horizon)?;
        if sums.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("non-finite reward sum"));
        }
        stats.counts = counts;
        stats.sums = sums;
        Ok(stats)
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn sum(&self, arm: usize) -> f64 {
        self.sums[arm]
    }

    pub fn with_horizon(&self, horizon: u64) -> Result<Self> {
        KArmStats::from_parts(self.counts.clone(), self.sums.clone(), horizon)
    }

    fn require_explored(&self) -> Result<()> {
        match self.counts.iter().position(|&n| n == 0) {
            Some(a) => Err(Error::Precondition(format!(
                "arm {a} has never been pulled; forced exploration must run first"
            ))),
            None => Ok(()),
        }
    }

    /// Empirical means; requires every arm pulled at least once.
    pub fn means(&self) -> Result<Vec<f64>> {
        self.require_explored()?;
        Ok(self
            .counts
            .iter()
            .zip(&self.sums)
            .map(|(&n, &s)| s / n as f64)
            .collect())
    }
}

/// Independent Beta posteriors, one per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPosterior {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaPosterior {
    /// Uniform `Beta(1, 1)` prior on every arm.
    pub fn uniform(arms: usize) -> Self {
        BetaPosterior {
            alpha: vec![1.0; arms],
            beta: vec![1.0; arms],
        }
    }

    pub fn params(&self, arm: usize) -> (f64, f64) {
        (self.alpha[arm], self.beta[arm])
    }

    pub fn means(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| a / (a + b))
            .collect()
    }

    /// One joint draw of the arm means.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| {
                // Parameters are strictly positive by construction.
                Beta::new(a, b).expect("beta parameters are positive").sample(rng)
            })
            .collect()
    }
}

/// Records one observation: `N(arm) += 1`, `sum(arm) += reward`, and the
/// fractional Beta update `α += r`, `β += 1 − r`.
pub fn karm_update(
    stats: &mut KArmStats,
    posterior: &mut BetaPosterior,
    arm: usize,
    reward: f64,
) -> Result<()> {
    if arm >= stats.arms() || arm >= posterior.alpha.len() {
        return Err(Error::invalid(format!(
            "arm {arm} out of range for {} arms",
            stats.arms()
        )));
    }
    if !(0.0..=1.0).contains(&reward) {
        return Err(Error::invalid(format!("reward {reward} outside [0, 1]")));
    }
    stats.counts[arm] += 1;
    stats.sums[arm] += reward;
    posterior.alpha[arm] += reward;
    posterior.beta[arm] += 1.0 - reward;
    Ok(())
}

/// `μ̂(a) = sum(a) / N(a)`, `radius(a) = sqrt(3 ln T / N(a))`.
pub fn karm_bounds(stats: &KArmStats) -> Result<Vec<ConfidenceBounds>> {
    let means = stats.means()?;
    let log_t = (stats.horizon as f64).ln();
    means
        .iter()
        .zip(&stats.counts)
        .map(|(&mu, &n)| ConfidenceBounds::new(mu, (3.0 * log_t / n as f64).sqrt()))
        .collect()
}

/// TS-UCB in the K-armed model: `argmin_a sqrt(N(a)) · (f̃ − μ̂(a))`.
///
/// The common `sqrt(3 ln T)` factor of every radius cancels, so the choice
/// does not depend on the horizon.
pub fn karm_score(f_tilde: f64, stats: &KArmStats) -> Result<usize> {
    if !f_tilde.is_finite() {
        return Err(Error::invalid("target value must be finite"));
    }
    let means = stats.means()?;
    let mut best = (0, f64::INFINITY);
    for (a, (&mu, &n)) in means.iter().zip(&stats.counts).enumerate() {
        let score = (n as f64).sqrt() * (f_tilde - mu);
        if score < best.1 {
            best = (a, score);
        }
    }
    Ok(best.0)
}
