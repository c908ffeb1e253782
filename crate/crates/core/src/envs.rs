//! Synthetic bandit environments and the instantaneous-regret oracle.
//!
//! Both environments are immutable after construction. All randomness after
//! the parameter draw comes from [`KeyedStreams`] addressed by `(t, arm)`
//! (rewards) or `(t, CONTEXT_LANE)` (contexts), so every potential outcome is
//! fixed by the seed regardless of the order in which it is queried.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::streams::{self, KeyedStreams, CONTEXT_LANE, PARAMETER_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    /// Bernoulli arms with means drawn uniformly from `[0, 1]`.
    Karmed,
    /// Per-arm linear rewards `⟨β_k, X_t⟩ + N(0, σ²)`, `β_k ~ N(0, I)`,
    /// `X_t ~ N(0, I/d)`.
    LinearContextual,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::Karmed => "karmed",
            EnvKind::LinearContextual => "linear_contextual",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "karmed" => Ok(EnvKind::Karmed),
            "linear_contextual" => Ok(EnvKind::LinearContextual),
            other => Err(Error::invalid(format!("unknown environment kind `{other}`"))),
        }
    }
}

/// One environment cell of an experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParams {
    pub kind: EnvKind,
    /// Context dimension; equals `arms` for the K-armed model.
    pub d: usize,
    pub arms: usize,
    /// Noise standard deviation; 0 for the K-armed model.
    pub sigma: f64,
}

impl EnvParams {
    pub fn karmed(arms: usize) -> Self {
        EnvParams { kind: EnvKind::Karmed, d: arms, arms, sigma: 0.0 }
    }

    pub fn linear_contextual(d: usize, arms: usize, sigma: f64) -> Self {
        EnvParams { kind: EnvKind::LinearContextual, d, arms, sigma }
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms < 2 {
            return Err(Error::config("K", format!("need at least 2 arms, got {}", self.arms)));
        }
        match self.kind {
            EnvKind::Karmed => {
                if self.d != self.arms || self.sigma != 0.0 {
                    return Err(Error::config("env", "K-armed cells have d = K and sigma = 0"));
                }
            }
            EnvKind::LinearContextual => {
                if self.d == 0 {
                    return Err(Error::config("d", "dimension must be positive"));
                }
                if !(self.sigma > 0.0) || !self.sigma.is_finite() {
                    return Err(Error::config("sigma", format!("must be positive, got {}", self.sigma)));
                }
            }
        }
        Ok(())
    }

    /// Hash identifying the cell in seed derivation. Excludes the horizon so
    /// that shorter runs are prefixes of longer ones.
    pub fn cell_key(&self) -> u64 {
        streams::combine(&[
            streams::fnv1a(self.kind.as_str().as_bytes()),
            self.d as u64,
            self.arms as u64,
            self.sigma.to_bits(),
        ])
    }
}

/// Bernoulli K-armed bandit.
#[derive(Debug, Clone)]
pub struct KArmEnv {
    means: Vec<f64>,
    streams: KeyedStreams,
}

impl KArmEnv {
    pub fn new(arms: usize, seed: u64) -> Self {
        let streams = KeyedStreams::new(seed);
        let mut rng = streams.at(PARAMETER_STREAM, 0);
        let means = (0..arms).map(|_| rng.random::<f64>()).collect();
        KArmEnv { means, streams }
    }

    /// Fixed arm means in `[0, 1]`.
    pub fn with_means(means: Vec<f64>, seed: u64) -> Result<Self> {
        if means.is_empty() || means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("arm means must be a non-empty list in [0, 1]"));
        }
        Ok(KArmEnv { means, streams: KeyedStreams::new(seed) })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    fn reward(&self, t: u64, arm: usize) -> f64 {
        let u: f64 = self.streams.at(t, arm as u64).random();
        if u < self.means[arm] {
            1.0
        } else {
            0.0
        }
    }
}

/// Linear contextual bandit with Gaussian noise.
#[derive(Debug, Clone)]
pub struct LinCtxEnv {
    d: usize,
    sigma: f64,
    betas: Vec<Vec<f64>>,
    streams: KeyedStreams,
}

impl LinCtxEnv {
    pub fn new(d: usize, arms: usize, sigma: f64, seed: u64) -> Self {
        let streams = KeyedStreams::new(seed);
        let mut rng = streams.at(PARAMETER_STREAM, 0);
        let betas = (0..arms)
            .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        LinCtxEnv { d, sigma, betas, streams }
    }

    pub fn parameters(&self) -> &[Vec<f64>] {
        &self.betas
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `X_t ~ N(0, I/d)`.
    pub fn context(&self, t: u64) -> Vec<f64> {
        let mut rng = self.streams.at(t, CONTEXT_LANE);
        let scale = (1.0 / self.d as f64).sqrt();
        (0..self.d)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn noise(&self, t: u64, arm: usize) -> f64 {
        self.sigma * self.streams.at(t, arm as u64).sample::<f64, _>(StandardNormal)
    }
}

#[derive(Debug, Clone)]
pub enum Environment {
    KArmed(KArmEnv),
    LinearContextual(LinCtxEnv),
}

/// What the agent sees at step `t` plus the true mean rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub t: u64,
    /// Empty for the K-armed model.
    pub context: Vec<f64>,
    pub means: Vec<f64>,
}

impl Round {
    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    /// `max_a f(a) − f(chosen)`, always ≥ 0.
    pub regret: f64,
}

/// Builds the environment of a cell; identical seeds give identical
/// parameters, contexts and noise.
pub fn env_draw(params: &EnvParams, seed: u64) -> Result<Environment> {
    params.validate()?;
    Ok(match params.kind {
        EnvKind::Karmed => Environment::KArmed(KArmEnv::new(params.arms, seed)),
        EnvKind::LinearContextual => Environment::LinearContextual(LinCtxEnv::new(
            params.d,
            params.arms,
            params.sigma,
            seed,
        )),
    })
}

impl Environment {
    pub fn arms(&self) -> usize {
        match self {
            Environment::KArmed(e) => e.means.len(),
            Environment::LinearContextual(e) => e.betas.len(),
        }
    }

    /// Context length handed to agents (0 for the K-armed model).
    pub fn context_dim(&self) -> usize {
        match self {
            Environment::KArmed(_) => 0,
            Environment::LinearContextual(e) => e.d,
        }
    }

    pub fn round(&self, t: u64) -> Round {
        match self {
            Environment::KArmed(e) => Round { t, context: Vec::new(), means: e.means.clone() },
            Environment::LinearContextual(e) => {
                let context = e.context(t);
                let means = e
                    .betas
                    .iter()
                    .map(|b| crate::linalg::dot(b, &context))
                    .collect();
                Round { t, context, means }
            }
        }
    }

    /// Reward and regret of pulling `arm` in `round`.
    pub fn step_round(&self, round: &Round, arm: usize) -> Result<StepOutcome> {
        if arm >= self.arms() {
            return Err(Error::invalid(format!("arm {arm} out of range for {} arms", self.arms())));
        }
        let mean = round.means[arm];
        let regret = round.best_mean() - mean;
        let reward = match self {
            Environment::KArmed(e) => e.reward(round.t, arm),
            Environment::LinearContextual(e) => mean + e.noise(round.t, arm),
        };
        Ok(StepOutcome { reward, regret })
    }

    pub fn step(&self, t: u64, arm: usize) -> Result<StepOutcome> {
        self.step_round(&self.round(t), arm)
    }
}
