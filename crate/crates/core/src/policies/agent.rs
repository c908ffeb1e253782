//! Stateful agents: a belief model plus one of the deciders.
//!
//! A [`BeliefModel`] owns everything a policy may ask about the current
//! round: posterior draws of each action's mean reward, posterior means, and
//! frequentist confidence bounds. Draws are only ever needed at the current
//! context, so the linear models sample the scalar `⟨β̃_k, x⟩` directly from
//! its exact marginal instead of drawing the full parameter vector.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    greedy_choose, ids_choose, ids_stats, ts_choose, tsucb_choose, ucb_choose, PolicyConfig,
    PolicyKind, PosteriorSampleBatch,
};
use crate::conjugate::{gauss_update, nig_update, GaussianLinearPosterior, NIGPosterior};
use crate::error::{Error, Result};
use crate::karmed::{karm_bounds, karm_update, BetaPosterior, KArmStats};
use crate::linear::{BlockLinearState, LinearConstants};
use crate::scoring::ConfidenceBounds;
use crate::streams::SimRng;

/// Maps a raw context to the features the linear model regresses on.
///
/// This is the hook for learned representations (e.g. the last layer of a
/// network); the harness uses [`IdentityFeatures`].
pub trait FeatureMap: Send {
    fn output_dim(&self) -> usize;
    fn map(&self, context: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityFeatures(pub usize);

impl FeatureMap for IdentityFeatures {
    fn output_dim(&self) -> usize {
        self.0
    }

    fn map(&self, context: &[f64]) -> Vec<f64> {
        context.to_vec()
    }
}

/// Posterior family used by Bayesian policies on linear-contextual problems.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorFamily {
    /// Gaussian prior `N(0, I)` with the true noise variance known.
    #[default]
    Known,
    /// Normal–Inverse-Gamma with `a₀ = b₀ = 6`, `μ₀ = 0`, `Λ₀ = 4I`.
    Nig,
}

pub trait BeliefModel: Send {
    fn arms(&self) -> usize;

    /// `rows` independent posterior draws of every action's mean reward.
    fn sample_batch(&self, context: &[f64], rows: usize, rng: &mut SimRng) -> Result<PosteriorSampleBatch>;

    fn posterior_means(&self, context: &[f64]) -> Result<Vec<f64>>;

    fn bounds(&self, context: &[f64]) -> Result<Vec<ConfidenceBounds>>;

    fn observe(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()>;
}

/// Beta-Bernoulli posterior plus empirical-mean confidence bounds.
#[derive(Debug, Clone)]
pub struct KArmedModel {
    stats: KArmStats,
    posterior: BetaPosterior,
}

impl KArmedModel {
    pub fn new(arms: usize, horizon: u64) -> Result<Self> {
        Ok(KArmedModel {
            stats: KArmStats::new(arms, horizon)?,
            posterior: BetaPosterior::uniform(arms),
        })
    }

    pub fn stats(&self) -> &KArmStats {
        &self.stats
    }

    pub fn posterior(&self) -> &BetaPosterior {
        &self.posterior
    }
}

impl BeliefModel for KArmedModel {
    fn arms(&self) -> usize {
        self.stats.arms()
    }

    fn sample_batch(&self, _context: &[f64], rows: usize, rng: &mut SimRng) -> Result<PosteriorSampleBatch> {
        let k = self.arms();
        let dists: Vec<Beta<f64>> = (0..k)
            .map(|a| {
                let (al, be) = self.posterior.params(a);
                Beta::new(al, be).map_err(|e| Error::Numeric(e.to_string()))
            })
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(rows * k);
        for _ in 0..rows {
            data.extend(dists.iter().map(|d| d.sample(rng)));
        }
        PosteriorSampleBatch::new(rows, k, data)
    }

    fn posterior_means(&self, _context: &[f64]) -> Result<Vec<f64>> {
        Ok(self.posterior.means())
    }

    fn bounds(&self, _context: &[f64]) -> Result<Vec<ConfidenceBounds>> {
        karm_bounds(&self.stats)
    }

    fn observe(&mut self, arm: usize, _context: &[f64], reward: f64) -> Result<()> {
        karm_update(&mut self.stats, &mut self.posterior, arm, reward)
    }
}

#[derive(Debug, Clone)]
enum ArmPosteriors {
    Known(Vec<GaussianLinearPosterior>),
    Nig(Vec<NIGPosterior>),
}

/// Where linear-contextual confidence bounds come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsSource {
    /// `μ̂ = ⟨x, posterior mean⟩`, `radius = sqrt(β_t) · sd(⟨β, x⟩ | H_t)`;
    /// for the NIG family the noise variance is its posterior mean.
    #[default]
    Posterior,
    /// Ridge estimate with `λ = 1`: `μ̂ = ⟨x, θ̂⟩`,
    /// `radius = sqrt(β_t) · ‖x‖_{V⁻¹}`. Agrees with `Posterior` when the
    /// prior is `N(0, I)` and `σ = 1`.
    Ridge,
}

/// Per-arm conjugate posteriors plus the ridge confidence sets of the
/// embedded `d·K`-dimensional linear bandit.
pub struct LinearContextualModel {
    features: Box<dyn FeatureMap>,
    confidence: BlockLinearState,
    posteriors: ArmPosteriors,
    source: BoundsSource,
}

impl LinearContextualModel {
    /// Confidence-set constants: `r = max(1, σ)`, `S = sqrt(d·K)`, `L = 1`.
    pub fn new(
        d: usize,
        arms: usize,
        noise_sd: f64,
        horizon: u64,
        family: PosteriorFamily,
    ) -> Result<Self> {
        Self::with_features(Box::new(IdentityFeatures(d)), arms, noise_sd, horizon, family)
    }

    pub fn with_features(
        features: Box<dyn FeatureMap>,
        arms: usize,
        noise_sd: f64,
        horizon: u64,
        family: PosteriorFamily,
    ) -> Result<Self> {
        let d = features.output_dim();
        if !(noise_sd > 0.0) {
            return Err(Error::invalid("noise standard deviation must be positive"));
        }
        let constants = LinearConstants::new(
            noise_sd.max(1.0),
            ((d * arms) as f64).sqrt(),
            1.0,
            horizon as f64,
        )?;
        let confidence = BlockLinearState::new(d, arms, constants)?;
        let posteriors = match family {
            PosteriorFamily::Known => ArmPosteriors::Known(
                (0..arms)
                    .map(|_| GaussianLinearPosterior::isotropic(d, 1.0, noise_sd * noise_sd))
                    .collect::<Result<_>>()?,
            ),
            PosteriorFamily::Nig => ArmPosteriors::Nig(
                (0..arms).map(|_| NIGPosterior::default_prior(d)).collect::<Result<_>>()?,
            ),
        };
        Ok(LinearContextualModel { features, confidence, posteriors, source: BoundsSource::Posterior })
    }

    pub fn with_bounds(mut self, source: BoundsSource) -> Self {
        self.source = source;
        self
    }

    pub fn confidence(&self) -> &BlockLinearState {
        &self.confidence
    }
}

impl BeliefModel for LinearContextualModel {
    fn arms(&self) -> usize {
        self.confidence.arms()
    }

    fn sample_batch(&self, context: &[f64], rows: usize, rng: &mut SimRng) -> Result<PosteriorSampleBatch> {
        let x = self.features.map(context);
        let k = self.arms();
        let mut data = Vec::with_capacity(rows * k);
        match &self.posteriors {
            ArmPosteriors::Known(posts) => {
                let moments: Vec<(f64, f64)> = posts
                    .iter()
                    .map(|p| (p.predictive_mean(&x), p.predictive_sd(&x)))
                    .collect();
                for _ in 0..rows {
                    data.extend(moments.iter().map(|&(m, s)| {
                        let z: f64 = rng.sample(StandardNormal);
                        m + s * z
                    }));
                }
            }
            ArmPosteriors::Nig(posts) => {
                let parts: Vec<(f64, f64, Gamma<f64>)> = posts
                    .iter()
                    .map(|p| {
                        let g = Gamma::new(p.shape(), 1.0 / p.scale())
                            .map_err(|e| Error::Numeric(e.to_string()))?;
                        Ok((p.predictive_mean(&x), p.unit_predictive_sd(&x), g))
                    })
                    .collect::<Result<_>>()?;
                for _ in 0..rows {
                    for (m, s, g) in &parts {
                        let noise_var = 1.0 / g.sample(rng);
                        let z: f64 = rng.sample(StandardNormal);
                        data.push(m + noise_var.sqrt() * s * z);
                    }
                }
            }
        }
        PosteriorSampleBatch::new(rows, k, data)
    }

    fn posterior_means(&self, context: &[f64]) -> Result<Vec<f64>> {
        let x = self.features.map(context);
        Ok(match &self.posteriors {
            ArmPosteriors::Known(p) => p.iter().map(|p| p.predictive_mean(&x)).collect(),
            ArmPosteriors::Nig(p) => p.iter().map(|p| p.predictive_mean(&x)).collect(),
        })
    }

    fn bounds(&self, context: &[f64]) -> Result<Vec<ConfidenceBounds>> {
        let x = self.features.map(context);
        if self.source == BoundsSource::Ridge {
            return self.confidence.bounds(&x);
        }
        let beta = self.confidence.beta_sqrt();
        let moments: Vec<(f64, f64)> = match &self.posteriors {
            ArmPosteriors::Known(p) => p.iter().map(|p| (p.predictive_mean(&x), p.predictive_sd(&x))).collect(),
            ArmPosteriors::Nig(p) => p
                .iter()
                .map(|p| {
                    let noise_var = p.scale() / (p.shape() - 1.0);
                    (p.predictive_mean(&x), noise_var.sqrt() * p.unit_predictive_sd(&x))
                })
                .collect(),
        };
        moments
            .into_iter()
            .map(|(m, sd)| {
                if sd > 0.0 {
                    ConfidenceBounds::new(m, beta * sd)
                } else {
                    Err(Error::invalid("context has zero posterior spread"))
                }
            })
            .collect()
    }

    fn observe(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()> {
        let x = self.features.map(context);
        self.confidence.update(arm, &x, reward)?;
        match &mut self.posteriors {
            ArmPosteriors::Known(p) => gauss_update(&mut p[arm], &x, reward),
            ArmPosteriors::Nig(p) => nig_update(&mut p[arm], &x, &[reward]),
        }
    }
}

/// Uniform decision interface used by the harness.
pub trait Agent {
    fn choose(&mut self, context: &[f64], rng: &mut SimRng) -> Result<usize>;
    fn observe(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()>;
}

/// A policy driving a belief model.
pub struct PolicyAgent {
    policy: PolicyConfig,
    model: Box<dyn BeliefModel>,
}

impl PolicyAgent {
    pub fn new(policy: PolicyConfig, model: Box<dyn BeliefModel>) -> Result<Self> {
        policy.validate()?;
        Ok(PolicyAgent { policy, model })
    }

    pub fn policy(&self) -> &PolicyConfig {
        &self.policy
    }

    pub fn model(&self) -> &dyn BeliefModel {
        self.model.as_ref()
    }
}

impl Agent for PolicyAgent {
    fn choose(&mut self, context: &[f64], rng: &mut SimRng) -> Result<usize> {
        let model = self.model.as_ref();
        match self.policy.kind {
            PolicyKind::Ts => ts_choose(model.sample_batch(context, 1, rng)?.row(0)),
            PolicyKind::Tsucb => {
                let batch = model.sample_batch(context, self.policy.m, rng)?;
                tsucb_choose(&batch, &model.bounds(context)?)
            }
            PolicyKind::Greedy => greedy_choose(&model.posterior_means(context)?),
            PolicyKind::Ucb => ucb_choose(&model.bounds(context)?),
            PolicyKind::Ids => {
                let batch = model.sample_batch(context, self.policy.ids_samples, rng)?;
                let stats = ids_stats(&batch)?;
                ids_choose(&stats.delta, &stats.v, rng)
            }
        }
    }

    fn observe(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()> {
        self.model.observe(arm, context, reward)
    }
}
