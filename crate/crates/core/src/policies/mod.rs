//! Arm-selection policies compared by the harness: Thompson sampling, TS-UCB,
//! greedy, UCB, and sample-variance information-directed sampling.
//!
//! The deciders in this module are pure functions over explicit inputs
//! (posterior draws, confidence bounds, a random stream). Stateful agents
//! that pair a decider with a belief model live in [`agent`].

pub mod agent;
mod ids;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{select_arm, ConfidenceBounds, TargetValue};

pub use ids::{ids_choose, ids_distribution, ids_stats, IdsDistribution, IdsStats};

/// Policy family. The declaration order is the canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Ts,
    Tsucb,
    Greedy,
    Ucb,
    Ids,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Ts => "ts",
            PolicyKind::Tsucb => "tsucb",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Ucb => "ucb",
            PolicyKind::Ids => "ids",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ts" => PolicyKind::Ts,
            "tsucb" => PolicyKind::Tsucb,
            "greedy" => PolicyKind::Greedy,
            "ucb" => PolicyKind::Ucb,
            "ids" => PolicyKind::Ids,
            other => return Err(Error::invalid(format!("unknown policy `{other}`"))),
        })
    }
}

pub const DEFAULT_TSUCB_SAMPLES: usize = 1;
pub const DEFAULT_IDS_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Posterior draws per step for TS-UCB.
    pub m: usize,
    /// Posterior draws per step for IDS.
    pub ids_samples: usize,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            m: DEFAULT_TSUCB_SAMPLES,
            ids_samples: DEFAULT_IDS_SAMPLES,
        }
    }

    pub fn ts() -> Self {
        Self::new(PolicyKind::Ts)
    }

    pub fn tsucb(m: usize) -> Self {
        PolicyConfig { m, ..Self::new(PolicyKind::Tsucb) }
    }

    pub fn greedy() -> Self {
        Self::new(PolicyKind::Greedy)
    }

    pub fn ucb() -> Self {
        Self::new(PolicyKind::Ucb)
    }

    pub fn ids(samples: usize) -> Self {
        PolicyConfig { ids_samples: samples, ..Self::new(PolicyKind::Ids) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::config("m", "TS-UCB needs at least one posterior sample"));
        }
        if self.ids_samples < 2 {
            return Err(Error::config("ids_samples", "IDS needs at least two posterior samples"));
        }
        Ok(())
    }

    /// Posterior draws consumed per decision; 0 for policies that draw none.
    ///
    /// Together with `kind` this identifies the policy, and it is the value
    /// written to the `m` column of result files.
    pub fn sample_count(&self) -> usize {
        match self.kind {
            PolicyKind::Ts => 1,
            PolicyKind::Tsucb => self.m,
            PolicyKind::Ids => self.ids_samples,
            PolicyKind::Greedy | PolicyKind::Ucb => 0,
        }
    }

    /// Inverse of (`kind`, [`sample_count`](Self::sample_count)).
    pub fn from_kind_and_samples(kind: PolicyKind, samples: usize) -> Result<Self> {
        let cfg = match kind {
            PolicyKind::Tsucb => Self::tsucb(samples),
            PolicyKind::Ids => Self::ids(samples),
            _ => Self::new(kind),
        };
        if cfg.sample_count() != samples {
            return Err(Error::invalid(format!(
                "policy `{}` cannot use {samples} samples",
                kind.as_str()
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical ordering key.
    pub fn sort_key(&self) -> (PolicyKind, usize) {
        (self.kind, self.sample_count())
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PolicyKind::Ts => write!(f, "TS"),
            PolicyKind::Tsucb => write!(f, "TS-UCB({})", self.m),
            PolicyKind::Greedy => write!(f, "Greedy"),
            PolicyKind::Ucb => write!(f, "UCB"),
            PolicyKind::Ids => write!(f, "IDS({})", self.ids_samples),
        }
    }
}

/// Posterior draws of the mean reward of every available action; one row per
/// draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSampleBatch {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PosteriorSampleBatch {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("sample batch needs at least one row and one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries for a {rows}x{cols} batch",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample batch has non-finite entries"));
        }
        Ok(PosteriorSampleBatch { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged sample rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols)
    }

    /// `f̃ = (1/m) Σ_i max_a row_i(a)`.
    pub fn target(&self) -> Result<TargetValue> {
        let maxima: Vec<f64> = self
            .iter_rows()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        TargetValue::from_samples(&maxima)
    }
}

/// First index of the largest value.
pub(crate) fn argmax(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::invalid("cannot choose from an empty action set"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN action value"));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Thompson sampling: the action with the best sampled mean.
pub fn ts_choose(sample_row: &[f64]) -> Result<usize> {
    argmax(sample_row)
}

/// TS-UCB: average the per-draw optimal values into `f̃`, then minimize `Ψ`.
pub fn tsucb_choose(batch: &PosteriorSampleBatch, bounds: &[ConfidenceBounds]) -> Result<usize> {
    if batch.cols() != bounds.len() {
        return Err(Error::invalid(format!(
            "sample batch has {} actions but {} bounds were given",
            batch.cols(),
            bounds.len()
        )));
    }
    select_arm(batch.target()?.value(), bounds)
}

/// The action with the highest posterior mean.
pub fn greedy_choose(posterior_means: &[f64]) -> Result<usize> {
    argmax(posterior_means)
}

/// The action with the highest upper confidence bound.
pub fn ucb_choose(bounds: &[ConfidenceBounds]) -> Result<usize> {
    let ucbs: Vec<f64> = bounds.iter().map(ConfidenceBounds::ucb).collect();
    argmax(&ucbs)
}
