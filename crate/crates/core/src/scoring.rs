//! The TS-UCB selection rule.
//!
//! Every action carries an estimate `μ̂` and a confidence radius. Given a
//! posterior-sampled target `f̃` (an estimate of the optimal mean reward), the
//! rule plays the action minimizing
//!
//! ```text
//! Ψ(a) = (f̃ − μ̂(a)) / radius(a)
//! ```
//!
//! The numerator estimates the regret of playing `a`, and the denominator
//! rewards actions whose value is still uncertain. Numerators may be negative
//! (some estimate already exceeds `f̃`); no clamping is applied, so in that
//! regime the rule prefers the most confident action that beats the target.
//!
//! All functions here are pure; ties go to the lowest index.

use crate::error::{Error, Result};

/// Estimated mean reward and confidence half-width of a single action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBounds {
    mu_hat: f64,
    radius: f64,
}

impl ConfidenceBounds {
    /// Fails unless both values are finite and `radius > 0`.
    pub fn new(mu_hat: f64, radius: f64) -> Result<Self> {
        if !mu_hat.is_finite() || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite bounds (mu_hat = {mu_hat}, radius = {radius})"
            )));
        }
        if radius <= 0.0 {
            return Err(Error::invalid(format!(
                "confidence radius must be positive, got {radius}"
            )));
        }
        Ok(ConfidenceBounds { mu_hat, radius })
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn ucb(&self) -> f64 {
        self.mu_hat + self.radius
    }

    pub fn lcb(&self) -> f64 {
        self.mu_hat - self.radius
    }

    /// Same estimate with the radius multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.mu_hat, self.radius * c)
    }
}

/// Average of the per-sample optimal values `f̃_i` over `m` posterior draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetValue {
    f_tilde: f64,
    m: usize,
}

impl TargetValue {
    pub fn from_samples(optimal_values: &[f64]) -> Result<Self> {
        if optimal_values.is_empty() {
            return Err(Error::invalid("target needs at least one posterior sample"));
        }
        let m = optimal_values.len();
        let f_tilde = optimal_values.iter().sum::<f64>() / m as f64;
        if !f_tilde.is_finite() {
            return Err(Error::invalid("non-finite posterior sample"));
        }
        Ok(TargetValue { f_tilde, m })
    }

    pub fn value(&self) -> f64 {
        self.f_tilde
    }

    pub fn samples(&self) -> usize {
        self.m
    }
}

fn check_target(f_tilde: f64) -> Result<()> {
    if f_tilde.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("target value must be finite, got {f_tilde}")))
    }
}

/// `Ψ = (f̃ − μ̂) / radius`.
pub fn psi(f_tilde: f64, bounds: &ConfidenceBounds) -> Result<f64> {
    check_target(f_tilde)?;
    // `ConfidenceBounds::new` guarantees radius > 0.
    Ok((f_tilde - bounds.mu_hat) / bounds.radius)
}

/// Index of the action with the smallest `Ψ`.
pub fn select_arm(f_tilde: f64, bounds: &[ConfidenceBounds]) -> Result<usize> {
    argmin_psi(f_tilde, bounds).map(|(i, _)| i)
}

fn argmin_psi(f_tilde: f64, bounds: &[ConfidenceBounds]) -> Result<(usize, f64)> {
    check_target(f_tilde)?;
    if bounds.is_empty() {
        return Err(Error::invalid("cannot select from an empty action set"));
    }
    let mut best = (0, psi(f_tilde, &bounds[0])?);
    for (i, b) in bounds.iter().enumerate().skip(1) {
        let v = psi(f_tilde, b)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// `Ψ` of a randomized action: `(f̃ − E_w[μ̂]) / E_w[radius]`.
///
/// `weights` must be a probability vector (non-negative, summing to one within
/// `1e-12`) of the same length as `bounds`.
pub fn psi_randomized(f_tilde: f64, bounds: &[ConfidenceBounds], weights: &[f64]) -> Result<f64> {
    check_target(f_tilde)?;
    if bounds.is_empty() {
        return Err(Error::invalid("cannot randomize over an empty action set"));
    }
    if weights.len() != bounds.len() {
        return Err(Error::invalid(format!(
            "{} weights for {} actions",
            weights.len(),
            bounds.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("weights sum to {total}, not 1")));
    }
    let (mut mean, mut radius) = (0.0, 0.0);
    for (w, b) in weights.iter().zip(bounds) {
        mean += w * b.mu_hat;
        radius += w * b.radius;
    }
    Ok((f_tilde - mean) / radius)
}

/// The confidence multiplier `α_t` implied by the selection rule.
///
/// `α_t` is the smallest `α` for which some action has
/// `μ̂ + α · radius ≥ f̃`; it equals the minimal `Ψ`. Playing the
/// argmax of `μ̂ + α_t · radius` reproduces [`select_arm`], so TS-UCB is a UCB
/// rule whose width multiplier is re-tuned every step. Negative values mean
/// some estimate already exceeds the target.
pub fn dynamic_alpha(f_tilde: f64, bounds: &[ConfidenceBounds]) -> Result<f64> {
    argmin_psi(f_tilde, bounds).map(|(_, v)| v)
}
