//! Ridge-regression confidence sets for linear bandits.
//!
//! The state keeps `V = I + Σ x xᵀ` through a Cholesky factor maintained by
//! rank-one updates, the cross product `b = Σ y x`, and `θ̂ = V⁻¹ b`. The
//! upper confidence bound of an action `x` over the ellipsoid
//! `{ρ : ‖ρ − θ̂‖_V ≤ √β_t}` has the closed form
//! `⟨x, θ̂⟩ + √β_t ‖x‖_{V⁻¹}` with
//!
//! ```text
//! √β_t = r · sqrt(d · ln(T² (1 + t L))) + S
//! ```
//!
//! A contextual bandit with `K` arms and `d`-dimensional contexts is a linear
//! bandit in dimension `d·K` (see [`embed_contextual`]). Its Gram matrix is
//! block diagonal, which [`BlockLinearState`] exploits.

use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky};
use crate::scoring::ConfidenceBounds;

/// Updates between dense drift checks in debug builds.
const DRIFT_CHECK_PERIOD: u64 = 256;

/// Constants of the confidence radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConstants {
    /// Sub-Gaussian scale of the reward noise, at least 1.
    pub r: f64,
    /// Bound on the parameter norm.
    pub s: f64,
    /// Bound on action norms.
    pub l: f64,
    /// Horizon.
    pub horizon: f64,
}

impl LinearConstants {
    pub fn new(r: f64, s: f64, l: f64, horizon: f64) -> Result<Self> {
        let c = LinearConstants { r, s, l, horizon };
        c.validate(None)?;
        Ok(c)
    }

    fn validate(&self, dim: Option<usize>) -> Result<()> {
        if !(self.r >= 1.0) || !self.r.is_finite() {
            return Err(Error::invalid(format!("r must be finite and >= 1, got {}", self.r)));
        }
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return Err(Error::invalid(format!("S must be finite and >= 0, got {}", self.s)));
        }
        if let Some(d) = dim {
            if self.s > (d as f64).sqrt() * (1.0 + 1e-12) {
                return Err(Error::invalid(format!("S = {} exceeds sqrt(d) for d = {d}", self.s)));
            }
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::invalid(format!("L must be finite and > 0, got {}", self.l)));
        }
        if !(self.horizon > 1.0) || !self.horizon.is_finite() {
            return Err(Error::invalid(format!("horizon must exceed 1, got {}", self.horizon)));
        }
        Ok(())
    }

    fn beta_sqrt(&self, dim: usize, t: u64) -> f64 {
        let arg = self.horizon * self.horizon * (1.0 + t as f64 * self.l);
        self.r * (dim as f64 * arg.ln()).sqrt() + self.s
    }
}

/// Feature vector `X(a)` of an action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionVector(Vec<f64>);

impl ActionVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("action vector must be non-empty"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("action vector has non-finite entries"));
        }
        Ok(ActionVector(x))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm2(&self.0)
    }
}

/// Regularized least squares with `λ = 1`.
#[derive(Debug, Clone)]
struct Ridge {
    d: usize,
    chol: Cholesky,
    gram: Vec<f64>,
    b: Vec<f64>,
    theta: Vec<f64>,
    updates: u64,
}

impl Ridge {
    fn new(d: usize) -> Self {
        Ridge {
            d,
            chol: Cholesky::scaled_identity(d, 1.0),
            gram: linalg::scaled_identity(d, 1.0),
            b: vec![0.0; d],
            theta: vec![0.0; d],
            updates: 0,
        }
    }

    fn update(&mut self, x: &[f64], y: f64) {
        self.chol.rank_one_update(x);
        linalg::add_outer(&mut self.gram, x, 1.0);
        for (bi, xi) in self.b.iter_mut().zip(x) {
            *bi += y * xi;
        }
        self.theta = self.chol.solve(&self.b);
        self.updates += 1;
        if cfg!(debug_assertions) && self.updates % DRIFT_CHECK_PERIOD == 0 {
            let drift = linalg::relative_frobenius(&self.chol.reconstruct(), &self.gram);
            debug_assert!(drift < 1e-8, "Cholesky factor drifted: {drift:e}");
        }
    }

    fn mean(&self, x: &[f64]) -> f64 {
        linalg::dot(x, &self.theta)
    }

    fn inv_norm(&self, x: &[f64]) -> f64 {
        self.chol.inv_quad_form(x).sqrt()
    }
}

fn check_dim(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::invalid(format!("vector has dimension {}, expected {d}", x.len())));
    }
    Ok(())
}

fn check_finite(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("observation must be finite, got {y}")))
    }
}

/// Confidence-set state of a `d`-dimensional linear bandit.
#[derive(Debug, Clone)]
pub struct LinearState {
    ridge: Ridge,
    constants: LinearConstants,
}

impl LinearState {
    pub fn new(d: usize, constants: LinearConstants) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        constants.validate(Some(d))?;
        Ok(LinearState {
            ridge: Ridge::new(d),
            constants,
        })
    }

    pub fn dim(&self) -> usize {
        self.ridge.d
    }

    /// Number of observations applied.
    pub fn steps(&self) -> u64 {
        self.ridge.updates
    }

    pub fn constants(&self) -> &LinearConstants {
        &self.constants
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.ridge.theta
    }

    /// `b = Σ y x`.
    pub fn cross_product(&self) -> &[f64] {
        &self.ridge.b
    }

    /// Dense `V`, accumulated independently of the factor.
    pub fn gram(&self) -> &[f64] {
        &self.ridge.gram
    }

    pub fn factor(&self) -> &Cholesky {
        &self.ridge.chol
    }

    /// `‖x‖_{V⁻¹}`.
    pub fn inverse_norm(&self, x: &ActionVector) -> Result<f64> {
        check_dim(x.as_slice(), self.dim())?;
        Ok(self.ridge.inv_norm(x.as_slice()))
    }
}

/// `V += x xᵀ`, `b += y x`, `t += 1`, then `θ̂ = V⁻¹ b`.
pub fn lin_update(state: &mut LinearState, x: &ActionVector, y: f64) -> Result<()> {
    check_dim(x.as_slice(), state.dim())?;
    check_finite(y)?;
    state.ridge.update(x.as_slice(), y);
    Ok(())
}

/// `√β_t` at the current step count.
pub fn beta_sqrt(state: &LinearState) -> f64 {
    state.constants.beta_sqrt(state.dim(), state.steps())
}

/// `μ̂(a) = ⟨x_a, θ̂⟩` and `radius(a) = √β_t ‖x_a‖_{V⁻¹}` for every action.
pub fn lin_bounds(state: &LinearState, actions: &[ActionVector]) -> Result<Vec<ConfidenceBounds>> {
    if actions.is_empty() {
        return Err(Error::invalid("empty action set"));
    }
    let beta = beta_sqrt(state);
    actions
        .iter()
        .map(|x| {
            check_dim(x.as_slice(), state.dim())?;
            require_nonzero(x)?;
            ConfidenceBounds::new(state.ridge.mean(x.as_slice()), beta * state.ridge.inv_norm(x.as_slice()))
        })
        .collect()
}

fn require_nonzero(x: &ActionVector) -> Result<()> {
    if x.as_slice().iter().all(|v| *v == 0.0) {
        return Err(Error::invalid("zero action vector has no confidence width"));
    }
    Ok(())
}

/// TS-UCB over a finite action set: `argmin (f̃ − ⟨x, θ̂⟩) / ‖x‖_{V⁻¹}`.
///
/// `√β_t` multiplies every radius and cancels from the argmin.
pub fn lin_select(f_tilde: f64, state: &LinearState, actions: &[ActionVector]) -> Result<usize> {
    if !f_tilde.is_finite() {
        return Err(Error::invalid("target value must be finite"));
    }
    if actions.is_empty() {
        return Err(Error::invalid("empty action set"));
    }
    let mut best = (0, f64::INFINITY);
    for (i, x) in actions.iter().enumerate() {
        check_dim(x.as_slice(), state.dim())?;
        require_nonzero(x)?;
        let w = state.ridge.inv_norm(x.as_slice());
        if !(w > 0.0) {
            return Err(Error::invalid(format!("action {i} has zero confidence width")));
        }
        let score = (f_tilde - state.ridge.mean(x.as_slice())) / w;
        if score < best.1 {
            best = (i, score);
        }
    }
    Ok(best.0)
}

/// Maps a context to `K` action vectors of dimension `d·K`; arm `k` carries
/// the context in block `k` and zeros elsewhere.
pub fn embed_contextual(context: &[f64], arms: usize) -> Result<Vec<ActionVector>> {
    if arms == 0 {
        return Err(Error::invalid("need at least one arm"));
    }
    let d = context.len();
    (0..arms)
        .map(|k| {
            let mut x = vec![0.0; d * arms];
            x[k * d..(k + 1) * d].copy_from_slice(context);
            ActionVector::new(x)
        })
        .collect()
}

/// Confidence-set state of a `K`-arm contextual bandit, stored as one
/// `d x d` block per arm.
///
/// Equivalent to a [`LinearState`] of dimension `d·K` driven by
/// [`embed_contextual`] vectors: the embedded Gram matrix is block diagonal,
/// so `θ̂` and `‖x‖_{V⁻¹}` decompose per arm. `√β_t` uses the embedded
/// dimension and the total step count.
#[derive(Debug, Clone)]
pub struct BlockLinearState {
    blocks: Vec<Ridge>,
    d: usize,
    constants: LinearConstants,
    steps: u64,
}

impl BlockLinearState {
    pub fn new(d: usize, arms: usize, constants: LinearConstants) -> Result<Self> {
        if d == 0 || arms == 0 {
            return Err(Error::invalid("dimension and arm count must be positive"));
        }
        constants.validate(Some(d * arms))?;
        Ok(BlockLinearState {
            blocks: (0..arms).map(|_| Ridge::new(d)).collect(),
            d,
            constants,
            steps: 0,
        })
    }

    pub fn arms(&self) -> usize {
        self.blocks.len()
    }

    pub fn context_dim(&self) -> usize {
        self.d
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn theta_hat(&self, arm: usize) -> &[f64] {
        &self.blocks[arm].theta
    }

    pub fn beta_sqrt(&self) -> f64 {
        self.constants.beta_sqrt(self.d * self.blocks.len(), self.steps)
    }

    pub fn update(&mut self, arm: usize, context: &[f64], y: f64) -> Result<()> {
        check_dim(context, self.d)?;
        check_finite(y)?;
        let block = self
            .blocks
            .get_mut(arm)
            .ok_or_else(|| Error::invalid(format!("arm {arm} out of range")))?;
        block.update(context, y);
        self.steps += 1;
        Ok(())
    }

    /// Per-arm estimates `⟨θ̂_k, x⟩`.
    pub fn means(&self, context: &[f64]) -> Result<Vec<f64>> {
        check_dim(context, self.d)?;
        Ok(self.blocks.iter().map(|b| b.mean(context)).collect())
    }

    pub fn bounds(&self, context: &[f64]) -> Result<Vec<ConfidenceBounds>> {
        check_dim(context, self.d)?;
        if context.iter().all(|v| *v == 0.0) {
            return Err(Error::invalid("zero context has no confidence width"));
        }
        let beta = self.beta_sqrt();
        self.blocks
            .iter()
            .map(|b| ConfidenceBounds::new(b.mean(context), beta * b.inv_norm(context)))
            .collect()
    }
}
