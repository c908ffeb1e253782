//! Exact conjugate posteriors for Bayesian linear regression.
//!
//! Both posteriors keep a Cholesky factor `L` of their precision matrix. A
//! draw `μ + L⁻ᵀ z` with `z ~ N(0, I)` has covariance `L⁻ᵀ L⁻¹`, the inverse
//! precision, so samples never need an explicit matrix inverse.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky};

fn check_dim(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::invalid(format!("vector has dimension {}, expected {d}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite regressor"));
    }
    Ok(())
}

fn standard_normals<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Gaussian posterior over regression weights with known noise variance.
///
/// Precision `Λ = Λ₀ + Σ x xᵀ / σ²`, mean `μ = Λ⁻¹ (Λ₀ μ₀ + Σ x y / σ²)`.
#[derive(Debug, Clone)]
pub struct GaussianLinearPosterior {
    d: usize,
    noise_var: f64,
    precision: Vec<f64>,
    chol: Cholesky,
    rhs: Vec<f64>,
    mean: Vec<f64>,
    observations: u64,
}

impl GaussianLinearPosterior {
    pub fn new(prior_mean: Vec<f64>, prior_precision: Vec<f64>, noise_var: f64) -> Result<Self> {
        let d = prior_mean.len();
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(Error::invalid(format!("noise variance must be positive, got {noise_var}")));
        }
        let chol = Cholesky::factor(&prior_precision, d)?;
        let rhs = linalg::mat_vec(&prior_precision, &prior_mean);
        Ok(GaussianLinearPosterior {
            d,
            noise_var,
            precision: prior_precision,
            chol,
            rhs,
            mean: prior_mean,
            observations: 0,
        })
    }

    /// Prior `N(0, prior_var · I)`.
    pub fn isotropic(d: usize, prior_var: f64, noise_var: f64) -> Result<Self> {
        if !(prior_var > 0.0) {
            return Err(Error::invalid("prior variance must be positive"));
        }
        Self::new(vec![0.0; d], linalg::scaled_identity(d, 1.0 / prior_var), noise_var)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_var
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    pub fn factor(&self) -> &Cholesky {
        &self.chol
    }

    pub fn covariance(&self) -> Vec<f64> {
        self.chol.inverse()
    }

    pub fn observations(&self) -> u64 {
        self.observations
    }

    /// Posterior mean of `⟨θ, x⟩`.
    pub fn predictive_mean(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.mean, x)
    }

    /// Posterior standard deviation of `⟨θ, x⟩`.
    pub fn predictive_sd(&self, x: &[f64]) -> f64 {
        self.chol.inv_quad_form(x).sqrt()
    }
}

/// Folds in one observation `(x, y)`.
pub fn gauss_update(post: &mut GaussianLinearPosterior, x: &[f64], y: f64) -> Result<()> {
    check_dim(x, post.d)?;
    if !y.is_finite() {
        return Err(Error::invalid("non-finite response"));
    }
    let scale = 1.0 / post.noise_var.sqrt();
    let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
    post.chol.rank_one_update(&scaled);
    linalg::add_outer(&mut post.precision, x, 1.0 / post.noise_var);
    for (r, xi) in post.rhs.iter_mut().zip(x) {
        *r += xi * y / post.noise_var;
    }
    post.mean = post.chol.solve(&post.rhs);
    post.observations += 1;
    Ok(())
}

/// One posterior draw `θ̃ = μ + C z` with `C Cᵀ = Λ⁻¹`.
pub fn gauss_sample<R: Rng + ?Sized>(post: &GaussianLinearPosterior, rng: &mut R) -> Vec<f64> {
    let z = standard_normals(rng, post.d);
    let dev = post.chol.solve_upper(&z);
    post.mean.iter().zip(&dev).map(|(m, e)| m + e).collect()
}

/// Normal–Inverse-Gamma posterior for regression with unknown noise:
/// `σ² ~ IG(a, b)`, `β | σ² ~ N(μ, σ² Σ)`.
#[derive(Debug, Clone)]
pub struct NIGPosterior {
    d: usize,
    prior_mean: Vec<f64>,
    prior_precision: Vec<f64>,
    a0: f64,
    b0: f64,
    prior_quad: f64,
    precision: Vec<f64>,
    chol: Cholesky,
    rhs: Vec<f64>,
    yty: f64,
    count: u64,
    mean: Vec<f64>,
    a: f64,
    b: f64,
}

impl NIGPosterior {
    pub fn new(prior_mean: Vec<f64>, prior_precision: Vec<f64>, a0: f64, b0: f64) -> Result<Self> {
        let d = prior_mean.len();
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(a0 > 0.0 && b0 > 0.0) || !a0.is_finite() || !b0.is_finite() {
            return Err(Error::invalid(format!("inverse-gamma prior needs a0, b0 > 0 (got {a0}, {b0})")));
        }
        let chol = Cholesky::factor(&prior_precision, d)?;
        let rhs = linalg::mat_vec(&prior_precision, &prior_mean);
        let prior_quad = linalg::dot(&prior_mean, &rhs);
        Ok(NIGPosterior {
            d,
            precision: prior_precision.clone(),
            prior_mean: prior_mean.clone(),
            prior_precision,
            a0,
            b0,
            prior_quad,
            chol,
            rhs,
            yty: 0.0,
            count: 0,
            mean: prior_mean,
            a: a0,
            b: b0,
        })
    }

    /// `a₀ = b₀ = 6`, `μ₀ = 0`, `Λ₀ = 4 I`.
    pub fn default_prior(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], linalg::scaled_identity(d, 4.0), 6.0, 6.0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// `Σ⁻¹ = XᵀX + Λ₀`.
    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    /// `Σ`.
    pub fn covariance(&self) -> Vec<f64> {
        self.chol.inverse()
    }

    pub fn factor(&self) -> &Cholesky {
        &self.chol
    }

    pub fn shape(&self) -> f64 {
        self.a
    }

    pub fn scale(&self) -> f64 {
        self.b
    }

    pub fn observations(&self) -> u64 {
        self.count
    }

    pub fn prior_mean(&self) -> &[f64] {
        &self.prior_mean
    }

    pub fn prior_precision(&self) -> &[f64] {
        &self.prior_precision
    }

    pub fn predictive_mean(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.mean, x)
    }

    /// `sqrt(xᵀ Σ x)`; the sd of `⟨β, x⟩` given `σ² = 1`.
    pub fn unit_predictive_sd(&self, x: &[f64]) -> f64 {
        self.chol.inv_quad_form(x).sqrt()
    }

    /// Draws `σ̃²` as the reciprocal of a `Gamma(a, rate = b)` variate.
    pub fn sample_noise_variance<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = Gamma::new(self.a, 1.0 / self.b).expect("shape and scale are positive");
        1.0 / g.sample(rng)
    }

    fn refresh(&mut self) -> Result<()> {
        self.mean = self.chol.solve(&self.rhs);
        self.a = self.a0 + self.count as f64 / 2.0;
        // μᵀ Σ⁻¹ μ = μᵀ (Λ₀ μ₀ + Xᵀ Y)
        let fitted = linalg::dot(&self.mean, &self.rhs);
        let b = self.b0 + 0.5 * (self.yty + self.prior_quad - fitted);
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Numeric(format!("inverse-gamma scale became {b}")));
        }
        self.b = b;
        Ok(())
    }
}

/// Folds in a block of rows (`x_block` row-major, one row per entry of
/// `y_block`). Row-at-a-time and one-shot application agree.
pub fn nig_update(post: &mut NIGPosterior, x_block: &[f64], y_block: &[f64]) -> Result<()> {
    let d = post.d;
    if x_block.len() != y_block.len() * d {
        return Err(Error::invalid(format!(
            "{} regressor entries for {} responses of dimension {d}",
            x_block.len(),
            y_block.len()
        )));
    }
    if y_block.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("non-finite response"));
    }
    for row in x_block.chunks(d) {
        check_dim(row, d)?;
    }
    for (row, &y) in x_block.chunks(d).zip(y_block) {
        post.chol.rank_one_update(row);
        linalg::add_outer(&mut post.precision, row, 1.0);
        for (r, xi) in post.rhs.iter_mut().zip(row) {
            *r += xi * y;
        }
        post.yty += y * y;
        post.count += 1;
    }
    post.refresh()
}

/// Draws `(σ̃², β̃)`: `σ̃² ~ IG(a, b)`, then `β̃ = μ + σ̃ C z` with `C Cᵀ = Σ`.
pub fn nig_sample<R: Rng + ?Sized>(post: &NIGPosterior, rng: &mut R) -> (f64, Vec<f64>) {
    let sigma2 = post.sample_noise_variance(rng);
    let z = standard_normals(rng, post.d);
    let dev = post.chol.solve_upper(&z);
    let sd = sigma2.sqrt();
    let beta = post.mean.iter().zip(&dev).map(|(m, e)| m + sd * e).collect();
    (sigma2, beta)
}
