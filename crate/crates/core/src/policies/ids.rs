//! Sample-variance information-directed sampling.
//!
//! From a batch of posterior draws (rows) of per-action mean rewards:
//!
//! - `a*_j` is the argmax of row `j`, and `p̂(a*)` the empirical frequency of
//!   each action being optimal;
//! - `ρ̂* ` is the mean of the row maxima and `μ̄(a)` the column means;
//! - `delta(a) = max(ρ̂* − μ̄(a), 0)` estimates the regret of `a`;
//! - `v(a) = Σ_{a*} p̂(a*) (M(a*, a) − μ̄(a))²`, where `M(a*, a)` is the mean
//!   of column `a` over the rows whose argmax is `a*`, measures how much
//!   playing `a` reveals about the identity of the optimal action.
//!
//! The action distribution minimizes `E[delta]² / E[v]`. The minimizer is
//! supported on at most two actions, so the search runs over pairs and a
//! mixing weight.

use rand::Rng;

use super::{argmax, PosteriorSampleBatch};
use crate::error::{Error, Result};

const GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq)]
pub struct IdsStats {
    pub delta: Vec<f64>,
    pub v: Vec<f64>,
}

/// Estimates `delta` and `v` from posterior draws; needs at least two rows.
pub fn ids_stats(batch: &PosteriorSampleBatch) -> Result<IdsStats> {
    let (n, k) = (batch.rows(), batch.cols());
    if n < 2 {
        return Err(Error::invalid(format!("IDS needs at least 2 posterior samples, got {n}")));
    }
    let mut opt_count = vec![0usize; k];
    // cond_sum[a* * k + a] = Σ over rows with argmax a* of row[a]
    let mut cond_sum = vec![0.0; k * k];
    let mut col_sum = vec![0.0; k];
    let mut max_sum = 0.0;
    for row in batch.iter_rows() {
        let star = argmax(row)?;
        opt_count[star] += 1;
        max_sum += row[star];
        let acc = &mut cond_sum[star * k..(star + 1) * k];
        for ((c, s), x) in acc.iter_mut().zip(col_sum.iter_mut()).zip(row) {
            *c += x;
            *s += x;
        }
    }
    let nf = n as f64;
    let rho_star = max_sum / nf;
    let col_mean: Vec<f64> = col_sum.iter().map(|s| s / nf).collect();
    let delta = col_mean.iter().map(|m| (rho_star - m).max(0.0)).collect();
    let mut v = vec![0.0; k];
    for (star, &count) in opt_count.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let p = count as f64 / nf;
        let sums = &cond_sum[star * k..(star + 1) * k];
        for ((va, s), m) in v.iter_mut().zip(sums).zip(&col_mean) {
            let dev = s / count as f64 - m;
            *va += p * dev * dev;
        }
    }
    Ok(IdsStats { delta, v })
}

/// Two-point action distribution: play `first` with probability `q`, else
/// `second`. Point masses have `first == second` and `q == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdsDistribution {
    pub first: usize,
    pub second: usize,
    pub q: f64,
    /// Attained `E[delta]² / E[v]`.
    pub ratio: f64,
}

impl IdsDistribution {
    fn point(a: usize, ratio: f64) -> Self {
        IdsDistribution { first: a, second: a, q: 1.0, ratio }
    }

    fn normalized(self) -> Self {
        if self.q >= 1.0 {
            Self::point(self.first, self.ratio)
        } else if self.q <= 0.0 {
            Self::point(self.second, self.ratio)
        } else {
            self
        }
    }

    pub fn is_point_mass(&self) -> bool {
        self.first == self.second
    }

    /// Draws an action; consumes randomness only for a genuine mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.is_point_mass() {
            return self.first;
        }
        if rng.random::<f64>() < self.q {
            self.first
        } else {
            self.second
        }
    }
}

/// `(q Δa + (1−q) Δb)² / (q va + (1−q) vb)`.
fn mixed_ratio(q: f64, da: f64, db: f64, va: f64, vb: f64) -> f64 {
    let num = q * da + (1.0 - q) * db;
    let den = q * va + (1.0 - q) * vb;
    if num == 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num * num / den
    }
}

fn grid_min(da: f64, db: f64, va: f64, vb: f64) -> (f64, f64) {
    let mut best = (1.0, mixed_ratio(1.0, da, db, va, vb));
    for i in 0..GRID_POINTS {
        let q = i as f64 / (GRID_POINTS - 1) as f64;
        let r = mixed_ratio(q, da, db, va, vb);
        if r < best.1 {
            best = (q, r);
        }
    }
    best
}

/// Best mixing weight on `a` for the pair `(a, b)`.
///
/// The ratio is a square of an affine function over a positive affine one,
/// hence convex in `q`; its stationary point is
/// `q* = Δb / (Δa − Δb) − 2 vb / (va − vb)`.
fn pair_min(da: f64, db: f64, va: f64, vb: f64) -> (f64, f64) {
    let mut best = (1.0, mixed_ratio(1.0, da, db, va, vb));
    let at_zero = mixed_ratio(0.0, da, db, va, vb);
    if at_zero < best.1 {
        best = (0.0, at_zero);
    }
    let (dd, dv) = (da - db, va - vb);
    if dd != 0.0 && dv != 0.0 {
        let q = db / dd - 2.0 * vb / dv;
        let interior = if !q.is_finite() {
            Some(grid_min(da, db, va, vb))
        } else if q > 0.0 && q < 1.0 {
            let r = mixed_ratio(q, da, db, va, vb);
            Some(if r.is_finite() { (q, r) } else { grid_min(da, db, va, vb) })
        } else {
            None
        };
        if let Some((q, r)) = interior {
            if r < best.1 {
                best = (q, r);
            }
        }
    }
    best
}

fn validate(delta: &[f64], v: &[f64]) -> Result<()> {
    if delta.is_empty() {
        return Err(Error::invalid("IDS needs at least one action"));
    }
    if delta.len() != v.len() {
        return Err(Error::invalid(format!(
            "{} regret estimates but {} information terms",
            delta.len(),
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::invalid("information terms must be finite and non-negative"));
    }
    if delta.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::invalid("regret estimates must be finite and non-negative"));
    }
    Ok(())
}

/// Minimizes the information ratio over two-point distributions.
///
/// An action with zero estimated regret is played outright; if no action
/// carries information the least-regret action is played.
pub fn ids_distribution(delta: &[f64], v: &[f64]) -> Result<IdsDistribution> {
    validate(delta, v)?;
    if let Some(a) = delta.iter().position(|&d| d == 0.0) {
        return Ok(IdsDistribution::point(a, 0.0));
    }
    if v.iter().all(|&x| x == 0.0) {
        let mut best = 0;
        for (i, d) in delta.iter().enumerate() {
            if *d < delta[best] {
                best = i;
            }
        }
        return Ok(IdsDistribution::point(best, f64::INFINITY));
    }
    let k = delta.len();
    let mut best = IdsDistribution::point(0, mixed_ratio(1.0, delta[0], delta[0], v[0], v[0]));
    for a in 0..k {
        for b in (a + 1)..k {
            let (q, r) = pair_min(delta[a], delta[b], v[a], v[b]);
            if r < best.ratio {
                best = IdsDistribution { first: a, second: b, q, ratio: r };
            }
        }
    }
    Ok(best.normalized())
}

/// Samples an action from the ratio-minimizing distribution.
pub fn ids_choose<R: Rng + ?Sized>(delta: &[f64], v: &[f64], rng: &mut R) -> Result<usize> {
    Ok(ids_distribution(delta, v)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_rows_are_degenerate() {
        let batch = PosteriorSampleBatch::from_rows(&vec![vec![0.3, 0.7, 0.1]; 4]).unwrap();
        let s = ids_stats(&batch).unwrap();
        assert_eq!(s.delta[1], 0.0);
        assert!(s.v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_row_example() {
        let batch = PosteriorSampleBatch::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = ids_stats(&batch).unwrap();
        assert_eq!(s.delta, vec![0.5, 0.5]);
        assert_eq!(s.v, vec![0.25, 0.25]);
    }

    #[test]
    fn single_row_rejected() {
        let batch = PosteriorSampleBatch::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert!(ids_stats(&batch).is_err());
    }

    #[test]
    fn zero_regret_action_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(ids_choose(&[0.0, 0.2], &[0.0, 0.5], &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn point_mass_fixture() {
        let d = ids_distribution(&[0.1, 0.1], &[0.1, 0.4]).unwrap();
        assert!(d.is_point_mass());
        assert_eq!(d.first, 1);
        assert!((d.ratio - 0.025).abs() < 1e-15);
    }

    #[test]
    fn interior_fixture() {
        // Fine-grid (step 1e-4) oracle: q = 0.2298, ratio = 0.620345.
        let d = ids_distribution(&[1.0, 0.2], &[1.0, 0.01]).unwrap();
        assert_eq!((d.first, d.second), (0, 1));
        assert!((d.q - 0.2298).abs() < 1e-3);
        assert!((d.ratio - 0.620_345).abs() < 5e-4);
    }

    #[test]
    fn no_information_plays_least_regret() {
        let d = ids_distribution(&[0.3, 0.1, 0.2], &[0.0; 3]).unwrap();
        assert_eq!(d.first, 1);
        assert!(d.is_point_mass());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ids_distribution(&[0.1], &[-0.1]).is_err());
        assert!(ids_distribution(&[0.1, 0.2], &[0.1]).is_err());
        assert!(ids_distribution(&[], &[]).is_err());
    }

    #[test]
    fn mixture_frequency_matches_weight() {
        let d = ids_distribution(&[1.0, 0.2], &[1.0, 0.01]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let hits = (0..n).filter(|_| d.sample(&mut rng) == d.first).count();
        let freq = hits as f64 / n as f64;
        let se = (d.q * (1.0 - d.q) / n as f64).sqrt();
        assert!((freq - d.q).abs() < 4.0 * se);
    }
}
