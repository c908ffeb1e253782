use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ratio_bandits::conjugate::{gauss_sample, gauss_update, nig_sample, nig_update, GaussianLinearPosterior, NIGPosterior};

fn sample_moments(draws: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = draws.len() as f64;
    let d = draws[0].len();
    let mean: Vec<f64> = (0..d).map(|i| draws.iter().map(|x| x[i]).sum::<f64>() / n).collect();
    let mut cov = vec![0.0; d * d];
    for x in draws {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += (x[i] - mean[i]) * (x[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    (mean, cov)
}

#[test]
fn gaussian_draws_match_posterior_moments() {
    let mut post = GaussianLinearPosterior::new(vec![0.5, -0.2, 0.0], vec![2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5], 0.25).unwrap();
    for (x, y) in [([1.0, 0.2, -0.3], 0.4), ([0.1, -1.0, 0.5], -0.2), ([0.6, 0.6, 0.6], 1.1)] {
        gauss_update(&mut post, &x, y).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<Vec<f64>> = (0..200_000).map(|_| gauss_sample(&post, &mut rng)).collect();
    let (mean, cov) = sample_moments(&draws);
    let target = post.covariance();
    for (i, (got, want)) in mean.iter().zip(post.mean()).enumerate() {
        assert!((got - want).abs() < 0.01, "mean {i}");
    }
    for (got, want) in cov.iter().zip(&target) {
        assert!((got - want).abs() < 0.02 * target[0].max(target[4]).max(target[8]), "{got} vs {want}");
    }
}

#[test]
fn nig_noise_draws_have_the_inverse_gamma_mean() {
    let mut post = NIGPosterior::default_prior(2).unwrap();
    nig_update(&mut post, &[1.0, 0.0], &[1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 400_000;
    let mut s2 = 0.0;
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let (sigma2, beta) = nig_sample(&post, &mut rng);
        s2 += sigma2;
        draws.push(beta);
    }
    let mean_s2 = s2 / n as f64;
    assert!((mean_s2 - 6.4 / 5.5).abs() < 0.01, "E[sigma^2] {mean_s2}");

    // Marginal covariance of beta is E[sigma^2] * Sigma = (b/(a-1)) * diag(1/5, 1/4).
    let (mean, cov) = sample_moments(&draws);
    assert!((mean[0] - 0.2).abs() < 0.005 && mean[1].abs() < 0.005);
    let scale = 6.4 / 5.5;
    assert!((cov[0] - scale / 5.0).abs() < 0.01);
    assert!((cov[3] - scale / 4.0).abs() < 0.01);
    assert!(cov[1].abs() < 0.01);
}
