use rand::SeedableRng;

use ratio_bandits::envs::{env_draw, EnvParams, Environment, LinCtxEnv};
use ratio_bandits::harness::{build_model, run_episode, run_one, CellSpec};
use ratio_bandits::policies::agent::{Agent, PolicyAgent};
use ratio_bandits::policies::PolicyConfig;
use ratio_bandits::streams::{env_seed, SimRng};
use ratio_bandits::Result;

#[test]
fn context_coordinates_have_variance_one_over_d() {
    let d = 10;
    let env = LinCtxEnv::new(d, 3, 1.0, 5);
    let xs: Vec<f64> = (1..=10_000u64).flat_map(|t| env.context(t)).collect();
    assert_eq!(xs.len(), 100_000);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((var * d as f64 - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn karmed_rewards_are_bernoulli_with_the_drawn_means() {
    let env = env_draw(&EnvParams::karmed(3), 17).unwrap();
    let Environment::KArmed(inner) = &env else { unreachable!() };
    let means = inner.means().to_vec();
    for (arm, &p) in means.iter().enumerate() {
        let draws: Vec<f64> = (1..=20_000).map(|t| env.step(t, arm).unwrap().reward).collect();
        assert!(draws.iter().all(|&r| r == 0.0 || r == 1.0));
        let rate = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((rate - p).abs() < 0.015, "arm {arm}: {rate} vs {p}");
    }
}

struct Logged<'a> {
    inner: PolicyAgent,
    log: &'a mut Vec<usize>,
}

impl Agent for Logged<'_> {
    fn choose(&mut self, context: &[f64], rng: &mut SimRng) -> Result<usize> {
        let arm = self.inner.choose(context, rng)?;
        self.log.push(arm);
        Ok(arm)
    }

    fn observe(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()> {
        self.inner.observe(arm, context, reward)
    }
}

#[test]
fn regret_replays_from_logged_choices() {
    let cell = CellSpec::new(EnvParams::linear_contextual(4, 5, 0.5), 150);
    for episode in 0..100u64 {
        let env = env_draw(&cell.env, 1000 + episode).unwrap();
        let mut log = Vec::new();
        let mut agent = Logged {
            inner: PolicyAgent::new(PolicyConfig::tsucb(5), build_model(&cell).unwrap()).unwrap(),
            log: &mut log,
        };
        let mut rng = SimRng::seed_from_u64(episode);
        let ep = run_episode(&env, &mut agent, cell.horizon, false, Some(1), &mut rng).unwrap();
        assert_eq!(log.len(), 150);

        let Environment::LinearContextual(inner) = &env else { unreachable!() };
        let mut replay = 0.0;
        let trace = ep.trace.unwrap();
        for (i, &arm) in log.iter().enumerate() {
            let t = i as u64 + 1;
            let x = inner.context(t);
            let means: Vec<f64> = inner
                .parameters()
                .iter()
                .map(|b| b.iter().zip(&x).map(|(p, q)| p * q).sum())
                .collect();
            let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            replay += best - means[arm];
            assert!((trace[i].cumulative_regret - replay).abs() < 1e-9);
        }
        assert!((ep.final_regret - replay).abs() < 1e-9);
    }
}

#[test]
fn policies_share_environment_draws() {
    let cell = CellSpec::new(EnvParams::linear_contextual(3, 4, 1.0), 50);
    let a = run_one(&cell, &PolicyConfig::ts(), 42, 7, None).unwrap();
    let b = run_one(&cell, &PolicyConfig::ucb(), 42, 7, None).unwrap();
    assert_eq!(a.env_seed, b.env_seed);
    assert_eq!(a.env_seed, env_seed(42, cell.env.cell_key(), 7));

    // Changing the horizon keeps the environment.
    let longer = CellSpec::new(cell.env, 80);
    assert_eq!(run_one(&longer, &PolicyConfig::ts(), 42, 7, None).unwrap().env_seed, a.env_seed);

    // The reward an arm pays at step t does not depend on what was pulled before.
    let env = env_draw(&cell.env, a.env_seed).unwrap();
    let twin = env_draw(&cell.env, a.env_seed).unwrap();
    for t in 1..=50 {
        let _ = twin.step(t + 1000, 0).unwrap();
        for arm in 0..4 {
            assert_eq!(env.step(t, arm).unwrap(), twin.step(t, arm).unwrap());
        }
    }
    assert_ne!(run_one(&cell, &PolicyConfig::ts(), 42, 8, None).unwrap().env_seed, a.env_seed);
}
