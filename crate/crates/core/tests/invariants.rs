use proptest::prelude::*;

use ratio_bandits::karmed::{karm_score, KArmStats};
use ratio_bandits::linear::{
    embed_contextual, lin_select, lin_update, ActionVector, BlockLinearState, LinearConstants,
    LinearState,
};
use ratio_bandits::policies::agent::{BeliefModel, LinearContextualModel, PosteriorFamily};
use ratio_bandits::policies::{ids_stats, PosteriorSampleBatch};
use ratio_bandits::{dynamic_alpha, select_arm, ConfidenceBounds};

fn bounds_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, 0.01..3.0f64), 1..10)
}

fn to_bounds(pairs: &[(f64, f64)]) -> Vec<ConfidenceBounds> {
    pairs.iter().map(|&(m, r)| ConfidenceBounds::new(m, r).unwrap()).collect()
}

fn unit_vectors(raw: &[Vec<f64>]) -> Vec<ActionVector> {
    raw.iter()
        .map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
            ActionVector::new(v.iter().map(|x| x / n).collect()).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn selection_ignores_affine_rescaling(
        pairs in bounds_strategy(),
        f in -2.0..3.0f64,
        scale in 0.1..10.0f64,
        shift in -5.0..5.0f64,
    ) {
        let base = to_bounds(&pairs);
        let moved: Vec<_> = pairs
            .iter()
            .map(|&(m, r)| ConfidenceBounds::new(scale * m + shift, scale * r).unwrap())
            .collect();
        let a = select_arm(f, &base).unwrap();
        let b = select_arm(scale * f + shift, &moved).unwrap();
        // Rounding may break exact ties differently; the scores must still match.
        let psi = |bs: &[ConfidenceBounds], g: f64, i: usize| (g - bs[i].mu_hat()) / bs[i].radius();
        prop_assert!((psi(&base, f, a) - psi(&base, f, b)).abs() <= 1e-9 * (1.0 + psi(&base, f, a).abs()));
        let alpha = dynamic_alpha(f, &base).unwrap();
        let alpha_moved = dynamic_alpha(scale * f + shift, &moved).unwrap();
        prop_assert!((alpha - alpha_moved).abs() <= 1e-9 * (1.0 + alpha.abs()));
    }

    #[test]
    fn karm_choice_does_not_depend_on_horizon(
        arms in prop::collection::vec((1u64..50, 0.0..1.0f64), 2..8),
        f in 0.0..1.0f64,
        t1 in 10u64..100_000,
        t2 in 10u64..100_000,
    ) {
        let counts: Vec<u64> = arms.iter().map(|a| a.0).collect();
        let sums: Vec<f64> = arms.iter().map(|a| (a.1 * a.0 as f64).floor()).collect();
        let k = counts.len() as u64;
        let a = KArmStats::from_parts(counts.clone(), sums.clone(), t1.max(k)).unwrap();
        let b = KArmStats::from_parts(counts, sums, t2.max(k)).unwrap();
        prop_assert_eq!(karm_score(f, &a).unwrap(), karm_score(f, &b).unwrap());
    }

    #[test]
    fn lin_choice_does_not_depend_on_beta(
        history in prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 3), -1.0..1.0f64), 0..20),
        raw in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 1..8),
        f in -1.0..2.0f64,
        r in 1.0..4.0f64,
        s in 0.0..1.7f64,
        horizon in 10.0..1e6f64,
    ) {
        let mut a = LinearState::new(3, LinearConstants::new(1.0, 1.0, 1.0, 100.0).unwrap()).unwrap();
        let mut b = LinearState::new(3, LinearConstants::new(r, s, 1.0, horizon).unwrap()).unwrap();
        let xs: Vec<Vec<f64>> = history.iter().map(|h| h.0.clone()).collect();
        for (x, (_, y)) in unit_vectors(&xs).iter().zip(&history) {
            lin_update(&mut a, x, *y).unwrap();
            lin_update(&mut b, x, *y).unwrap();
        }
        let actions = unit_vectors(&raw);
        prop_assert_eq!(lin_select(f, &a, &actions).unwrap(), lin_select(f, &b, &actions).unwrap());
    }

    #[test]
    fn ids_stats_match_naive_loops(
        rows in prop::collection::vec(prop::collection::vec(0u8..4, 3), 2..40),
    ) {
        let data: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64 / 3.0).collect()).collect();
        let batch = PosteriorSampleBatch::from_rows(&data).unwrap();
        let got = ids_stats(&batch).unwrap();

        let n = data.len() as f64;
        let k = data[0].len();
        let star = |row: &Vec<f64>| {
            let mut best = 0;
            for a in 1..k {
                if row[a] > row[best] {
                    best = a;
                }
            }
            best
        };
        let rho: f64 = data.iter().map(|r| r[star(r)]).sum::<f64>() / n;
        for a in 0..k {
            let mean_a: f64 = data.iter().map(|r| r[a]).sum::<f64>() / n;
            prop_assert!((got.delta[a] - (rho - mean_a).max(0.0)).abs() < 1e-12);
            let mut v = 0.0;
            for s in 0..k {
                let group: Vec<&Vec<f64>> = data.iter().filter(|r| star(r) == s).collect();
                if group.is_empty() {
                    continue;
                }
                let cond: f64 = group.iter().map(|r| r[a]).sum::<f64>() / group.len() as f64;
                v += group.len() as f64 / n * (cond - mean_a).powi(2);
            }
            prop_assert!((got.v[a] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_preserves_norm_and_blocks(
        context in prop::collection::vec(-2.0..2.0f64, 1..6),
        arms in 1usize..6,
    ) {
        let d = context.len();
        let norm = context.iter().map(|x| x * x).sum::<f64>().sqrt();
        let embedded = embed_contextual(&context, arms).unwrap();
        prop_assert_eq!(embedded.len(), arms);
        for (k, x) in embedded.iter().enumerate() {
            prop_assert_eq!(x.dim(), d * arms);
            prop_assert!((x.norm() - norm).abs() < 1e-12);
            prop_assert_eq!(&x.as_slice()[k * d..(k + 1) * d], context.as_slice());
        }
    }

    #[test]
    fn block_state_matches_embedded_state(
        steps in prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 2), 0usize..3, -1.0..1.0f64), 1..25),
        probe in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let consts = LinearConstants::new(1.0, 2.0, 1.0, 500.0).unwrap();
        let mut block = BlockLinearState::new(2, 3, consts).unwrap();
        let mut flat = LinearState::new(6, consts).unwrap();
        for (ctx, arm, y) in &steps {
            block.update(*arm, ctx, *y).unwrap();
            lin_update(&mut flat, &embed_contextual(ctx, 3).unwrap()[*arm], *y).unwrap();
        }
        let from_block = block.bounds(&probe).unwrap();
        let from_flat = ratio_bandits::linear::lin_bounds(&flat, &embed_contextual(&probe, 3).unwrap()).unwrap();
        for (a, b) in from_block.iter().zip(&from_flat) {
            prop_assert!((a.mu_hat() - b.mu_hat()).abs() < 1e-9);
            prop_assert!((a.radius() - b.radius()).abs() < 1e-9 * b.radius());
        }
    }

    #[test]
    fn linear_model_bounds_are_finite(
        steps in prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 2), 0usize..3, -3.0..3.0f64), 0..15),
        nig in any::<bool>(),
    ) {
        let family = if nig { PosteriorFamily::Nig } else { PosteriorFamily::Known };
        let mut model = LinearContextualModel::new(2, 3, 0.5, 200, family).unwrap();
        for (ctx, arm, y) in &steps {
            model.observe(*arm, ctx, *y).unwrap();
        }
        for b in model.bounds(&[0.3, -0.4]).unwrap() {
            prop_assert!(b.mu_hat().is_finite() && b.radius() > 0.0 && b.radius().is_finite());
        }
    }
}
