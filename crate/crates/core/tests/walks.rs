use proptest::prelude::*;
use rwre::lattice_env::{site_drift, SimplexPoint, TorusEnvironment};
use rwre::rng::{stream, DOMAIN_AUX};
use rwre::stats::mean_stderr;
use rwre::walk::{hitting_time, martingale_component, simulate, simulate_path, StepTable};
use rwre::{Environment, EnvironmentTransform};
use statrs::distribution::{ChiSquared, ContinuousCDF};

mod common;

use common::dirichlet;

fn fair() -> Environment {
    TorusEnvironment::constant(1, 8, &SimplexPoint::simple(1)).unwrap()
}

#[test]
fn fair_walk_mean_increment() {
    let steps = 1_000_000;
    let traj = simulate(&fair(), &EnvironmentTransform::Identity, &[0], steps, 21);
    let mean = traj.end()[0] as f64 / steps as f64;
    assert!(
        mean.abs() <= 3.0 / (steps as f64).sqrt(),
        "mean increment {mean}"
    );
}

#[test]
fn fair_walk_exit_time_is_n_squared() {
    let n = 10usize;
    let table = StepTable::new(&fair(), &EnvironmentTransform::Identity);
    let times: Vec<f64> = (0..10_000u64)
        .map(|p| {
            hitting_time(&simulate_path(&table, &[0], 200 * n * n, 5, p), n as i64).unwrap() as f64
        })
        .collect();
    let (mean, _) = mean_stderr(&times);
    assert!(
        (mean - (n * n) as f64).abs() <= 0.05 * (n * n) as f64,
        "mean exit time {mean}"
    );
}

#[test]
fn martingale_endpoint_is_centred() {
    let env = dirichlet(2, 6, 31);
    let table = StepTable::new(&env, &EnvironmentTransform::Identity);
    let ends: Vec<Vec<f64>> = (0..10_000u64)
        .map(|p| {
            let traj = simulate_path(&table, &[0, 0], 200, 6, p);
            martingale_component(&traj, &env, &EnvironmentTransform::Identity)
                .pop()
                .unwrap()
        })
        .collect();
    for i in 0..2 {
        let xs: Vec<f64> = ends.iter().map(|u| u[i]).collect();
        let (mean, se) = mean_stderr(&xs);
        assert!(mean.abs() <= 3.0 * se, "coordinate {i}: {mean} ({se})");
    }
}

#[test]
fn martingale_increments_have_zero_conditional_mean() {
    let env = dirichlet(2, 4, 32);
    let table = StepTable::new(&env, &EnvironmentTransform::Identity);
    let mut rng = stream(32, DOMAIN_AUX, 0);
    let start = [1i64, -2];
    let drift = site_drift(env.probs_at(&start), 2);
    let incs: Vec<Vec<f64>> = (0..100_000)
        .map(|_| {
            let dir = table.draw(env.index_of(&start), &mut rng);
            let v = dir.displacement(2);
            (0..2).map(|i| v[i] as f64 - drift[i]).collect()
        })
        .collect();
    for i in 0..2 {
        let xs: Vec<f64> = incs.iter().map(|u| u[i]).collect();
        let (mean, se) = mean_stderr(&xs);
        assert!(mean.abs() <= 4.0 * se, "coordinate {i}: {mean} ({se})");
    }
}

#[test]
fn one_step_frequencies_fit_the_site() {
    let env = dirichlet(2, 3, 33);
    let site = env.index_of(&[0, 1]);
    let probs = env.site_probs(site).to_vec();
    let table = StepTable::new(&env, &EnvironmentTransform::Identity);
    let mut rng = stream(33, DOMAIN_AUX, 1);
    let draws = 100_000;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..draws {
        counts[table.draw(site, &mut rng).index()] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let p_value = ChiSquared::new((probs.len() - 1) as f64).unwrap().sf(stat);
    assert!(p_value > 0.01, "chi-square {stat}, p {p_value}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn increments_are_unit_moves(seed in 0u64..1000, d in 1usize..4, steps in 0usize..200) {
        let env = dirichlet(d, 3, seed);
        let t = [EnvironmentTransform::Identity, EnvironmentTransform::Embedding, EnvironmentTransform::Reflection]
            [(seed % 3) as usize].clone();
        let traj = simulate(&env, &t, &vec![0; d], steps, seed);
        prop_assert_eq!(traj.steps(), steps);
        for k in 0..steps {
            let (a, b) = (traj.position(k), traj.position(k + 1));
            prop_assert!(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() <= 1);
            prop_assert!(traj.increment(k).is_some());
        }
    }

    #[test]
    fn martingale_increments_are_bounded(seed in 0u64..1000) {
        let env = dirichlet(2, 3, seed);
        let traj = simulate(&env, &EnvironmentTransform::Identity, &[0, 0], 100, seed);
        let u = martingale_component(&traj, &env, &EnvironmentTransform::Identity);
        for w in u.windows(2) {
            let jump: f64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(jump <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn sampling_respects_the_table(seed in 0u64..1000, u in 0.0f64..1.0) {
        let env = dirichlet(1, 2, seed);
        let table = StepTable::new(&env, &EnvironmentTransform::Identity);
        let dir = table.sample(0, u);
        prop_assert!(env.site_probs(0)[dir.index()] > 0.0);
    }
}
