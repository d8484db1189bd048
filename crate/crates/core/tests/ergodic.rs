use rwre::ergodic::{
    annealed_velocity, clt_check, coupled_drift_average, kernel_identity_checks, step_covariance,
    velocity_estimate, CltStart,
};
use rwre::lattice_env::{DirectionPermutation, SimplexPoint, TorusEnvironment};
use rwre::torus_spectral::{build_kernel, invariant_density};
use rwre::walk::{simulate_coupled, GammaSource};
use rwre::{Environment, EnvironmentTransform};

mod common;

use common::{balanced, dirichlet};

#[test]
fn coordinate_swap_identities() {
    let swap = DirectionPermutation::new(vec![1, 0], vec![1, 1]).unwrap();
    for seed in 0..10u64 {
        let env = dirichlet(2, 3, seed);
        for gamma in [false, true] {
            let r = kernel_identity_checks(&env, gamma, &swap).unwrap();
            assert!(
                r.pass && r.switch_reflection_error == 0.0 && r.permuted_kernel_error == 0.0,
                "{r:?}"
            );
        }
    }
}

#[test]
fn annealed_velocity_is_the_time_average_drift() {
    let env = dirichlet(1, 8, 14);
    let phi =
        invariant_density(&build_kernel(&env, &EnvironmentTransform::Embedding), 1e-12).unwrap();
    let v = annealed_velocity(&env, &phi).unwrap();
    let avg = coupled_drift_average(&env, &phi, 200_000, 32, 15).unwrap();
    assert!(avg.max_z(&v) <= 3.0, "{v:?} vs {avg:?}");
}

#[test]
fn coupled_walk_moves_like_the_embedded_walk() {
    // the switch-averaged kernel is balanced, so the coupled walk has no velocity
    let env = dirichlet(1, 8, 16);
    let paths = 64u64;
    let ends: Vec<f64> = (0..paths)
        .map(|p| {
            let traj = simulate_coupled(
                &env,
                &[0],
                50_000,
                100 + p,
                &GammaSource::Bernoulli { seed: 200 + p },
            );
            traj.end()[0] as f64 / 50_000.0
        })
        .collect();
    let (mean, se) = rwre::stats::mean_stderr(&ends);
    assert!(mean.abs() <= 4.0 * se, "{mean} ({se})");
}

#[test]
fn balanced_velocity_vanishes_at_several_sizes() {
    for n in [4usize, 8] {
        let env = balanced(2, n, n as u64);
        let v = velocity_estimate(&env, &EnvironmentTransform::Identity, 20_000, 64, 3).unwrap();
        assert!(v.max_z(&[0.0, 0.0]) <= 4.0);
    }
}

#[test]
fn balanced_clt_diagonal_is_twice_the_move_rate() {
    let env = balanced(2, 6, 21);
    let r = clt_check(
        &env,
        &EnvironmentTransform::Identity,
        2_000,
        10_000,
        22,
        CltStart::Origin,
    )
    .unwrap();
    for i in 0..2 {
        assert!(
            (r.empirical[i][i] - r.reference[i][i]).abs() <= 0.05 * r.reference[i][i],
            "{r:?}"
        );
    }
    // the reference is an average of per-site diag(2 p_i)
    let site = SimplexPoint::new(env.site_probs(0).to_vec()).unwrap();
    let s = step_covariance(&site);
    assert!((s[0][0] - 2.0 * site.probs()[1]).abs() < 1e-15);
    assert_eq!(s[0][1], 0.0);
}

#[test]
fn clt_from_the_origin_and_from_the_density() {
    let env = balanced(1, 8, 23);
    let phi =
        invariant_density(&build_kernel(&env, &EnvironmentTransform::Identity), 1e-12).unwrap();
    let a = clt_check(
        &env,
        &EnvironmentTransform::Identity,
        2_000,
        5_000,
        24,
        CltStart::Origin,
    )
    .unwrap();
    let b = clt_check(
        &env,
        &EnvironmentTransform::Identity,
        2_000,
        5_000,
        25,
        CltStart::Density(&phi),
    )
    .unwrap();
    assert!(a.frobenius_rel_error < 0.06 && b.frobenius_rel_error < 0.06);
    assert!(a.min_ks_p() > 0.001 && b.min_ks_p() > 0.001);
}

#[test]
fn constant_env_reports() {
    let p = SimplexPoint::new(vec![0.0, 0.5, 0.2, 0.2, 0.1]).unwrap();
    let env: Environment = TorusEnvironment::constant(2, 3, &p).unwrap();
    let v = velocity_estimate(&env, &EnvironmentTransform::Identity, 10_000, 32, 1).unwrap();
    assert!(v.max_z(&[0.3, 0.1]) <= 4.0);
}
