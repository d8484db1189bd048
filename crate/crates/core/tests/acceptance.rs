//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and then
//! asserts the same verdict.

use std::time::Instant;

use rand::Rng;
use rwre::env_laws::{sample_environment, LawKind, LawSpec};
use rwre::ergodic::{
    annealed_velocity, clt_check, coupled_drift_average, coupling_distribution_test,
    permutation_identity_errors, pushed_density_residual, switch_reflection_error,
    velocity_estimate, CltStart, IDENTITY_TOL, PUSHED_DENSITY_TOL,
};
use rwre::lattice_env::{DirectionPermutation, SimplexPoint, TorusEnvironment};
use rwre::monge_ampere::{
    occupation_functional, verify_occupation_bound, L1Ball, MaProblem, SolverOptions, SourceTerm,
    SweepOrder,
};
use rwre::resolvent::{
    exit_probability_diagnostic, exit_radius_factor, resolvent_direct, resolvent_series,
    verify_resolvent_bound,
};
use rwre::rng::{child_seed, stream, DOMAIN_AUX};
use rwre::torus_spectral::{
    build_kernel, density_norm_bound, invariant_density, invariant_density_direct,
};
use rwre::walk::{hitting_time, simulate_path, StepTable};
use rwre::{Environment, EnvironmentTransform};

mod common;

use common::{balanced, dirichlet, oracle_2d, uniform_source};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {id:>2} {name:<28} {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn c01_monge_ampere_closed_form() {
    let p = SimplexPoint::new(vec![0.2, 0.4, 0.4]).unwrap();
    let mut worst_err: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    for n in [2usize, 8, 32] {
        let env = TorusEnvironment::constant(1, n + 1, &p).unwrap();
        let ball = L1Ball::new(1, n).unwrap();
        // c = 0.4 at every site, so f = c makes f/c = 1
        let f = SourceTerm::from_interior(&ball, |_| 0.4).unwrap();
        let started = Instant::now();
        let problem = MaProblem::new(&ball, &env, &EnvironmentTransform::Identity, &f).unwrap();
        let z = problem.solve(&SolverOptions::new(1e-11)).unwrap().grid;
        worst_time = worst_time.max(started.elapsed().as_secs_f64());
        for x in ball.points() {
            let exact = ((n * n) as f64 - (x[0] * x[0]) as f64) / 2.0;
            worst_err = worst_err.max((z.get(x) - exact).abs());
        }
    }
    verdict(
        1,
        "monge-ampere closed form",
        worst_err <= 1e-8 && worst_time < 1.0,
        format!("max |z - (n^2-x^2)/2| = {worst_err:.2e}, slowest solve {worst_time:.3}s"),
    );
}

#[test]
fn c02_sweep_order_uniqueness() {
    let (n, tol) = (5usize, 1e-9);
    let ball = L1Ball::new(2, n).unwrap();
    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let seed = child_seed(2, trial);
        let env = balanced(2, n + 1, seed);
        let problem = MaProblem::new(
            &ball,
            &env,
            &EnvironmentTransform::Identity,
            &uniform_source(&ball, seed),
        )
        .unwrap();
        let opts = SolverOptions::new(tol);
        let forward = problem.solve(&opts).unwrap().grid;
        let backward = problem
            .solve(&opts.with_order(SweepOrder::Backward))
            .unwrap()
            .grid;
        let random = problem
            .solve(&opts.with_order(SweepOrder::Random { seed }))
            .unwrap()
            .grid;
        let oracle = oracle_2d(&problem, tol / 10.0, seed);
        for other in [&backward, &random, &oracle] {
            worst = worst.max(forward.max_abs_diff(other));
        }
    }
    verdict(
        2,
        "sweep-order uniqueness",
        worst <= 1e-6,
        format!("max pairwise l_inf gap over 20 envs = {worst:.2e}"),
    );
}

#[test]
fn c03_occupation_bound_chain() {
    let tol = 1e-8;
    let ball6 = L1Ball::new(2, 6).unwrap();
    let mut ordered = 0;
    for trial in 0..50u64 {
        let seed = child_seed(3, trial);
        let env = balanced(2, 7, seed);
        let r = verify_occupation_bound(
            &ball6,
            &env,
            &EnvironmentTransform::Identity,
            &uniform_source(&ball6, seed),
            tol,
        )
        .unwrap();
        ordered += r.ordered as usize;
    }
    let mut means = Vec::new();
    for n in [4usize, 8, 16] {
        let ball = L1Ball::new(2, n).unwrap();
        let ratios: Vec<f64> = (0..10u64)
            .map(|trial| {
                let seed = child_seed(30 + n as u64, trial);
                let env = balanced(2, n + 1, seed);
                verify_occupation_bound(
                    &ball,
                    &env,
                    &EnvironmentTransform::Identity,
                    &uniform_source(&ball, seed),
                    tol,
                )
                .unwrap()
                .z_ratio
            })
            .collect();
        means.push(ratios.iter().sum::<f64>() / ratios.len() as f64);
    }
    let spread = means.iter().copied().fold(0.0, f64::max)
        / means.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        3,
        "occupation <= concave bound",
        ordered == 50 && spread < 2.0,
        format!(
            "ordered in {ordered}/50; mean z-ratio at n=4,8,16 = {means:.4?}, spread {spread:.3}"
        ),
    );
}

#[test]
fn c04_occupation_oracle() {
    let n = 10usize;
    let ball = L1Ball::new(1, n).unwrap();
    let env = TorusEnvironment::constant(1, n + 1, &SimplexPoint::simple(1)).unwrap();
    let f = SourceTerm::from_interior(&ball, |_| 1.0).unwrap();
    let q = occupation_functional(&ball, &env, &EnvironmentTransform::Identity, &f).unwrap();
    let exact_err = ball
        .points()
        .iter()
        .map(|x| (q.get(x) - ((n * n) as i64 - x[0] * x[0]) as f64).abs())
        .fold(0.0, f64::max);
    // occupation of the interior before exit = exit time
    let start = [3i64];
    let table = StepTable::new(&env, &EnvironmentTransform::Identity);
    let samples: Vec<f64> = (0..10_000u64)
        .map(|p| {
            let traj = simulate_path(&table, &start, 200 * n * n, 4, p);
            hitting_time(&traj, n as i64).expect("walk leaves the ball") as f64
        })
        .collect();
    let (mean, se) = rwre::stats::mean_stderr(&samples);
    let z = (mean - q.get(&start)).abs() / se;
    verdict(
        4,
        "occupation oracle",
        exact_err <= 1e-10 && z <= 3.0,
        format!(
            "max |Qf - (n^2-x^2)| = {exact_err:.2e}; MC {mean:.3} vs {} ({z:.2} se)",
            q.get(&start)
        ),
    );
}

#[test]
fn c05_resolvent() {
    let mut agreement: f64 = 0.0;
    for trial in 0..20u64 {
        let seed = child_seed(5, trial);
        let d = 1 + (trial % 2) as usize;
        let env = dirichlet(d, 4, seed);
        let t = if trial % 3 == 0 {
            EnvironmentTransform::Embedding
        } else {
            EnvironmentTransform::Identity
        };
        let mut rng = stream(seed, DOMAIN_AUX, 0);
        let g: Vec<f64> = (0..env.num_sites()).map(|_| rng.random::<f64>()).collect();
        let direct = resolvent_direct(&env, &t, &g).unwrap();
        let series = resolvent_series(&env, &t, &g, 1e-10).unwrap();
        for (a, b) in direct.values.iter().zip(&series.values) {
            agreement = agreement.max((a - b).abs());
        }
    }
    let env = dirichlet(2, 6, 55);
    let ones = vec![1.0; env.num_sites()];
    let r1 = resolvent_direct(&env, &EnvironmentTransform::Identity, &ones).unwrap();
    let ones_err = r1
        .values
        .iter()
        .map(|v| (v - 36.0).abs())
        .fold(0.0, f64::max);
    let law: LawSpec<f64> = LawSpec::new(LawKind::ControlledTail { kappa: 4.0 }, 2, 4, 505);
    let report =
        verify_resolvent_bound(&law, &EnvironmentTransform::Identity, &[4, 8, 16], 50).unwrap();
    verdict(
        5,
        "resolvent",
        agreement <= 1e-8 && ones_err <= 1e-8 && report.bounded,
        format!(
            "series/direct gap {agreement:.2e}; |R1 - n^2| {ones_err:.2e}; ratio maxima {:.4?}, growth {:.3?}",
            report.maxima, report.growth
        ),
    );
}

#[test]
fn c06_invariant_density() {
    let mut worst_residual: f64 = 0.0;
    // two-state chain
    let two =
        TorusEnvironment::from_rows(1, 1, vec![vec![0.2, 0.4, 0.4], vec![0.8, 0.1, 0.1]]).unwrap();
    let phi =
        invariant_density_direct(&build_kernel(&two, &EnvironmentTransform::Identity)).unwrap();
    worst_residual = worst_residual.max(phi.residual);
    let two_err = (phi.weight(0) - 0.2).abs().max((phi.weight(1) - 0.8).abs());
    // balanced d = 1: phi(x) proportional to 1/p(x)
    let mut closed_err: f64 = 0.0;
    for seed in 0..5u64 {
        let env = balanced(1, 8, 600 + seed);
        let phi =
            invariant_density(&build_kernel(&env, &EnvironmentTransform::Identity), 1e-10).unwrap();
        worst_residual = worst_residual.max(phi.residual);
        let inv: Vec<f64> = env.sites().map(|p| 1.0 / p[1]).collect();
        let total: f64 = inv.iter().sum();
        for (i, w) in inv.iter().enumerate() {
            closed_err = closed_err.max((phi.weight(i) - w / total).abs() * env.num_sites() as f64);
        }
    }
    // ControlledTail(kappa = d + 2), p = d + 1, d = 2
    let mut norms = Vec::new();
    for n in [4usize, 8, 16] {
        let vals: Vec<f64> = (0..5u64)
            .map(|k| {
                let env: Environment = sample_environment(&LawSpec::new(
                    LawKind::ControlledTail { kappa: 4.0 },
                    2,
                    n,
                    child_seed(66, k),
                ))
                .unwrap();
                let phi =
                    invariant_density(&build_kernel(&env, &EnvironmentTransform::Identity), 1e-10)
                        .unwrap();
                worst_residual = worst_residual.max(phi.residual);
                density_norm_bound(&env, &EnvironmentTransform::Identity, 3.0, 1e-10)
                    .unwrap()
                    .lhs
            })
            .collect();
        norms.push(vals.iter().copied().fold(0.0, f64::max));
    }
    let growth = norms.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    verdict(
        6,
        "invariant density",
        worst_residual <= 1e-10 && two_err <= 1e-15 && closed_err <= 1e-8 && growth < 1.5,
        format!(
            "max residual {worst_residual:.2e}; two-state err {two_err:.1e}; 1/p closed form err {closed_err:.2e}; \
             ||phi||_(3/2) maxima {norms:.4?}"
        ),
    );
}

#[test]
fn c07_algebraic_identities() {
    let mut switch: f64 = 0.0;
    let mut permuted: f64 = 0.0;
    let mut mismatches = 0;
    let mut pushed: f64 = 0.0;
    let mut cases = 0;
    for d in 1..=3usize {
        let perms = DirectionPermutation::all(d);
        for k in 0..10u64 {
            let env = dirichlet(d, 2, child_seed(7, 10 * d as u64 + k));
            switch = switch
                .max(switch_reflection_error(&env, false))
                .max(switch_reflection_error(&env, true));
            for perm in &perms {
                let (m, e) = permutation_identity_errors(&env, perm);
                mismatches += m;
                permuted = permuted.max(e);
                pushed = pushed.max(pushed_density_residual(&env, perm).unwrap());
                cases += 1;
            }
        }
    }
    verdict(
        7,
        "kernel identities",
        switch <= IDENTITY_TOL
            && permuted <= IDENTITY_TOL
            && mismatches == 0
            && pushed <= PUSHED_DENSITY_TOL,
        format!(
            "{cases} (env, T) cases: switch {switch:.1e}, permuted kernel {permuted:.1e}, \
             shift mismatches {mismatches}, pushed density residual {pushed:.1e}"
        ),
    );
}

#[test]
fn c08_coupling_local_process() {
    let mut passes = 0;
    let mut all_ones = true;
    let mut tv_min = f64::INFINITY;
    let mut p_values = Vec::new();
    for k in 0..20u64 {
        let env = dirichlet(1, 8, child_seed(8, k));
        let r = coupling_distribution_test(&env, 3, 100_000, child_seed(88, k)).unwrap();
        passes += r.pass as usize;
        all_ones &= r.all_ones_identical;
        tv_min = tv_min.min(r.exact_tv.as_ref().map_or(f64::NAN, |v| v[0]));
        p_values.push(r.adjusted_p);
    }
    // same test on the balanced image of each law: not part of the verdict
    let control = (0..20u64)
        .filter(|&k| {
            let env = balanced(1, 8, child_seed(8, k));
            coupling_distribution_test(&env, 3, 100_000, child_seed(88, k))
                .unwrap()
                .pass
        })
        .count();
    verdict(
        8,
        "coupled local process",
        passes >= 19 && all_ones,
        format!(
            "{passes}/20 pass at alpha 0.01; all-ones branch exact: {all_ones}; \
             smallest exact one-step TV {tv_min:.3e}; adjusted p {p_values:.3?}; balanced control {control}/20"
        ),
    );
}

#[test]
fn c09_law_of_large_numbers() {
    let mut balanced_z: f64 = 0.0;
    for k in 0..3u64 {
        let env = balanced(2, 8, child_seed(9, k));
        let v = velocity_estimate(
            &env,
            &EnvironmentTransform::Identity,
            1_000_000,
            64,
            child_seed(90, k),
        )
        .unwrap();
        balanced_z = balanced_z.max(v.max_z(&[0.0, 0.0]));
    }
    let p = SimplexPoint::new(vec![0.2, 0.4, 0.1, 0.2, 0.1]).unwrap();
    let constant = TorusEnvironment::constant(2, 4, &p).unwrap();
    let drift_z = velocity_estimate(&constant, &EnvironmentTransform::Identity, 100_000, 64, 91)
        .unwrap()
        .max_z(&[0.2, 0.0]);
    let mut birkhoff_z: f64 = 0.0;
    for k in 0..3u64 {
        let env = dirichlet(1, 8, child_seed(92, k));
        let phi = invariant_density(&build_kernel(&env, &EnvironmentTransform::Embedding), 1e-12)
            .unwrap();
        let annealed = annealed_velocity(&env, &phi).unwrap();
        let avg = coupled_drift_average(&env, &phi, 100_000, 64, child_seed(93, k)).unwrap();
        birkhoff_z = birkhoff_z.max(avg.max_z(&annealed));
    }
    verdict(
        9,
        "law of large numbers",
        balanced_z <= 4.0 && drift_z <= 3.0 && birkhoff_z <= 4.0,
        format!("balanced |v|/se {balanced_z:.2}; constant drift {drift_z:.2} se; annealed vs time average {birkhoff_z:.2} se"),
    );
}

#[test]
fn c10_central_limit() {
    let fair: Environment = TorusEnvironment::constant(1, 16, &SimplexPoint::simple(1)).unwrap();
    let r = clt_check(
        &fair,
        &EnvironmentTransform::Identity,
        10_000,
        10_000,
        10,
        CltStart::Origin,
    )
    .unwrap();
    let var_err = (r.empirical[0][0] - 1.0).abs();
    let ks_p = r.min_ks_p();
    let env = balanced(2, 8, 101);
    let from_origin = clt_check(
        &env,
        &EnvironmentTransform::Identity,
        10_000,
        10_000,
        11,
        CltStart::Origin,
    )
    .unwrap();
    let phi =
        invariant_density(&build_kernel(&env, &EnvironmentTransform::Identity), 1e-12).unwrap();
    let from_density = clt_check(
        &env,
        &EnvironmentTransform::Identity,
        10_000,
        10_000,
        12,
        CltStart::Density(&phi),
    )
    .unwrap();
    let frob = from_origin
        .frobenius_rel_error
        .max(from_density.frobenius_rel_error);
    verdict(
        10,
        "central limit",
        ks_p > 0.01 && var_err <= 0.05 && frob <= 0.05,
        format!(
            "fair walk: var {:.4}, KS p {ks_p:.3}; balanced env Frobenius error origin {:.4} / density start {:.4}",
            r.empirical[0][0], from_origin.frobenius_rel_error, from_density.frobenius_rel_error
        ),
    );
}

#[test]
fn c11_exit_probability() {
    let k1 = exit_radius_factor(1);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut all_pass = true;
    for k in 0..20u64 {
        let d = 1 + (k % 2) as usize;
        let env = balanced(d, 10, child_seed(11, k));
        let r = exit_probability_diagnostic(
            &env,
            &EnvironmentTransform::Identity,
            10,
            2000,
            child_seed(110, k),
        )
        .unwrap();
        all_pass &= r.pass;
        for s in &r.starts {
            worst_margin = worst_margin.max(s.estimate - r.bound - 3.0 * s.stderr);
        }
    }
    verdict(
        11,
        "exit probability",
        k1 == 4 && all_pass,
        format!("K(d=1) = {k1}; largest estimate - bound - 3se over 20 envs = {worst_margin:.3}"),
    );
}
