use anyhow::Result;
use rand::Rng;
use rwre::env_laws::{empirical_c_moment, sample_environment};
use rwre::ergodic::{
    clt_check, coupling_distribution_test, kernel_identity_checks, velocity_estimate, CltReport,
    CltStart,
};
use rwre::lattice_env::{
    drift, ellipticity_constant, ellipticity_field, is_balanced, snapshot, DirectionPermutation,
};
use rwre::monge_ampere::{
    grid_csv, occupation_functional, verify_occupation_bound, L1Ball, MaProblem, SolverOptions,
    SourceTerm,
};
use rwre::resolvent::{verify_resolvent_bound, RATIO_GROWTH_SLACK};
use rwre::rng::{stream, DOMAIN_AUX};
use rwre::torus_spectral::{build_kernel, density_integral, density_norm_bound, invariant_density};
use rwre::walk::simulate;
use rwre::Environment;
use serde_json::{json, Value};
use std::fmt::Write;

use crate::config::{ExperimentConfig, SourceName};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Complete,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Complete => "COMPLETE",
        }
    }

    fn from_check(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub result: Value,
    /// File name and contents, written next to the report.
    pub files: Vec<(String, String)>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment.as_str() {
        "sample-env" => sample_env(cfg),
        "invariant-density" => density(cfg),
        "solve-ma" => solve_ma(cfg),
        "occupation" => occupation(cfg),
        "resolvent-bound" => resolvent_bound(cfg),
        "lln" => lln(cfg),
        "clt" => clt(cfg),
        "coupling-test" => coupling(cfg),
        "kernel-identities" => identities(cfg),
        "density-bound" => density_bound(cfg),
        other => anyhow::bail!("unknown experiment `{other}`"),
    }
}

fn torus(cfg: &ExperimentConfig, n: usize) -> Result<Environment> {
    Ok(sample_environment(&cfg.law_spec()?.with_size(n))?)
}

/// Ball of radius `n` inside a torus of half-period `n + 1`.
fn ball_problem(cfg: &ExperimentConfig) -> Result<(L1Ball, Environment, SourceTerm<f64>)> {
    let (d, n) = (cfg.geometry.d, cfg.geometry.n);
    let ball = L1Ball::new(d, n)?;
    let env = torus(cfg, n + 1)?;
    let t = cfg.transform();
    let f = match cfg.run.source.unwrap_or_default() {
        SourceName::Ones => SourceTerm::from_interior(&ball, |_| 1.0)?,
        SourceName::Ellipticity => {
            SourceTerm::from_interior(&ball, |x| ellipticity_constant(&env, &t, x))?
        }
        SourceName::Uniform => {
            let mut rng = stream(cfg.seed, DOMAIN_AUX, 0);
            SourceTerm::from_interior(&ball, |_| rng.random::<f64>())?
        }
    };
    Ok((ball, env, f))
}

fn sample_env(cfg: &ExperimentConfig) -> Result<Outcome> {
    let env = torus(cfg, cfg.geometry.n)?;
    let t = cfg.transform();
    let p = cfg.run.p.unwrap_or(cfg.geometry.d as f64 + 1.0);
    let c = ellipticity_field(&env, &t);
    let min_c = c.iter().copied().fold(f64::INFINITY, f64::min);
    let moment = empirical_c_moment(&env, &t, p).ok();
    Ok(Outcome {
        status: Status::Complete,
        summary: format!("{} sites, min c = {min_c:.6e}", env.num_sites()),
        result: json!({
            "num_sites": env.num_sites(),
            "balanced": is_balanced(&env, &t),
            "min_ellipticity": min_c,
            "p": p,
            "c_moment": moment,
        }),
        files: vec![("environment.json".into(), snapshot::to_json(&env))],
    })
}

fn density(cfg: &ExperimentConfig) -> Result<Outcome> {
    let env = torus(cfg, cfg.geometry.n)?;
    let tol = cfg.tol(1e-10);
    let kernel = build_kernel(&env, &cfg.transform());
    let phi = invariant_density(&kernel, tol)?;
    let ok = phi.residual <= tol;
    Ok(Outcome {
        status: Status::from_check(ok),
        summary: format!("residual {:.3e} ({:?})", phi.residual, phi.method),
        result: json!({
            "num_states": kernel.num_states(),
            "residual": phi.residual,
            "tol": tol,
            "method": format!("{:?}", phi.method),
            "max_phi": phi.phi.iter().copied().fold(0.0, f64::max),
            "min_phi": phi.phi.iter().copied().fold(f64::INFINITY, f64::min),
        }),
        files: vec![("density.csv".into(), phi.to_csv())],
    })
}

fn solve_ma(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (ball, env, f) = ball_problem(cfg)?;
    let tol = cfg.tol(1e-10);
    let problem = MaProblem::new(&ball, &env, &cfg.transform(), &f)?;
    let mut opts = SolverOptions::new(tol).with_order(cfg.sweep_order());
    if let Some(cap) = cfg.run.max_sweeps {
        opts.max_sweeps = cap;
    }
    let sol = problem.solve(&opts)?;
    let membership = problem.membership(&sol.grid, tol);
    let ok = membership.holds() && sol.residual <= tol;
    Ok(Outcome {
        status: Status::from_check(ok),
        summary: format!(
            "{} sweeps, residual {:.3e}, sup {:.6}",
            sol.sweeps,
            sol.residual,
            sol.grid.sup_norm()
        ),
        result: json!({
            "sweeps": sol.sweeps,
            "residual": sol.residual,
            "last_update": sol.last_update,
            "sup_norm": sol.grid.sup_norm(),
            "membership": membership,
        }),
        files: vec![(
            "solution.csv".into(),
            grid_csv(&sol.grid, Some(problem.ratio())),
        )],
    })
}

fn occupation(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (ball, env, f) = ball_problem(cfg)?;
    let t = cfg.transform();
    let report = verify_occupation_bound(&ball, &env, &t, &f, cfg.tol(1e-10))?;
    let q = occupation_functional(&ball, &env, &t, &f)?;
    let mut csv = (1..=ball.dim())
        .map(|i| format!("x_{i},"))
        .collect::<String>()
        + "qf\n";
    for x in ball.points() {
        for c in x {
            let _ = write!(csv, "{c},");
        }
        let _ = writeln!(csv, "{}", q.get(x));
    }
    Ok(Outcome {
        status: Status::from_check(report.ordered),
        summary: format!("||Qf|| = {:.6}, ||z|| = {:.6}", report.qf_sup, report.z_sup),
        result: serde_json::to_value(&report)?,
        files: vec![("occupation.csv".into(), csv)],
    })
}

fn resolvent_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sizes = cfg.run.sizes.clone().unwrap_or_else(|| vec![4, 8, 16]);
    let trials = cfg.run.trials.unwrap_or(50);
    let report = verify_resolvent_bound(&cfg.law_spec()?, &cfg.transform(), &sizes, trials)?;
    let mut csv = String::from("n,trial,ratio\n");
    for (n, row) in sizes.iter().zip(&report.ratios) {
        for (k, r) in row.iter().enumerate() {
            let _ = writeln!(csv, "{n},{k},{r}");
        }
    }
    Ok(Outcome {
        status: Status::from_check(report.bounded),
        summary: format!(
            "maxima {:.4?}, largest growth {:.3}",
            report.maxima, report.max_growth
        ),
        result: serde_json::to_value(&report)?,
        files: vec![("ratios.csv".into(), csv)],
    })
}

fn lln(cfg: &ExperimentConfig) -> Result<Outcome> {
    let env = torus(cfg, cfg.geometry.n)?;
    let t = cfg.transform();
    let (steps, paths) = (cfg.steps(100_000), cfg.paths(32));
    let estimate = velocity_estimate(&env, &t, steps, paths, cfg.seed)?;
    // torus velocity: drift averaged under the walk's own invariant density
    let phi = invariant_density(&build_kernel(&env, &t), 1e-12)?;
    let reference: Vec<f64> = (0..cfg.geometry.d)
        .map(|i| density_integral(&env, &phi, |w| drift(w, &t, &vec![0; cfg.geometry.d])[i]))
        .collect();
    let z = estimate.max_z(&reference);
    let z_max = cfg.run.z_max.unwrap_or(4.0);
    let stride = cfg.run.stride.unwrap_or((steps / 10_000).max(1));
    let traj = simulate(&env, &t, &vec![0; cfg.geometry.d], steps, cfg.seed);
    Ok(Outcome {
        status: Status::from_check(z <= z_max),
        summary: format!(
            "v_hat {:.6?}, reference {reference:.6?}, {z:.2} se",
            estimate.v_hat
        ),
        result: json!({
            "estimate": estimate,
            "reference": reference,
            "max_z": z,
            "z_max": z_max,
        }),
        files: vec![("trajectory.csv".into(), thin_csv(&traj.to_csv(), stride))],
    })
}

/// Keeps the header, every `stride`-th row and the last row.
fn thin_csv(csv: &str, stride: usize) -> String {
    let lines: Vec<&str> = csv.lines().collect();
    let mut out = String::new();
    for (k, line) in lines.iter().enumerate() {
        if k == 0 || (k - 1) % stride == 0 || k + 1 == lines.len() {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn clt(cfg: &ExperimentConfig) -> Result<Outcome> {
    let env = torus(cfg, cfg.geometry.n)?;
    let t = cfg.transform();
    let (steps, paths) = (cfg.steps(10_000), cfg.paths(1_000));
    let frob_tol = cfg.run.frobenius_tol.unwrap_or(0.05);
    let phi = invariant_density(&build_kernel(&env, &t), 1e-12)?;
    let origin = clt_check(&env, &t, steps, paths, cfg.seed, CltStart::Origin)?;
    let from_density = clt_check(&env, &t, steps, paths, cfg.seed, CltStart::Density(&phi))?;
    let good = |r: &CltReport| {
        r.non_degenerate && r.frobenius_rel_error <= frob_tol && r.min_ks_p() > 0.01
    };
    let mut csv = String::from("start,i,j,empirical,reference\n");
    for (name, r) in [("origin", &origin), ("density", &from_density)] {
        for i in 0..cfg.geometry.d {
            for j in 0..cfg.geometry.d {
                let _ = writeln!(
                    csv,
                    "{name},{},{},{},{}",
                    i + 1,
                    j + 1,
                    r.empirical[i][j],
                    r.reference[i][j]
                );
            }
        }
    }
    Ok(Outcome {
        status: Status::from_check(good(&origin) && good(&from_density)),
        summary: format!(
            "Frobenius error {:.4} / {:.4}, KS p {:.3} / {:.3}",
            origin.frobenius_rel_error,
            from_density.frobenius_rel_error,
            origin.min_ks_p(),
            from_density.min_ks_p()
        ),
        result: json!({ "frobenius_tol": frob_tol, "origin": origin, "density": from_density }),
        files: vec![("covariance.csv".into(), csv)],
    })
}

fn coupling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let env = torus(cfg, cfg.geometry.n)?;
    let horizon = cfg.run.horizon.unwrap_or(3);
    let report = coupling_distribution_test(&env, horizon, cfg.paths(100_000), cfg.seed)?;
    let mut csv = String::from("h,statistic,p_value,dof,exact_tv\n");
    for (h, test) in report.tests.iter().enumerate() {
        let tv = report
            .exact_tv
            .as_ref()
            .map(|v| v[h].to_string())
            .unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{tv}",
            h + 1,
            test.statistic,
            test.p_value,
            test.dof
        );
    }
    Ok(Outcome {
        status: Status::from_check(report.pass && report.all_ones_identical),
        summary: format!(
            "adjusted p {:.4e}, switch-on replay exact: {}",
            report.adjusted_p, report.all_ones_identical
        ),
        result: serde_json::to_value(&report)?,
        files: vec![("tests.csv".into(), csv)],
    })
}

fn identities(cfg: &ExperimentConfig) -> Result<Outcome> {
    let env = torus(cfg, cfg.geometry.n)?;
    let mut reports = Vec::new();
    for gamma in [false, true] {
        for perm in DirectionPermutation::all(cfg.geometry.d) {
            reports.push(kernel_identity_checks(&env, gamma, &perm)?);
        }
    }
    let mut csv = String::from(
        "gamma,axes,signs,switch_error,shift_mismatches,permuted_error,pushed_residual,pass\n",
    );
    for r in &reports {
        let join = |v: Vec<String>| v.join(" ");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.gamma as u8,
            join(r.axes.iter().map(|a| (a + 1).to_string()).collect()),
            join(r.signs.iter().map(|s| s.to_string()).collect()),
            r.switch_reflection_error,
            r.shift_permutation_mismatches,
            r.permuted_kernel_error,
            r.pushed_density_residual,
            r.pass
        );
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    Ok(Outcome {
        status: Status::from_check(failed == 0),
        summary: format!("{} cases, {failed} failed", reports.len()),
        result: json!({ "cases": reports.len(), "failed": failed, "reports": reports }),
        files: vec![("identities.csv".into(), csv)],
    })
}

fn density_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sizes = cfg.run.sizes.clone().unwrap_or_else(|| vec![4, 8, 16]);
    let p = cfg.run.p.unwrap_or(cfg.geometry.d as f64 + 1.0);
    let t = cfg.transform();
    let mut reports = Vec::new();
    for &n in &sizes {
        reports.push(density_norm_bound(&torus(cfg, n)?, &t, p, cfg.tol(1e-10))?);
    }
    let growth: Vec<f64> = reports.windows(2).map(|w| w[1].lhs / w[0].lhs).collect();
    let ok = growth.iter().all(|&g| g < RATIO_GROWTH_SLACK);
    let mut csv = String::from("n,lhs,rhs_base,ratio\n");
    for r in &reports {
        let _ = writeln!(csv, "{},{},{},{}", r.n, r.lhs, r.rhs_base, r.ratio);
    }
    let norms: Vec<f64> = reports.iter().map(|r| r.lhs).collect();
    Ok(Outcome {
        status: Status::from_check(ok),
        summary: format!("density norms {norms:.4?}"),
        result: json!({ "p": p, "reports": reports, "growth": growth, "slack": RATIO_GROWTH_SLACK }),
        files: vec![("density_bound.csv".into(), csv)],
    })
}
