use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice_env::{site_drift, EnvironmentTransform, SimplexPoint, TorusEnvironment};
use crate::rng::{stream, DOMAIN_GAMMA, DOMAIN_WALK};
use crate::scalar::Real;
use crate::stats::{cholesky, frobenius_rel_error, ks_normal, mean_cov, mean_stderr, TestOutcome};
use crate::torus_spectral::{build_kernel, InvariantDensity, SiteSampler};
use crate::walk::{CoupledTables, StepTable, TorusCursor};

use rand::Rng;

/// Covariance of one step from a site:
/// `S_ii = T_i + T_{i+d} - (T_i - T_{i+d})^2`, `S_ij = -(T_i - T_{i+d})(T_j - T_{j+d})`.
pub fn step_covariance<T: Real>(site: &SimplexPoint<T>) -> Vec<Vec<T>> {
    step_covariance_of(site.probs(), site.dim())
}

pub(crate) fn step_covariance_of<T: Real>(probs: &[T], d: usize) -> Vec<Vec<T>> {
    let drift = site_drift(probs, d);
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        probs[i + 1] + probs[i + 1 + d] - drift[i] * drift[i]
                    } else {
                        -(drift[i] * drift[j])
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityEstimate {
    pub v_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_steps: usize,
    pub n_paths: usize,
}

impl VelocityEstimate {
    fn from_samples(samples: &[Vec<f64>], n_steps: usize) -> Self {
        let d = samples.first().map_or(0, Vec::len);
        let (v_hat, stderr) = (0..d)
            .map(|i| mean_stderr(&samples.iter().map(|s| s[i]).collect::<Vec<_>>()))
            .unzip();
        VelocityEstimate {
            v_hat,
            stderr,
            n_steps,
            n_paths: samples.len(),
        }
    }

    /// Largest `|v_hat_i - v_i| / stderr_i`.
    pub fn max_z(&self, v: &[f64]) -> f64 {
        self.v_hat
            .iter()
            .zip(&self.stderr)
            .zip(v)
            .map(|((a, s), b)| {
                if *s > 0.0 {
                    (a - b).abs() / s
                } else if a == b {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

fn check_run(steps: usize, paths: usize) -> Result<()> {
    if steps == 0 || paths == 0 {
        return Err(Error::InvalidSpec(format!(
            "need steps >= 1 and paths >= 1, got {steps} and {paths}"
        )));
    }
    Ok(())
}

/// Mean of `X(steps)/steps` over `paths` walks from the origin.
pub fn velocity_estimate<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    steps: usize,
    paths: usize,
    seed: u64,
) -> Result<VelocityEstimate> {
    check_run(steps, paths)?;
    let table = StepTable::new(env, t);
    let origin = vec![0i64; env.dim()];
    let samples: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(seed, DOMAIN_WALK, p as u64);
            let mut cur = TorusCursor::new(&origin, env.half_period());
            for _ in 0..steps {
                let dir = table.draw(cur.site(), &mut rng);
                cur.step(dir);
            }
            cur.position()
                .iter()
                .map(|&x| x as f64 / steps as f64)
                .collect()
        })
        .collect();
    Ok(VelocityEstimate::from_samples(&samples, steps))
}

/// `sum_x drift(x) phi(x) / (2n)^d` for the original environment, with `phi`
/// the invariant density of the embedded walk; the density is re-checked
/// against the embedded kernel first.
pub fn annealed_velocity<T: Real>(
    env: &TorusEnvironment<T>,
    density: &InvariantDensity<T>,
) -> Result<Vec<f64>> {
    if density.phi.len() != env.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: env.num_sites(),
            got: density.phi.len(),
        });
    }
    let kernel = build_kernel(env, &EnvironmentTransform::Embedding);
    let residual = kernel.stationarity_residual(&density.phi);
    let mass: f64 = density.phi.iter().map(|p| p.as_f64()).sum::<f64>() / env.num_sites() as f64;
    if !(residual <= ANNEALED_DENSITY_TOL) || (mass - 1.0).abs() > 1e-9 {
        return Err(Error::DensityMismatch { residual });
    }
    let d = env.dim();
    let mut v = vec![0.0; d];
    for (i, probs) in env.sites().enumerate() {
        let w = density.weight(i);
        for (vk, dk) in v.iter_mut().zip(site_drift(probs, d)) {
            *vk += w * dk.as_f64();
        }
    }
    Ok(v)
}

/// Largest stationarity residual accepted by [`annealed_velocity`].
pub const ANNEALED_DENSITY_TOL: f64 = 1e-8;

/// Time average of the original drift along Bernoulli-coupled walks whose
/// starts are drawn from `density`; one sample per path.
pub fn coupled_drift_average<T: Real>(
    env: &TorusEnvironment<T>,
    density: &InvariantDensity<T>,
    steps: usize,
    paths: usize,
    seed: u64,
) -> Result<VelocityEstimate> {
    check_run(steps, paths)?;
    let d = env.dim();
    let tables = CoupledTables::new(env);
    let drifts: Vec<Vec<f64>> = env
        .sites()
        .map(|p| site_drift(p, d).iter().map(|x| x.as_f64()).collect())
        .collect();
    let sampler = SiteSampler::new(density);
    let samples: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let start = sampler.sample(seed, p as u64);
            let mut walk = stream(seed, DOMAIN_WALK, p as u64);
            let mut gamma = stream(seed, DOMAIN_GAMMA, p as u64);
            let mut cur = TorusCursor::new(&start, env.half_period());
            let mut acc = vec![0.0; d];
            for _ in 0..steps {
                for (a, b) in acc.iter_mut().zip(&drifts[cur.site()]) {
                    *a += b;
                }
                let table = if gamma.random_bool(0.5) {
                    &tables.original
                } else {
                    &tables.reflected
                };
                let dir = table.draw(cur.site(), &mut walk);
                cur.step(dir);
            }
            acc.iter().map(|a| a / steps as f64).collect()
        })
        .collect();
    Ok(VelocityEstimate::from_samples(&samples, steps))
}

/// Where the walks of [`clt_check`] start.
#[derive(Clone, Debug)]
pub enum CltStart<'a, T> {
    Origin,
    /// Drawn from a density on the torus with the start stream of the run seed.
    Density(&'a InvariantDensity<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    /// Empirical covariance of `U(steps)/sqrt(steps)`.
    pub empirical: Vec<Vec<f64>>,
    /// Step covariances averaged along all trajectories.
    pub reference: Vec<Vec<f64>>,
    pub frobenius_rel_error: f64,
    pub non_degenerate: bool,
    /// Per coordinate, against `N(0, reference_ii)`; empty when degenerate.
    pub ks: Vec<TestOutcome>,
}

impl CltReport {
    pub fn min_ks_p(&self) -> f64 {
        self.ks.iter().map(|k| k.p_value).fold(1.0, f64::min)
    }
}

/// Compares `U(steps)/sqrt(steps)` with the averaged step covariance and
/// with normal marginals.
pub fn clt_check<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    steps: usize,
    paths: usize,
    seed: u64,
    start: CltStart<'_, T>,
) -> Result<CltReport> {
    check_run(steps, paths)?;
    let d = env.dim();
    let eff = env.transformed(t);
    let table = StepTable::new(env, t);
    let drifts: Vec<Vec<f64>> = eff
        .sites()
        .map(|p| site_drift(p, d).iter().map(|x| x.as_f64()).collect())
        .collect();
    let covs: Vec<Vec<f64>> = eff
        .sites()
        .map(|p| {
            step_covariance_of(p, d)
                .into_iter()
                .flatten()
                .map(|x| x.as_f64())
                .collect()
        })
        .collect();
    let sampler = match start {
        CltStart::Origin => None,
        CltStart::Density(phi) => Some(SiteSampler::new(phi)),
    };
    let per_path: Vec<(Vec<f64>, Vec<f64>)> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let x0 = sampler
                .as_ref()
                .map_or_else(|| vec![0i64; d], |s| s.sample(seed, p as u64));
            let mut rng = stream(seed, DOMAIN_WALK, p as u64);
            let mut cur = TorusCursor::new(&x0, env.half_period());
            let mut compensator = vec![0.0; d];
            let mut cov_sum = vec![0.0; d * d];
            for _ in 0..steps {
                let site = cur.site();
                for (c, v) in compensator.iter_mut().zip(&drifts[site]) {
                    *c += v;
                }
                for (c, v) in cov_sum.iter_mut().zip(&covs[site]) {
                    *c += v;
                }
                let dir = table.draw(site, &mut rng);
                cur.step(dir);
            }
            let scale = (steps as f64).sqrt();
            let u = (0..d)
                .map(|i| ((cur.position()[i] - x0[i]) as f64 - compensator[i]) / scale)
                .collect();
            (u, cov_sum)
        })
        .collect();
    let samples: Vec<Vec<f64>> = per_path.iter().map(|(u, _)| u.clone()).collect();
    let (_, empirical) = mean_cov(&samples);
    let mut flat = vec![0.0; d * d];
    for (_, c) in &per_path {
        for (a, b) in flat.iter_mut().zip(c) {
            *a += b;
        }
    }
    let norm = (steps * paths) as f64;
    let reference: Vec<Vec<f64>> = flat
        .chunks(d)
        .map(|r| r.iter().map(|v| v / norm).collect())
        .collect();
    let non_degenerate =
        cholesky(&reference).is_some() && reference.iter().enumerate().all(|(i, r)| r[i] > 1e-12);
    let ks = if non_degenerate {
        (0..d)
            .map(|i| {
                ks_normal(
                    &samples.iter().map(|s| s[i]).collect::<Vec<_>>(),
                    0.0,
                    reference[i][i].sqrt(),
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    let frobenius_rel_error = if non_degenerate {
        frobenius_rel_error(&empirical, &reference)
    } else {
        f64::NAN
    };
    Ok(CltReport {
        steps,
        paths,
        seed,
        empirical,
        reference,
        frobenius_rel_error,
        non_degenerate,
        ks,
    })
}
