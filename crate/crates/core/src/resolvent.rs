//! The resolvent `R_n = sum_j (1 - 1/n^2)^j L^j` of the walk on `T_n`,
//! computed by a direct solve and by the truncated series, and the
//! diagnostics around its sup-norm bound.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::env_laws::{sample_environment, LawSpec};
use crate::error::{Error, Result};
use crate::lattice_env::{
    ellipticity_field, l1, lp_norm, EnvironmentTransform, Exponent, TorusEnvironment,
};
use crate::rng::{child_seed, stream, DOMAIN_AUX, DOMAIN_START, DOMAIN_WALK};
use crate::scalar::Real;
use crate::torus_spectral::build_kernel;
use crate::walk::{StepTable, TorusCursor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolventMethod {
    Direct { residual: f64 },
    Series { terms: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolventResult<T> {
    pub values: Vec<T>,
    pub method: ResolventMethod,
}

impl<T: Real> ResolventResult<T> {
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

fn discount<T: Real>(n: usize) -> T {
    T::one() - T::one() / T::lit((n * n) as f64)
}

fn check_len<T>(env: &TorusEnvironment<T>, g: &[T]) -> Result<()>
where
    T: Real,
{
    if g.len() != env.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: env.num_sites(),
            got: g.len(),
        });
    }
    Ok(())
}

/// Solves `[I - (1 - 1/n^2) L] R = g`; the residual must stay below `1e-10`
/// relative to `max(1, ||g||_inf)`.
pub fn resolvent_direct<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    g: &[T],
) -> Result<ResolventResult<T>> {
    check_len(env, g)?;
    let kernel = build_kernel(env, t);
    let a = kernel
        .matrix()
        .scaled_shift(T::one(), -discount::<T>(env.half_period()));
    let values = a.solve(g, None)?;
    let ar = a.mul_vec(&values);
    let residual = ar
        .iter()
        .zip(g)
        .fold(0.0f64, |m, (u, v)| m.max((*u - *v).abs().as_f64()));
    let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs().as_f64()));
    if !(residual < 1e-10 * scale) {
        return Err(Error::SingularSystem { pivot: usize::MAX });
    }
    Ok(ResolventResult {
        values,
        method: ResolventMethod::Direct { residual },
    })
}

/// Number of series terms that puts the tail below `tol` in sup norm.
pub fn series_terms(n: usize, g_sup: f64, tol: f64) -> usize {
    let n2 = (n * n) as f64;
    if g_sup == 0.0 {
        return 0;
    }
    (n2 * (n2 * g_sup / tol).ln()).ceil().max(0.0) as usize
}

/// `sum_{j <= J} (1 - 1/n^2)^j L^j g` with `J` from [`series_terms`].
pub fn resolvent_series<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    g: &[T],
    tol: f64,
) -> Result<ResolventResult<T>> {
    check_len(env, g)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "series tolerance must be positive, got {tol}"
        )));
    }
    let g_sup = g.iter().fold(0.0f64, |m, v| m.max(v.abs().as_f64()));
    let terms = series_terms(env.half_period(), g_sup, tol);
    let kernel = build_kernel(env, t);
    let beta = discount::<T>(env.half_period());
    let mut term = g.to_vec();
    let mut sum = g.to_vec();
    for _ in 0..terms {
        term = kernel.matrix().mul_vec(&term);
        for (s, v) in sum.iter_mut().zip(term.iter_mut()) {
            *v = *v * beta;
            *s = *s + *v;
        }
    }
    Ok(ResolventResult {
        values: sum,
        method: ResolventMethod::Series { terms },
    })
}

/// `||R_n g||_inf / (n^2 ||g / c||_d)`, the norm w.r.t. normalised counting
/// measure on `T_n`.
pub fn resolvent_ratio<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    g: &[T],
) -> Result<f64> {
    let c = ellipticity_field(env, t);
    if let Some(index) = c
        .iter()
        .zip(g)
        .position(|(&ci, &gi)| ci <= T::zero() && gi != T::zero())
    {
        return Err(Error::DegenerateSite { index });
    }
    let weighted: Vec<T> = c
        .iter()
        .zip(g)
        .map(|(&ci, &gi)| if gi == T::zero() { gi } else { gi / ci })
        .collect();
    let n = env.half_period();
    let denom = (n * n) as f64 * lp_norm(&weighted, Exponent::Finite(env.dim() as f64))?.as_f64();
    let r = resolvent_direct(env, t, g)?;
    Ok(if denom > 0.0 {
        r.sup_norm().as_f64() / denom
    } else {
        0.0
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolventBoundReport {
    pub d: usize,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// `ratios[k][trial]` for `sizes[k]`.
    pub ratios: Vec<Vec<f64>>,
    pub maxima: Vec<f64>,
    /// Max at each size over the running max of the smaller sizes.
    pub growth: Vec<f64>,
    pub max_growth: f64,
    pub bounded: bool,
}

/// Slack allowed per step in `sizes` before the maxima count as growing.
pub const RATIO_GROWTH_SLACK: f64 = 1.5;

/// Samples `trials` environments per size with `g` i.i.d. uniform on `(0, 1)`
/// per site and tracks the per-size maxima of [`resolvent_ratio`].
pub fn verify_resolvent_bound<T: Real>(
    law: &LawSpec<T>,
    t: &EnvironmentTransform,
    sizes: &[usize],
    trials: usize,
) -> Result<ResolventBoundReport> {
    law.validate()?;
    let mut ratios = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let row: Result<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = child_seed(child_seed(law.seed, n as u64), trial as u64);
                let env = sample_environment(&law.with_size(n).with_seed(seed))?;
                let mut rng = stream(seed, DOMAIN_AUX, 0);
                let g: Vec<T> = (0..env.num_sites())
                    .map(|_| T::lit(rng.random::<f64>()))
                    .collect();
                resolvent_ratio(&env, t, &g)
            })
            .collect();
        ratios.push(row?);
    }
    let maxima: Vec<f64> = ratios
        .iter()
        .map(|r| r.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut growth = Vec::new();
    let mut running = maxima.first().copied().unwrap_or(0.0);
    for &m in maxima.iter().skip(1) {
        growth.push(if running > 0.0 { m / running } else { 0.0 });
        running = running.max(m);
    }
    let max_growth = growth.iter().copied().fold(0.0, f64::max);
    Ok(ResolventBoundReport {
        d: law.d,
        sizes: sizes.to_vec(),
        trials,
        seed: law.seed,
        ratios,
        maxima,
        growth,
        max_growth,
        bounded: max_growth < RATIO_GROWTH_SLACK,
    })
}

/// Smallest integer `K` with `(d^2 + 1)/K^2 < 1/2 - 1/e`.
pub fn exit_radius_factor(d: usize) -> usize {
    let threshold = 0.5 - (-1.0f64).exp();
    let num = (d * d + 1) as f64;
    (1..).find(|&k| num / ((k * k) as f64) < threshold).unwrap()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitStart {
    pub start: Vec<i64>,
    pub estimate: f64,
    pub stderr: f64,
    /// `(n^2 + |x|_1^2) / (K^2 n^2)`.
    pub doob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitReport {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub horizon: usize,
    pub paths: usize,
    pub seed: u64,
    /// `(d^2 + 1)/K^2`.
    pub bound: f64,
    pub starts: Vec<ExitStart>,
    pub sup_estimate: f64,
    pub pass: bool,
}

/// Monte Carlo estimate of `P_x[tau_{Kn} <= n^2]` for the corner
/// `(n, .., n)` and `extra_starts` uniform sites of `T_n`, each from `paths`
/// walks; passes if no estimate exceeds `(d^2+1)/K^2` by 3 standard errors.
pub fn exit_probability_diagnostic<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    extra_starts: usize,
    paths: usize,
    seed: u64,
) -> Result<ExitReport> {
    let (d, n) = (env.dim(), env.half_period());
    let k = exit_radius_factor(d);
    if k < d {
        return Err(Error::InvalidSpec(format!(
            "exit radius factor {k} below dimension {d}"
        )));
    }
    if paths == 0 {
        return Err(Error::InvalidSpec("need at least one path".into()));
    }
    let radius = (k * n) as i64;
    let horizon = n * n;
    let bound = (d * d + 1) as f64 / (k * k) as f64;
    let mut starts = vec![vec![n as i64; d]];
    let mut rng = stream(seed, DOMAIN_START, 0);
    for _ in 0..extra_starts {
        starts.push(env.coords_of(rng.random_range(0..env.num_sites())));
    }
    let table = StepTable::new(env, t);
    let mut out = Vec::with_capacity(starts.len());
    for (s, start) in starts.iter().enumerate() {
        let hits: usize = (0..paths)
            .into_par_iter()
            .map(|p| {
                let mut walk = stream(seed, DOMAIN_WALK, (s * paths + p) as u64);
                let mut cur = TorusCursor::new(start, n);
                if l1(cur.position()) >= radius {
                    return 1;
                }
                for _ in 0..horizon {
                    let dir = table.draw(cur.site(), &mut walk);
                    cur.step(dir);
                    if l1(cur.position()) >= radius {
                        return 1;
                    }
                }
                0
            })
            .sum();
        let p_hat = hits as f64 / paths as f64;
        let x1 = l1(start) as f64;
        let nn = (n * n) as f64;
        out.push(ExitStart {
            start: start.clone(),
            estimate: p_hat,
            stderr: (p_hat * (1.0 - p_hat) / paths as f64).sqrt(),
            doob: (nn + x1 * x1) / ((k * k) as f64 * nn),
        });
    }
    let sup_estimate = out.iter().map(|s| s.estimate).fold(0.0, f64::max);
    let pass = out.iter().all(|s| s.estimate <= bound + 3.0 * s.stderr);
    Ok(ExitReport {
        d,
        n,
        k,
        horizon,
        paths,
        seed,
        bound,
        starts: out,
        sup_estimate,
        pass,
    })
}
