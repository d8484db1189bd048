use std::collections::HashMap;

use serde::Serialize;

use super::grid::{BallGrid, L1Ball, SourceTerm};
use super::solver::{MaProblem, SolverOptions};
use crate::error::{Error, Result};
use crate::lattice_env::{lp_norm, Direction, EnvironmentTransform, Exponent, TorusEnvironment};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

/// `Qf(x) = E_x[sum_{k <= tau_n} f(X_k)]`: solves `Qf = f + P Qf` on the
/// interior with `Qf = 0` on the boundary. The solve is certified by a
/// residual below `1e-10` relative to `max(1, ||Qf||_inf)`.
pub fn occupation_functional<T: Real>(
    ball: &L1Ball,
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    f: &SourceTerm<T>,
) -> Result<BallGrid<T>> {
    let d = ball.dim();
    let interior: Vec<&Vec<i64>> = ball.interior().collect();
    let slot: HashMap<&[i64], usize> = interior
        .iter()
        .enumerate()
        .map(|(k, x)| (x.as_slice(), k))
        .collect();
    let mut a = SparseMatrix::zeros(interior.len());
    let mut buf = vec![T::zero(); env.stride()];
    for (k, x) in interior.iter().enumerate() {
        a.add(k, k, T::one());
        t.apply_slice(env.probs_at(x), &mut buf, d);
        for dir in Direction::all(d) {
            let p = buf[dir.index()];
            if p == T::zero() {
                continue;
            }
            let y: Vec<i64> = x
                .iter()
                .zip(dir.displacement(d))
                .map(|(a, b)| a + b)
                .collect();
            if let Some(&j) = slot.get(y.as_slice()) {
                a.add(k, j, -p);
            }
        }
    }
    let b: Vec<T> = interior.iter().map(|x| f.get(x)).collect();
    let q = a.solve(&b, None)?;
    let ax = a.mul_vec(&q);
    let scale = q.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let residual = ax
        .iter()
        .zip(&b)
        .fold(T::zero(), |m, (u, v)| m.max((*u - *v).abs()));
    if !(residual <= T::lit(1e-10) * scale) {
        return Err(Error::SingularSystem { pivot: usize::MAX });
    }
    let mut out = BallGrid::zeros(ball);
    for (x, v) in interior.iter().zip(q) {
        out.set(x, v);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationBoundReport {
    pub n: usize,
    pub qf_sup: f64,
    pub z_sup: f64,
    /// `n^2 ||f/c||_{d, D_n}`, the norm taken w.r.t. normalised counting measure on `D_n`.
    pub scale: f64,
    pub z_ratio: f64,
    pub qf_ratio: f64,
    pub ordered: bool,
    pub sweeps: usize,
}

/// Computes `||Qf||_inf`, `||z||_inf` for the Monge-Ampère solution with the
/// same `f`, and `n^2 ||f/c||_d`; `ordered` records `||Qf||_inf <= ||z||_inf`
/// up to `1e-8`.
pub fn verify_occupation_bound<T: Real>(
    ball: &L1Ball,
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    f: &SourceTerm<T>,
    tol: f64,
) -> Result<OccupationBoundReport> {
    let problem = MaProblem::new(ball, env, t, f)?;
    let solution = problem.solve(&SolverOptions::new(tol))?;
    let qf = occupation_functional(ball, env, t, f)?;
    let ratios: Vec<T> = ball
        .points()
        .iter()
        .map(|x| problem.ratio().get(x))
        .collect();
    let n = ball.radius();
    let scale = (n * n) as f64 * lp_norm(&ratios, Exponent::Finite(ball.dim() as f64))?.as_f64();
    let qf_sup = qf.sup_norm().as_f64();
    let z_sup = solution.grid.sup_norm().as_f64();
    let div = |a: f64| if scale > 0.0 { a / scale } else { 0.0 };
    Ok(OccupationBoundReport {
        n,
        qf_sup,
        z_sup,
        scale,
        z_ratio: div(z_sup),
        qf_ratio: div(qf_sup),
        ordered: qf_sup <= z_sup + 1e-8,
        sweeps: solution.sweeps,
    })
}
