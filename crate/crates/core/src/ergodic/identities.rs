use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::lattice_env::{Direction, DirectionPermutation, EnvironmentTransform, TorusEnvironment};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;
use crate::torus_spectral::{build_kernel, invariant_density};
use crate::walk::TorusCursor;

/// Interns whole environments so that events `{omega'}` compare exactly.
struct Catalog {
    ids: HashMap<Vec<u64>, usize>,
}

impl Catalog {
    fn new() -> Self {
        Catalog {
            ids: HashMap::new(),
        }
    }

    fn id<T: Real>(&mut self, env: &TorusEnvironment<T>) -> usize {
        let key: Vec<u64> = env.raw().iter().map(|p| p.as_f64().to_bits()).collect();
        let next = self.ids.len();
        *self.ids.entry(key).or_insert(next)
    }
}

/// `sum_v weight[v] 1[next[v] == target]` over the `2d+1` moves: the
/// probability that one step of the environment process lands in `{target}`.
fn singleton_kernel<T: Real>(weight: &[T], next: &[usize], target: usize) -> T {
    weight.iter().zip(next).fold(
        T::zero(),
        |acc, (&w, &id)| if id == target { acc + w } else { acc },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub d: usize,
    pub n: usize,
    pub gamma: bool,
    pub axes: Vec<usize>,
    pub signs: Vec<i64>,
    /// Largest gap in `K_g(a.omega, B) = K_{1-g}(omega, a.B)` (`a` = reflection).
    pub switch_reflection_error: f64,
    /// Sites `x` where `tau_x (T.omega) != T.(tau_{Tx} omega)`.
    pub shift_permutation_mismatches: usize,
    /// Largest gap in `K(T.omega, T(B)) = K^T(omega, B)`.
    pub permuted_kernel_error: f64,
    /// Stationarity residual of `phi(T^{-1} y)` for the permuted walk.
    pub pushed_density_residual: f64,
    pub pass: bool,
}

pub const IDENTITY_TOL: f64 = 1e-15;
pub const PUSHED_DENSITY_TOL: f64 = 1e-10;

/// Evaluates the reflection-switch identity, the shift/permutation
/// commutation, the permuted-kernel identity and the pushed invariant
/// density for one environment, switch value and signed permutation.
pub fn kernel_identity_checks<T: Real>(
    env: &TorusEnvironment<T>,
    gamma: bool,
    perm: &DirectionPermutation,
) -> Result<IdentityReport> {
    let (d, n) = (env.dim(), env.half_period());
    let switch_reflection_error = switch_reflection_error(env, gamma);
    let (shift_permutation_mismatches, permuted_kernel_error) =
        permutation_identity_errors(env, perm);
    let pushed_density_residual = pushed_density_residual(env, perm)?;
    let pass = switch_reflection_error <= IDENTITY_TOL
        && shift_permutation_mismatches == 0
        && permuted_kernel_error <= IDENTITY_TOL
        && pushed_density_residual <= PUSHED_DENSITY_TOL;
    let images: Vec<(usize, i64)> = (0..d)
        .map(|i| {
            perm.apply_direction(Direction::plus(i))
                .axis_sign(d)
                .unwrap()
        })
        .collect();
    Ok(IdentityReport {
        d,
        n,
        gamma,
        axes: images.iter().map(|e| e.0).collect(),
        signs: images.iter().map(|e| e.1).collect(),
        switch_reflection_error,
        shift_permutation_mismatches,
        permuted_kernel_error,
        pushed_density_residual,
        pass,
    })
}

/// Largest gap in `K_g(a.w, B) = K_{1-g}(w, a.B)` over every shifted
/// environment `w` and every one-step target `B = {tau_u (a.w)}`, where
/// `K_1 = K` steps with `w(0, v)` and `K_0 = G` with `w(0, -v)`.
pub fn switch_reflection_error<T: Real>(env: &TorusEnvironment<T>, gamma: bool) -> f64 {
    let d = env.dim();
    let reflect = EnvironmentTransform::Reflection;
    let origin = vec![0i64; d];
    let mut catalog = Catalog::new();
    let weights = |w: &TorusEnvironment<T>, g: bool| -> Vec<T> {
        let probs = w.probs_at(&origin);
        Direction::all(d)
            .map(|v| {
                if g {
                    probs[v.index()]
                } else {
                    probs[v.negate(d).index()]
                }
            })
            .collect()
    };
    let mut worst = 0.0f64;
    for i in 0..env.num_sites() {
        let omega = env.shifted(&env.coords_of(i));
        let reflected = omega.transformed(&reflect);
        let shifts_r: Vec<TorusEnvironment<T>> = Direction::all(d)
            .map(|v| reflected.shifted(&v.displacement(d)))
            .collect();
        let next_r: Vec<usize> = shifts_r.iter().map(|e| catalog.id(e)).collect();
        let next_w: Vec<usize> = Direction::all(d)
            .map(|v| catalog.id(&omega.shifted(&v.displacement(d))))
            .collect();
        let (lhs_w, rhs_w) = (weights(&reflected, gamma), weights(&omega, !gamma));
        for b_env in &shifts_r {
            let b = catalog.id(b_env);
            let ab = catalog.id(&b_env.transformed(&reflect));
            let lhs = singleton_kernel(&lhs_w, &next_r, b);
            let rhs = singleton_kernel(&rhs_w, &next_w, ab);
            worst = worst.max((lhs - rhs).abs().as_f64());
        }
    }
    worst
}

/// Number of sites where `tau_x (T.w) != T.(tau_{Tx} w)`, and the largest
/// gap in `K(T.w, T(B)) = K^T(w, B)` with `K^T(w, B) = sum_v w(0,v) 1[tau_{Tv} w in B]`,
/// over every shifted environment and every `B = {tau_u w}`.
pub fn permutation_identity_errors<T: Real>(
    env: &TorusEnvironment<T>,
    perm: &DirectionPermutation,
) -> (usize, f64) {
    let d = env.dim();
    let origin = vec![0i64; d];
    let mut catalog = Catalog::new();
    let permuted_env = env.permuted(perm);
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for i in 0..env.num_sites() {
        let x = env.coords_of(i);
        if permuted_env.shifted(&x).raw() != env.shifted(&perm.apply_point(&x)).permuted(perm).raw()
        {
            mismatches += 1;
        }
        let omega = env.shifted(&x);
        let permuted = omega.permuted(perm);
        let lhs_w: Vec<T> = permuted.probs_at(&origin).to_vec();
        let rhs_w: Vec<T> = omega.probs_at(&origin).to_vec();
        let next_l: Vec<usize> = Direction::all(d)
            .map(|v| catalog.id(&permuted.shifted(&v.displacement(d))))
            .collect();
        let next_r: Vec<usize> = Direction::all(d)
            .map(|v| catalog.id(&omega.shifted(&perm.apply_point(&v.displacement(d)))))
            .collect();
        for u in Direction::all(d) {
            let b_env = omega.shifted(&u.displacement(d));
            let b = catalog.id(&b_env);
            let tb = catalog.id(&b_env.permuted(perm));
            let lhs = singleton_kernel(&lhs_w, &next_l, tb);
            let rhs = singleton_kernel(&rhs_w, &next_r, b);
            worst = worst.max((lhs - rhs).abs().as_f64());
        }
    }
    (mismatches, worst)
}

/// The walk `Y = T X` with `X` the embedded walk moves from `y` to `y + Tv`
/// with probability `E(omega)(T^{-1} y, v)`; `phi(T^{-1} y)` must be
/// stationary for it when `phi` is stationary for `X`.
pub fn pushed_density_residual<T: Real>(
    env: &TorusEnvironment<T>,
    perm: &DirectionPermutation,
) -> Result<f64> {
    let (d, n) = (env.dim(), env.half_period());
    let embedded = env.transformed(&EnvironmentTransform::Embedding);
    let phi = invariant_density(
        &build_kernel(env, &EnvironmentTransform::Embedding),
        PUSHED_DENSITY_TOL / 10.0,
    )?;
    let inverse = perm.inverse();
    let mut kernel = SparseMatrix::zeros(env.num_sites());
    let mut psi = vec![T::zero(); env.num_sites()];
    for j in 0..env.num_sites() {
        let y = env.coords_of(j);
        let pre = inverse.apply_point(&y);
        psi[j] = phi.phi[env.index_of(&pre)];
        let probs = embedded.probs_at(&pre);
        for v in Direction::all(d) {
            let mut cur = TorusCursor::new(&y, n);
            cur.step(perm.apply_direction(v));
            kernel.add(j, cur.site(), probs[v.index()]);
        }
    }
    let next = kernel.vec_mul(&psi);
    Ok(next
        .iter()
        .zip(&psi)
        .map(|(a, b)| (*a - *b).abs().as_f64())
        .sum())
}
