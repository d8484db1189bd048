//! The walk on the torus `T_n`: kernel assembly, invariant density and the
//! density-norm bound.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice_env::{
    ellipticity_field, lp_norm, shift_view, Direction, EnvironmentTransform, Exponent, ShiftView,
    TorusEnvironment,
};
use crate::rng::{stream, DOMAIN_START};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;
use crate::walk::TorusCursor;

/// Direct solves refuse systems with more states than this.
pub const DIRECT_SOLVE_LIMIT: usize = 1 << 24;
const POWER_ITERATION_CAP: usize = 1_000_000;
const STALL_WINDOW: usize = 10_000;

/// Row-stochastic transition matrix of the walk on `T_n`.
#[derive(Clone, Debug)]
pub struct TorusKernel<T> {
    d: usize,
    n: usize,
    matrix: SparseMatrix<T>,
}

impl<T: Real> TorusKernel<T> {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_period(&self) -> usize {
        self.n
    }

    pub fn num_states(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn get(&self, from: usize, to: usize) -> T {
        self.matrix.get(from, to)
    }

    /// Strong connectivity of the graph of positive entries.
    pub fn is_irreducible(&self) -> bool {
        let fwd: Vec<Vec<usize>> = (0..self.num_states())
            .map(|i| {
                self.matrix
                    .row(i)
                    .iter()
                    .filter(|e| e.1 > T::zero())
                    .map(|e| e.0)
                    .collect()
            })
            .collect();
        let mut bwd = vec![Vec::new(); fwd.len()];
        for (i, row) in fwd.iter().enumerate() {
            for &j in row {
                bwd[j].push(i);
            }
        }
        reaches_all(&fwd) && reaches_all(&bwd)
    }

    /// `||phi^T K - phi^T||_1`.
    pub fn stationarity_residual(&self, phi: &[T]) -> f64 {
        let next = self.matrix.vec_mul(phi);
        next.iter()
            .zip(phi)
            .map(|(a, b)| (*a - *b).abs().as_f64())
            .sum()
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == adj.len()
}

/// Entry `(x, x+v mod T_n)` is `E(omega)(x, v)`; moves that wrap onto the
/// same state accumulate.
pub fn build_kernel<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
) -> TorusKernel<T> {
    let (d, n) = (env.dim(), env.half_period());
    let eff = env.transformed(t);
    let mut matrix = SparseMatrix::zeros(env.num_sites());
    for i in 0..env.num_sites() {
        let x = env.coords_of(i);
        let probs = eff.site_probs(i);
        for dir in Direction::all(d) {
            if probs[dir.index()] == T::zero() {
                continue;
            }
            let mut cur = TorusCursor::new(&x, n);
            cur.step(dir);
            matrix.add(i, cur.site(), probs[dir.index()]);
        }
    }
    TorusKernel { d, n, matrix }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMethod {
    Power { iterations: usize },
    Direct,
}

/// Stationary weights with respect to the normalised counting measure:
/// `sum_x phi(x) = (2n)^d`.
#[derive(Clone, Debug)]
pub struct InvariantDensity<T> {
    pub d: usize,
    pub n: usize,
    pub phi: Vec<T>,
    pub residual: f64,
    pub method: DensityMethod,
}

impl<T: Real> InvariantDensity<T> {
    /// Probability of site `i`, `phi(i) / (2n)^d`.
    pub fn weight(&self, i: usize) -> f64 {
        self.phi[i].as_f64() / self.phi.len() as f64
    }

    /// `index,x_1..x_d,phi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index");
        for k in 1..=self.d {
            let _ = write!(out, ",x_{k}");
        }
        out.push_str(",phi\n");
        for (i, p) in self.phi.iter().enumerate() {
            let _ = write!(out, "{i}");
            for c in crate::lattice_env::coords_of(i, self.d, self.n) {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{}", p.as_f64());
        }
        out
    }
}

/// Lazy power iteration, falling back to the direct solve when progress
/// stalls or the iteration cap is reached.
pub fn invariant_density<T: Real>(
    kernel: &TorusKernel<T>,
    tol: f64,
) -> Result<InvariantDensity<T>> {
    if !kernel.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    match power_iteration(kernel, tol, POWER_ITERATION_CAP, true) {
        Ok(density) => Ok(density),
        Err(Error::NoConvergence {
            iterations,
            residual,
        }) => {
            if kernel.num_states() > DIRECT_SOLVE_LIMIT {
                return Err(Error::NoConvergence {
                    iterations,
                    residual,
                });
            }
            let density = direct_solve(kernel)?;
            if density.residual > tol {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: density.residual,
                });
            }
            Ok(density)
        }
        Err(e) => Err(e),
    }
}

/// Power iteration only, with an explicit cap and no stall detection.
pub fn invariant_density_power<T: Real>(
    kernel: &TorusKernel<T>,
    tol: f64,
    max_iter: usize,
) -> Result<InvariantDensity<T>> {
    if !kernel.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    power_iteration(kernel, tol, max_iter, false)
}

/// Direct solve only.
pub fn invariant_density_direct<T: Real>(kernel: &TorusKernel<T>) -> Result<InvariantDensity<T>> {
    if !kernel.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    if kernel.num_states() > DIRECT_SOLVE_LIMIT {
        return Err(Error::TooLarge(kernel.num_states()));
    }
    direct_solve(kernel)
}

fn power_iteration<T: Real>(
    kernel: &TorusKernel<T>,
    tol: f64,
    max_iter: usize,
    detect_stall: bool,
) -> Result<InvariantDensity<T>> {
    let states = kernel.num_states();
    let total = T::lit(states as f64);
    let half = T::lit(0.5);
    let mut phi = vec![T::one(); states];
    let mut checkpoint = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 0..=max_iter {
        let next = kernel.matrix.vec_mul(&phi);
        residual = next
            .iter()
            .zip(&phi)
            .map(|(a, b)| (*a - *b).abs().as_f64())
            .sum();
        if residual <= tol {
            return Ok(InvariantDensity {
                d: kernel.d,
                n: kernel.n,
                phi,
                residual,
                method: DensityMethod::Power { iterations: it },
            });
        }
        if detect_stall && it > 0 && it % STALL_WINDOW == 0 {
            if residual > 0.5 * checkpoint {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual,
                });
            }
            checkpoint = residual;
        }
        // averaging with the identity removes periodicity
        for (p, q) in phi.iter_mut().zip(&next) {
            *p = half * (*p + *q);
        }
        let sum: T = phi.iter().copied().sum();
        let scale = total / sum;
        phi.iter_mut().for_each(|p| *p = *p * scale);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

fn direct_solve<T: Real>(kernel: &TorusKernel<T>) -> Result<InvariantDensity<T>> {
    let states = kernel.num_states();
    // (K^T - I) phi = 0 with state 0's equation replaced by sum phi = (2n)^d
    let mut a = kernel.matrix.transpose().scaled_shift(-T::one(), T::one());
    a.replace_row(0, (0..states).map(|j| (j, T::one())).collect());
    let mut b = vec![T::zero(); states];
    b[0] = T::lit(states as f64);
    let order: Vec<usize> = (1..states).chain(std::iter::once(0)).collect();
    let phi = a.solve(&b, Some(&order))?;
    let residual = kernel.stationarity_residual(&phi);
    Ok(InvariantDensity {
        d: kernel.d,
        n: kernel.n,
        phi,
        residual,
        method: DensityMethod::Direct,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityBoundReport {
    pub n: usize,
    pub p: f64,
    pub lhs: f64,
    pub rhs_base: f64,
    pub ratio: f64,
}

/// `||phi_n||_{p/(p-1)}` against `||1/c||_p^{d/(p-d)}`; the dimensional
/// constant is left free, `ratio` is their quotient.
pub fn density_norm_bound<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    p: f64,
    tol: f64,
) -> Result<DensityBoundReport> {
    let d = env.dim() as f64;
    if !(p > d) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let c = ellipticity_field(env, t);
    if let Some(index) = c.iter().position(|&v| v <= T::zero()) {
        return Err(Error::DegenerateSite { index });
    }
    let inv_c: Vec<T> = c.iter().map(|&v| T::one() / v).collect();
    let density = invariant_density(&build_kernel(env, t), tol)?;
    let lhs = lp_norm(&density.phi, Exponent::Finite(p / (p - 1.0)))?.as_f64();
    let rhs_base = lp_norm(&inv_c, Exponent::Finite(p))?
        .as_f64()
        .powf(d / (p - d));
    Ok(DensityBoundReport {
        n: env.half_period(),
        p,
        lhs,
        rhs_base,
        ratio: lhs / rhs_base,
    })
}

/// `(1/(2n)^d) sum_x f(tau_x omega)`.
pub fn empirical_measure_integral<T: Real>(
    env: &TorusEnvironment<T>,
    f: impl Fn(&ShiftView<'_, TorusEnvironment<T>>) -> T,
) -> T {
    let total = (0..env.num_sites()).fold(T::zero(), |acc, i| {
        acc + f(&shift_view(env, &env.coords_of(i)))
    });
    total / T::lit(env.num_sites() as f64)
}

/// `sum_x f(tau_x omega) phi(x) / (2n)^d`.
pub fn density_integral<T: Real>(
    env: &TorusEnvironment<T>,
    density: &InvariantDensity<T>,
    f: impl Fn(&ShiftView<'_, TorusEnvironment<T>>) -> T,
) -> T {
    let total = (0..env.num_sites()).fold(T::zero(), |acc, i| {
        acc + f(&shift_view(env, &env.coords_of(i))) * density.phi[i]
    });
    total / T::lit(env.num_sites() as f64)
}

/// Inverse-CDF sampler of sites with probability `phi(x)/(2n)^d`.
#[derive(Clone, Debug)]
pub struct SiteSampler {
    d: usize,
    n: usize,
    cum: Vec<f64>,
}

impl SiteSampler {
    pub fn new<T: Real>(density: &InvariantDensity<T>) -> Self {
        let mut acc = 0.0;
        let mut cum: Vec<f64> = density
            .phi
            .iter()
            .map(|p| {
                acc += p.as_f64().max(0.0);
                acc
            })
            .collect();
        cum.iter_mut().for_each(|c| *c /= acc);
        SiteSampler {
            d: density.d,
            n: density.n,
            cum,
        }
    }

    /// Site index for a uniform `u` in `[0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let k = self.cum.partition_point(|&c| c <= u);
        let k = k.min(self.cum.len() - 1);
        // skip zero-weight states left of a rounding gap
        if k > 0 && self.cum[k] == self.cum[k - 1] {
            (0..k)
                .rev()
                .find(|&j| j == 0 || self.cum[j] > self.cum[j - 1])
                .unwrap_or(0)
        } else {
            k
        }
    }

    /// Draw number `index` of the start stream of `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Vec<i64> {
        let u: f64 = stream(seed, DOMAIN_START, index).random();
        crate::lattice_env::coords_of(self.index_for(u), self.d, self.n)
    }
}

pub fn sample_site_from_density<T: Real>(density: &InvariantDensity<T>, seed: u64) -> Vec<i64> {
    SiteSampler::new(density).sample(seed, 0)
}
