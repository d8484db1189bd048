use rand::seq::SliceRandom;
use serde::Serialize;

use super::grid::{abs_ma, BallGrid, ConcaveGrid, L1Ball, SourceTerm};
use crate::error::{Error, Result};
use crate::lattice_env::{ellipticity_constant, l1, EnvironmentTransform, TorusEnvironment};
use crate::rng::{stream, DOMAIN_AUX};
use crate::scalar::Real;

pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Order in which a sweep visits the interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    Forward,
    Backward,
    /// A fresh permutation per sweep from the auxiliary stream of `seed`.
    Random {
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub order: SweepOrder,
    pub max_sweeps: usize,
}

impl SolverOptions {
    pub fn new(tol: f64) -> Self {
        SolverOptions {
            tol,
            order: SweepOrder::Forward,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }

    pub fn with_order(self, order: SweepOrder) -> Self {
        SolverOptions { order, ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaSolution<T> {
    pub grid: ConcaveGrid<T>,
    pub sweeps: usize,
    pub residual: T,
    pub last_update: T,
}

/// Result of checking a grid against the class `A(E, f)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub boundary_zero: bool,
    pub concave: bool,
    pub inequality: bool,
    /// `min_x (|Mz(x)|^{1/d} - f(x)/c(x))` over the interior.
    pub worst_gap: f64,
}

impl Membership {
    pub fn holds(&self) -> bool {
        self.boundary_zero && self.concave && self.inequality
    }
}

/// The data `f / c(E, .)` of the equation `|Mz|^{1/d} = f / c` on a ball.
#[derive(Clone, Debug)]
pub struct MaProblem<T> {
    ball: L1Ball,
    ratio: BallGrid<T>,
}

impl<T: Real> MaProblem<T> {
    /// Sites with `f = 0` impose nothing; `f > 0` where `c = 0` is rejected.
    pub fn new(
        ball: &L1Ball,
        env: &TorusEnvironment<T>,
        t: &EnvironmentTransform,
        f: &SourceTerm<T>,
    ) -> Result<Self> {
        if env.dim() != ball.dim() || f.ball() != ball {
            return Err(Error::DimensionMismatch {
                expected: ball.dim(),
                got: env.dim(),
            });
        }
        let mut ratio = BallGrid::zeros(ball);
        for x in ball.interior() {
            let fx = f.get(x);
            if fx == T::zero() {
                continue;
            }
            let c = ellipticity_constant(env, t, x);
            if c <= T::zero() {
                return Err(Error::NotElliptic(x.clone()));
            }
            ratio.set(x, fx / c);
        }
        Ok(MaProblem {
            ball: ball.clone(),
            ratio,
        })
    }

    /// Problem with `f / c` given directly.
    pub fn from_ratio(ratio: BallGrid<T>) -> Result<Self> {
        let f = SourceTerm::new(ratio)?;
        Ok(MaProblem {
            ball: f.ball().clone(),
            ratio: f.grid().clone(),
        })
    }

    pub fn ball(&self) -> &L1Ball {
        &self.ball
    }

    pub fn ratio(&self) -> &BallGrid<T> {
        &self.ratio
    }

    pub fn membership(&self, z: &BallGrid<T>, tol: f64) -> Membership {
        let d = T::lit(self.ball.dim() as f64);
        let worst = self
            .ball
            .interior()
            .map(|x| abs_ma(z, x).powf(T::one() / d) - self.ratio.get(x))
            .fold(T::infinity(), |m, g| m.min(g));
        let worst = if self.ball.interior().next().is_none() {
            T::zero()
        } else {
            worst
        };
        Membership {
            boundary_zero: z.is_zero_on_boundary(),
            concave: z.is_concave(),
            inequality: worst >= -T::lit(tol),
            worst_gap: worst.as_f64(),
        }
    }

    /// `max_x | |Mz(x)|^{1/d} - f(x)/c(x) |` over the interior.
    pub fn residual(&self, z: &BallGrid<T>) -> T {
        let d = T::lit(self.ball.dim() as f64);
        self.ball
            .interior()
            .map(|x| (abs_ma(z, x).powf(T::one() / d) - self.ratio.get(x)).abs())
            .fold(T::zero(), |m, r| m.max(r))
    }

    /// `gamma u` with `u(x) = n(n+1) - |x|_1 (|x|_1 + 1)` and the smallest
    /// `gamma` putting it in the class.
    pub fn supersolution(&self) -> ConcaveGrid<T> {
        let n = self.ball.radius() as i64;
        let u = BallGrid::from_fn(&self.ball, |x| {
            let r = l1(x);
            T::lit((n * (n + 1) - r * (r + 1)) as f64)
        });
        let d = T::lit(self.ball.dim() as f64);
        let mut gamma = self
            .ball
            .interior()
            .map(|x| self.ratio.get(x) / abs_ma(&u, x).powf(T::one() / d))
            .fold(T::zero(), |m, g| m.max(g));
        if gamma == T::zero() {
            return BallGrid::zeros(&self.ball);
        }
        // rounding in gamma * u can leave a site a few ulps short
        let mut bump = T::epsilon();
        loop {
            let z = u.scaled(gamma);
            if self.membership(&z, 0.0).holds() {
                return z;
            }
            gamma = gamma * (T::one() + bump);
            bump = bump * T::lit(2.0);
        }
    }

    /// Lowers `z(x)` to the largest `beta <= z(x)` with
    /// `prod_i (2 beta - s_i) = (f/c)^d`, `s_i = z(x+e_i) + z(x-e_i)`.
    /// Returns the decrease.
    pub fn lower_site(&self, z: &mut BallGrid<T>, x: &[i64]) -> T {
        let d = self.ball.dim();
        let two = T::lit(2.0);
        let mut s = Vec::with_capacity(d);
        let mut y = x.to_vec();
        for i in 0..d {
            y[i] += 1;
            let up = z.get(&y);
            y[i] -= 2;
            let down = z.get(&y);
            y[i] += 1;
            s.push(up + down);
        }
        let current = z.get(x);
        let mut lo = s.iter().fold(T::neg_infinity(), |m, &v| m.max(v)) / two;
        let mut hi = current;
        if hi <= lo {
            return T::zero();
        }
        let r = self.ratio.get(x);
        let new = if r == T::zero() {
            lo
        } else {
            let target = r.powi(d as i32);
            let phi = |beta: T| s.iter().fold(T::one(), |acc, &si| acc * (two * beta - si));
            if phi(hi) <= target {
                return T::zero();
            }
            loop {
                let mid = lo + (hi - lo) / two;
                if mid <= lo || mid >= hi {
                    break;
                }
                if phi(mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            // the upper end keeps the inequality, so z stays in the class
            hi
        };
        let new = new.min(current);
        z.set(x, new);
        current - new
    }

    /// One Gauss-Seidel pass; returns the largest decrease.
    pub fn sweep(&self, z: &mut BallGrid<T>, sites: &[Vec<i64>]) -> T {
        sites
            .iter()
            .fold(T::zero(), |m, x| m.max(self.lower_site(z, x)))
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<MaSolution<T>> {
        self.solve_from(self.supersolution(), opts)
    }

    /// Sweeps from a given member of the class until the largest update is
    /// below `tol/10` and the residual below `tol`. Stops early with
    /// `NoConvergence` once a sweep leaves the grid unchanged.
    pub fn solve_from(&self, start: ConcaveGrid<T>, opts: &SolverOptions) -> Result<MaSolution<T>> {
        let mut z = start;
        let mut sites: Vec<Vec<i64>> = self.ball.interior().cloned().collect();
        if opts.order == SweepOrder::Backward {
            sites.reverse();
        }
        let tol = T::lit(opts.tol);
        for sweep in 1..=opts.max_sweeps {
            if let SweepOrder::Random { seed } = opts.order {
                sites.shuffle(&mut stream(seed, DOMAIN_AUX, sweep as u64));
            }
            let update = self.sweep(&mut z, &sites);
            if update < tol / T::lit(10.0) {
                let residual = self.residual(&z);
                if residual <= tol {
                    return Ok(MaSolution {
                        grid: z,
                        sweeps: sweep,
                        residual,
                        last_update: update,
                    });
                }
                // a sweep that moves nothing is a floating-point fixed point
                if update == T::zero() {
                    return Err(Error::NoConvergence {
                        iterations: sweep,
                        residual: residual.as_f64(),
                    });
                }
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_sweeps,
            residual: self.residual(&z).as_f64(),
        })
    }
}

pub fn supersolution<T: Real>(
    ball: &L1Ball,
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    f: &SourceTerm<T>,
) -> Result<ConcaveGrid<T>> {
    Ok(MaProblem::new(ball, env, t, f)?.supersolution())
}

pub fn solve_monge_ampere<T: Real>(
    ball: &L1Ball,
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    f: &SourceTerm<T>,
    tol: f64,
) -> Result<MaSolution<T>> {
    MaProblem::new(ball, env, t, f)?.solve(&SolverOptions::new(tol))
}
