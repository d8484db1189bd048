use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice_env::l1;
use crate::scalar::Real;

/// `D_n = {|x|_1 <= n}` in `Z^d`, with boundary `|x|_1 = n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L1Ball {
    d: usize,
    n: usize,
    points: Vec<Vec<i64>>,
}

impl L1Ball {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidSpec(format!(
                "ball needs d >= 1 and n >= 1, got d={d}, n={n}"
            )));
        }
        let side = 2 * n + 1;
        let cells = side
            .checked_pow(d as u32)
            .ok_or(Error::TooLarge(usize::MAX))?;
        if cells > 1 << 26 {
            return Err(Error::TooLarge(cells));
        }
        let points = (0..cells)
            .map(|k| box_coords(k, d, n))
            .filter(|x| l1(x) <= n as i64)
            .collect();
        Ok(L1Ball { d, n, points })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d && l1(x) <= self.n as i64
    }

    pub fn is_boundary(&self, x: &[i64]) -> bool {
        x.len() == self.d && l1(x) == self.n as i64
    }

    pub fn is_interior(&self, x: &[i64]) -> bool {
        x.len() == self.d && l1(x) < self.n as i64
    }

    /// All points of `D_n`, lexicographic in `(x_1, .., x_d)`.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn interior(&self) -> impl Iterator<Item = &Vec<i64>> + '_ {
        self.points.iter().filter(|x| self.is_interior(x))
    }

    pub fn boundary(&self) -> impl Iterator<Item = &Vec<i64>> + '_ {
        self.points.iter().filter(|x| self.is_boundary(x))
    }

    pub(crate) fn cells(&self) -> usize {
        (2 * self.n + 1).pow(self.d as u32)
    }

    /// Position of `x` in the enclosing box `[-n, n]^d`.
    pub(crate) fn cell(&self, x: &[i64]) -> usize {
        let side = 2 * self.n as i64 + 1;
        x.iter()
            .fold(0i64, |acc, &c| acc * side + c + self.n as i64) as usize
    }
}

fn box_coords(mut k: usize, d: usize, n: usize) -> Vec<i64> {
    let side = 2 * n + 1;
    let mut x = vec![0i64; d];
    for c in x.iter_mut().rev() {
        *c = (k % side) as i64 - n as i64;
        k /= side;
    }
    x
}

/// Real values on `D_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallGrid<T> {
    ball: L1Ball,
    values: Vec<T>,
}

/// A grid meant to be concave with zero boundary data; see [`BallGrid::is_concave`].
pub type ConcaveGrid<T> = BallGrid<T>;

impl<T: Real> BallGrid<T> {
    pub fn zeros(ball: &L1Ball) -> Self {
        BallGrid {
            ball: ball.clone(),
            values: vec![T::zero(); ball.cells()],
        }
    }

    pub fn from_fn(ball: &L1Ball, mut f: impl FnMut(&[i64]) -> T) -> Self {
        let mut g = Self::zeros(ball);
        for x in ball.points() {
            let k = ball.cell(x);
            g.values[k] = f(x);
        }
        g
    }

    pub fn ball(&self) -> &L1Ball {
        &self.ball
    }

    /// Value at `x`; panics outside `D_n`.
    pub fn get(&self, x: &[i64]) -> T {
        assert!(self.ball.contains(x), "{x:?} outside the ball");
        self.values[self.ball.cell(x)]
    }

    pub fn set(&mut self, x: &[i64], v: T) {
        assert!(self.ball.contains(x), "{x:?} outside the ball");
        let k = self.ball.cell(x);
        self.values[k] = v;
    }

    pub fn try_get(&self, x: &[i64]) -> Result<T> {
        if self.ball.contains(x) {
            Ok(self.get(x))
        } else {
            Err(Error::OutOfDomain(x.to_vec()))
        }
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.ball.points().iter().map(|x| self.get(x))
    }

    pub fn sup_norm(&self) -> T {
        self.values().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &BallGrid<T>) -> T {
        self.ball
            .points()
            .iter()
            .fold(T::zero(), |m, x| m.max((self.get(x) - other.get(x)).abs()))
    }

    pub fn pointwise_min(&self, other: &BallGrid<T>) -> BallGrid<T> {
        BallGrid::from_fn(&self.ball, |x| self.get(x).min(other.get(x)))
    }

    pub fn scaled(&self, s: T) -> BallGrid<T> {
        BallGrid::from_fn(&self.ball, |x| s * self.get(x))
    }

    pub fn is_zero_on_boundary(&self) -> bool {
        self.ball.boundary().all(|x| self.get(x) == T::zero())
    }

    /// `Delta_i z(x) <= 1e-12` at every interior point and axis.
    pub fn is_concave(&self) -> bool {
        let tol = T::lit(1e-12);
        self.ball
            .interior()
            .all(|x| (0..self.ball.d).all(|i| second_difference(self, x, i).unwrap() <= tol))
    }
}

/// `z(x+e_i) + z(x-e_i) - 2 z(x)` at an interior point.
pub fn second_difference<T: Real>(z: &BallGrid<T>, x: &[i64], i: usize) -> Result<T> {
    if !z.ball.is_interior(x) || i >= z.ball.d {
        return Err(Error::OutOfDomain(x.to_vec()));
    }
    let mut y = x.to_vec();
    y[i] += 1;
    let up = z.get(&y);
    y[i] -= 2;
    let down = z.get(&y);
    Ok(up + down - T::lit(2.0) * z.get(x))
}

/// `prod_i Delta_i z(x)`.
pub fn monge_ampere_op<T: Real>(z: &BallGrid<T>, x: &[i64]) -> Result<T> {
    (0..z.ball.d).try_fold(T::one(), |acc, i| Ok(acc * second_difference(z, x, i)?))
}

/// `|Mz(x)|` computed on the `-Delta_i` factors, clamped at zero.
pub(crate) fn abs_ma<T: Real>(z: &BallGrid<T>, x: &[i64]) -> T {
    (0..z.ball.d).fold(T::one(), |acc, i| {
        acc * (-second_difference(z, x, i).unwrap()).max(T::zero())
    })
}

/// Nonnegative source vanishing on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceTerm<T> {
    grid: BallGrid<T>,
}

impl<T: Real> SourceTerm<T> {
    pub fn new(grid: BallGrid<T>) -> Result<Self> {
        for x in grid.ball.points() {
            let v = grid.get(x);
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "source must be finite and nonnegative, got {v} at {x:?}"
                )));
            }
            if grid.ball.is_boundary(x) && v != T::zero() {
                return Err(Error::InvalidSpec(format!(
                    "source must vanish on the boundary, got {v} at {x:?}"
                )));
            }
        }
        Ok(SourceTerm { grid })
    }

    /// `f = g` on the interior, 0 on the boundary.
    pub fn from_interior(ball: &L1Ball, mut g: impl FnMut(&[i64]) -> T) -> Result<Self> {
        Self::new(BallGrid::from_fn(ball, |x| {
            if ball.is_interior(x) {
                g(x)
            } else {
                T::zero()
            }
        }))
    }

    pub fn zero(ball: &L1Ball) -> Self {
        SourceTerm {
            grid: BallGrid::zeros(ball),
        }
    }

    pub fn ball(&self) -> &L1Ball {
        &self.grid.ball
    }

    pub fn get(&self, x: &[i64]) -> T {
        self.grid.get(x)
    }

    pub fn grid(&self) -> &BallGrid<T> {
        &self.grid
    }
}

/// The axis box `prod_i [z(x+e_i) - z(x), z(x) - z(x-e_i)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCell<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub volume: T,
}

impl<T: Real> GradientCell<T> {
    pub fn contains(&self, a: &[T]) -> bool {
        a.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }
}

pub fn gradient_cell<T: Real>(z: &BallGrid<T>, x: &[i64]) -> Result<GradientCell<T>> {
    if !z.ball.is_interior(x) {
        return Err(Error::OutOfDomain(x.to_vec()));
    }
    let zx = z.get(x);
    let mut lower = Vec::with_capacity(z.ball.d);
    let mut upper = Vec::with_capacity(z.ball.d);
    let mut y = x.to_vec();
    for i in 0..z.ball.d {
        y[i] += 1;
        lower.push(z.get(&y) - zx);
        y[i] -= 2;
        upper.push(zx - z.get(&y));
        y[i] += 1;
    }
    let volume = lower
        .iter()
        .zip(&upper)
        .fold(T::one(), |acc, (&lo, &hi)| acc * (hi - lo).max(T::zero()));
    Ok(GradientCell {
        lower,
        upper,
        volume,
    })
}

/// Maximiser of `z(x) - a.x` over `D_n` (first in lexicographic order on ties).
pub fn supporting_point<T: Real>(z: &BallGrid<T>, a: &[T]) -> Vec<i64> {
    let score = |x: &[i64]| {
        z.get(x)
            - x.iter()
                .zip(a)
                .fold(T::zero(), |s, (&c, &ai)| s + T::lit(c as f64) * ai)
    };
    let mut best = &z.ball.points()[0];
    let mut best_score = score(best);
    for x in z.ball.points() {
        let s = score(x);
        if s > best_score {
            best = x;
            best_score = s;
        }
    }
    best.clone()
}

/// `(sum over the interior of meas I(x), (||z||_inf / (2n))^d)`.
pub fn cell_covering<T: Real>(z: &BallGrid<T>) -> (T, T) {
    let total = z.ball.interior().fold(T::zero(), |acc, x| {
        acc + gradient_cell(z, x).unwrap().volume
    });
    let side = z.sup_norm() / T::lit(2.0 * z.ball.n as f64);
    (total, side.powi(z.ball.d as i32))
}

/// `x_1..x_d,value,delta_1..delta_d,mz,f_over_c`; difference columns blank on the boundary.
pub fn grid_csv<T: Real>(z: &BallGrid<T>, ratio: Option<&BallGrid<T>>) -> String {
    let d = z.ball.d;
    let mut out = String::new();
    for i in 1..=d {
        let _ = write!(out, "x_{i},");
    }
    out.push_str("value");
    for i in 1..=d {
        let _ = write!(out, ",delta_{i}");
    }
    out.push_str(",mz,f_over_c\n");
    for x in z.ball.points() {
        for c in x {
            let _ = write!(out, "{c},");
        }
        let _ = write!(out, "{}", z.get(x).as_f64());
        if z.ball.is_interior(x) {
            for i in 0..d {
                let _ = write!(out, ",{}", second_difference(z, x, i).unwrap().as_f64());
            }
            let _ = write!(out, ",{}", monge_ampere_op(z, x).unwrap().as_f64());
        } else {
            out.push_str(&",".repeat(d + 1));
        }
        match ratio {
            Some(r) => {
                let _ = writeln!(out, ",{}", r.get(x).as_f64());
            }
            None => out.push_str(",\n"),
        }
    }
    out
}
