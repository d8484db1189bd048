use super::{Direction, DirectionPermutation, EnvironmentTransform, SimplexPoint};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reduces a coordinate into the torus window `{-n+1, ..., n}`.
#[inline]
pub fn reduce_coord(x: i64, n: usize) -> i64 {
    let period = 2 * n as i64;
    (x + n as i64 - 1).rem_euclid(period) - n as i64 + 1
}

/// Periodic environment: a simplex point at every site of the torus
/// `T_n = {-n+1, ..., n}^d`, looked up at any lattice point through its
/// residue class mod `2n`.
///
/// Sites are stored row-major over `(x_1+n-1, ..., x_d+n-1)`, `x_1` slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusEnvironment<T> {
    d: usize,
    n: usize,
    data: Vec<T>,
}

impl<T: Real> TorusEnvironment<T> {
    pub fn new(d: usize, n: usize, sites: Vec<SimplexPoint<T>>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidSpec(format!(
                "need d >= 1 and n >= 1 (d={d}, n={n})"
            )));
        }
        let count = (2 * n).pow(d as u32);
        if sites.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                got: sites.len(),
            });
        }
        let mut data = Vec::with_capacity(count * (2 * d + 1));
        for p in sites {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
            data.extend_from_slice(p.probs());
        }
        Ok(TorusEnvironment { d, n, data })
    }

    /// Builds from raw per-site rows, validating each.
    pub fn from_rows(d: usize, n: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let sites = rows
            .into_iter()
            .map(SimplexPoint::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, n, sites)
    }

    pub fn constant(d: usize, n: usize, p: &SimplexPoint<T>) -> Result<Self> {
        Self::new(d, n, vec![p.clone(); (2 * n).pow(d as u32)])
    }

    pub fn from_fn(
        d: usize,
        n: usize,
        mut f: impl FnMut(&[i64]) -> SimplexPoint<T>,
    ) -> Result<Self> {
        let count = (2 * n).pow(d as u32);
        let sites = (0..count).map(|i| f(&coords_of(i, d, n))).collect();
        Self::new(d, n, sites)
    }

    pub(crate) fn from_data(d: usize, n: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), (2 * n).pow(d as u32) * (2 * d + 1));
        TorusEnvironment { d, n, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_period(&self) -> usize {
        self.n
    }

    pub fn num_sites(&self) -> usize {
        (2 * self.n).pow(self.d as u32)
    }

    pub fn stride(&self) -> usize {
        2 * self.d + 1
    }

    /// Linear index of the residue class of `x`.
    pub fn index_of(&self, x: &[i64]) -> usize {
        index_of(x, self.d, self.n)
    }

    pub fn coords_of(&self, index: usize) -> Vec<i64> {
        coords_of(index, self.d, self.n)
    }

    pub fn site_probs(&self, index: usize) -> &[T] {
        let s = self.stride();
        &self.data[index * s..(index + 1) * s]
    }

    pub fn probs_at(&self, x: &[i64]) -> &[T] {
        self.site_probs(self.index_of(x))
    }

    pub fn point(&self, x: &[i64]) -> SimplexPoint<T> {
        SimplexPoint::from_trusted(self.probs_at(x).to_vec())
    }

    pub fn sites(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.stride())
    }

    pub fn raw(&self) -> &[T] {
        &self.data
    }

    /// Materialises `E(omega)` sitewise.
    pub fn transformed(&self, t: &EnvironmentTransform) -> Self {
        if *t == EnvironmentTransform::Identity {
            return self.clone();
        }
        let s = self.stride();
        let mut data = vec![T::zero(); self.data.len()];
        for (src, dst) in self.data.chunks_exact(s).zip(data.chunks_exact_mut(s)) {
            t.apply_slice(src, dst, self.d);
        }
        TorusEnvironment {
            d: self.d,
            n: self.n,
            data,
        }
    }

    /// Materialises `tau_x omega`.
    pub fn shifted(&self, x: &[i64]) -> Self {
        let view = ShiftView::new(self, x.to_vec());
        materialize(&view, self.d, self.n)
    }

    /// Materialises `T.omega`, `(T.omega)(y) = omega(T y)`.
    pub fn permuted(&self, t: &DirectionPermutation) -> Self {
        let view = PermutedView::new(self, t.clone());
        materialize(&view, self.d, self.n)
    }
}

pub fn index_of(x: &[i64], d: usize, n: usize) -> usize {
    debug_assert_eq!(x.len(), d);
    let side = 2 * n as i64;
    let mut idx = 0i64;
    for &xi in x {
        idx = idx * side + (reduce_coord(xi, n) + n as i64 - 1);
    }
    idx as usize
}

pub fn coords_of(mut index: usize, d: usize, n: usize) -> Vec<i64> {
    let side = 2 * n;
    let mut x = vec![0i64; d];
    for k in (0..d).rev() {
        x[k] = (index % side) as i64 - n as i64 + 1;
        index /= side;
    }
    x
}

/// Read access to an environment (possibly a lazy view of one).
pub trait EnvironmentView<T: Real> {
    fn dim(&self) -> usize;

    fn prob(&self, x: &[i64], dir: Direction) -> T;

    fn point(&self, x: &[i64]) -> SimplexPoint<T> {
        SimplexPoint::from_trusted(
            Direction::all(self.dim())
                .map(|v| self.prob(x, v))
                .collect(),
        )
    }
}

impl<T: Real> EnvironmentView<T> for TorusEnvironment<T> {
    fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn prob(&self, x: &[i64], dir: Direction) -> T {
        self.probs_at(x)[dir.index()]
    }
}

impl<T: Real, V: EnvironmentView<T> + ?Sized> EnvironmentView<T> for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn prob(&self, x: &[i64], dir: Direction) -> T {
        (**self).prob(x, dir)
    }
}

/// `tau_x omega`: `view(y) = omega(x + y)`.
#[derive(Clone, Debug)]
pub struct ShiftView<'a, V: ?Sized> {
    base: &'a V,
    offset: Vec<i64>,
}

impl<'a, V: ?Sized> ShiftView<'a, V> {
    pub fn new(base: &'a V, offset: Vec<i64>) -> Self {
        ShiftView { base, offset }
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    /// `tau_y tau_x omega = tau_{x+y} omega`.
    pub fn shift(&self, y: &[i64]) -> ShiftView<'a, V> {
        let offset = self.offset.iter().zip(y).map(|(a, b)| a + b).collect();
        ShiftView {
            base: self.base,
            offset,
        }
    }
}

impl<T: Real, V: EnvironmentView<T> + ?Sized> EnvironmentView<T> for ShiftView<'_, V> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn prob(&self, y: &[i64], dir: Direction) -> T {
        let z: Vec<i64> = self.offset.iter().zip(y).map(|(a, b)| a + b).collect();
        self.base.prob(&z, dir)
    }
}

pub fn shift_view<'a, V: ?Sized>(env: &'a V, x: &[i64]) -> ShiftView<'a, V> {
    ShiftView::new(env, x.to_vec())
}

/// `T.omega`: `view(x, v) = omega(Tx, v)`; move labels are not transformed.
#[derive(Clone, Debug)]
pub struct PermutedView<'a, V: ?Sized> {
    base: &'a V,
    perm: DirectionPermutation,
}

impl<'a, V: ?Sized> PermutedView<'a, V> {
    pub fn new(base: &'a V, perm: DirectionPermutation) -> Self {
        PermutedView { base, perm }
    }
}

impl<T: Real, V: EnvironmentView<T> + ?Sized> EnvironmentView<T> for PermutedView<'_, V> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn prob(&self, x: &[i64], dir: Direction) -> T {
        self.base.prob(&self.perm.apply_point(x), dir)
    }
}

pub fn permutation_action<'a, V: ?Sized>(
    t: &DirectionPermutation,
    env: &'a V,
) -> PermutedView<'a, V> {
    PermutedView::new(env, t.clone())
}

/// `E(omega)` evaluated lazily.
#[derive(Clone, Debug)]
pub struct TransformedView<'a, V: ?Sized> {
    base: &'a V,
    transform: EnvironmentTransform,
}

impl<'a, V: ?Sized> TransformedView<'a, V> {
    pub fn new(base: &'a V, transform: EnvironmentTransform) -> Self {
        TransformedView { base, transform }
    }
}

impl<T: Real, V: EnvironmentView<T> + ?Sized> EnvironmentView<T> for TransformedView<'_, V> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn prob(&self, x: &[i64], dir: Direction) -> T {
        let d = self.base.dim();
        let raw: Vec<T> = Direction::all(d).map(|v| self.base.prob(x, v)).collect();
        self.transform.prob_of(&raw, dir, d)
    }
}

/// Copies any view onto the torus `T_n`.
pub fn materialize<T: Real, V: EnvironmentView<T> + ?Sized>(
    view: &V,
    d: usize,
    n: usize,
) -> TorusEnvironment<T> {
    let count = (2 * n).pow(d as u32);
    let mut data = Vec::with_capacity(count * (2 * d + 1));
    for i in 0..count {
        let x = coords_of(i, d, n);
        data.extend(Direction::all(d).map(|v| view.prob(&x, v)));
    }
    TorusEnvironment::from_data(d, n, data)
}
