use rand::Rng;

use crate::lattice_env::{Direction, EnvironmentTransform, TorusEnvironment};
use crate::scalar::Real;

/// Per-site cumulative move probabilities of `E(omega)` for inverse-CDF
/// sampling in the fixed order `(hold, +e_1..+e_d, -e_1..-e_d)`.
#[derive(Clone, Debug)]
pub struct StepTable<T> {
    d: usize,
    n: usize,
    cum: Vec<T>,
}

impl<T: Real> StepTable<T> {
    pub fn new(env: &TorusEnvironment<T>, t: &EnvironmentTransform) -> Self {
        let eff = env.transformed(t);
        let s = eff.stride();
        let mut cum = eff.raw().to_vec();
        for site in cum.chunks_exact_mut(s) {
            for k in 1..s {
                site[k] = site[k] + site[k - 1];
            }
        }
        StepTable {
            d: env.dim(),
            n: env.half_period(),
            cum,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_period(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn sample(&self, site: usize, u: T) -> Direction {
        let s = 2 * self.d + 1;
        let c = &self.cum[site * s..(site + 1) * s];
        for (k, &ck) in c.iter().enumerate() {
            if u < ck {
                return Direction(k);
            }
        }
        // u fell in the rounding gap above the last partial sum
        let last = (0..s)
            .rev()
            .find(|&k| k == 0 || c[k] > c[k - 1])
            .unwrap_or(0);
        Direction(last)
    }

    #[inline]
    pub fn draw<R: Rng>(&self, site: usize, rng: &mut R) -> Direction {
        let u: f64 = rng.random();
        self.sample(site, T::lit(u))
    }
}

/// Unwrapped lattice position together with its torus site index.
#[derive(Clone, Debug)]
pub struct TorusCursor {
    n: usize,
    pos: Vec<i64>,
    cell: Vec<usize>,
    strides: Vec<usize>,
    index: usize,
}

impl TorusCursor {
    pub fn new(start: &[i64], n: usize) -> Self {
        let d = start.len();
        let side = 2 * n;
        let strides: Vec<usize> = (0..d).map(|k| side.pow((d - 1 - k) as u32)).collect();
        let cell: Vec<usize> = start
            .iter()
            .map(|&x| (x + n as i64 - 1).rem_euclid(side as i64) as usize)
            .collect();
        let index = cell.iter().zip(&strides).map(|(c, s)| c * s).sum();
        TorusCursor {
            n,
            pos: start.to_vec(),
            cell,
            strides,
            index,
        }
    }

    #[inline]
    pub fn position(&self) -> &[i64] {
        &self.pos
    }

    #[inline]
    pub fn site(&self) -> usize {
        self.index
    }

    #[inline]
    pub fn step(&mut self, dir: Direction) {
        let d = self.pos.len();
        let Some((axis, sign)) = dir.axis_sign(d) else {
            return;
        };
        let top = 2 * self.n - 1;
        let stride = self.strides[axis];
        self.pos[axis] += sign;
        if sign > 0 {
            if self.cell[axis] == top {
                self.cell[axis] = 0;
                self.index -= top * stride;
            } else {
                self.cell[axis] += 1;
                self.index += stride;
            }
        } else if self.cell[axis] == 0 {
            self.cell[axis] = top;
            self.index += top * stride;
        } else {
            self.cell[axis] -= 1;
            self.index -= stride;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_env::{index_of, SimplexPoint};

    #[test]
    fn cursor_tracks_index() {
        let (d, n) = (3usize, 2usize);
        let mut cur = TorusCursor::new(&[2, -1, 0], n);
        let moves = [1, 4, 4, 4, 2, 6, 6, 6, 6, 6, 3, 3, 3, 3, 5, 0, 1, 1, 1];
        for m in moves {
            cur.step(Direction(m));
            assert_eq!(cur.site(), index_of(cur.position(), d, n));
        }
        assert_eq!(cur.position(), &[3, -1, -1][..]);
    }

    #[test]
    fn inverse_cdf_order() {
        let p = SimplexPoint::new(vec![0.25, 0.25, 0.5]).unwrap();
        let env = TorusEnvironment::constant(1, 1, &p).unwrap();
        let table = StepTable::new(&env, &EnvironmentTransform::Identity);
        assert_eq!(table.sample(0, 0.0), Direction(0));
        assert_eq!(table.sample(0, 0.2499), Direction(0));
        assert_eq!(table.sample(0, 0.25), Direction(1));
        assert_eq!(table.sample(0, 0.5), Direction(2));
        assert_eq!(table.sample(0, 1.0), Direction(2));
        let refl = StepTable::new(&env, &EnvironmentTransform::Reflection);
        assert_eq!(refl.sample(0, 0.3), Direction(1));
        assert_eq!(refl.sample(0, 0.8), Direction(2));
    }

    #[test]
    fn rounding_gap_never_picks_zero_probability_move() {
        let p = SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap();
        let env = TorusEnvironment::constant(1, 1, &p).unwrap();
        let table = StepTable::new(&env, &EnvironmentTransform::Identity);
        assert_eq!(table.sample(0, 1.0), Direction(1));
    }
}
