use serde::{Deserialize, Serialize};

/// One of the 2d+1 nearest-neighbour moves.
///
/// Index 0 is the hold move, `1..=d` are `+e_i` and `d+1..=2d` are `-e_i`.
/// This ordering is also the inverse-CDF ordering used by the walk sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(pub usize);

impl Direction {
    pub const HOLD: Direction = Direction(0);

    pub fn plus(axis: usize) -> Self {
        Direction(axis + 1)
    }

    pub fn minus(axis: usize, d: usize) -> Self {
        Direction(axis + 1 + d)
    }

    pub fn all(d: usize) -> impl Iterator<Item = Direction> {
        (0..=2 * d).map(Direction)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_hold(self) -> bool {
        self.0 == 0
    }

    /// Axis and sign (+1 / -1) of a non-hold move.
    pub fn axis_sign(self, d: usize) -> Option<(usize, i64)> {
        match self.0 {
            0 => None,
            i if i <= d => Some((i - 1, 1)),
            i => Some((i - 1 - d, -1)),
        }
    }

    pub fn negate(self, d: usize) -> Self {
        match self.0 {
            0 => self,
            i if i <= d => Direction(i + d),
            i => Direction(i - d),
        }
    }

    pub fn from_axis_sign(axis: usize, sign: i64, d: usize) -> Self {
        if sign > 0 {
            Direction::plus(axis)
        } else {
            Direction::minus(axis, d)
        }
    }

    pub fn displacement(self, d: usize) -> Vec<i64> {
        let mut v = vec![0; d];
        if let Some((axis, sign)) = self.axis_sign(d) {
            v[axis] = sign;
        }
        v
    }
}

/// Signed permutation of the coordinate axes, acting on the lattice and on
/// the move set. `T e_i = signs[i] * e_{axes[i]}`; the hold move is fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectionPermutation {
    axes: Vec<usize>,
    signs: Vec<i64>,
}

impl DirectionPermutation {
    pub fn identity(d: usize) -> Self {
        DirectionPermutation {
            axes: (0..d).collect(),
            signs: vec![1; d],
        }
    }

    /// Returns `None` unless `axes` is a permutation and every sign is ±1.
    pub fn new(axes: Vec<usize>, signs: Vec<i64>) -> Option<Self> {
        let d = axes.len();
        if signs.len() != d || signs.iter().any(|s| s.abs() != 1) {
            return None;
        }
        let mut seen = vec![false; d];
        for &a in &axes {
            if a >= d || seen[a] {
                return None;
            }
            seen[a] = true;
        }
        Some(DirectionPermutation { axes, signs })
    }

    /// All `d! 2^d` signed coordinate permutations.
    pub fn all(d: usize) -> Vec<Self> {
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (0..d).collect();
        permutations(&mut current, 0, &mut perms);
        let mut out = Vec::with_capacity(perms.len() << d);
        for axes in perms {
            for mask in 0..(1u32 << d) {
                let signs = (0..d)
                    .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                    .collect();
                out.push(DirectionPermutation {
                    axes: axes.clone(),
                    signs,
                });
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn apply_point(&self, x: &[i64]) -> Vec<i64> {
        let mut y = vec![0; x.len()];
        for (i, &xi) in x.iter().enumerate() {
            y[self.axes[i]] = self.signs[i] * xi;
        }
        y
    }

    pub fn apply_direction(&self, dir: Direction) -> Direction {
        let d = self.dim();
        match dir.axis_sign(d) {
            None => dir,
            Some((axis, sign)) => {
                Direction::from_axis_sign(self.axes[axis], sign * self.signs[axis], d)
            }
        }
    }

    pub fn inverse(&self) -> Self {
        let d = self.dim();
        let mut axes = vec![0; d];
        let mut signs = vec![1; d];
        for i in 0..d {
            axes[self.axes[i]] = i;
            signs[self.axes[i]] = self.signs[i];
        }
        DirectionPermutation { axes, signs }
    }
}

fn permutations(current: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == current.len() {
        out.push(current.clone());
        return;
    }
    for i in k..current.len() {
        current.swap(k, i);
        permutations(current, k + 1, out);
        current.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negation_pairs_opposite_moves() {
        let d = 3;
        assert_eq!(Direction::HOLD.negate(d), Direction::HOLD);
        for i in 1..=d {
            assert_eq!(Direction(i).negate(d), Direction(i + d));
            assert_eq!(Direction(i + d).negate(d), Direction(i));
        }
    }

    #[test]
    fn permutation_count_and_inverse() {
        for d in 1..=3 {
            let all = DirectionPermutation::all(d);
            let expected = (1..=d).product::<usize>() << d;
            assert_eq!(all.len(), expected);
            for t in &all {
                let inv = t.inverse();
                let x: Vec<i64> = (0..d as i64).map(|i| 3 * i - 2).collect();
                assert_eq!(inv.apply_point(&t.apply_point(&x)), x);
                for dir in Direction::all(d) {
                    assert_eq!(inv.apply_direction(t.apply_direction(dir)), dir);
                    // the move map is the lattice map on unit vectors
                    assert_eq!(
                        t.apply_direction(dir).displacement(d),
                        t.apply_point(&dir.displacement(d))
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(DirectionPermutation::new(vec![0, 0], vec![1, 1]).is_none());
        assert!(DirectionPermutation::new(vec![1, 0], vec![1, 2]).is_none());
        assert!(DirectionPermutation::new(vec![1, 0], vec![-1, 1]).is_some());
    }
}
