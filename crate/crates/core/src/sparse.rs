//! Row-compressed sparse matrices and a sparse Gaussian elimination.
//!
//! The elimination does not pivot. Every system solved in this crate is
//! either diagonally dominant (`I - beta L`, `I - P` on a killed domain) or an
//! M-matrix with the normalisation row eliminated last, where elimination
//! without pivoting is stable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SparseMatrix {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: (0..n).map(|i| vec![(i, T::one())]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Adds `value` to entry `(i, j)`; repeated entries accumulate.
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(k) => row[k].1 = row[k].1 + value,
            Err(k) => row.insert(k, (j, value)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |e| e.0)
            .map(|k| row[k].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    /// `x^T A`, accumulated row by row in index order.
    pub fn vec_mul(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for &(j, a) in row {
                out[j] = out[j] + xi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                rows[j].push((i, a));
            }
        }
        SparseMatrix { rows }
    }

    /// `alpha I + beta A`.
    pub fn scaled_shift(&self, alpha: T, beta: T) -> Self {
        let mut out = SparseMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, a)| (j, beta * a)).collect())
                .collect(),
        };
        for i in 0..self.dim() {
            out.add(i, i, alpha);
        }
        out
    }

    pub fn replace_row(&mut self, i: usize, row: Vec<(usize, T)>) {
        let mut row = row;
        row.sort_by_key(|e| e.0);
        self.rows[i] = row;
    }

    /// Solves `A x = b` by sparse LU, eliminating unknowns in `order`
    /// (a permutation of `0..n`; natural order when `None`).
    pub fn solve(&self, b: &[T], order: Option<&[usize]>) -> Result<Vec<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let perm: Vec<usize> = order
            .map(<[usize]>::to_vec)
            .unwrap_or_else(|| (0..n).collect());
        let mut pos = vec![usize::MAX; n];
        for (k, &p) in perm.iter().enumerate() {
            pos[p] = k;
        }
        assert!(
            pos.iter().all(|&p| p != usize::MAX),
            "order must be a permutation"
        );

        let eps = T::epsilon() * T::lit(64.0);
        let mut lower: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
        let mut upper: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
        for i in 0..n {
            let src = &self.rows[perm[i]];
            let scale = src.iter().fold(T::zero(), |m, e| m.max(e.1.abs()));
            let mut work: BTreeMap<usize, T> = src.iter().map(|&(j, a)| (pos[j], a)).collect();
            let mut l_row = Vec::new();
            let mut cursor = 0;
            while let Some((&k, &v)) = work.range(cursor..i).next() {
                cursor = k + 1;
                work.remove(&k);
                if v == T::zero() {
                    continue;
                }
                let u_row: &Vec<(usize, T)> = &upper[k];
                let factor = v / u_row[0].1;
                l_row.push((k, factor));
                for &(j, u) in &u_row[1..] {
                    let e = work.entry(j).or_insert(T::zero());
                    *e = *e - factor * u;
                }
            }
            let diag = work.get(&i).copied().unwrap_or(T::zero());
            if !(diag.abs() > eps * scale.max(T::min_positive_value())) {
                return Err(Error::SingularSystem { pivot: perm[i] });
            }
            let mut u_row = Vec::with_capacity(work.len());
            u_row.push((i, diag));
            u_row.extend(
                work.range(i + 1..)
                    .map(|(&j, &a)| (j, a))
                    .filter(|e| e.1 != T::zero()),
            );
            lower.push(l_row);
            upper.push(u_row);
        }

        let mut y: Vec<T> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = lower[i].iter().fold(y[i], |acc, &(k, l)| acc - l * y[k]);
            y[i] = s;
        }
        for i in (0..n).rev() {
            let row = &upper[i];
            let s = row[1..].iter().fold(y[i], |acc, &(j, u)| acc - u * y[j]);
            y[i] = s / row[0].1;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tridiagonal_solve() {
        // -x'' = 1 on 5 interior nodes
        let n = 5;
        let mut a = SparseMatrix::<f64>::zeros(n);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let x = a.solve(&[1.0; 5], None).unwrap();
        // closed form: x_i = (i+1)(n-i)/2
        for (i, xi) in x.iter().enumerate() {
            let expected = ((i + 1) * (n - i)) as f64 / 2.0;
            assert!((xi - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_zero_row() {
        let mut a = SparseMatrix::<f64>::identity(3);
        a.replace_row(1, vec![]);
        assert!(matches!(
            a.solve(&[1.0, 1.0, 1.0], None),
            Err(Error::SingularSystem { pivot: 1 })
        ));
    }

    #[test]
    fn accumulates_duplicates() {
        let mut a = SparseMatrix::<f64>::zeros(2);
        a.add(0, 1, 0.4);
        a.add(0, 1, 0.4);
        assert_eq!(a.get(0, 1), 0.8);
        assert_eq!(a.nnz(), 1);
    }

    proptest! {
        #[test]
        fn solves_diagonally_dominant_systems(
            entries in prop::collection::vec((0usize..12, 0usize..12, -1.0f64..1.0), 0..60),
            b in prop::collection::vec(-5.0f64..5.0, 12),
            reverse in any::<bool>(),
        ) {
            let n = 12;
            let mut a = SparseMatrix::<f64>::zeros(n);
            for &(i, j, v) in &entries {
                if i != j { a.add(i, j, v); }
            }
            for i in 0..n {
                let off: f64 = a.row(i).iter().filter(|e| e.0 != i).map(|e| e.1.abs()).sum();
                a.add(i, i, off + 0.5);
            }
            let order: Vec<usize> = if reverse { (0..n).rev().collect() } else { (0..n).collect() };
            let x = a.solve(&b, Some(&order)).unwrap();
            let r = a.mul_vec(&x);
            for i in 0..n {
                prop_assert!((r[i] - b[i]).abs() < 1e-10);
            }
            let xt = a.transpose().vec_mul(&x);
            prop_assert_eq!(xt.len(), n);
            for i in 0..n {
                prop_assert!((xt[i] - r[i]).abs() < 1e-10);
            }
        }
    }
}
