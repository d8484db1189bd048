//! Small statistical helpers shared by the ergodic checks and the tests.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::scalar::Real;

/// Sample mean and covariance (divisor `N - 1`) of vector samples.
pub fn mean_cov<T: Real>(samples: &[Vec<T>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let Some(first) = samples.first() else {
        return (Vec::new(), Vec::new());
    };
    let d = first.len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x.as_f64();
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![vec![0.0; d]; d];
    for s in samples {
        for i in 0..d {
            let a = s[i].as_f64() - mean[i];
            for j in 0..d {
                cov[i][j] += a * (s[j].as_f64() - mean[j]);
            }
        }
    }
    let denom = (n - 1.0).max(1.0);
    cov.iter_mut().flatten().for_each(|c| *c /= denom);
    (mean, cov)
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Frobenius norm of `a - b` divided by that of `b`.
pub fn frobenius_rel_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            num += (x - y).powi(2);
            den += y * y;
        }
    }
    (num / den).sqrt()
}

/// Lower Cholesky factor; `None` unless the matrix is positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// Asymptotic Kolmogorov tail `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against `N(mean, sd^2)`.
pub fn ks_normal(samples: &[f64], mean: f64, sd: f64) -> TestOutcome {
    let normal = Normal::new(mean, sd).expect("positive standard deviation");
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut dmax: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal.cdf(x);
        dmax = dmax.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    let p = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * dmax);
    TestOutcome {
        statistic: dmax,
        p_value: p,
        dof: 0,
    }
}

/// Two-sample chi-square homogeneity test on categorical counts. Cells with
/// fewer than `min_cell` pooled observations are merged into one bin.
pub fn chi_square_two_sample<K: Ord + Clone>(
    a: &BTreeMap<K, u64>,
    b: &BTreeMap<K, u64>,
    min_cell: u64,
) -> TestOutcome {
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut rare = (0.0, 0.0);
    for k in keys {
        let ca = a.get(k).copied().unwrap_or(0);
        let cb = b.get(k).copied().unwrap_or(0);
        if ca + cb < min_cell {
            rare.0 += ca as f64;
            rare.1 += cb as f64;
        } else {
            cells.push((ca as f64, cb as f64));
        }
    }
    if rare.0 + rare.1 > 0.0 {
        cells.push(rare);
    }
    let na: f64 = cells.iter().map(|c| c.0).sum();
    let nb: f64 = cells.iter().map(|c| c.1).sum();
    let total = na + nb;
    if cells.len() < 2 || na == 0.0 || nb == 0.0 {
        return TestOutcome {
            statistic: 0.0,
            p_value: 1.0,
            dof: 0,
        };
    }
    let mut stat = 0.0;
    for &(ca, cb) in &cells {
        let row = ca + cb;
        let ea = row * na / total;
        let eb = row * nb / total;
        stat += (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb;
    }
    let dof = cells.len() - 1;
    let p = ChiSquared::new(dof as f64)
        .map(|c| c.sf(stat))
        .unwrap_or(1.0);
    TestOutcome {
        statistic: stat,
        p_value: p,
        dof,
    }
}

/// Total variation distance between two probability tables.
pub fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let keys: BTreeSet<&K> = p.keys().chain(q.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Normal quantile, used for confidence bands.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}
