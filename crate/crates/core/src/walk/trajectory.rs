use std::fmt::Write as _;

use serde::Serialize;

use crate::lattice_env::{l1, Direction, SimplexPoint};
use crate::scalar::Real;

/// Dense record of a walk: `steps + 1` positions and, for coupled walks,
/// the switch bits (`true` = original kernel, `false` = reflected kernel).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    d: usize,
    positions: Vec<i64>,
    gammas: Option<Vec<bool>>,
}

impl Trajectory {
    pub(crate) fn with_capacity(start: &[i64], steps: usize, coupled: bool) -> Self {
        let mut positions = Vec::with_capacity((steps + 1) * start.len());
        positions.extend_from_slice(start);
        Trajectory {
            d: start.len(),
            positions,
            gammas: coupled.then(|| Vec::with_capacity(steps)),
        }
    }

    pub(crate) fn push(&mut self, pos: &[i64], gamma: Option<bool>) {
        self.positions.extend_from_slice(pos);
        if let (Some(g), Some(gs)) = (gamma, self.gammas.as_mut()) {
            gs.push(g);
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn steps(&self) -> usize {
        self.positions.len() / self.d - 1
    }

    pub fn start(&self) -> &[i64] {
        self.position(0)
    }

    pub fn position(&self, k: usize) -> &[i64] {
        &self.positions[k * self.d..(k + 1) * self.d]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[i64]> {
        self.positions.chunks_exact(self.d)
    }

    pub fn end(&self) -> &[i64] {
        self.position(self.steps())
    }

    pub fn gammas(&self) -> Option<&[bool]> {
        self.gammas.as_deref()
    }

    /// Move taken at step `k` (from `k` to `k+1`), if it is a lattice move.
    pub fn increment(&self, k: usize) -> Option<Direction> {
        let (a, b) = (self.position(k), self.position(k + 1));
        let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        if l1(&diff) == 0 {
            return Some(Direction::HOLD);
        }
        if l1(&diff) != 1 {
            return None;
        }
        let axis = diff.iter().position(|&c| c != 0)?;
        Some(Direction::from_axis_sign(axis, diff[axis], self.d))
    }

    /// `step,x_1..x_d,gamma`; gamma blank for uncoupled walks and for step 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for i in 1..=self.d {
            let _ = write!(out, ",x_{i}");
        }
        out.push_str(",gamma\n");
        for (k, x) in self.positions().enumerate() {
            let _ = write!(out, "{k}");
            for c in x {
                let _ = write!(out, ",{c}");
            }
            let g = match (&self.gammas, k) {
                (Some(gs), k) if k > 0 => (gs[k - 1] as u8).to_string(),
                _ => String::new(),
            };
            let _ = writeln!(out, ",{g}");
        }
        out
    }
}

/// Simplex points seen by the walker, with the torus site they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalProcessPath<T> {
    pub points: Vec<SimplexPoint<T>>,
    pub sites: Vec<usize>,
}

/// Aggregate of an ensemble of endpoints, serialised into reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub count: usize,
    pub steps: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
}

impl EnsembleSummary {
    pub fn from_samples<T: Real>(samples: &[Vec<T>], steps: usize, seeds: Vec<u64>) -> Self {
        let (mean, covariance) = crate::stats::mean_cov(samples);
        EnsembleSummary {
            count: samples.len(),
            steps,
            mean,
            covariance,
            seeds,
        }
    }
}
