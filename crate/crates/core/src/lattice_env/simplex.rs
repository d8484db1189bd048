use serde::{Deserialize, Serialize};

use super::Direction;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Probability vector over the 2d+1 moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real")]
pub struct SimplexPoint<T> {
    probs: Vec<T>,
}

impl<T: Real> SimplexPoint<T> {
    /// Validates the weights; never renormalises.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        validate(&weights)?;
        Ok(SimplexPoint { probs: weights })
    }

    pub fn pure_hold(d: usize) -> Self {
        let mut probs = vec![T::zero(); 2 * d + 1];
        probs[0] = T::one();
        SimplexPoint { probs }
    }

    /// No hold, every direction `1/(2d)`.
    pub fn simple(d: usize) -> Self {
        let q = T::one() / T::lit((2 * d) as f64);
        let mut probs = vec![q; 2 * d + 1];
        probs[0] = T::zero();
        SimplexPoint { probs }
    }

    pub(crate) fn from_trusted(probs: Vec<T>) -> Self {
        debug_assert!(validate(&probs).is_ok(), "{probs:?}");
        SimplexPoint { probs }
    }

    pub fn dim(&self) -> usize {
        (self.probs.len() - 1) / 2
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, dir: Direction) -> T {
        self.probs[dir.index()]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }
}

impl<T: Real> TryFrom<Vec<T>> for SimplexPoint<T> {
    type Error = Error;

    fn try_from(v: Vec<T>) -> Result<Self> {
        SimplexPoint::new(v)
    }
}

impl<T> From<SimplexPoint<T>> for Vec<T> {
    fn from(p: SimplexPoint<T>) -> Vec<T> {
        p.probs
    }
}

pub(crate) fn validate<T: Real>(weights: &[T]) -> Result<()> {
    if weights.len() < 3 || weights.len().is_multiple_of(2) {
        return Err(Error::InvalidLength(weights.len()));
    }
    for (index, &w) in weights.iter().enumerate() {
        if !(w >= T::zero()) || !w.is_finite() {
            return Err(Error::NegativeWeight {
                index,
                value: w.as_f64(),
            });
        }
    }
    let sum: T = weights.iter().copied().sum();
    if (sum - T::one()).abs() > T::simplex_tol() {
        return Err(Error::NotNormalized { sum: sum.as_f64() });
    }
    Ok(())
}
