use serde::{Deserialize, Serialize};

use super::{Direction, SimplexPoint};
use crate::scalar::Real;

/// Sitewise map from the simplex to itself.
///
/// `Embedding` averages opposite directions, `Reflection` swaps them, and a
/// `Composition` applies its members left to right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentTransform {
    #[default]
    Identity,
    Embedding,
    Reflection,
    Composition(Vec<EnvironmentTransform>),
}

impl EnvironmentTransform {
    pub fn then(self, next: EnvironmentTransform) -> Self {
        match self {
            EnvironmentTransform::Composition(mut v) => {
                v.push(next);
                EnvironmentTransform::Composition(v)
            }
            other => EnvironmentTransform::Composition(vec![other, next]),
        }
    }

    pub fn apply<T: Real>(&self, p: &SimplexPoint<T>) -> SimplexPoint<T> {
        let d = p.dim();
        let out = Direction::all(d)
            .map(|dir| self.prob_of(p.probs(), dir, d))
            .collect();
        SimplexPoint::from_trusted(out)
    }

    /// Probability the transformed point assigns to `dir`, evaluated lazily
    /// from the raw probabilities.
    pub fn prob_of<T: Real>(&self, probs: &[T], dir: Direction, d: usize) -> T {
        match self {
            EnvironmentTransform::Identity => probs[dir.index()],
            EnvironmentTransform::Reflection => probs[dir.negate(d).index()],
            EnvironmentTransform::Embedding => {
                if dir.is_hold() {
                    probs[0]
                } else {
                    (probs[dir.index()] + probs[dir.negate(d).index()]) / T::lit(2.0)
                }
            }
            EnvironmentTransform::Composition(parts) => composed(parts, probs, dir, d),
        }
    }

    /// Writes the transformed probabilities of `src` into `dst`.
    pub fn apply_slice<T: Real>(&self, src: &[T], dst: &mut [T], d: usize) {
        for (k, out) in dst.iter_mut().enumerate() {
            *out = self.prob_of(src, Direction(k), d);
        }
    }
}

fn composed<T: Real>(parts: &[EnvironmentTransform], probs: &[T], dir: Direction, d: usize) -> T {
    let Some((last, rest)) = parts.split_last() else {
        return probs[dir.index()];
    };
    match last {
        EnvironmentTransform::Identity => composed(rest, probs, dir, d),
        EnvironmentTransform::Reflection => composed(rest, probs, dir.negate(d), d),
        EnvironmentTransform::Embedding => {
            if dir.is_hold() {
                composed(rest, probs, dir, d)
            } else {
                (composed(rest, probs, dir, d) + composed(rest, probs, dir.negate(d), d))
                    / T::lit(2.0)
            }
        }
        EnvironmentTransform::Composition(inner) => {
            let mut flat = rest.to_vec();
            flat.extend(inner.iter().cloned());
            composed(&flat, probs, dir, d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> SimplexPoint<f64> {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn named_examples() {
        let p = pt(&[0.2, 0.7, 0.1]);
        let e = EnvironmentTransform::Embedding.apply(&p);
        for (a, b) in e.probs().iter().zip([0.2, 0.4, 0.4]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(
            EnvironmentTransform::Reflection.apply(&p).probs(),
            &[0.2, 0.1, 0.7]
        );
        assert_eq!(EnvironmentTransform::Identity.apply(&p), p);
        let rr = EnvironmentTransform::Reflection.then(EnvironmentTransform::Reflection);
        assert_eq!(rr.apply(&p), p);
    }

    #[test]
    fn composition_is_left_to_right() {
        // embedding after reflection equals embedding alone
        let p = pt(&[0.1, 0.3, 0.05, 0.2, 0.35]);
        let ar = EnvironmentTransform::Reflection.then(EnvironmentTransform::Embedding);
        assert_eq!(ar.apply(&p), EnvironmentTransform::Embedding.apply(&p));
        // nested compositions flatten
        let nested = EnvironmentTransform::Composition(vec![
            EnvironmentTransform::Composition(vec![EnvironmentTransform::Reflection]),
            EnvironmentTransform::Identity,
        ]);
        assert_eq!(nested.apply(&p), EnvironmentTransform::Reflection.apply(&p));
    }

    fn simplex_strategy() -> impl Strategy<Value = SimplexPoint<f64>> {
        (1usize..=3).prop_flat_map(|d| {
            prop::collection::vec(0.0f64..1.0, 2 * d + 1).prop_map(|w| {
                let s: f64 = w.iter().sum::<f64>() + 1e-9;
                let mut v: Vec<f64> = w.iter().map(|x| (x + 1e-9 / w.len() as f64) / s).collect();
                let rest: f64 = v[1..].iter().sum();
                v[0] = 1.0 - rest;
                SimplexPoint::new(v).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn transforms_stay_in_simplex(p in simplex_strategy()) {
            let d = p.dim();
            for t in [EnvironmentTransform::Identity, EnvironmentTransform::Embedding, EnvironmentTransform::Reflection] {
                let q = t.apply(&p);
                prop_assert!(SimplexPoint::new(q.probs().to_vec()).is_ok());
            }
            let e = EnvironmentTransform::Embedding.apply(&p);
            for i in 1..=d {
                prop_assert_eq!(e.probs()[i], e.probs()[i + d]);
            }
            // idempotent, and reflection is an involution, bit for bit
            prop_assert_eq!(EnvironmentTransform::Embedding.apply(&e), e);
            let r = EnvironmentTransform::Reflection;
            prop_assert_eq!(r.apply(&r.apply(&p)), p);
        }
    }
}
