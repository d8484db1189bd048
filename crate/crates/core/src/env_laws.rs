//! Seeded samplers for environment laws.
//!
//! Each site is drawn from its own stream `rng::stream(seed, DOMAIN_LAW, site)`,
//! so sampling is order independent and runs data-parallel.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice_env::{ellipticity_field, EnvironmentTransform, SimplexPoint, TorusEnvironment};
use crate::rng::{stream, DOMAIN_LAW};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum LawKind<T> {
    /// Every site carries the same point.
    Constant(SimplexPoint<T>),
    /// I.i.d. Dirichlet sites; `None` means all concentrations equal to 1.
    IidDirichlet(Option<Vec<f64>>),
    /// Balanced sites, all 2d moves with probability `s/(2d)`, hold `1-s`,
    /// `s ~ Beta(kappa, 1)`. `E[c^-p]` is finite exactly when `p < kappa`.
    ControlledTail { kappa: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LawSpec<T> {
    pub kind: LawKind<T>,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
}

impl<T: Real> LawSpec<T> {
    pub fn new(kind: LawKind<T>, d: usize, n: usize, seed: u64) -> Self {
        LawSpec { kind, d, n, seed }
    }

    pub fn with_size(&self, n: usize) -> Self {
        LawSpec { n, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        LawSpec {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::InvalidSpec(format!(
                "need d >= 1 and n >= 1 (d={}, n={})",
                self.d, self.n
            )));
        }
        match &self.kind {
            LawKind::Constant(p) if p.dim() != self.d => Err(Error::InvalidSpec(format!(
                "constant point has dimension {}, law has {}",
                p.dim(),
                self.d
            ))),
            LawKind::IidDirichlet(Some(alpha)) => {
                if alpha.len() != 2 * self.d + 1 {
                    Err(Error::InvalidSpec(format!(
                        "need {} concentrations, got {}",
                        2 * self.d + 1,
                        alpha.len()
                    )))
                } else if alpha.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    Err(Error::InvalidSpec(
                        "Dirichlet concentrations must be positive".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            LawKind::ControlledTail { kappa } if !(*kappa > 0.0) || !kappa.is_finite() => Err(
                Error::InvalidSpec(format!("ControlledTail needs kappa > 0, got {kappa}")),
            ),
            _ => Ok(()),
        }
    }
}

pub fn sample_environment<T: Real>(spec: &LawSpec<T>) -> Result<TorusEnvironment<T>> {
    spec.validate()?;
    let (d, n) = (spec.d, spec.n);
    let count = (2 * n).pow(d as u32);
    let sites: Vec<SimplexPoint<T>> = match &spec.kind {
        LawKind::Constant(p) => vec![p.clone(); count],
        LawKind::IidDirichlet(alpha) => {
            let alpha = alpha.clone().unwrap_or_else(|| vec![1.0; 2 * d + 1]);
            let gammas = alpha
                .iter()
                .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::InvalidSpec(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            (0..count)
                .into_par_iter()
                .map(|site| {
                    let mut rng = stream(spec.seed, DOMAIN_LAW, site as u64);
                    dirichlet_site(&gammas, &mut rng)
                })
                .collect()
        }
        LawKind::ControlledTail { kappa } => (0..count)
            .into_par_iter()
            .map(|site| {
                let mut rng = stream(spec.seed, DOMAIN_LAW, site as u64);
                let u: f64 = Open01.sample(&mut rng);
                let s = u.powf(1.0 / kappa);
                controlled_tail_site(s, d)
            })
            .collect(),
    };
    TorusEnvironment::new(d, n, sites)
}

fn dirichlet_site<T: Real, R: Rng>(gammas: &[Gamma<f64>], rng: &mut R) -> SimplexPoint<T> {
    loop {
        let g: Vec<f64> = gammas.iter().map(|dist| dist.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let mut probs: Vec<T> = g.iter().map(|x| T::lit(x / total)).collect();
        // put the rounding remainder on the largest entry so the sum is exact to a few ulps
        let k = (0..probs.len())
            .max_by(|&a, &b| probs[a].partial_cmp(&probs[b]).unwrap())
            .unwrap();
        let rest: T = probs
            .iter()
            .enumerate()
            .filter(|e| e.0 != k)
            .map(|e| *e.1)
            .sum();
        probs[k] = (T::one() - rest).max(T::zero());
        if let Ok(p) = SimplexPoint::new(probs) {
            return p;
        }
    }
}

/// Site with hold `1 - s` and every move `s / (2d)`.
pub fn controlled_tail_site<T: Real>(s: f64, d: usize) -> SimplexPoint<T> {
    let q = T::lit(s / (2 * d) as f64);
    let mut probs = vec![q; 2 * d + 1];
    probs[0] = T::one() - T::lit((2 * d) as f64) * q;
    SimplexPoint::from_trusted(probs)
}

/// `(1/(2n)^d) sum_x c(E, x)^{-p}`.
pub fn empirical_c_moment<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    p: f64,
) -> Result<T> {
    if !(p > 0.0) {
        return Err(Error::InvalidExponent(p));
    }
    let c = ellipticity_field(env, t);
    if let Some(index) = c.iter().position(|&v| v <= T::zero()) {
        return Err(Error::DegenerateSite { index });
    }
    let pt = T::lit(p);
    Ok(c.iter().map(|&v| v.powf(-pt)).sum::<T>() / T::lit(c.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_env::is_balanced;

    #[test]
    fn constant_law() {
        let p = SimplexPoint::new(vec![0.2, 0.4, 0.4]).unwrap();
        let env =
            sample_environment(&LawSpec::new(LawKind::Constant(p.clone()), 1, 3, 17)).unwrap();
        assert!(env.sites().all(|s| s == p.probs()));
        let m: f64 = empirical_c_moment(&env, &EnvironmentTransform::Identity, 2.0).unwrap();
        assert!((m - 6.25).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        for kind in [
            LawKind::IidDirichlet(None),
            LawKind::ControlledTail { kappa: 2.5 },
        ] {
            let spec = LawSpec::<f64>::new(kind, 2, 4, 1234);
            let a = sample_environment(&spec).unwrap();
            let b = sample_environment(&spec).unwrap();
            assert_eq!(a.raw(), b.raw());
            let c = sample_environment(&spec.with_seed(1235)).unwrap();
            assert_ne!(a.raw(), c.raw());
        }
    }

    #[test]
    fn parallel_matches_sequential_stream() {
        let spec = LawSpec::<f64>::new(LawKind::ControlledTail { kappa: 3.0 }, 1, 8, 5);
        let env = sample_environment(&spec).unwrap();
        for site in 0..env.num_sites() {
            let mut rng = stream(5, DOMAIN_LAW, site as u64);
            let u: f64 = Open01.sample(&mut rng);
            let expected = controlled_tail_site::<f64>(u.powf(1.0 / 3.0), 1);
            assert_eq!(env.site_probs(site), expected.probs());
        }
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            LawSpec::<f64>::new(LawKind::ControlledTail { kappa: 0.0 }, 1, 2, 0),
            LawSpec::new(LawKind::ControlledTail { kappa: -1.0 }, 1, 2, 0),
            LawSpec::new(LawKind::IidDirichlet(Some(vec![1.0, 0.0, 1.0])), 1, 2, 0),
            LawSpec::new(LawKind::IidDirichlet(Some(vec![1.0, 1.0])), 1, 2, 0),
            LawSpec::new(LawKind::Constant(SimplexPoint::pure_hold(2)), 1, 2, 0),
            LawSpec::new(LawKind::IidDirichlet(None), 0, 2, 0),
        ];
        for spec in bad {
            assert!(
                matches!(sample_environment(&spec), Err(Error::InvalidSpec(_))),
                "{spec:?}"
            );
        }
    }

    #[test]
    fn controlled_tail_is_balanced_and_elliptic() {
        let spec = LawSpec::<f64>::new(LawKind::ControlledTail { kappa: 0.5 }, 3, 3, 9);
        let env = sample_environment(&spec).unwrap();
        assert!(is_balanced(&env, &EnvironmentTransform::Identity));
        assert!(env.sites().all(|s| s[1..].iter().all(|&p| p > 0.0)));
    }

    #[test]
    fn degenerate_site_is_reported() {
        let p = SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap();
        let env = TorusEnvironment::constant(1, 1, &p).unwrap();
        assert!(matches!(
            empirical_c_moment(&env, &EnvironmentTransform::Identity, 1.0),
            Err(Error::DegenerateSite { index: 0 })
        ));
    }

    #[test]
    fn moment_monotone_in_p_when_c_below_one() {
        let spec = LawSpec::<f64>::new(LawKind::IidDirichlet(None), 2, 3, 4);
        let env = sample_environment(&spec).unwrap();
        let t = EnvironmentTransform::Identity;
        let ms: Vec<f64> = [0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&p| empirical_c_moment(&env, &t, p).unwrap())
            .collect();
        assert!(ms.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn f32_sampling() {
        let spec = LawSpec::<f32>::new(LawKind::IidDirichlet(None), 2, 2, 4);
        let env = sample_environment(&spec).unwrap();
        assert_eq!(env.num_sites(), 16);
    }
}
