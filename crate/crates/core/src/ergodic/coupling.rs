use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice_env::{Direction, EnvironmentTransform, TorusEnvironment};
use crate::rng::{child_seed, stream, DOMAIN_GAMMA, DOMAIN_WALK};
use crate::scalar::Real;
use crate::stats::{chi_square_two_sample, total_variation, TestOutcome};
use crate::torus_spectral::{build_kernel, invariant_density, InvariantDensity, SiteSampler};
use crate::walk::{CoupledTables, StepTable, TorusCursor};

pub const COUPLING_ALPHA: f64 = 0.01;
pub const MAX_COUPLING_HORIZON: usize = 4;
/// Cells with fewer pooled counts are merged before the chi-square test.
pub const MIN_CELL_COUNT: u64 = 10;
const ALL_ONES_PATHS: usize = 1000;
const EXACT_LAW_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub d: usize,
    pub n: usize,
    pub horizon: usize,
    pub paths: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Two-sample tests on the point sequences of length `h + 1`, `h = 1..=horizon`.
    pub tests: Vec<TestOutcome>,
    /// Bonferroni-adjusted smallest p-value.
    pub adjusted_p: f64,
    pub pass: bool,
    /// Coupled walk with every switch on reproduced the original walk.
    pub all_ones_identical: bool,
    /// Exact total variation between the two path laws per horizon, when
    /// enumeration is small enough.
    pub exact_tv: Option<Vec<f64>>,
}

type PathCounts = BTreeMap<Vec<u32>, u64>;

/// Tags each site with the identity of its simplex point, so the local
/// process is compared as a sequence of points; sites sharing a point share
/// a tag.
pub fn point_tags<T: Real>(env: &TorusEnvironment<T>) -> Vec<u32> {
    let mut ids: HashMap<Vec<u64>, u32> = HashMap::new();
    env.sites()
        .map(|p| {
            let key: Vec<u64> = p.iter().map(|v| v.as_f64().to_bits()).collect();
            let next = ids.len() as u32;
            *ids.entry(key).or_insert(next)
        })
        .collect()
}

fn counts(paths: &[Vec<u32>], len: usize) -> PathCounts {
    let mut out = PathCounts::new();
    for p in paths {
        *out.entry(p[..len].to_vec()).or_insert(0) += 1;
    }
    out
}

/// Compares the local processes (sequences of simplex points, tagged by
/// [`point_tags`]) of the original walk and of the Bernoulli-coupled walk
/// over `horizon` steps, both started from the invariant density of the
/// embedded walk.
pub fn coupling_distribution_test<T: Real>(
    env: &TorusEnvironment<T>,
    horizon: usize,
    paths: usize,
    seed: u64,
) -> Result<CouplingReport> {
    if horizon == 0 || horizon > MAX_COUPLING_HORIZON {
        return Err(Error::InvalidSpec(format!(
            "horizon must be in 1..={MAX_COUPLING_HORIZON}, got {horizon}"
        )));
    }
    if paths == 0 {
        return Err(Error::InvalidSpec("need at least one path".into()));
    }
    let (d, n) = (env.dim(), env.half_period());
    let density = invariant_density(&build_kernel(env, &EnvironmentTransform::Embedding), 1e-10)?;
    let sampler = SiteSampler::new(&density);
    let tags = point_tags(env);
    let tables = CoupledTables::new(env);
    let (seed_orig, seed_coupled) = (child_seed(seed, 1), child_seed(seed, 2));

    let original = |p: usize, table: &StepTable<T>| -> Vec<u32> {
        let start = sampler.sample(seed_orig, p as u64);
        let mut rng = stream(seed_orig, DOMAIN_WALK, p as u64);
        let mut cur = TorusCursor::new(&start, n);
        let mut sites = vec![tags[cur.site()]];
        for _ in 0..horizon {
            let dir = table.draw(cur.site(), &mut rng);
            cur.step(dir);
            sites.push(tags[cur.site()]);
        }
        sites
    };
    let coupled = |p: usize, seed_walk: u64, force: Option<bool>| -> Vec<u32> {
        let start = sampler.sample(seed_walk, p as u64);
        let mut rng = stream(seed_walk, DOMAIN_WALK, p as u64);
        let mut switch = stream(seed_walk, DOMAIN_GAMMA, p as u64);
        let mut cur = TorusCursor::new(&start, n);
        let mut sites = vec![tags[cur.site()]];
        for _ in 0..horizon {
            let g = force.unwrap_or_else(|| switch.random_bool(0.5));
            let table = if g {
                &tables.original
            } else {
                &tables.reflected
            };
            let dir = table.draw(cur.site(), &mut rng);
            cur.step(dir);
            sites.push(tags[cur.site()]);
        }
        sites
    };

    let a: Vec<Vec<u32>> = (0..paths)
        .into_par_iter()
        .map(|p| original(p, &tables.original))
        .collect();
    let b: Vec<Vec<u32>> = (0..paths)
        .into_par_iter()
        .map(|p| coupled(p, seed_coupled, None))
        .collect();
    let tests: Vec<TestOutcome> = (1..=horizon)
        .map(|h| chi_square_two_sample(&counts(&a, h + 1), &counts(&b, h + 1), MIN_CELL_COUNT))
        .collect();
    let min_p = tests.iter().map(|t| t.p_value).fold(1.0, f64::min);
    let adjusted_p = (min_p * horizon as f64).min(1.0);

    let all_ones_identical = (0..paths.min(ALL_ONES_PATHS))
        .into_par_iter()
        .all(|p| original(p, &tables.original) == coupled(p, seed_orig, Some(true)));

    let exact_tv =
        (env.num_sites() * (2 * d + 1).pow(horizon as u32) <= EXACT_LAW_LIMIT).then(|| {
            let embedded = env.transformed(&EnvironmentTransform::Embedding);
            let orig = retag(&exact_path_law(env, &density, horizon), &tags);
            let emb = retag(&exact_path_law(&embedded, &density, horizon), &tags);
            (1..=horizon)
                .map(|h| total_variation(&marginal(&orig, h + 1), &marginal(&emb, h + 1)))
                .collect()
        });

    Ok(CouplingReport {
        d,
        n,
        horizon,
        paths,
        seed,
        alpha: COUPLING_ALPHA,
        tests,
        adjusted_p,
        pass: adjusted_p > COUPLING_ALPHA,
        all_ones_identical,
        exact_tv,
    })
}

/// Law of the site sequence of length `horizon + 1` of the walk in `env`
/// started from `density`, by enumeration.
pub fn exact_path_law<T: Real>(
    env: &TorusEnvironment<T>,
    density: &InvariantDensity<T>,
    horizon: usize,
) -> BTreeMap<Vec<u32>, f64> {
    let (d, n) = (env.dim(), env.half_period());
    let mut layer: BTreeMap<Vec<u32>, f64> = (0..env.num_sites())
        .filter(|&i| density.weight(i) > 0.0)
        .map(|i| (vec![i as u32], density.weight(i)))
        .collect();
    for _ in 0..horizon {
        let mut next = BTreeMap::new();
        for (path, w) in layer {
            let site = *path.last().unwrap() as usize;
            let x = env.coords_of(site);
            let probs = env.site_probs(site);
            for v in Direction::all(d) {
                let p = probs[v.index()].as_f64();
                if p == 0.0 {
                    continue;
                }
                let mut cur = TorusCursor::new(&x, n);
                cur.step(v);
                let mut key = path.clone();
                key.push(cur.site() as u32);
                *next.entry(key).or_insert(0.0) += w * p;
            }
        }
        layer = next;
    }
    layer
}

fn retag(law: &BTreeMap<Vec<u32>, f64>, tags: &[u32]) -> BTreeMap<Vec<u32>, f64> {
    let mut out = BTreeMap::new();
    for (k, w) in law {
        *out.entry(k.iter().map(|&s| tags[s as usize]).collect())
            .or_insert(0.0) += w;
    }
    out
}

fn marginal(law: &BTreeMap<Vec<u32>, f64>, len: usize) -> BTreeMap<Vec<u32>, f64> {
    let mut out = BTreeMap::new();
    for (k, w) in law {
        *out.entry(k[..len].to_vec()).or_insert(0.0) += w;
    }
    out
}
