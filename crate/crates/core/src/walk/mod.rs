//! Quenched simulation of walks in a periodised environment: plain,
//! transformed (reflected, embedded) and Bernoulli-coupled.

mod sampler;
mod trajectory;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use sampler::{StepTable, TorusCursor};
pub use trajectory::{EnsembleSummary, LocalProcessPath, Trajectory};

use crate::lattice_env::{
    l1, site_drift, Direction, EnvironmentTransform, SimplexPoint, TorusEnvironment,
};
use crate::rng::{stream, DOMAIN_GAMMA, DOMAIN_WALK};
use crate::scalar::Real;

/// Where the coupling switches come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaSource {
    /// I.i.d. Bernoulli(1/2) bits from the gamma stream of this seed.
    Bernoulli { seed: u64 },
    /// The same bit at every step.
    Constant(bool),
    /// A prescribed sequence; must cover every step.
    Sequence(Vec<bool>),
}

enum GammaStream<'a> {
    Random(Box<ChaCha8Rng>),
    Constant(bool),
    Sequence(std::slice::Iter<'a, bool>),
}

impl GammaStream<'_> {
    fn next(&mut self) -> bool {
        match self {
            GammaStream::Random(rng) => rng.random_bool(0.5),
            GammaStream::Constant(g) => *g,
            GammaStream::Sequence(it) => *it.next().expect("gamma sequence shorter than the walk"),
        }
    }
}

impl GammaSource {
    fn stream(&self, path: u64) -> GammaStream<'_> {
        match self {
            GammaSource::Bernoulli { seed } => {
                GammaStream::Random(Box::new(stream(*seed, DOMAIN_GAMMA, path)))
            }
            GammaSource::Constant(g) => GammaStream::Constant(*g),
            GammaSource::Sequence(v) => GammaStream::Sequence(v.iter()),
        }
    }
}

/// Walk in `E(omega)` from `start`, using walk stream `(seed, path 0)`.
pub fn simulate<T: Real>(
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
    start: &[i64],
    steps: usize,
    seed: u64,
) -> Trajectory {
    simulate_path(&StepTable::new(env, t), start, steps, seed, 0)
}

/// Path `path` of an ensemble sharing one step table.
pub fn simulate_path<T: Real>(
    table: &StepTable<T>,
    start: &[i64],
    steps: usize,
    seed: u64,
    path: u64,
) -> Trajectory {
    let mut rng = stream(seed, DOMAIN_WALK, path);
    let mut cur = TorusCursor::new(start, table.half_period());
    let mut traj = Trajectory::with_capacity(start, steps, false);
    for _ in 0..steps {
        let dir = table.draw(cur.site(), &mut rng);
        cur.step(dir);
        traj.push(cur.position(), None);
    }
    traj
}

/// Step tables of the original and the reflected walk.
#[derive(Clone, Debug)]
pub struct CoupledTables<T> {
    pub original: StepTable<T>,
    pub reflected: StepTable<T>,
}

impl<T: Real> CoupledTables<T> {
    pub fn new(env: &TorusEnvironment<T>) -> Self {
        CoupledTables {
            original: StepTable::new(env, &EnvironmentTransform::Identity),
            reflected: StepTable::new(env, &EnvironmentTransform::Reflection),
        }
    }
}

/// Coupled walk: at each step a switch `gamma` selects the original kernel
/// (`true`) or the reflected one (`false`). Averaged over the switch this is
/// the embedded walk. The walk stream is consumed exactly as in [`simulate`].
pub fn simulate_coupled<T: Real>(
    env: &TorusEnvironment<T>,
    start: &[i64],
    steps: usize,
    seed_walk: u64,
    gammas: &GammaSource,
) -> Trajectory {
    simulate_coupled_path(&CoupledTables::new(env), start, steps, seed_walk, gammas, 0)
}

pub fn simulate_coupled_path<T: Real>(
    tables: &CoupledTables<T>,
    start: &[i64],
    steps: usize,
    seed_walk: u64,
    gammas: &GammaSource,
    path: u64,
) -> Trajectory {
    let mut rng = stream(seed_walk, DOMAIN_WALK, path);
    let mut switch = gammas.stream(path);
    let mut cur = TorusCursor::new(start, tables.original.half_period());
    let mut traj = Trajectory::with_capacity(start, steps, true);
    for _ in 0..steps {
        let g = switch.next();
        let table = if g {
            &tables.original
        } else {
            &tables.reflected
        };
        let dir = table.draw(cur.site(), &mut rng);
        cur.step(dir);
        traj.push(cur.position(), Some(g));
    }
    traj
}

/// One-step law of the coupled walk at `x` with the switch averaged out.
pub fn coupled_increment_law<T: Real>(env: &TorusEnvironment<T>, x: &[i64]) -> Vec<T> {
    let d = env.dim();
    let probs = env.probs_at(x);
    let half = T::lit(0.5);
    Direction::all(d)
        .map(|v| {
            let original = probs[v.index()];
            let reflected = EnvironmentTransform::Reflection.prob_of(probs, v, d);
            half * original + half * reflected
        })
        .collect()
}

/// First index `m` with `|X(m)|_1 = radius`; `None` if the path ends first.
pub fn hitting_time(traj: &Trajectory, radius: i64) -> Option<usize> {
    traj.positions().position(|x| l1(x) == radius)
}

/// `U_k = X(k) - X(0) - sum_{m<k} drift(X(m))`, drift taken in `E(omega)`.
pub fn martingale_component<T: Real>(
    traj: &Trajectory,
    env: &TorusEnvironment<T>,
    t: &EnvironmentTransform,
) -> Vec<Vec<T>> {
    let d = env.dim();
    let eff = env.transformed(t);
    let x0: Vec<T> = traj.start().iter().map(|&c| T::lit(c as f64)).collect();
    let mut compensator = vec![T::zero(); d];
    let mut out = Vec::with_capacity(traj.steps() + 1);
    for (k, x) in traj.positions().enumerate() {
        out.push(
            (0..d)
                .map(|i| T::lit(x[i] as f64) - x0[i] - compensator[i])
                .collect(),
        );
        if k < traj.steps() {
            let drift = site_drift(eff.probs_at(x), d);
            for i in 0..d {
                compensator[i] = compensator[i] + drift[i];
            }
        }
    }
    out
}

/// `omega(X(k))` along the path.
pub fn local_process<T: Real>(traj: &Trajectory, env: &TorusEnvironment<T>) -> LocalProcessPath<T> {
    let sites: Vec<usize> = traj.positions().map(|x| env.index_of(x)).collect();
    let points = sites
        .iter()
        .map(|&s| SimplexPoint::from_trusted(env.site_probs(s).to_vec()))
        .collect();
    LocalProcessPath { points, sites }
}
