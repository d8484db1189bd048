#![allow(dead_code)]

use rand::Rng;
use rwre::env_laws::{sample_environment, LawKind, LawSpec};
use rwre::monge_ampere::{BallGrid, L1Ball, MaProblem, SourceTerm};
use rwre::rng::{stream, DOMAIN_AUX};
use rwre::{Environment, EnvironmentTransform};

pub fn dirichlet(d: usize, n: usize, seed: u64) -> Environment {
    sample_environment(&LawSpec::new(LawKind::IidDirichlet(None), d, n, seed)).unwrap()
}

pub fn balanced(d: usize, n: usize, seed: u64) -> Environment {
    dirichlet(d, n, seed).transformed(&EnvironmentTransform::Embedding)
}

pub fn uniform_source(ball: &L1Ball, seed: u64) -> SourceTerm<f64> {
    let mut rng = stream(seed, DOMAIN_AUX, 0);
    SourceTerm::from_interior(ball, |_| rng.random::<f64>()).unwrap()
}

/// Randomised-order value iteration for d = 2 with the lowering step in
/// closed form: the larger root of `(2b - s1)(2b - s2) = r^2`.
pub fn oracle_2d(problem: &MaProblem<f64>, tol: f64, seed: u64) -> BallGrid<f64> {
    use rand::seq::SliceRandom;
    let ball = problem.ball();
    let mut z = problem.supersolution();
    let mut sites: Vec<Vec<i64>> = ball.interior().cloned().collect();
    let mut rng = stream(seed, DOMAIN_AUX, 77);
    loop {
        sites.shuffle(&mut rng);
        let mut biggest: f64 = 0.0;
        for x in &sites {
            let at = |dx: i64, dy: i64| z.get(&[x[0] + dx, x[1] + dy]);
            let (s1, s2) = (at(1, 0) + at(-1, 0), at(0, 1) + at(0, -1));
            let r = problem.ratio().get(x);
            let root = ((s1 + s2) + ((s1 - s2).powi(2) + 4.0 * r * r).sqrt()) / 4.0;
            let old = z.get(x);
            let new = root.min(old);
            biggest = biggest.max(old - new);
            z.set(x, new);
        }
        if biggest < tol / 10.0 && problem.residual(&z) <= tol {
            return z;
        }
    }
}
