use anyhow::{bail, Result};

use crate::config::EXPERIMENTS;

const COMMON: &str = "\
common keys:
  experiment = \"<name>\"
  seed = <u64>                      (RWRE_SEED overrides it)
  [geometry] d, n
  [law] kind = \"constant\" | \"dirichlet\" | \"controlled-tail\"
        point = [..]                (constant: hold, +e_1..+e_d, -e_1..-e_d)
        alpha = [..]                (dirichlet, optional)
        kappa = <f64>               (controlled-tail)
        transform = \"identity\" | \"embedding\" | \"reflection\"
  [output] dir = \"<path>\"           (relative to the config file)";

fn body(name: &str) -> Option<&'static str> {
    Some(match name {
        "sample-env" => {
            "\
Samples an environment on the torus of half-period n and saves it as JSON.
Reports balance, the smallest ellipticity constant and the empirical
moment of c^-p.
[run] p (default d + 1)
files: environment.json"
        }
        "invariant-density" => {
            "\
Invariant density of the walk kernel on the torus, by power iteration with
a direct-solve fallback. PASS when the stationarity residual is within tol.
[run] tol (default 1e-10)
files: density.csv"
        }
        "solve-ma" => {
            "\
Discrete Monge-Ampere problem on the l1 ball of radius n: starts from the
explicit supersolution and lowers site by site until updates fall below
tol/10. PASS when the result is a member of the admissible class and the
residual is within tol.
[run] tol (1e-10), source = \"ones\" | \"ellipticity\" | \"uniform\",
      order = \"forward\" | \"backward\" | \"random\", max_sweeps
files: solution.csv"
        }
        "occupation" => {
            "\
Expected occupation Qf of the walk before leaving the ball of radius n, by a
direct sparse solve, compared with the Monge-Ampere solution for the same
source. PASS when ||Qf||_inf <= ||z||_inf.
[run] tol, source
files: occupation.csv"
        }
        "resolvent-bound" => {
            "\
Ratio ||R g||_inf / (n^2 ||g/c||_d) of the resolvent of the periodised walk
at killing rate 1/n^2, maximised over random g >= 0 at each torus size.
PASS when the maxima grow by less than a factor 1.5 per size step.
[run] sizes (default [4, 8, 16]), trials (default 50)"
        }
        "lln" => {
            "\
Velocity estimate from walks started at the origin, compared with the drift
averaged under the walk's invariant density on the torus.
PASS when every coordinate is within z_max standard errors.
[run] steps (1e5), paths (32), z_max (4), stride (trajectory dump thinning)
files: trajectory.csv (path 0)"
        }
        "clt" => {
            "\
Covariance of U(steps)/sqrt(steps), where U is the martingale part of the
walk, against the trajectory-averaged step covariance, plus Kolmogorov-Smirnov
tests of the marginals. Runs from the origin and from the invariant density.
PASS when both runs are non-degenerate, within frobenius_tol and KS p > 0.01.
[run] steps (1e4), paths (1e3), frobenius_tol (0.05)
files: covariance.csv"
        }
        "coupling-test" => {
            "\
Local-process path laws of the original walk and of the switch-coupled walk,
both started from the invariant density of the embedded walk. Chi-square
two-sample test per horizon, Bonferroni-adjusted at alpha = 0.01; exact path
laws by enumeration when small. The transform key is not used.
[run] horizon (default 3, at most 4), paths (default 1e5)
files: tests.csv"
        }
        "kernel-identities" => {
            "\
Checks the reflection/switch identity for both switch values and, for every
signed coordinate permutation T, the shift and kernel transport identities
and stationarity of the transported embedded density.
files: identities.csv"
        }
        "density-bound" => {
            "\
||phi_n||_{p/(p-1)} against ||1/c||_p^{d/(p-d)} over torus sizes.
PASS when the density norm grows by less than a factor 1.5 per size step.
[run] sizes (default [4, 8, 16]), p (default d + 1), tol
files: density_bound.csv"
        }
        _ => return None,
    })
}

pub fn describe(name: &str) -> Result<String> {
    match body(name) {
        Some(text) => Ok(format!("{name}\n\n{text}\n\n{COMMON}\n")),
        None => bail!(
            "unknown experiment `{name}`; valid names: {}",
            EXPERIMENTS.join(", ")
        ),
    }
}
