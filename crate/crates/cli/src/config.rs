use anyhow::{bail, Context, Result};
use rwre::env_laws::{LawKind, LawSpec};
use rwre::lattice_env::SimplexPoint;
use rwre::monge_ampere::SweepOrder;
use rwre::EnvironmentTransform;
use serde::{Deserialize, Serialize};

pub const EXPERIMENTS: [&str; 10] = [
    "sample-env",
    "invariant-density",
    "solve-ma",
    "occupation",
    "resolvent-bound",
    "lln",
    "clt",
    "coupling-test",
    "kernel-identities",
    "density-bound",
];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub geometry: Geometry,
    pub law: LawConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub d: usize,
    /// Torus half-period, or ball radius for the grid experiments.
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum LawName {
    Constant,
    Dirichlet,
    ControlledTail,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TransformName {
    #[default]
    Identity,
    Embedding,
    Reflection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub kind: LawName,
    /// Site probabilities for `constant`, ordered hold, +e_1..+e_d, -e_1..-e_d.
    pub point: Option<Vec<f64>>,
    /// Concentrations for `dirichlet`; all ones when absent.
    pub alpha: Option<Vec<f64>>,
    pub kappa: Option<f64>,
    /// Applied to every site before the walk uses it.
    #[serde(default)]
    pub transform: TransformName,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SourceName {
    /// `f = 1` inside the ball.
    #[default]
    Ones,
    /// `f = c`, so `f/c = 1`.
    Ellipticity,
    /// I.i.d. uniform on `[0, 1)` from the seed.
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OrderName {
    #[default]
    Forward,
    Backward,
    Random,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub steps: Option<usize>,
    pub paths: Option<usize>,
    pub tol: Option<f64>,
    pub p: Option<f64>,
    pub sizes: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub horizon: Option<usize>,
    pub source: Option<SourceName>,
    pub order: Option<OrderName>,
    pub max_sweeps: Option<usize>,
    /// Keep every `stride`-th row of trajectory dumps.
    pub stride: Option<usize>,
    /// Relative Frobenius tolerance for `clt`.
    pub frobenius_tol: Option<f64>,
    /// Standard errors allowed for `lln`.
    pub z_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            bail!(
                "key `experiment`: unknown experiment `{}` (valid: {})",
                self.experiment,
                EXPERIMENTS.join(", ")
            );
        }
        if self.geometry.d == 0 {
            bail!("key `geometry.d`: dimension must be at least 1");
        }
        if self.geometry.n == 0 {
            bail!("key `geometry.n`: size must be at least 1");
        }
        match self.law.kind {
            LawName::Constant if self.law.point.is_none() => {
                bail!("key `law.point`: required for a constant law")
            }
            LawName::ControlledTail if self.law.kappa.is_none() => {
                bail!("key `law.kappa`: required for a controlled-tail law")
            }
            _ => {}
        }
        if let Some(tol) = self.run.tol {
            if !(tol > 0.0) {
                bail!("key `run.tol`: must be positive");
            }
        }
        if self.run.stride == Some(0) {
            bail!("key `run.stride`: must be at least 1");
        }
        self.law_spec().map(|_| ())
    }

    pub fn law_spec(&self) -> Result<LawSpec<f64>> {
        let (d, n) = (self.geometry.d, self.geometry.n);
        let kind = match self.law.kind {
            LawName::Constant => {
                let point = SimplexPoint::new(self.law.point.clone().unwrap_or_default())
                    .context("key `law.point`")?;
                if point.dim() != d {
                    bail!(
                        "key `law.point`: expected {} entries for d = {d}",
                        2 * d + 1
                    );
                }
                LawKind::Constant(point)
            }
            LawName::Dirichlet => LawKind::IidDirichlet(self.law.alpha.clone()),
            LawName::ControlledTail => LawKind::ControlledTail {
                kappa: self.law.kappa.unwrap_or_default(),
            },
        };
        let spec = LawSpec::new(kind, d, n, self.seed);
        spec.validate().context("key `law`")?;
        Ok(spec)
    }

    pub fn transform(&self) -> EnvironmentTransform {
        match self.law.transform {
            TransformName::Identity => EnvironmentTransform::Identity,
            TransformName::Embedding => EnvironmentTransform::Embedding,
            TransformName::Reflection => EnvironmentTransform::Reflection,
        }
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.run.tol.unwrap_or(default)
    }

    pub fn steps(&self, default: usize) -> usize {
        self.run.steps.unwrap_or(default)
    }

    pub fn paths(&self, default: usize) -> usize {
        self.run.paths.unwrap_or(default)
    }

    pub fn sweep_order(&self) -> SweepOrder {
        match self.run.order.unwrap_or_default() {
            OrderName::Forward => SweepOrder::Forward,
            OrderName::Backward => SweepOrder::Backward,
            OrderName::Random => SweepOrder::Random { seed: self.seed },
        }
    }
}
