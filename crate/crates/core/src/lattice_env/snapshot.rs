//! JSON snapshot of a torus environment.
//!
//! ```json
//! { "d": 1, "n": 1, "order": "row-major over (x_1+n-1, …, x_d+n-1)",
//!   "sites": [[0.2, 0.4, 0.4], [0.8, 0.1, 0.1]] }
//! ```
//! Floats are written in shortest round-trip form, so save → load → save
//! reproduces the text exactly.

use serde::{Deserialize, Serialize};

use super::TorusEnvironment;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SNAPSHOT_ORDER: &str = "row-major over (x_1+n-1, …, x_d+n-1)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EnvironmentSnapshot<T> {
    pub d: usize,
    pub n: usize,
    pub order: String,
    pub sites: Vec<Vec<T>>,
}

impl<T: Real> From<&TorusEnvironment<T>> for EnvironmentSnapshot<T> {
    fn from(env: &TorusEnvironment<T>) -> Self {
        EnvironmentSnapshot {
            d: env.dim(),
            n: env.half_period(),
            order: SNAPSHOT_ORDER.to_string(),
            sites: env.sites().map(|s| s.to_vec()).collect(),
        }
    }
}

impl<T: Real> TryFrom<EnvironmentSnapshot<T>> for TorusEnvironment<T> {
    type Error = Error;

    fn try_from(s: EnvironmentSnapshot<T>) -> Result<Self> {
        if s.order != SNAPSHOT_ORDER {
            return Err(Error::Snapshot(format!(
                "unsupported site order {:?}",
                s.order
            )));
        }
        TorusEnvironment::from_rows(s.d, s.n, s.sites)
    }
}

pub fn to_json<T: Real>(env: &TorusEnvironment<T>) -> String {
    serde_json::to_string(&EnvironmentSnapshot::from(env)).expect("snapshot serialises")
}

pub fn from_json<T: Real>(text: &str) -> Result<TorusEnvironment<T>> {
    let snap: EnvironmentSnapshot<T> =
        serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))?;
    snap.try_into()
}
