use serde::{Deserialize, Serialize};

use crate::model::{Agent, Framework, FrameworkParts, ModelError, StateId};
use crate::rational::Rational;

/// Structured form of a framework for programmatic consumers. Masses are
/// serialized as `num/den` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkExport {
    pub states: Vec<String>,
    pub masses: Vec<Rational>,
    pub event: Vec<StateId>,
    pub partition_p: Vec<Vec<StateId>>,
    pub partition_q: Vec<Vec<StateId>>,
    pub opener: Agent,
    pub omega_star: StateId,
}

pub fn export_framework(fw: &Framework, omega_star: StateId) -> FrameworkExport {
    let parts = fw.to_parts();
    FrameworkExport {
        states: parts.labels,
        masses: parts.prior,
        event: parts.event,
        partition_p: parts.partition_p,
        partition_q: parts.partition_q,
        opener: parts.opener,
        omega_star,
    }
}

impl FrameworkExport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn into_framework(self) -> Result<(Framework, StateId), ModelError> {
        let omega_star = self.omega_star;
        let fw = FrameworkParts {
            labels: self.states,
            prior: self.masses,
            event: self.event,
            partition_p: self.partition_p,
            partition_q: self.partition_q,
            opener: self.opener,
        }
        .build()?;
        Ok((fw, omega_star))
    }
}
