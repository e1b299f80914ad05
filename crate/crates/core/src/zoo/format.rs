use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::pathology::GroundTruth;
use crate::zoo::Problem;
use crate::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON problem file shared by zoo export and user input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProblemFile<T> {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub problem: Problem<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vector<T>>,
}

impl<T: Scalar> ProblemFile<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Input(format!("problem file: {e}")))?;
        if file.schema != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                file.schema
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::catalog;

    #[test]
    fn every_entry_round_trips() {
        for e in catalog::<f64>() {
            let file = e.to_file();
            let back = ProblemFile::<f64>::from_json(&file.to_json()).unwrap();
            assert_eq!(back, file, "{}", e.id);
        }
    }

    #[test]
    fn schema_checked() {
        let text = r#"{"schema": 2, "kind": "drs", "f": {"dim": 1}, "g": {"dim": 1}}"#;
        assert!(ProblemFile::<f64>::from_json(text).is_err());
        let text =
            r#"{"schema": 1, "kind": "drs", "f": {"dim": 1, "linear": [1.0]}, "g": {"dim": 1, "linear": [1.0]}}"#;
        assert!(ProblemFile::<f64>::from_json(text).is_ok());
    }
}
