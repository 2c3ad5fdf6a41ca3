//! JSON scenario files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "alpha": [1, 0],
//!   "operator": [[0, 1, 2.0], [1, 0, 3.0]],
//!   "potential": [0.0, 0.5],
//!   "measure": [0.5, 0.5],
//!   "eps": 0.1,
//!   "n_max": 8,
//!   "seed": 0
//! }
//! ```
//!
//! `operator` lists `(x, y, value)` triplets. `potential`, `measure`, `eps`,
//! `n_max` and `seed` are optional; the last three default to 0.1, 8 and 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::system::{FiniteSystem, Measure, Potential};
use crate::transfer::TransferOperator;

fn default_eps() -> f64 {
    0.1
}
fn default_n_max() -> usize {
    crate::tentropy::DEFAULT_N_MAX
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    pub alpha: Vec<usize>,
    pub operator: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<f64>>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario (line {line}, column {column}): {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {source}")]
    Field {
        field: String,
        #[source]
        source: Error,
    },
}

impl ScenarioError {
    fn field(field: impl Into<String>, source: Error) -> Self {
        ScenarioError::Field {
            field: field.into(),
            source,
        }
    }

    /// The offending field, for field-level errors.
    pub fn field_name(&self) -> Option<&str> {
        match self {
            ScenarioError::Field { field, .. } => Some(field),
            ScenarioError::Malformed { .. } => None,
        }
    }
}

/// Whether operator entries must respect the support of alpha.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportCheck {
    Enforce,
    /// Accept off-support entries, so property checks can report them.
    Skip,
}

/// Parses and validates a scenario, enforcing the operator support.
pub fn parse_scenario(text: &[u8]) -> Result<Scenario, ScenarioError> {
    Scenario::parse(text, SupportCheck::Enforce)
}

impl Scenario {
    pub fn parse(text: &[u8], support: SupportCheck) -> Result<Scenario, ScenarioError> {
        let sc: Scenario = serde_json::from_slice(text).map_err(|e| ScenarioError::Malformed {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        sc.validate(support)?;
        Ok(sc)
    }

    fn validate(&self, support: SupportCheck) -> Result<(), ScenarioError> {
        let n = self.n;
        if n == 0 {
            return Err(ScenarioError::field(
                "n",
                Error::Argument("a system needs at least one point".into()),
            ));
        }
        if self.alpha.len() != n {
            return Err(ScenarioError::field(
                "alpha",
                Error::Dimension {
                    expected: n,
                    got: self.alpha.len(),
                },
            ));
        }
        if let Some((y, &x)) = self.alpha.iter().enumerate().find(|(_, &x)| x >= n) {
            return Err(ScenarioError::field(
                format!("alpha[{y}]"),
                Error::Argument(format!("{x} is not a point of a {n}-point system")),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, &(x, y, value)) in self.operator.iter().enumerate() {
            let field = || format!("operator[{i}]");
            if x >= n || y >= n {
                return Err(ScenarioError::field(
                    field(),
                    Error::Argument(format!("entry ({x}, {y}) out of range for {n} points")),
                ));
            }
            if !value.is_finite() {
                return Err(ScenarioError::field(
                    field(),
                    Error::NonFinite { index: i, value },
                ));
            }
            if value < 0.0 {
                return Err(ScenarioError::field(
                    field(),
                    Error::Positivity { x, y, value },
                ));
            }
            if support == SupportCheck::Enforce && value > 0.0 && self.alpha[y] != x {
                return Err(ScenarioError::field(
                    field(),
                    Error::Support {
                        x,
                        y,
                        image: self.alpha[y],
                    },
                ));
            }
            if !seen.insert((x, y)) {
                return Err(ScenarioError::field(
                    field(),
                    Error::Argument(format!("duplicate entry ({x}, {y})")),
                ));
            }
        }
        if let Some(p) = &self.potential {
            if p.len() != n {
                return Err(ScenarioError::field(
                    "potential",
                    Error::Dimension {
                        expected: n,
                        got: p.len(),
                    },
                ));
            }
            Potential::new(p.clone()).map_err(|e| ScenarioError::field("potential", e))?;
        }
        if let Some(m) = &self.measure {
            if m.len() != n {
                return Err(ScenarioError::field(
                    "measure",
                    Error::Dimension {
                        expected: n,
                        got: m.len(),
                    },
                ));
            }
            Measure::new(m.clone()).map_err(|e| ScenarioError::field("measure", e))?;
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(ScenarioError::field(
                "eps",
                Error::Argument(format!("eps must be positive, got {}", self.eps)),
            ));
        }
        if self.n_max == 0 {
            return Err(ScenarioError::field(
                "n_max",
                Error::Argument("n_max must be at least 1".into()),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn system(&self) -> FiniteSystem {
        FiniteSystem::new(self.alpha.clone()).expect("validated at parse")
    }

    /// The validated operator; fails if the scenario was parsed with
    /// [`SupportCheck::Skip`] and has off-support entries.
    pub fn operator(&self) -> crate::Result<TransferOperator> {
        TransferOperator::new(self.system(), &self.operator)
    }

    pub fn operator_unchecked(&self) -> TransferOperator {
        TransferOperator::new_unchecked(self.system(), &self.operator).expect("validated at parse")
    }

    /// The scenario potential, or zero.
    pub fn potential(&self) -> Potential {
        match &self.potential {
            Some(p) => Potential::new(p.clone()).expect("validated at parse"),
            None => Potential::zeros(self.n),
        }
    }

    pub fn measure(&self) -> Option<Measure> {
        self.measure
            .as_ref()
            .map(|m| Measure::new(m.clone()).expect("validated at parse"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let sc =
            parse_scenario(br#"{"n":2,"alpha":[1,0],"operator":[[0,1,1.0],[1,0,1.0]]}"#).unwrap();
        assert_eq!(sc.eps, 0.1);
        assert_eq!(sc.n_max, 8);
        assert_eq!(sc.seed, 0);
        assert_eq!(sc.potential(), Potential::zeros(2));
        assert!(sc.measure().is_none());
        let again = parse_scenario(sc.to_json().as_bytes()).unwrap();
        assert_eq!(again, sc);
    }

    #[test]
    fn support_violation_names_the_entry() {
        let err = parse_scenario(br#"{"n":2,"alpha":[1,0],"operator":[[0,1,1.0],[0,0,1.0]]}"#)
            .unwrap_err();
        assert_eq!(err.field_name(), Some("operator[1]"));
        assert!(matches!(
            err,
            ScenarioError::Field {
                source: Error::Support { x: 0, y: 0, .. },
                ..
            }
        ));
        let sc = Scenario::parse(
            br#"{"n":2,"alpha":[1,0],"operator":[[0,1,1.0],[0,0,1.0]]}"#,
            SupportCheck::Skip,
        )
        .unwrap();
        assert!(sc.operator().is_err());
        assert!(!sc.operator_unchecked().satisfies_support());
    }

    #[test]
    fn measure_normalization_error() {
        let err =
            parse_scenario(br#"{"n":2,"alpha":[1,0],"operator":[[0,1,1.0]],"measure":[0.5,0.4]}"#)
                .unwrap_err();
        assert_eq!(err.field_name(), Some("measure"));
        assert!(err.to_string().contains("sum to"));
    }

    #[test]
    fn malformed_and_field_errors() {
        assert!(matches!(
            parse_scenario(b"{\"n\": 2,\n \"alpha\": [1, 0"),
            Err(ScenarioError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_scenario(br#"{"n":2,"alpha":[1,0],"operator":[],"bogus":1}"#),
            Err(ScenarioError::Malformed { .. })
        ));
        let cases: [(&[u8], &str); 6] = [
            (br#"{"n":0,"alpha":[],"operator":[]}"#, "n"),
            (br#"{"n":2,"alpha":[1],"operator":[]}"#, "alpha"),
            (br#"{"n":2,"alpha":[1,2],"operator":[]}"#, "alpha[1]"),
            (
                br#"{"n":2,"alpha":[1,0],"operator":[[0,1,-1.0]]}"#,
                "operator[0]",
            ),
            (
                br#"{"n":2,"alpha":[1,0],"operator":[],"potential":[1.0]}"#,
                "potential",
            ),
            (br#"{"n":2,"alpha":[1,0],"operator":[],"eps":-1.0}"#, "eps"),
        ];
        for (doc, field) in cases {
            assert_eq!(parse_scenario(doc).unwrap_err().field_name(), Some(field));
        }
    }
}
