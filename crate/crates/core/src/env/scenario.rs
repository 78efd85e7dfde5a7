//! The six synthetic outcome-generating models.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Baseline,
    Universal1,
    Universal2,
    Universal3,
    Universal4,
    Personalized,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::Baseline,
        ScenarioName::Universal1,
        ScenarioName::Universal2,
        ScenarioName::Universal3,
        ScenarioName::Universal4,
        ScenarioName::Personalized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Baseline => "baseline",
            ScenarioName::Universal1 => "universal1",
            ScenarioName::Universal2 => "universal2",
            ScenarioName::Universal3 => "universal3",
            ScenarioName::Universal4 => "universal4",
            ScenarioName::Personalized => "personalized",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// True reward probability indexed by `[action][relevant feature value]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioTable {
    pub name: ScenarioName,
    pub probs: [[f64; 2]; 2],
}

impl ScenarioTable {
    pub fn prob(&self, action: usize, value: usize) -> f64 {
        self.probs[action][value]
    }

    pub fn num_actions(&self) -> usize {
        2
    }
}

pub fn scenario_table(name: ScenarioName) -> ScenarioTable {
    // [A1 at value 0, A1 at value 1], [A2 at value 0, A2 at value 1]
    let probs = match name {
        ScenarioName::Baseline => [[0.4, 0.4], [0.6, 0.6]],
        ScenarioName::Universal1 => [[0.4, 0.6], [0.6, 0.8]],
        ScenarioName::Universal2 => [[0.4, 0.4], [0.6, 0.8]],
        ScenarioName::Universal3 => [[0.4, 0.5], [0.6, 0.7]],
        ScenarioName::Universal4 => [[0.4, 0.8], [0.6, 0.9]],
        ScenarioName::Personalized => [[0.4, 0.6], [0.6, 0.4]],
    };
    ScenarioTable { name, probs }
}

pub fn scenario_table_by_name(name: &str) -> Result<ScenarioTable> {
    Ok(scenario_table(name.parse()?))
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Logistic coefficients of one action: intercept and first-feature weight.
/// Every later feature has weight zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionCoefficients {
    pub intercept: f64,
    pub first_feature: f64,
}

impl ActionCoefficients {
    /// Full coefficient vector `(b_0, b_1, 0, ..., 0)` for `num_features` features.
    pub fn to_vec(self, num_features: usize) -> Vec<f64> {
        let mut v = vec![0.0; 1 + num_features];
        v[0] = self.intercept;
        if num_features > 0 {
            v[1] = self.first_feature;
        }
        v
    }

    pub fn linear_form(self, raw: &[u8]) -> f64 {
        self.intercept + raw.first().map_or(0.0, |&v| self.first_feature * v as f64)
    }
}

pub fn scenario_coefficients(table: &ScenarioTable) -> [ActionCoefficients; 2] {
    let coef = |k: usize| ActionCoefficients {
        intercept: logit(table.probs[k][0]),
        first_feature: logit(table.probs[k][1]) - logit(table.probs[k][0]),
    };
    [coef(0), coef(1)]
}
