//! Run configuration: a flat TOML table with strict key checking.
//!
//! ```toml
//! scenario = ["baseline", "personalized"]
//! num_features = [1, 2, 3, 5, 7, 8, 10]
//! horizon = 250
//! policy = "both"
//! num_trials = 1000
//! seed = 42
//! ```
//!
//! Grid keys accept a single value or a list.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::discretize::OutcomeMeasure;
use crate::env::ScenarioName;
use crate::error::{Error, Result};
use crate::policy::{PolicyKind, Priors};

pub const SUPPORTED_FEATURE_COUNTS: [usize; 7] = [1, 2, 3, 5, 7, 8, 10];
pub const SUPPORTED_HORIZONS: [usize; 3] = [50, 250, 1000];
pub const SUPPORTED_MINORITY_PROPS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
/// Disparity enumerates `2^(F-1)` contexts, so custom grids stop here.
pub const MAX_FEATURES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySelection {
    Both,
    Noncontextual,
    Contextual,
    Uniform,
    AlwaysA1,
    AlwaysA2,
}

impl PolicySelection {
    fn kinds(self) -> &'static [PolicyKind] {
        match self {
            PolicySelection::Both => &[PolicyKind::NonContextual, PolicyKind::Contextual],
            PolicySelection::Noncontextual => &[PolicyKind::NonContextual],
            PolicySelection::Contextual => &[PolicyKind::Contextual],
            PolicySelection::Uniform => &[PolicyKind::Uniform],
            PolicySelection::AlwaysA1 => &[PolicyKind::Fixed(0)],
            PolicySelection::AlwaysA2 => &[PolicyKind::Fixed(1)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DisparityMethod {
    /// Fraction of simulated Thompson choices per context.
    #[default]
    MonteCarlo,
    /// Closed-form choice probability under the Gaussian posterior.
    Exact,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepLogMode {
    #[default]
    None,
    /// Every `step_log_every`-th trial of each cell.
    Sampled,
    Full,
}

impl std::str::FromStr for StepLogMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(StepLogMode::None),
            "sampled" => Ok(StepLogMode::Sampled),
            "full" => Ok(StepLogMode::Full),
            other => Err(Error::Config(format!("unknown step-log mode `{other}`"))),
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn opt_one_or_many<'de, D, T>(d: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    one_or_many(d).map(Some)
}

fn default_scenarios() -> Vec<ScenarioName> {
    vec![ScenarioName::Baseline]
}
fn default_features() -> Vec<usize> {
    vec![1]
}
fn default_minority() -> Vec<f64> {
    vec![0.5]
}
fn default_policy() -> Vec<PolicySelection> {
    vec![PolicySelection::Both]
}
fn default_trials() -> usize {
    1000
}
fn default_output() -> String {
    "results".into()
}
fn default_draws() -> usize {
    1000
}
fn default_every() -> usize {
    100
}
fn default_outcomes() -> Vec<OutcomeMeasure> {
    OutcomeMeasure::ALL.to_vec()
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_scenarios", deserialize_with = "one_or_many")]
    pub scenario: Vec<ScenarioName>,
    #[serde(default = "default_features", deserialize_with = "one_or_many")]
    pub num_features: Vec<usize>,
    /// Defaults to 250 for synthetic runs and to the logged size for replay.
    #[serde(default, deserialize_with = "opt_one_or_many", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Vec<usize>>,
    #[serde(default = "default_minority", deserialize_with = "one_or_many")]
    pub minority_prop: Vec<f64>,
    #[serde(default = "default_policy", deserialize_with = "one_or_many")]
    pub policy: Vec<PolicySelection>,
    #[serde(default = "default_trials")]
    pub num_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub disparity: DisparityMethod,
    #[serde(default = "default_draws")]
    pub disparity_draws: usize,
    #[serde(default)]
    pub step_log: StepLogMode,
    #[serde(default = "default_every")]
    pub step_log_every: usize,
    #[serde(default = "one")]
    pub prior_alpha: f64,
    #[serde(default = "one")]
    pub prior_beta: f64,
    #[serde(default = "one")]
    pub prior_precision: f64,
    /// Allow grid values outside the standard sets.
    #[serde(default)]
    pub custom_grid: bool,
    /// Logged experiment CSV for replay runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default = "default_outcomes", deserialize_with = "one_or_many")]
    pub outcome: Vec<OutcomeMeasure>,
}

impl Default for SimConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

/// One synthetic grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub scenario: ScenarioName,
    pub num_features: usize,
    pub horizon: usize,
    pub minority_prop: f64,
}

impl GridCell {
    pub fn label(&self) -> String {
        format!(
            "{}/F{}/T{}/m{}",
            self.scenario, self.num_features, self.horizon, self.minority_prop
        )
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.scenario.is_empty() || self.num_features.is_empty() || self.minority_prop.is_empty() {
            return bad("grid keys must not be empty lists".into());
        }
        if self.policy.is_empty() {
            return bad("policy must not be empty".into());
        }
        if self.num_trials == 0 {
            return bad("num_trials must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if self.disparity == DisparityMethod::MonteCarlo && self.disparity_draws == 0 {
            return bad("disparity_draws must be positive".into());
        }
        if self.step_log_every == 0 {
            return bad("step_log_every must be positive".into());
        }
        for (name, v) in [
            ("prior_alpha", self.prior_alpha),
            ("prior_beta", self.prior_beta),
            ("prior_precision", self.prior_precision),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for &f in &self.num_features {
            let ok = if self.custom_grid {
                (1..=MAX_FEATURES).contains(&f)
            } else {
                SUPPORTED_FEATURE_COUNTS.contains(&f)
            };
            if !ok {
                return bad(format!("num_features {f} not in the supported set (set custom_grid = true)"));
            }
        }
        for &h in self.horizon.iter().flatten() {
            let ok = if self.custom_grid { h > 0 } else { SUPPORTED_HORIZONS.contains(&h) };
            if !ok {
                return bad(format!("horizon {h} not in the supported set (set custom_grid = true)"));
            }
        }
        for &m in &self.minority_prop {
            let in_range = m > 0.0 && m <= 0.5;
            let ok = if self.custom_grid {
                in_range
            } else {
                SUPPORTED_MINORITY_PROPS.iter().any(|&s| (s - m).abs() < 1e-12)
            };
            if !ok {
                return bad(format!("minority_prop {m} not in the supported set (set custom_grid = true)"));
            }
        }
        Ok(())
    }

    pub fn policies(&self) -> Vec<PolicyKind> {
        let mut out: Vec<PolicyKind> = Vec::new();
        for sel in &self.policy {
            for &k in sel.kinds() {
                if !out.contains(&k) {
                    out.push(k);
                }
            }
        }
        out
    }

    pub fn priors(&self) -> Priors {
        Priors {
            beta_alpha: self.prior_alpha,
            beta_beta: self.prior_beta,
            weight_precision: self.prior_precision,
        }
    }

    pub fn horizons(&self) -> Vec<usize> {
        self.horizon.clone().unwrap_or_else(|| vec![250])
    }

    /// Synthetic grid: scenario x features x horizon x minority proportion.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        for &scenario in &self.scenario {
            for &num_features in &self.num_features {
                for horizon in self.horizons() {
                    for &minority_prop in &self.minority_prop {
                        cells.push(GridCell {
                            scenario,
                            num_features,
                            horizon,
                            minority_prop,
                        });
                    }
                }
            }
        }
        cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = SimConfig::from_toml("scenario = \"baseline\"\nnum_features = 1\nhorizon = 250\n").unwrap();
        assert_eq!(cfg.num_trials, 1000);
        assert_eq!(cfg.minority_prop, vec![0.5]);
        assert_eq!(cfg.policies(), vec![PolicyKind::NonContextual, PolicyKind::Contextual]);
        assert_eq!(cfg.disparity_draws, 1000);
        assert_eq!(cfg.cells().len(), 1);
    }

    #[test]
    fn feature_grid_enumerates_cells() {
        let cfg = SimConfig::from_toml("scenario = \"baseline\"\nnum_features = [1, 2, 3, 5, 7, 8, 10]\n").unwrap();
        let cells = cfg.cells();
        assert_eq!(cells.len(), 7);
        assert_eq!(cells.iter().map(|c| c.num_features).collect::<Vec<_>>(), SUPPORTED_FEATURE_COUNTS);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = SimConfig::from_toml("scenario = \"baseline\"\nhorizn = 250\n").unwrap_err();
        assert!(err.to_string().contains("horizn"), "{err}");
    }

    #[test]
    fn grid_values_are_checked() {
        assert!(SimConfig::from_toml("num_features = 4\n").is_err());
        assert!(SimConfig::from_toml("num_features = 4\ncustom_grid = true\n").is_ok());
        assert!(SimConfig::from_toml("horizon = 100\n").is_err());
        assert!(SimConfig::from_toml("minority_prop = 0.25\n").is_err());
        assert!(SimConfig::from_toml("minority_prop = 0.7\ncustom_grid = true\n").is_err());
        assert!(SimConfig::from_toml("scenario = \"nope\"\n").is_err());
        assert!(SimConfig::from_toml("num_trials = 0\n").is_err());
        assert!(SimConfig::from_toml("prior_precision = -1.0\n").is_err());
    }

    #[test]
    fn reference_policies_parse() {
        let cfg = SimConfig::from_toml("policy = [\"uniform\", \"always_a2\", \"contextual\"]\n").unwrap();
        assert_eq!(
            cfg.policies(),
            vec![PolicyKind::Uniform, PolicyKind::Fixed(1), PolicyKind::Contextual]
        );
    }

    fn arb_config() -> impl Strategy<Value = SimConfig> {
        (
            proptest::sample::subsequence(ScenarioName::ALL.to_vec(), 1..=6),
            proptest::sample::subsequence(SUPPORTED_FEATURE_COUNTS.to_vec(), 1..=7),
            proptest::option::of(proptest::sample::subsequence(SUPPORTED_HORIZONS.to_vec(), 1..=3)),
            proptest::sample::subsequence(SUPPORTED_MINORITY_PROPS.to_vec(), 1..=5),
            1usize..5000,
            any::<u64>(),
            proptest::option::of(1usize..64),
            prop_oneof![
                Just(DisparityMethod::MonteCarlo),
                Just(DisparityMethod::Exact),
                Just(DisparityMethod::Off)
            ],
            proptest::option::of("[a-z]{1,8}\\.csv"),
            0.1f64..10.0,
        )
            .prop_map(|(scenario, num_features, horizon, minority_prop, num_trials, seed, workers, disparity, dataset, prec)| {
                SimConfig {
                    scenario,
                    num_features,
                    horizon,
                    minority_prop,
                    num_trials,
                    seed,
                    workers,
                    disparity,
                    dataset,
                    prior_precision: prec,
                    ..SimConfig::default()
                }
            })
    }

    proptest! {
        #[test]
        fn config_round_trips(cfg in arb_config()) {
            let text = cfg.to_toml();
            let back = SimConfig::from_toml(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
