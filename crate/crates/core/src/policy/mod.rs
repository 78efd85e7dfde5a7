//! Action-selection policies.

mod beta;
mod contextual;
mod features;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use beta::BetaPosterior;
pub use contextual::{sigmoid, GaussianWeightPosterior, NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE};
pub use features::{encode_features, encode_quartile, encoded_dim, FeatureVector};

use crate::error::{Error, Result};

/// Prior settings shared by every policy built in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    pub beta_alpha: f64,
    pub beta_beta: f64,
    pub weight_precision: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            beta_alpha: 1.0,
            beta_beta: 1.0,
            weight_precision: 1.0,
        }
    }
}

/// Which policy drives a trial.
///
/// `Uniform` and `Fixed` are reference policies used to sanity-check the
/// reward scale of an environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    NonContextual,
    Contextual,
    Uniform,
    Fixed(usize),
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::NonContextual => f.write_str("noncontextual"),
            PolicyKind::Contextual => f.write_str("contextual"),
            PolicyKind::Uniform => f.write_str("uniform"),
            PolicyKind::Fixed(a) => write!(f, "always_a{}", a + 1),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noncontextual" => Ok(PolicyKind::NonContextual),
            "contextual" => Ok(PolicyKind::Contextual),
            "uniform" => Ok(PolicyKind::Uniform),
            other => other
                .strip_prefix("always_a")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .map(|n| PolicyKind::Fixed(n - 1))
                .ok_or_else(|| Error::Config(format!("unknown policy `{other}`"))),
        }
    }
}

/// Live policy state for one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    NonContextual(BetaPosterior),
    Contextual(GaussianWeightPosterior),
    Uniform { num_actions: usize },
    Fixed { action: usize },
}

impl PolicyState {
    pub fn new(kind: PolicyKind, num_actions: usize, feature_dim: usize, priors: &Priors) -> Result<Self> {
        Ok(match kind {
            PolicyKind::NonContextual => PolicyState::NonContextual(BetaPosterior::new(
                num_actions,
                priors.beta_alpha,
                priors.beta_beta,
            )?),
            PolicyKind::Contextual => PolicyState::Contextual(GaussianWeightPosterior::new(
                num_actions,
                feature_dim,
                priors.weight_precision,
            )?),
            PolicyKind::Uniform => PolicyState::Uniform { num_actions },
            PolicyKind::Fixed(action) => {
                if action >= num_actions {
                    return Err(Error::ActionOutOfRange { action, num_actions });
                }
                PolicyState::Fixed { action }
            }
        })
    }

    pub fn uses_features(&self) -> bool {
        matches!(self, PolicyState::Contextual(_))
    }

    pub fn choose<R: Rng + ?Sized>(&self, x: Option<&FeatureVector>, rng: &mut R) -> Result<usize> {
        match self {
            PolicyState::NonContextual(s) => Ok(s.choose(rng)),
            PolicyState::Contextual(s) => {
                let x = x.ok_or_else(|| Error::InvalidArgument("contextual policy needs features".into()))?;
                s.choose(x, rng)
            }
            PolicyState::Uniform { num_actions } => Ok(rng.random_range(0..*num_actions)),
            PolicyState::Fixed { action } => Ok(*action),
        }
    }

    pub fn update(&mut self, x: Option<&FeatureVector>, action: usize, reward: u8) -> Result<()> {
        match self {
            PolicyState::NonContextual(s) => s.update(action, reward),
            PolicyState::Contextual(s) => {
                let x = x.ok_or_else(|| Error::InvalidArgument("contextual policy needs features".into()))?;
                s.update(x, action, reward).map(|_| ())
            }
            PolicyState::Uniform { .. } | PolicyState::Fixed { .. } => Ok(()),
        }
    }
}
