//! Student and outcome generators.

mod replay;
mod scenario;
mod synthetic;

use crate::error::Result;
use crate::policy::FeatureVector;
use crate::rng::StreamRng;

pub use replay::ReplayEnvironment;
pub use scenario::{
    scenario_coefficients, scenario_table, scenario_table_by_name, ActionCoefficients, ScenarioName,
    ScenarioTable,
};
pub use synthetic::SyntheticEnvironment;

/// What the environment reveals about a student.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawContext {
    /// Binary feature values; feature 0 is the outcome-relevant one.
    Binary(Vec<u8>),
    /// Prior-performance quartile, 1..=4.
    Quartile(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentContext {
    pub raw: RawContext,
    /// 0-based group index used for per-group metrics.
    pub group: usize,
}

/// A set of action indices, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActionSet(u32);

impl ActionSet {
    pub fn insert(&mut self, action: usize) {
        self.0 |= 1 << action;
    }

    pub fn contains(self, action: usize) -> bool {
        action < 32 && self.0 & (1 << action) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&a| self.contains(a))
    }

    /// All actions attaining the maximum of `values`, exact ties included.
    pub fn argmax_set(values: &[f64]) -> Self {
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut set = ActionSet::default();
        for (k, &v) in values.iter().enumerate() {
            if v == best {
                set.insert(k);
            }
        }
        set
    }
}

impl FromIterator<usize> for ActionSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ActionSet::default();
        for a in iter {
            set.insert(a);
        }
        set
    }
}

/// A source of students and stochastic binary outcomes.
///
/// Environments are immutable once built; all randomness comes from the
/// caller's streams.
pub trait Environment: Send + Sync {
    fn num_actions(&self) -> usize;

    fn num_groups(&self) -> usize;

    /// Dimension of the contextual learner's input.
    fn feature_dim(&self) -> usize;

    /// Number of features of the relevant/irrelevant kind; 1 for replay.
    fn num_features(&self) -> usize;

    fn sample_student(&self, rng: &mut StreamRng) -> StudentContext;

    fn encode(&self, student: &StudentContext) -> Result<FeatureVector>;

    fn draw_reward(&self, student: &StudentContext, action: usize, rng: &mut StreamRng) -> u8;

    fn optimal_actions(&self, student: &StudentContext) -> ActionSet;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_set_keeps_ties() {
        let s = ActionSet::argmax_set(&[0.6, 0.6]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(0) && s.contains(1));
        let s = ActionSet::argmax_set(&[0.4, 0.6]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1]);
    }
}
