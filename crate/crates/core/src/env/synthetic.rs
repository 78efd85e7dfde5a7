use rand::Rng;

use super::{ActionSet, Environment, RawContext, ScenarioTable, StudentContext};
use crate::error::{Error, Result};
use crate::policy::{encode_features, encoded_dim, FeatureVector};
use crate::rng::StreamRng;

/// Students with `num_features` binary features drawn from one scenario.
///
/// Feature 0 is the relevant feature; value 1 marks the minority group and
/// appears with probability `minority_prop`. The remaining features are fair
/// coin flips and never affect the reward.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEnvironment {
    table: ScenarioTable,
    num_features: usize,
    minority_prop: f64,
}

impl SyntheticEnvironment {
    pub fn new(table: ScenarioTable, num_features: usize, minority_prop: f64) -> Result<Self> {
        if num_features == 0 {
            return Err(Error::InvalidArgument("need at least one feature".into()));
        }
        if !(minority_prop > 0.0 && minority_prop <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "minority proportion must lie in (0, 0.5], got {minority_prop}"
            )));
        }
        Ok(Self {
            table,
            num_features,
            minority_prop,
        })
    }

    pub fn table(&self) -> &ScenarioTable {
        &self.table
    }

    pub fn minority_prop(&self) -> f64 {
        self.minority_prop
    }

    pub fn reward_prob(&self, student: &StudentContext, action: usize) -> f64 {
        self.table.prob(action, student.group)
    }
}

impl Environment for SyntheticEnvironment {
    fn num_actions(&self) -> usize {
        self.table.num_actions()
    }

    fn num_groups(&self) -> usize {
        2
    }

    fn feature_dim(&self) -> usize {
        encoded_dim(self.num_features)
    }

    fn num_features(&self) -> usize {
        self.num_features
    }

    fn sample_student(&self, rng: &mut StreamRng) -> StudentContext {
        let mut raw = Vec::with_capacity(self.num_features);
        raw.push(u8::from(rng.random::<f64>() < self.minority_prop));
        for _ in 1..self.num_features {
            raw.push(u8::from(rng.random::<bool>()));
        }
        let group = raw[0] as usize;
        StudentContext {
            raw: RawContext::Binary(raw),
            group,
        }
    }

    fn encode(&self, student: &StudentContext) -> Result<FeatureVector> {
        match &student.raw {
            RawContext::Binary(raw) => encode_features(raw),
            RawContext::Quartile(_) => Err(Error::InvalidArgument(
                "synthetic environment got a quartile context".into(),
            )),
        }
    }

    fn draw_reward(&self, student: &StudentContext, action: usize, rng: &mut StreamRng) -> u8 {
        u8::from(rng.random::<f64>() < self.reward_prob(student, action))
    }

    fn optimal_actions(&self, student: &StudentContext) -> ActionSet {
        let probs: Vec<f64> = (0..self.num_actions())
            .map(|k| self.table.prob(k, student.group))
            .collect();
        ActionSet::argmax_set(&probs)
    }
}
