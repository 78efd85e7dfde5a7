use rand::Rng;

use super::{ActionSet, Environment, RawContext, StudentContext};
use crate::error::{Error, Result};
use crate::io::{Condition, ReplayDataset};
use crate::policy::{encode_quartile, FeatureVector};
use crate::rng::StreamRng;

/// Resamples a logged experiment.
///
/// Students are drawn with replacement from the assigned students; the
/// outcome of assigning a condition is drawn uniformly from the logged
/// outcomes of students in the same quartile who got that condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayEnvironment {
    /// `pools[quartile - 1][action]`
    pools: [[Vec<u8>; 2]; 4],
    empirical_probs: [[f64; 2]; 4],
    student_quartiles: Vec<u8>,
}

impl ReplayEnvironment {
    pub fn new(dataset: &ReplayDataset) -> Result<Self> {
        let mut pools: [[Vec<u8>; 2]; 4] = Default::default();
        for r in &dataset.records {
            if !(1..=4).contains(&r.quartile) {
                return Err(Error::InvalidArgument(format!("quartile {} out of range", r.quartile)));
            }
            pools[r.quartile as usize - 1][r.condition.action()].push(r.outcome);
        }
        let mut empirical_probs = [[0.0; 2]; 4];
        for (q, row) in pools.iter().enumerate() {
            for (a, pool) in row.iter().enumerate() {
                if pool.is_empty() {
                    return Err(Error::EmptyPool {
                        quartile: q as u8 + 1,
                        condition: Condition::from_action(a).expect("two conditions").code(),
                    });
                }
                empirical_probs[q][a] = pool.iter().map(|&v| v as f64).sum::<f64>() / pool.len() as f64;
            }
        }
        Ok(Self {
            pools,
            empirical_probs,
            student_quartiles: dataset.records.iter().map(|r| r.quartile).collect(),
        })
    }

    /// Number of assigned students in the logged experiment.
    pub fn horizon(&self) -> usize {
        self.student_quartiles.len()
    }

    pub fn pool(&self, quartile: u8, condition: Condition) -> &[u8] {
        &self.pools[quartile as usize - 1][condition.action()]
    }

    pub fn empirical_prob(&self, quartile: u8, condition: Condition) -> f64 {
        self.empirical_probs[quartile as usize - 1][condition.action()]
    }

    pub fn quartile_sizes(&self) -> [usize; 4] {
        let mut sizes = [0; 4];
        for &q in &self.student_quartiles {
            sizes[q as usize - 1] += 1;
        }
        sizes
    }

    pub fn draw_outcome(&self, quartile: u8, condition: Condition, rng: &mut StreamRng) -> u8 {
        let pool = self.pool(quartile, condition);
        pool[rng.random_range(0..pool.len())]
    }

    fn quartile(student: &StudentContext) -> u8 {
        match student.raw {
            RawContext::Quartile(q) => q,
            RawContext::Binary(_) => student.group as u8 + 1,
        }
    }
}

impl Environment for ReplayEnvironment {
    fn num_actions(&self) -> usize {
        2
    }

    fn num_groups(&self) -> usize {
        4
    }

    fn feature_dim(&self) -> usize {
        5
    }

    fn num_features(&self) -> usize {
        1
    }

    fn sample_student(&self, rng: &mut StreamRng) -> StudentContext {
        let q = self.student_quartiles[rng.random_range(0..self.student_quartiles.len())];
        StudentContext {
            raw: RawContext::Quartile(q),
            group: q as usize - 1,
        }
    }

    fn encode(&self, student: &StudentContext) -> Result<FeatureVector> {
        encode_quartile(Self::quartile(student))
    }

    fn draw_reward(&self, student: &StudentContext, action: usize, rng: &mut StreamRng) -> u8 {
        let condition = Condition::from_action(action).expect("replay has two actions");
        self.draw_outcome(Self::quartile(student), condition, rng)
    }

    fn optimal_actions(&self, student: &StudentContext) -> ActionSet {
        ActionSet::argmax_set(&self.empirical_probs[Self::quartile(student) as usize - 1])
    }
}
