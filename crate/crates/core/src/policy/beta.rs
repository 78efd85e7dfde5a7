//! Beta-Bernoulli Thompson sampling.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Per-action `Beta(alpha, beta)` posterior over the success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPosterior {
    prior_alpha: f64,
    prior_beta: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaPosterior {
    pub fn new(num_actions: usize, prior_alpha: f64, prior_beta: f64) -> Result<Self> {
        if num_actions < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 actions, got {num_actions}"
            )));
        }
        if !(prior_alpha > 0.0 && prior_beta > 0.0) || !prior_alpha.is_finite() || !prior_beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Beta prior must be positive, got ({prior_alpha}, {prior_beta})"
            )));
        }
        Ok(Self {
            prior_alpha,
            prior_beta,
            alpha: vec![prior_alpha; num_actions],
            beta: vec![prior_beta; num_actions],
        })
    }

    /// Uniform `Beta(1, 1)` prior on every action.
    pub fn uniform(num_actions: usize) -> Result<Self> {
        Self::new(num_actions, 1.0, 1.0)
    }

    pub fn num_actions(&self) -> usize {
        self.alpha.len()
    }

    pub fn params(&self, action: usize) -> (f64, f64) {
        (self.alpha[action], self.beta[action])
    }

    pub fn prior(&self) -> (f64, f64) {
        (self.prior_alpha, self.prior_beta)
    }

    /// Number of updates applied to `action` so far.
    pub fn count(&self, action: usize) -> f64 {
        self.alpha[action] + self.beta[action] - self.prior_alpha - self.prior_beta
    }

    /// Draws one success probability per action and returns the argmax,
    /// lowest index on ties.
    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (k, (&a, &b)) in self.alpha.iter().zip(&self.beta).enumerate() {
            // parameters are validated positive, so construction cannot fail
            let theta = Beta::new(a, b).expect("positive Beta parameters").sample(rng);
            if theta > best_val {
                best = k;
                best_val = theta;
            }
        }
        best
    }

    pub fn update(&mut self, action: usize, reward: u8) -> Result<()> {
        if action >= self.num_actions() {
            return Err(Error::ActionOutOfRange {
                action,
                num_actions: self.num_actions(),
            });
        }
        match reward {
            1 => self.alpha[action] += 1.0,
            0 => self.beta[action] += 1.0,
            r => return Err(Error::InvalidReward(r)),
        }
        Ok(())
    }
}
