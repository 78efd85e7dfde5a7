//! Contextual Thompson sampling with online Bayesian logistic regression.
//!
//! Each action keeps its own weight vector under a diagonal Gaussian
//! posterior. After an observation the chosen action's posterior mode is
//! found by Newton's method on the single-observation regularized objective
//!
//! ```text
//! 1/2 * sum_i q_i (w_i - m_i)^2 + log(1 + exp(-s * w.x)),  s = 2r - 1
//! ```
//!
//! and the precisions grow by the Laplace curvature `x_i^2 p (1 - p)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::policy::FeatureVector;

pub const NEWTON_TOLERANCE: f64 = 1e-6;
pub const NEWTON_MAX_ITERATIONS: usize = 50;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWeightPosterior {
    num_actions: usize,
    dim: usize,
    prior_precision: f64,
    // row-major, one row of length `dim` per action
    means: Vec<f64>,
    precisions: Vec<f64>,
}

impl GaussianWeightPosterior {
    pub fn new(num_actions: usize, dim: usize, prior_precision: f64) -> Result<Self> {
        if num_actions == 0 || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "need positive action count and dimension, got ({num_actions}, {dim})"
            )));
        }
        if !prior_precision.is_finite() || prior_precision <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "prior precision must be positive, got {prior_precision}"
            )));
        }
        Ok(Self {
            num_actions,
            dim,
            prior_precision,
            means: vec![0.0; num_actions * dim],
            precisions: vec![prior_precision; num_actions * dim],
        })
    }

    /// Builds a state from explicit per-action means and precisions.
    pub fn from_parts(means: Vec<Vec<f64>>, precisions: Vec<Vec<f64>>) -> Result<Self> {
        let num_actions = means.len();
        if num_actions == 0 || precisions.len() != num_actions {
            return Err(Error::InvalidArgument(
                "means and precisions need one row per action".into(),
            ));
        }
        let dim = means[0].len();
        for row in means.iter().chain(&precisions) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        if precisions.iter().flatten().any(|&q| q.is_nan() || q <= 0.0) {
            return Err(Error::InvalidArgument("precisions must be positive".into()));
        }
        let prior_precision = precisions
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            num_actions,
            dim,
            prior_precision,
            means: means.into_iter().flatten().collect(),
            precisions: precisions.into_iter().flatten().collect(),
        })
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prior_precision(&self) -> f64 {
        self.prior_precision
    }

    pub fn mean(&self, action: usize) -> &[f64] {
        &self.means[action * self.dim..(action + 1) * self.dim]
    }

    pub fn precision(&self, action: usize) -> &[f64] {
        &self.precisions[action * self.dim..(action + 1) * self.dim]
    }

    fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.num_actions {
            return Err(Error::ActionOutOfRange {
                action,
                num_actions: self.num_actions,
            });
        }
        Ok(())
    }

    /// Mean and variance of the linear score `w.x` under action `k`'s posterior.
    pub fn score_moments(&self, action: usize, x: &[f64]) -> (f64, f64) {
        let m = self.mean(action);
        let q = self.precision(action);
        let mut mu = 0.0;
        let mut var = 0.0;
        for i in 0..self.dim {
            mu += m[i] * x[i];
            var += x[i] * x[i] / q[i];
        }
        (mu, var)
    }

    /// Linear scores `w_k.x` from one joint posterior draw, all weights
    /// sampled coordinate by coordinate.
    fn sample_linear_scores<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        for k in 0..self.num_actions {
            let m = self.mean(k);
            let q = self.precision(k);
            let mut z = 0.0;
            for i in 0..self.dim {
                let n: f64 = rng.sample(StandardNormal);
                z += (m[i] + n / q[i].sqrt()) * x[i];
            }
            out.push(z);
        }
    }

    /// Sampled success probabilities `sigmoid(w_k.x)` for every action.
    pub fn sample_rewards<R: Rng + ?Sized>(&self, x: &FeatureVector, rng: &mut R) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut z = Vec::with_capacity(self.num_actions);
        self.sample_linear_scores(x.as_slice(), rng, &mut z);
        Ok(z.into_iter().map(sigmoid).collect())
    }

    /// Thompson choice at context `x`; lowest index on ties.
    pub fn choose<R: Rng + ?Sized>(&self, x: &FeatureVector, rng: &mut R) -> Result<usize> {
        self.check_dim(x)?;
        let mut z = Vec::with_capacity(self.num_actions);
        self.sample_linear_scores(x.as_slice(), rng, &mut z);
        // sigmoid is monotone, so comparing linear scores avoids saturation ties
        Ok(argmax(&z))
    }

    /// Fraction of `num_draws` Thompson choices at `x` that pick `action`.
    pub fn action_prob<R: Rng + ?Sized>(
        &self,
        x: &FeatureVector,
        action: usize,
        num_draws: usize,
        rng: &mut R,
    ) -> Result<f64> {
        self.check_dim(x)?;
        self.check_action(action)?;
        if num_draws == 0 {
            return Err(Error::InvalidArgument("num_draws must be at least 1".into()));
        }
        let mut hits = 0usize;
        for _ in 0..num_draws {
            if self.choose(x, rng)? == action {
                hits += 1;
            }
        }
        Ok(hits as f64 / num_draws as f64)
    }

    /// Incorporates one observation for `action`. Returns the number of
    /// Newton iterations taken.
    pub fn update(&mut self, x: &FeatureVector, action: usize, reward: u8) -> Result<usize> {
        self.check_dim(x)?;
        self.check_action(action)?;
        let sign = match reward {
            0 => -1.0,
            1 => 1.0,
            r => return Err(Error::InvalidReward(r)),
        };
        let x = x.as_slice();
        let range = action * self.dim..(action + 1) * self.dim;
        let (w, iterations) = solve_mode(&self.means[range.clone()], &self.precisions[range.clone()], x, sign)?;
        let p = sigmoid(dot(&w, x));
        let curvature = p * (1.0 - p);
        for ((m, q), (&wi, &xi)) in self.means[range.clone()]
            .iter_mut()
            .zip(&mut self.precisions[range])
            .zip(w.iter().zip(x))
        {
            *m = wi;
            *q += xi * xi * curvature;
        }
        Ok(iterations)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Newton's method for the posterior mode, starting at the prior mean.
///
/// The Hessian is `diag(q) + c x x^T`, inverted with Sherman-Morrison.
fn solve_mode(mean: &[f64], precision: &[f64], x: &[f64], sign: f64) -> Result<(Vec<f64>, usize)> {
    let d = mean.len();
    let mut w = mean.to_vec();
    let mut grad = vec![0.0; d];
    for iteration in 1..=NEWTON_MAX_ITERATIONS {
        let z = dot(&w, x);
        let resid = sign * sigmoid(-sign * z);
        let p = sigmoid(z);
        let c = p * (1.0 - p);
        let mut x_dinv_g = 0.0;
        let mut x_dinv_x = 0.0;
        for i in 0..d {
            grad[i] = precision[i] * (w[i] - mean[i]) - resid * x[i];
            x_dinv_g += x[i] * grad[i] / precision[i];
            x_dinv_x += x[i] * x[i] / precision[i];
        }
        let coef = c * x_dinv_g / (1.0 + c * x_dinv_x);
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let step = -(grad[i] - coef * x[i]) / precision[i];
            w[i] += step;
            max_step = max_step.max(step.abs());
        }
        if !max_step.is_finite() {
            break;
        }
        if max_step < NEWTON_TOLERANCE {
            return Ok((w, iteration));
        }
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX_ITERATIONS,
    })
}
