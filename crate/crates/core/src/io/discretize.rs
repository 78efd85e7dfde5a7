//! Turns logged records into quartile/condition outcome pools.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiment::{Condition, RawExperimentRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeMeasure {
    /// Reward 1 iff the student completed the assignment.
    CompletedHw,
    /// Reward 1 iff completed within the median problem count of completers.
    CompletedQuickly,
}

impl OutcomeMeasure {
    pub const ALL: [OutcomeMeasure; 2] = [OutcomeMeasure::CompletedHw, OutcomeMeasure::CompletedQuickly];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeMeasure::CompletedHw => "completed_hw",
            OutcomeMeasure::CompletedQuickly => "completed_quickly",
        }
    }
}

impl fmt::Display for OutcomeMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OutcomeMeasure::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown outcome measure `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignedRecord {
    pub student_id: String,
    pub quartile: u8,
    pub condition: Condition,
    pub outcome: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayDataset {
    /// Upper bounds (inclusive) of quartiles 1, 2 and 3.
    pub cutoffs: [f64; 3],
    pub measure: OutcomeMeasure,
    /// Median problem count among assigned completers, for `CompletedQuickly`.
    pub quickly_threshold: Option<f64>,
    pub records: Vec<AssignedRecord>,
}

impl ReplayDataset {
    pub fn quartile_sizes(&self) -> [usize; 4] {
        let mut sizes = [0; 4];
        for r in &self.records {
            sizes[r.quartile as usize - 1] += 1;
        }
        sizes
    }
}

/// Percentile by linear interpolation between order statistics
/// (`h = (n - 1) * p`). `sorted` must be ascending and non-empty.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Quartile of `value` given inclusive upper cutoffs.
pub fn quartile_of(value: f64, cutoffs: &[f64; 3]) -> u8 {
    cutoffs.iter().position(|&c| value <= c).map_or(4, |i| i as u8 + 1)
}

/// Computes quartile cutoffs over every record (assigned or not), drops
/// unassigned students and attaches the binary outcome.
pub fn discretize(records: &[RawExperimentRecord], measure: OutcomeMeasure) -> Result<ReplayDataset> {
    let mut priors: Vec<f64> = records.iter().map(|r| r.prior_percent_correct).collect();
    priors.sort_by(f64::total_cmp);
    let mut distinct = priors.clone();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 distinct prior_percent_correct values, got {}",
            distinct.len()
        )));
    }
    let cutoffs = [
        percentile(&priors, 0.25),
        percentile(&priors, 0.50),
        percentile(&priors, 0.75),
    ];

    let assigned: Vec<&RawExperimentRecord> = records.iter().filter(|r| r.is_assigned()).collect();

    let quickly_threshold = match measure {
        OutcomeMeasure::CompletedHw => None,
        OutcomeMeasure::CompletedQuickly => {
            let counts: Vec<f64> = assigned
                .iter()
                .filter(|r| r.completed == Some(true))
                .filter_map(|r| r.problem_count.map(f64::from))
                .collect();
            Some(median(&counts).ok_or_else(|| {
                Error::InvalidArgument("no assigned completers to set the quick-completion median".into())
            })?)
        }
    };

    let out: Vec<AssignedRecord> = assigned
        .iter()
        .map(|r| {
            let completed = r.completed == Some(true);
            let outcome = match quickly_threshold {
                None => completed,
                Some(t) => completed && r.problem_count.is_some_and(|c| f64::from(c) <= t),
            };
            AssignedRecord {
                student_id: r.student_id.clone(),
                quartile: quartile_of(r.prior_percent_correct, &cutoffs),
                condition: r.condition.expect("filtered to assigned"),
                outcome: u8::from(outcome),
            }
        })
        .collect();

    for quartile in 1..=4u8 {
        for condition in Condition::ALL {
            if !out.iter().any(|r| r.quartile == quartile && r.condition == condition) {
                return Err(Error::EmptyPool {
                    quartile,
                    condition: condition.code(),
                });
            }
        }
    }

    Ok(ReplayDataset {
        cutoffs,
        measure,
        quickly_threshold,
        records: out,
    })
}
