//! Synthetic logged-experiment files with prescribed pool outcome rates.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::discretize::OutcomeMeasure;
use super::experiment::{write_experiment_csv, Condition, RawExperimentRecord};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Shape of a fixture: assigned students per quartile and the outcome rate of
/// each (quartile, condition) pool under `measure`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub quartile_sizes: [usize; 4],
    pub control_rates: [f64; 4],
    pub experimental_rates: [f64; 4],
    #[serde(default = "default_measure")]
    pub measure: OutcomeMeasure,
    /// Control-arm size per quartile; defaults to half of each quartile,
    /// rounded up.
    #[serde(default)]
    pub control_counts: Option<[usize; 4]>,
    /// Unassigned students added to every quartile on top of those needed to
    /// equalize quartile totals.
    #[serde(default)]
    pub extra_unassigned: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_measure() -> OutcomeMeasure {
    OutcomeMeasure::CompletedHw
}

pub const PRESETS: [&str; 5] = ["uneven", "even", "even-quickly", "opposed", "identical"];

impl FixtureSpec {
    /// Named fixtures. `uneven` and `even` copy the group sizes of the two
    /// logged problem sets; rates are qualitative stand-ins.
    pub fn preset(name: &str) -> Result<Self> {
        let (sizes, control, experimental, measure) = match name {
            "uneven" => (
                [113, 100, 69, 38],
                [0.72, 0.73, 0.71, 0.95],
                [0.83, 0.83, 0.87, 0.77],
                OutcomeMeasure::CompletedHw,
            ),
            "even" => (
                [33, 28, 34, 34],
                [0.95, 0.85, 0.86, 1.0],
                [0.86, 1.0, 1.0, 1.0],
                OutcomeMeasure::CompletedHw,
            ),
            "even-quickly" => (
                [33, 28, 34, 34],
                [0.74, 0.69, 0.57, 0.69],
                [0.50, 0.93, 0.69, 0.72],
                OutcomeMeasure::CompletedQuickly,
            ),
            // the smallest quartile prefers control, the rest experimental
            "opposed" => (
                [113, 100, 69, 38],
                [0.40, 0.40, 0.40, 0.80],
                [0.70, 0.70, 0.70, 0.40],
                OutcomeMeasure::CompletedHw,
            ),
            "identical" => (
                [113, 100, 69, 38],
                [0.40, 0.40, 0.40, 0.40],
                [0.80, 0.80, 0.80, 0.80],
                OutcomeMeasure::CompletedHw,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown fixture preset `{other}` (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(Self {
            quartile_sizes: sizes,
            control_rates: control,
            experimental_rates: experimental,
            measure,
            control_counts: None,
            extra_unassigned: 0,
            seed: 0,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn control_counts(&self) -> [usize; 4] {
        self.control_counts
            .unwrap_or_else(|| self.quartile_sizes.map(|n| n.div_ceil(2)))
    }

    fn validate(&self) -> Result<()> {
        let counts = self.control_counts();
        for q in 0..4 {
            let n = self.quartile_sizes[q];
            if counts[q] == 0 || counts[q] >= n {
                return Err(Error::InvalidArgument(format!(
                    "quartile Q{} needs at least one student per condition (size {n}, control {})",
                    q + 1,
                    counts[q]
                )));
            }
            for rate in [self.control_rates[q], self.experimental_rates[q]] {
                if !(0.0..=1.0).contains(&rate) {
                    return Err(Error::InvalidArgument(format!("rate {rate} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    fn rate(&self, quartile: usize, condition: Condition) -> f64 {
        match condition {
            Condition::Control => self.control_rates[quartile],
            Condition::Experimental => self.experimental_rates[quartile],
        }
    }
}

/// Success count for a pool: `floor(rate * size)`.
pub fn pool_successes(rate: f64, size: usize) -> usize {
    // the epsilon absorbs representation error in products such as 0.29 * 100
    ((rate * size as f64) + 1e-9).floor() as usize
}

/// Builds the fixture records.
///
/// Every quartile holds the same number of students (assigned plus
/// unassigned) and prior scores are distinct, so the interpolated quartile
/// cutoffs recover the requested assigned-group sizes exactly.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Vec<RawExperimentRecord>> {
    spec.validate()?;
    let mut rng = StreamRng::seed_from_u64(spec.seed);
    let per_quartile = spec.quartile_sizes.iter().copied().max().unwrap_or(0) + spec.extra_unassigned;
    let total = 4 * per_quartile;
    let control_counts = spec.control_counts();

    // (quartile, condition, success) for each assigned slot, before outcome encoding
    struct Slot {
        index: usize,
        condition: Option<Condition>,
        success: bool,
    }
    let mut slots: Vec<Slot> = Vec::with_capacity(total);
    for q in 0..4 {
        let mut positions: Vec<usize> = (q * per_quartile..(q + 1) * per_quartile).collect();
        positions.shuffle(&mut rng);
        let (assigned, unassigned) = positions.split_at(spec.quartile_sizes[q]);
        let (control, experimental) = assigned.split_at(control_counts[q]);
        for (condition, members) in [
            (Condition::Control, control),
            (Condition::Experimental, experimental),
        ] {
            let mut members = members.to_vec();
            members.shuffle(&mut rng);
            let wins = pool_successes(spec.rate(q, condition), members.len());
            for (i, &index) in members.iter().enumerate() {
                slots.push(Slot {
                    index,
                    condition: Some(condition),
                    success: i < wins,
                });
            }
        }
        for &index in unassigned {
            slots.push(Slot {
                index,
                condition: None,
                success: false,
            });
        }
    }
    slots.sort_by_key(|s| s.index);

    let total_successes = slots.iter().filter(|s| s.success).count();
    let mut failures: Vec<usize> = slots
        .iter()
        .filter(|s| s.condition.is_some() && !s.success)
        .map(|s| s.index)
        .collect();
    failures.shuffle(&mut rng);
    // For the quick-completion measure some failures finish slowly. Keeping
    // them no more numerous than the fast finishers pins the median below.
    let slow: std::collections::HashSet<usize> = match spec.measure {
        OutcomeMeasure::CompletedHw => Default::default(),
        OutcomeMeasure::CompletedQuickly => failures
            .iter()
            .copied()
            .take((failures.len() / 2).min(total_successes))
            .collect(),
    };

    let width = total.to_string().len();
    let records = slots
        .iter()
        .map(|s| {
            let prior = (s.index as f64 + 0.5) * 100.0 / total as f64;
            let (completed, problem_count) = match (s.condition, s.success, spec.measure) {
                (None, _, _) => (None, None),
                (Some(_), true, OutcomeMeasure::CompletedHw) => (Some(true), Some(3 + (s.index % 8) as u32)),
                (Some(_), true, OutcomeMeasure::CompletedQuickly) => (Some(true), Some(3)),
                (Some(_), false, _) if slow.contains(&s.index) => (Some(true), Some(20)),
                (Some(_), false, _) => (Some(false), None),
            };
            RawExperimentRecord {
                student_id: format!("s{:0width$}", s.index, width = width),
                prior_percent_correct: prior,
                condition: s.condition,
                completed,
                problem_count,
            }
        })
        .collect();
    Ok(records)
}

pub fn write_fixture(spec: &FixtureSpec, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let records = generate_fixture(spec)?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_experiment_csv(&records, std::io::BufWriter::new(file))?;
    Ok(records.len())
}
