//! Seeded trials and batches of trials.
//!
//! A trial simulates one classroom: `horizon` students arrive one at a time,
//! the policy picks an action, an outcome is drawn and the policy updates.
//! Every random draw comes from a stream derived from `(cell seed, trial
//! index, purpose)`, so a batch produces the same rows for any worker count
//! and paired policies in one trial see the same arriving students.

use std::sync::Arc;

use crate::env::{scenario_table, Environment, ReplayEnvironment, StudentContext, SyntheticEnvironment};
use crate::error::{Error, Result};
use crate::io::{DisparityMethod, ReplayDataset, SimConfig, StepLogMode};
use crate::metrics::{metric_row, DisparityEstimator, MetricRow, RowLabels};
use crate::policy::{PolicyKind, PolicyState, Priors};
use crate::rng::{mix_label, stream_rng, OutcomeStream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub student: StudentContext,
    pub action: usize,
    pub reward: u8,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub policy: PolicyKind,
    pub num_groups: usize,
    pub steps: Vec<StepRecord>,
    pub final_state: PolicyState,
}

impl TrialRecord {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSetup {
    pub master_seed: u64,
    pub trial_index: u64,
    pub horizon: usize,
    pub priors: Priors,
}

pub fn run_trial(env: &dyn Environment, policy: PolicyKind, setup: &TrialSetup) -> Result<TrialRecord> {
    let mut state = PolicyState::new(policy, env.num_actions(), env.feature_dim(), &setup.priors)?;
    let mut arrivals = stream_rng(setup.master_seed, setup.trial_index, Stream::StudentArrival);
    let mut sampling = stream_rng(setup.master_seed, setup.trial_index, Stream::PolicySampling);
    let outcomes = OutcomeStream::new(setup.master_seed, setup.trial_index);

    let mut steps = Vec::with_capacity(setup.horizon);
    for t in 0..setup.horizon {
        let student = env.sample_student(&mut arrivals);
        let x = if state.uses_features() {
            let x = env.encode(&student)?;
            if x.dim() != env.feature_dim() {
                return Err(Error::DimensionMismatch {
                    expected: env.feature_dim(),
                    found: x.dim(),
                });
            }
            Some(x)
        } else {
            None
        };
        let action = state.choose(x.as_ref(), &mut sampling)?;
        let reward = env.draw_reward(&student, action, &mut outcomes.at(t, action));
        state.update(x.as_ref(), action, reward)?;
        let optimal = env.optimal_actions(&student).contains(action);
        steps.push(StepRecord {
            student,
            action,
            reward,
            optimal,
        });
    }
    Ok(TrialRecord {
        trial: setup.trial_index,
        policy,
        num_groups: env.num_groups(),
        steps,
        final_state: state,
    })
}

/// One grid cell ready to run: an environment plus the labels its rows carry.
#[derive(Clone)]
pub struct CellPlan {
    pub labels: RowLabels,
    pub env: Arc<dyn Environment>,
    pub horizon: usize,
    pub master_seed: u64,
}

/// Settings shared by every cell of a batch.
#[derive(Debug, Clone)]
pub struct BatchSettings {
    pub policies: Vec<PolicyKind>,
    pub num_trials: usize,
    pub priors: Priors,
    pub disparity: Option<DisparityEstimator>,
    pub step_log: StepLogMode,
    pub step_log_every: usize,
}

impl BatchSettings {
    pub fn from_config(config: &SimConfig) -> Self {
        let disparity = match config.disparity {
            DisparityMethod::MonteCarlo => Some(DisparityEstimator::ProjectedSampling(config.disparity_draws)),
            DisparityMethod::Exact => Some(DisparityEstimator::Exact),
            DisparityMethod::Off => None,
        };
        Self {
            policies: config.policies(),
            num_trials: config.num_trials,
            priors: config.priors(),
            disparity,
            step_log: config.step_log,
            step_log_every: config.step_log_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub labels: RowLabels,
    pub record: TrialRecord,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutput {
    /// Rows in (cell, trial, policy) order.
    pub rows: Vec<MetricRow>,
    pub step_logs: Vec<StepLog>,
}

/// Builds the synthetic grid described by `config`.
pub fn synthetic_plan(config: &SimConfig) -> Result<Vec<CellPlan>> {
    config
        .cells()
        .into_iter()
        .map(|cell| {
            let env = SyntheticEnvironment::new(scenario_table(cell.scenario), cell.num_features, cell.minority_prop)?;
            Ok(CellPlan {
                labels: RowLabels {
                    scenario: cell.scenario.to_string(),
                    num_features: cell.num_features,
                    horizon: cell.horizon,
                    minority_prop: Some(cell.minority_prop),
                },
                env: Arc::new(env),
                horizon: cell.horizon,
                master_seed: mix_label(config.seed, &cell.label()),
            })
        })
        .collect()
}

/// Builds replay cells, one per `(name, dataset)`. The horizon is the logged
/// experiment size unless the config overrides it.
pub fn replay_plan(config: &SimConfig, datasets: &[(String, ReplayDataset)]) -> Result<Vec<CellPlan>> {
    let mut cells = Vec::new();
    for (name, dataset) in datasets {
        let env = ReplayEnvironment::new(dataset)?;
        let horizons = config.horizon.clone().unwrap_or_else(|| vec![env.horizon()]);
        let env: Arc<dyn Environment> = Arc::new(env);
        for horizon in horizons {
            let scenario = format!("{name}:{}", dataset.measure);
            let labels = RowLabels {
                scenario: scenario.clone(),
                num_features: 1,
                horizon,
                minority_prop: None,
            };
            cells.push(CellPlan {
                master_seed: mix_label(config.seed, &format!("replay/{scenario}/T{horizon}")),
                labels,
                env: env.clone(),
                horizon,
            });
        }
    }
    Ok(cells)
}

struct UnitOutput {
    rows: Vec<MetricRow>,
    logs: Vec<StepLog>,
}

fn run_unit(cell: &CellPlan, trial: u64, settings: &BatchSettings) -> Result<UnitOutput> {
    let setup = TrialSetup {
        master_seed: cell.master_seed,
        trial_index: trial,
        horizon: cell.horizon,
        priors: settings.priors,
    };
    let keep_log = match settings.step_log {
        StepLogMode::None => false,
        StepLogMode::Sampled => trial.is_multiple_of(settings.step_log_every as u64),
        StepLogMode::Full => true,
    };
    let mut out = UnitOutput {
        rows: Vec::with_capacity(settings.policies.len()),
        logs: Vec::new(),
    };
    for &policy in &settings.policies {
        let record = run_trial(cell.env.as_ref(), policy, &setup).map_err(|e| Error::Trial {
            trial,
            source: Box::new(e),
        })?;
        let mut rng = stream_rng(cell.master_seed, trial, Stream::Disparity);
        let row = metric_row(&record, &cell.labels, settings.disparity, &mut rng).map_err(|e| Error::Trial {
            trial,
            source: Box::new(e),
        })?;
        out.rows.push(row);
        if keep_log {
            out.logs.push(StepLog {
                labels: cell.labels.clone(),
                record,
            });
        }
    }
    Ok(out)
}

/// Runs every trial of every cell. Units of work are `(cell, trial)` pairs;
/// results are merged in that order regardless of scheduling.
pub fn run_cells(cells: &[CellPlan], settings: &BatchSettings) -> Result<BatchOutput> {
    let units: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..settings.num_trials as u64).map(move |t| (c, t)))
        .collect();

    let run = |&(c, t): &(usize, u64)| run_unit(&cells[c], t, settings);

    #[cfg(feature = "parallel")]
    let results: Vec<Result<UnitOutput>> = {
        use rayon::prelude::*;
        units.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<UnitOutput>> = units.iter().map(run).collect();

    let mut output = BatchOutput::default();
    for result in results {
        let u = result?;
        output.rows.extend(u.rows);
        output.step_logs.extend(u.logs);
    }
    Ok(output)
}

/// Runs `f` on a pool with `workers` threads (or the global pool when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
                Ok(pool.install(f))
            }
            None => Ok(f()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(f())
    }
}

/// Synthetic batch over the full grid of `config`.
pub fn run_batch(config: &SimConfig) -> Result<BatchOutput> {
    config.validate()?;
    let cells = synthetic_plan(config)?;
    let settings = BatchSettings::from_config(config);
    with_workers(config.workers, || run_cells(&cells, &settings))?
}

/// Replay batch over the given datasets.
pub fn run_replay_batch(config: &SimConfig, datasets: &[(String, ReplayDataset)]) -> Result<BatchOutput> {
    config.validate()?;
    let cells = replay_plan(config, datasets)?;
    let settings = BatchSettings::from_config(config);
    with_workers(config.workers, || run_cells(&cells, &settings))?
}
