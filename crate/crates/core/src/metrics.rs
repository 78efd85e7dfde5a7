//! Outcome measures computed from trial records and final policy states.

use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::policy::{encode_features, GaussianWeightPosterior, PolicyKind, PolicyState};
use crate::rng::StreamRng;
use crate::sim::TrialRecord;

/// Width of the early and late windows.
pub const WINDOW: usize = 50;

pub fn first_window(horizon: usize) -> Range<usize> {
    0..WINDOW.min(horizon)
}

pub fn last_window(horizon: usize) -> Range<usize> {
    horizon - WINDOW.min(horizon)..horizon
}

fn check_window(record: &TrialRecord, window: &Option<Range<usize>>) -> Result<Range<usize>> {
    let h = record.horizon();
    match window {
        None => Ok(0..h),
        Some(w) if w.start <= w.end && w.end <= h => Ok(w.clone()),
        Some(w) => Err(Error::InvalidArgument(format!(
            "window {}..{} outside horizon {h}",
            w.start, w.end
        ))),
    }
}

/// Fraction of steps whose action was optimal, optionally restricted to a
/// window and a group. `None` when nothing is selected.
pub fn proportion_optimal(
    record: &TrialRecord,
    window: Option<Range<usize>>,
    group: Option<usize>,
) -> Result<Option<f64>> {
    let w = check_window(record, &window)?;
    let (mut hits, mut n) = (0usize, 0usize);
    for s in &record.steps[w] {
        if group.is_none_or(|g| s.student.group == g) {
            n += 1;
            hits += s.optimal as usize;
        }
    }
    Ok((n > 0).then(|| hits as f64 / n as f64))
}

pub fn average_reward(record: &TrialRecord, window: Option<Range<usize>>) -> Result<Option<f64>> {
    let w = check_window(record, &window)?;
    let steps = &record.steps[w];
    if steps.is_empty() {
        return Ok(None);
    }
    Ok(Some(steps.iter().map(|s| s.reward as f64).sum::<f64>() / steps.len() as f64))
}

/// Unweighted mean over the groups that have a value.
pub fn balanced_success_rate(per_group: &[Option<f64>]) -> Result<f64> {
    let present: Vec<f64> = per_group.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::InvalidArgument("no group values present".into()));
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

/// How `P(choose A1)` is estimated at each feature combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisparityEstimator {
    /// Repeated Thompson draws of every weight, independent per combination.
    FullSampling(usize),
    /// Draws of the score difference `z_1 - z_2 ~ N(mu, var)`, with the same
    /// standard-normal draws reused at every combination.
    ProjectedSampling(usize),
    /// Closed form `Phi(mu / sd)` of the score difference.
    Exact,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Max minus min of `P(choose A1)` over every setting of the irrelevant
/// features with the relevant feature fixed at `relevant_value`.
pub fn policy_disparity(
    state: &GaussianWeightPosterior,
    num_features: usize,
    relevant_value: u8,
    estimator: DisparityEstimator,
    rng: &mut StreamRng,
) -> Result<f64> {
    if num_features <= 1 {
        return Ok(0.0);
    }
    if relevant_value > 1 {
        return Err(Error::InvalidArgument(format!("relevant value {relevant_value} is not binary")));
    }
    let dim = 1 + 2 * num_features;
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    if state.num_actions() != 2 && !matches!(estimator, DisparityEstimator::FullSampling(_)) {
        return Err(Error::InvalidArgument("score-difference estimators need two actions".into()));
    }
    let draws = match estimator {
        DisparityEstimator::FullSampling(n) | DisparityEstimator::ProjectedSampling(n) if n == 0 => {
            return Err(Error::InvalidArgument("num_draws must be at least 1".into()))
        }
        DisparityEstimator::ProjectedSampling(n) => {
            let mut eps: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            eps.sort_by(f64::total_cmp);
            eps
        }
        _ => Vec::new(),
    };

    let irrelevant = num_features - 1;
    let mut raw = vec![0u8; num_features];
    raw[0] = relevant_value;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for combo in 0u64..1 << irrelevant {
        for (j, v) in raw[1..].iter_mut().enumerate() {
            *v = ((combo >> j) & 1) as u8;
        }
        let x = encode_features(&raw)?;
        let p = match estimator {
            DisparityEstimator::FullSampling(n) => state.action_prob(&x, 0, n, rng)?,
            _ => {
                let (m0, v0) = state.score_moments(0, x.as_slice());
                let (m1, v1) = state.score_moments(1, x.as_slice());
                let sd = (v0 + v1).sqrt();
                let t = (m0 - m1) / sd;
                if estimator == DisparityEstimator::Exact {
                    normal_cdf(t)
                } else {
                    // A1 wins ties, so count draws with t + eps >= 0
                    let below = draws.partition_point(|&e| e < -t);
                    (draws.len() - below) as f64 / draws.len() as f64
                }
            }
        };
        lo = lo.min(p);
        hi = hi.max(p);
    }
    Ok(hi - lo)
}

/// Identifiers carried by every row of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RowLabels {
    pub scenario: String,
    pub num_features: usize,
    pub horizon: usize,
    pub minority_prop: Option<f64>,
}

/// One trial's metrics, column for column as written to the metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub trial: u64,
    pub policy: PolicyKind,
    pub scenario: String,
    pub num_features: usize,
    pub horizon: usize,
    pub minority_prop: Option<f64>,
    pub prop_optimal_all: Option<f64>,
    pub prop_optimal_groups: Vec<Option<f64>>,
    pub prop_optimal_first50: Option<f64>,
    pub prop_optimal_last50: Option<f64>,
    pub avg_reward_all: Option<f64>,
    pub avg_reward_first50: Option<f64>,
    pub avg_reward_last50: Option<f64>,
    pub balanced_success_rate: Option<f64>,
    /// Mean over both relevant values of the per-value disparity.
    pub disparity_max: f64,
}

pub fn metric_row(
    record: &TrialRecord,
    labels: &RowLabels,
    disparity: Option<DisparityEstimator>,
    rng: &mut StreamRng,
) -> Result<MetricRow> {
    let h = record.horizon();
    let groups = (0..record.num_groups)
        .map(|g| proportion_optimal(record, None, Some(g)))
        .collect::<Result<Vec<_>>>()?;
    let balanced = balanced_success_rate(&groups).ok();
    let disparity_max = match (&record.final_state, disparity) {
        (PolicyState::Contextual(state), Some(est)) if labels.num_features > 1 => {
            let d0 = policy_disparity(state, labels.num_features, 0, est, rng)?;
            let d1 = policy_disparity(state, labels.num_features, 1, est, rng)?;
            (d0 + d1) / 2.0
        }
        _ => 0.0,
    };
    Ok(MetricRow {
        trial: record.trial,
        policy: record.policy,
        scenario: labels.scenario.clone(),
        num_features: labels.num_features,
        horizon: labels.horizon,
        minority_prop: labels.minority_prop,
        prop_optimal_all: proportion_optimal(record, None, None)?,
        prop_optimal_groups: groups,
        prop_optimal_first50: proportion_optimal(record, Some(first_window(h)), None)?,
        prop_optimal_last50: proportion_optimal(record, Some(last_window(h)), None)?,
        avg_reward_all: average_reward(record, None)?,
        avg_reward_first50: average_reward(record, Some(first_window(h)))?,
        avg_reward_last50: average_reward(record, Some(last_window(h)))?,
        balanced_success_rate: balanced,
        disparity_max,
    })
}

/// A numeric column of [`MetricRow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PropOptimalAll,
    PropOptimalGroup(usize),
    PropOptimalFirst50,
    PropOptimalLast50,
    AvgRewardAll,
    AvgRewardFirst50,
    AvgRewardLast50,
    BalancedSuccessRate,
    DisparityMax,
}

impl Metric {
    pub fn value(self, row: &MetricRow) -> Option<f64> {
        match self {
            Metric::PropOptimalAll => row.prop_optimal_all,
            Metric::PropOptimalGroup(g) => row.prop_optimal_groups.get(g).copied().flatten(),
            Metric::PropOptimalFirst50 => row.prop_optimal_first50,
            Metric::PropOptimalLast50 => row.prop_optimal_last50,
            Metric::AvgRewardAll => row.avg_reward_all,
            Metric::AvgRewardFirst50 => row.avg_reward_first50,
            Metric::AvgRewardLast50 => row.avg_reward_last50,
            Metric::BalancedSuccessRate => row.balanced_success_rate,
            Metric::DisparityMax => Some(row.disparity_max),
        }
    }

    /// CSV column name; group labels follow [`crate::io::metrics_header`].
    pub fn name(self, num_groups: usize) -> String {
        match self {
            Metric::PropOptimalAll => "prop_optimal_all".into(),
            Metric::PropOptimalGroup(g) => format!("prop_optimal_g{}", if num_groups == 2 { g } else { g + 1 }),
            Metric::PropOptimalFirst50 => "prop_optimal_first50".into(),
            Metric::PropOptimalLast50 => "prop_optimal_last50".into(),
            Metric::AvgRewardAll => "avg_reward_all".into(),
            Metric::AvgRewardFirst50 => "avg_reward_first50".into(),
            Metric::AvgRewardLast50 => "avg_reward_last50".into(),
            Metric::BalancedSuccessRate => "balanced_success_rate".into(),
            Metric::DisparityMax => "disparity_max".into(),
        }
    }

    /// Columns present for rows with `num_groups` groups, in CSV order.
    pub fn columns(num_groups: usize) -> Vec<Metric> {
        let mut v = vec![Metric::PropOptimalAll];
        v.extend((0..num_groups).map(Metric::PropOptimalGroup));
        v.extend([
            Metric::PropOptimalFirst50,
            Metric::PropOptimalLast50,
            Metric::AvgRewardAll,
            Metric::AvgRewardFirst50,
            Metric::AvgRewardLast50,
            Metric::BalancedSuccessRate,
            Metric::DisparityMax,
        ]);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean, sample standard deviation over `sqrt(n)`.
    pub se: f64,
}

pub fn mean_se(values: &[f64]) -> Option<Stat> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    // offsetting by the first value keeps constant inputs exact
    let base = values[0];
    let mean = base + values.iter().map(|v| v - base).sum::<f64>() / n as f64;
    let se = if n > 1 {
        let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Some(Stat { n, mean, se })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub n: usize,
    pub slope: f64,
    pub se: f64,
}

/// Ordinary least-squares slope of `y` on `x`. `None` when `x` is constant.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<Slope> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let se = if n > 2 {
        let intercept = my - slope * mx;
        let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Some(Slope { n, slope, se })
}

/// Grouping key of a grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKey {
    pub scenario: String,
    pub policy: PolicyKind,
    pub num_features: usize,
    pub horizon: usize,
    pub minority_prop: Option<f64>,
}

impl CellKey {
    fn of(row: &MetricRow) -> Self {
        Self {
            scenario: row.scenario.clone(),
            policy: row.policy,
            num_features: row.num_features,
            horizon: row.horizon,
            minority_prop: row.minority_prop,
        }
    }

    fn hash_key(&self) -> (String, PolicyKind, usize, usize, Option<u64>) {
        (
            self.scenario.clone(),
            self.policy,
            self.num_features,
            self.horizon,
            self.minority_prop.map(f64::to_bits),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub key: CellKey,
    pub num_groups: usize,
    pub stats: Vec<(Metric, Option<Stat>)>,
}

impl CellSummary {
    pub fn stat(&self, metric: Metric) -> Option<Stat> {
        self.stats.iter().find(|(m, _)| *m == metric).and_then(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariate {
    NumFeatures,
    MinorityProp,
}

impl Covariate {
    fn value(self, row: &MetricRow) -> Option<f64> {
        match self {
            Covariate::NumFeatures => Some(row.num_features as f64),
            Covariate::MinorityProp => row.minority_prop,
        }
    }
}

/// Slope of a trial-level metric across a sweep of one covariate, with every
/// other identifier held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSlope {
    pub scenario: String,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub covariate: Covariate,
    /// The covariate not being swept (feature count or minority proportion).
    pub held: Option<f64>,
    pub levels: usize,
    pub metric: Metric,
    pub slope: Slope,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchSummary {
    pub cells: Vec<CellSummary>,
    pub slopes: Vec<SweepSlope>,
}

impl BatchSummary {
    pub fn cell(&self, scenario: &str, policy: PolicyKind, num_features: usize, minority_prop: Option<f64>) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.key.scenario == scenario
                && c.key.policy == policy
                && c.key.num_features == num_features
                && c.key.minority_prop == minority_prop
        })
    }

    pub fn slope(&self, scenario: &str, policy: PolicyKind, covariate: Covariate, metric: Metric) -> Option<&SweepSlope> {
        self.slopes
            .iter()
            .find(|s| s.scenario == scenario && s.policy == policy && s.covariate == covariate && s.metric == metric)
    }
}

fn group_indices<K: std::hash::Hash + Eq>(rows: &[MetricRow], key: impl Fn(&MetricRow) -> K) -> Vec<Vec<usize>> {
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let slot = *index.entry(key(row)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(i);
    }
    groups
}

/// Per-cell means and standard errors, plus sweep slopes for the overall and
/// per-group proportion of optimal actions. Cells keep first-seen order.
pub fn summarize_batch(rows: &[MetricRow]) -> BatchSummary {
    let mut summary = BatchSummary::default();
    for idx in group_indices(rows, |r| CellKey::of(r).hash_key()) {
        let first = &rows[idx[0]];
        let num_groups = idx.iter().map(|&i| rows[i].prop_optimal_groups.len()).max().unwrap_or(0);
        let stats = Metric::columns(num_groups)
            .into_iter()
            .map(|m| {
                let values: Vec<f64> = idx.iter().filter_map(|&i| m.value(&rows[i])).collect();
                (m, mean_se(&values))
            })
            .collect();
        summary.cells.push(CellSummary {
            key: CellKey::of(first),
            num_groups,
            stats,
        });
    }

    for covariate in [Covariate::NumFeatures, Covariate::MinorityProp] {
        let held = |r: &MetricRow| match covariate {
            Covariate::NumFeatures => r.minority_prop.map(f64::to_bits),
            Covariate::MinorityProp => Some(r.num_features as u64),
        };
        let sweeps = group_indices(rows, |r| (r.scenario.clone(), r.policy, r.horizon, held(r)));
        for idx in sweeps {
            let first = &rows[idx[0]];
            let mut levels: Vec<u64> = idx
                .iter()
                .filter_map(|&i| covariate.value(&rows[i]).map(f64::to_bits))
                .collect();
            levels.sort_unstable();
            levels.dedup();
            if levels.len() < 2 {
                continue;
            }
            let num_groups = first.prop_optimal_groups.len();
            let metrics = std::iter::once(Metric::PropOptimalAll)
                .chain((0..num_groups).map(Metric::PropOptimalGroup))
                .chain([Metric::AvgRewardAll, Metric::DisparityMax]);
            for metric in metrics {
                let points: Vec<(f64, f64)> = idx
                    .iter()
                    .filter_map(|&i| Some((covariate.value(&rows[i])?, metric.value(&rows[i])?)))
                    .collect();
                if let Some(slope) = ols_slope(&points) {
                    summary.slopes.push(SweepSlope {
                        scenario: first.scenario.clone(),
                        policy: first.policy,
                        horizon: first.horizon,
                        covariate,
                        held: match covariate {
                            Covariate::NumFeatures => first.minority_prop,
                            Covariate::MinorityProp => Some(first.num_features as f64),
                        },
                        levels: levels.len(),
                        metric,
                        slope,
                    });
                }
            }
        }
    }
    summary
}
