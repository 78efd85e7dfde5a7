//! Metrics and step-level CSV files.

use std::io::{Read, Write};

use crate::env::RawContext;
use crate::error::{Error, Result};
use crate::metrics::MetricRow;
use crate::sim::StepLog;

const LEADING: [&str; 7] = [
    "trial",
    "policy",
    "scenario",
    "num_features",
    "horizon",
    "minority_prop",
    "prop_optimal_all",
];

const TRAILING: [&str; 8] = [
    "prop_optimal_first50",
    "prop_optimal_last50",
    "avg_reward_all",
    "avg_reward_first50",
    "avg_reward_last50",
    "balanced_success_rate",
    "disparity_max",
    "",
];

pub const METRICS_HEADER_SYNTHETIC: &str = "trial,policy,scenario,num_features,horizon,minority_prop,prop_optimal_all,prop_optimal_g0,prop_optimal_g1,prop_optimal_first50,prop_optimal_last50,avg_reward_all,avg_reward_first50,avg_reward_last50,balanced_success_rate,disparity_max";

pub const METRICS_HEADER_REPLAY: &str = "trial,policy,scenario,num_features,horizon,minority_prop,prop_optimal_all,prop_optimal_g1,prop_optimal_g2,prop_optimal_g3,prop_optimal_g4,prop_optimal_first50,prop_optimal_last50,avg_reward_all,avg_reward_first50,avg_reward_last50,balanced_success_rate,disparity_max";

/// Header for rows with `num_groups` groups. Two groups are labeled by the
/// relevant-feature value (`g0`, `g1`); otherwise groups are quartiles from `g1`.
pub fn metrics_header(num_groups: usize) -> Vec<String> {
    let first = if num_groups == 2 { 0 } else { 1 };
    let mut cols: Vec<String> = LEADING.iter().map(|s| s.to_string()).collect();
    cols.extend((0..num_groups).map(|g| format!("prop_optimal_g{}", g + first)));
    cols.extend(TRAILING.iter().filter(|s| !s.is_empty()).map(|s| s.to_string()));
    cols
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn row_fields(row: &MetricRow) -> Vec<String> {
    let mut f = vec![
        row.trial.to_string(),
        row.policy.to_string(),
        row.scenario.clone(),
        row.num_features.to_string(),
        row.horizon.to_string(),
        opt(row.minority_prop),
        opt(row.prop_optimal_all),
    ];
    f.extend(row.prop_optimal_groups.iter().map(|&g| opt(g)));
    f.extend([
        opt(row.prop_optimal_first50),
        opt(row.prop_optimal_last50),
        opt(row.avg_reward_all),
        opt(row.avg_reward_first50),
        opt(row.avg_reward_last50),
        opt(row.balanced_success_rate),
        row.disparity_max.to_string(),
    ]);
    f
}

/// Writes rows that all share one group count. Floats use the shortest
/// representation that reads back to the same value; missing values are empty.
pub fn write_metrics_csv<W: Write>(rows: &[MetricRow], writer: W) -> Result<()> {
    let num_groups = rows.first().map_or(2, |r| r.prop_optimal_groups.len());
    if let Some(r) = rows.iter().find(|r| r.prop_optimal_groups.len() != num_groups) {
        return Err(Error::InvalidArgument(format!(
            "cannot mix {num_groups}-group and {}-group rows in one file",
            r.prop_optimal_groups.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(metrics_header(num_groups))?;
    for row in rows {
        w.write_record(row_fields(row))?;
    }
    w.flush().map_err(|e| Error::io("<metrics>", e))?;
    Ok(())
}

fn parse<T: std::str::FromStr>(field: &str, column: &str, line: u64) -> Result<T> {
    field.parse().map_err(|_| Error::Row {
        line,
        message: format!("cannot parse {column} from `{field}`"),
    })
}

fn parse_opt(field: &str, column: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field, column, line).map(Some)
    }
}

pub fn read_metrics_csv<R: Read>(reader: R) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let num_groups = [2, 4]
        .into_iter()
        .find(|&g| metrics_header(g) == header)
        .ok_or_else(|| Error::Header {
            expected: format!("{METRICS_HEADER_SYNTHETIC} (or the replay variant)"),
            found: header.join(","),
        })?;
    let cols = metrics_header(num_groups);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| rec.get(i).unwrap_or("");
        let gs = 7;
        let t = gs + num_groups;
        rows.push(MetricRow {
            trial: parse(get(0), &cols[0], line)?,
            policy: get(1).parse().map_err(|e: Error| Error::Row {
                line,
                message: e.to_string(),
            })?,
            scenario: get(2).to_string(),
            num_features: parse(get(3), &cols[3], line)?,
            horizon: parse(get(4), &cols[4], line)?,
            minority_prop: parse_opt(get(5), &cols[5], line)?,
            prop_optimal_all: parse_opt(get(6), &cols[6], line)?,
            prop_optimal_groups: (gs..t)
                .map(|i| parse_opt(get(i), &cols[i], line))
                .collect::<Result<_>>()?,
            prop_optimal_first50: parse_opt(get(t), &cols[t], line)?,
            prop_optimal_last50: parse_opt(get(t + 1), &cols[t + 1], line)?,
            avg_reward_all: parse_opt(get(t + 2), &cols[t + 2], line)?,
            avg_reward_first50: parse_opt(get(t + 3), &cols[t + 3], line)?,
            avg_reward_last50: parse_opt(get(t + 4), &cols[t + 4], line)?,
            balanced_success_rate: parse_opt(get(t + 5), &cols[t + 5], line)?,
            disparity_max: parse(get(t + 6), &cols[t + 6], line)?,
        });
    }
    Ok(rows)
}

pub const STEPS_HEADER: [&str; 11] = [
    "scenario",
    "num_features",
    "horizon",
    "minority_prop",
    "policy",
    "trial",
    "step",
    "context",
    "action",
    "reward",
    "optimal",
];

/// One line per logged step. `context` is the feature bit string or the
/// quartile; `action` and `step` are 1-based.
pub fn write_steps_csv<W: Write>(logs: &[StepLog], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STEPS_HEADER)?;
    for log in logs {
        let l = &log.labels;
        for (t, s) in log.record.steps.iter().enumerate() {
            let context = match &s.student.raw {
                RawContext::Binary(bits) => bits.iter().map(|b| char::from(b'0' + b)).collect(),
                RawContext::Quartile(q) => q.to_string(),
            };
            w.write_record([
                l.scenario.clone(),
                l.num_features.to_string(),
                l.horizon.to_string(),
                opt(l.minority_prop),
                log.record.policy.to_string(),
                log.record.trial.to_string(),
                (t + 1).to_string(),
                context,
                (s.action + 1).to_string(),
                s.reward.to_string(),
                (s.optimal as u8).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<steps>", e))?;
    Ok(())
}
