//! Browser bindings for three small experiments: a learning curve, a
//! minority-proportion sweep and policy disparity by feature count.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! each function and mirrored in `www/main.js`.

use featbandit::env::{scenario_table, ScenarioName, SyntheticEnvironment};
use featbandit::io::{DisparityMethod, PolicySelection, SimConfig};
use featbandit::metrics::{summarize_batch, Metric};
use featbandit::policy::{PolicyKind, Priors};
use featbandit::rng::mix_label;
use featbandit::sim::{run_batch, run_trial, TrialSetup};
use wasm_bindgen::prelude::*;

const MAX_TRIALS: usize = 2000;
const MAX_HORIZON: usize = 2000;

fn scenario(name: &str) -> Result<ScenarioName, String> {
    name.parse().map_err(|e: featbandit::Error| e.to_string())
}

fn check_trials(trials: usize) -> Result<(), String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be in 1..={MAX_TRIALS}"));
    }
    Ok(())
}

/// Per-step fraction of trials choosing an optimal action, noncontextual
/// steps first and then contextual: length `2 * horizon`.
pub fn learning_curve_values(
    scenario_name: &str,
    num_features: usize,
    minority_prop: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    check_trials(trials)?;
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(format!("horizon must be in 1..={MAX_HORIZON}"));
    }
    let name = scenario(scenario_name)?;
    let env = SyntheticEnvironment::new(scenario_table(name), num_features, minority_prop).map_err(|e| e.to_string())?;
    let master_seed = mix_label(seed, &format!("curve/{name}/F{num_features}/m{minority_prop}"));
    let mut out = vec![0.0; 2 * horizon];
    for trial in 0..trials as u64 {
        let setup = TrialSetup {
            master_seed,
            trial_index: trial,
            horizon,
            priors: Priors::default(),
        };
        for (p, kind) in [PolicyKind::NonContextual, PolicyKind::Contextual].into_iter().enumerate() {
            let record = run_trial(&env, kind, &setup).map_err(|e| e.to_string())?;
            for (t, s) in record.steps.iter().enumerate() {
                out[p * horizon + t] += s.optimal as u8 as f64;
            }
        }
    }
    out.iter_mut().for_each(|v| *v /= trials as f64);
    Ok(out)
}

pub const SWEEP_PROPS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

/// Minority-group proportion of optimal actions at minority proportions
/// 0.1..0.5: `[nc(0.1), ctx(0.1), nc(0.2), ctx(0.2), ...]`, length 10.
pub fn minority_sweep_values(scenario_name: &str, num_features: usize, trials: usize, seed: u64) -> Result<Vec<f64>, String> {
    check_trials(trials)?;
    let name = scenario(scenario_name)?;
    let cfg = SimConfig {
        scenario: vec![name],
        num_features: vec![num_features],
        minority_prop: SWEEP_PROPS.to_vec(),
        num_trials: trials,
        seed,
        custom_grid: true,
        disparity: DisparityMethod::Off,
        ..SimConfig::default()
    };
    let rows = run_batch(&cfg).map_err(|e| e.to_string())?.rows;
    let summary = summarize_batch(&rows);
    let mut out = Vec::with_capacity(10);
    for &m in &SWEEP_PROPS {
        for policy in [PolicyKind::NonContextual, PolicyKind::Contextual] {
            let v = summary
                .cell(name.as_str(), policy, num_features, Some(m))
                .and_then(|c| c.stat(Metric::PropOptimalGroup(1)))
                .map_or(f64::NAN, |s| s.mean);
            out.push(v);
        }
    }
    Ok(out)
}

pub const DISPARITY_FEATURES: [usize; 6] = [2, 3, 5, 7, 8, 10];

/// Mean contextual disparity after `horizon` students for F in
/// `{2, 3, 5, 7, 8, 10}`: `[mean, se]` pairs, length 12.
pub fn disparity_values(scenario_name: &str, horizon: usize, trials: usize, seed: u64) -> Result<Vec<f64>, String> {
    check_trials(trials)?;
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(format!("horizon must be in 1..={MAX_HORIZON}"));
    }
    let name = scenario(scenario_name)?;
    let cfg = SimConfig {
        scenario: vec![name],
        num_features: DISPARITY_FEATURES.to_vec(),
        horizon: Some(vec![horizon]),
        policy: vec![PolicySelection::Contextual],
        num_trials: trials,
        seed,
        custom_grid: true,
        ..SimConfig::default()
    };
    let rows = run_batch(&cfg).map_err(|e| e.to_string())?.rows;
    let summary = summarize_batch(&rows);
    let mut out = Vec::with_capacity(12);
    for &f in &DISPARITY_FEATURES {
        let s = summary
            .cell(name.as_str(), PolicyKind::Contextual, f, Some(0.5))
            .and_then(|c| c.stat(Metric::DisparityMax));
        out.push(s.map_or(f64::NAN, |s| s.mean));
        out.push(s.map_or(f64::NAN, |s| s.se));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn learning_curve(
    scenario: &str,
    num_features: usize,
    minority_prop: f64,
    horizon: usize,
    trials: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    learning_curve_values(scenario, num_features, minority_prop, horizon, trials, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn minority_sweep(scenario: &str, num_features: usize, trials: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    minority_sweep_values(scenario, num_features, trials, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn disparity_by_features(scenario: &str, horizon: usize, trials: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    disparity_values(scenario, horizon, trials, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_layout_and_range() {
        let v = learning_curve_values("personalized", 1, 0.5, 60, 40, 1).unwrap();
        assert_eq!(v.len(), 120);
        assert!(v.iter().all(|p| (0.0..=1.0).contains(p)));
        // contextual late steps beat noncontextual in the personalized scenario
        let late = |p: usize| v[p * 60 + 40..p * 60 + 60].iter().sum::<f64>() / 20.0;
        assert!(late(1) > late(0));
    }

    #[test]
    fn curve_is_deterministic() {
        let a = learning_curve_values("baseline", 3, 0.3, 30, 10, 7).unwrap();
        assert_eq!(a, learning_curve_values("baseline", 3, 0.3, 30, 10, 7).unwrap());
        assert_ne!(a, learning_curve_values("baseline", 3, 0.3, 30, 10, 8).unwrap());
    }

    #[test]
    fn sweep_layout() {
        let v = minority_sweep_values("personalized", 1, 30, 2).unwrap();
        assert_eq!(v.len(), 10);
        assert!(v.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn disparity_layout_and_growth() {
        let v = disparity_values("baseline", 100, 15, 3).unwrap();
        assert_eq!(v.len(), 12);
        assert!(v[10] > v[0], "F=10 {} vs F=2 {}", v[10], v[0]);
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(learning_curve_values("nope", 1, 0.5, 10, 1, 0).is_err());
        assert!(learning_curve_values("baseline", 0, 0.5, 10, 1, 0).is_err());
        assert!(learning_curve_values("baseline", 1, 0.5, 0, 1, 0).is_err());
        assert!(minority_sweep_values("baseline", 1, 0, 0).is_err());
        assert!(disparity_values("baseline", 50, MAX_TRIALS + 1, 0).is_err());
    }
}
