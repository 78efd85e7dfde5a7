use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn featbandit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featbandit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run featbandit")
}

fn lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

const SMALL: &str = "scenario = [\"baseline\", \"personalized\"]\nnum_features = [1, 3]\nhorizon = 50\n";

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("grid.toml"), SMALL).unwrap();
    for out in ["a", "b"] {
        let o = featbandit(
            &["simulate", "--config", "grid.toml", "--seed", "42", "--trials", "25", "--out", out],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(dir.path().join("a/metrics.csv")).unwrap();
    let b = fs::read(dir.path().join("b/metrics.csv")).unwrap();
    assert_eq!(a, b);
    let o = featbandit(
        &["simulate", "--config", "grid.toml", "--seed", "43", "--trials", "25", "--out", "c"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_ne!(a, fs::read(dir.path().join("c/metrics.csv")).unwrap());
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("grid.toml"), SMALL).unwrap();
    for (w, out) in [("1", "w1"), ("4", "w4")] {
        let o = featbandit(
            &["simulate", "--config", "grid.toml", "--trials", "30", "--workers", w, "--out", out],
            dir.path(),
        );
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("w1/metrics.csv")).unwrap(),
        fs::read(dir.path().join("w4/metrics.csv")).unwrap()
    );
}

#[test]
fn paper_grid_smoke_run_row_count() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("paper.toml"),
        "scenario = [\"baseline\", \"universal1\", \"universal2\", \"universal3\", \"universal4\", \"personalized\"]\n\
         num_features = [1, 2, 3, 5, 7, 8, 10]\nhorizon = 250\n",
    )
    .unwrap();
    let o = featbandit(&["simulate", "--config", "paper.toml", "--trials", "10", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // 6 scenarios x 7 feature counts x 2 policies x 10 trials, plus header
    assert_eq!(lines(&dir.path().join("out/metrics.csv")), 840 + 1);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("personalized"));
    assert!(stdout.contains("num_features"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "horizon = 50\nnum_trials = 3\noutput = \"from_config\"\n",
    )
    .unwrap();
    let o = featbandit(&["simulate", "--config", "c.toml"], dir.path());
    assert!(o.status.success());
    assert_eq!(lines(&dir.path().join("from_config/metrics.csv")), 1 + 6);
    let o = featbandit(&["simulate", "--config", "c.toml", "--trials", "5", "--out", "flag"], dir.path());
    assert!(o.status.success());
    assert_eq!(lines(&dir.path().join("flag/metrics.csv")), 1 + 10);
}

#[test]
fn step_log_is_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "horizon = 50\nnum_trials = 4\n").unwrap();
    let o = featbandit(&["simulate", "--config", "c.toml", "--step-log", "full", "--out", "o"], dir.path());
    assert!(o.status.success());
    let steps = fs::read_to_string(dir.path().join("o/steps.csv")).unwrap();
    assert!(steps.starts_with("scenario,num_features,horizon,minority_prop,policy,trial,step,context,action,reward,optimal"));
    assert_eq!(steps.lines().count(), 1 + 4 * 2 * 50);
    let o = featbandit(&["simulate", "--config", "c.toml", "--out", "n"], dir.path());
    assert!(o.status.success());
    assert!(!dir.path().join("n/steps.csv").exists());
}

#[test]
fn replay_uses_logged_horizon_and_quartile_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = featbandit(&["fixture", "--preset", "even", "--out", "even.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = featbandit(&["replay", "--dataset", "even.csv", "--trials", "6", "--out", "r"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("r/metrics.csv")).unwrap();
    let mut it = text.lines();
    assert!(it.next().unwrap().contains("prop_optimal_g1,prop_optimal_g2,prop_optimal_g3,prop_optimal_g4"));
    let rows: Vec<&str> = it.collect();
    // two outcome measures x 2 policies x 6 trials
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("129")));
    assert!(rows.iter().any(|r| r.contains("even:completed_quickly")));
}

#[test]
fn replay_from_config_dataset() {
    let dir = tempfile::tempdir().unwrap();
    assert!(featbandit(&["fixture", "--preset", "uneven", "--out", "u.csv"], dir.path()).status.success());
    fs::write(dir.path().join("r.toml"), "dataset = \"u.csv\"\noutcome = \"completed_hw\"\nnum_trials = 3\n").unwrap();
    let o = featbandit(&["replay", "--config", "r.toml", "--out", "r"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(lines(&dir.path().join("r/metrics.csv")), 1 + 6);
}

#[test]
fn report_merges_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.toml"), SMALL).unwrap();
    for (seed, out) in [("1", "s1"), ("2", "s2")] {
        let o = featbandit(&["simulate", "--config", "g.toml", "--seed", seed, "--trials", "7", "--out", out], dir.path());
        assert!(o.status.success());
    }
    let o = featbandit(
        &["report", "s1/metrics.csv", "s2/metrics.csv", "--out", "summary.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("rows: 112"), "{stdout}");
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("scenario,policy,num_features,horizon,minority_prop,metric,n,mean,se"));
    assert!(summary.lines().any(|l| l.contains(",prop_optimal_all,14,")));
}

#[test]
fn report_of_constant_column_has_zero_se() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "policy = \"always_a2\"\nhorizon = 50\nnum_trials = 5\n").unwrap();
    assert!(featbandit(&["simulate", "--config", "c.toml", "--out", "o"], dir.path()).status.success());
    let o = featbandit(&["report", "o/metrics.csv", "--out", "s.csv"], dir.path());
    assert!(o.status.success());
    let s = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    // always the optimal action in the baseline scenario
    assert!(s.lines().any(|l| l.ends_with(",prop_optimal_all,5,1,0")), "{s}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| featbandit(args, dir.path()).status.code();

    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["simulate", "--bogus"]), Some(1));
    assert_eq!(code(&["simulate", "--config", "missing.toml"]), Some(1));
    fs::write(dir.path().join("typo.toml"), "horizn = 250\n").unwrap();
    let o = featbandit(&["simulate", "--config", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizn"));
    assert_eq!(code(&["simulate", "--trials", "0"]), Some(1));
    assert_eq!(code(&["replay"]), Some(1));

    fs::write(dir.path().join("bad.csv"), "id,score\n1,2\n").unwrap();
    let o = featbandit(&["replay", "--dataset", "bad.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("student_id"));
    assert_eq!(code(&["replay", "--dataset", "nope.csv"]), Some(2));
    assert_eq!(code(&["report", "nope.csv"]), Some(2));
    fs::write(dir.path().join("m.csv"), "trial,policy\n").unwrap();
    assert_eq!(code(&["report", "m.csv"]), Some(2));
}

#[test]
fn empty_pool_fails_before_trials() {
    let dir = tempfile::tempdir().unwrap();
    // Q4 students all in control
    fs::write(dir.path().join("spec.toml"), "quartile_sizes = [10, 10, 10, 10]\ncontrol_rates = [0.5, 0.5, 0.5, 0.5]\nexperimental_rates = [0.5, 0.5, 0.5, 0.5]\n").unwrap();
    assert!(featbandit(&["fixture", "--spec", "spec.toml", "--out", "f.csv"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let mut out = String::new();
    let mut score_order: Vec<(f64, String)> = text
        .lines()
        .skip(1)
        .map(|l| (l.split(',').nth(1).unwrap().parse().unwrap(), l.to_string()))
        .collect();
    score_order.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.push_str(text.lines().next().unwrap());
    out.push('\n');
    for (i, (_, line)) in score_order.iter().enumerate() {
        let mut f: Vec<&str> = line.split(',').collect();
        if i >= 30 {
            f[2] = "C";
        }
        out.push_str(&f.join(","));
        out.push('\n');
    }
    fs::write(dir.path().join("f.csv"), out).unwrap();
    let o = featbandit(&["replay", "--dataset", "f.csv", "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Q4, condition E"));
    assert!(!dir.path().join("r/metrics.csv").exists());
}

#[test]
fn fixture_presets_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    assert!(featbandit(&["fixture", "--preset", "uneven", "--out", "a.csv"], dir.path()).status.success());
    assert!(featbandit(&["fixture", "--preset", "uneven", "--seed", "5", "--out", "b.csv"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let assigned = text.lines().skip(1).filter(|l| l.split(',').nth(2) != Some("")).count();
    assert_eq!(assigned, 320);
    assert_ne!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(featbandit(&["fixture", "--preset", "nope", "--out", "c.csv"], dir.path()).status.code(), Some(1));
    assert_eq!(featbandit(&["fixture", "--out", "c.csv"], dir.path()).status.code(), Some(1));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        featbandit::io::SimConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
