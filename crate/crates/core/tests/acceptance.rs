//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs the full synthetic grid (six scenarios, seven feature counts, both
//! policies, 1000 trials, horizon 250) plus the minority-proportion sweeps,
//! then checks every criterion against its pinned tolerance.

use std::time::Instant;

use featbandit::env::{scenario_coefficients, scenario_table, Environment, ReplayEnvironment, ScenarioName};
use featbandit::io::{
    discretize, generate_fixture, read_metrics_csv, write_metrics_csv, Condition, FixtureSpec, SimConfig,
    SUPPORTED_FEATURE_COUNTS,
};
use featbandit::metrics::{summarize_batch, BatchSummary, Covariate, Metric, Stat};
use featbandit::policy::{encode_features, sigmoid, BetaPosterior, GaussianWeightPosterior, PolicyKind};
use featbandit::rng::StreamRng;
use featbandit::sim::run_batch;
use rand::{Rng, SeedableRng};

const TRIALS: usize = 1000;
const BUDGET_SECS: f64 = 600.0;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

const NC: PolicyKind = PolicyKind::NonContextual;
const CTX: PolicyKind = PolicyKind::Contextual;

fn stat(s: &BatchSummary, scenario: ScenarioName, policy: PolicyKind, f: usize, m: f64, metric: Metric) -> Stat {
    s.cell(scenario.as_str(), policy, f, Some(m))
        .and_then(|c| c.stat(metric))
        .unwrap_or_else(|| panic!("missing cell {scenario} {policy} F={f} m={m} {metric:?}"))
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn config(text: &str) -> SimConfig {
    SimConfig::from_toml(text).expect("acceptance config")
}

fn main() {
    let mut rep = Report { failures: 0 };
    let started = Instant::now();

    let grid = config(&format!(
        "scenario = [\"baseline\", \"universal1\", \"universal2\", \"universal3\", \"universal4\", \"personalized\"]\n\
         num_features = [1, 2, 3, 5, 7, 8, 10]\nhorizon = 250\nnum_trials = {TRIALS}\nseed = 2024\n"
    ));
    let grid_rows = run_batch(&grid).expect("grid").rows;
    let sweep = config(&format!(
        "scenario = [\"baseline\", \"universal1\", \"universal2\", \"universal3\", \"universal4\", \"personalized\"]\n\
         num_features = 1\nminority_prop = [0.1, 0.2, 0.3, 0.4, 0.5]\nhorizon = 250\nnum_trials = {TRIALS}\nseed = 2025\n"
    ));
    let sweep_rows = run_batch(&sweep).expect("sweep").rows;
    let grid_secs = started.elapsed().as_secs_f64();
    println!(
        "info: grid {} rows + sweep {} rows in {grid_secs:.1}s on {} worker threads",
        grid_rows.len(),
        sweep_rows.len(),
        std::thread::available_parallelism().map_or(1, |n| n.get())
    );

    let g = summarize_batch(&grid_rows);
    let sw = summarize_batch(&sweep_rows);
    let pers = ScenarioName::Personalized;

    // 1
    let a = stat(&g, pers, CTX, 1, 0.5, Metric::PropOptimalFirst50);
    let b = stat(&g, pers, CTX, 1, 0.5, Metric::PropOptimalLast50);
    rep.check(
        "1",
        within(a.mean, 0.61, 0.03) && within(b.mean, 0.88, 0.03),
        format!("personalized contextual F=1 first50 {:.4} (0.61±0.03), last50 {:.4} (0.88±0.03)", a.mean, b.mean),
    );

    // 2
    let a = stat(&g, pers, CTX, 10, 0.5, Metric::PropOptimalFirst50);
    let b = stat(&g, pers, CTX, 10, 0.5, Metric::PropOptimalLast50);
    rep.check(
        "2",
        within(a.mean, 0.53, 0.03) && within(b.mean, 0.68, 0.04),
        format!("personalized contextual F=10 first50 {:.4} (0.53±0.03), last50 {:.4} (0.68±0.04)", a.mean, b.mean),
    );

    // 3
    let overall: Vec<f64> = SUPPORTED_FEATURE_COUNTS
        .iter()
        .map(|&f| stat(&g, pers, NC, f, 0.5, Metric::PropOptimalAll).mean)
        .collect();
    let mean = overall.iter().sum::<f64>() / overall.len() as f64;
    let max = overall.iter().cloned().fold(f64::MIN, f64::max);
    rep.check(
        "3",
        within(mean, 0.50, 0.02) && max <= 0.52,
        format!("personalized noncontextual prop_optimal mean {mean:.4} (0.50±0.02), max over F {max:.4} (≤0.52)"),
    );

    // 4
    let mut bad = Vec::new();
    for name in ScenarioName::ALL {
        for &f in &SUPPORTED_FEATURE_COUNTS {
            let nc = stat(&g, name, NC, f, 0.5, Metric::PropOptimalAll).mean;
            let ctx = stat(&g, name, CTX, f, 0.5, Metric::PropOptimalAll).mean;
            let ok = if name == pers { ctx > nc } else { nc > ctx };
            if !ok {
                bad.push(format!("{name} F={f} nc {nc:.4} ctx {ctx:.4}"));
            }
        }
    }
    rep.check(
        "4",
        bad.is_empty(),
        if bad.is_empty() {
            "noncontextual ahead in baseline/universal, contextual ahead in personalized, every F".into()
        } else {
            format!("direction violated: {}", bad.join("; "))
        },
    );

    // 5
    let slope = g
        .slope("baseline", CTX, Covariate::NumFeatures, Metric::PropOptimalAll)
        .expect("baseline sweep slope");
    rep.check(
        "5",
        within(slope.slope.slope, -0.014, 0.005),
        format!(
            "baseline contextual slope of prop_optimal on F {:.4} (SE {:.4}, target -0.014±0.005)",
            slope.slope.slope, slope.slope.se
        ),
    );

    // 6
    let m = stat(&sw, pers, NC, 1, 0.1, Metric::PropOptimalGroup(1));
    rep.check(
        "6",
        within(m.mean, 0.15, 0.05),
        format!("personalized noncontextual minority 0.1 minority-group prop_optimal {:.4} (0.15±0.05)", m.mean),
    );

    // 7
    let props = [0.5, 0.4, 0.3, 0.2, 0.1];
    let mut bad = Vec::new();
    let mut seq = Vec::new();
    for name in ScenarioName::ALL {
        let s: Vec<Stat> = props
            .iter()
            .map(|&p| stat(&sw, name, CTX, 1, p, Metric::PropOptimalGroup(1)))
            .collect();
        for w in s.windows(2) {
            if w[1].mean > w[0].mean + w[0].se.max(w[1].se) {
                bad.push(name.to_string());
                break;
            }
        }
        seq.push(format!(
            "{name} [{}]",
            s.iter().map(|x| format!("{:.3}", x.mean)).collect::<Vec<_>>().join(" ")
        ));
    }
    rep.check(
        "7",
        bad.is_empty(),
        format!(
            "contextual F=1 minority-group prop_optimal over minority 0.5→0.1: {}{}",
            seq.join("; "),
            if bad.is_empty() { String::new() } else { format!(" — not monotone in {}", bad.join(", ")) }
        ),
    );

    // 8
    let disparity = |f: usize| {
        ScenarioName::ALL
            .iter()
            .map(|&n| stat(&g, n, CTX, f, 0.5, Metric::DisparityMax).mean)
            .sum::<f64>()
            / 6.0
    };
    let (d2, d10) = (disparity(2), disparity(10));
    let per_scenario: Vec<String> = [2, 10]
        .iter()
        .map(|&f| {
            let v: Vec<String> = ScenarioName::ALL
                .iter()
                .map(|&n| format!("{:.3}", stat(&g, n, CTX, f, 0.5, Metric::DisparityMax).mean))
                .collect();
            format!("F={f} [{}]", v.join(" "))
        })
        .collect();
    rep.check(
        "8",
        (0.08..=0.18).contains(&d2) && (0.60..=0.90).contains(&d10),
        format!(
            "mean disparity F=2 {d2:.4} ([0.08,0.18]), F=10 {d10:.4} ([0.60,0.90]); per scenario {}",
            per_scenario.join(", ")
        ),
    );

    // 9
    let refs = config(&format!(
        "scenario = \"baseline\"\npolicy = [\"always_a2\", \"uniform\"]\nhorizon = 250\nnum_trials = {TRIALS}\nseed = 9\n"
    ));
    let r = summarize_batch(&run_batch(&refs).expect("reference policies").rows);
    let a2 = r.cell("baseline", PolicyKind::Fixed(1), 1, Some(0.5)).unwrap().stat(Metric::AvgRewardAll).unwrap();
    let un = r.cell("baseline", PolicyKind::Uniform, 1, Some(0.5)).unwrap().stat(Metric::AvgRewardAll).unwrap();
    rep.check(
        "9",
        within(a2.mean, 0.60, 0.01) && within(un.mean, 0.50, 0.01),
        format!("baseline always-A2 reward {:.4} (0.60±0.01), uniform {:.4} (0.50±0.01)", a2.mean, un.mean),
    );

    // 10
    let props_ok = property_suite();
    rep.check(
        "10",
        props_ok.iter().all(|(_, ok)| *ok),
        props_ok
            .iter()
            .map(|(n, ok)| format!("{n} {}", if *ok { "ok" } else { "FAILED" }))
            .collect::<Vec<_>>()
            .join(", "),
    );

    // 11
    let opposed = replay_summary("opposed");
    let identical = replay_summary("identical");
    let q4 = |policy| {
        opposed
            .cells
            .iter()
            .find(|c| c.key.policy == policy)
            .and_then(|c| c.stat(Metric::PropOptimalGroup(3)))
            .unwrap()
            .mean
    };
    let all = |policy| {
        identical
            .cells
            .iter()
            .find(|c| c.key.policy == policy)
            .and_then(|c| c.stat(Metric::PropOptimalAll))
            .unwrap()
            .mean
    };
    let gap = q4(CTX) - q4(NC);
    let diff = (all(CTX) - all(NC)).abs();
    rep.check(
        "11",
        gap > 0.10 && diff < 0.03,
        format!(
            "opposed Q4 contextual {:.4} vs noncontextual {:.4} (gap {gap:.4} > 0.10); identical pools {:.4} vs {:.4} (|diff| {diff:.4} < 0.03)",
            q4(CTX),
            q4(NC),
            all(CTX),
            all(NC)
        ),
    );

    // 12
    rep.check(
        "12",
        grid_secs < BUDGET_SECS,
        format!("paper grid plus minority sweeps {grid_secs:.1}s (< {BUDGET_SECS}s)"),
    );

    println!(
        "acceptance: {} of 12 criteria passed in {:.1}s",
        12 - rep.failures,
        started.elapsed().as_secs_f64()
    );
    if rep.failures > 0 {
        std::process::exit(1);
    }
}

fn replay_summary(preset: &str) -> BatchSummary {
    let spec = FixtureSpec::preset(preset).unwrap();
    let ds = discretize(&generate_fixture(&spec).unwrap(), spec.measure).unwrap();
    let cfg = config(&format!("num_trials = {TRIALS}\nseed = 11\n"));
    let out = featbandit::sim::run_replay_batch(&cfg, &[(preset.to_string(), ds)]).unwrap();
    summarize_batch(&out.rows)
}

fn property_suite() -> Vec<(&'static str, bool)> {
    let mut out = Vec::new();
    let mut rng = StreamRng::seed_from_u64(10);

    // conjugacy bookkeeping
    let mut beta = BetaPosterior::uniform(2).unwrap();
    let mut wins = [0.0; 2];
    let mut pulls = [0.0; 2];
    for _ in 0..500 {
        let a = rng.random_range(0..2);
        let r = rng.random_bool(0.3) as u8;
        beta.update(a, r).unwrap();
        wins[a] += r as f64;
        pulls[a] += 1.0;
    }
    out.push((
        "conjugacy",
        (0..2).all(|a| beta.params(a) == (1.0 + wins[a], 1.0 + pulls[a] - wins[a])),
    ));

    // precision monotonicity and Newton residual
    let mut post = GaussianWeightPosterior::new(2, 11, 1.0).unwrap();
    let (mut monotone, mut residual) = (true, 0.0f64);
    for _ in 0..500 {
        let raw: Vec<u8> = (0..5).map(|_| rng.random_range(0..2)).collect();
        let x = encode_features(&raw).unwrap();
        let a = rng.random_range(0..2);
        let r = rng.random_bool(0.6) as u8;
        let (m0, q0) = (post.mean(a).to_vec(), post.precision(a).to_vec());
        post.update(&x, a, r).unwrap();
        let m1 = post.mean(a);
        let s = if r == 1 { 1.0 } else { -1.0 };
        let z: f64 = m1.iter().zip(x.as_slice()).map(|(w, xi)| w * xi).sum();
        let g = sigmoid(-s * z);
        for i in 0..11 {
            let xi = x.as_slice()[i];
            residual = residual.max((q0[i] * (m1[i] - m0[i]) - s * xi * g).abs());
            monotone &= post.precision(a)[i] >= q0[i];
        }
    }
    out.push(("precision monotonicity", monotone));
    out.push(("newton residual < 1e-5", residual < 1e-5));

    // generative equivalence
    let mut worst = 0.0f64;
    for name in ScenarioName::ALL {
        let t = scenario_table(name);
        for (k, c) in scenario_coefficients(&t).iter().enumerate() {
            for v in 0..2u8 {
                worst = worst.max((sigmoid(c.linear_form(&[v, 1, 0])) - t.prob(k, v as usize)).abs());
            }
        }
    }
    out.push(("generative equivalence", worst < 1e-12));

    // replay pool conservation
    let spec = FixtureSpec::preset("uneven").unwrap();
    let ds = discretize(&generate_fixture(&spec).unwrap(), spec.measure).unwrap();
    let env = ReplayEnvironment::new(&ds).unwrap();
    let pooled: usize = (1..=4u8)
        .map(|q| Condition::ALL.iter().map(|&c| env.pool(q, c).len()).sum::<usize>())
        .sum();
    let mut conserved = pooled == ds.records.len() && env.quartile_sizes() == [113, 100, 69, 38];
    for _ in 0..2000 {
        let s = env.sample_student(&mut rng);
        let a = rng.random_range(0..2);
        let r = env.draw_reward(&s, a, &mut rng);
        let q = s.group as u8 + 1;
        conserved &= env.pool(q, Condition::from_action(a).unwrap()).contains(&r);
    }
    out.push(("replay pool conservation", conserved));

    // byte-level determinism under worker counts
    let mut cfg = config("scenario = [\"universal2\", \"personalized\"]\nnum_features = [1, 5]\nhorizon = 50\nnum_trials = 200\n");
    let mut bytes = Vec::new();
    for workers in [1, 4] {
        cfg.workers = Some(workers);
        let mut buf = Vec::new();
        write_metrics_csv(&run_batch(&cfg).unwrap().rows, &mut buf).unwrap();
        bytes.push(buf);
    }
    out.push(("determinism across workers", bytes[0] == bytes[1]));

    // round trips
    let text = cfg.to_toml();
    let again = SimConfig::from_toml(&text).unwrap();
    let csv_rows = read_metrics_csv(bytes[0].as_slice()).unwrap();
    let mut rewritten = Vec::new();
    write_metrics_csv(&csv_rows, &mut rewritten).unwrap();
    out.push(("config/CSV round trips", again == cfg && again.to_toml() == text && rewritten == bytes[0]));
    out
}
