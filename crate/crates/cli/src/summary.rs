//! Fixed-precision summary tables.

use std::io::{self, Write};

use featbandit::metrics::{BatchSummary, CellSummary, Covariate, Metric};

fn cell_value(c: &CellSummary, m: Metric) -> String {
    c.stat(m).map_or_else(|| "-".into(), |s| format!("{:.4}", s.mean))
}

fn minority(m: Option<f64>) -> String {
    m.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

pub fn print(w: &mut impl Write, s: &BatchSummary) -> io::Result<()> {
    let mut layout = None;
    for c in &s.cells {
        if layout != Some(c.num_groups) {
            layout = Some(c.num_groups);
            let groups: String = (0..c.num_groups)
                .map(|g| format!(" {:>7}", Metric::PropOptimalGroup(g).name(c.num_groups).trim_start_matches("prop_optimal_")))
                .collect();
            writeln!(
                w,
                "{:<28} {:<14} {:>3} {:>5} {:>5} {:>5} {:>15}{groups} {:>7} {:>7} {:>15} {:>8} {:>9}",
                "scenario", "policy", "F", "T", "minor", "n", "prop_opt±se", "first50", "last50", "reward±se", "balanced", "disparity"
            )?;
        }
        let po = c.stat(Metric::PropOptimalAll);
        let rw = c.stat(Metric::AvgRewardAll);
        let pm = |s: Option<featbandit::metrics::Stat>| {
            s.map_or_else(|| "-".into(), |s| format!("{:.4}±{:.4}", s.mean, s.se))
        };
        let groups: String = (0..c.num_groups)
            .map(|g| format!(" {:>7}", cell_value(c, Metric::PropOptimalGroup(g))))
            .collect();
        writeln!(
            w,
            "{:<28} {:<14} {:>3} {:>5} {:>5} {:>5} {:>15}{groups} {:>7} {:>7} {:>15} {:>8} {:>9}",
            c.key.scenario,
            c.key.policy.to_string(),
            c.key.num_features,
            c.key.horizon,
            minority(c.key.minority_prop),
            po.map_or(0, |s| s.n),
            pm(po),
            cell_value(c, Metric::PropOptimalFirst50),
            cell_value(c, Metric::PropOptimalLast50),
            pm(rw),
            cell_value(c, Metric::BalancedSuccessRate),
            cell_value(c, Metric::DisparityMax),
        )?;
    }
    if !s.slopes.is_empty() {
        writeln!(w)?;
        writeln!(
            w,
            "{:<28} {:<14} {:>5} {:<14} {:>6} {:<22} {:>8} {:>7} {:>6}",
            "sweep", "policy", "T", "covariate", "held", "metric", "slope", "se", "levels"
        )?;
        for sl in &s.slopes {
            let (cov, held) = match sl.covariate {
                Covariate::NumFeatures => ("num_features", minority(sl.held)),
                Covariate::MinorityProp => ("minority_prop", sl.held.map_or("-".into(), |f| format!("F={f}"))),
            };
            let groups = s
                .cells
                .iter()
                .find(|c| c.key.scenario == sl.scenario)
                .map_or(2, |c| c.num_groups);
            writeln!(
                w,
                "{:<28} {:<14} {:>5} {:<14} {:>6} {:<22} {:>8.4} {:>7.4} {:>6}",
                sl.scenario,
                sl.policy.to_string(),
                sl.horizon,
                cov,
                held,
                sl.metric.name(groups),
                sl.slope.slope,
                sl.slope.se,
                sl.levels
            )?;
        }
    }
    Ok(())
}

pub fn write_csv(w: &mut impl Write, s: &BatchSummary) -> io::Result<()> {
    writeln!(w, "scenario,policy,num_features,horizon,minority_prop,metric,n,mean,se")?;
    for c in &s.cells {
        for (m, stat) in &c.stats {
            if let Some(st) = stat {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    c.key.scenario,
                    c.key.policy,
                    c.key.num_features,
                    c.key.horizon,
                    c.key.minority_prop.map_or_else(String::new, |v| v.to_string()),
                    m.name(c.num_groups),
                    st.n,
                    st.mean,
                    st.se
                )?;
            }
        }
    }
    Ok(())
}
