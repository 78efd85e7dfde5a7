use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use featbandit::io::{
    discretize, load_experiment_csv, read_metrics_csv, write_fixture, write_metrics_csv, write_steps_csv,
    FixtureSpec, SimConfig, StepLogMode, PRESETS,
};
use featbandit::metrics::{summarize_batch, MetricRow};
use featbandit::sim::{run_batch, run_replay_batch, BatchOutput};
use featbandit::{Error, ErrorKind, Result};

mod summary;

#[derive(Parser)]
#[command(name = "featbandit", version, about = "Thompson-sampling bandit simulations with student features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic simulation grid.
    Simulate(RunArgs),
    /// Replay a logged experiment with both policies.
    Replay {
        #[command(flatten)]
        run: RunArgs,
        /// Logged experiment CSV; overrides `dataset` in the config.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Write a synthetic logged-experiment CSV.
    Fixture {
        /// Named fixture.
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec",
              value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        preset: Option<String>,
        /// TOML fixture spec.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize one or more metrics CSV files.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Write the per-cell summary as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["none", "sampled", "full"])]
    step_log: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.trials {
            cfg.num_trials = n;
        }
        if let Some(out) = &self.out {
            cfg.output = out.display().to_string();
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(mode) = &self.step_log {
            cfg.step_log = mode.parse()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(io_err(path))?))
}

fn write_outputs(cfg: &SimConfig, out: &BatchOutput) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let metrics = dir.join("metrics.csv");
    let mut w = create(&metrics)?;
    write_metrics_csv(&out.rows, &mut w)?;
    w.flush().map_err(io_err(&metrics))?;
    if cfg.step_log != StepLogMode::None {
        let steps = dir.join("steps.csv");
        let mut w = create(&steps)?;
        write_steps_csv(&out.step_logs, &mut w)?;
        w.flush().map_err(io_err(&steps))?;
    }
    Ok(metrics)
}

fn finish(cfg: &SimConfig, out: BatchOutput) -> Result<()> {
    let path = write_outputs(cfg, &out)?;
    let summary = summarize_batch(&out.rows);
    let mut stdout = std::io::stdout().lock();
    summary::print(&mut stdout, &summary).map_err(io_err(Path::new("<stdout>")))?;
    eprintln!("wrote {} rows to {}", out.rows.len(), path.display());
    Ok(())
}

fn simulate(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let out = run_batch(&cfg)?;
    finish(&cfg, out)
}

fn replay(args: &RunArgs, dataset: Option<&Path>) -> Result<()> {
    let cfg = args.config()?;
    let path = dataset
        .map(Path::to_path_buf)
        .or_else(|| cfg.dataset.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Config("replay needs --dataset or `dataset` in the config".into()))?;
    let records = load_experiment_csv(&path)?;
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let datasets = cfg
        .outcome
        .iter()
        .map(|&m| Ok((name.clone(), discretize(&records, m)?)))
        .collect::<Result<Vec<_>>>()?;
    let out = run_replay_batch(&cfg, &datasets)?;
    finish(&cfg, out)
}

fn fixture(preset: Option<&str>, spec: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut spec = match (preset, spec) {
        (Some(name), _) => FixtureSpec::preset(name)?,
        (None, Some(path)) => FixtureSpec::from_toml(&fs::read_to_string(path).map_err(io_err(path))?)?,
        (None, None) => return Err(Error::Config("fixture needs --preset or --spec".into())),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let n = write_fixture(&spec, out)?;
    eprintln!("wrote {n} records to {}", out.display());
    Ok(())
}

fn report(files: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut rows: Vec<MetricRow> = Vec::new();
    for path in files {
        let file = fs::File::open(path).map_err(io_err(path))?;
        rows.extend(read_metrics_csv(std::io::BufReader::new(file)).map_err(|e| match e {
            Error::Header { expected, found } => Error::Header {
                expected,
                found: format!("{found} (in {})", path.display()),
            },
            other => other,
        })?);
    }
    let summary = summarize_batch(&rows);
    let mut stdout = std::io::stdout().lock();
    summary::print(&mut stdout, &summary).map_err(io_err(Path::new("<stdout>")))?;
    writeln!(stdout, "rows: {}", rows.len()).map_err(io_err(Path::new("<stdout>")))?;
    if let Some(path) = out {
        let mut w = create(path)?;
        summary::write_csv(&mut w, &summary).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))?;
    }
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Replay { run, dataset } => replay(run, dataset.as_deref()),
        Command::Fixture {
            preset,
            spec,
            seed,
            out,
        } => fixture(preset.as_deref(), spec.as_deref(), *seed, out),
        Command::Report { files, out } => report(files, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
