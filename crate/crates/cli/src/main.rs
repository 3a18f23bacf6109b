//! `ggiw-vb`: simulate, track, benchmark, sweep and plot extended-target
//! scenarios.
//!
//! Exit status: 0 on success, 2 on a configuration error, 3 when any
//! Monte-Carlo run was aborted by a tracker error, 1 otherwise.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use ggiw_vb::harness::{
    plot_overlay, run_experiment, run_sweep, write_artifacts, write_frames, write_json, write_truth,
    ExperimentConfig, SweepPreset,
};
use ggiw_vb::sim::simulate_run;
use ggiw_vb::{Error, Scheme};

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "ggiw-vb", version, about = "Variational-Bayes GGIW extended-target tracking harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground truth and measurement frames only.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the tracker over Monte-Carlo runs and write all artifacts.
    Track {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render SVG overlays of run 0 every N scans.
        #[arg(long)]
        plot_stride: Option<usize>,
    },
    /// Time the association schemes with one worker and with `--workers`.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Schemes to time, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "cluster_pruned,marginal")]
        schemes: Vec<Scheme>,
    },
    /// Run a named parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// table3, lambda-t or lambda-c.
        #[arg(long)]
        preset: SweepPreset,
        #[arg(long, value_delimiter = ',', default_value = "cluster_pruned,marginal")]
        schemes: Vec<Scheme>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Render SVG overlays from the CSV artifacts of `track`.
    Plot {
        /// Directory holding truth.csv, tracks.csv and frames.csv.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long, default_value_t = 3)]
        stride: usize,
    },
    /// Print the default experiment configuration as JSON.
    Defaults,
}

/// Config file plus command-line overrides.
#[derive(Args)]
struct Common {
    /// JSON experiment configuration; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    lambda_c: Option<f64>,
    #[arg(long)]
    lambda_t: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.scenario.seed = s;
        }
        if let Some(r) = self.runs {
            cfg.mc_runs = r;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(s) = self.scheme {
            cfg.tracker.update.scheme = s;
        }
        if let Some(c) = self.lambda_c {
            cfg.scenario.lambda_c = c;
        }
        if let Some(t) = self.lambda_t {
            cfg.scenario.lambda_t = t;
        }
        if let Some(k) = self.steps {
            cfg.scenario.duration_steps = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A failure that maps to exit status 3.
#[derive(Debug)]
struct RunsAborted(usize);

impl std::fmt::Display for RunsAborted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} Monte-Carlo run(s) aborted by tracker errors", self.0)
    }
}

impl std::error::Error for RunsAborted {}

fn output_dir(explicit: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    explicit.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn simulate(common: &Common, out: &Path) -> anyhow::Result<()> {
    let cfg = common.resolve()?;
    let sims = (0..cfg.mc_runs)
        .map(|r| simulate_run(&cfg.scenario, r))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join("config.json"), &cfg)?;
    write_truth(&out.join("truth.csv"), sims.iter().enumerate())?;
    write_frames(&out.join("frames.csv"), sims.iter().enumerate())?;
    say!("wrote {} run(s) to {}", cfg.mc_runs, out.display());
    Ok(())
}

fn track(common: &Common, out: Option<PathBuf>, plot_stride: Option<usize>) -> anyhow::Result<()> {
    let cfg = common.resolve()?;
    let out = output_dir(out, &cfg);
    let exp = run_experiment(&cfg)?;
    write_artifacts(&exp, &out)?;
    if let Some(stride) = plot_stride {
        plot_overlay(&out, 0, stride)?;
    }
    let s = &exp.summary;
    say!(
        "{} runs ({} completed), scheme {}, lambda_c {}, lambda_t {}",
        s.mc_runs, s.completed_runs, s.scheme, s.lambda_c, s.lambda_t
    );
    for t in &s.targets {
        say!(
            "  target {}: GWD {:.3} (var {:.3}), RMSE pos {:.3}, RMSE ext {:.3}",
            t.target, t.gwd.mean, t.gwd.var, t.rmse_pos.mean, t.rmse_ext.mean
        );
    }
    say!("tracking time {:.2} s per run; artifacts in {}", exp.timing.tracking_seconds_per_run, out.display());
    if exp.any_aborted() {
        return Err(RunsAborted(s.aborted.len()).into());
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct BenchRow {
    scheme: Scheme,
    workers: usize,
    mc_runs: usize,
    total_seconds: f64,
    tracking_seconds_per_run: f64,
    gwd_mean: Vec<f64>,
}

fn bench(common: &Common, out: Option<PathBuf>, schemes: &[Scheme]) -> anyhow::Result<()> {
    if common.seed.is_none() {
        bail!(Error::Config("bench requires --seed for reproducibility".into()));
    }
    let cfg = common.resolve()?;
    let mut worker_counts = vec![1];
    if cfg.workers != 1 {
        worker_counts.push(cfg.workers);
    }
    let mut rows = Vec::new();
    let mut aborted = 0;
    say!("{:<16} {:>8} {:>12} {:>16}", "scheme", "workers", "total [s]", "tracking/run [s]");
    for &scheme in schemes {
        for &workers in &worker_counts {
            let mut c = cfg.clone();
            c.tracker.update.scheme = scheme;
            c.workers = workers;
            let exp = run_experiment(&c)?;
            aborted += exp.summary.aborted.len();
            say!(
                "{:<16} {:>8} {:>12.3} {:>16.3}",
                scheme.name(),
                workers,
                exp.timing.total_seconds,
                exp.timing.tracking_seconds_per_run
            );
            rows.push(BenchRow {
                scheme,
                workers,
                mc_runs: c.mc_runs,
                total_seconds: exp.timing.total_seconds,
                tracking_seconds_per_run: exp.timing.tracking_seconds_per_run,
                gwd_mean: exp.summary.targets.iter().map(|t| t.gwd.mean).collect(),
            });
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write_json(&dir.join("bench.json"), &rows)?;
    }
    if aborted > 0 {
        return Err(RunsAborted(aborted).into());
    }
    Ok(())
}

fn sweep(common: &Common, preset: SweepPreset, schemes: &[Scheme], out: &Path) -> anyhow::Result<()> {
    let cfg = common.resolve()?;
    let results = run_sweep(&cfg, &preset.points(schemes), Some(out))?;
    let mut aborted = 0;
    for r in &results {
        aborted += r.summary.aborted.len();
        let gwd: Vec<String> = r.summary.targets.iter().map(|t| format!("{:.3}", t.gwd.mean)).collect();
        say!(
            "{:<16} lambda_c {:>5} lambda_t {:>5}  GWD [{}]  {:.2} s/run",
            r.point.scheme.name(),
            r.point.lambda_c,
            r.point.lambda_t,
            gwd.join(", "),
            r.timing.tracking_seconds_per_run
        );
    }
    say!("summary table in {}", out.join("sweep_summary.csv").display());
    if aborted > 0 {
        return Err(RunsAborted(aborted).into());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { common, out } => simulate(&common, &out),
        Command::Track { common, out, plot_stride } => track(&common, out, plot_stride),
        Command::Bench { common, out, schemes } => bench(&common, out, &schemes),
        Command::Sweep { common, preset, schemes, out } => sweep(&common, preset, &schemes, &out),
        Command::Plot { input, run, stride } => {
            if let Some(path) = plot_overlay(&input, run, stride)? {
                say!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Defaults => {
            say!("{}", serde_json::to_string_pretty(&ExperimentConfig::default())?);
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<RunsAborted>().is_some() {
        3
    } else if matches!(err.downcast_ref::<Error>(), Some(Error::Config(_))) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
