//! Monte-Carlo experiments: configuration, execution, artifacts and
//! parameter sweeps.

mod config;
mod experiment;
mod output;
mod svg;
mod sweep;

pub use config::{ExperimentConfig, InitialParams, TrackerSettings};
pub use experiment::{run_experiment, summarize, track_run, AbortedRun, Experiment, RunResult, Summary, Timing};
pub use output::{
    read_csv, write_artifacts, write_csv, write_frames, write_json, write_truth, FrameRow, SummaryRow, TrackRow,
    TruthRow,
};
pub use svg::{plot_overlay, render_overlay};
pub use sweep::{run_sweep, SweepPoint, SweepPreset, SweepResult};
