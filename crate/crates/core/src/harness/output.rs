use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GgiwState;
use crate::sim::Simulation;

use super::{Experiment, Summary};

/// One posterior track state; `x_*` is the extent mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub run: usize,
    pub step: usize,
    pub target: usize,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
    pub p_pxpx: f64,
    pub p_pxpy: f64,
    pub p_pxvx: f64,
    pub p_pxvy: f64,
    pub p_pypy: f64,
    pub p_pyvx: f64,
    pub p_pyvy: f64,
    pub p_vxvx: f64,
    pub p_vxvy: f64,
    pub p_vyvy: f64,
    pub dof: f64,
    pub v_xx: f64,
    pub v_xy: f64,
    pub v_yy: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x_xx: f64,
    pub x_xy: f64,
    pub x_yy: f64,
}

impl TrackRow {
    pub fn new(run: usize, step: usize, target: usize, s: &GgiwState) -> Result<Self> {
        let x = s.extent_mean()?;
        let p = &s.cov;
        Ok(Self {
            run,
            step,
            target,
            px: s.mean[0],
            py: s.mean[1],
            vx: s.mean[2],
            vy: s.mean[3],
            p_pxpx: p[(0, 0)],
            p_pxpy: p[(0, 1)],
            p_pxvx: p[(0, 2)],
            p_pxvy: p[(0, 3)],
            p_pypy: p[(1, 1)],
            p_pyvx: p[(1, 2)],
            p_pyvy: p[(1, 3)],
            p_vxvx: p[(2, 2)],
            p_vxvy: p[(2, 3)],
            p_vyvy: p[(3, 3)],
            dof: s.dof,
            v_xx: s.scale[(0, 0)],
            v_xy: s.scale[(0, 1)],
            v_yy: s.scale[(1, 1)],
            alpha: s.gamma_shape,
            beta: s.gamma_rate,
            x_xx: x[(0, 0)],
            x_xy: x[(0, 1)],
            x_yy: x[(1, 1)],
        })
    }
}

/// True state at one scan (scan 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub run: usize,
    pub step: usize,
    pub target: usize,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub x_xx: f64,
    pub x_xy: f64,
    pub x_yy: f64,
}

/// One measurement; label 0 is clutter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRow {
    pub run: usize,
    pub step: usize,
    pub x: f64,
    pub y: f64,
    pub label: usize,
}

/// One line of the per-target aggregate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub lambda_c: f64,
    pub lambda_t: f64,
    pub target: usize,
    pub gwd_mean: f64,
    pub gwd_var: f64,
    pub rmse_pos_mean: f64,
    pub rmse_pos_var: f64,
    pub rmse_ext_mean: f64,
    pub rmse_ext_var: f64,
}

impl SummaryRow {
    pub fn from_summary(s: &Summary) -> Vec<Self> {
        s.targets
            .iter()
            .map(|t| Self {
                scheme: s.scheme.to_string(),
                lambda_c: s.lambda_c,
                lambda_t: s.lambda_t,
                target: t.target,
                gwd_mean: t.gwd.mean,
                gwd_var: t.gwd.var,
                rmse_pos_mean: t.rmse_pos.mean,
                rmse_pos_var: t.rmse_pos.var,
                rmse_ext_mean: t.rmse_ext.mean,
                rmse_ext_var: t.rmse_ext.var,
            })
            .collect()
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.into(), source })
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.into(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

fn truth_rows(run: usize, sim: &Simulation) -> impl Iterator<Item = TruthRow> + '_ {
    let steps = sim.frames.len();
    sim.truth.iter().enumerate().flat_map(move |(n, t)| {
        (0..=steps).map(move |k| {
            let c = t.center(k);
            TruthRow {
                run,
                step: k,
                target: n + 1,
                x: c.x,
                y: c.y,
                vx: t.velocity.x,
                vy: t.velocity.y,
                x_xx: t.extent[(0, 0)],
                x_xy: t.extent[(0, 1)],
                x_yy: t.extent[(1, 1)],
            }
        })
    })
}

fn frame_rows(run: usize, sim: &Simulation) -> impl Iterator<Item = FrameRow> + '_ {
    sim.frames.iter().enumerate().flat_map(move |(k, f)| {
        let labels = f.truth_labels.clone().unwrap_or_else(|| vec![0; f.len()]);
        f.points
            .iter()
            .zip(labels)
            .map(move |(p, label)| FrameRow { run, step: k + 1, x: p.x, y: p.y, label })
    })
}

/// `truth.csv` rows of several runs.
pub fn write_truth<'a>(path: &Path, sims: impl IntoIterator<Item = (usize, &'a Simulation)>) -> Result<()> {
    let rows: Vec<TruthRow> = sims.into_iter().flat_map(|(r, s)| truth_rows(r, s)).collect();
    write_csv(path, rows)
}

/// `frames.csv` rows of several runs.
pub fn write_frames<'a>(path: &Path, sims: impl IntoIterator<Item = (usize, &'a Simulation)>) -> Result<()> {
    let rows: Vec<FrameRow> = sims.into_iter().flat_map(|(r, s)| frame_rows(r, s)).collect();
    write_csv(path, rows)
}

/// Writes `config.json`, `summary.json`, `timing.json`, `summary.csv`,
/// `metrics.csv`, `tracks.csv`, `truth.csv` and `frames.csv` into `dir`.
pub fn write_artifacts(exp: &Experiment, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    write_json(&dir.join("config.json"), &exp.config)?;
    write_json(&dir.join("summary.json"), &exp.summary)?;
    write_json(&dir.join("timing.json"), &exp.timing)?;
    write_csv(&dir.join("summary.csv"), SummaryRow::from_summary(&exp.summary))?;
    write_csv(&dir.join("metrics.csv"), exp.runs.iter().flat_map(|r| r.records.iter().copied()))?;
    let mut tracks: Vec<TrackRow> = Vec::new();
    for r in &exp.runs {
        for (k, states) in r.estimates.iter().enumerate() {
            for (n, s) in states.iter().enumerate() {
                tracks.push(TrackRow::new(r.run, k + 1, n + 1, s)?);
            }
        }
    }
    write_csv(&dir.join("tracks.csv"), tracks)?;
    write_truth(&dir.join("truth.csv"), exp.runs.iter().map(|r| (r.run, &r.simulation)))?;
    write_frames(&dir.join("frames.csv"), exp.runs.iter().map(|r| (r.run, &r.simulation)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricsRecord;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows = vec![
            MetricsRecord { run: 0, step: 1, target: 1, gwd: 1.5, pos_err: 0.25, ext_err: -3.0 },
            MetricsRecord { run: 1, step: 2, target: 2, gwd: 0.1, pos_err: 0.2, ext_err: 0.3 },
        ];
        write_csv(&path, rows.clone()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("run,step,target,gwd,pos_err,ext_err\n"));
        assert_eq!(read_csv::<MetricsRecord>(&path).unwrap(), rows);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_csv::<FrameRow>(Path::new("/nonexistent/frames.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/frames.csv"));
    }
}
