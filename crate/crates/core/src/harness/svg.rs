use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::output::{read_csv, FrameRow, TrackRow, TruthRow};

const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN: f64 = 20.0;

/// 2σ ellipse of `N(center, X)` as `(rx, ry, angle in degrees)`.
fn ellipse_axes(xx: f64, xy: f64, yy: f64) -> (f64, f64, f64) {
    let half_tr = 0.5 * (xx + yy);
    let r = (0.25 * (xx - yy).powi(2) + xy * xy).sqrt();
    let l1 = (half_tr + r).max(0.0);
    let l2 = (half_tr - r).max(0.0);
    let angle = 0.5 * (2.0 * xy).atan2(xx - yy);
    (2.0 * l1.sqrt(), 2.0 * l2.sqrt(), angle.to_degrees())
}

struct Frame {
    x_min: f64,
    y_max: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (x - self.x_min + MARGIN, self.y_max - y + MARGIN)
    }
}

fn ellipse(out: &mut String, f: &Frame, (x, y): (f64, f64), (xx, xy, yy): (f64, f64, f64), style: &str) {
    let (cx, cy) = f.map(x, y);
    let (rx, ry, deg) = ellipse_axes(xx, xy, yy);
    // y points down in SVG, so rotations flip sign
    let _ = writeln!(
        out,
        r#"    <ellipse cx="{cx:.3}" cy="{cy:.3}" rx="{rx:.3}" ry="{ry:.3}" transform="rotate({:.3} {cx:.3} {cy:.3})" {style}/>"#,
        -deg
    );
}

/// SVG of one run: measurements, true extents (dashed) and estimated
/// extents every `stride` scans. Ellipses are 2σ boundaries of
/// `N(center, X)`.
pub fn render_overlay(truth: &[TruthRow], tracks: &[TrackRow], frames: &[FrameRow], stride: usize) -> String {
    let stride = stride.max(1);
    let xs = truth.iter().map(|r| r.x).chain(frames.iter().map(|r| r.x)).chain(tracks.iter().map(|r| r.px));
    let ys = truth.iter().map(|r| r.y).chain(frames.iter().map(|r| r.y)).chain(tracks.iter().map(|r| r.py));
    let (x_min, x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (y_min, y_max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (x_min, x_max, y_min, y_max) = if x_min.is_finite() && y_min.is_finite() {
        (x_min - MARGIN, x_max + MARGIN, y_min - MARGIN, y_max + MARGIN)
    } else {
        (0.0, 1.0, 0.0, 1.0)
    };
    let frame = Frame { x_min, y_max };
    let width = x_max - x_min + 2.0 * MARGIN;
    let height = y_max - y_min + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let last = truth.iter().map(|r| r.step).chain(frames.iter().map(|r| r.step)).max().unwrap_or(0);
    for step in (stride..=last).step_by(stride) {
        let _ = writeln!(out, r#"  <g class="step" data-step="{step}">"#);
        for m in frames.iter().filter(|m| m.step == step) {
            let (cx, cy) = frame.map(m.x, m.y);
            let fill = if m.label == 0 { "#999999" } else { COLORS[(m.label - 1) % COLORS.len()] };
            let _ = writeln!(out, r#"    <circle cx="{cx:.3}" cy="{cy:.3}" r="1.5" fill="{fill}" fill-opacity="0.6"/>"#);
        }
        for t in truth.iter().filter(|t| t.step == step) {
            ellipse(
                &mut out,
                &frame,
                (t.x, t.y),
                (t.x_xx, t.x_xy, t.x_yy),
                r#"fill="none" stroke="black" stroke-width="1" stroke-dasharray="4 2""#,
            );
        }
        for e in tracks.iter().filter(|e| e.step == step) {
            let color = COLORS[(e.target.max(1) - 1) % COLORS.len()];
            ellipse(
                &mut out,
                &frame,
                (e.px, e.py),
                (e.x_xx, e.x_xy, e.x_yy),
                &format!(r#"fill="none" stroke="{color}" stroke-width="1.5""#),
            );
        }
        let _ = writeln!(out, "  </g>");
    }
    out.push_str("</svg>\n");
    out
}

/// Reads `truth.csv`, `tracks.csv` and `frames.csv` from `dir` and writes
/// `overlay_run<run>.svg` there. Returns `None`, with a warning, when the
/// artifacts hold nothing for `run`.
pub fn plot_overlay(dir: &Path, run: usize, stride: usize) -> Result<Option<PathBuf>> {
    let truth: Vec<TruthRow> = read_csv::<TruthRow>(&dir.join("truth.csv"))?
        .into_iter()
        .filter(|r| r.run == run)
        .collect();
    let tracks_path = dir.join("tracks.csv");
    let tracks: Vec<TrackRow> = if tracks_path.exists() {
        read_csv::<TrackRow>(&tracks_path)?.into_iter().filter(|r| r.run == run).collect()
    } else {
        Vec::new()
    };
    let frames: Vec<FrameRow> = read_csv::<FrameRow>(&dir.join("frames.csv"))?
        .into_iter()
        .filter(|r| r.run == run)
        .collect();
    if truth.is_empty() && tracks.is_empty() && frames.is_empty() {
        log::warn!("no artifacts for run {run} in {}", dir.display());
        return Ok(None);
    }
    let path = dir.join(format!("overlay_run{run}.svg"));
    fs::write(&path, render_overlay(&truth, &tracks, &frames, stride))
        .map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(Some(path))
}
