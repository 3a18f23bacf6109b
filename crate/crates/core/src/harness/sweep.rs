use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::update::Scheme;

use super::output::{write_csv, SummaryRow};
use super::{run_experiment, write_artifacts, ExperimentConfig, Summary, Timing};

/// Named parameter grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepPreset {
    /// `(λ_c, λ_t)` in {(25,10), (25,20), (5,10), (5,20)}.
    Table3,
    /// `λ_t` from 10 to 30 in steps of 5 at `λ_c = 20`.
    LambdaT,
    /// `λ_c` from 0 to 20 in steps of 5 at `λ_t = 20`.
    LambdaC,
}

impl std::str::FromStr for SweepPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table3" => Ok(Self::Table3),
            "lambda-t" => Ok(Self::LambdaT),
            "lambda-c" => Ok(Self::LambdaC),
            _ => Err(Error::Config(format!("unknown sweep preset {s:?} (table3, lambda-t, lambda-c)"))),
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub scheme: Scheme,
    pub lambda_c: f64,
    pub lambda_t: f64,
}

impl SweepPoint {
    pub fn label(&self) -> String {
        format!("{}_c{}_t{}", self.scheme, self.lambda_c, self.lambda_t)
    }
}

impl SweepPreset {
    /// Rate pairs `(λ_c, λ_t)` of the preset.
    pub fn rates(self) -> Vec<(f64, f64)> {
        match self {
            Self::Table3 => vec![(25.0, 10.0), (25.0, 20.0), (5.0, 10.0), (5.0, 20.0)],
            Self::LambdaT => (0..5).map(|i| (20.0, 10.0 + 5.0 * i as f64)).collect(),
            Self::LambdaC => (0..5).map(|i| (5.0 * i as f64, 20.0)).collect(),
        }
    }

    /// Grid points for each scheme in `schemes`, rates outermost.
    pub fn points(self, schemes: &[Scheme]) -> Vec<SweepPoint> {
        self.rates()
            .into_iter()
            .flat_map(|(lambda_c, lambda_t)| {
                schemes.iter().map(move |&scheme| SweepPoint { scheme, lambda_c, lambda_t })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub point: SweepPoint,
    pub summary: Summary,
    pub timing: Timing,
}

/// Runs `base` at every point. With `out` set, each point's artifacts go
/// to `out/<label>/` and the combined table to `out/sweep_summary.csv`.
pub fn run_sweep(base: &ExperimentConfig, points: &[SweepPoint], out: Option<&Path>) -> Result<Vec<SweepResult>> {
    let mut results = Vec::with_capacity(points.len());
    for point in points {
        let mut cfg = base.clone();
        cfg.scenario.lambda_c = point.lambda_c;
        cfg.scenario.lambda_t = point.lambda_t;
        cfg.tracker.update.scheme = point.scheme;
        log::info!("sweep point {}", point.label());
        let exp = run_experiment(&cfg)?;
        if let Some(dir) = out {
            write_artifacts(&exp, &dir.join(point.label()))?;
        }
        results.push(SweepResult { point: *point, summary: exp.summary, timing: exp.timing });
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
        let rows: Vec<SummaryRow> = results.iter().flat_map(|r| SummaryRow::from_summary(&r.summary)).collect();
        write_csv(&dir.join("sweep_summary.csv"), rows)?;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table3_has_four_rate_pairs_per_scheme() {
        let pts = SweepPreset::Table3.points(&[Scheme::ClusterPruned, Scheme::Marginal]);
        assert_eq!(pts.len(), 8);
        assert_eq!((pts[0].lambda_c, pts[0].lambda_t), (25.0, 10.0));
        assert_eq!((pts[7].lambda_c, pts[7].lambda_t), (5.0, 20.0));
    }

    #[test]
    fn preset_names_parse() {
        assert_eq!("lambda-t".parse::<SweepPreset>().unwrap(), SweepPreset::LambdaT);
        assert_eq!(SweepPreset::LambdaC.rates()[0], (0.0, 20.0));
        assert!("x".parse::<SweepPreset>().is_err());
    }
}
