//! Result files: `indicators.csv` (one row per run), `summary.json`
//! (per-point means with 95% t-intervals) and, optionally, per-run event logs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::metrics::Indicators;
use crate::sim::events::write_log;
use crate::strategy::StrategyKind;
use crate::sweep::SweepRow;

/// Written in place of CI and TUC when no passenger was transported.
pub const ABSENT: &str = "NA";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to write: empty result table")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Input files and command echoed into the outputs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracts: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub n: usize,
    pub mean: f64,
    /// Absent for fewer than two values.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

/// Sample mean with a two-sided 95% Student-t interval.
pub fn mean_ci(values: &[f64]) -> Option<Interval> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some(Interval {
            n,
            mean,
            ci_low: None,
            ci_high: None,
        });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    Some(Interval {
        n,
        mean,
        ci_low: Some(mean - half),
        ci_high: Some(mean + half),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorSummary {
    pub name: &'static str,
    #[serde(flatten)]
    pub interval: Option<Interval>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub strategy: StrategyKind,
    pub axis_value: f64,
    pub n_vehicles: u32,
    pub capacity: u32,
    pub runs: usize,
    pub indicators: Vec<IndicatorSummary>,
}

impl PointSummary {
    pub fn get(&self, name: &str) -> Option<Interval> {
        self.indicators
            .iter()
            .find(|s| s.name == name)
            .and_then(|s| s.interval)
    }
}

/// Groups rows by (strategy, axis value), keeping first-seen order.
pub fn aggregate(rows: &[SweepRow]) -> Vec<PointSummary> {
    let mut keys: Vec<(StrategyKind, f64)> = Vec::new();
    for r in rows {
        let key = (r.strategy, r.axis_value);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(strategy, axis_value)| {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.axis_value == axis_value)
                .collect();
            let indicators = Indicators::NAMES
                .iter()
                .enumerate()
                .map(|(i, &name)| {
                    let present: Vec<f64> = group
                        .iter()
                        .filter_map(|r| r.indicators.values()[i])
                        .collect();
                    IndicatorSummary {
                        name,
                        interval: mean_ci(&present),
                    }
                })
                .collect();
            PointSummary {
                strategy,
                axis_value,
                n_vehicles: group[0].n_vehicles,
                capacity: group[0].capacity,
                runs: group.len(),
                indicators,
            }
        })
        .collect()
}

const LEAD_COLUMNS: [&str; 8] = [
    "strategy",
    "axis",
    "axis_value",
    "replication",
    "seed",
    "randomness_p",
    "n_vehicles",
    "capacity",
];
const TAIL_COLUMNS: [&str; 4] = [
    "requested_passengers",
    "rejected_passengers",
    "unsatisfied_passengers",
    "in_transit_groups",
];

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = LEAD_COLUMNS
        .iter()
        .chain(Indicators::NAMES.iter())
        .chain(TAIL_COLUMNS.iter())
        .copied()
        .collect();
    w.write_record(&header)?;
    for r in rows {
        let mut record = vec![
            r.strategy.to_string(),
            r.axis.as_str().to_string(),
            r.axis_value.to_string(),
            r.replication.to_string(),
            r.seed.to_string(),
            r.randomness_p.to_string(),
            r.n_vehicles.to_string(),
            r.capacity.to_string(),
        ];
        record.extend(
            r.indicators
                .values()
                .iter()
                .map(|v| v.map_or_else(|| ABSENT.to_string(), |x| x.to_string())),
        );
        record.extend([
            r.requested_passengers.to_string(),
            r.rejected_passengers.to_string(),
            r.unsatisfied_passengers.to_string(),
            r.in_transit_groups.to_string(),
        ]);
        w.write_record(&record)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: "indicators.csv".into(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SummaryDoc<'a> {
    provenance: &'a Provenance,
    runs: usize,
    points: Vec<PointSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub logs: Vec<PathBuf>,
}

pub fn log_file_name(row: &SweepRow) -> String {
    format!(
        "events_{}_{}_{}_r{}.ndjson",
        row.strategy,
        row.axis.as_str(),
        row.axis_value,
        row.replication
    )
}

pub fn emit_results(
    rows: &[SweepRow],
    out_dir: &Path,
    provenance: &Provenance,
) -> Result<EmittedFiles, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let csv_path = out_dir.join("indicators.csv");
    let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(rows, BufWriter::new(file))?;

    let summary_path = out_dir.join("summary.json");
    let doc = SummaryDoc {
        provenance,
        runs: rows.len(),
        points: aggregate(rows),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&summary_path, text).map_err(io_err(&summary_path))?;

    let mut logs = Vec::new();
    for row in rows {
        if let Some(log) = &row.log {
            let path = out_dir.join(log_file_name(row));
            let file = File::create(&path).map_err(io_err(&path))?;
            write_log(log, BufWriter::new(file)).map_err(io_err(&path))?;
            logs.push(path);
        }
    }

    Ok(EmittedFiles {
        csv: csv_path,
        summary: summary_path,
        logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SweepAxis;

    fn row(replication: u32, tuc: Option<f64>) -> SweepRow {
        SweepRow {
            axis: SweepAxis::RandomnessP,
            axis_value: 0.5,
            replication,
            seed: u64::from(replication),
            strategy: StrategyKind::Evar,
            randomness_p: 0.5,
            n_vehicles: 5,
            capacity: 8,
            indicators: Indicators {
                NP: if tuc.is_some() { 10 } else { 0 },
                TDD: 100.0,
                APTD: 2.0,
                ALF: 0.25,
                AWT: 5.0,
                AoBT: 6.0,
                APTT: 13.0,
                AVS: 30.0,
                CI: tuc.map(|_| 10.0),
                TPTT: 3.0,
                OC: 400.0,
                TUC: tuc,
            },
            requested_passengers: 12,
            rejected_passengers: 1,
            unsatisfied_passengers: 1,
            in_transit_groups: 0,
            log: None,
        }
    }

    #[test]
    fn csv_has_header_and_one_line_per_run() {
        let rows: Vec<_> = (0..4).map(|i| row(i, Some(43.0))).collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().next().unwrap().contains("NP,TDD,APTD,ALF,AWT,AoBT,APTT,AVS,CI,TPTT,OC,TUC"));
    }

    #[test]
    fn absent_marker_when_no_passengers() {
        let mut buf = Vec::new();
        write_csv(&[row(0, None)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data = text.lines().nth(1).unwrap();
        assert_eq!(data.matches(ABSENT).count(), 2);
    }

    #[test]
    fn mean_of_identical_rows_is_the_row() {
        let rows: Vec<_> = (0..3).map(|i| row(i, Some(43.0))).collect();
        let summary = aggregate(&rows);
        assert_eq!(summary.len(), 1);
        let tuc = summary[0].get("TUC").unwrap();
        assert_eq!(tuc.mean, 43.0);
        assert_eq!(tuc.ci_low, Some(43.0));
        assert_eq!(summary[0].get("ALF").unwrap().mean, 0.25);
    }

    #[test]
    fn mean_ci_edge_cases() {
        assert!(mean_ci(&[]).is_none());
        let single = mean_ci(&[2.0]).unwrap();
        assert_eq!(single.mean, 2.0);
        assert!(single.ci_low.is_none());
    }

    #[test]
    fn empty_table_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_results(&[], dir.path(), &Provenance::default()),
            Err(ReportError::Empty)
        ));
    }
}
