//! Output files: the full report as JSON, archive tables and 2-D plot series.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{RunReport, ScenarioReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// `archive_<scenario>.csv`
    Csv,
    /// `report.json`
    Report,
    /// `plot_<scenario>.csv`
    Plot,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "report" => Ok(Self::Report),
            "plot" => Ok(Self::Plot),
            other => Err(format!(
                "unknown output format `{other}` (expected csv, report or plot)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Keeps file names portable.
fn file_stem(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "scenario".into()
    } else {
        s
    }
}

pub fn report_to_string(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Archive table: header of objective names, one row per solution.
pub fn write_archive_csv<W: std::io::Write>(
    writer: W,
    scenario: &ScenarioReport,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&scenario.objectives)?;
    for row in &scenario.archive {
        w.write_record(row.objectives.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an archive table back as (header, rows).
pub fn read_archive_csv<R: std::io::Read>(
    reader: R,
) -> Result<(Vec<String>, Vec<Vec<f64>>), csv::Error> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| {
                    csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Corner points of the region dominated by a 2-D minimization front,
/// sorted by the first objective.
pub fn staircase(front: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = front.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, y) in pts {
        match out.last() {
            Some(&(_, py)) if y >= py => continue,
            Some(&(_, py)) => {
                out.push((x, py));
                out.push((x, y));
            }
            None => out.push((x, y)),
        }
    }
    out
}

/// Plot series `approx`, `approx_step` and, when the exact front is known,
/// `optimal` and `optimal_step`. The gap region lies between the two steps.
pub fn write_plot_csv<W: std::io::Write>(
    writer: W,
    scenario: &ScenarioReport,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["series", "x", "y"])?;
    let mut series = vec![("approx", scenario.archive_points())];
    if let Some(front) = scenario.oracle_front() {
        series.push(("optimal", front.to_vec()));
    }
    for (name, pts) in &series {
        for p in pts {
            w.write_record([name.to_string(), p[0].to_string(), p[1].to_string()])?;
        }
        for (x, y) in staircase(pts) {
            w.write_record([format!("{name}_step"), x.to_string(), y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the requested outputs into `dir`, returning the files written.
pub fn emit_outputs(
    report: &RunReport,
    formats: &[OutputFormat],
    dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        match f {
            OutputFormat::Report => {
                let path = dir.join("report.json");
                fs::write(&path, report_to_string(report)).map_err(io_err(&path))?;
                written.push(path);
            }
            OutputFormat::Csv => {
                for s in &report.scenarios {
                    if s.archive.is_empty() {
                        log::warn!(
                            "scenario `{}`: no feasible solution, archive table is header-only",
                            s.scenario
                        );
                    }
                    let path = dir.join(format!("archive_{}.csv", file_stem(&s.scenario)));
                    let file = fs::File::create(&path).map_err(io_err(&path))?;
                    write_archive_csv(file, s).map_err(csv_err(&path))?;
                    written.push(path);
                }
            }
            OutputFormat::Plot => {
                for s in &report.scenarios {
                    if s.objectives.len() != 2 {
                        log::warn!(
                            "scenario `{}`: plot data needs exactly two objectives, got {}",
                            s.scenario,
                            s.objectives.len()
                        );
                        continue;
                    }
                    let path = dir.join(format!("plot_{}.csv", file_stem(&s.scenario)));
                    let file = fs::File::create(&path).map_err(io_err(&path))?;
                    write_plot_csv(file, s).map_err(csv_err(&path))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{ArchiveRow, ExperimentConfig, Mode, OracleSummary};
    use crate::objectives::ObjectiveVector;
    use crate::plan::Chromosome;

    fn scenario_report(points: &[[f64; 2]]) -> ScenarioReport {
        ScenarioReport {
            scenario: "tiny one".into(),
            objectives: vec!["distance".into(), "makespan".into()],
            best_run: 0,
            generations: 12,
            converged_at: 2,
            archive: points
                .iter()
                .map(|p| ArchiveRow {
                    objectives: p.to_vec(),
                    vector: ObjectiveVector::from_array([1.0, 1.0, 1.0, p[0], 1.0, p[1]], true),
                    chromosome: Chromosome {
                        assign: vec![],
                        order: vec![],
                        gcs: vec![],
                        path_profile: vec![],
                        sensor: vec![],
                        return_profile: vec![],
                    },
                })
                .collect(),
            runs: vec![],
            oracle: Some(OracleSummary::Solved {
                nodes: 1,
                front: vec![vec![1.0, 3.0], vec![2.0, 1.0]],
            }),
            gap: None,
            rating: None,
        }
    }

    fn report(points: &[[f64; 2]]) -> RunReport {
        RunReport {
            mode: Mode::Solve,
            config: ExperimentConfig::default(),
            seeds: vec![1],
            scenarios: vec![scenario_report(points)],
        }
    }

    #[test]
    fn archive_table_has_header_and_rows() {
        let r = report(&[[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]]);
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&r, &[OutputFormat::Csv], dir.path()).unwrap();
        assert_eq!(files, vec![dir.path().join("archive_tiny_one.csv")]);
        let text = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next(), Some("distance,makespan"));
    }

    #[test]
    fn empty_archive_is_header_only() {
        let r = report(&[]);
        let mut buf = Vec::new();
        write_archive_csv(&mut buf, &r.scenarios[0]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "distance,makespan\n");
    }

    #[test]
    fn table_round_trip() {
        let pts = [[0.1 + 0.2, 1.0 / 3.0], [1e-17, 12345.678901234]];
        let r = report(&pts);
        let mut buf = Vec::new();
        write_archive_csv(&mut buf, &r.scenarios[0]).unwrap();
        let (header, rows) = read_archive_csv(buf.as_slice()).unwrap();
        assert_eq!(header, r.scenarios[0].objectives);
        assert_eq!(rows, r.scenarios[0].archive_points());
    }

    #[test]
    fn staircase_corners() {
        let s = staircase(&[vec![3.0, 1.0], vec![1.0, 3.0], vec![2.0, 2.0]]);
        assert_eq!(
            s,
            vec![(1.0, 3.0), (2.0, 3.0), (2.0, 2.0), (3.0, 2.0), (3.0, 1.0)]
        );
    }

    #[test]
    fn plot_has_both_fronts() {
        let r = report(&[[1.0, 3.0]]);
        let mut buf = Vec::new();
        write_plot_csv(&mut buf, &r.scenarios[0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("series,x,y\n"));
        for series in ["approx,", "approx_step,", "optimal,", "optimal_step,"] {
            assert!(text.lines().any(|l| l.starts_with(series)), "{series}");
        }
    }

    #[test]
    fn unwritable_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err =
            emit_outputs(&report(&[]), &[OutputFormat::Report], &blocker.join("out")).unwrap_err();
        assert!(matches!(err, ReportError::Io { .. }));
    }
}
