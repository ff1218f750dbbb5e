//! End-to-end experiment runs and their written outputs.

mod common;

use std::fs;

use uavplan_core::experiment::{run_experiment, ExperimentConfig, Mode, OracleSummary};
use uavplan_core::objectives::objectives_of;
use uavplan_core::report::{emit_outputs, read_archive_csv, OutputFormat};
use uavplan_core::{evaluate, GaConfig, ObjectiveSelection, PlanningContext};

use common::{generate, recipe};

fn config(repetitions: usize) -> ExperimentConfig {
    ExperimentConfig {
        ga: GaConfig {
            population_size: 100,
            elite_size: 20,
            seed: 9,
            ..GaConfig::default()
        },
        repetitions,
        ..ExperimentConfig::default()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn solve_archive_rows_reevaluate_identically() {
    let s = generate(recipe("solve", [1, 1, 1, 0], [1, 1, 0, 0], 1, 1, 31));
    let ctx = PlanningContext::new(&s).unwrap();
    let report = run_experiment(std::slice::from_ref(&s), &config(3), Mode::Solve).unwrap();
    assert_eq!(report.seeds.len(), 3);
    let sc = &report.scenarios[0];
    assert_eq!(sc.runs.len(), 3);
    assert!(sc.best_run < 3);
    assert!(!sc.archive.is_empty());
    let sel = &report.config.ga.objectives;
    for row in &sc.archive {
        let v = objectives_of(&s, &evaluate(&ctx, &row.chromosome));
        assert!(v.feasible);
        for (a, b) in sel.project(&v).iter().zip(&row.objectives) {
            assert!(close(*a, *b));
        }
        for (a, b) in v.to_array().iter().zip(row.vector.to_array()) {
            assert!(close(*a, b));
        }
    }
}

#[test]
fn sweep_rates_every_selection() {
    let s = generate(recipe("sweep", [1, 0, 1, 0], [1, 1, 0, 0], 1, 0, 32));
    let report = run_experiment(&[s], &config(1), Mode::SweepObjectives).unwrap();
    let rows = report.scenarios[0].rating.as_ref().expect("sweep rates");
    assert_eq!(rows.len(), 22);
    let mut names: Vec<String> = rows.iter().map(|r| r.objectives.join(",")).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 22);
    for r in rows {
        let rating = r.rating.expect("tiny scenario always solved");
        assert!((0.0..=6.0).contains(&rating), "{rating}");
    }
}

#[test]
fn compare_reaches_the_exact_front_on_a_tiny_scenario() {
    let s = generate(recipe("compare", [1, 0, 1, 0], [1, 1, 0, 0], 2, 0, 33));
    let report = run_experiment(&[s], &config(2), Mode::OracleCompare).unwrap();
    let sc = &report.scenarios[0];
    assert!(matches!(sc.oracle, Some(OracleSummary::Solved { .. })));
    let gap = sc.gap.as_ref().expect("gap computed").hypervolume;
    assert!(gap.abs() <= 1e-12, "gap {gap}");
    assert!(sc.runs.iter().all(|r| r.gap.is_some()));
}

#[test]
fn written_tables_round_trip() {
    let s = generate(recipe("round-trip", [1, 1, 1, 0], [1, 1, 0, 0], 2, 0, 34));
    let mut cfg = config(1);
    cfg.ga.objectives = "fuel,makespan".parse::<ObjectiveSelection>().unwrap();
    let report = run_experiment(&[s], &cfg, Mode::OracleCompare).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_outputs(
        &report,
        &[OutputFormat::Csv, OutputFormat::Report, OutputFormat::Plot],
        dir.path(),
    )
    .unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "archive_round-trip.csv",
            "report.json",
            "plot_round-trip.csv"
        ]
    );

    let (header, rows) = read_archive_csv(fs::File::open(&written[0]).unwrap()).unwrap();
    assert_eq!(header, ["fuel", "makespan"]);
    assert_eq!(rows, report.scenarios[0].archive_points());

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&written[1]).unwrap()).unwrap();
    assert_eq!(json["mode"], "oracle-compare");
    assert_eq!(json["scenarios"][0]["scenario"], "round-trip");

    let plot = fs::read_to_string(&written[2]).unwrap();
    assert!(plot.starts_with("series,x,y\n"));
    for series in ["approx", "approx_step", "optimal", "optimal_step"] {
        assert!(
            plot.lines().any(|l| l.starts_with(&format!("{series},"))),
            "{series}"
        );
    }
}
