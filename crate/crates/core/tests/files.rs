use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use drst::io::{self, IoError};
use drst::metrics::{accumulate, compute_indicators};
use drst::report::{emit_results, Provenance};
use drst::scenarios;
use drst::sim::events::read_log;
use drst::sweep::{run_sweep, SweepOptions};

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn bundled_files_load_from_disk() {
    let net = io::load_network(&bundled("ragusa_network.json")).unwrap();
    assert_eq!(net.stops(), scenarios::network().stops());
    let tracts = io::load_tracts(&bundled("ragusa_tracts.json")).unwrap();
    assert_eq!(tracts, scenarios::tracts());
    let default = io::parse_scenario(&bundled("default.json")).unwrap();
    assert_eq!(default, drst::sim::ScenarioConfig::default());
    io::parse_scenario(&bundled("strategy_compare.json")).unwrap();
    io::parse_sweep(&bundled("sweep_fleet.json")).unwrap();
    io::parse_sweep(&bundled("sweep_randomness.json")).unwrap();
}

#[test]
fn missing_file_is_an_io_error() {
    let err = io::load_network(&bundled("nope.json")).unwrap_err();
    assert_eq!(err.category(), "io");
    assert!(err.to_string().contains("nope.json"));
}

#[test]
fn network_errors_are_categorised() {
    let text = r#"{
        "nodes": [{"id": 1, "x_km": 0, "y_km": 0, "kind": "plain"},
                  {"id": 2, "x_km": 1, "y_km": 0, "kind": "plain"}],
        "links": [{"from": 1, "to": 2}, {"from": 2, "to": 1}],
        "fixed_route": [1, 2]
    }"#;
    let err = io::network_from_str(text, "n.json").unwrap_err();
    assert!(matches!(err, IoError::Network { .. }), "{err}");
    assert_eq!(err.category(), "network");
}

#[test]
fn tract_errors_are_categorised() {
    let text = r#"{"tracts": [{"id": 1, "x_km": 0, "y_km": 0, "area_km2": -1, "population": 5}]}"#;
    let err = io::tracts_from_str(text, "t.json").unwrap_err();
    assert_eq!(err.category(), "tracts");
}

#[test]
fn sweep_validation_names_the_field() {
    let text = r#"{"axis": "fleet_size_at_fixed_total_seats", "total_seats": 30, "values": [7]}"#;
    match io::sweep_from_str(text, "s.json").unwrap_err() {
        IoError::Validation { source, .. } => assert_eq!(source.field, "values"),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn results_round_trip_through_disk() {
    let mut spec = scenarios::randomness_sweep();
    spec.replications = 2;
    spec.values = vec![0.0, 1.0];
    spec.base.total_time = 1.0;
    let rows = run_sweep(
        &spec,
        &scenarios::network(),
        &scenarios::tracts(),
        SweepOptions {
            workers: Some(2),
            keep_logs: true,
        },
    )
    .unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2);

    let dir = tempfile::tempdir().unwrap();
    let provenance = Provenance {
        config: Some("sweep.json".into()),
        seed: Some(spec.seed_base),
        ..Provenance::default()
    };
    let files = emit_results(&rows, dir.path(), &provenance).unwrap();
    assert_eq!(files.logs.len(), rows.len());

    let mut reader = csv::Reader::from_path(&files.csv).unwrap();
    let headers = reader.headers().unwrap().clone();
    let tuc_col = headers.iter().position(|h| h == "TUC").unwrap();
    let records: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), rows.len());
    for (record, row) in records.iter().zip(&rows) {
        let written: f64 = record[tuc_col].parse().unwrap();
        assert_eq!(Some(written), row.indicators.TUC);
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&files.summary).unwrap()).unwrap();
    assert_eq!(summary["provenance"]["seed"], spec.seed_base);
    assert_eq!(summary["points"].as_array().unwrap().len(), 4);

    let costs = spec.base.costs;
    for (path, row) in files.logs.iter().zip(&rows) {
        let log = read_log(BufReader::new(fs::File::open(path).unwrap())).unwrap();
        assert_eq!(Some(&log), row.log.as_ref());
        let fleet: Vec<_> = (1..=row.n_vehicles)
            .map(|id| drst::metrics::VehicleTrace {
                id,
                capacity: row.capacity,
            })
            .collect();
        let replayed = compute_indicators(&accumulate(&log, &fleet).unwrap(), &costs).unwrap();
        assert_eq!(replayed.NP, row.indicators.NP);
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let mut spec = scenarios::fleet_sweep();
    spec.replications = 3;
    spec.base.total_time = 1.0;
    let net = scenarios::network();
    let tracts = scenarios::tracts();
    let one = run_sweep(&spec, &net, &tracts, SweepOptions { workers: Some(1), keep_logs: false }).unwrap();
    let four = run_sweep(&spec, &net, &tracts, SweepOptions { workers: Some(4), keep_logs: false }).unwrap();
    assert_eq!(one, four);
}
