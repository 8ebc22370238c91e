use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cybercar::harness::{parse_trace_csv, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cybercar"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn run_writes_trace_plot_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg, json) = (
        dir.path().join("t.csv"),
        dir.path().join("p.svg"),
        dir.path().join("m.json"),
    );
    let out = bin()
        .args(["run", "--map"])
        .arg(data("single_edge.map"))
        .args([
            "--start",
            "0,0",
            "--goal",
            "20,0",
            "--v-cruise",
            "2",
            "--trace",
        ])
        .arg(&csv)
        .arg("--plot")
        .arg(&svg)
        .arg("--metrics")
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let records = parse_trace_csv(text.as_bytes()).unwrap();
    assert_eq!(records.len(), text.lines().count() - 1);
    assert!(records.windows(2).all(|w| w[1].time > w[0].time));

    let svg = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed svg");
    let panels: Vec<_> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("panel"))
        .collect();
    assert_eq!(panels.len(), 5);
    for panel in panels {
        let lines = panel
            .descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count();
        assert_eq!(lines, 1);
    }

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    for key in [
        "lateral_error_mean_curves",
        "lateral_error_max",
        "heading_error_min",
        "heading_error_max",
        "curvature_max",
        "stops",
        "route_completed",
        "u_turn_extent",
    ] {
        assert!(metrics.get(key).is_some(), "missing {key}");
    }
    assert_eq!(metrics["route_completed"], true);
}

#[test]
fn stop_entries_are_ordered_by_arrival() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("m.json");
    let out = bin()
        .args(["run", "--map"])
        .arg(data("inria_itinerary.map"))
        .args([
            "--start",
            "0,0",
            "--goal",
            "20,18",
            "--corner-offset",
            "4",
            "--metrics",
        ])
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let arrivals: Vec<f64> = metrics["stops"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["arrival_time"].as_f64().unwrap())
        .collect();
    assert_eq!(arrivals.len(), 4);
    assert!(arrivals.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn empty_trace_file_is_header_only() {
    // a start and goal on the same node produce no cycles
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = bin()
        .args(["run", "--map"])
        .arg(data("single_edge.map"))
        .args(["--start", "0,0", "--goal", "1,0", "--trace"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        CSV_HEADER.join(",") + "\n"
    );
}

#[test]
fn exit_codes() {
    let validate = |path: &Path| {
        code(
            &bin()
                .args(["validate", "--map"])
                .arg(path)
                .output()
                .unwrap(),
        )
    };
    assert_eq!(validate(&data("inria_itinerary.map")), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.map");
    std::fs::write(&bad, "node a 0 0 waypoint\nedge a z 1 1\n").unwrap();
    assert_eq!(validate(&bad), 1);
    assert_eq!(validate(&dir.path().join("missing.map")), 1);

    let run = |args: &[&str]| {
        code(
            &bin()
                .args(["run", "--map"])
                .arg(data("leon_u_turn.map"))
                .args(args)
                .output()
                .unwrap(),
        )
    };
    assert_eq!(run(&["--start", "4,16", "--goal", "4,7"]), 2);
    assert_eq!(
        run(&[
            "--start",
            "4,7",
            "--goal",
            "4,16",
            "--corner-offset",
            "4.5",
            "--max-time",
            "5"
        ]),
        3
    );
    assert_eq!(run(&["--start", "4,7", "--goal", "4,16", "--dt", "0.5"]), 1);
    assert_eq!(
        run(&["--start", "4,7", "--goal", "4,16", "--corner-offset", "2"]),
        1
    );
    assert_eq!(run(&["--start", "4;7", "--goal", "4,16"]), 1);
    assert_eq!(
        run(&["--start", "4,7", "--goal", "4,16", "--comfort", "sporty"]),
        1
    );
    assert_eq!(run(&["--start", "4,7"]), 1);

    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 1);
}
