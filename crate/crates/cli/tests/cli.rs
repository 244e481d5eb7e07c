//! End-to-end checks of the `spares` binary: exit codes, file outputs, and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spares() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spares"))
}

fn baseline_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/baseline.json")
}

fn write_config(dir: &Path, mutate: impl Fn(String) -> String) -> PathBuf {
    let text = std::fs::read_to_string(baseline_config_path()).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, mutate(text)).unwrap();
    path
}

fn assert_exit(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn analyze_baseline_reports_expected_cost() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = spares()
        .args(["analyze", "--config"])
        .arg(baseline_config_path())
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let total = report["costs"]["total"].as_f64().unwrap();
    assert!((total - 0.4479).abs() / 0.4479 < 0.05, "total {total}");
    assert_eq!(report["strategy"], "indirect");
    assert_eq!(report["units"]["cost"], "M$/day");
    assert!(report["convergence"]["converged"].as_bool().unwrap());
}

#[test]
fn analyze_direct_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("direct.json");
    let output = spares()
        .args(["analyze", "--strategy", "direct", "--config"])
        .arg(baseline_config_path())
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let total = report["costs"]["total"].as_f64().unwrap();
    assert!((total - 0.9547).abs() / 0.9547 < 0.05, "total {total}");
    assert_eq!(report["costs"]["transfer"], 0.0);
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), |text| text.replace("\"q_c\": 4", "\"q_c\": 0"));
    let output = spares()
        .args(["analyze", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_exit(&output, 1);

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    let output = spares()
        .args(["analyze", "--config"])
        .arg(&garbled)
        .output()
        .unwrap();
    assert_exit(&output, 1);
}

#[test]
fn unconverged_analysis_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // Starve the fixed point of iterations so non-convergence is certain.
    let path = write_config(dir.path(), |text| {
        text.replace(
            "\"sim\": {",
            "\"fixed_point\": { \"tolerance\": 1e-10, \"max_iterations\": 2 },\n  \"sim\": {",
        )
    });
    let output = spares()
        .args(["analyze", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_exit(&output, 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("did not converge"), "stderr: {stderr}");
}

#[test]
fn simulate_is_byte_deterministic_and_feeds_compare() {
    let dir = tempfile::tempdir().unwrap();
    let config = baseline_config_path();
    let run = |out: &Path| {
        let output = spares()
            .args(["simulate", "--years", "3", "--reps", "3", "--seed", "11", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert_exit(&output, 0);
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&a);
    run(&b);
    for file in [
        "stats.json",
        "histogram_constellation.csv",
        "histogram_parking.csv",
        "lead_time_histogram.csv",
        "demand_histogram.csv",
    ] {
        let left = std::fs::read(a.join(file)).unwrap();
        let right = std::fs::read(b.join(file)).unwrap();
        assert_eq!(left, right, "{file} differs between identical runs");
    }
    // Histogram CSV carries the declared header and descending states.
    let hist = std::fs::read_to_string(a.join("histogram_parking.csv")).unwrap();
    let mut lines = hist.lines();
    assert_eq!(lines.next(), Some("state,probability"));
    assert!(hist.lines().nth(1).unwrap().starts_with("25,"));

    let output = spares()
        .args(["compare", "--years", "3", "--reps", "3", "--seed", "11", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("cmp"))
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let comparison: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cmp/comparison.json")).unwrap(),
    )
    .unwrap();
    assert!(comparison["rel_mean_c"].as_f64().unwrap() < 0.05);
    assert!(comparison["analysis_valid"].as_bool().unwrap());
}

#[test]
fn optimize_direct_enumeration_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    // Narrow boxes keep this CLI-level check quick; the full-box GA run is
    // covered by the acceptance suite.
    let path = write_config(dir.path(), |text| {
        text.replace(
            "\"m_payload_kg\": 300.0\n  }",
            "\"m_payload_kg\": 300.0,\n    \"q_bounds\": [1, 3],\n    \"r_bounds\": [37, 41]\n  }",
        )
        .replace(
            "\"epsilon_stockout\": \"auto\"",
            "\"epsilon_stockout\": \"auto\",\n    \"bounds\": { \"q_c\": [4, 4], \"r_c\": [40, 40], \"q_p\": [22, 24], \"r_p\": [2, 2], \"n_orbit_p\": [1, 1], \"h_p_km\": [735, 735] },\n    \"ga\": { \"population\": 8, \"generations\": 4, \"crossover_rate\": 0.9, \"mutation_rate\": 0.15, \"tournament_size\": 3, \"seed\": 42, \"penalty_weight\": 100.0 }",
        )
    });

    let out_direct = dir.path().join("direct");
    let output = spares()
        .args(["optimize", "--strategy", "direct", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_direct)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let best: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_direct.join("best_direct.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(best["q"], 2);
    assert_eq!(best["r"], 39);

    let out_ga = dir.path().join("indirect");
    let output = spares()
        .args(["optimize", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_ga)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let history = std::fs::read_to_string(out_ga.join("history.csv")).unwrap();
    assert!(history.starts_with("generation,best_cost,feasible_count"));
    assert_eq!(history.lines().count(), 5);

    let out_sweep = dir.path().join("sweep");
    let output = spares()
        .args(["sweep", "--rates", "0.05", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_sweep)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let sweep = std::fs::read_to_string(out_sweep.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with(
        "lambda_per_year,indirect_cost_musd_per_day,direct_cost_musd_per_day,savings_fraction"
    ));
    let row = sweep.lines().nth(1).unwrap();
    let savings: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(savings > 0.0, "indirect should beat direct at the baseline");
}
