//! End-to-end tests of the `gridfire` binary on the small synthetic fixture.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gridfire::fixture::{write_fixture, FixtureSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridfire"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn small_fixture(dir: &Path) -> PathBuf {
    write_fixture(dir, &FixtureSpec::small()).expect("fixture generation")
}

#[test]
fn validate_reports_the_dataset_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let out = run(&["validate", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("41 branches"), "{text}");
    assert!(text.contains("30 buses"), "{text}");
    assert!(text.ends_with("ok\n"), "{text}");
}

#[test]
fn validate_missing_weather_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    fs::remove_file(dir.path().join("weather.csv")).unwrap();
    let out = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("weather.csv"), "{}", stderr(&out));
}

#[test]
fn validate_mismatched_layer_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    // Shrink the slope layer by one column so the headers disagree.
    let slope_path = dir.path().join("landscape/slope.asc");
    let mut slope = gridfire::ascii::read_ascii_grid(&slope_path).unwrap();
    let keep = slope.ncols - 1;
    slope.values = slope
        .values
        .chunks(slope.ncols)
        .flat_map(|row| row[..keep].to_vec())
        .collect();
    slope.ncols = keep;
    gridfire::ascii::write_ascii_grid(&slope_path, &slope).unwrap();
    let out = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("slope"), "{}", stderr(&out));
}

#[test]
fn ignite_writes_one_row_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let out_dir = dir.path().join("ign");
    let out = run(&[
        "ignite",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("ignitions.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("scenario_id,branch_id,lat,lon,offset_miles")
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 60, "only {} ignition rows", rows.len());
    assert!(rows[0].starts_with("1,1,"));
}

#[test]
fn sweep_outputs_are_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let cfg = config.to_str().unwrap();
    let out1 = dir.path().join("o1");
    let out2 = dir.path().join("o2");
    let out3 = dir.path().join("o3");
    for (out, workers) in [(&out1, "1"), (&out2, "1"), (&out3, "6")] {
        let r = run(&[
            "sweep",
            "--config",
            cfg,
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(r.status.success(), "{}", stderr(&r));
    }
    for name in ["scenarios.csv", "line_risk.csv", "heatmap.geojson"] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        let c = fs::read(out3.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert_eq!(a, c, "{name} differs between worker counts");
    }
}

#[test]
fn sweep_row_counts_and_cost_arithmetic_hold() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let out_dir = dir.path().join("out");
    let r = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));

    let ignite_dir = dir.path().join("ign");
    let r = run(&[
        "ignite",
        "--config",
        config.to_str().unwrap(),
        "--out",
        ignite_dir.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let ignition_rows = fs::read_to_string(ignite_dir.join("ignitions.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;

    let scenarios = fs::read_to_string(out_dir.join("scenarios.csv")).unwrap();
    let rows: Vec<&str> = scenarios.lines().skip(1).collect();
    assert_eq!(rows.len(), ignition_rows);

    let cents = |s: &str| -> i64 {
        let (d, c) = s.split_once('.').unwrap();
        d.parse::<i64>().unwrap() * 100 + c.parse::<i64>().unwrap()
    };
    for row in &rows {
        let f: Vec<&str> = row.split(',').collect();
        let acres: f64 = f[4].parse().unwrap();
        let miles: i64 = f[5].parse().unwrap();
        let structures: i64 = f[6].parse().unwrap();
        let (env, line, structure, total) = (cents(f[7]), cents(f[8]), cents(f[9]), cents(f[10]));
        assert_eq!(
            env,
            (acres * 50_000.0).round() as i64,
            "env cost re-derivation"
        );
        assert_eq!(line, miles * 25_000_000, "line cost re-derivation");
        assert_eq!(
            structure,
            structures * 90_421_000,
            "structure cost re-derivation"
        );
        assert_eq!(total, env + line + structure, "total re-derivation");
    }

    let line_risk = fs::read_to_string(out_dir.join("line_risk.csv")).unwrap();
    assert_eq!(line_risk.lines().count() - 1, 41);
}

#[test]
fn import_burn_dir_reproduces_the_simulated_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let cfg = config.to_str().unwrap();
    let simulated = dir.path().join("sim");
    let r = run(&[
        "sweep",
        "--config",
        cfg,
        "--out",
        simulated.to_str().unwrap(),
        "--write-rasters",
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let imported = dir.path().join("imp");
    let r = run(&[
        "sweep",
        "--config",
        cfg,
        "--out",
        imported.to_str().unwrap(),
        "--import-burn-dir",
        simulated.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    for name in ["scenarios.csv", "line_risk.csv", "heatmap.geojson"] {
        assert_eq!(
            fs::read(simulated.join(name)).unwrap(),
            fs::read(imported.join(name)).unwrap(),
            "{name} differs between simulate and import"
        );
    }
}

#[test]
fn import_burn_dir_missing_raster_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--import-burn-dir",
        dir.path().join("empty").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("scenario"), "{}", stderr(&out));
    // No partial results survive the failed sweep.
    assert!(!dir.path().join("o/scenarios.csv").exists());
}

#[test]
fn simulate_one_matches_the_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let cfg = config.to_str().unwrap();
    let out_dir = dir.path().join("out");
    let r = run(&["sweep", "--config", cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    let scenarios = fs::read_to_string(out_dir.join("scenarios.csv")).unwrap();
    let row17 = scenarios
        .lines()
        .find(|l| l.starts_with("17,"))
        .expect("scenario 17 exists");

    let single = dir.path().join("single");
    let r = run(&[
        "simulate-one",
        "--config",
        cfg,
        "--out",
        single.to_str().unwrap(),
        "17",
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let text = stdout(&r);
    assert!(
        text.lines().any(|l| l == row17),
        "simulate-one row diverges:\n{text}\nvs {row17}"
    );
    assert!(single.join("burn_17.asc").exists());
}

#[test]
fn simulate_one_on_nonburnable_fuel_yields_zero_acres() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    // Turn the whole fuel layer to water so every ignition sits on
    // nonburnable fuel.
    let fuel_path = dir.path().join("landscape/fuel_model.asc");
    let mut fuel = gridfire::ascii::read_ascii_grid(&fuel_path).unwrap();
    fuel.values.fill(98.0);
    gridfire::ascii::write_ascii_grid(&fuel_path, &fuel).unwrap();

    let out = bin()
        .args([
            "simulate-one",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("single").to_str().unwrap(),
            "1",
        ])
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let row = stdout(&out);
    let fields: Vec<&str> = row.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[4], "0", "burned_acres: {row}");
    assert_eq!(fields[10], "0.00", "total_cost: {row}");
    assert!(stderr(&out).contains("nonburnable"), "{}", stderr(&out));
}

#[test]
fn simulate_one_unknown_scenario_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let out = run(&["simulate-one", "--config", config.to_str().unwrap(), "9999"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("9999"), "{}", stderr(&out));
}

#[test]
fn classify_recomputes_identical_risk_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_fixture(dir.path());
    let cfg = config.to_str().unwrap();
    let out_dir = dir.path().join("out");
    let r = run(&["sweep", "--config", cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));

    let reclass = dir.path().join("reclass");
    let r = run(&[
        "classify",
        "--config",
        cfg,
        "--out",
        reclass.to_str().unwrap(),
        "--scenarios",
        out_dir.join("scenarios.csv").to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    for name in ["line_risk.csv", "heatmap.geojson"] {
        assert_eq!(
            fs::read(out_dir.join(name)).unwrap(),
            fs::read(reclass.join(name)).unwrap(),
            "{name} differs after reclassification"
        );
    }
}
