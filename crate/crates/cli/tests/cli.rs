use std::process::Command;

fn slowsfg(out: &std::path::Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slowsfg"));
    c.arg("--out").arg(out);
    c
}

fn write_scenario(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("short.json");
    let text = r#"{
        "name": "short",
        "medium": { "length_mm": 5.0, "beta_p": 7.5, "beta_s": 7.5, "beta_r": 12.5 },
        "pump": { "duration_ps": 1.0, "center_ps": 20.0 },
        "signal": { "duration_ps": 1.0, "center_ps": 20.0 },
        "gammas": [0.8],
        "lengths": [5.0],
        "solver": "both"
    }"#;
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_writes_stamped_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let out = dir.path().join("out");
    let status = slowsfg(&out).arg("simulate").arg(&scenario).status().unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("short_summary.json")).unwrap()).unwrap();
    let cases = summary["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 2);
    let eta: Vec<f64> = cases.iter().map(|c| c["eta"].as_f64().unwrap()).collect();
    assert!((eta[0] - eta[1]).abs() < 1e-3, "{eta:?}");
    let csv = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with("_temporal.csv"))
        .unwrap();
    let first = std::fs::read_to_string(csv).unwrap().lines().next().unwrap().to_string();
    assert!(first.starts_with("# scenario=short sha256="), "{first}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let read = |sub: &str| {
        let out = dir.path().join(sub);
        assert!(slowsfg(&out).args(["--solver", "numerical"]).arg("simulate").arg(&scenario).status().unwrap().success());
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let out = dir.path().join("out");
    let empty = slowsfg(&out)
        .args(["sweep"])
        .arg(&scenario)
        .args(["--param", "gamma", "--from", "0.5", "--to", "0.5", "--points", "21"])
        .status()
        .unwrap();
    assert_eq!(empty.code(), Some(2));
    let missing = slowsfg(&out).args(["simulate", "/nonexistent/scenario.json"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
    let unknown = slowsfg(&out).args(["figure", "fig99"]).status().unwrap();
    assert_eq!(unknown.code(), Some(2));
}

#[test]
fn phasematch_binary_map_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pm");
    let status = slowsfg(&out)
        .args(["phasematch", "--rows", "64", "--cols", "48", "--format", "both", "--name", "m"])
        .status()
        .unwrap();
    assert!(status.success());
    let bytes = std::fs::read(out.join("m_map.bin")).unwrap();
    let map = slowsfg::dispersion::PhaseMatchMap::read_binary(bytes.as_slice()).unwrap();
    assert_eq!((map.axes.rows, map.axes.cols), (64, 48));
    assert_eq!(map.values.len(), 64 * 48);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("m_summary.json")).unwrap()).unwrap();
    assert!((summary["poling_period_um"].as_f64().unwrap() - 8.4).abs() < 0.42);
}
