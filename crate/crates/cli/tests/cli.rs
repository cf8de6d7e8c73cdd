use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use escape_core::io::config::RunConfig;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_escape-sim"))
        .args(args)
        .output()
        .expect("run escape-sim")
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

const SHORT: &str = r#"{
    "eps": 0.5,
    "man_start": [0, 0],
    "lions": [
        {"start": [1, 0], "controller": {"kind": "pure_pursuit"}},
        {"start": [0, 1], "controller": {"kind": "pure_pursuit"}},
        {"start": [-1, 0], "controller": {"kind": "pure_pursuit"}}
    ],
    "level": 2,
    "horizon": {"steps": 300}
}"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn params_table_matches_the_library_cascade() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SHORT);
    let out = cli(&["params", "--config", &cfg]);
    assert!(out.status.success(), "{}", text(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let cascade = RunConfig::parse(SHORT)
        .unwrap()
        .game::<f64>()
        .unwrap()
        .cascade()
        .unwrap();
    let row = stdout
        .lines()
        .find(|l| l.trim_start().starts_with("2 "))
        .unwrap();
    assert!(
        row.contains(&format!("{:.6e}", cascade.level(2).sigma_n)),
        "{row}"
    );
    assert!(
        row.contains(&format!("{:.6e}", cascade.level(2).c_n)),
        "{row}"
    );
    assert!(stdout.contains("PASS certify_level_2"));

    let json = cli(&["params", "--config", &cfg, "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(
        doc["cascade"][1]["sigma_n"].as_f64(),
        Some(cascade.level(2).sigma_n)
    );
    assert_eq!(doc["certificates"].as_array().unwrap().len(), 2);

    let deep = cli(&["params", "--config", &cfg, "--level", "3"]);
    assert_eq!(deep.status.code(), Some(1));
    assert!(text(&deep).contains("extended precision"));
}

#[test]
fn simulate_verify_plot_and_a_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SHORT);
    let csv = dir.path().join("t.csv").to_string_lossy().into_owned();
    let csv2 = dir.path().join("u.csv").to_string_lossy().into_owned();
    let manifest = dir.path().join("m.json").to_string_lossy().into_owned();
    assert!(cli(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        &csv,
        "--manifest",
        &manifest
    ])
    .status
    .success());
    assert!(cli(&["simulate", "--config", &cfg, "--out", &csv2])
        .status
        .success());
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&csv2).unwrap());

    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    let config = RunConfig::parse(SHORT).unwrap();
    assert_eq!(m["config_digest"].as_str(), Some(config.digest().as_str()));
    assert_eq!(m["cascade_echo"].as_array().unwrap().len(), 2);

    let verdicts = dir.path().join("v.json").to_string_lossy().into_owned();
    let ok = cli(&[
        "verify", "--trace", &csv, "--config", &cfg, "--json", &verdicts,
    ]);
    assert!(ok.status.success(), "{}", text(&ok));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&verdicts).unwrap()).unwrap();
    assert!(v.as_array().unwrap().iter().all(|x| x["pass"] == true));

    // Teleport lion 2 in one row.
    let body = fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = body.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[100].split(',').map(str::to_string).collect();
    let n = fields.len();
    fields[n - 4] = "5.0000000000000000e-1".into();
    lines[100] = fields.join(",");
    let bad = write(dir.path(), "bad.csv", &(lines.join("\n") + "\n"));
    let out = cli(&["verify", "--trace", &bad, "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("FAIL speed"), "{}", text(&out));

    let svg = dir.path().join("p.svg").to_string_lossy().into_owned();
    assert!(
        cli(&["plot", "--trace", &csv, "--out", &svg, "--show-goals"])
            .status
            .success()
    );
    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.starts_with("<svg") && doc.contains("move-free"));
    assert!(
        cli(&["plot", "--trace", &csv, "--config", &cfg, "--out", &svg, "--levels", "2"])
            .status
            .success()
    );
    assert!(!fs::read_to_string(&svg).unwrap().contains("man level1"));
}

#[test]
fn usage_and_validation_errors_have_distinct_codes() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(cli(&[]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let on_man = SHORT.replace("[0, 1]", "[0, 0]");
    let cfg = write(dir.path(), "bad.json", &on_man);
    let out = cli(&["simulate", "--config", &cfg, "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out).contains("start away from the man"),
        "{}",
        text(&out)
    );

    let fast = SHORT.replace(
        r#"{"start": [0, 1], "controller": {"kind": "pure_pursuit"}}"#,
        r#"{"start": [0, 1], "controller": {"kind": "scripted", "waypoints": [[0, 0, 1], [1, 5, 1]]}}"#,
    );
    let cfg = write(dir.path(), "fast.json", &fast);
    let out = cli(&["params", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("lion 2"), "{}", text(&out));

    let missing = cli(&[
        "verify",
        "--trace",
        "/nonexistent.csv",
        "--config",
        &write(dir.path(), "ok.json", SHORT),
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn sweep_writes_a_merged_report() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    write(&configs, "b.json", SHORT);
    write(&configs, "a.json", &SHORT.replace("300", "100"));
    let out = dir.path().join("r.json").to_string_lossy().into_owned();
    let o = Command::new(env!("CARGO_BIN_EXE_escape-sim"))
        .args([
            "sweep",
            "--config-dir",
            &configs.to_string_lossy(),
            "--out",
            &out,
        ])
        .env("ESCAPE_SIM_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", text(&o));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let names: Vec<&str> = r["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["a.json", "b.json"]);
    assert_eq!(r["all_pass"], true);
}
