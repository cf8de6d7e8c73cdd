use escape_core::invariants::{capture_margins, check_all};
use escape_core::io::config::RunConfig;
use escape_core::io::csv::write_trace_csv;
use escape_core::sweep::{config_files, sweep, worker_count, THREADS_ENV};
use escape_core::{run, Extended, MoveKind, Trace};

fn parse(lions: &str, level: usize, horizon: &str, extra: &str) -> RunConfig {
    RunConfig::parse(&format!(
        r#"{{"eps": 0.5, "man_start": [0, 0], "lions": [{lions}], "level": {level}, "horizon": {horizon}{extra}}}"#
    ))
    .unwrap()
}

fn lion(x: f64, y: f64, kind: &str) -> String {
    format!(r#"{{"start": [{x}, {y}], "controller": {kind}}}"#)
}

const PURSUIT: &str = r#"{"kind": "pure_pursuit"}"#;
const STILL: &str = r#"{"kind": "stationary"}"#;

fn cfg_a(kind: &str, horizon: &str) -> RunConfig {
    let lions = [
        lion(1.0, 0.0, kind),
        lion(0.0, 1.0, kind),
        lion(-1.0, 0.0, kind),
    ]
    .join(",");
    parse(&lions, 2, horizon, "")
}

fn all_pass<S: escape_core::Scalar>(trace: &Trace<S>) {
    for v in check_all(trace) {
        assert!(v.pass, "{}: {}", v.name, v.details);
    }
    assert!(trace.capture.is_none());
}

#[test]
fn distant_lions_leave_only_free_moves() {
    let lions = [
        lion(40.0, 0.0, PURSUIT),
        lion(0.0, 50.0, PURSUIT),
        lion(-60.0, 1.0, PURSUIT),
    ]
    .join(",");
    let trace = run(&parse(&lions, 2, r#"{"intervals": 2}"#, "")
        .game::<f64>()
        .unwrap())
    .unwrap();
    assert!(trace.kinds.iter().all(|&k| k == MoveKind::Free));
    all_pass(&trace);
}

#[test]
fn engaged_lion_forces_escape_and_avoidance() {
    let lions = [
        lion(1.0, 0.0, PURSUIT),
        lion(-0.4375, 1e-5, STILL),
        lion(-1.0, 0.0, PURSUIT),
    ]
    .join(",");
    let trace = run(&parse(&lions, 2, r#"{"intervals": 5}"#, "")
        .game::<f64>()
        .unwrap())
    .unwrap();
    assert!(trace.kinds.contains(&MoveKind::Avoidance));
    assert!(trace.kinds.contains(&MoveKind::Escape));
    all_pass(&trace);
    for (i, min, half) in capture_margins(&trace) {
        assert!(min > half, "lion {i}: {min} <= {half}");
    }
}

#[test]
fn each_adversary_is_survived_over_a_short_horizon() {
    for kind in [
        STILL,
        PURSUIT,
        r#"{"kind": "goal_ambush", "goal_visible": true}"#,
        r#"{"kind": "goal_ambush"}"#,
        r#"{"kind": "scripted", "orbit": {"center": "first_milestone", "radius": 0.3}}"#,
    ] {
        let trace = run(&cfg_a(kind, r#"{"intervals": 3}"#).game::<f64>().unwrap()).unwrap();
        all_pass(&trace);
    }
}

#[test]
fn replaying_recorded_lions_reproduces_the_run() {
    let cfg = cfg_a(PURSUIT, r#"{"intervals": 1}"#);
    let original = run(&cfg.game::<f64>().unwrap()).unwrap();
    let mut replay = cfg.clone();
    for (i, l) in replay.lions.iter_mut().enumerate() {
        let samples = (0..original.len())
            .map(|k| {
                let p = original.lion_at(i, k);
                [original.times[k], p.x, p.y]
            })
            .collect();
        l.controller = escape_core::io::config::ControllerSpec::Replay {
            samples: Some(samples),
            trace: None,
            lion: None,
        };
    }
    let again = run(&replay.game::<f64>().unwrap()).unwrap();
    // Replay interpolates between samples, so positions agree to rounding. The
    // final sample is excluded: past the end of the recording the replayed
    // lion heads for the last recorded point instead.
    let gap = |a: &[escape_core::Point2<f64>], b: &[escape_core::Point2<f64>]| {
        a.iter().zip(b).map(|(p, q)| p.dist(*q)).fold(0.0, f64::max)
    };
    assert_eq!(again.len(), original.len());
    assert_eq!(again.kinds, original.kinds);
    let body = 3 * (original.len() - 1);
    assert!(gap(&again.lions[..body], &original.lions[..body]) < 1e-12);
    assert!(gap(&again.men, &original.men) < 1e-12);
}

#[test]
fn simulation_is_deterministic() {
    let cfg = cfg_a(PURSUIT, r#"{"intervals": 1}"#);
    let bytes = |t: &Trace<f64>| {
        let mut b = Vec::new();
        write_trace_csv(t, &mut b).unwrap();
        b
    };
    let a = run(&cfg.game::<f64>().unwrap()).unwrap();
    let b = run(&cfg.game::<f64>().unwrap()).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
}

#[test]
fn level_three_in_extended_precision_passes_a_short_run() {
    let lions = [
        lion(1.0, 0.0, PURSUIT),
        lion(0.0, 1.0, PURSUIT),
        lion(-1.0, 0.0, PURSUIT),
    ]
    .join(",");
    let cfg = parse(
        &lions,
        3,
        r#"{"steps": 2000}"#,
        r#", "precision": "extended""#,
    );
    let trace = run(&cfg.game::<Extended>().unwrap()).unwrap();
    all_pass(&trace);
    assert!(
        cfg.game::<f64>().unwrap().cascade().is_err(),
        "binary64 guard trips at level 3"
    );
}

#[test]
fn sweep_merges_in_name_order_regardless_of_workers() {
    let dir = std::env::temp_dir().join(format!("escape-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let names = ["c.json", "a.json", "b.json"];
    for (i, name) in names.iter().enumerate() {
        let cfg = cfg_a(PURSUIT, &format!(r#"{{"steps": {}}}"#, 100 * (i + 1)));
        std::fs::write(dir.join(name), cfg.canonical_json()).unwrap();
    }
    std::fs::write(dir.join("broken.json"), "{").unwrap();
    std::fs::write(dir.join("notes.txt"), "ignored").unwrap();
    let files = config_files(&dir).unwrap();
    let one = sweep(&files, 1).unwrap();
    let many = sweep(&files, 4).unwrap();
    assert_eq!(one, many);
    let order: Vec<&str> = one.entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(order, ["a.json", "b.json", "broken.json", "c.json"]);
    assert!(!one.all_pass);
    assert!(one.entries[2].error.is_some());
    assert!(one
        .entries
        .iter()
        .filter(|e| e.error.is_none())
        .all(|e| e.pass));
    std::fs::remove_dir_all(&dir).unwrap();

    assert_eq!(worker_count(Some(3)), 3);
    std::env::set_var(THREADS_ENV, "2");
    assert_eq!(worker_count(None), 2);
    std::env::remove_var(THREADS_ENV);
    assert!(worker_count(None) >= 1);
}
