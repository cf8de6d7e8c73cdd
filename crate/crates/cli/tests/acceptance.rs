//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use escape_core::corpus::falsification_corpus;
use escape_core::geometry::{angular_distance, ccw_leading_intersection};
use escape_core::invariants::{
    capture_margins, check_all, check_avoidance_duration, check_cauchy, check_deviation,
    check_goal_adherence, check_move_grammar, check_safety, sampling_slack,
};
use escape_core::io::config::RunConfig;
use escape_core::io::csv::write_trace_csv;
use escape_core::params::{certify_cascade, ParameterRecord};
use escape_core::strategy::escape_feasible;
use escape_core::{run, Extended, Point2, Scalar, Trace, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> RunConfig {
    RunConfig::load(&configs().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        summary: summary.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn failures(verdicts: &[Verdict]) -> Vec<String> {
    verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| {
            format!(
                "{} at t={:?}: {}",
                v.name, v.first_violation_time, v.details
            )
        })
        .collect()
}

// Independent 200-bit re-derivation of the CFG-A cascade.
#[allow(clippy::excessive_precision)]
const ORACLE: [[(&str, f64); 10]; 2] = [
    [
        ("sigma_n", 9.377_863_548_004_333_930_797e-6),
        ("r", 5.822_661_794_451_937_190_34e-5),
        ("rho", 3.105_419_623_707_699_834_848e-4),
        ("theta", 0.756_456_384_668_371_309_567_8),
        ("phi", 0.496_145_764_829_732_857_935_8),
        ("tau", 2.926_789_042_846_106_975_202e-3),
        ("rho_prime", 4.004_188_697_898_039_824_047e-4),
        ("c_n", 2.657_632_847_000_474_488_696e-5),
        ("delta_n", 0.25),
        ("ell", 1.25),
    ],
    [
        ("sigma_n", 1.162_576_816_411_647_956_481e-10),
        ("r", 7.616_880_145_254_023_655_794e-10),
        ("rho", 3.482_002_352_116_125_099_792e-9),
        ("theta", 0.801_468_983_271_750_374_949_9),
        ("phi", 0.481_759_571_628_092_899_282_9),
        ("tau", 3.281_709_902_757_119_717_977e-8),
        ("rho_prime", 4.643_326_147_283_031_450_411e-9),
        ("c_n", 3.620_522_338_838_983_805_392e-10),
        ("delta_n", 6.644_082_117_500_118_621_74e-6),
        ("ell", 1.289_456_237_850_595_915_485e-5),
    ],
];
#[allow(clippy::excessive_precision)]
const ORACLE_THETA_1: f64 = 0.643_501_108_793_284_386_802_8;

fn field(r: &ParameterRecord, key: &str) -> Option<f64> {
    match key {
        "sigma_n" => Some(r.sigma_n),
        "theta" => Some(r.theta),
        "c_n" => Some(r.c_n),
        "r" => r.r,
        "rho" => r.rho,
        "phi" => r.phi,
        "tau" => r.tau,
        "rho_prime" => r.rho_prime,
        "delta_n" => r.delta_n,
        "ell" => r.ell,
        _ => None,
    }
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut cfg = load("cfg_a.json");
    cfg.level = 3;
    let game = cfg.game::<Extended>().unwrap();
    let cascade = match game.cascade() {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("cascade failed: {e}")),
    };
    let verdicts = certify_cascade(&cascade, &game.start);
    let elapsed = start.elapsed();
    let residuals: Vec<f64> = verdicts
        .iter()
        .flat_map(|v| v.residuals.iter().map(|r| r.slack))
        .collect();
    let min_slack = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let records = cascade.records();
    let mut worst = (records[0].theta / ORACLE_THETA_1 - 1.0).abs();
    let mut worst_key = "theta_1".to_string();
    for (level, table) in ORACLE.iter().enumerate() {
        for (key, want) in table {
            let got = field(&records[level + 1], key).unwrap_or(f64::NAN);
            let rel = ((got - want) / want).abs();
            if rel.is_nan() || rel > worst {
                worst = rel;
                worst_key = format!("{key}_{}", level + 2);
            }
        }
    }
    let pass = verdicts.iter().all(|v| v.pass)
        && min_slack >= 0.0
        && worst < 1e-10
        && records[0].eps_n == 0.25
        && records[0].sigma_n == 1.0
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "3 levels certified, {} residuals, min slack {min_slack:.3e}; worst oracle deviation {worst:.2e} ({worst_key}); {}",
            residuals.len(),
            secs(elapsed)
        ),
    )
}

/// Counts lines without keeping the CSV text.
struct LineCount(u64);

impl Write for LineCount {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0 += buf.iter().filter(|&&b| b == b'\n').count() as u64;
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Capture margins of one level-2 trace: per lion `(min distance, c_i / 2)`, plus `s`.
struct Margins {
    lions: Vec<(usize, f64, f64)>,
    slack: f64,
    d: f64,
}

fn margins(trace: &Trace<f64>) -> Margins {
    Margins {
        lions: capture_margins(trace),
        slack: sampling_slack(trace),
        d: trace.cascade.disk_margin(),
    }
}

fn level2_checks(trace: &Trace<f64>) -> Vec<Verdict> {
    vec![
        check_safety(trace),
        check_move_grammar(trace),
        check_avoidance_duration(trace),
        check_goal_adherence(trace),
        check_deviation(trace, 2),
        check_cauchy(trace, 1, 2),
    ]
}

fn ac2(collected: &mut Vec<(String, Margins)>) -> Outcome {
    let cfg = load("cfg_a.json");
    let start = Instant::now();
    let trace = match run(&cfg.game::<f64>().unwrap()) {
        Ok(t) => t,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let run_time = start.elapsed();
    let mut lines = LineCount(0);
    write_trace_csv(&trace, &mut lines).unwrap();
    let rows_ok = lines.0 == trace.len() as u64 + 1;
    let checks = level2_checks(&trace);
    let all = check_all(&trace);
    let failed = failures(&all);
    let pass = failed.is_empty()
        && trace.capture.is_none()
        && rows_ok
        && run_time < Duration::from_secs(60);
    collected.push(("pure_pursuit".into(), margins(&trace)));
    outcome(
        pass,
        format!(
            "{} samples, {} CSV lines, {} of 6 required checks pass ({} of {} overall), capture {:?}; run {}{}",
            trace.len(),
            lines.0,
            checks.iter().filter(|v| v.pass).count(),
            all.iter().filter(|v| v.pass).count(),
            all.len(),
            trace.capture.as_ref().map(|c| c.time),
            secs(run_time),
            if failed.is_empty() { String::new() } else { format!("; {}", failed.join("; ")) }
        ),
    )
}

fn ac3(collected: &mut Vec<(String, Margins)>) -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, file) in [
        ("stationary", "cfg_a_stationary.json"),
        ("orbit", "cfg_a_orbit.json"),
        ("goal_ambush", "cfg_a_ambush.json"),
    ] {
        let trace = match run(&load(file).game::<f64>().unwrap()) {
            Ok(t) => t,
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: run failed: {e}"));
                continue;
            }
        };
        let all = check_all(&trace);
        let failed = failures(&all);
        pass &= failed.is_empty() && trace.capture.is_none();
        parts.push(format!(
            "{label}: {}/{} checks{}",
            all.iter().filter(|v| v.pass).count(),
            all.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(" ({})", failed.join("; "))
            }
        ));
        collected.push((label.into(), margins(&trace)));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    outcome(pass, format!("{}; {}", parts.join(", "), secs(elapsed)))
}

fn ac4() -> Outcome {
    let cfg = load("cfg_a_level3.json");
    let start = Instant::now();
    let trace = match run(&cfg.game::<Extended>().unwrap()) {
        Ok(t) => t,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let required = [
        check_safety(&trace),
        check_deviation(&trace, 3),
        check_cauchy(&trace, 2, 3),
    ];
    let elapsed = start.elapsed();
    let all = check_all(&trace);
    let sigma3 = trace.cascade.level(3).sigma_n;
    let decisions = (trace.duration() / sigma3).floor().as_f64();
    let failed = failures(&required);
    let pass = failed.is_empty() && trace.capture.is_none() && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "{} samples, {decisions:.0} level-3 decisions (sigma_3 = {:.4e}); safety/deviation_2_3/cauchy_2_3 {}; {} of {} checks overall; {}{}",
            trace.len(),
            sigma3.as_f64(),
            if failed.is_empty() { "pass" } else { "FAIL" },
            all.iter().filter(|v| v.pass).count(),
            all.len(),
            secs(elapsed),
            if failed.is_empty() { String::new() } else { format!("; {}", failed.join("; ")) }
        ),
    )
}

/// Counterclockwise end of the arc of the lion circle inside the man circle,
/// by a 10^6-sample scan from the man's direction refined by bisection.
fn scan_ccw_angle(man: [f64; 2], step: f64, lion: [f64; 2], r: f64) -> f64 {
    const N: usize = 1_000_000;
    let beta = (man[1] - lion[1]).atan2(man[0] - lion[0]);
    let inside = |a: f64| {
        let (x, y) = (
            lion[0] + r * a.cos() - man[0],
            lion[1] + r * a.sin() - man[1],
        );
        (x * x + y * y).sqrt() <= step
    };
    let d = 2.0 * PI / N as f64;
    let mut k = 0;
    while k < N && inside(beta + (k + 1) as f64 * d) {
        k += 1;
    }
    let (mut lo, mut hi) = (beta + k as f64 * d, beta + (k + 1) as f64 * d);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Best common slack over 10^5 directions for `u . a1 >= c1` and `u . a2 >= c2`,
/// each normalised by `|a|`.
fn scan_escape(a1: [f64; 2], c1: f64, a2: [f64; 2], c2: f64) -> f64 {
    const N: usize = 100_000;
    let (n1, n2) = (a1[0].hypot(a1[1]), a2[0].hypot(a2[1]));
    (0..N)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / N as f64).sin_cos();
            let g1 = (c * a1[0] + s * a1[1] - c1) / n1;
            let g2 = (c * a2[0] + s * a2[1] - c2) / n2;
            g1.min(g2)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn ac5() -> Outcome {
    const BOUNDARY: f64 = 1e-4;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_angle: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..1000 {
        let lion = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let r: f64 = rng.gen_range(0.05..2.0);
        let step: f64 = rng.gen_range(0.05..2.0);
        let (lo, hi) = ((r - step).abs(), r + step);
        let d = lo + (hi - lo) * rng.gen_range(0.01..0.99);
        let a: f64 = rng.gen_range(-PI..PI);
        let man = [lion[0] + d * a.cos(), lion[1] + d * a.sin()];
        let want = scan_ccw_angle(man, step, lion, r);
        match ccw_leading_intersection(
            Point2::new(man[0], man[1]),
            step,
            Point2::new(lion[0], lion[1]),
            r,
        ) {
            Ok(q) => {
                let got = (q.y - lion[1]).atan2(q.x - lion[0]);
                worst_angle = worst_angle.max(angular_distance(got, want));
            }
            Err(_) => errors += 1,
        }
    }

    let (mut decided, mut agree, mut feasible, mut excluded) = (0, 0, 0, 0);
    while decided < 1000 {
        let sigma: f64 = rng.gen_range(0.005..0.2);
        let r: f64 = rng.gen_range(4.0 * sigma..2.0);
        let step = sigma * 1.5;
        let d = rng.gen_range((r - 3.0 * sigma)..(r + step));
        let a: f64 = rng.gen_range(-PI..PI);
        let man = [0.0, 0.0];
        let lion = [d * a.cos(), d * a.sin()];
        let bd: f64 = rng.gen_range(0.5 * sigma..3.0);
        let ba: f64 = rng.gen_range(-PI..PI);
        let b = [bd * ba.cos(), bd * ba.sin()];
        let best = scan_escape(
            [man[0] - lion[0], man[1] - lion[1]],
            r - sigma,
            [b[0] - man[0], b[1] - man[1]],
            sigma,
        );
        if best.abs() < BOUNDARY {
            excluded += 1;
            continue;
        }
        let got = escape_feasible(
            sigma,
            r,
            Point2::new(man[0], man[1]),
            Point2::new(lion[0], lion[1]),
            Point2::new(b[0], b[1]),
        );
        decided += 1;
        feasible += usize::from(best > 0.0);
        agree += usize::from(got == Ok(best > 0.0));
    }
    let elapsed = start.elapsed();
    let pass =
        errors == 0 && worst_angle < 1e-6 && agree == decided && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "ccw intersection: 1000 cases, worst angular error {worst_angle:.2e} rad, {errors} errors; \
             escape feasibility: {agree}/{decided} agree ({feasible} feasible, {excluded} boundary cases excluded); {}",
            secs(elapsed)
        ),
    )
}

fn ac6() -> Outcome {
    let base = run(&load("cfg_a_short.json").game::<f64>().unwrap()).unwrap();
    let clean = check_all(&base).iter().all(|v| v.pass);
    let corpus = falsification_corpus(&base);
    let mut hits = Vec::new();
    let mut misses = Vec::new();
    for case in &corpus {
        let v = case.run();
        let ok = !v.pass
            && v.first_violation_index == Some(case.index)
            && v.first_violation_time == Some(case.time());
        if ok {
            hits.push(format!("{}@{}", case.checker, case.index));
        } else {
            misses.push(format!(
                "{} expected sample {} got {:?}",
                case.checker, case.index, v.first_violation_index
            ));
        }
    }
    outcome(
        clean && misses.is_empty(),
        format!(
            "base trace clean: {clean}; {}/{} violations caught at the planted sample [{}]{}",
            hits.len(),
            corpus.len(),
            hits.join(", "),
            if misses.is_empty() {
                String::new()
            } else {
                format!("; missed: {}", misses.join("; "))
            }
        ),
    )
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_escape-sim"))
        .args(args)
        .output()
        .expect("run escape-sim")
}

fn ac7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let config = configs()
        .join("cfg_a_short.json")
        .to_string_lossy()
        .into_owned();
    let sweep_dir = configs().join("sweep").to_string_lossy().into_owned();
    let ok = |o: std::process::Output| o.status.success();
    let ran = ok(cli(&[
        "simulate",
        "--config",
        &config,
        "--out",
        &path("a.csv"),
    ])) && ok(cli(&[
        "simulate",
        "--config",
        &config,
        "--out",
        &path("b.csv"),
    ])) && ok(cli(&[
        "sweep",
        "--config-dir",
        &sweep_dir,
        "--out",
        &path("s1.json"),
        "--threads",
        "1",
    ])) && ok(cli(&[
        "sweep",
        "--config-dir",
        &sweep_dir,
        "--out",
        &path("s8.json"),
        "--threads",
        "8",
    ]));
    if !ran {
        return outcome(false, "a CLI invocation failed");
    }
    let read = |n: &str| std::fs::read(path(n)).unwrap();
    let (a, b) = (read("a.csv"), read("b.csv"));
    let (s1, s8) = (read("s1.json"), read("s8.json"));
    let entries = serde_json::from_slice::<serde_json::Value>(&s1).unwrap()["entries"]
        .as_array()
        .map_or(0, Vec::len);
    outcome(
        a == b && s1 == s8 && entries == 8,
        format!(
            "simulate twice: {} bytes, identical {}; sweep of {entries} configs with 1 and 8 workers: identical {}",
            a.len(),
            a == b,
            s1 == s8
        ),
    )
}

fn ac8(collected: &[(String, Margins)]) -> Outcome {
    if collected.len() < 4 {
        return outcome(
            false,
            format!("only {} of 4 traces available", collected.len()),
        );
    }
    let mut pass = true;
    let mut lines = Vec::new();
    for lion in 1..=2 {
        let (label, min, half, slack) = collected
            .iter()
            .filter_map(|(label, m)| {
                m.lions
                    .iter()
                    .find(|l| l.0 == lion)
                    .map(|&(_, min, half)| (label.as_str(), min, half, m.slack))
            })
            .min_by(|a, b| (a.1 - a.2).total_cmp(&(b.1 - b.2)))
            .unwrap();
        pass &= min > half - slack;
        lines.push(format!("lion {lion}: min |M_2 - l| = {min:.6e} ({label}) vs c_{lion}/2 = {half:.6e}, s = {slack:.3e}"));
    }
    outcome(
        pass,
        format!("{}; d_2 = {:.6e}", lines.join("; "), collected[0].1.d),
    )
}

fn main() {
    // `cargo test` passes harness flags; only a filter naming no criterion skips the run.
    let args: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if !args.is_empty()
        && !args
            .iter()
            .any(|a| "acceptance".contains(a.as_str()) || a.starts_with("AC"))
    {
        return;
    }
    let mut margins = Vec::new();
    let started = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!(
            "{name} {} {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.summary
        );
        results.push((name, o));
    };
    report("AC-1", ac1());
    report("AC-2", ac2(&mut margins));
    report("AC-3", ac3(&mut margins));
    report("AC-4", ac4());
    report("AC-5", ac5());
    report("AC-6", ac6());
    report("AC-7", ac7());
    report("AC-8", ac8(&margins));
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    println!(
        "acceptance: {}/{} criteria pass in {}",
        results.len() - failed.len(),
        results.len(),
        secs(started.elapsed())
    );
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
