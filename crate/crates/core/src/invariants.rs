//! Trace checkers for the strategy's guarantees.
//!
//! Every checker is a pure function of the trace. Times of choice and
//! milestone boundaries are recognised by recomputing `index * period`
//! exactly, so a trace read back from disk is classified identically.
//! Continuous-time bounds get the sampling slack `s = (2 + eps_n) * max
//! sample spacing`; exact geometric relations get an arithmetic tolerance
//! of `1e-12` relative plus a few ulps of the coordinate scale.

use rayon::prelude::*;

use crate::geometry::{point_segment_distance, Point2};
use crate::params::{MilestoneParams, ParameterSet};
use crate::scalar::Scalar;
use crate::strategy::{
    milestone_index_at, milestone_time, tick, tick_floor, truncation_bound, MoveKind,
};
use crate::trace::Trace;
use crate::verdict::{Tally, Verdict};

pub const ARITH_REL_TOL: f64 = 1e-12;
/// Relative distance below which a committed corner counts as on the goal.
pub const GOAL_REACHED_REL: f64 = 1e-9;

/// Largest absolute coordinate in the trace.
pub fn coordinate_scale<S: Scalar>(trace: &Trace<S>) -> S {
    let fold = |m: S, p: &Point2<S>| m.max(p.max_abs());
    let m = trace.men.iter().fold(S::zero(), fold);
    let m = trace.lions.iter().fold(m, fold);
    trace.goals.iter().fold(m, fold)
}

/// Absolute arithmetic allowance for a quantity of size `size`.
fn arith_tol<S: Scalar>(size: S, scale: S) -> S {
    S::of(ARITH_REL_TOL) * size.abs() + S::of(64.0) * scale.max(S::one()).ulp()
}

/// Sampling slack `(2 + eps_n) * max spacing`.
pub fn sampling_slack<S: Scalar>(trace: &Trace<S>) -> S {
    let eps_n = trace.cascade.level(trace.level).eps_n;
    (S::of(2.0) + eps_n) * trace.max_spacing()
}

fn is_tick<S: Scalar>(t: S, period: S) -> bool {
    tick(tick_floor(t, period), period) == t
}

/// Whether the committed move from `a` to `b` reaches `goal`.
pub fn goal_reached<S: Scalar>(
    a: Point2<S>,
    b: Point2<S>,
    goal: Point2<S>,
    step: S,
    scale: S,
) -> bool {
    let tol = (S::of(GOAL_REACHED_REL) * step).max(S::of(64.0) * scale.max(S::one()).ulp());
    point_segment_distance(goal, a, b) <= tol
}

struct Deepest<'a, S> {
    ps: &'a ParameterSet<S>,
    m: Option<&'a MilestoneParams<S>>,
    lower_sigma: Option<S>,
    slot: usize,
}

fn deepest<'a, S: Scalar>(trace: &'a Trace<S>, name: &str) -> Result<Deepest<'a, S>, Verdict> {
    let n = trace.level;
    let slot = trace.level_slot(n).ok_or_else(|| {
        Verdict::failed(
            name,
            0.0,
            Some(0),
            0.0,
            format!("level {n} path not recorded"),
        )
    })?;
    let ps = trace.cascade.level(n);
    let m = ps.milestone.as_ref();
    let lower_sigma = (n >= 2).then(|| trace.cascade.level(n - 1).sigma_n);
    Ok(Deepest {
        ps,
        m,
        lower_sigma,
        slot,
    })
}

fn f<S: Scalar>(x: S) -> f64 {
    x.as_f64()
}

/// Separation from the lions (Claim 1 style bounds plus the capture margin).
pub fn check_safety<S: Scalar>(trace: &Trace<S>) -> Verdict {
    const NAME: &str = "safety";
    let d = match deepest(trace, NAME) {
        Ok(d) => d,
        Err(v) => return v,
    };
    let n = trace.level;
    let scale = coordinate_scale(trace);
    let s = sampling_slack(trace);
    let sigma = d.ps.sigma_n;
    let lead = (S::of(3.0) + d.ps.eps_n) * sigma;
    let halves: Vec<S> = (1..=n)
        .map(|i| trace.cascade.level(i).c_n / S::of(2.0))
        .collect();
    let mut tally = Tally::new();
    let mut min_lion = vec![S::of(f64::MAX); n];
    let mut prev_kind: Option<MoveKind> = None;

    for k in 0..trace.len() {
        let t = trace.times[k];
        let tf = f(t);
        let man = trace.man_at(d.slot, k);
        for i in 0..n {
            let dist = man.dist(trace.lion_at(i, k));
            min_lion[i] = min_lion[i].min(dist);
            let slack = f(dist - halves[i] + s);
            if slack > 0.0 {
                tally.observe(tf, k, slack, String::new);
            } else {
                tally.observe(tf, k, slack.min(-f64::MIN_POSITIVE), || {
                    format!(
                        "|M_{n} - l_{}| = {:e} not above c_{}/2 - s = {:e}",
                        i + 1,
                        f(dist),
                        i + 1,
                        f(halves[i] - s)
                    )
                });
            }
        }
        let Some(m) = d.m else { continue };
        let kind = trace.kinds[k];
        let dist = man.dist(trace.lion_at(n - 1, k));
        let tol = arith_tol(m.r, scale);
        if is_tick(t, sigma) {
            let lo = m.r - sigma - tol;
            tally.observe(tf, k, f(dist - lo), || {
                format!(
                    "at a time of choice |m - l_{n}| = {:e} < r - sigma_n",
                    f(dist)
                )
            });
            if prev_kind == Some(MoveKind::Avoidance) {
                let hi = m.r + sigma + tol;
                tally.observe(tf, k, f(hi - dist), || {
                    format!(
                        "after an avoidance move |m - l_{n}| = {:e} > r + sigma_n",
                        f(dist)
                    )
                });
            }
        }
        let lo = m.r - lead - s;
        tally.observe(tf, k, f(dist - lo), || {
            format!("|m - l_{n}| = {:e} < r - (3+eps_n)sigma_n - s", f(dist))
        });
        let avoiding = kind == MoveKind::Avoidance
            || (is_tick(t, sigma) && prev_kind == Some(MoveKind::Avoidance));
        if avoiding {
            let hi = m.r + lead + s;
            tally.observe(tf, k, f(hi - dist), || {
                format!(
                    "while avoiding |m - l_{n}| = {:e} > r + (3+eps_n)sigma_n + s",
                    f(dist)
                )
            });
        }
        prev_kind = Some(kind);
    }
    let mins: Vec<String> = min_lion
        .iter()
        .zip(&halves)
        .enumerate()
        .map(|(i, (m, h))| {
            format!(
                "min|M-l_{}| = {:e} vs c_{}/2 = {:e}",
                i + 1,
                f(*m),
                i + 1,
                f(*h)
            )
        })
        .collect();
    let details = format!(
        "d_{n} = {:e}; s = {:e}; {}",
        f(trace.cascade.disk_margin()),
        f(s),
        mins.join("; ")
    );
    tally.into_verdict(NAME, details)
}

/// Avoidance is never followed by a free move; after an escape no avoidance
/// until the goal is reached or changes.
pub fn check_move_grammar<S: Scalar>(trace: &Trace<S>) -> Verdict {
    const NAME: &str = "move_grammar";
    let d = match deepest(trace, NAME) {
        Ok(d) => d,
        Err(v) => return v,
    };
    if d.m.is_none() {
        return Verdict::passed(NAME, 0.0, "level 1 makes free moves only");
    }
    let scale = coordinate_scale(trace);
    let step = d.ps.step_len();
    let mut tally = Tally::new();
    let mut prev: Option<(MoveKind, Point2<S>)> = None;
    let mut lock: Option<Point2<S>> = None;
    let (mut escapes, mut avoids) = (0usize, 0usize);
    for k in 0..trace.len() {
        let t = trace.times[k];
        if !is_tick(t, d.ps.sigma_n) {
            continue;
        }
        let kind = trace.kinds[k];
        let man = trace.man_at(d.slot, k);
        let goal = trace.goals[k];
        if let (Some(g), Some((_, from))) = (lock, prev) {
            if g != goal || goal_reached(from, man, g, step, scale) {
                lock = None;
            }
        }
        match (prev.map(|p| p.0), kind) {
            (Some(MoveKind::Avoidance), MoveKind::Free) => {
                tally.violate(f(t), k, || "free move right after an avoidance move".into())
            }
            (_, MoveKind::Avoidance) if lock.is_some() => tally.violate(f(t), k, || {
                "avoidance move after an escape before the goal was reached or changed".into()
            }),
            _ => {}
        }
        match kind {
            MoveKind::Escape => {
                escapes += 1;
                lock = Some(goal);
            }
            MoveKind::Avoidance => avoids += 1,
            MoveKind::Free => {}
        }
        prev = Some((kind, man));
    }
    tally.margin = 0.0;
    tally.into_verdict(
        NAME,
        format!("{escapes} escape and {avoids} avoidance moves"),
    )
}

/// Every run of avoidance moves ends within `ceil(tau/sigma_n) + 1` steps
/// unless the goal changes or the man comes within `rho'` of it.
pub fn check_avoidance_duration<S: Scalar>(trace: &Trace<S>) -> Verdict {
    const NAME: &str = "avoidance_duration";
    let d = match deepest(trace, NAME) {
        Ok(d) => d,
        Err(v) => return v,
    };
    let Some(m) = d.m else {
        return Verdict::passed(NAME, 0.0, "level 1 makes no avoidance moves");
    };
    let limit = (m.tau / d.ps.sigma_n)
        .ceil()
        .floor_u64()
        .unwrap_or(u64::MAX)
        .saturating_add(1);
    let mut tally = Tally::new();
    let mut run: u64 = 0;
    let mut run_goal: Option<Point2<S>> = None;
    let mut longest: u64 = 0;
    for k in 0..trace.len() {
        let t = trace.times[k];
        let goal = trace.goals[k];
        let man = trace.man_at(d.slot, k);
        if run_goal.is_some_and(|g| g != goal) || man.dist(goal) < m.rho_prime {
            run = 0;
            run_goal = None;
        }
        if !is_tick(t, d.ps.sigma_n) {
            continue;
        }
        if trace.kinds[k] == MoveKind::Avoidance {
            if run == 0 {
                run_goal = Some(goal);
            }
            run += 1;
            longest = longest.max(run);
            if run > limit {
                tally.violate(f(t), k, || format!("avoidance run exceeds {limit} steps"));
            }
        } else {
            run = 0;
            run_goal = None;
        }
    }
    tally.margin = limit as f64 - longest as f64;
    tally.into_verdict(
        NAME,
        format!("longest avoidance run {longest} of {limit} allowed steps"),
    )
}

/// Staying near the goal once close, staying in the tube around the lower
/// segment, and ending each canonical interval near its milestone.
pub fn check_goal_adherence<S: Scalar>(trace: &Trace<S>) -> Verdict {
    const NAME: &str = "goal_adherence";
    let d = match deepest(trace, NAME) {
        Ok(d) => d,
        Err(v) => return v,
    };
    let (Some(m), Some(lower_sigma)) = (d.m, d.lower_sigma) else {
        return Verdict::passed(NAME, 0.0, "level 1 has no milestones");
    };
    let s = sampling_slack(trace);
    let e1 = S::one() + d.ps.eps_n;
    let near = m.rho_prime + e1 * m.tau + s;
    let tube = m.rho_prime + S::of(2.0) * e1 * m.tau + s;
    let mut tally = Tally::new();
    let mut interval: Option<u64> = None;
    let mut seg_start = trace.start.man_start;
    let mut goal = trace.start.man_start;
    let mut reached = false;
    let mut ends = 0usize;
    for k in 0..trace.len() {
        let t = trace.times[k];
        let tf = f(t);
        let man = trace.man_at(d.slot, k);
        let j = milestone_index_at(t, lower_sigma, m.p);
        if interval != Some(j - 1) {
            if let Some(prev) = interval {
                if milestone_time(prev + 1, lower_sigma, m.p) == t {
                    let dist = man.dist(goal);
                    ends += 1;
                    tally.observe(tf, k, f(near - dist), || {
                        format!("interval {prev} ends {:e} from its milestone", f(dist))
                    });
                }
                seg_start = goal;
            }
            interval = Some(j - 1);
            goal = trace.goals[k];
            reached = false;
        }
        let dist = man.dist(goal);
        if reached {
            tally.observe(tf, k, f(near - dist), || {
                format!(
                    "left the goal neighbourhood: distance {:e} after reaching rho'",
                    f(dist)
                )
            });
        } else if dist <= m.rho_prime {
            reached = true;
        }
        let off = point_segment_distance(man, seg_start, goal);
        tally.observe(tf, k, f(tube - off), || {
            format!("{:e} away from the lower segment", f(off))
        });
    }
    tally.into_verdict(
        NAME,
        format!("{ends} completed intervals; tube {:e}", f(tube)),
    )
}

/// `|M_{k-1}(t) - M_k(t)| <= delta_k` at every sample.
pub fn check_deviation<S: Scalar>(trace: &Trace<S>, k: usize) -> Verdict {
    let name = format!("deviation_{}_{}", k.saturating_sub(1), k);
    let Some(m) = trace.cascade.milestone(k) else {
        return Verdict::failed(
            &name,
            0.0,
            Some(0),
            0.0,
            format!("level {k} has no deviation budget"),
        );
    };
    let (Some(a), Some(b)) = (trace.level_slot(k - 1), trace.level_slot(k)) else {
        return Verdict::failed(&name, 0.0, Some(0), 0.0, "levels not recorded");
    };
    let bound = m.delta_n + sampling_slack(trace);
    let mut tally = Tally::new();
    let mut worst = S::zero();
    for i in 0..trace.len() {
        let gap = trace.man_at(a, i).dist(trace.man_at(b, i));
        worst = worst.max(gap);
        tally.observe(f(trace.times[i]), i, f(bound - gap), || {
            format!("deviation {:e}", f(gap))
        });
    }
    tally.into_verdict(
        &name,
        format!(
            "max deviation {:e} vs delta_{k} = {:e}",
            f(worst),
            f(m.delta_n)
        ),
    )
}

/// `|M_n(t) - M_m(t)| <= delta_{n+1} + ... + delta_m` at every sample.
pub fn check_cauchy<S: Scalar>(trace: &Trace<S>, n: usize, m: usize) -> Verdict {
    let name = format!("cauchy_{n}_{m}");
    let (Some(a), Some(b)) = (trace.level_slot(n), trace.level_slot(m)) else {
        return Verdict::failed(&name, 0.0, Some(0), 0.0, "levels not recorded");
    };
    let bound = if n == m {
        Some(S::zero())
    } else {
        truncation_bound(&trace.cascade.deltas(), n.min(m), n.max(m))
    };
    let Some(bound) = bound else {
        return Verdict::failed(&name, 0.0, Some(0), 0.0, "deviation budgets unavailable");
    };
    let limit = bound + sampling_slack(trace);
    let mut tally = Tally::new();
    let mut worst = S::zero();
    for i in 0..trace.len() {
        let gap = trace.man_at(a, i).dist(trace.man_at(b, i));
        worst = worst.max(gap);
        tally.observe(f(trace.times[i]), i, f(limit - gap), || {
            format!("gap {:e}", f(gap))
        });
    }
    tally.into_verdict(
        &name,
        format!("max gap {:e} vs truncation bound {:e}", f(worst), f(bound)),
    )
}

/// Per-level and per-lion speed caps between consecutive samples.
pub fn check_speed<S: Scalar>(trace: &Trace<S>) -> Verdict {
    const NAME: &str = "speed";
    let scale = coordinate_scale(trace);
    let mut tally = Tally::new();
    let caps: Vec<S> = trace
        .recorded_levels
        .iter()
        .map(|&k| S::one() + trace.cascade.level(k).eps_n)
        .collect();
    // Corners carry a position error relative to the segment length (headings
    // come from trigonometry), which dominates over very short sample gaps.
    let corner_tol: Vec<S> = trace
        .recorded_levels
        .iter()
        .map(|&k| S::of(ARITH_REL_TOL) * trace.cascade.level(k).step_len())
        .collect();
    for i in 1..trace.len() {
        let dt = trace.times[i] - trace.times[i - 1];
        let tf = f(trace.times[i]);
        for (slot, cap) in caps.iter().enumerate() {
            let moved = trace.man_at(slot, i).dist(trace.man_at(slot, i - 1));
            let allowed = *cap * dt + arith_tol(*cap * dt, scale) + corner_tol[slot];
            tally.observe(tf, i, f((allowed - moved) / (*cap * dt)), || {
                format!(
                    "man level {} moved {:e} in {:e}",
                    trace.recorded_levels[slot],
                    f(moved),
                    f(dt)
                )
            });
        }
        for l in 0..trace.lion_count {
            let moved = trace.lion_at(l, i).dist(trace.lion_at(l, i - 1));
            let allowed = dt + arith_tol(dt, scale);
            tally.observe(tf, i, f((allowed - moved) / dt), || {
                format!("lion {} moved {:e} in {:e}", l + 1, f(moved), f(dt))
            });
        }
    }
    tally.into_verdict(NAME, "relative speed slack".into())
}

/// Consecutive corners of the deepest level are exactly one step apart.
pub fn check_segment_lengths<S: Scalar>(trace: &Trace<S>) -> Verdict {
    const NAME: &str = "segment_length";
    let d = match deepest(trace, NAME) {
        Ok(d) => d,
        Err(v) => return v,
    };
    let scale = coordinate_scale(trace);
    let step = d.ps.step_len();
    let tol = arith_tol(step, scale);
    let mut tally = Tally::new();
    let mut prev: Option<Point2<S>> = None;
    let mut count = 0usize;
    for k in 0..trace.len() {
        if !is_tick(trace.times[k], d.ps.sigma_n) {
            continue;
        }
        let man = trace.man_at(d.slot, k);
        if let Some(p) = prev {
            let err = (man.dist(p) - step).abs();
            count += 1;
            tally.observe(f(trace.times[k]), k, f((tol - err) / step), || {
                format!("segment length off by {:e}", f(err))
            });
        }
        prev = Some(man);
    }
    tally.into_verdict(NAME, format!("{count} segments, tolerance {:e}", f(tol)))
}

pub fn check_capture<S: Scalar>(trace: &Trace<S>) -> Verdict {
    match &trace.capture {
        None => Verdict::passed("capture", 0.0, "no lion reached the man"),
        Some(c) => Verdict::failed(
            "capture",
            c.time,
            Some(c.sample),
            -c.distance,
            format!("lion {} reached the man", c.lion),
        ),
    }
}

/// Smallest observed `|M_n - l_i|` for each lion `i <= n`, with `c_i / 2`.
pub fn capture_margins<S: Scalar>(trace: &Trace<S>) -> Vec<(usize, f64, f64)> {
    let Some(slot) = trace.level_slot(trace.level) else {
        return Vec::new();
    };
    (0..trace.level)
        .map(|i| {
            let min = (0..trace.len())
                .map(|k| trace.man_at(slot, k).dist(trace.lion_at(i, k)))
                .fold(S::of(f64::MAX), |a, b| a.min(b));
            (
                i + 1,
                f(min),
                f(trace.cascade.level(i + 1).c_n / S::of(2.0)),
            )
        })
        .collect()
}

/// Every checker applicable to the trace, in a fixed order.
pub fn check_all<S: Scalar>(trace: &Trace<S>) -> Vec<Verdict> {
    type Check<S> = Box<dyn Fn(&Trace<S>) -> Verdict + Send + Sync>;
    let n = trace.level;
    let mut checks: Vec<Check<S>> = vec![
        Box::new(check_capture),
        Box::new(check_safety),
        Box::new(check_move_grammar),
        Box::new(check_avoidance_duration),
        Box::new(check_goal_adherence),
        Box::new(check_segment_lengths),
        Box::new(check_speed),
    ];
    for k in 2..=n {
        if trace.level_slot(k - 1).is_some() && trace.level_slot(k).is_some() {
            checks.push(Box::new(move |t| check_deviation(t, k)));
        }
    }
    let levels = trace.recorded_levels.clone();
    for (i, &a) in levels.iter().enumerate() {
        for &b in &levels[i + 1..] {
            checks.push(Box::new(move |t| check_cauchy(t, a, b)));
        }
    }
    checks.par_iter().map(|c| c(trace)).collect()
}
