//! Constructed violations for exercising the checkers.
//!
//! Each entry copies a clean level-2 trace and breaks exactly one property
//! at a known sample, so the matching checker must report that sample as its
//! first violation. The base trace must record levels 1 and 2, contain only
//! free moves and span at least one canonical interval.

use crate::engine::detect_capture;
use crate::geometry::Point2;
use crate::invariants::{
    check_avoidance_duration, check_capture, check_cauchy, check_deviation, check_goal_adherence,
    check_move_grammar, check_safety, check_segment_lengths, check_speed,
};
use crate::scalar::Scalar;
use crate::strategy::{tick, tick_floor, MoveKind};
use crate::trace::Trace;
use crate::verdict::Verdict;

pub struct Tampered<S> {
    pub checker: &'static str,
    pub trace: Trace<S>,
    /// Sample where the first violation must be reported.
    pub index: usize,
}

impl<S: Scalar> Tampered<S> {
    pub fn run(&self) -> Verdict {
        let t = &self.trace;
        match self.checker {
            "capture" => check_capture(t),
            "safety" => check_safety(t),
            "move_grammar" | "move_grammar_lock" => check_move_grammar(t),
            "avoidance_duration" => check_avoidance_duration(t),
            "goal_adherence" => check_goal_adherence(t),
            "segment_length" => check_segment_lengths(t),
            "speed" => check_speed(t),
            "deviation" => check_deviation(t, 2),
            "cauchy" => check_cauchy(t, 1, 2),
            other => unreachable!("unknown checker {other}"),
        }
    }

    /// Time the first violation must be reported at.
    pub fn time(&self) -> f64 {
        self.trace.times[self.index].as_f64()
    }
}

/// Samples that fall on times of choice of the deepest level.
fn tick_samples<S: Scalar>(trace: &Trace<S>) -> Vec<usize> {
    let sigma = trace.cascade.level(trace.level).sigma_n;
    (0..trace.len())
        .filter(|&k| {
            let t = trace.times[k];
            tick(tick_floor(t, sigma), sigma) == t
        })
        .collect()
}

fn shift_man<S: Scalar>(trace: &mut Trace<S>, level: usize, k: usize, by: Point2<S>) {
    let slot = trace.level_slot(level).expect("level recorded");
    let levels = trace.recorded_levels.len();
    trace.men[k * levels + slot] += by;
}

fn set_lion<S: Scalar>(trace: &mut Trace<S>, lion: usize, k: usize, p: Point2<S>) {
    trace.lions[k * trace.lion_count + lion] = p;
}

fn recompute_capture<S: Scalar>(trace: &mut Trace<S>) {
    let slot = trace
        .level_slot(trace.level)
        .expect("deepest level recorded");
    trace.capture = (0..trace.len()).find_map(|k| {
        let lions: Vec<_> = (0..trace.level).map(|i| trace.lion_at(i, k)).collect();
        detect_capture(trace.times[k], k, trace.man_at(slot, k), &lions)
    });
}

/// One tampered trace per checker (two for the move grammar).
pub fn falsification_corpus<S: Scalar>(base: &Trace<S>) -> Vec<Tampered<S>> {
    assert_eq!(base.level, 2, "corpus needs a level-2 base trace");
    assert!(
        base.kinds.iter().all(|&k| k == MoveKind::Free),
        "corpus needs an all-free base trace"
    );
    let ticks = tick_samples(base);
    let c2 = base.cascade.level(2);
    let m = c2.milestone.expect("level 2");
    let limit = (m.tau / c2.sigma_n).ceil().as_f64() as usize + 1;
    assert!(ticks.len() > limit + 200, "base trace too short");
    let at = |i: usize| ticks[i];
    let man2 = |t: &Trace<S>, k: usize| t.man_at(t.level_slot(2).unwrap(), k);
    let big = S::of(0.5);
    let mut out = Vec::new();

    let mut t = base.clone();
    let k = at(40) + 3;
    let p = man2(&t, k);
    set_lion(&mut t, 0, k, p);
    recompute_capture(&mut t);
    out.push(Tampered {
        checker: "capture",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let k = at(50) + 5;
    let half = base.cascade.level(1).c_n / S::of(2.0);
    let p = man2(&t, k) + Point2::new(half * S::of(0.25), S::zero());
    set_lion(&mut t, 0, k, p);
    out.push(Tampered {
        checker: "safety",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let (kp, k) = (at(60), at(61));
    (kp..k).for_each(|s| t.kinds[s] = MoveKind::Avoidance);
    out.push(Tampered {
        checker: "move_grammar",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let (kp, k) = (at(70), at(71));
    (kp..k).for_each(|s| t.kinds[s] = MoveKind::Escape);
    (k..at(72)).for_each(|s| t.kinds[s] = MoveKind::Avoidance);
    (at(72)..at(74)).for_each(|s| t.kinds[s] = MoveKind::Escape);
    out.push(Tampered {
        checker: "move_grammar_lock",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let first = 100;
    (at(first)..at(first + limit + 1)).for_each(|s| t.kinds[s] = MoveKind::Avoidance);
    // Close the run with an escape so the tampering adds no A -> F transition.
    (at(first + limit + 1)..at(first + limit + 2)).for_each(|s| t.kinds[s] = MoveKind::Escape);
    out.push(Tampered {
        checker: "avoidance_duration",
        trace: t,
        index: at(first + limit),
    });

    let mut t = base.clone();
    let k = at(80) + 7;
    shift_man(&mut t, 2, k, Point2::new(S::zero(), big));
    out.push(Tampered {
        checker: "goal_adherence",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let k = at(90);
    shift_man(
        &mut t,
        2,
        k,
        Point2::new(S::zero(), c2.step_len() * S::of(1e-3)),
    );
    out.push(Tampered {
        checker: "segment_length",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let k = at(95) + 2;
    let moved = t.lion_at(1, k) + Point2::new(S::of(0.01), S::zero());
    set_lion(&mut t, 1, k, moved);
    out.push(Tampered {
        checker: "speed",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let k = at(110) + 9;
    shift_man(&mut t, 2, k, Point2::new(m.delta_n * S::of(2.0), S::zero()));
    out.push(Tampered {
        checker: "deviation",
        trace: t,
        index: k,
    });

    let mut t = base.clone();
    let k = at(120) + 11;
    shift_man(&mut t, 1, k, Point2::new(S::zero(), m.delta_n * S::of(2.0)));
    out.push(Tampered {
        checker: "cauchy",
        trace: t,
        index: k,
    });

    out
}
