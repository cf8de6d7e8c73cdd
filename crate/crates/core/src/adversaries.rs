//! Lion controllers and start-set generators.
//!
//! Controllers see the man's past only. Every controller moves at most `h`
//! per sub-step of length `h`.

use thiserror::Error;

use crate::geometry::Point2;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("waypoints must have strictly increasing times (entry {0})")]
    Unordered(usize),
    #[error("waypoints {0} and {1} imply speed {2:e} > 1")]
    TooFast(usize, usize, f64),
    #[error("scripted path needs at least one waypoint")]
    Empty,
    #[error("orbit radius must be positive")]
    Radius,
}

/// A closed-form unit-speed path.
#[derive(Clone, Debug, PartialEq)]
pub enum ScriptedPath<S> {
    /// Piecewise-linear through `(time, point)`; constant before the first and after the last.
    Waypoints(Vec<(S, Point2<S>)>),
    /// Straight approach from `start` to the circle, then counterclockwise at unit speed.
    Orbit {
        start: Point2<S>,
        center: Point2<S>,
        radius: S,
    },
}

impl<S: Scalar> ScriptedPath<S> {
    pub fn waypoints(points: Vec<(S, Point2<S>)>) -> Result<Self, ControllerError> {
        validate_waypoints(&points)?;
        Ok(ScriptedPath::Waypoints(points))
    }

    pub fn orbit(start: Point2<S>, center: Point2<S>, radius: S) -> Result<Self, ControllerError> {
        if !(radius > S::zero()) {
            return Err(ControllerError::Radius);
        }
        Ok(ScriptedPath::Orbit {
            start,
            center,
            radius,
        })
    }

    pub fn position(&self, t: S) -> Point2<S> {
        match self {
            ScriptedPath::Waypoints(w) => interpolate(w, t),
            ScriptedPath::Orbit {
                start,
                center,
                radius,
            } => {
                let rel = *start - *center;
                let dir = rel
                    .unit()
                    .unwrap_or_else(|| Point2::new(S::one(), S::zero()));
                let entry = *center + dir * *radius;
                let approach = start.dist(entry);
                if t <= approach {
                    return start.lerp(entry, t / approach.max(S::of(f64::MIN_POSITIVE)));
                }
                let angle = dir.angle() + (t - approach) / *radius;
                *center + Point2::from_angle(angle) * *radius
            }
        }
    }
}

/// Checks strictly increasing times and unit speed between consecutive waypoints.
pub fn validate_waypoints<S: Scalar>(points: &[(S, Point2<S>)]) -> Result<(), ControllerError> {
    if points.is_empty() {
        return Err(ControllerError::Empty);
    }
    for i in 1..points.len() {
        let (t0, p0) = points[i - 1];
        let (t1, p1) = points[i];
        if !(t1 > t0) {
            return Err(ControllerError::Unordered(i));
        }
        let speed = p0.dist(p1) / (t1 - t0);
        if speed > S::one() + S::of(1e-12) {
            return Err(ControllerError::TooFast(i - 1, i, speed.as_f64()));
        }
    }
    Ok(())
}

fn interpolate<S: Scalar>(w: &[(S, Point2<S>)], t: S) -> Point2<S> {
    if t <= w[0].0 {
        return w[0].1;
    }
    let k = w.partition_point(|(tk, _)| *tk <= t);
    if k >= w.len() {
        return w[w.len() - 1].1;
    }
    let (t0, p0) = w[k - 1];
    let (t1, p1) = w[k];
    p0.lerp(p1, (t - t0) / (t1 - t0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum LionController<S> {
    Stationary,
    /// Runs straight at the man's current position.
    PurePursuit,
    /// Runs at the man's current goal when `goal_visible`, else pursues.
    GoalAmbush {
        goal_visible: bool,
    },
    Scripted(ScriptedPath<S>),
    /// A precomputed path, e.g. read back from a trace.
    Replay(Vec<(S, Point2<S>)>),
}

impl<S: Scalar> LionController<S> {
    pub fn name(&self) -> &'static str {
        match self {
            LionController::Stationary => "stationary",
            LionController::PurePursuit => "pure_pursuit",
            LionController::GoalAmbush { .. } => "goal_ambush",
            LionController::Scripted(_) => "scripted",
            LionController::Replay(_) => "replay",
        }
    }
}

fn toward<S: Scalar>(from: Point2<S>, to: Point2<S>, h: S) -> Point2<S> {
    let d = to - from;
    let dist = d.norm();
    if dist <= h {
        to
    } else {
        from + d * (h / dist)
    }
}

/// Position at `t + h` of a lion at `lion` at time `t`.
///
/// `man` is the man's position at `t`; `goal` is his current goal when known.
pub fn lion_step<S: Scalar>(
    ctrl: &LionController<S>,
    lion: Point2<S>,
    man: Point2<S>,
    goal: Option<Point2<S>>,
    t: S,
    h: S,
) -> Point2<S> {
    match ctrl {
        LionController::Stationary => lion,
        LionController::PurePursuit => toward(lion, man, h),
        LionController::GoalAmbush { goal_visible } => match (goal_visible, goal) {
            (true, Some(g)) => toward(lion, g, h),
            _ => toward(lion, man, h),
        },
        LionController::Scripted(path) => toward(lion, path.position(t + h), h),
        LionController::Replay(samples) => toward(lion, interpolate(samples, t + h), h),
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The first `count` rational points `(a/k, b/k)` of norm at most `radius`.
///
/// Ordered by `(k, a, b)`, each point listed once in lowest terms, `man_start` skipped.
pub fn rational_grid_starts<S: Scalar>(
    radius: S,
    count: usize,
    man_start: Point2<S>,
) -> Vec<Point2<S>> {
    let mut out = Vec::with_capacity(count);
    if !(radius > S::zero()) {
        return out;
    }
    let mut k: u64 = 1;
    while out.len() < count {
        let kk = S::of_u64(k);
        let bound = (radius * kk).floor_u64().unwrap_or(0) as i64;
        let limit = radius * radius * kk * kk;
        for a in -bound..=bound {
            for b in -bound..=bound {
                if out.len() == count {
                    return out;
                }
                let norm_sq = S::of_u64((a * a + b * b) as u64);
                if norm_sq > limit {
                    continue;
                }
                if k > 1 && gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), k) > 1 {
                    continue;
                }
                let p = Point2::new(int::<S>(a) / kk, int::<S>(b) / kk);
                if p != man_start {
                    out.push(p);
                }
            }
        }
        k += 1;
    }
    out
}

fn int<S: Scalar>(v: i64) -> S {
    let m = S::of_u64(v.unsigned_abs());
    if v < 0 {
        -m
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    type P = Point2<f64>;

    #[test]
    fn pure_pursuit_examples() {
        let c = LionController::PurePursuit;
        let p = lion_step(&c, P::origin(), P::new(3.0, 4.0), None, 0.0, 1.0);
        assert!(p.dist(P::new(0.6, 0.8)) < 1e-15);
        let p = lion_step(&c, P::origin(), P::new(0.5, 0.0), None, 0.0, 1.0);
        assert_eq!(p, P::new(0.5, 0.0));
    }

    #[test]
    fn stationary_stays() {
        let p = lion_step(
            &LionController::Stationary,
            P::new(2.0, 3.0),
            P::origin(),
            None,
            1.0,
            0.1,
        );
        assert_eq!(p, P::new(2.0, 3.0));
    }

    #[test]
    fn goal_ambush_falls_back_without_visibility() {
        let goal = Some(P::new(0.0, 10.0));
        let hidden = LionController::GoalAmbush {
            goal_visible: false,
        };
        let seen = LionController::GoalAmbush { goal_visible: true };
        assert_eq!(
            lion_step(&hidden, P::origin(), P::new(1.0, 0.0), goal, 0.0, 0.5),
            P::new(0.5, 0.0)
        );
        assert_eq!(
            lion_step(&seen, P::origin(), P::new(1.0, 0.0), goal, 0.0, 0.5),
            P::new(0.0, 0.5)
        );
    }

    #[test]
    fn waypoint_speed_is_validated() {
        let ok = vec![(0.0, P::origin()), (1.0, P::new(0.6, 0.8))];
        assert!(ScriptedPath::waypoints(ok).is_ok());
        let fast = vec![(0.0, P::origin()), (1.0, P::new(2.0, 0.0))];
        assert!(matches!(
            ScriptedPath::waypoints(fast),
            Err(ControllerError::TooFast(0, 1, _))
        ));
        let back = vec![(1.0, P::origin()), (1.0, P::origin())];
        assert!(ScriptedPath::waypoints(back).is_err());
    }

    #[test]
    fn scripted_interpolates() {
        let path =
            ScriptedPath::waypoints(vec![(0.0, P::origin()), (2.0, P::new(2.0, 0.0))]).unwrap();
        let c = LionController::Scripted(path);
        assert_eq!(
            lion_step(&c, P::origin(), P::origin(), None, 0.0, 0.5),
            P::new(0.5, 0.0)
        );
        assert_eq!(
            lion_step(&c, P::new(2.0, 0.0), P::origin(), None, 5.0, 0.5),
            P::new(2.0, 0.0)
        );
    }

    #[test]
    fn orbit_is_unit_speed() {
        let path = ScriptedPath::orbit(P::new(1.0, 0.0), P::new(-0.125, 0.0), 0.3).unwrap();
        let h = 1e-3;
        let mut prev = path.position(0.0);
        assert_eq!(prev, P::new(1.0, 0.0));
        for i in 1..5000 {
            let p = path.position(i as f64 * h);
            assert!(p.dist(prev) <= h * (1.0 + 1e-12));
            prev = p;
        }
        assert!((prev.dist(P::new(-0.125, 0.0)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn grid_examples() {
        let far = P::new(10.0, 10.0);
        assert_eq!(
            rational_grid_starts(1.0, 3, far),
            vec![P::new(-1.0, 0.0), P::new(0.0, -1.0), P::new(0.0, 0.0)]
        );
        assert_eq!(
            rational_grid_starts(1.0, 3, P::origin()),
            vec![P::new(-1.0, 0.0), P::new(0.0, -1.0), P::new(0.0, 1.0)]
        );
    }

    #[test]
    fn grid_is_duplicate_free_and_deterministic() {
        let man = P::new(0.5, 0.0);
        let pts = rational_grid_starts(1.5, 400, man);
        assert_eq!(pts.len(), 400);
        assert_eq!(pts, rational_grid_starts(1.5, 400, man));
        let keys: HashSet<(u64, u64)> =
            pts.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
        assert_eq!(keys.len(), pts.len());
        assert!(pts
            .iter()
            .all(|p| p.dist(man) > 0.0 && p.norm() <= 1.5 + 1e-15));
    }
}
