//! The man's strategies `M_1, M_2, ...` as append-only polylines.
//!
//! Level 1 flees along a fixed ray. Level `n >= 2` commits one corner per
//! time of choice `i * sigma_n`, chasing milestones of level `n-1` with a
//! free, escape or avoidance move.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    arcs_intersect, ccw_leading_intersection, direction_arc, GeometryError, Point2,
};
use crate::params::{MilestoneParams, ParameterSet};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("scheduling error at level {level}: {what}")]
    Scheduling { level: usize, what: String },
    #[error("invariant violation at level {level}: {what}")]
    Invariant { level: usize, what: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    Free,
    Escape,
    Avoidance,
}

impl MoveKind {
    pub fn code(self) -> char {
        match self {
            MoveKind::Free => 'F',
            MoveKind::Escape => 'E',
            MoveKind::Avoidance => 'A',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'F' => Some(MoveKind::Free),
            'E' => Some(MoveKind::Escape),
            'A' => Some(MoveKind::Avoidance),
            _ => None,
        }
    }
}

/// Exact time of a periodic event: `index * period`.
pub fn tick<S: Scalar>(index: u64, period: S) -> S {
    S::of_u64(index) * period
}

/// Largest `i` with `tick(i, period) <= t`.
pub fn tick_floor<S: Scalar>(t: S, period: S) -> u64 {
    let mut i = (t / period).floor_u64().unwrap_or(0);
    while i > 0 && tick(i, period) > t {
        i -= 1;
    }
    while tick(i + 1, period) <= t {
        i += 1;
    }
    i
}

/// Time of milestone `j` on a lower level with period `lower_sigma` split `p` ways.
///
/// Written as whole lower periods plus a remainder so that `milestone_time(k*p)`
/// equals `tick(k, lower_sigma)` bit for bit.
pub fn milestone_time<S: Scalar>(j: u64, lower_sigma: S, p: u64) -> S {
    let whole = tick(j / p, lower_sigma);
    let rem = j % p;
    if rem == 0 {
        whole
    } else {
        whole + S::of_u64(rem) * (lower_sigma / S::of_u64(p))
    }
}

/// Index of the milestone pursued at time `t`: the first with time strictly after `t`.
pub fn milestone_index_at<S: Scalar>(t: S, lower_sigma: S, p: u64) -> u64 {
    let piece = lower_sigma / S::of_u64(p);
    let mut j = (t / piece).floor_u64().unwrap_or(0) + 1;
    while j > 1 && milestone_time(j - 1, lower_sigma, p) > t {
        j -= 1;
    }
    while milestone_time(j, lower_sigma, p) <= t {
        j += 1;
    }
    j
}

/// Committed polyline of one strategy level.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyState<S> {
    pub level: usize,
    pub sigma: S,
    pub step: S,
    /// `corners[i] = M_level(i * sigma)`.
    pub corners: Vec<Point2<S>>,
    /// Kind of the move over `[t_i, t_{i+1})`.
    pub kinds: Vec<MoveKind>,
    /// Milestone index pursued by each move (level 1: the next corner index).
    pub goals: Vec<u64>,
    heading: Option<Point2<S>>,
}

impl<S: Scalar> StrategyState<S> {
    pub fn new(ps: &ParameterSet<S>, start: Point2<S>) -> Self {
        Self {
            level: ps.level,
            sigma: ps.sigma_n,
            step: ps.step_len(),
            corners: vec![start],
            kinds: Vec::new(),
            goals: Vec::new(),
            heading: None,
        }
    }

    /// Index of the last committed corner.
    pub fn clock_index(&self) -> u64 {
        self.corners.len() as u64 - 1
    }

    pub fn horizon(&self) -> S {
        tick(self.clock_index(), self.sigma)
    }

    pub fn last(&self) -> Point2<S> {
        *self.corners.last().expect("start corner")
    }

    /// Unit direction of the most recent move.
    pub fn prev_heading(&self) -> Option<Point2<S>> {
        let n = self.corners.len();
        if n < 2 {
            return None;
        }
        (self.corners[n - 1] - self.corners[n - 2]).unit()
    }

    /// Position at time `t` by linear interpolation along the committed polyline.
    pub fn evaluate(&self, t: S) -> Result<Point2<S>, StrategyError> {
        if t < S::zero() {
            return Err(self.scheduling(format!("negative time {t:e}")));
        }
        let i = tick_floor(t, self.sigma);
        let start = tick(i, self.sigma);
        let frac = (t - start) / self.sigma;
        let i = i as usize;
        if frac == S::zero() {
            return self.corners.get(i).copied().ok_or_else(|| self.beyond(t));
        }
        match (self.corners.get(i), self.corners.get(i + 1)) {
            (Some(&a), Some(&b)) => Ok(a.lerp(b, frac)),
            _ => Err(self.beyond(t)),
        }
    }

    /// Position of milestone `j` when this level is split `p` ways per segment.
    pub fn milestone_point(&self, j: u64, p: u64) -> Result<Point2<S>, StrategyError> {
        let seg = (j / p) as usize;
        let rem = j % p;
        let a = *self
            .corners
            .get(seg)
            .ok_or_else(|| self.missing_milestone(j))?;
        if rem == 0 {
            return Ok(a);
        }
        let b = *self
            .corners
            .get(seg + 1)
            .ok_or_else(|| self.missing_milestone(j))?;
        Ok(a + (b - a) * (S::of_u64(rem) / S::of_u64(p)))
    }

    /// Appends the next level-1 corner: a constant step away from lion 1's start.
    pub fn commit_flight(&mut self, lion_start: Point2<S>) -> Result<MoveKind, StrategyError> {
        let start = self.corners[0];
        let heading = match self.heading {
            Some(h) => h,
            None => {
                let h = (start - lion_start)
                    .unit()
                    .ok_or_else(|| self.invariant("lion 1 starts on the man".into()))?;
                self.heading = Some(h);
                h
            }
        };
        let i = self.corners.len() as u64;
        self.corners
            .push(start + heading * (S::of_u64(i) * self.step));
        self.kinds.push(MoveKind::Free);
        self.goals.push(i);
        Ok(MoveKind::Free)
    }

    /// Appends the next corner of a level `n >= 2` strategy.
    ///
    /// `lion` is lion `n` at the current time of choice. `lower` is the
    /// level `n-1` state, committed at least up to the pursued milestone.
    pub fn commit_next(
        &mut self,
        ps: &ParameterSet<S>,
        lion: Point2<S>,
        lower: &StrategyState<S>,
    ) -> Result<MoveKind, StrategyError> {
        let m = ps
            .milestone
            .as_ref()
            .ok_or_else(|| self.invariant("level has no milestone constants".into()))?;
        let t = self.horizon();
        let j = milestone_index_at(t, lower.sigma, m.p);
        let goal = lower.milestone_point(j, m.p)?;
        let man = self.last();
        let (kind, target) = choose_move(ps, m, man, lion, goal, self.prev_heading())
            .map_err(|e| self.invariant(format!("{e} at t = {t:e}")))?;
        self.corners.push(target);
        self.kinds.push(kind);
        self.goals.push(j);
        Ok(kind)
    }

    fn scheduling(&self, what: String) -> StrategyError {
        StrategyError::Scheduling {
            level: self.level,
            what,
        }
    }

    fn invariant(&self, what: String) -> StrategyError {
        StrategyError::Invariant {
            level: self.level,
            what,
        }
    }

    fn beyond(&self, t: S) -> StrategyError {
        self.scheduling(format!(
            "time {t:e} is beyond the committed horizon {:e}",
            self.horizon()
        ))
    }

    fn missing_milestone(&self, j: u64) -> StrategyError {
        self.scheduling(format!(
            "milestone {j} lies beyond corner {}",
            self.clock_index()
        ))
    }
}

/// Whether the escape test holds: some unit `u` has `<u, man - lion> >= r - sigma`
/// and `<u, b - man> >= sigma`.
pub fn escape_feasible<S: Scalar>(
    sigma: S,
    r: S,
    man: Point2<S>,
    lion: Point2<S>,
    b: Point2<S>,
) -> Result<bool, GeometryError> {
    let away = direction_arc(man - lion, r - sigma)?;
    let ahead = direction_arc(b - man, sigma)?;
    Ok(arcs_intersect(&away, &ahead))
}

/// One decision of a level `n >= 2` strategy.
pub fn choose_move<S: Scalar>(
    ps: &ParameterSet<S>,
    m: &MilestoneParams<S>,
    man: Point2<S>,
    lion: Point2<S>,
    goal: Point2<S>,
    prev_heading: Option<Point2<S>>,
) -> Result<(MoveKind, Point2<S>), GeometryError> {
    let step = ps.step_len();
    let toward = (goal - man).unit();
    if man.dist(lion) >= m.r + step {
        let dir = toward
            .or(prev_heading)
            .unwrap_or_else(|| Point2::new(S::one(), S::zero()));
        return Ok((MoveKind::Free, man + dir * step));
    }
    if let Some(dir) = toward {
        let b = man + dir * step;
        if escape_feasible(ps.sigma_n, m.r, man, lion, b)? {
            return Ok((MoveKind::Escape, b));
        }
    }
    let q = ccw_leading_intersection(man, step, lion, m.r)?;
    Ok((MoveKind::Avoidance, q))
}

/// Bound on `|M_n(t) - M_m(t)|`: `delta_{n+1} + ... + delta_m`.
///
/// `deltas` lists `delta_2, delta_3, ...`; `None` when it is too short or `m <= n`.
pub fn truncation_bound<S: Scalar>(deltas: &[S], n: usize, m: usize) -> Option<S> {
    if n < 1 || m <= n || deltas.len() + 1 < m {
        return None;
    }
    Some(
        deltas[n - 1..m - 1]
            .iter()
            .fold(S::zero(), |acc, &d| acc + d),
    )
}
