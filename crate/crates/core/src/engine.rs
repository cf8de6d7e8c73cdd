//! Discrete-event loop.
//!
//! Three kinds of event share one clock: times of choice `i * sigma_k` of
//! every level, milestone boundaries of every level `k >= 2`, and lion
//! sub-steps of length `h = sigma_n / K`. Every event time is an integer
//! index times a period, never a running sum. At equal times lower levels
//! commit first, then higher levels, then lions step. A sample is recorded
//! at every distinct event time.

use thiserror::Error;

use crate::adversaries::{lion_step, LionController};
use crate::geometry::Point2;
use crate::params::{derive_cascade, Cascade, CascadeOptions, ParamError, StartConfiguration};
use crate::scalar::Scalar;
use crate::strategy::{
    milestone_index_at, milestone_time, tick, tick_floor, MoveKind, StrategyError, StrategyState,
};
use crate::trace::{CaptureEvent, Trace};

pub const DEFAULT_SUBSTEPS: u64 = 16;

/// Relative distance at which a lion counts as touching the man.
pub const CAPTURE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(
        "causality error: lion positions requested at {requested:e}, simulation is at {now:e}"
    )]
    Causality { requested: f64, now: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Time(f64),
    /// Canonical intervals of the deepest level (periods of `sigma_1` at level 1).
    Intervals(u64),
    /// Times of choice of the deepest level.
    Steps(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameConfig<S> {
    pub start: StartConfiguration<S>,
    pub level: usize,
    pub controllers: Vec<LionController<S>>,
    pub horizon: Horizon,
    pub substep_factor: u64,
    pub delta_override: Option<Vec<S>>,
    /// Man levels to record; empty means all.
    pub record_levels: Vec<usize>,
    pub config_digest: String,
}

impl<S: Scalar> GameConfig<S> {
    pub fn new(
        start: StartConfiguration<S>,
        level: usize,
        controllers: Vec<LionController<S>>,
        horizon: Horizon,
    ) -> Self {
        Self {
            start,
            level,
            controllers,
            horizon,
            substep_factor: DEFAULT_SUBSTEPS,
            delta_override: None,
            record_levels: Vec::new(),
            config_digest: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let lions = self.start.lion_starts.len();
        if self.level < 1 {
            return Err(EngineError::Config("level must be at least 1".into()));
        }
        if self.controllers.len() != lions {
            return Err(EngineError::Config(format!(
                "{} controllers for {lions} lions",
                self.controllers.len()
            )));
        }
        if lions < self.level {
            return Err(EngineError::Config(format!(
                "level {} needs at least {} lions, got {lions}",
                self.level, self.level
            )));
        }
        if self.substep_factor < 1 {
            return Err(EngineError::Config(
                "substep_factor must be at least 1".into(),
            ));
        }
        if let Horizon::Time(t) = self.horizon {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(EngineError::Config(format!(
                    "horizon time {t} must be finite and non-negative"
                )));
            }
        }
        if let Some(k) = self
            .record_levels
            .iter()
            .find(|&&k| k < 1 || k > self.level)
        {
            return Err(EngineError::Config(format!(
                "cannot record level {k} of a level-{} run",
                self.level
            )));
        }
        Ok(())
    }

    pub fn cascade(&self) -> Result<Cascade<S>, EngineError> {
        let opts = CascadeOptions {
            delta_override: self.delta_override.clone(),
            precision_guard: true,
        };
        Ok(derive_cascade(&self.start, self.level, &opts)?)
    }

    fn recorded(&self) -> Vec<usize> {
        if self.record_levels.is_empty() {
            (1..=self.level).collect()
        } else {
            let mut v = self.record_levels.clone();
            v.sort_unstable();
            v.dedup();
            v
        }
    }
}

/// End time of the run.
pub fn horizon_time<S: Scalar>(horizon: Horizon, cascade: &Cascade<S>) -> S {
    let n = cascade.depth();
    match horizon {
        Horizon::Time(t) => S::of(t),
        Horizon::Steps(c) => tick(c, cascade.level(n).sigma_n),
        Horizon::Intervals(c) => match cascade.milestone(n) {
            Some(m) => milestone_time(c, cascade.level(n - 1).sigma_n, m.p),
            None => tick(c, cascade.level(1).sigma_n),
        },
    }
}

/// Lion positions over the current sub-step `[start, end]`.
struct LionWindow<S> {
    index: u64,
    start: S,
    end: S,
    from: Vec<Point2<S>>,
    to: Vec<Point2<S>>,
}

impl<S: Scalar> LionWindow<S> {
    fn observe(&self, t: S, out: &mut Vec<Point2<S>>) -> Result<(), EngineError> {
        if t > self.end || t < self.start {
            return Err(EngineError::Causality {
                requested: t.as_f64(),
                now: self.end.as_f64(),
            });
        }
        out.clear();
        if t == self.end {
            out.extend_from_slice(&self.to);
        } else if t == self.start {
            out.extend_from_slice(&self.from);
        } else {
            let frac = (t - self.start) / (self.end - self.start);
            out.extend(
                self.from
                    .iter()
                    .zip(&self.to)
                    .map(|(a, b)| a.lerp(*b, frac)),
            );
        }
        Ok(())
    }
}

/// Runs the game and records every event time.
pub fn run<S: Scalar>(config: &GameConfig<S>) -> Result<Trace<S>, EngineError> {
    config.validate()?;
    let cascade = config.cascade()?;
    let mut sim = Simulation::new(config, cascade)?;
    sim.run()?;
    Ok(sim.trace)
}

struct Simulation<'a, S> {
    config: &'a GameConfig<S>,
    n: usize,
    end: S,
    states: Vec<StrategyState<S>>,
    next_choice: Vec<u64>,
    /// Next milestone index per level; unused at index 0.
    next_milestone: Vec<u64>,
    substep: S,
    lions: LionWindow<S>,
    trace: Trace<S>,
}

impl<'a, S: Scalar> Simulation<'a, S> {
    fn new(config: &'a GameConfig<S>, cascade: Cascade<S>) -> Result<Self, EngineError> {
        let n = config.level;
        let end = horizon_time(config.horizon, &cascade);
        let states = cascade
            .levels
            .iter()
            .map(|ps| StrategyState::new(ps, config.start.man_start))
            .collect();
        let substep = cascade.level(n).sigma_n / S::of_u64(config.substep_factor);
        let starts = config.start.lion_starts.clone();
        let trace = Trace::empty(
            n,
            config.recorded(),
            config.start.clone(),
            cascade,
            config.config_digest.clone(),
        );
        Ok(Self {
            config,
            n,
            end,
            states,
            next_choice: vec![0; n],
            next_milestone: vec![1; n],
            substep,
            lions: LionWindow {
                index: 0,
                start: S::zero(),
                end: S::zero(),
                from: starts.clone(),
                to: starts,
            },
            trace,
        })
    }

    fn cascade(&self) -> &Cascade<S> {
        &self.trace.cascade
    }

    fn choice_time(&self, k: usize) -> S {
        tick(self.next_choice[k - 1], self.states[k - 1].sigma)
    }

    fn milestone_time(&self, k: usize) -> S {
        let p = self.cascade().milestone(k).expect("level >= 2").p;
        milestone_time(self.next_milestone[k - 1], self.states[k - 2].sigma, p)
    }

    fn substep_time(&self, m: u64) -> S {
        let k = self.config.substep_factor;
        let whole = tick(m / k, self.states[self.n - 1].sigma);
        if m.is_multiple_of(k) {
            whole
        } else {
            whole + S::of_u64(m % k) * self.substep
        }
    }

    fn next_time(&self) -> S {
        let mut t = self.substep_time(self.lions.index);
        for k in 1..=self.n {
            t = t.min(self.choice_time(k));
            if k >= 2 {
                t = t.min(self.milestone_time(k));
            }
        }
        if self.end > self.trace.duration() || self.trace.is_empty() {
            t = t.min(self.end);
        }
        t
    }

    fn run(&mut self) -> Result<(), EngineError> {
        let mut scratch = Vec::with_capacity(self.trace.lion_count);
        let mut men = Vec::with_capacity(self.trace.recorded_levels.len());
        loop {
            let t = self.next_time();
            if t > self.end || (!self.trace.is_empty() && t <= self.trace.duration()) {
                break;
            }
            for k in 1..=self.n {
                if self.choice_time(k) == t {
                    self.commit(k, t, &mut scratch)?;
                }
                if k >= 2 && self.milestone_time(k) == t {
                    self.next_milestone[k - 1] += 1;
                }
            }
            if self.substep_time(self.lions.index) == t {
                self.step_lions(t)?;
            }
            self.record(t, &mut scratch, &mut men)?;
            if self.trace.capture.is_some() {
                break;
            }
        }
        Ok(())
    }

    fn commit(&mut self, k: usize, t: S, scratch: &mut Vec<Point2<S>>) -> Result<(), EngineError> {
        if k == 1 {
            self.states[0].commit_flight(self.config.start.lion_starts[0])?;
        } else {
            self.lions.observe(t, scratch)?;
            let ps = &self.trace.cascade.levels[k - 1];
            let (lower, upper) = self.states.split_at_mut(k - 1);
            upper[0].commit_next(ps, scratch[k - 1], &lower[k - 2])?;
        }
        self.next_choice[k - 1] += 1;
        Ok(())
    }

    /// Goal of the deepest level at `t`.
    fn goal(&self, t: S) -> Result<Point2<S>, EngineError> {
        let n = self.n;
        if n == 1 {
            let s = &self.states[0];
            let i = tick_floor(t, s.sigma) as usize + 1;
            return s.corners.get(i).copied().ok_or_else(|| {
                EngineError::Strategy(StrategyError::Scheduling {
                    level: 1,
                    what: format!("corner {i} not committed"),
                })
            });
        }
        let p = self.cascade().milestone(n).expect("level >= 2").p;
        let lower = &self.states[n - 2];
        let j = milestone_index_at(t, lower.sigma, p);
        Ok(lower.milestone_point(j, p)?)
    }

    fn step_lions(&mut self, t: S) -> Result<(), EngineError> {
        let man = self.states[self.n - 1].evaluate(t)?;
        let goal = self.goal(t)?;
        let next_t = self.substep_time(self.lions.index + 1);
        let h = next_t - t;
        let w = &mut self.lions;
        std::mem::swap(&mut w.from, &mut w.to);
        for (i, ctrl) in self.config.controllers.iter().enumerate() {
            let goal = matches!(ctrl, LionController::GoalAmbush { .. }).then_some(goal);
            w.to[i] = lion_step(ctrl, w.from[i], man, goal, t, h);
        }
        w.start = t;
        w.end = next_t;
        w.index += 1;
        Ok(())
    }

    fn record(
        &mut self,
        t: S,
        scratch: &mut Vec<Point2<S>>,
        men: &mut Vec<Point2<S>>,
    ) -> Result<(), EngineError> {
        self.lions.observe(t, scratch)?;
        men.clear();
        for &k in &self.trace.recorded_levels {
            men.push(self.states[k - 1].evaluate(t)?);
        }
        let deepest = &self.states[self.n - 1];
        let kind = deepest
            .kinds
            .get(tick_floor(t, deepest.sigma) as usize)
            .copied()
            .unwrap_or(MoveKind::Free);
        let goal = self.goal(t)?;
        let man = deepest.evaluate(t)?;
        let sample = self.trace.len();
        self.trace.push(t, kind, goal, men, scratch);
        if self.trace.capture.is_none() {
            self.trace.capture = detect_capture(t, sample, man, &scratch[..self.n]);
        }
        Ok(())
    }
}

/// Capture test for one sample; only lions `1..=n` are passed in, since
/// lions beyond the strategy depth are not evaded by `M_n`.
pub fn detect_capture<S: Scalar>(
    t: S,
    sample: usize,
    man: Point2<S>,
    lions: &[Point2<S>],
) -> Option<CaptureEvent> {
    let scale = lions.iter().fold(man.max_abs(), |m, l| m.max(l.max_abs()));
    let tol = (S::of(CAPTURE_REL_TOL) * scale).max(scale.ulp());
    lions.iter().enumerate().find_map(|(i, l)| {
        let d = man.dist(*l);
        (d <= tol).then(|| CaptureEvent {
            time: t.as_f64(),
            sample,
            lion: i + 1,
            distance: d.as_f64(),
        })
    })
}

/// Lion positions at `t` from a finished trace, interpolated between samples.
pub fn observe_lions<S: Scalar>(trace: &Trace<S>, t: S) -> Result<Vec<Point2<S>>, EngineError> {
    let now = trace.duration();
    if trace.is_empty() || t > now || t < S::zero() {
        return Err(EngineError::Causality {
            requested: t.as_f64(),
            now: now.as_f64(),
        });
    }
    let k = trace.times.partition_point(|&s| s <= t);
    let i = k - 1;
    let lions = (0..trace.lion_count).map(|l| trace.lion_at(l, i));
    if trace.times[i] == t {
        return Ok(lions.collect());
    }
    let (t0, t1) = (trace.times[i], trace.times[i + 1]);
    let frac = (t - t0) / (t1 - t0);
    Ok((0..trace.lion_count)
        .map(|l| trace.lion_at(l, i).lerp(trace.lion_at(l, i + 1), frac))
        .collect())
}
