use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::params::{Cascade, StartConfiguration};
use crate::scalar::Scalar;
use crate::strategy::MoveKind;

/// A lion reached the man.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureEvent {
    pub time: f64,
    pub sample: usize,
    /// 1-based lion index.
    pub lion: usize,
    pub distance: f64,
}

/// Recorded run, stored column-wise.
///
/// Sample `s` has time `times[s]`, move kind `kinds[s]` and goal `goals[s]`
/// of the deepest level, man positions `men[s * L .. (s + 1) * L]` for the
/// `L` recorded levels, and lion positions `lions[s * N .. (s + 1) * N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S> {
    /// Strategy depth `n`.
    pub level: usize,
    /// Recorded man levels, ascending.
    pub recorded_levels: Vec<usize>,
    pub lion_count: usize,
    pub times: Vec<S>,
    pub kinds: Vec<MoveKind>,
    pub goals: Vec<Point2<S>>,
    pub men: Vec<Point2<S>>,
    pub lions: Vec<Point2<S>>,
    pub start: StartConfiguration<S>,
    pub cascade: Cascade<S>,
    pub config_digest: String,
    pub capture: Option<CaptureEvent>,
}

impl<S: Scalar> Trace<S> {
    pub fn empty(
        level: usize,
        recorded_levels: Vec<usize>,
        start: StartConfiguration<S>,
        cascade: Cascade<S>,
        config_digest: String,
    ) -> Self {
        Self {
            level,
            recorded_levels,
            lion_count: start.lion_starts.len(),
            times: Vec::new(),
            kinds: Vec::new(),
            goals: Vec::new(),
            men: Vec::new(),
            lions: Vec::new(),
            start,
            cascade,
            config_digest,
            capture: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn reserve(&mut self, samples: usize) {
        self.times.reserve(samples);
        self.kinds.reserve(samples);
        self.goals.reserve(samples);
        self.men.reserve(samples * self.recorded_levels.len());
        self.lions.reserve(samples * self.lion_count);
    }

    pub fn push(
        &mut self,
        t: S,
        kind: MoveKind,
        goal: Point2<S>,
        men: &[Point2<S>],
        lions: &[Point2<S>],
    ) {
        debug_assert_eq!(men.len(), self.recorded_levels.len());
        debug_assert_eq!(lions.len(), self.lion_count);
        self.times.push(t);
        self.kinds.push(kind);
        self.goals.push(goal);
        self.men.extend_from_slice(men);
        self.lions.extend_from_slice(lions);
    }

    /// Column of a recorded man level.
    pub fn level_slot(&self, level: usize) -> Option<usize> {
        self.recorded_levels.iter().position(|&k| k == level)
    }

    pub fn man_at(&self, slot: usize, sample: usize) -> Point2<S> {
        self.men[sample * self.recorded_levels.len() + slot]
    }

    /// Position of lion `lion` (0-based) at `sample`.
    pub fn lion_at(&self, lion: usize, sample: usize) -> Point2<S> {
        self.lions[sample * self.lion_count + lion]
    }

    /// The deepest strategy's path, when recorded.
    pub fn man(&self, sample: usize) -> Option<Point2<S>> {
        self.level_slot(self.level)
            .map(|slot| self.man_at(slot, sample))
    }

    pub fn duration(&self) -> S {
        self.times.last().copied().unwrap_or_else(S::zero)
    }

    pub fn max_spacing(&self) -> S {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(S::zero(), |a, b| a.max(b))
    }
}
