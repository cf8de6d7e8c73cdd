use serde::{Deserialize, Serialize};

/// One named re-substituted inequality and its relative slack.
///
/// `slack >= 0` means the inequality holds within its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub slack: f64,
    pub pass: bool,
}

/// Outcome of one check.
///
/// `pass` holds exactly when `first_violation_time` is `None`. Parameter
/// certificates are not time-based and report a failing level at time 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub first_violation_time: Option<f64>,
    /// Sample index of the first violation, when the check runs over a trace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation_index: Option<usize>,
    /// Worst-case slack observed, in the check's own units.
    pub measured_margin: f64,
    pub details: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<Residual>,
}

impl Verdict {
    pub fn passed(
        name: impl Into<String>,
        measured_margin: f64,
        details: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            pass: true,
            first_violation_time: None,
            first_violation_index: None,
            measured_margin,
            details: details.into(),
            residuals: Vec::new(),
        }
    }

    pub fn failed(
        name: impl Into<String>,
        time: f64,
        index: Option<usize>,
        measured_margin: f64,
        details: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            pass: false,
            first_violation_time: Some(time),
            first_violation_index: index,
            measured_margin,
            details: details.into(),
            residuals: Vec::new(),
        }
    }
}

/// Tracks the earliest violation and the smallest slack while scanning samples.
#[derive(Clone, Debug)]
pub(crate) struct Tally {
    pub first: Option<(f64, usize, String)>,
    pub margin: f64,
}

impl Tally {
    pub fn new() -> Self {
        Self {
            first: None,
            margin: f64::INFINITY,
        }
    }

    /// Records `slack` at sample `index`; negative slack is a violation.
    pub fn observe(&mut self, time: f64, index: usize, slack: f64, what: impl FnOnce() -> String) {
        if slack < self.margin || slack.is_nan() {
            self.margin = if slack.is_nan() {
                f64::NEG_INFINITY
            } else {
                slack
            };
        }
        if !(slack >= 0.0) {
            self.violate(time, index, what);
        }
    }

    pub fn violate(&mut self, time: f64, index: usize, what: impl FnOnce() -> String) {
        match &self.first {
            Some((_, i, _)) if *i <= index => {}
            _ => self.first = Some((time, index, what())),
        }
    }

    pub fn into_verdict(self, name: &str, details: String) -> Verdict {
        // JSON has no infinities: vacuous checks report 0, NaN slack reports -MAX.
        let margin = if self.margin.is_finite() {
            self.margin
        } else if self.margin > 0.0 {
            0.0
        } else {
            -f64::MAX
        };
        match self.first {
            None => Verdict::passed(name, margin, details),
            Some((t, i, what)) => {
                Verdict::failed(name, t, Some(i), margin, format!("{what}; {details}"))
            }
        }
    }
}
