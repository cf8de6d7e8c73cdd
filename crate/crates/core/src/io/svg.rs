//! Trajectory overlays as standalone SVG.

use std::fmt::Write;

use crate::geometry::Point2;
use crate::scalar::Scalar;
use crate::strategy::MoveKind;
use crate::trace::Trace;

/// Cap on vertices per drawn series; move-kind boundaries are always kept.
pub const MAX_VERTICES: usize = 20_000;

#[derive(Clone, Debug)]
pub struct SvgOptions {
    pub width_px: u32,
    pub show_goals: bool,
    /// Man levels to draw; `None` draws every recorded level.
    pub level_filter: Option<Vec<usize>>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width_px: 900,
            show_goals: false,
            level_filter: None,
        }
    }
}

const STYLE: &str = "\
polyline{fill:none;stroke-width:1.5;vector-effect:non-scaling-stroke;stroke-linejoin:round}
.man{stroke:#555}
.man.level1{stroke:#9aa7b8}
.man.level2{stroke:#4d6a8f}
.man.level3{stroke:#1b2f4a}
.lion{stroke:#c0392b;stroke-dasharray:4 3}
.move-free{stroke:#2e86de;stroke-width:2}
.move-escape{stroke:#27ae60;stroke-width:2}
.move-avoidance{stroke:#e67e22;stroke-width:2.5}
.goal{fill:#8e44ad}
.start-man{fill:#1b2f4a}
.start-lion{fill:#c0392b}
";

fn kind_class(kind: MoveKind) -> &'static str {
    match kind {
        MoveKind::Free => "move-free",
        MoveKind::Escape => "move-escape",
        MoveKind::Avoidance => "move-avoidance",
    }
}

/// Indices into `0..len` keeping both ends and at most about `cap` points.
fn decimate(len: usize, cap: usize) -> Vec<usize> {
    if len <= cap {
        return (0..len).collect();
    }
    let stride = len.div_ceil(cap);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl Frame {
    fn fmt(&self, p: [f64; 2], out: &mut String) {
        let x = (p[0] - self.min_x) * self.scale;
        let y = (self.max_y - p[1]) * self.scale;
        let _ = write!(out, "{x:.3},{y:.3}");
    }
}

fn polyline(out: &mut String, frame: &Frame, class: &str, points: impl Iterator<Item = [f64; 2]>) {
    let mut coords = String::new();
    for p in points {
        if !coords.is_empty() {
            coords.push(' ');
        }
        frame.fmt(p, &mut coords);
    }
    let _ = writeln!(out, r#"<polyline class="{class}" points="{coords}"/>"#);
}

fn marker(out: &mut String, frame: &Frame, class: &str, p: [f64; 2], r: f64) {
    let mut c = String::new();
    frame.fmt(p, &mut c);
    let (x, y) = c.split_once(',').expect("formatted pair");
    let _ = writeln!(
        out,
        r#"<circle class="{class}" cx="{x}" cy="{y}" r="{r:.2}"/>"#
    );
}

fn xy<S: Scalar>(p: Point2<S>) -> [f64; 2] {
    [p.x.as_f64(), p.y.as_f64()]
}

/// Renders the man paths, lion paths and move kinds of `trace`.
pub fn render_svg<S: Scalar>(trace: &Trace<S>, options: &SvgOptions) -> String {
    let len = trace.len();
    let slots: Vec<(usize, usize)> = trace
        .recorded_levels
        .iter()
        .enumerate()
        .filter(|(_, k)| options.level_filter.as_ref().is_none_or(|f| f.contains(k)))
        .map(|(slot, &k)| (slot, k))
        .collect();

    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    let mut grow = |p: [f64; 2]| {
        for a in 0..2 {
            min[a] = min[a].min(p[a]);
            max[a] = max[a].max(p[a]);
        }
    };
    grow(xy(trace.start.man_start));
    trace.start.lion_starts.iter().for_each(|l| grow(xy(*l)));
    for s in 0..len {
        slots
            .iter()
            .for_each(|&(slot, _)| grow(xy(trace.man_at(slot, s))));
        (0..trace.lion_count).for_each(|i| grow(xy(trace.lion_at(i, s))));
        if options.show_goals {
            grow(xy(trace.goals[s]));
        }
    }
    let extent = (max[0] - min[0]).max(max[1] - min[1]);
    let extent = if extent > 0.0 { extent } else { 1.0 };
    let margin = 0.05 * extent;
    let (w, h) = (
        max[0] - min[0] + 2.0 * margin,
        max[1] - min[1] + 2.0 * margin,
    );
    let width = f64::from(options.width_px.max(1));
    let frame = Frame {
        min_x: min[0] - margin,
        max_y: max[1] + margin,
        scale: width / w,
    };
    let height = h * frame.scale;

    let mut out = String::with_capacity(1 << 16);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, "<style>\n{STYLE}</style>");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if len > 1 {
        let idx = decimate(len, MAX_VERTICES);
        for &(slot, k) in &slots {
            polyline(
                &mut out,
                &frame,
                &format!("man level{k}"),
                idx.iter().map(|&s| xy(trace.man_at(slot, s))),
            );
        }
        for i in 0..trace.lion_count {
            polyline(
                &mut out,
                &frame,
                &format!("lion lion{}", i + 1),
                idx.iter().map(|&s| xy(trace.lion_at(i, s))),
            );
        }
        if let Some(&(slot, _)) = slots.iter().find(|&&(_, k)| k == trace.level) {
            // The kind at sample s labels the segment leading to sample s + 1.
            let mut runs: Vec<(MoveKind, usize, usize)> = Vec::new();
            for s in 0..len - 1 {
                match runs.last_mut() {
                    Some((kind, _, end)) if *kind == trace.kinds[s] => *end = s + 1,
                    _ => runs.push((trace.kinds[s], s, s + 1)),
                }
            }
            let per_run = (MAX_VERTICES / runs.len().max(1)).max(2);
            for (kind, a, b) in runs {
                let pts = decimate(b - a + 1, per_run);
                polyline(
                    &mut out,
                    &frame,
                    kind_class(kind),
                    pts.iter().map(|&j| xy(trace.man_at(slot, a + j))),
                );
            }
        }
    }

    if options.show_goals {
        let mut goals: Vec<Point2<S>> = Vec::new();
        for &g in &trace.goals {
            if goals.last() != Some(&g) {
                goals.push(g);
            }
        }
        for j in decimate(goals.len(), MAX_VERTICES / 4) {
            marker(&mut out, &frame, "goal", xy(goals[j]), 2.0);
        }
    }
    marker(
        &mut out,
        &frame,
        "start-man",
        xy(trace.start.man_start),
        4.0,
    );
    for l in &trace.start.lion_starts {
        marker(&mut out, &frame, "start-lion", xy(*l), 4.0);
    }
    out.push_str("</svg>\n");
    out
}
