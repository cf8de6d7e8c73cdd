//! Trace persistence.
//!
//! One row per sample: `t,move,goal_x,goal_y`, then `man{k}_x,man{k}_y` per
//! recorded level and `lion{i}_x,lion{i}_y` per lion, numbers with 17
//! significant digits. Extended-precision runs add a sidecar with the same
//! header and every number as a lossless hex word.

use std::io::{self, BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::engine::{detect_capture, EngineError};
use crate::geometry::Point2;
use crate::io::config::{ConfigError, RunConfig};
use crate::params::{Cascade, StartConfiguration};
use crate::scalar::Scalar;
use crate::strategy::MoveKind;
use crate::trace::Trace;

#[derive(Debug, Error)]
pub enum TraceReadError {
    #[error("trace is empty")]
    Empty,
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {what}")]
    Row { row: usize, what: String },
    #[error("sidecar does not match the trace: {0}")]
    Sidecar(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Column names for the given layout.
pub fn header(recorded_levels: &[usize], lion_count: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "move", "goal_x", "goal_y"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for k in recorded_levels {
        cols.push(format!("man{k}_x"));
        cols.push(format!("man{k}_y"));
    }
    for i in 1..=lion_count {
        cols.push(format!("lion{i}_x"));
        cols.push(format!("lion{i}_y"));
    }
    cols
}

/// Recorded levels and lion count encoded in a header.
pub fn parse_header(cols: &[&str]) -> Result<(Vec<usize>, usize), TraceReadError> {
    let bad = |m: &str| TraceReadError::Header(m.to_string());
    if cols.len() < 4
        || cols[..4] != ["t", "move", "goal_x", "goal_y"]
        || !cols.len().is_multiple_of(2)
    {
        return Err(bad(
            "expected t,move,goal_x,goal_y followed by coordinate pairs",
        ));
    }
    let mut levels = Vec::new();
    let mut lions = 0usize;
    for pair in cols[4..].chunks(2) {
        let (x, y) = (pair[0], pair[1]);
        let index = |prefix: &str| -> Option<usize> {
            let k = x.strip_prefix(prefix)?.strip_suffix("_x")?.parse().ok()?;
            (y == format!("{prefix}{k}_y")).then_some(k)
        };
        if let Some(k) = index("man") {
            if lions > 0 || levels.last().is_some_and(|&l| l >= k) {
                return Err(bad("man columns must come first, in ascending level order"));
            }
            levels.push(k);
        } else if index("lion") == Some(lions + 1) {
            lions += 1;
        } else {
            return Err(TraceReadError::Header(format!(
                "unexpected columns {x},{y}"
            )));
        }
    }
    Ok((levels, lions))
}

struct Counting<W> {
    inner: W,
    bytes: u64,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n as u64;
        Ok(n)
    }
    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn write_rows<S: Scalar, W: Write>(
    trace: &Trace<S>,
    sink: W,
    mut value: impl FnMut(&mut Counting<io::BufWriter<W>>, S) -> io::Result<()>,
) -> io::Result<u64> {
    let mut out = Counting {
        inner: io::BufWriter::with_capacity(1 << 16, sink),
        bytes: 0,
    };
    writeln!(
        out,
        "{}",
        header(&trace.recorded_levels, trace.lion_count).join(",")
    )?;
    let levels = trace.recorded_levels.len();
    for s in 0..trace.len() {
        value(&mut out, trace.times[s])?;
        write!(out, ",{}", trace.kinds[s].code())?;
        let points = std::iter::once(&trace.goals[s])
            .chain(&trace.men[s * levels..(s + 1) * levels])
            .chain(&trace.lions[s * trace.lion_count..(s + 1) * trace.lion_count]);
        for p in points {
            out.write_all(b",")?;
            value(&mut out, p.x)?;
            out.write_all(b",")?;
            value(&mut out, p.y)?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(out.bytes)
}

/// Writes the decimal CSV and returns the number of bytes written.
pub fn write_trace_csv<S: Scalar, W: Write>(trace: &Trace<S>, sink: W) -> io::Result<u64> {
    write_rows(trace, sink, |out, v| write!(out, "{:.16e}", v.as_f64()))
}

/// Writes the lossless hex sidecar.
pub fn write_trace_hex<S: Scalar, W: Write>(trace: &Trace<S>, sink: W) -> io::Result<u64> {
    write_rows(trace, sink, |out, v| out.write_all(v.to_hex().as_bytes()))
}

/// Number of lines [`write_trace_csv`] produces.
pub fn csv_line_count<S: Scalar>(trace: &Trace<S>) -> usize {
    trace.len() + 1
}

fn parse_rows<S: Scalar, R: Read>(
    source: R,
    parse: impl Fn(&str) -> Option<S>,
) -> Result<Rows<S>, TraceReadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let cols: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let (levels, lions) = parse_header(&col_refs)?;
    let width = cols.len();
    let mut values = Vec::new();
    let mut kinds = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    while reader.read_record(&mut record)? {
        row += 1;
        if record.len() != width {
            return Err(TraceReadError::Row {
                row,
                what: format!("{} fields, expected {width}", record.len()),
            });
        }
        let kind = record[1]
            .chars()
            .next()
            .and_then(MoveKind::from_code)
            .filter(|_| record[1].len() == 1)
            .ok_or_else(|| TraceReadError::Row {
                row,
                what: format!("unknown move {:?}", &record[1]),
            })?;
        kinds.push(kind);
        for (i, field) in record.iter().enumerate() {
            if i == 1 {
                continue;
            }
            let v = parse(field).ok_or_else(|| TraceReadError::Row {
                row,
                what: format!("bad number {field:?}"),
            })?;
            values.push(v);
        }
    }
    Ok(Rows {
        levels,
        lions,
        values,
        kinds,
    })
}

/// Reads a trace written by [`write_trace_csv`], optionally taking exact
/// values from a hex sidecar. Cascade and start come from `config`.
pub fn read_trace<S: Scalar, R: Read, H: Read>(
    csv_source: R,
    hex_source: Option<H>,
    config: &RunConfig,
) -> Result<Trace<S>, TraceReadError> {
    let rows = read_rows::<S, _, _>(csv_source, hex_source)?;
    let game = config.game::<S>()?;
    if rows.lions != game.start.lion_starts.len() {
        return Err(TraceReadError::Header(format!(
            "{} lions in trace, {} in config",
            rows.lions,
            game.start.lion_starts.len()
        )));
    }
    if rows.levels.iter().any(|&k| k > config.level) {
        return Err(TraceReadError::Header(format!(
            "trace records a level above {}",
            config.level
        )));
    }
    let cascade = game.cascade()?;
    Ok(rows.into_trace(config.level, game.start, cascade, config.digest()))
}

/// Reads a trace without its configuration, for plotting.
///
/// Starts are taken from the first row; the cascade is left empty, so the
/// result is not fit for the checkers.
pub fn read_trace_bare<R: Read>(csv_source: R) -> Result<Trace<f64>, TraceReadError> {
    let rows = read_rows::<f64, _, R>(csv_source, None)?;
    let stride = rows.stride();
    let first = &rows.values[..stride];
    let man_slot = rows.levels.len().saturating_sub(1);
    let pt = |i: usize| Point2::new(first[i], first[i + 1]);
    let start = StartConfiguration {
        man_start: if rows.levels.is_empty() {
            pt(1)
        } else {
            pt(3 + 2 * man_slot)
        },
        lion_starts: (0..rows.lions)
            .map(|i| pt(3 + 2 * (rows.levels.len() + i)))
            .collect(),
        eps: 0.5,
    };
    let level = rows.levels.last().copied().unwrap_or(1);
    let cascade = Cascade {
        levels: Vec::new(),
        diagnostics: Vec::new(),
        delta_overridden: false,
    };
    Ok(rows.into_trace(level, start, cascade, String::new()))
}

struct Rows<S> {
    levels: Vec<usize>,
    lions: usize,
    values: Vec<S>,
    kinds: Vec<MoveKind>,
}

fn read_rows<S: Scalar, R: Read, H: Read>(
    csv_source: R,
    hex_source: Option<H>,
) -> Result<Rows<S>, TraceReadError> {
    let mut rows = parse_rows(csv_source, |f| f.trim().parse::<f64>().ok().map(S::of))?;
    if let Some(hex) = hex_source {
        let exact = parse_rows(hex, |f| S::from_hex(f))?;
        if exact.levels != rows.levels
            || exact.lions != rows.lions
            || exact.kinds != rows.kinds
            || exact.values.len() != rows.values.len()
        {
            return Err(TraceReadError::Sidecar(
                "layout or move labels differ".into(),
            ));
        }
        rows.values = exact.values;
    }
    if rows.kinds.is_empty() {
        return Err(TraceReadError::Empty);
    }
    Ok(rows)
}

impl<S: Scalar> Rows<S> {
    fn stride(&self) -> usize {
        3 + 2 * (self.levels.len() + self.lions)
    }

    fn into_trace(
        self,
        level: usize,
        start: StartConfiguration<S>,
        cascade: Cascade<S>,
        digest: String,
    ) -> Trace<S> {
        let stride = self.stride();
        let (levels, lions) = (self.levels, self.lions);
        let mut trace = Trace::empty(level, levels.clone(), start, cascade, digest);
        trace.lion_count = lions;
        trace.reserve(self.kinds.len());
        let mut men = Vec::with_capacity(levels.len());
        let mut lion_pts = Vec::with_capacity(lions);
        let deepest = levels.iter().position(|&k| k == level);
        let hunters = level.min(lions);
        for (s, row) in self.values.chunks_exact(stride).enumerate() {
            let pt = |i: usize| Point2::new(row[i], row[i + 1]);
            men.clear();
            lion_pts.clear();
            men.extend((0..levels.len()).map(|k| pt(3 + 2 * k)));
            lion_pts.extend((0..lions).map(|i| pt(3 + 2 * (levels.len() + i))));
            trace.push(row[0], self.kinds[s], pt(1), &men, &lion_pts);
            if let (None, Some(slot)) = (&trace.capture, deepest) {
                trace.capture = detect_capture(row[0], s, men[slot], &lion_pts[..hunters]);
            }
        }
        trace
    }
}

/// `[t, x, y]` samples of lion `lion` (1-based) from a trace CSV, for replay.
pub fn lion_column(text: &str, lion: usize) -> Result<Vec<[f64; 3]>, String> {
    let mut lines = BufReader::new(text.as_bytes()).lines();
    let head = lines
        .next()
        .ok_or("empty trace")?
        .map_err(|e| e.to_string())?;
    let cols: Vec<&str> = head.split(',').collect();
    let x = cols
        .iter()
        .position(|c| *c == format!("lion{lion}_x"))
        .ok_or_else(|| format!("trace has no column lion{lion}_x"))?;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let fields: Vec<&str> = line.split(',').collect();
        let num = |i: usize| -> Result<f64, String> {
            fields
                .get(i)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| format!("row {}: bad number in column {i}", row + 1))
        };
        let t = num(0)?;
        if out.last().is_some_and(|p: &[f64; 3]| p[0] >= t) {
            continue;
        }
        out.push([t, num(x)?, num(x + 1)?]);
    }
    Ok(out)
}
