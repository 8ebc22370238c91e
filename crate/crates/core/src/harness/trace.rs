use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::map_model::StopId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub target_speed: f64,
    pub lateral_error: f64,
    pub heading_error: f64,
    pub curvature_cmd: f64,
    pub applied_curvature: f64,
    /// Stop being held this cycle.
    pub stop_state: Option<StopId>,
    pub emergency: bool,
}

pub const CSV_HEADER: [&str; 12] = [
    "time",
    "x",
    "y",
    "heading",
    "speed",
    "target_speed",
    "lateral_error",
    "heading_error",
    "curvature_cmd",
    "applied_curvature",
    "stop_state",
    "emergency",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Svg,
}

impl TraceRecord {
    fn numeric(&self) -> [f64; 10] {
        [
            self.time,
            self.x,
            self.y,
            self.heading,
            self.speed,
            self.target_speed,
            self.lateral_error,
            self.heading_error,
            self.curvature_cmd,
            self.applied_curvature,
        ]
    }
}

/// Writes `trace` as CSV: header, then one row per record with floats at
/// nine decimals, an empty `stop_state` when not holding, and
/// `emergency` as `true`/`false`.
pub fn write_csv<W: Write>(trace: &[TraceRecord], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in trace {
        let mut row: Vec<String> = r.numeric().iter().map(|v| format!("{v:.9}")).collect();
        row.push(
            r.stop_state
                .as_ref()
                .map_or(String::new(), |s| s.to_string()),
        );
        row.push(r.emergency.to_string());
        w.write_record(&row)?;
    }
    w.flush()
}

/// Parses CSV produced by [`write_csv`].
pub fn parse_trace_csv<R: Read>(input: R) -> io::Result<Vec<TraceRecord>> {
    let invalid = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(invalid(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let mut v = [0.0; 10];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = record[k]
                .parse()
                .map_err(|e| invalid(format!("line {line}, column {}: {e}", CSV_HEADER[k])))?;
        }
        let emergency = record[11]
            .parse()
            .map_err(|e| invalid(format!("line {line}, column emergency: {e}")))?;
        out.push(TraceRecord {
            time: v[0],
            x: v[1],
            y: v[2],
            heading: v[3],
            speed: v[4],
            target_speed: v[5],
            lateral_error: v[6],
            heading_error: v[7],
            curvature_cmd: v[8],
            applied_curvature: v[9],
            stop_state: (!record[10].is_empty()).then(|| StopId::new(&record[10])),
            emergency,
        });
    }
    Ok(out)
}

const SVG_WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 160.0;
const PATH_PANEL_HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

struct Panel {
    title: &'static str,
    height: f64,
    points: Vec<(f64, f64)>,
    equal_aspect: bool,
}

/// Renders an x-y path plot followed by speed, lateral error, heading error
/// and curvature against time. Each panel holds exactly one polyline.
pub fn render_svg(trace: &[TraceRecord]) -> String {
    let series = |title, f: fn(&TraceRecord) -> f64| Panel {
        title,
        height: PANEL_HEIGHT,
        points: trace.iter().map(|r| (r.time, f(r))).collect(),
        equal_aspect: false,
    };
    let panels = [
        Panel {
            title: "path (x, y) [m]",
            height: PATH_PANEL_HEIGHT,
            points: trace.iter().map(|r| (r.x, r.y)).collect(),
            equal_aspect: true,
        },
        series("speed [m/s]", |r| r.speed),
        series("lateral error [m]", |r| r.lateral_error),
        series("heading error [rad]", |r| r.heading_error),
        series("curvature [1/m]", |r| r.applied_curvature),
    ];

    let total: f64 = panels.iter().map(|p| p.height + MARGIN).sum::<f64>() + MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{total}" viewBox="0 0 {SVG_WIDTH} {total}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let mut top = MARGIN;
    for panel in &panels {
        render_panel(&mut svg, panel, top);
        top += panel.height + MARGIN;
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64) {
    let left = MARGIN;
    let width = SVG_WIDTH - 2.0 * MARGIN;
    let height = panel.height;

    let bounds = |sel: fn(&(f64, f64)) -> f64| {
        let (lo, hi) = panel
            .points
            .iter()
            .map(sel)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if lo.is_finite() && hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 1.0, lo + 1.0)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let (mut sx, mut sy) = (width / (x1 - x0), height / (y1 - y0));
    if panel.equal_aspect {
        let s = sx.min(sy);
        sx = s;
        sy = s;
    }

    let _ = writeln!(svg, r#"<g class="panel">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{width}" height="{height}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{left}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
        top - 6.0,
        escape(panel.title)
    );
    let coords: Vec<String> = panel
        .points
        .iter()
        .map(|&(x, y)| {
            format!(
                "{:.2},{:.2}",
                left + (x - x0) * sx,
                top + height - (y - y0) * sy
            )
        })
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points="{}"/>"#,
        coords.join(" ")
    );
    let _ = writeln!(svg, "</g>");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn emit_trace(trace: &[TraceRecord], path: &Path, format: TraceFormat) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        TraceFormat::Csv => write_csv(trace, &mut out)?,
        TraceFormat::Svg => out.write_all(render_svg(trace).as_bytes())?,
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<TraceRecord> {
        (0..4)
            .map(|i| {
                let t = i as f64 * 0.02;
                TraceRecord {
                    time: t,
                    x: 1.0 + t * 1.234_567_891,
                    y: -0.5 * t,
                    heading: 0.1 * t,
                    speed: 1.5,
                    target_speed: 2.0,
                    lateral_error: -1e-4 * i as f64,
                    heading_error: 3e-3,
                    curvature_cmd: 0.123_456_789_123,
                    applied_curvature: 0.12,
                    stop_state: (i == 2).then(|| "stop 1".into()),
                    emergency: i == 3,
                }
            })
            .collect()
    }

    #[test]
    fn empty_trace_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn csv_round_trip() {
        let trace = sample();
        let mut buf = Vec::new();
        write_csv(&trace, &mut buf).unwrap();
        let back = parse_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), trace.len());
        for (a, b) in trace.iter().zip(&back) {
            for (u, v) in a.numeric().iter().zip(b.numeric()) {
                assert!((u - v).abs() <= 1e-9, "{u} vs {v}");
            }
            assert_eq!(a.stop_state, b.stop_state);
            assert_eq!(a.emergency, b.emergency);
        }
    }

    #[test]
    fn svg_has_five_panels() {
        let svg = render_svg(&sample());
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert_eq!(svg.matches("class=\"panel\"").count(), 5);
        let empty = render_svg(&[]);
        assert_eq!(empty.matches("<polyline").count(), 5);
    }
}
