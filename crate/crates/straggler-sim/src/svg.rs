//! Gantt-style SVG rendering of run traces.
//!
//! One row per worker. Completed tasks are solid rectangles labeled with the
//! task index; preempted and lost copies get a jagged right edge and a
//! struck-through label. Tasks in the same group share a fill color, the
//! blank space to the left of a group's first task is its assignment
//! overhead, and thick black bars mark spans where a worker was away.

use crate::trace::{Outcome, TaskTrace};
use std::fmt::Write as _;
use std::path::Path;

/// Output geometry. Width is the drawing width in pixels; row height scales
/// every worker lane.
#[derive(Debug, Clone, Copy)]
pub struct SvgOptions {
    pub width: u32,
    pub row_height: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 1000, row_height: 34 }
    }
}

const LEFT_MARGIN: f64 = 70.0;
const TOP_MARGIN: f64 = 24.0;
const BOTTOM_MARGIN: f64 = 30.0;
const RIGHT_PAD: f64 = 12.0;
const BAR_FRACTION: f64 = 0.72;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

fn group_color(group_id: usize) -> &'static str {
    PALETTE[group_id % PALETTE.len()]
}

/// Renders the trace to an SVG string.
pub fn render_trace(trace: &TaskTrace, options: &SvgOptions) -> String {
    let horizon = trace
        .records
        .iter()
        .map(|r| r.end)
        .chain(trace.groups.iter().map(|g| g.issued_at + g.overhead))
        .chain(trace.unavailable.iter().map(|s| s.end))
        .fold(0.0_f64, f64::max)
        .max(1e-9);
    let span_px = options.width as f64 - LEFT_MARGIN - RIGHT_PAD;
    let scale = span_px / horizon;
    let row_h = options.row_height as f64;
    let bar_h = row_h * BAR_FRACTION;
    let height = TOP_MARGIN + trace.num_workers as f64 * row_h + BOTTOM_MARGIN;
    let x_of = |t: f64| LEFT_MARGIN + t * scale;
    let row_top = |w: usize| TOP_MARGIN + w as f64 * row_h + (row_h - bar_h) / 2.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{:.0}" font-family="sans-serif" font-size="11">"##,
        options.width, height
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);

    // Time axis with ticks at a round interval.
    let tick = nice_tick(horizon);
    let axis_y = TOP_MARGIN + trace.num_workers as f64 * row_h + 6.0;
    let _ = writeln!(
        svg,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333" stroke-width="1"/>"##,
        x_of(0.0),
        axis_y,
        x_of(horizon),
        axis_y
    );
    let mut t = 0.0;
    while t <= horizon * (1.0 + 1e-12) {
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{y1:.1}" stroke="#333" stroke-width="1"/>"##,
            x = x_of(t),
            y0 = axis_y,
            y1 = axis_y + 4.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="#333">{}</text>"##,
            x_of(t),
            axis_y + 16.0,
            format_tick(t)
        );
        t += tick;
    }

    // Worker labels and faint lane separators.
    for w in 0..trace.num_workers {
        let y = TOP_MARGIN + w as f64 * row_h;
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end" fill="#333">worker {}</text>"##,
            LEFT_MARGIN - 8.0,
            y + row_h / 2.0 + 4.0,
            w
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#eee" stroke-width="1"/>"##,
            x_of(0.0),
            y + row_h,
            x_of(horizon),
            y + row_h
        );
    }

    // Unavailability bars.
    for span in &trace.unavailable {
        let y = TOP_MARGIN + span.worker as f64 * row_h + row_h / 2.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-width="5" class="unavailable"/>"##,
            x_of(span.start),
            x_of(span.end),
        );
    }

    // Task intervals. Zero-duration records (skips) are not drawn.
    for r in &trace.records {
        if r.end <= r.start {
            continue;
        }
        let x0 = x_of(r.start);
        let x1 = x_of(r.end);
        let y = row_top(r.worker);
        let fill = group_color(r.group_id);
        match r.outcome {
            Outcome::Completed => {
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x0:.1}" y="{y:.1}" width="{w:.1}" height="{h:.1}" fill="{fill}" stroke="#333" stroke-width="0.6" class="task completed"/>"##,
                    w = x1 - x0,
                    h = bar_h,
                );
                label(&mut svg, (x0 + x1) / 2.0, y + bar_h / 2.0, r.task, false);
            }
            Outcome::Preempted | Outcome::Lost => {
                let class = if r.outcome == Outcome::Preempted { "task preempted" } else { "task lost" };
                let _ = writeln!(
                    svg,
                    r##"<polygon points="{}" fill="{fill}" fill-opacity="0.75" stroke="#333" stroke-width="0.6" class="{class}"/>"##,
                    jagged_points(x0, x1, y, bar_h),
                );
                label(&mut svg, (x0 + x1) / 2.0, y + bar_h / 2.0, r.task, true);
            }
            Outcome::Skipped => {}
        }
    }

    svg.push_str("</svg>\n");
    svg
}

/// Writes the rendered trace to a file.
pub fn export_svg(trace: &TaskTrace, options: &SvgOptions, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_trace(trace, options))
}

/// Right-edge zigzag marking work that was cut off.
fn jagged_points(x0: f64, x1: f64, y: f64, h: f64) -> String {
    let teeth = 4;
    let depth = ((x1 - x0) * 0.25).min(5.0);
    let mut pts = vec![(x0, y), (x1, y)];
    let step = h / (teeth * 2) as f64;
    let mut yy = y;
    for _ in 0..teeth {
        pts.push((x1 - depth, yy + step));
        yy += 2.0 * step;
        pts.push((x1, yy));
    }
    pts.push((x0, y + h));
    pts.iter()
        .map(|(x, y)| format!("{x:.1},{y:.1}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn label(svg: &mut String, cx: f64, cy: f64, task: usize, strike: bool) {
    let _ = writeln!(
        svg,
        r##"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" fill="white">{task}</text>"##,
        cy + 3.5,
    );
    if strike {
        let text_w = 4.0 + 6.0 * task.to_string().len() as f64;
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{cy:.1}" x2="{:.1}" y2="{cy:.1}" stroke="white" stroke-width="1.2"/>"##,
            cx - text_w / 2.0,
            cx + text_w / 2.0,
        );
    }
}

fn nice_tick(horizon: f64) -> f64 {
    let raw = horizon / 10.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    step * mag
}

fn format_tick(t: f64) -> String {
    if t.fract().abs() < 1e-9 {
        format!("{}", t.round() as i64)
    } else {
        format!("{t:.1}")
    }
}
