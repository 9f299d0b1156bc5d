//! Deterministic SVG plots built from report data: byte-identical output
//! for identical inputs, no timestamps, fixed float formatting.

use std::fmt::Write as _;

use crate::boxstats::BoxStats;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn coord(v: f64) -> String {
    format!("{v:.3}")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn pad(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Frame {
        let xr = (x_max - x_min).abs().max(1e-12);
        let yr = (y_max - y_min).abs().max(1e-12);
        Frame {
            x_min: x_min - 0.03 * xr,
            x_max: x_max + 0.03 * xr,
            y_min: y_min - 0.06 * yr,
            y_max: y_max + 0.06 * yr,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(title)
    );
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black" stroke-width="1"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let xpix = frame.x(xv);
        let ypix = frame.y(yv);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y0}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
            coord(xpix),
            coord(xpix),
            y0 + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            coord(xpix),
            y0 + 18.0,
            fmt(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{x0}" y2="{}" stroke="black" stroke-width="1"/>"#,
            x0 - 4.0,
            coord(ypix),
            coord(ypix)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 7.0,
            coord(ypix + 4.0),
            fmt(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        xml_escape(y_label)
    );
}

/// Multi-series line plot with a legend.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let mut s = open_svg(title);
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if finite.is_empty() {
        let frame = Frame::pad(0.0, 1.0, 0.0, 1.0);
        axes(&mut s, &frame, x_label, y_label);
        s.push_str("</svg>\n");
        return s;
    }
    let x_min = finite.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = finite.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_min = finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_max = finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame::pad(x_min, x_max, y_min, y_max);
    axes(&mut s, &frame, x_label, y_label);
    for (si, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in pts {
            if !x.is_finite() || !y.is_finite() {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            let _ = write!(path, "{}{} {} ", cmd, coord(frame.x(x)), coord(frame.y(y)));
            pen_down = true;
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
        let ly = MARGIN_TOP + 14.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
            WIDTH - 170.0,
            coord(ly),
            WIDTH - 150.0,
            coord(ly)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            WIDTH - 145.0,
            coord(ly + 4.0),
            xml_escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Labeled box plots on a common axis; a zero-height box renders as a line.
pub fn box_plot(title: &str, y_label: &str, items: &[(String, BoxStats)]) -> String {
    let mut s = open_svg(title);
    if items.is_empty() {
        let frame = Frame::pad(0.0, 1.0, 0.0, 1.0);
        axes(&mut s, &frame, "", y_label);
        s.push_str("</svg>\n");
        return s;
    }
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, b) in items {
        y_min = y_min.min(b.whisker_low).min(b.outliers.iter().copied().fold(f64::INFINITY, f64::min));
        y_max = y_max
            .max(b.whisker_high)
            .max(b.outliers.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    let frame = Frame::pad(0.0, items.len() as f64, y_min, y_max);
    axes(&mut s, &frame, "", y_label);
    // zero reference line
    if y_min < 0.0 && y_max > 0.0 {
        let zy = frame.y(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{}" x2="{}" y2="{}" stroke="#bbbbbb" stroke-width="1" stroke-dasharray="4 3"/>"##,
            coord(zy),
            WIDTH - MARGIN_RIGHT,
            coord(zy)
        );
    }
    let slot = 1.0;
    for (i, (label, b)) in items.iter().enumerate() {
        let cx = frame.x(i as f64 + 0.5 * slot);
        let half = 0.28 * (frame.x(slot) - frame.x(0.0));
        let (top, bot) = (frame.y(b.q75), frame.y(b.q25));
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#9ecae1" stroke="#1f77b4"/>"##,
            coord(cx - half),
            coord(top),
            coord(2.0 * half),
            coord((bot - top).max(0.8))
        );
        let my = frame.y(b.median);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="2"/>"##,
            coord(cx - half),
            coord(my),
            coord(cx + half),
            coord(my)
        );
        for (wv, edge) in [(b.whisker_high, b.q75), (b.whisker_low, b.q25)] {
            let wy = frame.y(wv);
            let ey = frame.y(edge);
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="1"/>"##,
                coord(cx),
                coord(ey),
                coord(cx),
                coord(wy)
            );
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="1"/>"##,
                coord(cx - 0.5 * half),
                coord(wy),
                coord(cx + 0.5 * half),
                coord(wy)
            );
        }
        for &o in &b.outliers {
            let oy = frame.y(o);
            let _ = writeln!(
                s,
                r##"<path d="M{} {}l4 4m0 -4l-4 4" stroke="#d62728" stroke-width="1"/>"##,
                coord(cx - 2.0),
                coord(oy - 2.0)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            coord(cx),
            HEIGHT - MARGIN_BOTTOM + 18.0,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Labeled vertical bars with optional error whiskers.
pub fn bar_chart(title: &str, y_label: &str, items: &[(String, f64, Option<f64>)]) -> String {
    let mut s = open_svg(title);
    if items.is_empty() {
        let frame = Frame::pad(0.0, 1.0, 0.0, 1.0);
        axes(&mut s, &frame, "", y_label);
        s.push_str("</svg>\n");
        return s;
    }
    let mut y_max = 0.0f64;
    let mut y_min = 0.0f64;
    for (_, v, e) in items {
        y_max = y_max.max(v + e.unwrap_or(0.0));
        y_min = y_min.min(v - e.unwrap_or(0.0));
    }
    let frame = Frame::pad(0.0, items.len() as f64, y_min, y_max);
    axes(&mut s, &frame, "", y_label);
    for (i, (label, v, err)) in items.iter().enumerate() {
        let cx = frame.x(i as f64 + 0.5);
        let half = 0.3 * (frame.x(1.0) - frame.x(0.0));
        let y_zero = frame.y(0.0);
        let yv = frame.y(*v);
        let (top, bottom) = if yv < y_zero { (yv, y_zero) } else { (y_zero, yv) };
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#9ecae1" stroke="#1f77b4"/>"##,
            coord(cx - half),
            coord(top),
            coord(2.0 * half),
            coord((bottom - top).max(0.5))
        );
        if let Some(e) = err {
            let (hi, lo) = (frame.y(v + e), frame.y(v - e));
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
                coord(cx),
                coord(hi),
                coord(cx),
                coord(lo)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            coord(cx),
            HEIGHT - MARGIN_BOTTOM + 18.0,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
