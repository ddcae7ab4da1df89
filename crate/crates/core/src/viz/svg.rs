use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoxStats, CumulativePlotData, DetailPlotData, Pole};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvgStyle {
    pub color_a: String,
    pub color_b: String,
    /// Total width of the cumulative chart, in pixels.
    pub width: u32,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            color_a: "#2c7bb6".to_string(),
            color_b: "#d7191c".to_string(),
            width: 640,
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Pixel coordinate with two decimals and no negative zero.
fn px(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Axis label text: at most four significant decimals, trailing zeros trimmed.
fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Smallest value of the form {1, 2, 2.5, 5} × 10^k that is ≥ `x`.
fn nice_ceiling(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return 1.0;
    }
    let base = 10f64.powf(x.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * base >= x * (1.0 - 1e-12) {
            return m * base;
        }
    }
    10.0 * base
}

/// Linear map from data values to pixels.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
}

impl Scale {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.lo) / (self.hi - self.lo) * (self.right - self.left)
    }
}

fn svg_open(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = px(width),
        h = px(height)
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        px(width),
        px(height)
    );
}

fn legend(out: &mut String, x: f64, y: f64, label_a: &str, label_b: &str, style: &SvgStyle) {
    let _ = writeln!(
        out,
        r#"<g class="legend"><rect x="{}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text><rect x="{}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text></g>"#,
        px(x),
        px(y - 10.0),
        escape(&style.color_a),
        px(x + 16.0),
        px(y),
        escape(label_a),
        px(x + 120.0),
        px(y - 10.0),
        escape(&style.color_b),
        px(x + 136.0),
        px(y),
        escape(label_b),
    );
}

fn axis(out: &mut String, scale: &Scale, y: f64, ticks: &[f64]) {
    let _ = writeln!(
        out,
        r#"<g class="axis" data-lo="{}" data-hi="{}" data-left="{}" data-right="{}">"#,
        scale.lo,
        scale.hi,
        px(scale.left),
        px(scale.right)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(scale.left),
        px(y),
        px(scale.right),
        px(y)
    );
    for &t in ticks {
        let x = scale.x(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            px(y),
            px(y + 5.0),
            px(y + 18.0),
            tick_label(t),
            x = px(x)
        );
    }
    let _ = writeln!(out, "</g>");
}

const CUM_LEFT: f64 = 110.0;
const CUM_RIGHT_PAD: f64 = 30.0;
const CUM_TOP: f64 = 60.0;
const CUM_ROW: f64 = 50.0;
const CUM_BAR: f64 = 26.0;

/// Two centered stacked bars: pole A extends right of zero by `beta_a`,
/// pole B extends left by `beta_b`, and a black dot marks the cumulate.
/// The horizontal extent adapts to the data and is printed on the axis.
pub fn cumulative_svg(data: &CumulativePlotData, style: &SvgStyle) -> String {
    let width = f64::from(style.width.max(200));
    let height = CUM_TOP + CUM_ROW * data.bars.len() as f64 + 50.0;
    let extent = nice_ceiling(
        data.bars
            .iter()
            .flat_map(|b| [b.beta_a.abs(), b.beta_b.abs(), b.cumulate.abs()])
            .fold(0.0, f64::max),
    );
    let scale = Scale {
        lo: -extent,
        hi: extent,
        left: CUM_LEFT,
        right: width - CUM_RIGHT_PAD,
    };
    let zero = scale.x(0.0);

    let mut out = String::new();
    svg_open(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<text class="title" x="{}" y="20" font-size="14" font-weight="bold">{}</text>"#,
        px(CUM_LEFT),
        escape(&data.topic_label)
    );
    legend(
        &mut out,
        CUM_LEFT,
        42.0,
        &data.label_a,
        &data.label_b,
        style,
    );

    for (i, bar) in data.bars.iter().enumerate() {
        let y = CUM_TOP + CUM_ROW * i as f64;
        let cy = y + CUM_BAR / 2.0;
        let _ = writeln!(
            out,
            r#"<g class="bar" data-label="{}">"#,
            escape(&bar.label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            px(CUM_LEFT - 10.0),
            px(cy),
            escape(&bar.label)
        );
        for (id, value, end, color) in [
            ("a", bar.beta_a, scale.x(bar.beta_a), &style.color_a),
            ("b", bar.beta_b, scale.x(-bar.beta_b), &style.color_b),
        ] {
            let (x0, x1) = if end < zero { (end, zero) } else { (zero, end) };
            let _ = writeln!(
                out,
                r#"<rect id="bar-{id}-{i}" x="{}" y="{}" width="{}" height="{}" fill="{}" fill-opacity="0.85" data-value="{value}"/>"#,
                px(x0),
                px(y),
                px(x1 - x0),
                px(CUM_BAR),
                escape(color)
            );
        }
        let _ = writeln!(
            out,
            r#"<circle id="dot-{i}" cx="{}" cy="{}" r="5" fill="black" data-value="{}"/>"#,
            px(scale.x(bar.cumulate)),
            px(cy),
            bar.cumulate
        );
        let _ = writeln!(out, "</g>");
    }

    let axis_y = CUM_TOP + CUM_ROW * data.bars.len() as f64;
    let _ = writeln!(
        out,
        r#"<line x1="{z}" y1="{}" x2="{z}" y2="{}" stroke="gray" stroke-dasharray="3,3"/>"#,
        px(CUM_TOP - 6.0),
        px(axis_y),
        z = px(zero)
    );
    axis(
        &mut out,
        &scale,
        axis_y,
        &[-extent, -extent / 2.0, 0.0, extent / 2.0, extent],
    );
    let _ = writeln!(
        out,
        r#"<text class="scale" x="{}" y="{}" text-anchor="end">scale ±{}</text>"#,
        px(width - CUM_RIGHT_PAD),
        px(axis_y + 36.0),
        tick_label(extent)
    );
    out.push_str("</svg>\n");
    out
}

const DET_LABELS: f64 = 100.0;
const DET_CANVAS: f64 = 320.0;
const DET_GAP: f64 = 30.0;
const DET_TOP: f64 = 80.0;
const DET_ROW: f64 = 44.0;
const DET_BOX: f64 = 12.0;

fn boxplot(out: &mut String, scale: &Scale, values: &[f64], y: f64, color: &str, class: &str) {
    let b = BoxStats::new(values);
    let cy = y + DET_BOX / 2.0;
    let c = escape(color);
    let _ = writeln!(
        out,
        r#"<g class="{class}" data-min="{}" data-q1="{}" data-mean="{}" data-q3="{}" data-max="{}">"#,
        b.min, b.q1, b.mean, b.q3, b.max
    );
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{cy}" x2="{}" y2="{cy}" stroke="{c}"/><line x1="{}" y1="{cy}" x2="{}" y2="{cy}" stroke="{c}"/>"#,
        px(scale.x(b.min)),
        px(scale.x(b.q1)),
        px(scale.x(b.q3)),
        px(scale.x(b.max)),
        cy = px(cy)
    );
    for v in [b.min, b.max] {
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{c}"/>"#,
            px(y + 2.0),
            px(y + DET_BOX - 2.0),
            x = px(scale.x(v))
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{c}" fill-opacity="0.35" stroke="{c}"/>"#,
        px(scale.x(b.q1)),
        px(y),
        px(scale.x(b.q3) - scale.x(b.q1)),
        px(DET_BOX)
    );
    let _ = writeln!(
        out,
        r#"<line class="belt" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{c}" stroke-width="2.5"/>"#,
        px(y),
        px(y + DET_BOX),
        x = px(scale.x(b.mean))
    );
    let _ = writeln!(out, "</g>");
}

/// Side-by-side canvasses, one per space, with an A/B boxplot pair per topic
/// word (whiskers at min/max, box at the quartiles, belt at the mean) and an
/// arrow from the A mean to the B mean colored by the dominant pole.
pub fn detail_svg(data: &DetailPlotData, style: &SvgStyle) -> String {
    let n_spaces = data.space_labels.len();
    let width = DET_LABELS + n_spaces as f64 * (DET_CANVAS + DET_GAP);
    let height = DET_TOP + DET_ROW * data.rows.len() as f64 + 40.0;

    let all = data
        .rows
        .iter()
        .flat_map(|r| r.spaces.iter())
        .flat_map(|d| d.delta_a.iter().chain(&d.delta_b));
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let pad = if hi > lo { (hi - lo) * 0.05 } else { 0.1 };
    let (lo, hi) = (lo - pad, hi + pad);

    let mut out = String::new();
    svg_open(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<defs><marker id="arrow-a" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="{}"/></marker><marker id="arrow-b" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="{}"/></marker></defs>"#,
        escape(&style.color_a),
        escape(&style.color_b)
    );
    let _ = writeln!(
        out,
        r#"<text class="title" x="{}" y="20" font-size="14" font-weight="bold">{}</text>"#,
        px(DET_LABELS),
        escape(&data.topic_label)
    );
    legend(
        &mut out,
        DET_LABELS,
        42.0,
        &data.label_a,
        &data.label_b,
        style,
    );

    for (i, row) in data.rows.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text class="word" x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            px(DET_LABELS - 8.0),
            px(DET_TOP + DET_ROW * i as f64 + DET_BOX + 2.0),
            escape(&row.word)
        );
    }

    for (k, label) in data.space_labels.iter().enumerate() {
        let left = DET_LABELS + k as f64 * (DET_CANVAS + DET_GAP);
        let scale = Scale {
            lo,
            hi,
            left,
            right: left + DET_CANVAS,
        };
        let _ = writeln!(out, r#"<g class="canvas" data-label="{}">"#, escape(label));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="66" text-anchor="middle" font-weight="bold">{}</text>"#,
            px(left + DET_CANVAS / 2.0),
            escape(label)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#cccccc"/>"##,
            px(left),
            px(DET_TOP - 8.0),
            px(DET_CANVAS),
            px(DET_ROW * data.rows.len() as f64 + 4.0)
        );
        if lo < 0.0 && hi > 0.0 {
            let _ = writeln!(
                out,
                r#"<line x1="{z}" y1="{}" x2="{z}" y2="{}" stroke="gray" stroke-dasharray="3,3"/>"#,
                px(DET_TOP - 8.0),
                px(DET_TOP + DET_ROW * data.rows.len() as f64 - 4.0),
                z = px(scale.x(0.0))
            );
        }
        for (i, row) in data.rows.iter().enumerate() {
            let dist = &row.spaces[k];
            let y = DET_TOP + DET_ROW * i as f64;
            let _ = writeln!(out, r#"<g class="pair" data-word="{}">"#, escape(&row.word));
            boxplot(&mut out, &scale, &dist.delta_a, y, &style.color_a, "box-a");
            boxplot(
                &mut out,
                &scale,
                &dist.delta_b,
                y + DET_BOX + 4.0,
                &style.color_b,
                "box-b",
            );
            let (marker, color) = match dist.dominant_pole {
                Pole::A => ("arrow-a", &style.color_a),
                Pole::B => ("arrow-b", &style.color_b),
            };
            let _ = writeln!(
                out,
                r#"<line class="arrow" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="1.5" marker-end="url(#{marker})"/>"#,
                px(scale.x(dist.mean_a)),
                px(y + DET_BOX / 2.0),
                px(scale.x(dist.mean_b)),
                px(y + DET_BOX + 4.0 + DET_BOX / 2.0),
                escape(color)
            );
            let _ = writeln!(out, "</g>");
        }
        let axis_y = DET_TOP + DET_ROW * data.rows.len() as f64;
        let mid = (lo + hi) / 2.0;
        axis(&mut out, &scale, axis_y, &[lo, mid, hi]);
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn render_cumulative(
    data: &CumulativePlotData,
    path: impl AsRef<Path>,
    style: &SvgStyle,
) -> Result<()> {
    write_file(path.as_ref(), &cumulative_svg(data, style))
}

pub fn render_detail(
    data: &DetailPlotData,
    path: impl AsRef<Path>,
    style: &SvgStyle,
) -> Result<()> {
    write_file(path.as_ref(), &detail_svg(data, style))
}
