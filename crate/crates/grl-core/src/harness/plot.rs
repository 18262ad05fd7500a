//! Self-contained SVG renderer for objective-vs-iteration curves: one mean
//! line per algorithm with a 95% confidence band when several seeds ran.

use crate::harness::records::{summarize, RunRecord, SummaryRow};
use std::collections::BTreeMap;
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 168.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Series {
    label: String,
    points: Vec<(f64, f64, f64)>, // (iteration, mean, half-width of the CI band)
}

/// Render `records` as an SVG document string. The curves come from the same
/// summary statistics written next to the CSV, so plot and summary agree.
pub fn emit_plot(records: &[RunRecord], title: &str) -> String {
    render(&summarize(records), title)
}

pub fn render(summary: &[SummaryRow], title: &str) -> String {
    let mut grouped: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for row in summary {
        grouped.entry(row.algorithm.as_str()).or_default().push(row);
    }
    let series: Vec<Series> = grouped
        .into_iter()
        .map(|(label, rows)| Series {
            label: label.to_string(),
            points: rows
                .iter()
                .map(|row| {
                    let band = if row.runs > 1 {
                        1.96 * row.std_objective / (row.runs as f64).sqrt()
                    } else {
                        0.0
                    };
                    (row.iteration as f64, row.mean_objective, band)
                })
                .collect(),
        })
        .collect();

    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &(_, mean, band) in &s.points {
            y_min = y_min.min(mean - band);
            y_max = y_max.max(mean + band);
        }
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        let pad = y_max.abs().max(1.0) * 0.1;
        y_min -= pad;
        y_max += pad;
    } else {
        let pad = (y_max - y_min) * 0.05;
        y_min -= pad;
        y_max += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |it: f64| MARGIN_LEFT + it / x_max * plot_w;
    let y_px = |v: f64| MARGIN_TOP + plot_h - (v - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );

    // Axes with ticks.
    let _ = writeln!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    );
    let ticks = 5usize;
    for i in 0..=ticks {
        let frac = i as f64 / ticks as f64;
        let xv = frac * x_max;
        let xp = x_px(xv);
        let _ = writeln!(
            svg,
            "  <line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{xp}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            MARGIN_TOP + plot_h + 18.0,
            fmt_tick(xv)
        );
        let yv = y_min + frac * (y_max - y_min);
        let yp = y_px(yv);
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{yp}\" x2=\"{}\" y2=\"{yp}\" stroke=\"black\"/>",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            MARGIN_LEFT - 8.0,
            yp + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">iteration</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">objective</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if s.points.iter().any(|p| p.2 > 0.0) {
            let mut band = String::new();
            for &(it, mean, half) in &s.points {
                let _ = write!(band, "{:.2},{:.2} ", x_px(it), y_px(mean + half));
            }
            for &(it, mean, half) in s.points.iter().rev() {
                let _ = write!(band, "{:.2},{:.2} ", x_px(it), y_px(mean - half));
            }
            let _ = writeln!(
                svg,
                "  <polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>",
                band.trim_end()
            );
        }
        let mut line = String::new();
        for &(it, mean, _) in &s.points {
            let _ = write!(line, "{:.2},{:.2} ", x_px(it), y_px(mean));
        }
        let _ = writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            line.trim_end()
        );
        // Legend entry.
        let ly = MARGIN_TOP + 10.0 + idx as f64 * 20.0;
        let lx = WIDTH - MARGIN_RIGHT + 16.0;
        let _ = writeln!(
            svg,
            "  <line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>",
            lx + 22.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let formatted = if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    };
    let trimmed = formatted.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}
