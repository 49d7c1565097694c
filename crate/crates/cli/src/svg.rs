//! Minimal deterministic SVG charts; the numbers behind every figure are
//! always emitted as CSV alongside.

use std::fmt::Write as _;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 55.0;

fn scale(points: &[f64]) -> (f64, f64) {
    let min = points
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let max = points
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(min + 1e-9);
    (min, max)
}

/// Multi-series line chart.
pub fn line_chart(title: &str, series: &[(&str, &[f64])]) -> String {
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let all: Vec<f64> = series.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let (min, max) = scale(&all);
    let len = series
        .iter()
        .map(|(_, s)| s.len())
        .max()
        .unwrap_or(1)
        .max(2);

    let x = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (len - 1) as f64;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - min) / (max - min);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        title
    );
    let _ = write!(
        svg,
        "<line x1=\"{MARGIN}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN,
        HEIGHT - MARGIN
    );
    let _ = write!(
        svg,
        "<text x=\"10\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{:.1}</text>\n\
         <text x=\"10\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{:.1}</text>\n",
        HEIGHT - MARGIN,
        min,
        MARGIN + 10.0,
        max
    );
    for (k, (label, points)) in series.iter().enumerate() {
        if points.is_empty() {
            continue;
        }
        let color = colors[k % colors.len()];
        let mut path = String::new();
        for (i, &v) in points.iter().enumerate() {
            let _ = write!(
                path,
                "{}{:.2},{:.2} ",
                if i == 0 { "M" } else { "L" },
                x(i),
                y(v)
            );
        }
        let _ = write!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">{}</text>\n",
            path.trim_end(),
            color,
            WIDTH - MARGIN + 4.0,
            MARGIN + 16.0 * k as f64,
            color,
            label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Grouped bar chart: one bar per (group, label) pair.
pub fn bar_chart(title: &str, groups: &[String], series: &[(&str, &[f64])]) -> String {
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let all: Vec<f64> = series.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let (_, max) = scale(&all);
    let groups_n = groups.len().max(1);
    let bars_per_group = series.len().max(1);
    let group_w = (WIDTH - 2.0 * MARGIN) / groups_n as f64;
    let bar_w = group_w * 0.8 / bars_per_group as f64;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v / max;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n\
         <line x1=\"{MARGIN}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        WIDTH / 2.0,
        title,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    );
    for (g, group) in groups.iter().enumerate() {
        let gx = MARGIN + g as f64 * group_w;
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            gx + group_w / 2.0,
            HEIGHT - MARGIN + 18.0,
            group
        );
        for (k, (_, points)) in series.iter().enumerate() {
            let Some(&v) = points.get(g) else { continue };
            let bx = gx + group_w * 0.1 + k as f64 * bar_w;
            let by = y(v);
            let _ = write!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n\
                 <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.3}</text>\n",
                bx,
                by,
                bar_w * 0.9,
                HEIGHT - MARGIN - by,
                colors[k % colors.len()],
                bx + bar_w * 0.45,
                by - 4.0,
                v
            );
        }
    }
    for (k, (label, _)) in series.iter().enumerate() {
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">{}</text>\n",
            WIDTH - MARGIN + 4.0,
            MARGIN + 16.0 * k as f64,
            colors[k % colors.len()],
            label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
