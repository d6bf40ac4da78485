// SPDX-License-Identifier: Apache-2.0

//! SVG views of reports. Rendering reads report values and never changes them.

use std::fmt::Write;

use crate::interval::IntervalCalibrationPlot;
use crate::metrics::CalibrationReport;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 360.0;
const MARGIN: f64 = 56.0;

struct Panel<'a> {
    title: String,
    x_label: &'a str,
    y_label: &'a str,
    points: Vec<(f64, f64)>,
    extent: f64,
}

impl Panel<'_> {
    fn draw(&self, out: &mut String, offset_x: f64) {
        let x0 = offset_x + MARGIN;
        let y0 = MARGIN;
        let w = PANEL_W - 1.5 * MARGIN;
        let h = PANEL_H - 2.0 * MARGIN;
        let ext = if self.extent > 0.0 { self.extent } else { 1.0 };
        let sx = |v: f64| x0 + v / ext * w;
        let sy = |v: f64| y0 + h - v / ext * h;

        let _ = writeln!(out, r#"<g class="panel">"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            x0 + w / 2.0,
            y0 - 18.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r##"<line class="ideal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999999" stroke-dasharray="6,4"/>"##,
            sx(0.0),
            sy(0.0),
            sx(ext),
            sy(ext)
        );
        for k in 0..=4 {
            let v = ext * k as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                sx(v),
                y0 + h + 14.0,
                tick(v)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
                x0 - 4.0,
                sy(v) + 3.0,
                tick(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            x0 + w / 2.0,
            y0 + h + 34.0,
            escape(self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            x0 - 38.0,
            y0 + h / 2.0,
            x0 - 38.0,
            y0 + h / 2.0,
            escape(self.y_label)
        );
        if !self.points.is_empty() {
            let path: Vec<String> = self
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r##"<polyline points="{}" fill="none" stroke="#1f77b4"/>"##,
                path.join(" ")
            );
            for &(x, y) in &self.points {
                let _ = writeln!(
                    out,
                    r##"<circle class="bin" cx="{:.2}" cy="{:.2}" r="3.5" fill="#1f77b4"/>"##,
                    sx(x),
                    sy(y)
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
}

fn tick(v: f64) -> String {
    if v >= 100.0 {
        format!("{v:.0}")
    } else if v >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn document(panels: &[Panel<'_>]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_H:.0}" viewBox="0 0 {width:.0} {PANEL_H:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        p.draw(&mut out, i as f64 * PANEL_W);
    }
    out.push_str("</svg>\n");
    out
}

fn reliability_panel<'a>(title: &str, report: &CalibrationReport) -> Panel<'a> {
    let points: Vec<(f64, f64)> = report.bins.rows.iter().map(|r| (r.rmv, r.rmse)).collect();
    let extent = points
        .iter()
        .fold(0.0f64, |m, &(x, y)| m.max(x).max(y))
        * 1.05;
    Panel {
        title: format!("{title} (ENCE {:.3}, c_v {:.3})", report.ence, report.cv),
        x_label: "RMV",
        y_label: "RMSE",
        points,
        extent,
    }
}

/// RMSE against RMV per bin, with the dashed identity line.
pub fn reliability_svg(report: &CalibrationReport, title: &str) -> String {
    document(&[reliability_panel(title, report)])
}

/// Several reliability diagrams side by side.
pub fn reliability_row_svg(panels: &[(&str, &CalibrationReport)]) -> String {
    let panels: Vec<Panel<'_>> = panels
        .iter()
        .map(|(title, rep)| reliability_panel(title, rep))
        .collect();
    document(&panels)
}

/// Observed against expected confidence level.
pub fn interval_plot_svg(plot: &IntervalCalibrationPlot, title: &str) -> String {
    let panel = Panel {
        title: format!("{title} (max dev {:.3})", plot.max_abs_deviation),
        x_label: "Expected confidence level",
        y_label: "Observed confidence level",
        points: plot.points.iter().map(|p| (p.p, p.p_hat)).collect(),
        extent: 1.0,
    };
    document(&[panel])
}
