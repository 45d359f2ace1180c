//! Self-contained static SVG line plots.

use crate::history::ResponseHistory;
use std::fmt::Write as _;

const PANEL_W: f64 = 720.0;
const PANEL_H: f64 = 200.0;
const MARGIN: f64 = 50.0;
/// Longest polyline drawn; longer series are decimated by stride.
const MAX_POINTS: usize = 4000;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn panel(out: &mut String, top: f64, title: &str, dt: f64, series: &[Series]) {
    let len = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let peak = series.iter().flat_map(|s| s.values.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let peak = if peak > 0.0 && peak.is_finite() { peak } else { 1.0 };
    let t_end = (len.max(2) - 1) as f64 * dt;
    let x = |k: usize| MARGIN + (k as f64 * dt / t_end) * (PANEL_W - 2.0 * MARGIN);
    let y = |v: f64| top + PANEL_H / 2.0 - v / peak * (PANEL_H / 2.0 - 20.0);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{:.1}" font-size="13">{}</text>"#, top + 14.0, escape(title));
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#999"/>"##,
        top + 20.0,
        PANEL_W - 2.0 * MARGIN,
        PANEL_H - 40.0
    );
    let _ = writeln!(out, r##"<line x1="{MARGIN}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#ddd"/>"##, y(0.0), PANEL_W - MARGIN);
    let _ = writeln!(out, r#"<text x="4" y="{:.1}" font-size="10">{peak:.3e}</text>"#, y(peak) + 4.0);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10">{t_end:.2} s</text>"#, PANEL_W - MARGIN - 30.0, top + PANEL_H - 6.0);
    for (i, s) in series.iter().enumerate() {
        let stride = s.values.len().div_ceil(MAX_POINTS).max(1);
        let pts: Vec<String> = s.values.iter().enumerate().step_by(stride).map(|(k, v)| format!("{:.1},{:.1}", x(k), y(*v))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#, escape(s.color), pts.join(" "));
        let ly = top + 34.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{0:.1}" y1="{ly:.1}" x2="{1:.1}" y2="{ly:.1}" stroke="{2}"/>"#,
            PANEL_W - 170.0,
            PANEL_W - 150.0,
            escape(s.color)
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#, PANEL_W - 145.0, ly + 4.0, escape(s.label));
    }
}

/// One panel per entry, stacked vertically.
pub fn stacked_plot(title: &str, dt: f64, panels: &[(String, Vec<Series>)]) -> String {
    let h = 30.0 + PANEL_H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{h}" viewBox="0 0 {PANEL_W} {h}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20" font-size="15" font-weight="bold">{}</text>"#, escape(title));
    for (i, (name, series)) in panels.iter().enumerate() {
        panel(&mut out, 30.0 + PANEL_H * i as f64, name, dt, series);
    }
    out.push_str("</svg>\n");
    out
}

/// Prediction and oracle displacement per DOF.
pub fn overlay_plot(title: &str, pred: &ResponseHistory, truth: &ResponseHistory) -> String {
    let panels: Vec<(String, Vec<Series>)> = (0..truth.n_dof().min(pred.n_dof()))
        .map(|i| {
            let name = truth.labels.get(i).cloned().unwrap_or_else(|| format!("dof{}", i + 1));
            let series = vec![
                Series { label: "oracle", color: "#1f77b4", values: &truth.disp[i] },
                Series { label: "prediction", color: "#d62728", values: &pred.disp[i] },
            ];
            (name, series)
        })
        .collect();
    stacked_plot(title, truth.dt, &panels)
}
