use std::fmt::Write as _;
use std::path::Path;

use super::metrics::{read_csv, write_csv, MetricsRow, Stats, SummaryRow};
use super::runner::summarize_rows;
use crate::error::{Error, Result};

/// Re-reads a metrics CSV (from `evaluate` or `scenario-series`), recomputes the
/// per-group statistics and optionally writes them and an acceptance-rate box
/// plot.
pub fn cmd_report(metrics: &Path, summary_out: Option<&Path>, svg_out: Option<&Path>) -> Result<Vec<SummaryRow>> {
    let rows: Vec<MetricsRow> = read_csv(metrics)?;
    if rows.is_empty() {
        return Err(Error::Usage(format!("{} has no rows", metrics.display())));
    }
    for r in &rows {
        if let Some(a) = r.acceptance_rate {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Domain(format!("run {}: acceptance rate {a} outside [0, 1]", r.run_id)));
            }
        }
    }
    let summary = summarize_rows(&rows);
    if let Some(p) = summary_out {
        write_csv(p, &summary)?;
    }
    if let Some(p) = svg_out {
        std::fs::write(p, acceptance_box_plot(&rows)).map_err(|e| Error::io(p, e))?;
    }
    Ok(summary)
}

/// Box plot (quartiles, min/max whiskers) of acceptance rate per `scenario/agent`.
pub fn acceptance_box_plot(rows: &[MetricsRow]) -> String {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in rows {
        let key = format!("{}/{}", r.scenario, r.agent);
        let Some(a) = r.acceptance_rate else { continue };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(a),
            None => groups.push((key, vec![a])),
        }
    }
    let (w, h, left, top, plot_h) = (120.0 * groups.len().max(1) as f64 + 80.0, 360.0, 60.0, 20.0, 280.0);
    let y = |v: f64| top + plot_h * (1.0 - v);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + plot_h);
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, left - 6.0, y(v) + 4.0);
    }
    for (i, (name, values)) in groups.iter().enumerate() {
        let st = Stats::of(values).expect("group has values");
        let cx = left + 60.0 + 120.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black"/>"#, y(st.max), y(st.min));
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{:.2}" width="60" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
            cx - 30.0,
            y(st.q3),
            (y(st.q1) - y(st.q3)).max(0.5)
        );
        let _ = writeln!(s, r#"<line x1="{}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="black" stroke-width="2"/>"#, cx - 30.0, y(st.median), cx + 30.0, y(st.median));
        let _ = writeln!(s, r#"<text x="{cx}" y="{}" text-anchor="middle">{}</text>"#, top + plot_h + 18.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
