//! CSV tables and self-contained SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::MetricsRow;
use crate::protocol::{Pauli, ProtocolTrace};
use crate::routing::WalkResult;

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Io(format!("csv: {e}"))
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<String> {
    to_csv(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bitstring: String,
    pub count: u64,
    /// Born probability, when the exact distribution was computed.
    pub exact: Option<f64>,
}

pub fn histogram_rows(w: &WalkResult) -> Vec<HistogramRow> {
    let mut keys: BTreeMap<&str, ()> = w.histogram.keys().map(|k| (k.as_str(), ())).collect();
    if let Some(e) = &w.exact {
        keys.extend(e.keys().map(|k| (k.as_str(), ())));
    }
    keys.into_keys()
        .map(|k| HistogramRow {
            bitstring: k.to_string(),
            count: w.histogram.get(k).copied().unwrap_or(0),
            exact: w.exact.as_ref().map(|e| e.get(k).copied().unwrap_or(0.0)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRow {
    pub trial: usize,
    pub channel: String,
    pub theta_a: f64,
    pub theta_b: f64,
    pub herald: Option<u8>,
    pub outcomes: String,
    pub bob_correction: Pauli,
    pub alice_correction: Pauli,
    pub fidelity_a_to_b: f64,
    pub fidelity_b_to_a: f64,
    pub success: bool,
}

impl ProtocolRow {
    pub fn new(trial: usize, t: &ProtocolTrace, success: bool) -> Self {
        Self {
            trial,
            channel: t.channel.label(),
            theta_a: t.theta_a,
            theta_b: t.theta_b,
            herald: t.herald,
            outcomes: t.outcomes.clone(),
            bob_correction: t.corrections.bob_target,
            alice_correction: t.corrections.alice_target,
            fidelity_a_to_b: t.fidelity_a_to_b,
            fidelity_b_to_a: t.fidelity_b_to_a,
            success,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(out, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{y}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(y_label),
        y = TOP + (H - TOP - BOTTOM) / 2.0
    );
    let _ = writeln!(
        out,
        r##"<path d="M{LEFT} {TOP} V{} H{}" fill="none" stroke="#000000"/>"##,
        H - BOTTOM,
        W - RIGHT
    );
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Line plot of named `(x, y)` series; non-finite points are skipped.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label);
    let (x0, x1) = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            py(y) + 3.0,
            fmt_tick(y)
        );
    }
    let mut xs: Vec<f64> = series.iter().flat_map(|s| s.1.iter().map(|p| p.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            px(x),
            H - BOTTOM + 14.0,
            fmt_tick(x)
        );
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .enumerate()
            .map(|(j, p)| format!("{}{:.2} {:.2}", if j == 0 { "M" } else { "L" }, px(p.0), py(p.1)))
            .collect();
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, d.join(" "));
        for p in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, px(p.0), py(p.1));
        }
        let ly = TOP + 14.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#, W - RIGHT - 150.0, ly);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
            W - RIGHT - 135.0,
            ly + 9.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Bar chart with an optional marker per bar (e.g. an expected value).
pub fn bar_plot_svg(title: &str, y_label: &str, bars: &[(String, f64)], markers: Option<&[f64]>) -> String {
    let mut out = String::new();
    frame(&mut out, title, "outcome", y_label);
    let top = bars.iter().map(|b| b.1).chain(markers.into_iter().flatten().copied()).fold(0.0f64, f64::max);
    let top = if top > 0.0 { top * 1.05 } else { 1.0 };
    let n = bars.len().max(1) as f64;
    let slot = (W - LEFT - RIGHT) / n;
    let py = |y: f64| H - BOTTOM - y / top * (H - TOP - BOTTOM);
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = LEFT + slot * i as f64 + slot * 0.1;
        let _ = writeln!(
            out,
            r##"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4"/>"##,
            py(*v),
            slot * 0.8,
            H - BOTTOM - py(*v)
        );
        if let Some(m) = markers.and_then(|m| m.get(i)) {
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#d62728" stroke-width="2"/>"##,
                x + slot * 0.8,
                y = py(*m)
            );
        }
        if bars.len() <= 64 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{}" font-size="9" text-anchor="end" transform="rotate(-60 {:.2} {})">{}</text>"#,
                x + slot * 0.4,
                H - BOTTOM + 10.0,
                x + slot * 0.4,
                H - BOTTOM + 10.0,
                escape(label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::Mode;

    #[test]
    fn metrics_roundtrip() {
        let rows = vec![
            MetricsRow {
                node_count: 20,
                mode: Mode::Bidirectional,
                channel: "wbell".into(),
                runs: 3,
                throughput_mean: 123.456789012345,
                throughput_ci: 0.1 + 0.2,
                fidelity_mean: 0.9012345678901234,
                fidelity_ci: 1e-17,
                memutil_mean: 0.5,
                memutil_ci: 0.0,
                seed: u64::MAX,
            },
        ];
        let text = metrics_csv(&rows).unwrap();
        assert!(text.starts_with(&crate::netsim::METRICS_HEADER.join(",")));
        assert_eq!(from_csv::<MetricsRow>(&text).unwrap(), rows);
    }

    #[test]
    fn histogram_roundtrip_keeps_leading_zeros() {
        let rows = vec![
            HistogramRow { bitstring: "0001".into(), count: 3, exact: Some(0.25) },
            HistogramRow { bitstring: "1000".into(), count: 0, exact: None },
        ];
        assert_eq!(from_csv::<HistogramRow>(&to_csv(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn plots_are_svg() {
        let s = line_plot_svg("t", "x", "y", &[("a".into(), vec![(1.0, 2.0), (2.0, f64::NAN), (3.0, 1.0)])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(!s.contains("NaN"));
        let b = bar_plot_svg("t", "p", &[("00".into(), 0.5), ("11".into(), 0.5)], Some(&[0.5, 0.5]));
        assert_eq!(b.matches("<rect").count(), 3);
    }
}
