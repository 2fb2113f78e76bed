//! CSV and SVG emitters. Output depends only on the rows passed in.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::decay::DecayRow;
use crate::error::CliError;

pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub const DECAY_HEADER: [&str; 5] = ["L", "cov", "stderr", "n", "beta"];

pub fn write_decay_csv(path: &Path, rows: &[DecayRow]) -> Result<(), CliError> {
    write_csv(path, &DECAY_HEADER, rows)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// `log₁₀|cov|` against `L`, with ±stderr bars and a reference line of
/// slope `ref_slope` (natural log per unit L) through the first point.
pub fn decay_svg(rows: &[DecayRow], ref_slope: f64) -> String {
    let pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.cov != 0.0)
        .map(|r| (r.l as f64, r.cov.abs().log10(), r.stderr))
        .collect();
    let (x0, x1) = if rows.is_empty() {
        (0.0, 1.0)
    } else {
        let lo = rows.iter().map(|r| r.l).min().unwrap_or(0) as f64;
        let hi = rows.iter().map(|r| r.l).max().unwrap_or(1) as f64;
        if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) }
    };
    let (y0, y1) = if pts.is_empty() {
        (-1.0, 0.0)
    } else {
        let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
        let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) }
    };
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let clamp = |y: f64| y.clamp(y0, y1);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, bottom, right, top) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<path d="M{left:.2} {top:.2} L{left:.2} {bottom:.2} L{right:.2} {bottom:.2}" stroke="black" fill="none"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">L</text>"#, WIDTH / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="14" transform="rotate(-90 15 {:.2})" text-anchor="middle">log10 |cov|</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for k in (y0 as i64)..=(y1 as i64) {
        let y = sy(k as f64);
        let _ = writeln!(s, r#"<path d="M{:.2} {y:.2} L{left:.2} {y:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{k}</text>"#, left - 8.0, y + 4.0);
    }
    for r in rows {
        let x = sx(r.l as f64);
        let _ = writeln!(s, r#"<path d="M{x:.2} {bottom:.2} L{x:.2} {:.2}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#, bottom + 18.0, r.l);
    }
    if !pts.is_empty() {
        let mut d = String::new();
        for (i, &(x, y, _)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<path d="{}" stroke="steelblue" fill="none"/>"#, d.trim_end());
        for &(x, y, se) in &pts {
            let a = 10f64.powf(y);
            let hi = clamp((a + se).log10());
            let lo = if a > se { clamp((a - se).log10()) } else { y0 };
            let _ = writeln!(s, r#"<path d="M{:.2} {:.2} L{:.2} {:.2}" stroke="steelblue"/>"#, sx(x), sy(lo), sx(x), sy(hi));
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
        }
        let (xa, ya, _) = pts[0];
        let slope10 = ref_slope / std::f64::consts::LN_10;
        let mut xb = x1;
        let mut yb = ya + slope10 * (xb - xa);
        if yb < y0 && slope10 != 0.0 {
            xb = xa + (y0 - ya) / slope10;
            yb = y0;
        }
        let _ = writeln!(
            s,
            r#"<path d="M{:.2} {:.2} L{:.2} {:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            sx(xa),
            sy(ya),
            sx(xb),
            sy(yb.clamp(y0, y1))
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11" fill="firebrick">reference slope {:.4}</text>"#,
        right,
        top - 10.0,
        ref_slope
    );
    s.push_str("</svg>\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
