//! Certificate JSON, sweep CSV and SVG line charts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::guessing::GuessingCertificate;
use super::solver::SolverStatus;

/// C-style `%.12g`: 12 significant digits, trailing zeros removed,
/// exponent form outside 1e-4 ≤ |x| < 1e12.
pub fn format_g12(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub d: usize,
    pub beta_obs: f64,
    pub x_star: usize,
    pub p_guess_primal: f64,
    pub p_guess_dual: f64,
    pub h_min_bits: f64,
    pub status: SolverStatus,
    pub gap: f64,
    pub wall_time_s: f64,
}

impl From<&GuessingCertificate> for CertificateJson {
    fn from(c: &GuessingCertificate) -> Self {
        Self {
            d: c.d,
            beta_obs: c.beta_obs,
            x_star: c.x_star,
            p_guess_primal: c.p_guess_primal,
            p_guess_dual: c.p_guess_dual,
            h_min_bits: c.h_min_bits,
            status: c.report.status,
            gap: c.report.gap,
            wall_time_s: c.report.wall_time,
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "d",
    "beta_obs",
    "p_guess_primal",
    "p_guess_dual",
    "h_min_bits",
    "status",
    "gap",
    "iterations",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub d: usize,
    pub beta_obs: f64,
    pub p_guess_primal: f64,
    pub p_guess_dual: f64,
    pub h_min_bits: f64,
    pub status: SolverStatus,
    pub gap: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl CsvRow {
    pub fn from_certificate(c: &GuessingCertificate) -> Self {
        Self {
            d: c.d,
            beta_obs: c.beta_obs,
            p_guess_primal: c.p_guess_primal,
            p_guess_dual: c.p_guess_dual,
            h_min_bits: c.h_min_bits,
            status: c.report.status,
            gap: c.report.gap,
            iterations: c.report.iterations,
            wall_time_s: c.report.wall_time,
        }
    }

    /// Row for a grid point whose solve did not produce a certificate.
    pub fn failed(d: usize, beta_obs: f64, status: SolverStatus) -> Self {
        Self {
            d,
            beta_obs,
            p_guess_primal: f64::NAN,
            p_guess_dual: f64::NAN,
            h_min_bits: f64::NAN,
            status,
            gap: f64::NAN,
            iterations: 0,
            wall_time_s: 0.0,
        }
    }

    fn fields(&self) -> [String; 9] {
        [
            self.d.to_string(),
            format_g12(self.beta_obs),
            format_g12(self.p_guess_primal),
            format_g12(self.p_guess_dual),
            format_g12(self.h_min_bits),
            self.status.to_string(),
            format_g12(self.gap),
            self.iterations.to_string(),
            format_g12(self.wall_time_s),
        ]
    }
}

pub fn write_csv(rows: &[CsvRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(row.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header {:?}", header));
    }
    let num = |s: &str| -> Result<f64, String> { s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")) };
    let int = |s: &str| -> Result<usize, String> { s.parse::<usize>().map_err(|e| format!("{s:?}: {e}")) };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            Ok(CsvRow {
                d: int(&rec[0])?,
                beta_obs: num(&rec[1])?,
                p_guess_primal: num(&rec[2])?,
                p_guess_dual: num(&rec[3])?,
                h_min_bits: num(&rec[4])?,
                status: SolverStatus::parse(&rec[5]).ok_or_else(|| format!("unknown status {:?}", &rec[5]))?,
                gap: num(&rec[6])?,
                iterations: int(&rec[7])?,
                wall_time_s: num(&rec[8])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SvgSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static line chart, one polyline per series; non-finite points are skipped.
pub fn render_svg(series: &[SvgSeries], x_label: &str, y_label: &str) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 55.0);
    let finite = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
    };
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let (lo, hi) = finite().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{yb}" x2="{xr}" y2="{yb}" stroke="black"/><line x1="{left}" y1="{top}" x2="{left}" y2="{yb}" stroke="black"/>"#,
        yb = h - bottom,
        xr = w - right
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            px(xv),
            h - bottom + 16.0,
            format_tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(yv) + 4.0,
            format_tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        left + (w - left - right) / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        top + (h - top - bottom) / 2.0,
        top + (h - top - bottom) / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" fill="{color}">{}</text>"#,
            left + 10.0,
            top + 14.0 * (i + 1) as f64,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    trim_zeros(&s).to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
