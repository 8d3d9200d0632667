//! CSV and SVG emission. Output is byte-deterministic for fixed input.

use std::fmt::Write as _;

use crate::harness::sweep::{ErrorField, ErrorRecord};
use crate::harness::table::TableRow;

pub const SWEEP_HEADER: &str =
    "mu,err_dxA_S,err_dxA_C,err_dxI_ls,err_dlA_ls,err_dlA_b,err_dlI_ls,err_dlI_C,err_total,F_z,F_zS,F_zC,F_zN";
pub const TABLE_HEADER: &str = "problem,algorithm,mu_decade,iters,mean_Ix,fallback";

fn write_preamble(out: &mut String, preamble: &[String]) {
    for line in preamble {
        for part in line.lines() {
            let _ = writeln!(out, "# {part}");
        }
    }
}

/// One row per record, values in scientific notation with 17 significant digits.
pub fn sweep_csv(records: &[ErrorRecord], preamble: &[String]) -> String {
    let mut out = String::new();
    write_preamble(&mut out, preamble);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{:.16e}", r.mu);
        for f in ErrorField::ALL {
            let _ = write!(out, ",{:.16e}", r.get(f));
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Failed decades show `-` in the `iters` column.
pub fn table_csv(rows: &[TableRow], preamble: &[String]) -> String {
    let mut out = String::new();
    write_preamble(&mut out, preamble);
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let iters = r.iters.map_or_else(|| "-".to_string(), |k| k.to_string());
        let mean = r.mean_ix.map_or_else(String::new, |m| format!("{m:.2}"));
        let _ = writeln!(
            out,
            "{},{},{:.3e},{},{},{}",
            csv_field(&r.problem),
            csv_field(&r.algorithm.to_string()),
            r.mu_decade,
            iters,
            mean,
            r.fallback
        );
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Log-log panel of the given fields against `mu`, with markers, lines and a legend.
pub fn sweep_svg(records: &[ErrorRecord], fields: &[ErrorField], title: &str) -> String {
    let pts = |f: ErrorField| -> Vec<(f64, f64)> {
        records
            .iter()
            .map(|r| (r.mu, r.get(f)))
            .filter(|(m, v)| *m > 0.0 && *v > 0.0 && v.is_finite())
            .map(|(m, v)| (m.log10(), v.log10()))
            .collect()
    };
    let all: Vec<(f64, f64)> = fields.iter().flat_map(|&f| pts(f)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0_f64, 1.0_f64, 0.0_f64, 1.0_f64);
    if !all.is_empty() {
        x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor();
        x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil();
        y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
        y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="22" font-size="14" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let xstep = ((x1 - x0) / 10.0).ceil().max(1.0);
    let mut t = x0;
    while t <= x1 + 1e-9 {
        let x = sx(t);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{}</text>"#, TOP + ph + 16.0, t as i64);
        t += xstep;
    }
    let ystep = ((y1 - y0) / 10.0).ceil().max(1.0);
    let mut t = y0;
    while t <= y1 + 1e-9 {
        let y = sy(t);
        let _ = writeln!(s, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 6.0, y + 4.0, t as i64);
        t += ystep;
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">mu</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0);

    for (k, &f) in fields.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let p = pts(f);
        if p.len() > 1 {
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        for &(x, y) in &p {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, f.column());
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
