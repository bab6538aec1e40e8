//! CSV and SVG output for experiment rows.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::experiments::ExperimentRow;

pub const CSV_HEADER: &str = "n,K,k_lower,w1_emp,w1_target,seed,ms";

/// Writes rows under the fixed header; a missing target estimate is an
/// empty field.
pub fn write_csv<W: Write>(out: W, rows: &[ExperimentRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.k_lower.to_string(),
            r.w1_emp.to_string(),
            r.w1_target.map(|v| v.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            r.ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRow>> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<ExperimentRow>, _>>()?;
    Ok(rows)
}

struct Series {
    label: String,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Per-`n` medians for each group of rows sharing a label.
fn series(rows: &[ExperimentRow], label_of: &dyn Fn(&ExperimentRow) -> String) -> Vec<Series> {
    let mut labels: Vec<String> = Vec::new();
    for r in rows {
        let l = label_of(r);
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    let mut out = Vec::new();
    for label in labels {
        let group: Vec<&ExperimentRow> = rows.iter().filter(|r| label_of(r) == label).collect();
        let mut ns: Vec<usize> = group.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        for (dashed, name) in [(false, "vs sample"), (true, "vs target")] {
            let points: Vec<(f64, f64)> = ns
                .iter()
                .filter_map(|&n| {
                    let ys: Vec<f64> = group
                        .iter()
                        .filter(|r| r.n == n)
                        .filter_map(|r| if dashed { r.w1_target } else { Some(r.w1_emp) })
                        .filter(|y| *y > 0.0 && y.is_finite())
                        .collect();
                    (!ys.is_empty()).then(|| (n as f64, median(ys)))
                })
                .collect();
            if !points.is_empty() {
                out.push(Series {
                    label: format!("{label}, {name}"),
                    dashed,
                    points,
                });
            }
        }
    }
    out
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Log-log line plot of the median distances against `n`, one polyline per
/// label and distance kind.
pub fn render_svg(rows: &[ExperimentRow], label_of: &dyn Fn(&ExperimentRow) -> String) -> String {
    let (width, height) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 190.0, 20.0, 50.0);
    let all = series(rows, label_of);
    let pts = || all.iter().flat_map(|s| s.points.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in pts() {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = width - left - right;
    let ph = height - top - bottom;
    let sx = |x: f64| left + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y.log10()) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let v = d as f64;
        if v < x0 - 1e-9 || v > x1 + 1e-9 {
            continue;
        }
        let x = left + (v - x0) / (x1 - x0) * pw;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{d}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0
        );
    }
    for d in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let v = d as f64;
        if v < y0 - 1e-9 || v > y1 + 1e-9 {
            continue;
        }
        let y = top + (y1 - v) / (y1 - y0) * ph;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{d}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">sample size n</text>"#,
        left + pw / 2.0,
        height - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">median W1</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, s) in all.iter().enumerate() {
        let color = PALETTE[(i / 2) % PALETTE.len()];
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = width - right + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes the CSV and, when requested, the plot.
pub fn emit_outputs(
    rows: &[ExperimentRow],
    csv_path: Option<&Path>,
    svg_path: Option<&Path>,
    label_of: &dyn Fn(&ExperimentRow) -> String,
) -> Result<()> {
    if let Some(p) = csv_path {
        let file = fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
        write_csv(std::io::BufWriter::new(file), rows)?;
    }
    if let Some(p) = svg_path {
        fs::write(p, render_svg(rows, label_of))
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, k: f64, y: f64) -> ExperimentRow {
        ExperimentRow {
            n,
            k,
            k_lower: 1.0,
            w1_emp: y,
            w1_target: Some(2.0 * y),
            seed: 9,
            ms: 0,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_gives_two_lines() {
        let mut buf = Vec::new();
        let mut r = row(4, 2.0, 0.125);
        r.w1_target = None;
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().collect::<Vec<_>>(),
            vec![CSV_HEADER, "4,2,1,0.125,,9,0"]
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        let rows = vec![row(8, 1.5, 0.25), row(16, 1.5, 0.125)];
        emit_outputs(&rows, Some(&p), None, &|_| String::new()).unwrap();
        assert_eq!(read_csv(&p).unwrap(), rows);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let rows: Vec<ExperimentRow> = [8, 16, 32]
            .iter()
            .flat_map(|&n| [row(n, 1.0, 1.0 / n as f64), row(n, 2.0, 0.5 / n as f64)])
            .collect();
        let svg = render_svg(&rows, &|r| format!("K = {}", r.k));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("sample size n") && svg.contains("median W1"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
