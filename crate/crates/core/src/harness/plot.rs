//! Minimal hand-written SVG: scatter plots and colored contour grids.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ContourGrid, Metric, ResultRecord, Status};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// log10 testing error and rank against flip fraction.
    Flip,
    /// log10 testing error against log10 group order.
    Symmetry,
    /// Memory capacity and rank against flip fraction.
    Memory,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#17becf"];

type Series = (String, Vec<(f64, f64)>);

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn padded_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + W - RIGHT) / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn scatter_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    let pts = || series.iter().flat_map(|(_, p)| p.iter().copied());
    if pts().next().is_none() {
        return Err(Error::InvalidParameter(format!("nothing to plot for '{title}'")));
    }
    let (x0, x1) = padded_range(pts().map(|p| p.0));
    let (y0, y1) = padded_range(pts().map(|p| p.1));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    header(&mut svg, title);
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(t));
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 18.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (k, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for &(x, y) in points {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.7"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{ly}" r="4" fill="{color}"/>"#, W - RIGHT + 15.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, W - RIGHT + 25.0, ly + 4.0, escape(name));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn series_by_case(records: &[ResultRecord], x: impl Fn(&ResultRecord) -> Option<f64>, y: impl Fn(&ResultRecord) -> Option<f64>) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in records.iter().filter(|r| r.status == Status::Ok) {
        let (Some(xv), Some(yv)) = (x(r), y(r)) else { continue };
        if !(xv.is_finite() && yv.is_finite()) {
            continue;
        }
        match out.iter_mut().find(|(c, _)| *c == r.case) {
            Some((_, pts)) => pts.push((xv, yv)),
            None => out.push((r.case.clone(), vec![(xv, yv)])),
        }
    }
    out
}

fn save(dir: &Path, name: &str, svg: String, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, svg)?;
    files.push(path);
    Ok(())
}

/// Scatter figures for a sweep, written into `dir`.
pub fn emit_plots(records: &[ResultRecord], kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to plot".into()));
    }
    let log_tx = |r: &ResultRecord| r.delta_tx.map(f64::log10);
    let eps = |r: &ResultRecord| Some(r.epsilon_f);
    let gamma = |r: &ResultRecord| r.metric(Metric::GammaUlp);
    let figures: Vec<(&str, String)> = match kind {
        PlotKind::Flip => vec![
            (
                "delta_tx_vs_epsilon.svg",
                scatter_svg("testing error", "fraction of edges flipped", "log10 testing error", &series_by_case(records, eps, log_tx))?,
            ),
            (
                "gamma_vs_epsilon.svg",
                scatter_svg("covariance rank", "fraction of edges flipped", "rank (ulp policy)", &series_by_case(records, eps, gamma))?,
            ),
        ],
        PlotKind::Symmetry => vec![(
            "delta_tx_vs_symmetry.svg",
            scatter_svg(
                "testing error vs symmetries",
                "log10 number of symmetries",
                "log10 testing error",
                &series_by_case(records, |r| r.metric(Metric::Log10Symmetry), log_tx),
            )?,
        )],
        PlotKind::Memory => vec![
            (
                "mc_vs_epsilon.svg",
                scatter_svg("memory capacity", "fraction of edges flipped", "memory capacity", &series_by_case(records, eps, |r| r.mc_total))?,
            ),
            (
                "gamma_vs_epsilon.svg",
                scatter_svg("covariance rank", "fraction of edges flipped", "rank (ulp policy)", &series_by_case(records, eps, gamma))?,
            ),
        ],
    };
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (name, svg) in figures {
        save(dir, name, svg, &mut files)?;
    }
    Ok(files)
}

fn color_scale(t: f64) -> String {
    // blue (low) to yellow (high)
    let t = t.clamp(0.0, 1.0);
    let r = (40.0 + 215.0 * t) as u8;
    let g = (40.0 + 180.0 * t) as u8;
    let b = (160.0 - 130.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn grid_svg(title: &str, grid: &ContourGrid, value: impl Fn(&super::ContourCell) -> Option<f64>) -> Result<String> {
    let vals: Vec<f64> = grid.cells.iter().filter_map(&value).filter(|v| v.is_finite()).collect();
    if vals.is_empty() {
        return Err(Error::InvalidParameter(format!("nothing to plot for '{title}'")));
    }
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let cw = pw / grid.n_flip as f64;
    let ch = ph / grid.n_phi as f64;
    let mut svg = String::new();
    header(&mut svg, title);
    for p in 0..grid.n_phi {
        for f in 0..grid.n_flip {
            let c = grid.cell(p, f);
            let fill = match value(c) {
                Some(v) if v.is_finite() => color_scale(if hi > lo { (v - lo) / (hi - lo) } else { 0.5 }),
                _ => "#cccccc".into(),
            };
            // sparsity increases upwards
            let x = LEFT + f as f64 * cw;
            let y = TOP + (grid.n_phi - 1 - p) as f64 * ch;
            let _ = writeln!(svg, r#"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{fill}"/>"#);
        }
        let y = TOP + (grid.n_phi - 1 - p) as f64 * ch + ch / 2.0 + 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{y:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, fmt_tick(grid.cell(p, 0).phi));
    }
    for f in 0..grid.n_flip {
        let x = LEFT + (f as f64 + 0.5) * cw;
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(grid.cell(0, f).epsilon_f));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">fraction of edges flipped</text>"#, LEFT + pw / 2.0, H - 18.0);
    let _ = writeln!(svg, r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">sparsity</text>"#, TOP + ph / 2.0);
    for (k, (label, t)) in [(fmt_tick(hi), 1.0), (fmt_tick(lo), 0.0)].iter().enumerate() {
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/>"#, W - RIGHT + 10.0, ly - 6.0, color_scale(*t));
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{label}</text>"#, W - RIGHT + 28.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Colored grids of median log10 testing error and mean rank.
pub fn emit_contour_plot(grid: &ContourGrid, dir: &Path) -> Result<Vec<PathBuf>> {
    if grid.cells.is_empty() {
        return Err(Error::InvalidParameter("empty contour grid".into()));
    }
    let a = grid_svg("median log10 testing error", grid, |c| c.median_log10_delta_tx)?;
    let b = grid_svg("mean covariance rank", grid, |c| c.mean_gamma_ulp)?;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    save(dir, "contour_delta_tx.svg", a, &mut files)?;
    save(dir, "contour_gamma.svg", b, &mut files)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::super::ContourCell;
    use super::*;

    fn rec(case: &str, e: f64, d: f64) -> ResultRecord {
        ResultRecord {
            seed: 1,
            case: case.into(),
            epsilon_f: e,
            phi: 0.99,
            symmetry_count: Some("24".into()),
            gamma_ulp: Some(10),
            gamma_1e6: Some(8),
            delta_rc: Some(d),
            delta_tx: Some(d),
            mc_total: Some(3.0),
            status: Status::Ok,
        }
    }

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("signres-plot-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn empty_records_write_nothing() {
        let d = tmp("empty");
        assert!(emit_plots(&[], PlotKind::Flip, &d).is_err());
        assert!(!d.exists());
    }

    #[test]
    fn scatter_files() {
        let d = tmp("scatter");
        let recs = vec![rec("a", 0.0, 0.1), rec("a", 0.5, 0.01), rec("b", 0.5, 0.05)];
        let files = emit_plots(&recs, PlotKind::Flip, &d).unwrap();
        assert_eq!(files.len(), 2);
        let svg = fs::read_to_string(&files[0]).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3 + 2);
        assert_eq!(emit_plots(&recs, PlotKind::Symmetry, &d).unwrap().len(), 1);
        fs::remove_dir_all(&d).unwrap();
    }

    #[test]
    fn contour_cells_match_grid() {
        let d = tmp("contour");
        let cells = (0..6)
            .map(|k| ContourCell {
                phi: [0.2, 0.5][k / 3],
                epsilon_f: [0.0, 0.25, 0.5][k % 3],
                median_log10_delta_tx: Some(-(k as f64)),
                mean_gamma_ulp: Some(k as f64),
                mean_gamma_1e6: None,
                n_ok: 1,
            })
            .collect();
        let grid = ContourGrid { n_phi: 2, n_flip: 3, cells };
        let files = emit_contour_plot(&grid, &d).unwrap();
        let svg = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 6);
        fs::remove_dir_all(&d).unwrap();
    }

    #[test]
    fn tick_steps() {
        let t = ticks(0.0, 0.5);
        assert_eq!(t.len(), 6);
        assert!(t.iter().zip([0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(ticks(-3.2, -0.4).len() >= 3);
    }
}
