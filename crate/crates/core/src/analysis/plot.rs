//! Hand-written SVG figures and the trajectory export.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Histogram2d, PerformancePoint, PoiSet};
use crate::error::AnalysisError;
use crate::sim::SeriesLog;
use crate::terrain::PileState;

const WIDTH: f64 = 720.0;
const MARGIN: f64 = 60.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear map from a data window to a pixel box (y pointing down).
#[derive(Clone, Copy, Debug)]
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), left: f64, top: f64, w: f64, h: f64) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self {
            x: widen(x),
            y: widen(y),
            left,
            top,
            w,
            h,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.h - (y - self.y.0) / (self.y.1 - self.y.0) * self.h
    }

    fn polyline(&self, points: impl IntoIterator<Item = (f64, f64)>, style: &str) -> String {
        let coords: Vec<String> = points
            .into_iter()
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        format!("<polyline fill=\"none\" {style} points=\"{}\"/>\n", coords.join(" "))
    }

    /// Box, five ticks per axis and axis labels.
    fn axes(&self, x_label: &str, y_label: &str) -> String {
        let mut s = format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>\n",
            self.left, self.top, self.w, self.h
        );
        for i in 0..=5 {
            let u = i as f64 / 5.0;
            let xv = self.x.0 + u * (self.x.1 - self.x.0);
            let yv = self.y.0 + u * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let bottom = self.top + self.h;
            let _ = writeln!(
                s,
                "<line x1=\"{px:.2}\" y1=\"{bottom:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\
                 <text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                bottom + 4.0,
                bottom + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#333\"/>\
                 <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                self.left - 4.0,
                self.left,
                self.left - 6.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            self.left + 0.5 * self.w,
            self.top + self.h + 34.0,
            escape(x_label)
        );
        let (lx, ly) = (self.left - 44.0, self.top + 0.5 * self.h);
        let _ = writeln!(
            s,
            "<text x=\"{lx:.2}\" y=\"{ly:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 {lx:.2} {ly:.2})\">{}</text>",
            escape(y_label)
        );
        s
    }
}

fn tick(v: f64) -> String {
    let t = format!("{v:.2}");
    t.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn document(height: f64, title: &str, body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n{body}</svg>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// `t,x,z,phase` rows of the cutting-edge path.
pub fn tip_path_csv(series: &SeriesLog) -> String {
    let mut out = String::from("t,x,z,phase\n");
    for r in &series.rows {
        let _ = writeln!(out, "{},{},{},{}", r.t, r.tip.x, r.tip.z, r.phase);
    }
    out
}

/// Tip path over the initial and final surfaces, with loaded and displaced mass per column below.
pub fn trajectory_svg(run_id: &str, series: &SeriesLog, pile: &PileState) -> String {
    let tip = series.tip_path();
    let prov = pile.provenance();
    let touched = |i: usize| prov.loaded[i] + prov.displaced[i] + prov.spilled[i] > 0.0;
    let cols: Vec<usize> = (0..pile.len()).filter(|&i| touched(i)).collect();
    let (mut x_lo, mut x_hi) = range(tip.iter().map(|p| p.x));
    if let (Some(&a), Some(&b)) = (cols.first(), cols.last()) {
        x_lo = x_lo.min(pile.column_center(a));
        x_hi = x_hi.max(pile.column_center(b));
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, pile.domain_length());
    }
    let (x_lo, x_hi) = ((x_lo - 1.0).max(0.0), (x_hi + 2.0).min(pile.domain_length()));
    let in_view = |i: &usize| (x_lo..=x_hi).contains(&pile.column_center(*i));
    let z_hi = range(
        pile.initial_heights()
            .iter()
            .chain(pile.heights())
            .copied()
            .chain(tip.iter().map(|p| p.z)),
    )
    .1
    .max(1.0)
        + 0.3;

    let upper = Frame::new((x_lo, x_hi), (0.0, z_hi), MARGIN, 40.0, WIDTH - 1.5 * MARGIN, 300.0);
    let mut body = upper.axes("x (m)", "z (m)");
    let surface = |h: &[f64]| -> Vec<(f64, f64)> {
        (0..pile.len()).filter(in_view).map(|i| (pile.column_center(i), h[i])).collect()
    };
    body += &upper.polyline(surface(pile.initial_heights()), "stroke=\"#999\" stroke-dasharray=\"6 4\"");
    body += &upper.polyline(surface(pile.heights()), "stroke=\"#000\" stroke-width=\"1.5\"");
    body += &upper.polyline(tip.iter().map(|p| (p.x, p.z)), "stroke=\"#c0392b\" stroke-width=\"1.5\"");

    let displaced = |i: usize| prov.displaced[i] + prov.spilled[i];
    let m_hi = cols.iter().map(|&i| prov.loaded[i] + displaced(i)).fold(0.0, f64::max).max(1.0);
    let lower = Frame::new((x_lo, x_hi), (0.0, m_hi), MARGIN, 400.0, WIDTH - 1.5 * MARGIN, 160.0);
    body += &lower.axes("x (m), initial column", "mass (kg)");
    let bar = 0.8 * (lower.px(pile.dx()) - lower.px(0.0));
    for &i in cols.iter().filter(|i| in_view(i)) {
        let x = lower.px(pile.column_center(i)) - 0.5 * bar;
        let base = lower.py(0.0);
        let loaded = base - lower.py(prov.loaded[i]);
        let moved = base - lower.py(displaced(i));
        let _ = writeln!(
            body,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{bar:.2}\" height=\"{loaded:.2}\" fill=\"#2e86c1\"/>\
             <rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{bar:.2}\" height=\"{moved:.2}\" fill=\"#e67e22\"/>",
            base - loaded,
            base - loaded - moved
        );
    }
    body += "<text x=\"80\" y=\"56\" font-size=\"11\" fill=\"#c0392b\">tip path</text>\n";
    body += "<text x=\"80\" y=\"70\" font-size=\"11\" fill=\"#999\">initial surface</text>\n";
    body += "<text x=\"80\" y=\"84\" font-size=\"11\">final surface</text>\n";
    body += "<text x=\"80\" y=\"416\" font-size=\"11\" fill=\"#2e86c1\">loaded</text>\n";
    body += "<text x=\"80\" y=\"430\" font-size=\"11\" fill=\"#e67e22\">displaced</text>\n";
    document(610.0, &format!("run {run_id}"), &body)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryFiles {
    /// `{run}_tip.csv`
    pub tip_csv: PathBuf,
    /// `{run}_surface.csv`: initial and final heights with loaded and displaced mass per column.
    pub surface_csv: PathBuf,
    /// `{run}_trajectory.svg`
    pub svg: PathBuf,
}

/// Write the tip path, surface/provenance table and figure of one run into `dir`.
pub fn export_trajectory(
    run_id: &str,
    series: &SeriesLog,
    pile: &PileState,
    dir: &Path,
) -> Result<TrajectoryFiles, AnalysisError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| AnalysisError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let files = TrajectoryFiles {
        tip_csv: dir.join(format!("{run_id}_tip.csv")),
        surface_csv: dir.join(format!("{run_id}_surface.csv")),
        svg: dir.join(format!("{run_id}_trajectory.svg")),
    };
    fs::write(&files.tip_csv, tip_path_csv(series)).map_err(io(&files.tip_csv))?;
    fs::write(&files.surface_csv, pile.provenance_csv()).map_err(io(&files.surface_csv))?;
    fs::write(&files.svg, trajectory_svg(run_id, series, pile)).map_err(io(&files.svg))?;
    Ok(files)
}

/// P_p against P_e with the Pareto front and the points of interest.
pub fn scatter_svg(title: &str, points: &[PerformancePoint], front: &[PerformancePoint], poi: Option<&PoiSet>) -> String {
    let (_, x_hi) = range(points.iter().map(|p| p.p_p));
    let (_, y_hi) = range(points.iter().map(|p| p.p_e));
    let frame = Frame::new(
        (0.0, if x_hi.is_finite() { x_hi * 1.05 } else { 1.0 }),
        (0.0, if y_hi.is_finite() { y_hi * 1.05 } else { 1.0 }),
        MARGIN + 10.0,
        40.0,
        WIDTH - 1.6 * MARGIN,
        420.0,
    );
    let mut body = frame.axes("productivity P_p (kg/s)", "efficiency P_e (kg/kJ)");
    for p in points {
        let _ = writeln!(
            body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#5d6d7e\" fill-opacity=\"0.5\"/>",
            frame.px(p.p_p),
            frame.py(p.p_e)
        );
    }
    body += &frame.polyline(front.iter().map(|p| (p.p_p, p.p_e)), "stroke=\"#27ae60\" stroke-width=\"1.5\"");
    if let Some(poi) = poi {
        for (p, glyph) in [
            (&poi.best_efficiency, "○"),
            (&poi.best_productivity, "△"),
            (&poi.pareto_choice, "◇"),
            (&poi.best_mass, "□"),
        ] {
            let _ = writeln!(
                body,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\" text-anchor=\"middle\" fill=\"#c0392b\">{glyph}</text>",
                frame.px(p.p_p),
                frame.py(p.p_e) + 5.0
            );
        }
    }
    document(520.0, title, &body)
}

/// Heat map of a 2-D histogram; cell shade scales with count.
pub fn histogram_svg(title: &str, h: &Histogram2d) -> String {
    let frame = Frame::new(
        (h.x_bins.lo, h.x_bins.hi),
        (h.y_bins.lo, h.y_bins.hi),
        MARGIN + 10.0,
        40.0,
        WIDTH - 1.6 * MARGIN,
        420.0,
    );
    let mut body = String::new();
    let peak = h.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let (xe, ye) = (h.x_bins.edges(), h.y_bins.edges());
    for (ix, col) in h.counts.iter().enumerate() {
        for (iy, &c) in col.iter().enumerate().filter(|(_, &c)| c > 0) {
            let (x0, x1) = (frame.px(xe[ix]), frame.px(xe[ix + 1]));
            let (y0, y1) = (frame.py(ye[iy + 1]), frame.py(ye[iy]));
            let _ = writeln!(
                body,
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#1f618d\" fill-opacity=\"{:.3}\"><title>{c}</title></rect>",
                x1 - x0,
                y1 - y0,
                0.1 + 0.9 * c as f64 / peak
            );
        }
    }
    body += &frame.axes(&h.x_field.column(), &h.y_field.column());
    document(520.0, title, &body)
}
