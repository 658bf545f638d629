//! Plain-text SVG charts. Coordinates are printed with two decimals so the
//! same data always yields the same bytes.

use std::fmt::Write;

use crate::causality::{FevdResult, IrfResult};
use crate::engagement::Histogram;
use crate::linalg::Matrix;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Number formatting for tick labels: integers plain, otherwise up to 3 decimals.
fn tick_label(v: f64) -> String {
    if v == v.round() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Roughly `n` round tick values covering [lo, hi].
fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / n.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

pub struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Svg {
            body: String::new(),
            width,
            height,
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        )
        .unwrap();
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, s: &str) {
        writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}">{}</text>"#,
            esc(s)
        )
        .unwrap();
    }

    fn rotated_text(&mut self, x: f64, y: f64, size: u32, s: &str) {
        writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" font-size="{size}" transform="rotate(-90 {x:.2} {y:.2})">{}</text>"#,
            esc(s)
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"{extra}/>"#
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            p.join(" ")
        )
        .unwrap();
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, opacity: f64) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity}" stroke="none"/>"#,
            p.join(" ")
        )
        .unwrap();
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// A rectangular plotting region with linear x/y scales.
#[derive(Clone, Copy)]
struct Panel {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        let span = self.x.1 - self.x.0;
        self.left
            + if span > 0.0 {
                (x - self.x.0) / span * self.width
            } else {
                0.0
            }
    }

    fn py(&self, y: f64) -> f64 {
        let span = self.y.1 - self.y.0;
        self.top + self.height
            - if span > 0.0 {
                (y - self.y.0) / span * self.height
            } else {
                0.0
            }
    }

    fn axes(&self, svg: &mut Svg, x_ticks: &[(f64, String)], y_ticks: usize, x_title: &str, y_title: &str) {
        let bottom = self.top + self.height;
        svg.line(self.left, bottom, self.left + self.width, bottom, "#333", 1.0);
        svg.line(self.left, self.top, self.left, bottom, "#333", 1.0);
        for (v, label) in x_ticks {
            let x = self.px(*v);
            svg.line(x, bottom, x, bottom + 4.0, "#333", 1.0);
            svg.text(x, bottom + 15.0, "middle", 10, label);
        }
        for v in nice_ticks(self.y.0, self.y.1, y_ticks) {
            let y = self.py(v);
            svg.line(self.left - 4.0, y, self.left, y, "#333", 1.0);
            svg.line(self.left, y, self.left + self.width, y, "#eee", 0.5);
            svg.text(self.left - 6.0, y + 3.5, "end", 10, &tick_label(v));
        }
        if !x_title.is_empty() {
            svg.text(self.left + self.width / 2.0, bottom + 32.0, "middle", 11, x_title);
        }
        if !y_title.is_empty() {
            svg.rotated_text(self.left - 42.0, self.top + self.height / 2.0, 11, y_title);
        }
    }
}

fn numeric_ticks(lo: f64, hi: f64, n: usize) -> Vec<(f64, String)> {
    nice_ticks(lo, hi, n).into_iter().map(|v| (v, tick_label(v))).collect()
}

fn legend(svg: &mut Svg, x: f64, y: f64, labels: &[String]) {
    for (i, l) in labels.iter().enumerate() {
        let yy = y + i as f64 * 16.0;
        svg.rect(x, yy - 9.0, 12.0, 10.0, color(i), "");
        svg.text(x + 16.0, yy, "start", 11, l);
    }
}

fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Stacked areas of daily series; `dates` label the x axis.
pub fn stacked_area(title: &str, dates: &[String], series: &[(String, Vec<f64>)]) -> String {
    let mut svg = Svg::new(760.0, 420.0);
    svg.text(380.0, 24.0, "middle", 14, title);
    let n = dates.len();
    let mut cum = vec![vec![0.0; n]; series.len() + 1];
    for (i, (_, v)) in series.iter().enumerate() {
        for t in 0..n {
            cum[i + 1][t] = cum[i][t] + v.get(t).copied().unwrap_or(0.0).max(0.0);
        }
    }
    let top = cum
        .last()
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .unwrap_or(1.0)
        .max(1.0);
    let p = Panel {
        left: 70.0,
        top: 40.0,
        width: 560.0,
        height: 320.0,
        x: (0.0, n.saturating_sub(1).max(1) as f64),
        y: (0.0, top * 1.05),
    };
    let step = (n / 6).max(1);
    let ticks: Vec<(f64, String)> = (0..n).step_by(step).map(|i| (i as f64, dates[i].clone())).collect();
    p.axes(&mut svg, &ticks, 5, "date", "posts per day");
    for i in 0..series.len() {
        let mut pts: Vec<(f64, f64)> = (0..n).map(|t| (p.px(t as f64), p.py(cum[i + 1][t]))).collect();
        pts.extend((0..n).rev().map(|t| (p.px(t as f64), p.py(cum[i][t]))));
        svg.polygon(&pts, color(i), 0.8);
    }
    let labels: Vec<String> = series.iter().map(|s| s.0.clone()).collect();
    legend(&mut svg, 645.0, 60.0, &labels);
    svg.finish()
}

/// Gaussian kernel density with Silverman's bandwidth, scaled to histogram counts.
fn kde(values: &[f64], grid: &[f64], scale: f64) -> Vec<f64> {
    let n = values.len() as f64;
    if values.len() < 2 {
        return vec![0.0; grid.len()];
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((n - 1.0) * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        return vec![0.0; grid.len()];
    }
    let h = 0.9 * spread * n.powf(-0.2);
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|x| scale * norm * values.iter().map(|v| (-0.5 * ((x - v) / h).powi(2)).exp()).sum::<f64>())
        .collect()
}

pub fn histogram_density(title: &str, x_title: &str, hist: &Histogram, values: &[f64]) -> String {
    let mut svg = Svg::new(680.0, 420.0);
    svg.text(340.0, 24.0, "middle", 14, title);
    let lo = hist.edges.first().copied().unwrap_or(0.0);
    let hi = hist.edges.last().copied().unwrap_or(1.0);
    let width = if hist.edges.len() > 1 {
        hist.edges[1] - hist.edges[0]
    } else {
        1.0
    };
    let grid: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
    let dens = kde(values, &grid, values.len() as f64 * width);
    let ymax = hist
        .counts
        .iter()
        .map(|&c| c as f64)
        .chain(dens.iter().copied())
        .fold(1.0, f64::max);
    let p = Panel {
        left: 70.0,
        top: 40.0,
        width: 560.0,
        height: 320.0,
        x: (lo, hi.max(lo + 1.0)),
        y: (0.0, ymax * 1.05),
    };
    p.axes(&mut svg, &numeric_ticks(p.x.0, p.x.1, 8), 5, x_title, "count");
    for (i, &c) in hist.counts.iter().enumerate() {
        let (x0, x1) = (p.px(hist.edges[i]), p.px(hist.edges[i + 1]));
        let y = p.py(c as f64);
        svg.rect(
            x0,
            y,
            (x1 - x0).max(0.0),
            p.py(0.0) - y,
            color(0),
            r##" fill-opacity="0.6" stroke="#ffffff" stroke-width="0.5""##,
        );
    }
    let pts: Vec<(f64, f64)> = grid.iter().zip(&dens).map(|(x, d)| (p.px(*x), p.py(*d))).collect();
    svg.polyline(&pts, color(1), 1.5);
    svg.finish()
}

/// Grid of response (row) to impulse (column) panels with shaded bands.
pub fn irf_grid(title: &str, irf: &IrfResult) -> String {
    let m = irf.labels.len();
    let cell_w = 320.0;
    let cell_h = 220.0;
    let mut svg = Svg::new(90.0 + cell_w * m as f64, 60.0 + cell_h * m as f64);
    svg.text(svg.width / 2.0, 22.0, "middle", 14, title);
    let h = irf.horizon;
    let ticks: Vec<(f64, String)> = (0..=h)
        .step_by(if h > 14 { (h / 7).max(1) } else { 2 })
        .map(|s| (s as f64, s.to_string()))
        .collect();
    for r in 0..m {
        for i in 0..m {
            let get = |b: &Option<Vec<Matrix>>, s: usize| b.as_ref().map(|b| b[s][(r, i)]);
            let all = (0..=h).flat_map(|s| {
                [Some(irf.responses[s][(r, i)]), get(&irf.lower, s), get(&irf.upper, s)]
                    .into_iter()
                    .flatten()
            });
            let (lo, hi) = y_range(all.chain([0.0]));
            let p = Panel {
                left: 80.0 + cell_w * i as f64,
                top: 45.0 + cell_h * r as f64,
                width: cell_w - 60.0,
                height: cell_h - 70.0,
                x: (0.0, h.max(1) as f64),
                y: (lo, hi),
            };
            p.axes(&mut svg, &ticks, 4, if r + 1 == m { "days" } else { "" }, "");
            svg.text(
                p.left + p.width / 2.0,
                p.top - 6.0,
                "middle",
                11,
                &format!("{} → {}", irf.labels[i], irf.labels[r]),
            );
            if let (Some(lo_b), Some(hi_b)) = (&irf.lower, &irf.upper) {
                let mut band: Vec<(f64, f64)> = (0..=h).map(|s| (p.px(s as f64), p.py(hi_b[s][(r, i)]))).collect();
                band.extend((0..=h).rev().map(|s| (p.px(s as f64), p.py(lo_b[s][(r, i)]))));
                svg.polygon(&band, color(0), 0.2);
            }
            svg.line(p.px(0.0), p.py(0.0), p.px(h as f64), p.py(0.0), "#999", 0.8);
            let pts: Vec<(f64, f64)> = (0..=h)
                .map(|s| (p.px(s as f64), p.py(irf.responses[s][(r, i)])))
                .collect();
            svg.polyline(&pts, color(0), 1.6);
        }
    }
    svg.finish()
}

/// One panel per target variable with stacked source shares over horizons.
pub fn fevd_stacked(title: &str, fevd: &FevdResult) -> String {
    let m = fevd.labels.len();
    let hmax = fevd.horizon();
    let panel_h = 180.0;
    let mut svg = Svg::new(760.0, 60.0 + panel_h * m as f64);
    svg.text(380.0, 22.0, "middle", 14, title);
    let ticks: Vec<(f64, String)> = (1..=hmax)
        .step_by(if hmax > 14 { (hmax / 7).max(1) } else { 1 })
        .map(|h| (h as f64, h.to_string()))
        .collect();
    for j in 0..m {
        let p = Panel {
            left: 70.0,
            top: 45.0 + panel_h * j as f64,
            width: 540.0,
            height: panel_h - 60.0,
            x: (0.5, hmax as f64 + 0.5),
            y: (0.0, 1.0),
        };
        p.axes(
            &mut svg,
            &ticks,
            4,
            if j + 1 == m { "horizon (days)" } else { "" },
            "share",
        );
        svg.text(p.left + p.width / 2.0, p.top - 6.0, "middle", 11, &fevd.labels[j]);
        let bar = p.width / hmax as f64 * 0.8;
        for h in 1..=hmax {
            let mut acc = 0.0;
            for l in 0..m {
                let share = fevd.share(h, j, l);
                let y_top = p.py(acc + share);
                let y_bottom = p.py(acc);
                svg.rect(p.px(h as f64) - bar / 2.0, y_top, bar, y_bottom - y_top, color(l), "");
                acc += share;
            }
        }
    }
    legend(&mut svg, 630.0, 60.0, &fevd.labels);
    svg.finish()
}

pub fn line_chart(title: &str, dates: &[String], series: &[(String, Vec<f64>)]) -> String {
    let mut svg = Svg::new(760.0, 420.0);
    svg.text(380.0, 24.0, "middle", 14, title);
    let n = dates.len();
    let ymax = series.iter().flat_map(|s| s.1.iter().copied()).fold(1.0, f64::max);
    let p = Panel {
        left: 70.0,
        top: 40.0,
        width: 560.0,
        height: 320.0,
        x: (0.0, n.saturating_sub(1).max(1) as f64),
        y: (0.0, ymax * 1.05),
    };
    let step = (n / 6).max(1);
    let ticks: Vec<(f64, String)> = (0..n).step_by(step).map(|i| (i as f64, dates[i].clone())).collect();
    p.axes(&mut svg, &ticks, 5, "date", "posts per day");
    for (i, (_, v)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = v.iter().enumerate().map(|(t, y)| (p.px(t as f64), p.py(*y))).collect();
        svg.polyline(&pts, color(i), 1.3);
    }
    let labels: Vec<String> = series.iter().map(|s| s.0.clone()).collect();
    legend(&mut svg, 645.0, 60.0, &labels);
    svg.finish()
}

/// k × k heatmap on a white-to-blue scale over [0, 1].
pub fn heatmap(title: &str, labels: &[String], values: &Matrix) -> String {
    let k = values.rows();
    let cell = (420.0 / k.max(1) as f64).min(70.0);
    let left = 110.0;
    let top = 50.0;
    let mut svg = Svg::new(left + cell * k as f64 + 110.0, top + cell * k as f64 + 40.0);
    svg.text(svg.width / 2.0, 24.0, "middle", 14, title);
    for r in 0..k {
        svg.text(left - 6.0, top + cell * (r as f64 + 0.5) + 4.0, "end", 10, &labels[r]);
        for c in 0..k {
            let v = values[(r, c)].clamp(0.0, 1.0);
            let shade = |full: f64| (255.0 - v * (255.0 - full)).round() as u8;
            let fill = format!("#{:02x}{:02x}{:02x}", shade(31.0), shade(119.0), shade(180.0));
            svg.rect(
                left + cell * c as f64,
                top + cell * r as f64,
                cell,
                cell,
                &fill,
                r##" stroke="#ffffff""##,
            );
            if cell >= 28.0 {
                let ink = if v > 0.6 { "white" } else { "black" };
                writeln!(
                    svg.body,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10" fill="{ink}">{:.2}</text>"#,
                    left + cell * (c as f64 + 0.5),
                    top + cell * (r as f64 + 0.5) + 3.5,
                    values[(r, c)]
                )
                .unwrap();
            }
        }
    }
    for c in 0..k {
        svg.text(
            left + cell * (c as f64 + 0.5),
            top + cell * k as f64 + 14.0,
            "middle",
            10,
            &labels[c],
        );
    }
    svg.finish()
}
