//! Minimal SVG line plots.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// A horizontal segment drawn over part of the x range (energy levels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub x0: f64,
    pub x1: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

impl Plot {
    fn tx(&self, x: f64) -> f64 {
        if self.log_x {
            x.log10()
        } else {
            x
        }
    }

    pub fn render(&self) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.x.iter())
            .chain(self.markers.iter().flat_map(|m| [&m.x0, &m.x1]))
            .map(|&x| self.tx(x))
            .filter(|x| x.is_finite());
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.y.iter())
            .chain(self.markers.iter().map(|m| &m.y))
            .copied()
            .filter(|y| y.is_finite());
        let (x_lo, x_hi) = bounds(xs);
        let (y_lo, y_hi) = bounds(ys);
        let px = |x: f64| MARGIN + (self.tx(x) - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            right - left,
            bottom - top
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x_lo + t * (x_hi - x_lo);
            let yv = y_lo + t * (y_hi - y_lo);
            let xl = if self.log_x { format!("{:.3e}", 10f64.powf(xv)) } else { format!("{xv:.3e}") };
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xl}</text>"#,
                left + t * (right - left),
                bottom + 16.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3e}</text>"#,
                left - 4.0,
                bottom - t * (bottom - top) + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut path = String::new();
            let mut pen_down = false;
            for (&x, &y) in s.x.iter().zip(&s.y) {
                if !(self.tx(x).is_finite() && y.is_finite()) {
                    pen_down = false;
                    continue;
                }
                let _ = write!(path, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y));
                pen_down = true;
            }
            let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.trim_end());
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                right - 140.0,
                top + 16.0 + 16.0 * k as f64,
                escape(&s.label)
            );
        }
        for m in &self.markers {
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-width="1"/>"##,
                px(m.x0),
                py(m.y),
                px(m.x1),
                py(m.y)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
