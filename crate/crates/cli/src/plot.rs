//! Static SVG line plots with auto-scaled, optionally logarithmic axes.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f4e79", "#c0392b", "#27864a", "#8e44ad"];
const DASHES: [&str; 4] = ["", "6 4", "2 3", "10 3 2 3"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: if log { 0.1 } else { 0.0 }, hi: 1.0, log };
        }
        if log {
            let (lo, hi) = (lo.log10().floor(), hi.log10().ceil());
            Axis { lo, hi: if hi > lo { hi } else { lo + 1.0 }, log }
        } else {
            let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
            let step = nice_step(span / 5.0);
            let lo = (lo / step).floor() * step;
            let hi = (hi / step).ceil() * step;
            Axis { lo, hi: if hi > lo { hi } else { lo + step }, log }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (lo, hi) = (self.lo as i32, self.hi as i32);
            let stride = ((hi - lo) as usize).div_ceil(8).max(1);
            (lo..=hi).step_by(stride).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            let step = nice_step((self.hi - self.lo) / 5.0);
            let mut v = self.lo;
            let mut out = Vec::new();
            while v <= self.hi + 1e-9 * step {
                out.push((v, trim(v)));
                v += step;
            }
            out
        }
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let nice = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn trim(v: f64) -> String {
    let s = format!("{:.6}", if v.abs() < 1e-12 { 0.0 } else { v });
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let xa = Axis::fit(all().map(|p| p.0), self.log_x);
        let ya = Axis::fit(all().map(|p| p.1), self.log_y);
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = |x: f64| MARGIN_LEFT + xa.frac(x) * pw;
        let py = |y: f64| MARGIN_TOP + (1.0 - ya.frac(y)) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (v, label) in xa.ticks() {
            let x = px(v);
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                MARGIN_TOP + ph + 20.0
            );
        }
        for (v, label) in ya.ticks() {
            let y = py(v);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/>"#,
                MARGIN_LEFT - 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                MARGIN_LEFT - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            svg,
            r#"<clipPath id="plot"><rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}"/></clipPath>"#
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let dash = DASHES[k % DASHES.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| {
                    x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0)
                })
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}" points="{}"/>"#,
                pts.join(" ")
            );
            let ly = MARGIN_TOP + 15.0 + 20.0 * k as f64;
            let lx = MARGIN_LEFT + pw + 15.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
                lx + 25.0
            );
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 32.0, ly + 4.0, escape(&s.label));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_series() {
        let plot = Plot {
            x_label: "t".into(),
            y_label: "P".into(),
            log_x: false,
            log_y: true,
            series: vec![
                Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, 0.1)] },
                Series { label: "b<c".into(), points: vec![(0.0, 1.0), (1.0, 0.0)] },
            ],
        };
        let svg = plot.render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn axis_ranges() {
        let a = Axis::fit([0.013, 0.97].into_iter(), false);
        assert_eq!((a.lo, a.hi), (0.0, 1.0));
        let a = Axis::fit([0.013, 0.97].into_iter(), true);
        assert_eq!((a.lo, a.hi), (-2.0, 0.0));
        assert_eq!(nice_step(0.23), 0.5);
    }
}
