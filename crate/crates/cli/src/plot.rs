//! Bare-bones SVG line and scatter charts.

use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Lines,
    Points,
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    chart(title, x_label, y_label, series, Style::Lines)
}

pub fn scatter_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    chart(title, x_label, y_label, series, Style::Points)
}

struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-9 {
            (lo, hi) = (lo - 1.0, hi + 1.0);
        }
        let raw = (hi - lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .into_iter()
            .map(|m| m * mag)
            .find(|&s| s >= raw)
            .unwrap_or(10.0 * mag);
        Self {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn label(&self, v: f64) -> String {
        let decimals = (-self.step.log10().floor()).max(0.0) as usize;
        let v = if v.abs() < self.step * 1e-6 { 0.0 } else { v };
        format!("{v:.decimals$}")
    }

    fn scale(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn marker(x: f64, y: f64, r: f64, color: &str, square: bool) -> String {
    if square {
        format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{color}\"/>\n",
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        )
    } else {
        format!("<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{r}\" fill=\"{color}\"/>\n")
    }
}

fn chart(title: &str, x_label: &str, y_label: &str, series: &[Series], style: Style) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let x = Axis::fit(all().map(|p| p.0));
    let y = Axis::fit(all().map(|p| p.1));
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let px = |v: f64| x.scale(v, x0, x1);
    let py = |v: f64| y.scale(v, y0, y1);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(title)
    );

    for t in x.ticks() {
        let p = px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{p:.1}" y1="{y1:.1}" x2="{p:.1}" y2="{y0:.1}" stroke="#e5e5e5"/><text x="{p:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            y0 + 16.0,
            x.label(t)
        );
    }
    for t in y.ticks() {
        let p = py(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.1}" y1="{p:.1}" x2="{x1:.1}" y2="{p:.1}" stroke="#e5e5e5"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            p + 4.0,
            y.label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // second round through the palette: dashed lines, square markers
        let alt = (i / PALETTE.len()) % 2 == 1;
        if style == Style::Lines && s.points.len() > 1 {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(a, b)| format!("{:.1},{:.1}", px(a), py(b)))
                .collect();
            let dash = if alt {
                r#" stroke-dasharray="6,3""#
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                path.join(" ")
            );
        }
        let r = if style == Style::Points { 4.0 } else { 2.5 };
        for &(a, b) in &s.points {
            svg.push_str(&marker(px(a), py(b), r, color, alt));
        }
        let ly = y1 + 14.0 + 16.0 * i as f64;
        svg.push_str(&marker(x1 + 16.0, ly - 4.0, 4.0, color, alt));
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
            x1 + 26.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, points: &[(f64, f64)]) -> Series {
        Series {
            name: name.into(),
            points: points.to_vec(),
        }
    }

    #[test]
    fn axis_covers_data_with_round_ticks() {
        let a = Axis::fit([2.31, 3.6, 2.9].into_iter());
        assert!(a.lo <= 2.31 && a.hi >= 3.6);
        assert_eq!(a.step, 0.5);
        assert_eq!(a.ticks(), [2.0, 2.5, 3.0, 3.5, 4.0]);
        assert_eq!(a.label(2.5), "2.5");
    }

    #[test]
    fn degenerate_axes() {
        let a = Axis::fit(std::iter::empty());
        assert_eq!((a.lo, a.hi), (0.0, 1.0));
        let a = Axis::fit([5.0, 5.0].into_iter());
        assert!(a.lo < 5.0 && a.hi > 5.0);
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = line_chart(
            "t",
            "x",
            "y",
            &[
                series("a", &[(1.0, 1.0), (2.0, 2.0)]),
                series("b<&>", &[(1.0, 3.0), (2.0, 1.0)]),
            ],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;&amp;&gt;"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn scatter_has_no_lines() {
        let svg = scatter_chart("t", "x", "y", &[series("a", &[(1.0, 1.0), (2.0, -2.0)])]);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn series_past_the_palette_are_dashed() {
        let many: Vec<Series> = (0..12)
            .map(|i| series(&format!("s{i}"), &[(0.0, 0.0), (1.0, i as f64)]))
            .collect();
        let svg = line_chart("t", "x", "y", &many);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 12);
    }
}
