//! Standalone SVG line plots and grayscale grids.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const STROKES: [&str; 4] = ["#000000", "#c0392b", "#2e6fbf", "#2a8c3a"];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn open(s: &mut String, axes: &Axes) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(axes.title)
    );
}

fn frame(s: &mut String, axes: &Axes, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            s,
            r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            tick(x0 + f * (x1 - x0))
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{LEFT}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick(y0 + f * (y1 - y0))
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(axes.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(axes.y_label)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// One polyline per series over shared axes. Non-finite points are dropped.
pub fn line_plot(axes: &Axes, series: &[Series]) -> String {
    let xr = bounds(series.iter().flat_map(|s| s.x.iter()));
    let yr = bounds(series.iter().flat_map(|s| s.y.iter()));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let mut s = String::new();
    open(&mut s, axes);
    frame(&mut s, axes, xr, yr);
    for (i, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .x
            .iter()
            .zip(ser.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| {
                let px = LEFT + (x - xr.0) / (xr.1 - xr.0) * pw;
                let py = TOP + ph - (y - yr.0) / (yr.1 - yr.0) * ph;
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let stroke = STROKES[i % STROKES.len()];
        let dash = if i >= STROKES.len() { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.2"{dash} points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{stroke}">{}</text>"#,
            WIDTH - RIGHT - 150.0,
            TOP + 16.0 + 16.0 * i as f64,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grayscale cell grid; `values[i_im * n_re + i_re]`, darker is larger.
pub fn grid_plot(
    axes: &Axes,
    (re_min, re_max, n_re): (f64, f64, usize),
    (im_min, im_max, n_im): (f64, f64, usize),
    values: &[f64],
) -> String {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let vmax = values.iter().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let (cw, chh) = (pw / n_re as f64, ph / n_im as f64);
    let mut s = String::new();
    open(&mut s, axes);
    for i_im in 0..n_im {
        for i_re in 0..n_re {
            let v = values[i_im * n_re + i_re];
            let level = if vmax > 0.0 && v.is_finite() { (v / vmax).clamp(0.0, 1.0) } else { 0.0 };
            let gray = (255.0 * (1.0 - level)).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({gray},{gray},{gray})"/>"#,
                LEFT + i_re as f64 * cw,
                TOP + ph - (i_im + 1) as f64 * chh,
                cw + 0.05,
                chh + 0.05
            );
        }
    }
    frame(&mut s, axes, (re_min, re_max), (im_min, im_max));
    s.push_str("</svg>\n");
    s
}
