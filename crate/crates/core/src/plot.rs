//! Standalone SVG scatter plots coloured by fidelity. Output bytes depend
//! only on the points and the style.

use std::fmt::Write;

use crate::error::{QclError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 90.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub marker_radius: f64,
    /// Keep only points with fidelity strictly above this value.
    pub fidelity_min: Option<f64>,
    /// Lines written into the SVG `<desc>` element.
    pub notes: Vec<String>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "pc1".into(),
            y_label: "pc2".into(),
            marker_radius: 2.5,
            fidelity_min: None,
            notes: Vec::new(),
        }
    }
}

impl PlotStyle {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.fidelity_min {
            if !(0.0..=1.0).contains(&f) {
                return Err(QclError::InvalidArgument(format!(
                    "fidelity filter must lie in [0, 1], got {f}"
                )));
            }
        }
        if !(self.marker_radius > 0.0) {
            return Err(QclError::InvalidArgument("marker radius must be positive".into()));
        }
        Ok(())
    }
}

/// Linear ramp from blue at `t = 0` to red at `t = 1`.
pub fn colormap(t: f64) -> (u8, u8, u8) {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (lerp(30.0, 220.0), lerp(60.0, 40.0), lerp(220.0, 40.0))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    (lo - pad, hi + pad)
}

/// Points that survive the style's fidelity filter.
pub fn filtered<'a>(points: &'a [(f64, f64, f64)], style: &'a PlotStyle) -> impl Iterator<Item = &'a (f64, f64, f64)> {
    points
        .iter()
        .filter(move |p| style.fidelity_min.map_or(true, |m| p.2 > m))
}

/// Renders `(x, y, fidelity)` points. Colours span `[filter, 1]` when a
/// filter is set, otherwise `[0, 1]`.
pub fn render_svg(points: &[(f64, f64, f64)], style: &PlotStyle) -> Result<String> {
    style.validate()?;
    let kept: Vec<_> = filtered(points, style).copied().collect();
    let (x0, x1) = bounds(kept.iter().map(|p| p.0));
    let (y0, y1) = bounds(kept.iter().map(|p| p.1));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;
    let f_lo = style.fidelity_min.unwrap_or(0.0);
    let shade = |f: f64| {
        if f_lo >= 1.0 {
            1.0
        } else {
            (f - f_lo) / (1.0 - f_lo)
        }
    };

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    if !style.notes.is_empty() {
        let _ = writeln!(w, "<desc>");
        for n in &style.notes {
            let _ = writeln!(w, "{}", escape(n));
        }
        let _ = writeln!(w, "</desc>");
    }
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !style.title.is_empty() {
        let _ = writeln!(
            w,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            fmt(LEFT + plot_w / 2.0),
            escape(&style.title)
        );
    }

    let _ = writeln!(w, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(
        w,
        r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
        fmt(LEFT),
        fmt(TOP),
        fmt(plot_w),
        fmt(plot_h)
    );
    for k in 0..TICKS {
        let t = k as f64 / (TICKS - 1) as f64;
        let (px, py) = (LEFT + t * plot_w, TOP + plot_h - t * plot_h);
        let _ = writeln!(
            w,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/><line x1="{3}" y1="{4}" x2="{5}" y2="{4}"/>"#,
            fmt(px),
            fmt(TOP + plot_h),
            fmt(TOP + plot_h + 5.0),
            fmt(LEFT - 5.0),
            fmt(py),
            fmt(LEFT)
        );
    }
    let _ = writeln!(w, "</g>");

    let _ = writeln!(w, r#"<g class="tick-labels">"#);
    for k in 0..TICKS {
        let t = k as f64 / (TICKS - 1) as f64;
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt(LEFT + t * plot_w),
            fmt(TOP + plot_h + 20.0),
            fmt(x0 + t * (x1 - x0))
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            fmt(LEFT - 8.0),
            fmt(TOP + plot_h - t * plot_h + 4.0),
            fmt(y0 + t * (y1 - y0))
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        fmt(LEFT + plot_w / 2.0),
        fmt(HEIGHT - 15.0),
        escape(&style.x_label)
    );
    let _ = writeln!(
        w,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        fmt(TOP + plot_h / 2.0),
        escape(&style.y_label)
    );

    // colour bar
    let bar_x = WIDTH - RIGHT + 25.0;
    let steps = 20;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let (r, g, b) = colormap(t);
        let _ = writeln!(
            w,
            r#"<rect class="colorbar" x="{}" y="{}" width="14" height="{}" fill="rgb({r},{g},{b})"/>"#,
            fmt(bar_x),
            fmt(TOP + plot_h * (1.0 - (k + 1) as f64 / steps as f64)),
            fmt(plot_h / steps as f64 + 0.5)
        );
    }
    for (t, v) in [(0.0, f_lo), (1.0, 1.0)] {
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}">{}</text>"#,
            fmt(bar_x + 18.0),
            fmt(TOP + plot_h * (1.0 - t) + 4.0),
            fmt(v)
        );
    }

    let _ = writeln!(w, r#"<g class="points" stroke="none">"#);
    for &(x, y, f) in &kept {
        let (r, g, b) = colormap(shade(f));
        let _ = writeln!(
            w,
            r#"<circle class="pt" cx="{}" cy="{}" r="{}" fill="rgb({r},{g},{b})"/>"#,
            fmt(sx(x)),
            fmt(sy(y)),
            fmt(style.marker_radius)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

/// Number of point markers in an SVG produced by [`render_svg`].
pub fn count_markers(svg: &str) -> usize {
    svg.matches(r#"<circle class="pt""#).count()
}
