//! Contour plots with trajectory overlays, rendered as SVG.

use std::fmt::Write as _;

use crate::cli::export::NamedTrajectory;
use crate::error::{Error, Result};
use crate::problems::{AnalyticSurface, DomainBox, Problem};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 40.0;
const LEGEND_WIDTH: f64 = 130.0;

/// Stable colors assigned to trajectories in order.
pub const PALETTE: [&str; 10] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub domain: DomainBox,
    /// Grid cells per axis.
    pub resolution: usize,
    pub levels: usize,
    pub log_levels: bool,
}

impl ContourSpec {
    /// Defaults taken from the surface.
    pub fn for_surface(surface: &dyn AnalyticSurface) -> Self {
        ContourSpec {
            domain: surface.domain(),
            resolution: 120,
            levels: 24,
            log_levels: surface.log_levels(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 16 {
            return Err(Error::config("contour resolution must be at least 16"));
        }
        if self.levels < 3 {
            return Err(Error::config("contour needs at least 3 levels"));
        }
        let d = self.domain;
        if !(d.x_min < d.x_max && d.y_min < d.y_max) {
            return Err(Error::config("contour domain is empty"));
        }
        Ok(())
    }
}

/// Level values over a sampled grid with range `[lo, hi]`.
pub fn contour_levels(lo: f64, hi: f64, count: usize, log: bool) -> Vec<f64> {
    if log {
        let hi = hi.max(f64::MIN_POSITIVE);
        let lo = lo.max(hi * 1e-8).max(f64::MIN_POSITIVE);
        let (a, b) = (lo.ln(), hi.ln());
        (0..count)
            .map(|k| (a + (b - a) * (k as f64 + 0.5) / count as f64).exp())
            .collect()
    } else {
        (0..count)
            .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / count as f64)
            .collect()
    }
}

/// Grid of surface values, row-major with `(res + 1)²` samples.
struct Grid {
    res: usize,
    values: Vec<f64>,
}

impl Grid {
    fn sample(surface: &dyn AnalyticSurface, domain: &DomainBox, res: usize) -> Self {
        let mut values = Vec::with_capacity((res + 1) * (res + 1));
        for j in 0..=res {
            let y = domain.y_min + (domain.y_max - domain.y_min) * j as f64 / res as f64;
            for i in 0..=res {
                let x = domain.x_min + (domain.x_max - domain.x_min) * i as f64 / res as f64;
                values.push(surface.value(&[x, y]));
            }
        }
        Grid { res, values }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.res + 1) + i]
    }
}

/// Line segments of the level set `f = level`, in grid coordinates.
fn marching_squares(grid: &Grid, level: f64) -> Vec<[(f64, f64); 2]> {
    let mut segments = Vec::new();
    let lerp = |a: f64, b: f64| {
        let t = (level - a) / (b - a);
        if t.is_finite() {
            t.clamp(0.0, 1.0)
        } else {
            0.5
        }
    };
    for j in 0..grid.res {
        for i in 0..grid.res {
            // Corners counter-clockwise from bottom-left.
            let v = [grid.at(i, j), grid.at(i + 1, j), grid.at(i + 1, j + 1), grid.at(i, j + 1)];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let case = v
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &x)| acc | (u8::from(x > level) << k));
            let (x, y) = (i as f64, j as f64);
            let bottom = (x + lerp(v[0], v[1]), y);
            let right = (x + 1.0, y + lerp(v[1], v[2]));
            let top = (x + lerp(v[3], v[2]), y + 1.0);
            let left = (x, y + lerp(v[0], v[3]));
            let center_above = (v.iter().sum::<f64>() / 4.0) > level;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push([left, bottom]),
                2 | 13 => segments.push([bottom, right]),
                3 | 12 => segments.push([left, right]),
                4 | 11 => segments.push([right, top]),
                6 | 9 => segments.push([bottom, top]),
                7 | 8 => segments.push([left, top]),
                5 => {
                    if center_above {
                        segments.push([left, top]);
                        segments.push([bottom, right]);
                    } else {
                        segments.push([left, bottom]);
                        segments.push([right, top]);
                    }
                }
                10 => {
                    if center_above {
                        segments.push([left, bottom]);
                        segments.push([right, top]);
                    } else {
                        segments.push([left, top]);
                        segments.push([bottom, right]);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    domain: DomainBox,
    plot_w: f64,
    plot_h: f64,
}

impl Frame {
    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let d = &self.domain;
        (
            MARGIN + (x - d.x_min) / (d.x_max - d.x_min) * self.plot_w,
            MARGIN + (d.y_max - y) / (d.y_max - d.y_min) * self.plot_h,
        )
    }
}

/// Renders the surface's contours with one polyline per trajectory and a
/// legend. `desc` is stored verbatim (escaped) in the `<desc>` element.
pub fn render_contour_svg(
    surface: &dyn AnalyticSurface,
    spec: &ContourSpec,
    trajectories: &[NamedTrajectory],
    desc: &str,
) -> Result<String> {
    spec.validate()?;
    if surface.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "contour plots need a 2-D surface, `{}` has dimension {}",
            surface.name(),
            surface.dim()
        )));
    }
    for (name, t) in trajectories {
        if t.dim().is_some_and(|d| d != 2) {
            return Err(Error::Unsupported(format!("trajectory `{name}` is not 2-D")));
        }
    }
    let frame = Frame {
        domain: spec.domain,
        plot_w: WIDTH - 2.0 * MARGIN - LEGEND_WIDTH,
        plot_h: HEIGHT - 2.0 * MARGIN,
    };
    let grid = Grid::sample(surface, &spec.domain, spec.resolution);
    let finite: Vec<f64> = grid.values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let levels = if lo < hi {
        contour_levels(lo, hi, spec.levels, spec.log_levels)
    } else {
        Vec::new()
    };

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(w, "<desc>{}</desc>", escape(desc)).unwrap();
    writeln!(
        w,
        r#"<defs><clipPath id="plot-area"><rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
        frame.plot_w, frame.plot_h
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
        frame.plot_w, frame.plot_h
    )
    .unwrap();

    writeln!(w, r#"<g id="contours" fill="none" stroke-width="0.8">"#).unwrap();
    let to_px_grid = |(gx, gy): (f64, f64)| {
        let d = &spec.domain;
        let x = d.x_min + (d.x_max - d.x_min) * gx / spec.resolution as f64;
        let y = d.y_min + (d.y_max - d.y_min) * gy / spec.resolution as f64;
        frame.to_px(x, y)
    };
    for (k, &level) in levels.iter().enumerate() {
        let segments = marching_squares(&grid, level);
        if segments.is_empty() {
            continue;
        }
        let shade = 200 - (150 * k / levels.len().max(1)) as u32;
        let mut d = String::new();
        for [a, b] in segments {
            let (ax, ay) = to_px_grid(a);
            let (bx, by) = to_px_grid(b);
            write!(d, "M{ax:.2} {ay:.2}L{bx:.2} {by:.2}").unwrap();
        }
        writeln!(
            w,
            r#"<path data-level="{level:.6e}" stroke="rgb({shade},{shade},{shade})" d="{d}"/>"#
        )
        .unwrap();
    }
    writeln!(w, "</g>").unwrap();

    if let Some((min, _)) = surface.known_minimum() {
        let (mx, my) = frame.to_px(min[0], min[1]);
        writeln!(
            w,
            r#"<circle cx="{mx:.2}" cy="{my:.2}" r="4" fill="black" clip-path="url(#plot-area)"/>"#
        )
        .unwrap();
    }

    writeln!(
        w,
        r#"<g id="trajectories" fill="none" stroke-width="1.8" clip-path="url(#plot-area)">"#
    )
    .unwrap();
    for (k, (name, t)) in trajectories.iter().enumerate() {
        let mut points = String::new();
        for (n, e) in t.entries().iter().enumerate() {
            let (px, py) = frame.to_px(e.theta[0], e.theta[1]);
            if n > 0 {
                points.push(' ');
            }
            write!(points, "{px:.2},{py:.2}").unwrap();
        }
        writeln!(
            w,
            r#"<polyline data-optimizer="{}" stroke="{}" points="{points}"/>"#,
            escape(name),
            PALETTE[k % PALETTE.len()]
        )
        .unwrap();
    }
    writeln!(w, "</g>").unwrap();

    let lx = WIDTH - LEGEND_WIDTH - MARGIN / 2.0 + 20.0;
    writeln!(w, r#"<g id="legend" font-family="sans-serif" font-size="12">"#).unwrap();
    for (k, (name, _)) in trajectories.iter().enumerate() {
        let y = MARGIN + 10.0 + 18.0 * k as f64;
        writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="3"/>"#,
            lx + 20.0,
            PALETTE[k % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            y + 4.0,
            escape(name)
        )
        .unwrap();
    }
    writeln!(w, "</g>").unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(svg)
}

/// [`render_contour_svg`] for a named problem; dataset problems are
/// rejected as unsupported.
pub fn render_problem_svg(
    problem: &Problem,
    spec: &ContourSpec,
    trajectories: &[NamedTrajectory],
    desc: &str,
) -> Result<String> {
    match problem.surface() {
        Some(surface) => render_contour_svg(surface, spec, trajectories, desc),
        None => Err(Error::Unsupported(format!(
            "`{}` is not a 2-D surface and cannot be plotted",
            problem.name()
        ))),
    }
}

/// Truncations of every trajectory to its first `k` entries, for
/// `k = 1..=len` in `frames` roughly even steps.
pub fn frame_prefixes(trajectories: &[NamedTrajectory], frames: usize) -> Vec<Vec<NamedTrajectory>> {
    let longest = trajectories.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
    if longest == 0 || frames == 0 {
        return Vec::new();
    }
    let frames = frames.min(longest);
    (1..=frames)
        .map(|f| {
            let keep = (f * longest).div_ceil(frames);
            trajectories
                .iter()
                .map(|(name, t)| {
                    let mut prefix = crate::types::Trajectory::new();
                    for e in t.entries().iter().take(keep) {
                        prefix.push(e.step, e.theta.clone(), e.loss).expect("prefix of valid trajectory");
                    }
                    (name.clone(), prefix)
                })
                .collect()
        })
        .collect()
}
