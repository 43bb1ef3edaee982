//! Minimal self-contained SVG line plots for estimator runs.
//!
//! No plotting dependency is pulled in: each function renders a complete
//! standalone `.svg` document (axes, gridlines, tick labels, series) that any
//! browser or vector viewer can open. Long traces are subsampled for
//! rendering only — analysis always happens on the full-resolution CSV.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::estimator::TrajectoryTrace;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 56.0;
/// Maximum rendered points per polyline; denser series are strided.
const MAX_POINTS: usize = 1000;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    /// Expands degenerate ranges so the mapping below is always finite.
    fn regularized(mut self) -> Self {
        if !(self.x_max > self.x_min) {
            self.x_min -= 0.5;
            self.x_max += 0.5;
        }
        if !(self.y_max > self.y_min) {
            self.y_min -= 0.5;
            self.y_max += 0.5;
        }
        self
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * self.plot_width()
    }

    fn sy(&self, y: f64) -> f64 {
        MARGIN_TOP + (self.y_max - y) / (self.y_max - self.y_min) * self.plot_height()
    }

    fn plot_width(&self) -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_height(&self) -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }
}

fn series_color(index: usize, total: usize) -> String {
    let hue = (index as f64) * 360.0 / (total.max(1) as f64);
    format!("hsl({hue:.0}, 62%, 42%)")
}

fn nice_step(range: f64, target: usize) -> f64 {
    let raw = (range / target.max(1) as f64).abs().max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(min: f64, max: f64) -> Vec<f64> {
    let step = nice_step(max - min, 6);
    let mut t = (min / step).ceil() * step;
    let mut out = Vec::new();
    while t <= max + step * 1e-9 {
        // Snap values that round to zero, so the label reads "0".
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 10000.0 || v.abs() < 0.001 {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn document_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="26" font-size="16" fill="rgb(26,26,26)" text-anchor="middle">{title}</text>
"#,
        WIDTH / 2.0
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (t, b) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    for x in ticks(frame.x_min, frame.x_max) {
        let sx = frame.sx(x);
        let _ = writeln!(
            out,
            r#"<line x1="{sx:.1}" y1="{t:.1}" x2="{sx:.1}" y2="{b:.1}" stroke="rgb(224,224,224)" stroke-width="1"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{sx:.1}" y="{:.1}" font-size="11" fill="rgb(68,68,68)" text-anchor="middle">{}</text>"#,
            b + 16.0,
            fmt_tick(x)
        );
    }
    for y in ticks(frame.y_min, frame.y_max) {
        let sy = frame.sy(y);
        let _ = writeln!(
            out,
            r#"<line x1="{l:.1}" y1="{sy:.1}" x2="{r:.1}" y2="{sy:.1}" stroke="rgb(224,224,224)" stroke-width="1"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="rgb(68,68,68)" text-anchor="end">{}</text>"#,
            l - 6.0,
            sy + 4.0,
            fmt_tick(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="rgb(51,51,51)" stroke-width="1"/>"#,
        r - l,
        b - t
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" fill="rgb(26,26,26)" text-anchor="middle">{x_label}</text>"#,
        (l + r) / 2.0,
        b + 40.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" font-size="13" fill="rgb(26,26,26)" text-anchor="middle" transform="rotate(-90 18 {:.1})">{y_label}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0
    );
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str, width: f64) {
    if pts.is_empty() {
        return;
    }
    let stride = pts.len().div_ceil(MAX_POINTS).max(1);
    let mut path = String::new();
    for (idx, &(x, y)) in pts.iter().enumerate() {
        if idx % stride != 0 && idx != pts.len() - 1 {
            continue;
        }
        let _ = write!(path, "{:.2},{:.2} ", frame.sx(x), frame.sy(y));
    }
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
        path.trim_end()
    );
}

fn finite_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        min = min.min(v);
        max = max.max(v);
    }
    if min > max {
        (0.0, 1.0)
    } else {
        (min, max)
    }
}

fn pad(frame: Frame, fraction: f64) -> Frame {
    let dx = (frame.x_max - frame.x_min) * fraction;
    let dy = (frame.y_max - frame.y_min) * fraction;
    Frame {
        x_min: frame.x_min - dx,
        x_max: frame.x_max + dx,
        y_min: frame.y_min - dy,
        y_max: frame.y_max + dy,
    }
}

/// All wrapped bearing errors `e_k(t)`, one series per directed edge.
pub fn bearing_error_svg(trace: &TrajectoryTrace) -> String {
    let m = trace.bearing_errors.first().map_or(0, |e| e.len());
    let series: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|k| {
            trace
                .times
                .iter()
                .zip(trace.bearing_errors.iter())
                .map(|(&t, e)| (t, e[k]))
                .collect()
        })
        .collect();
    let (x_min, x_max) = finite_bounds(trace.times.iter().copied());
    let (y_min, y_max) = finite_bounds(series.iter().flatten().map(|&(_, y)| y));
    let frame = pad(
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        },
        0.05,
    )
    .regularized();

    let mut out = String::new();
    document_open(&mut out, "bearing errors e_k(t)");
    axes(&mut out, &frame, "t [s]", "e_k [rad]");
    for (k, pts) in series.iter().enumerate() {
        polyline(&mut out, &frame, pts, &series_color(k, m), 1.2);
    }
    out.push_str("</svg>\n");
    out
}

/// Cumulative position error on a log scale: `log10(max(e_p, 1e-16))`.
pub fn position_error_svg(trace: &TrajectoryTrace) -> String {
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(trace.cumulative_position_error.iter())
        .map(|(&t, &ep)| (t, ep.max(1e-16).log10()))
        .collect();
    let (x_min, x_max) = finite_bounds(pts.iter().map(|&(x, _)| x));
    let (y_min, y_max) = finite_bounds(pts.iter().map(|&(_, y)| y));
    let frame = pad(
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        },
        0.05,
    )
    .regularized();

    let mut out = String::new();
    document_open(&mut out, "cumulative position error e_p(t)");
    axes(&mut out, &frame, "t [s]", "log10 e_p");
    polyline(&mut out, &frame, &pts, "hsl(215, 70%, 40%)", 1.6);
    out.push_str("</svg>\n");
    out
}

/// Estimated positions `xi_hat_i(t)` in the plane of the reference frame,
/// drawn with equal axis scales. Per agent: the path from the initial guess
/// (square) to the final estimate (circle, with a short arrow showing the
/// final attitude estimate), plus a cross at the true unscaled position.
pub fn trajectory_svg(trace: &TrajectoryTrace, truth_xi: &[Vector2<f64>]) -> String {
    let n = trace.states.first().map_or(0, |s| s.n());
    let series: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|i| {
            trace
                .states
                .iter()
                .map(|s| (s.xi_hat[i].x, s.xi_hat[i].y))
                .collect()
        })
        .collect();

    let all_x = series
        .iter()
        .flatten()
        .map(|&(x, _)| x)
        .chain(truth_xi.iter().map(|p| p.x));
    let all_y = series
        .iter()
        .flatten()
        .map(|&(_, y)| y)
        .chain(truth_xi.iter().map(|p| p.y));
    let (x_min, x_max) = finite_bounds(all_x);
    let (y_min, y_max) = finite_bounds(all_y);
    let mut frame = pad(
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        },
        0.08,
    )
    .regularized();

    // Equal aspect: widen the shorter data range to match the plot rect.
    let unit_x = frame.plot_width() / (frame.x_max - frame.x_min);
    let unit_y = frame.plot_height() / (frame.y_max - frame.y_min);
    if unit_x < unit_y {
        let grow = (frame.y_max - frame.y_min) * (unit_y / unit_x - 1.0) / 2.0;
        frame.y_min -= grow;
        frame.y_max += grow;
    } else {
        let grow = (frame.x_max - frame.x_min) * (unit_x / unit_y - 1.0) / 2.0;
        frame.x_min -= grow;
        frame.x_max += grow;
    }

    let mut out = String::new();
    document_open(&mut out, "estimated relative positions xi_hat(t)");
    axes(&mut out, &frame, "xi_x", "xi_y");
    for (i, pts) in series.iter().enumerate() {
        let color = series_color(i, n);
        polyline(&mut out, &frame, pts, &color, 1.2);
        if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
            let (sx0, sy0) = (frame.sx(first.0), frame.sy(first.1));
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="7" height="7" fill="none" stroke="{color}" stroke-width="1.4"/>"#,
                sx0 - 3.5,
                sy0 - 3.5
            );
            let (sx1, sy1) = (frame.sx(last.0), frame.sy(last.1));
            let _ = writeln!(
                out,
                r#"<circle cx="{sx1:.1}" cy="{sy1:.1}" r="4" fill="none" stroke="{color}" stroke-width="1.6"/>"#
            );
            // Final attitude estimate: agent i's heading in the reference
            // frame is at angle -theta_hat_i.
            if let Some(state) = trace.final_state() {
                let a = -state.theta_hat[i].radians();
                let (dx, dy) = (a.cos(), a.sin());
                // Screen y grows downward, so flip the y component.
                let (ex, ey) = (sx1 + 18.0 * dx, sy1 - 18.0 * dy);
                let _ = writeln!(
                    out,
                    r#"<line x1="{sx1:.1}" y1="{sy1:.1}" x2="{ex:.1}" y2="{ey:.1}" stroke="{color}" stroke-width="1.6"/>"#
                );
                let back = 5.0;
                for side in [-0.5, 0.5] {
                    let wing = a + std::f64::consts::PI + side;
                    let _ = writeln!(
                        out,
                        r#"<line x1="{ex:.1}" y1="{ey:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.6"/>"#,
                        ex + back * wing.cos(),
                        ey - back * wing.sin()
                    );
                }
            }
        }
        if let Some(tru) = truth_xi.get(i) {
            let (cx, cy) = (frame.sx(tru.x), frame.sy(tru.y));
            for (dx, dy) in [(5.0, 5.0), (5.0, -5.0)] {
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.6"/>"#,
                    cx - dx,
                    cy - dy,
                    cx + dx,
                    cy + dy
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="12" fill="{color}">{}</text>"#,
                cx + 7.0,
                cy - 7.0,
                i + 1
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="rgb(68,68,68)">square: initial estimate, circle+arrow: final estimate and attitude, cross: truth</text>"#,
        MARGIN_LEFT,
        HEIGHT - 12.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{
        integrate, perturb_truth, true_unscaled_positions, EstimatorConfig,
    };
    use crate::framework::Angle;
    use crate::{DirectedGraph, Se2Framework};

    fn short_trace() -> (TrajectoryTrace, Vec<Vector2<f64>>) {
        let g = DirectedGraph::complete(3).unwrap();
        let f = Se2Framework::new(
            g,
            vec![
                Vector2::new(0.0, 0.0),
                Vector2::new(1.0, 0.0),
                Vector2::new(0.4, 0.9),
            ],
            vec![Angle::new(0.0), Angle::new(0.5), Angle::new(-0.5)],
        )
        .unwrap();
        let mut cfg = EstimatorConfig::new(0, 1);
        cfg.t_final = 0.02;
        let s0 = perturb_truth(&f, 0, 1, 0.05, 9).unwrap();
        let measured = f.bearing_rigidity_function().unwrap();
        let truth_xi = true_unscaled_positions(&f, 0, 1).unwrap();
        let trace = integrate(&s0, &measured, &cfg, f.graph(), &truth_xi).unwrap();
        (trace, truth_xi)
    }

    #[test]
    fn plots_are_wellformed_svg() {
        let (trace, truth_xi) = short_trace();
        for svg in [
            bearing_error_svg(&trace),
            position_error_svg(&trace),
            trajectory_svg(&trace, &truth_xi),
        ] {
            assert!(svg.starts_with("<svg"));
            assert!(svg.trim_end().ends_with("</svg>"));
            assert_eq!(svg.matches("<svg").count(), 1);
            assert!(svg.contains("<polyline"));
            assert!(!svg.contains("NaN"));
            assert!(!svg.contains("inf"));
        }
    }

    #[test]
    fn bearing_plot_has_one_series_per_edge() {
        let (trace, _) = short_trace();
        let svg = bearing_error_svg(&trace);
        assert_eq!(svg.matches("<polyline").count(), 6);
    }

    #[test]
    fn long_series_are_subsampled() {
        let pts: Vec<(f64, f64)> = (0..5000).map(|i| (i as f64, (i as f64).sin())).collect();
        let frame = Frame {
            x_min: 0.0,
            x_max: 5000.0,
            y_min: -1.0,
            y_max: 1.0,
        };
        let mut out = String::new();
        polyline(&mut out, &frame, &pts, "red", 1.0);
        let rendered = out.split("points=\"").nth(1).unwrap();
        let count = rendered.split('"').next().unwrap().split_whitespace().count();
        assert!(count <= MAX_POINTS + 1, "rendered {count} points");
        // The final sample must survive subsampling.
        assert!(out.contains(&format!("{:.2},", frame.sx(4999.0))));
    }

    #[test]
    fn ticks_cover_the_range() {
        let t = ticks(0.0, 10.0);
        assert!(t.first().copied().unwrap() >= 0.0);
        assert!(t.last().copied().unwrap() <= 10.0 + 1e-9);
        assert!(t.len() >= 4 && t.len() <= 12);
        assert!(t.contains(&0.0));
    }
}
