//! Static SVG output: best-so-far curves and top-down scene renders.

use crate::error::{Error, Result};
use crate::scenario::geometry::{Polygon, Vec2};
use crate::scenario::{Scenario, Trajectory};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Maps data coordinates into the plot area (y up).
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if (b - a).abs() < 1e-12 { (a - 1.0, b + 1.0) } else { (a, b) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN),
        )
    }

    fn points(&self, pts: impl IntoIterator<Item = (f64, f64)>) -> String {
        pts.into_iter()
            .map(|(x, y)| {
                let (a, b) = self.px(x, y);
                format!("{a:.2},{b:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Best-so-far value against query index, one line per named curve.
pub fn best_so_far_svg(title: &str, curves: &[(String, Vec<f64>)]) -> String {
    let finite = curves.iter().flat_map(|c| c.1.iter().copied()).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let n = curves.iter().map(|c| c.1.len()).max().unwrap_or(1).max(2);
    let frame = if lo.is_finite() { Frame::new(1.0, n as f64, lo, hi) } else { Frame::new(1.0, n as f64, 0.0, 1.0) };
    let mut svg = header(title);
    let (ax, ay) = frame.px(frame.x0, frame.y0);
    let (bx, by) = frame.px(frame.x1, frame.y1);
    let _ = writeln!(svg, "<path d=\"M{ax:.1},{by:.1} L{ax:.1},{ay:.1} L{bx:.1},{ay:.1}\" stroke=\"black\" fill=\"none\"/>");
    let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">query</text>", (ax + bx) / 2.0, ay + 30.0);
    let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.2}</text>", ax - 4.0, ay, frame.y0);
    let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.2}</text>", ax - 4.0, by + 4.0, frame.y1);
    let _ = writeln!(svg, "<text x=\"{bx:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{n}</text>", ay + 14.0);
    for (k, (name, values)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut best = f64::NEG_INFINITY;
        let pts = values.iter().enumerate().map(|(i, &v)| {
            best = best.max(v);
            ((i + 1) as f64, best)
        });
        let _ = writeln!(svg, "<polyline points=\"{}\" stroke=\"{color}\" stroke-width=\"2\" fill=\"none\"/>", frame.points(pts));
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{}</text>",
            ax + 10.0,
            by + 16.0 * (k + 1) as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Top-down view of `scenario` around the SDV: lanes, static geometry,
/// actor paths with their boxes at the current step, the expert path
/// (dashed) and an optional plan (red).
pub fn scene_svg(title: &str, scenario: &Scenario, plan: Option<&Trajectory>) -> String {
    let cur = scenario.current_index();
    let mut pts: Vec<Vec2> = scenario.sdv_expert.positions().collect();
    for a in &scenario.actors {
        pts.extend(a.trajectory.positions());
    }
    if let Some(p) = plan {
        pts.extend(p.positions());
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    // Equal scale on both axes with some context around the traffic.
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let half_w = ((x1 - x0) / 2.0 + 10.0).max((y1 - y0) / 2.0 * WIDTH / HEIGHT + 10.0);
    let half_h = half_w * (HEIGHT - 2.0 * MARGIN) / (WIDTH - 2.0 * MARGIN);
    let frame = Frame::new(cx - half_w, cx + half_w, cy - half_h, cy + half_h);
    let scale = (WIDTH - 2.0 * MARGIN) / (2.0 * half_w);

    let mut svg = header(title);
    for lane in &scenario.map.lanes {
        let line = frame.points(lane.centerline.iter().map(|p| (p.x, p.y)));
        let _ = writeln!(
            svg,
            "<polyline points=\"{line}\" stroke=\"#dddddd\" stroke-width=\"{:.2}\" fill=\"none\"/>\n<polyline points=\"{line}\" stroke=\"#aaaaaa\" stroke-width=\"1\" stroke-dasharray=\"6 6\" fill=\"none\"/>",
            lane.width * scale
        );
    }
    let polygon = |svg: &mut String, poly: &Polygon, fill: &str, stroke: &str| {
        let _ = writeln!(
            svg,
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\"/>",
            frame.points(poly.points.iter().map(|p| (p.x, p.y)))
        );
    };
    for o in &scenario.map.obstacles {
        polygon(&mut svg, o, "#888888", "none");
    }
    for (k, a) in scenario.actors.iter().enumerate() {
        let color = PALETTE[(k + 2) % PALETTE.len()];
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\" fill=\"none\"/>",
            frame.points(a.trajectory.positions().map(|p| (p.x, p.y)))
        );
        polygon(&mut svg, &a.box_at(cur).to_polygon(), color, "black");
        let (lx, ly) = frame.px(a.trajectory.states[cur].x, a.trajectory.states[cur].y);
        let _ = writeln!(svg, "<text x=\"{lx:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>", ly - 8.0, a.id);
    }
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\" fill=\"none\"/>",
        frame.points(scenario.sdv_expert.positions().map(|p| (p.x, p.y)))
    );
    polygon(&mut svg, &scenario.sdv_box_at(cur).to_polygon(), "#1f77b4", "black");
    if let Some(p) = plan {
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" stroke=\"#d62728\" stroke-width=\"2\" fill=\"none\"/>",
            frame.points(p.positions().map(|q| (q.x, q.y)))
        );
        if let Some(last) = p.states.len().checked_sub(1) {
            polygon(&mut svg, &scenario.sdv_footprint.at(p.pose(last)).to_polygon(), "none", "#d62728");
        }
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn save_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::loss::expert_future;
    use crate::toy;

    #[test]
    fn curves_render_monotone_polylines() {
        let svg = best_so_far_svg("t<1>", &[("bo".into(), vec![1.0, 0.5, 2.0]), ("rs".into(), vec![0.0])]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("t&lt;1&gt;"));
        // The dip at query 2 is flattened: query 1 and 2 share a y pixel.
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: Vec<&str> = line.split('"').nth(1).unwrap().split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert_eq!(ys[0], ys[1]);
        assert_ne!(ys[1], ys[2]);
        assert!(best_so_far_svg("empty", &[]).contains("</svg>"));
    }

    #[test]
    fn scene_render_has_every_element() {
        let sc = toy::occluding_bus();
        let svg = scene_svg("bus", &sc, Some(&expert_future(&sc)));
        let polys = svg.matches("<polygon").count();
        assert_eq!(polys, sc.map.obstacles.len() + sc.actors.len() + 2);
        assert_eq!(svg.matches("<polyline").count(), 2 * sc.map.lanes.len() + sc.actors.len() + 2);
    }
}
