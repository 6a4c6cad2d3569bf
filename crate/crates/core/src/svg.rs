//! Minimal deterministic SVG output: domains with crack overlays, nodal
//! heatmaps with contour lines, line plots and crack-history strips.

use std::fmt::Write;

use crate::duality::ConjugateField;
use crate::geometry::{BoundaryKind, Crack, Domain, Point};
use crate::mesh::CrackedMesh;
use crate::solver::FieldSolution;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 16.0;

/// Maps domain coordinates into a `w x h` pixel box (y up).
struct Frame {
    lo: Point,
    scale: f64,
    ox: f64,
    oy: f64,
    height: f64,
}

impl Frame {
    fn new(dom: &Domain, ox: f64, oy: f64, size: f64) -> Self {
        let (lo, hi) = dom.bbox();
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let scale = (size - 2.0 * MARGIN) / span;
        Self { lo, scale, ox: ox + MARGIN, oy: oy + MARGIN, height: (hi.y - lo.y) * scale }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (self.ox + (p.x - self.lo.x) * self.scale, self.oy + self.height - (p.y - self.lo.y) * self.scale)
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Blue-white-red ramp on `[0, 1]`.
fn color(s: f64) -> String {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.5 };
    let (r, g, b) = if s < 0.5 {
        let a = s / 0.5;
        (59.0 + a * 196.0, 76.0 + a * 179.0, 192.0 + a * 63.0)
    } else {
        let a = (s - 0.5) / 0.5;
        (255.0 - a * 75.0, 255.0 - a * 251.0, 255.0 - a * 217.0)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn draw_domain(out: &mut String, f: &Frame, dom: &Domain) {
    for (s, kind) in dom.boundary_segments() {
        let (a, b) = (f.map(s.a), f.map(s.b));
        let (stroke, dash) = match kind {
            BoundaryKind::Dirichlet => ("black", ""),
            BoundaryKind::Neumann => ("gray", r#" stroke-dasharray="4 3""#),
        };
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{stroke}" stroke-width="2"{dash}/>"#,
            a.0, a.1, b.0, b.1
        );
    }
}

fn draw_crack(out: &mut String, f: &Frame, k: &Crack, stroke: &str, width: f64) {
    for pl in k.polylines() {
        if pl.len() == 1 {
            let c = f.map(pl[0]);
            let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="{width:.1}" fill="{stroke}"/>"#, c.0, c.1);
            continue;
        }
        let pts: Vec<String> = pl.iter().map(|&p| f.map(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width:.1}" stroke-linecap="round"/>"#,
            pts.join(" ")
        );
    }
}

/// Domain outline (Dirichlet solid, Neumann dashed) with cracks in red.
pub fn domain_overlay(dom: &Domain, cracks: &[Crack]) -> String {
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let f = Frame::new(dom, 0.0, 0.0, SIZE);
    draw_domain(&mut out, &f, dom);
    for k in cracks {
        draw_crack(&mut out, &f, k, "#c00000", 2.5);
    }
    out.push_str("</svg>\n");
    out
}

/// Segment of the level set `{w = c}` of the affine interpolant of
/// `vals` on the triangle `pts`.
fn level_segment(pts: [Point; 3], vals: [f64; 3], c: f64) -> Option<(Point, Point)> {
    let mut hits = Vec::with_capacity(2);
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        let (a, b) = (vals[i] - c, vals[j] - c);
        if (a < 0.0) != (b < 0.0) {
            hits.push(pts[i].lerp(pts[j], a / (a - b)));
        }
    }
    (hits.len() == 2).then(|| (hits[0], hits[1]))
}

fn heatmap(
    out: &mut String,
    f: &Frame,
    tris: impl Iterator<Item = ([Point; 3], [f64; 3])> + Clone,
    levels: usize,
) {
    let (lo, hi) = tris
        .clone()
        .flat_map(|(_, v)| v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    for (pts, vals) in tris.clone() {
        let s = ((vals[0] + vals[1] + vals[2]) / 3.0 - lo) / span;
        let q: Vec<String> = pts.iter().map(|&p| f.map(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let c = color(s);
        let _ = writeln!(out, r#"<polygon points="{}" fill="{c}" stroke="{c}" stroke-width="0.3"/>"#, q.join(" "));
    }
    if hi > lo {
        for l in 1..levels {
            let c = lo + span * l as f64 / levels as f64;
            for (pts, vals) in tris.clone() {
                if let Some((a, b)) = level_segment(pts, vals, c) {
                    let (a, b) = (f.map(a), f.map(b));
                    let _ = writeln!(
                        out,
                        r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="0.4"/>"#,
                        a.0, a.1, b.0, b.1
                    );
                }
            }
        }
    }
}

/// Heatmap of the nodal values with contours and the crack on top.
pub fn solution_heatmap(u: &FieldSolution) -> String {
    nodal_heatmap(u.mesh(), u.values())
}

/// Heatmap of arbitrary nodal values on `mesh`.
pub fn nodal_heatmap(mesh: &CrackedMesh, vals: &[f64]) -> String {
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let f = Frame::new(mesh.domain(), 0.0, 0.0, SIZE);
    let tris = mesh.triangles().iter().map(|t| {
        let n = t.nodes;
        (n.map(|i| mesh.nodes()[i].x), n.map(|i| vals[i]))
    });
    heatmap(&mut out, &f, tris, 12);
    draw_domain(&mut out, &f, mesh.domain());
    draw_crack(&mut out, &f, mesh.crack(), "#c00000", 2.5);
    out.push_str("</svg>\n");
    out
}

/// Contours of the conjugate potential; crack components highlighted in
/// distinct colors.
pub fn conjugate_contours(v: &ConjugateField) -> String {
    let mesh = v.mesh();
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let f = Frame::new(mesh.domain(), 0.0, 0.0, SIZE);
    let tris = v.triangles().iter().map(|&t| {
        let tri = &mesh.triangles()[t];
        let pts = tri.nodes.map(|i| mesh.nodes()[i].x);
        (pts, pts.map(|p| v.value_on(t, p).unwrap_or(f64::NAN)))
    });
    heatmap(&mut out, &f, tris, 16);
    draw_domain(&mut out, &f, mesh.domain());
    const PALETTE: [&str; 6] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];
    for (i, c) in v.components().iter().enumerate() {
        let segs = c.edges.iter().map(|&e| {
            let [a, b] = mesh.edges()[e].grid;
            crate::geometry::Segment::new(mesh.grid_points()[a], mesh.grid_points()[b])
        });
        draw_crack(&mut out, &f, &Crack::from_segments(segs), PALETTE[i % PALETTE.len()], 3.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Line plot of `(x, y)` series; `log_y` plots `log10 y` (non-positive
/// values are dropped).
pub fn line_plot(title: &str, x_label: &str, series: &[(String, Vec<(f64, f64)>)], log_y: bool) -> String {
    const W: f64 = 560.0;
    const H: f64 = 400.0;
    const L: f64 = 70.0;
    const B: f64 = 50.0;
    let tf = |y: f64| if log_y { (y > 0.0).then(|| y.log10()) } else { y.is_finite().then_some(y) };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| s.iter().filter_map(|&(x, y)| tf(y).filter(|_| x.is_finite()).map(|y| (x, y))).collect())
        .collect();
    let all = pts.iter().flatten();
    let (x0, x1, y0, y1) = all.fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |a, &(x, y)| {
        (a.0.min(x), a.1.max(x), a.2.min(y), a.3.max(y))
    });
    let (x0, x1) = if x0 < x1 { (x0, x1) } else { (x0 - 1.0, x0 + 1.0) };
    let (y0, y1) = if y0 < y1 { (y0, y1) } else { (y0 - 1.0, y0 + 1.0) };
    let map = |x: f64, y: f64| (L + (x - x0) / (x1 - x0) * (W - L - 20.0), H - B - (y - y0) / (y1 - y0) * (H - B - 40.0));
    let mut out = String::new();
    header(&mut out, W, H);
    let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let _ = writeln!(out, r#"<text x="{:.0}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(out, r#"<text x="{:.0}" y="{:.0}" font-size="13" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, esc(x_label));
    let (ax, ay) = map(x0, y0);
    let (bx, by) = map(x1, y1);
    let _ = writeln!(out, r#"<polyline points="{ax:.2},{by:.2} {ax:.2},{ay:.2} {bx:.2},{ay:.2}" fill="none" stroke="black"/>"#);
    for (v, label) in [(y0, y0), (y1, y1)] {
        let (_, py) = map(x0, v);
        let text = if log_y { format!("1e{label:.1}") } else { format!("{label:.3e}") };
        let _ = writeln!(out, r#"<text x="{:.0}" y="{py:.2}" font-size="11" text-anchor="end">{text}</text>"#, L - 6.0);
    }
    for v in [x0, x1] {
        let (px, _) = map(v, y0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.0}" font-size="11" text-anchor="middle">{v}</text>"#, H - B + 16.0);
    }
    const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (i, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let q: Vec<String> = p.iter().map(|&(x, y)| map(x, y)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, q.join(" "));
        for s in &q {
            let (x, y) = s.split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{c}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{:.0}" font-size="12" fill="{c}">{}</text>"#,
            L + 10.0,
            50.0 + 16.0 * i as f64,
            esc(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One small panel per recorded state, left to right.
pub fn crack_history(dom: &Domain, states: &[(f64, Crack)]) -> String {
    const PANEL: f64 = 160.0;
    let cols = states.len().clamp(1, 8);
    let rows = states.len().div_ceil(cols).max(1);
    let mut out = String::new();
    header(&mut out, PANEL * cols as f64, (PANEL + 18.0) * rows as f64);
    for (i, (t, k)) in states.iter().enumerate() {
        let (ox, oy) = ((i % cols) as f64 * PANEL, (i / cols) as f64 * (PANEL + 18.0));
        let f = Frame::new(dom, ox, oy + 18.0, PANEL);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">t = {t}</text>"#, ox + PANEL / 2.0, oy + 14.0);
        draw_domain(&mut out, &f, dom);
        draw_crack(&mut out, &f, k, "#c00000", 2.0);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryKind::{Dirichlet as D, Neumann as N};

    #[test]
    fn overlay_draws_every_piece() {
        let dom = Domain::unit_square([D, N, D, N]);
        let k = Crack::segment(Point::new(0.25, 0.5), Point::new(0.75, 0.5));
        let s = domain_overlay(&dom, &[k, Crack::point(Point::new(0.5, 0.25))]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<line").count(), 4);
        assert_eq!(s.matches("stroke-dasharray").count(), 2);
        assert_eq!(s.matches("<polyline").count(), 1);
        assert_eq!(s.matches("<circle").count(), 1);
    }

    #[test]
    fn level_sets_cross_the_right_edges() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let (a, b) = level_segment(pts, [0.0, 1.0, 0.0], 0.5).unwrap();
        assert!((a.x - 0.5).abs() < 1e-12 && (b.x - 0.5).abs() < 1e-12);
        assert!(level_segment(pts, [0.0, 1.0, 0.0], 2.0).is_none());
    }

    #[test]
    fn plots_skip_non_positive_values_on_log_axes() {
        let s = line_plot("err", "h", &[("a".into(), vec![(1.0, 1.0), (2.0, 0.0), (4.0, 0.1)])], true);
        assert_eq!(s.matches("<circle").count(), 2);
        assert_eq!(color(0.0), "#3b4cc0");
    }
}
