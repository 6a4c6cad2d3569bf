use serde::{Deserialize, Serialize};

use super::{Crack, Point, Segment, GEOM_TOL};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// A closed polygon; `kinds[i]` tags the edge from `vertices[i]` to
/// `vertices[i + 1]` (cyclically).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub vertices: Vec<Point>,
    pub kinds: Vec<BoundaryKind>,
}

impl BoundaryLoop {
    pub fn new(vertices: Vec<Point>, kinds: Vec<BoundaryKind>) -> Result<Self> {
        let l = Self { vertices, kinds };
        l.validate()?;
        Ok(l)
    }

    pub fn uniform(vertices: Vec<Point>, kind: BoundaryKind) -> Result<Self> {
        let kinds = vec![kind; vertices.len()];
        Self::new(vertices, kinds)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Segment, BoundaryKind)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            (
                Segment::new(self.vertices[i], self.vertices[(i + 1) % n]),
                self.kinds[i],
            )
        })
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            s += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        0.5 * s
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.edges().any(|(s, _)| s.dist_to_point(p) <= GEOM_TOL)
    }

    /// Crossing-number test for the open interior.
    fn winds_around(&self, p: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Closed region bounded by the loop.
    pub fn encloses(&self, p: Point) -> bool {
        self.on_boundary(p) || self.winds_around(p)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain("polygon needs at least 3 vertices".into()));
        }
        if self.kinds.len() != n {
            return Err(Error::InvalidDomain(format!(
                "{} edge tags for {n} edges",
                self.kinds.len()
            )));
        }
        if self.vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex".into()));
        }
        if self.signed_area().abs() <= GEOM_TOL {
            return Err(Error::InvalidDomain("degenerate polygon".into()));
        }
        let edges: Vec<Segment> = self.edges().map(|(s, _)| s).collect();
        for (i, e) in edges.iter().enumerate() {
            if e.is_point() {
                return Err(Error::InvalidDomain("repeated vertex".into()));
            }
            for (j, f) in edges.iter().enumerate().skip(i + 1) {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // adjacent edges may only share their common vertex
                    let shared = if j == i + 1 { e.b } else { e.a };
                    let other_e = if j == i + 1 { e.a } else { e.b };
                    let other_f = if j == i + 1 { f.b } else { f.a };
                    if f.dist_to_point(other_e) <= GEOM_TOL
                        || e.dist_to_point(other_f) <= GEOM_TOL
                    {
                        return Err(Error::InvalidDomain(format!(
                            "edges overlap near ({}, {})",
                            shared.x, shared.y
                        )));
                    }
                } else if e.intersects(f) {
                    return Err(Error::InvalidDomain("boundary is not simple".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DomainRepr {
    vertices: Vec<Point>,
    boundary_edges: Vec<BoundaryKind>,
    #[serde(default)]
    holes: Vec<BoundaryLoop>,
}

/// A polygonal domain with tagged boundary edges and optional holes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct Domain {
    outer: BoundaryLoop,
    holes: Vec<BoundaryLoop>,
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        let outer = BoundaryLoop::new(r.vertices, r.boundary_edges)?;
        let holes = r
            .holes
            .into_iter()
            .map(|h| BoundaryLoop::new(h.vertices, h.kinds))
            .collect::<Result<Vec<_>>>()?;
        Domain::new(outer, holes)
    }
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> Self {
        DomainRepr {
            vertices: d.outer.vertices,
            boundary_edges: d.outer.kinds,
            holes: d.holes,
        }
    }
}

impl Domain {
    pub fn new(outer: BoundaryLoop, holes: Vec<BoundaryLoop>) -> Result<Self> {
        outer.validate()?;
        for h in &holes {
            h.validate()?;
            for (e, _) in h.edges() {
                if outer.edges().any(|(f, _)| f.intersects(&e)) || !outer.winds_around(e.a) {
                    return Err(Error::InvalidDomain("hole must lie strictly inside".into()));
                }
            }
        }
        for (i, h) in holes.iter().enumerate() {
            for g in &holes[i + 1..] {
                let touch = h
                    .edges()
                    .any(|(e, _)| g.edges().any(|(f, _)| e.intersects(&f)));
                if touch || h.winds_around(g.vertices[0]) || g.winds_around(h.vertices[0]) {
                    return Err(Error::InvalidDomain("holes overlap".into()));
                }
            }
        }
        let d = Self { outer, holes };
        if !d.loops().any(|l| l.kinds.contains(&BoundaryKind::Dirichlet)) {
            return Err(Error::InvalidDomain("Dirichlet boundary is empty".into()));
        }
        Ok(d)
    }

    /// Axis-aligned rectangle; `kinds` tags bottom, right, top, left.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, kinds: [BoundaryKind; 4]) -> Result<Self> {
        let v = vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ];
        Self::new(BoundaryLoop::new(v, kinds.to_vec())?, Vec::new())
    }

    pub fn unit_square(kinds: [BoundaryKind; 4]) -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0, kinds).expect("unit square is valid")
    }

    /// Regular polygon inscribed in the circle of the given centre and radius.
    pub fn regular_polygon(center: Point, radius: f64, sides: usize, kind: BoundaryKind) -> Result<Self> {
        if sides < 3 || !(radius > 0.0) {
            return Err(Error::InvalidDomain("need sides >= 3 and radius > 0".into()));
        }
        let v = (0..sides)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / sides as f64;
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Self::new(BoundaryLoop::uniform(v, kind)?, Vec::new())
    }

    pub fn outer(&self) -> &BoundaryLoop {
        &self.outer
    }

    pub fn holes(&self) -> &[BoundaryLoop] {
        &self.holes
    }

    pub fn loops(&self) -> impl Iterator<Item = &BoundaryLoop> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn is_simply_connected(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn boundary_segments(&self) -> impl Iterator<Item = (Segment, BoundaryKind)> + '_ {
        self.loops().flat_map(|l| l.edges())
    }

    /// Closed domain membership.
    pub fn contains(&self, p: Point) -> bool {
        self.outer.encloses(p)
            && self.holes.iter().all(|h| h.on_boundary(p) || !h.winds_around(p))
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.loops().any(|l| l.on_boundary(p))
    }

    pub fn contains_interior(&self, p: Point) -> bool {
        self.contains(p) && !self.on_boundary(p)
    }

    pub fn area(&self) -> f64 {
        self.outer.signed_area().abs() - self.holes.iter().map(|h| h.signed_area().abs()).sum::<f64>()
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.outer.vertices;
        let mut d: f64 = 0.0;
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bbox(&self) -> (Point, Point) {
        let v = &self.outer.vertices;
        let mut lo = v[0];
        let mut hi = v[0];
        for p in v {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Kind of the boundary edge containing the whole segment `s`, if any.
    pub fn boundary_kind_of(&self, s: &Segment) -> Option<BoundaryKind> {
        self.boundary_segments()
            .find(|(e, _)| e.dist_to_point(s.a) <= GEOM_TOL && e.dist_to_point(s.b) <= GEOM_TOL)
            .map(|(_, k)| k)
    }

    fn part(&self, kind: BoundaryKind) -> Crack {
        let polylines = self
            .boundary_segments()
            .filter(|(_, k)| *k == kind)
            .map(|(s, _)| vec![s.a, s.b])
            .collect();
        Crack::from_polylines_unchecked(polylines)
    }

    /// The Neumann boundary as a union of segments.
    pub fn neumann_part(&self) -> Crack {
        self.part(BoundaryKind::Neumann)
    }

    pub fn dirichlet_part(&self) -> Crack {
        self.part(BoundaryKind::Dirichlet)
    }

    /// Number of connected components of the Dirichlet boundary.
    pub fn dirichlet_arc_count(&self) -> usize {
        super::components(&self.dirichlet_part(), &Crack::empty()).len()
    }

    pub fn neumann_arc_count(&self) -> usize {
        super::components(&self.neumann_part(), &Crack::empty()).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryKind::{Dirichlet as D, Neumann as N};

    #[test]
    fn unit_square_basics() {
        let d = Domain::unit_square([N, D, N, D]);
        assert_eq!(d.area(), 1.0);
        assert!((d.diameter() - 2f64.sqrt()).abs() < 1e-15);
        assert!(d.contains(Point::new(1.0, 0.5)));
        assert!(!d.contains_interior(Point::new(1.0, 0.5)));
        assert!(!d.contains(Point::new(1.1, 0.5)));
        assert_eq!(d.dirichlet_arc_count(), 2);
        assert_eq!(d.neumann_arc_count(), 2);
        assert!((d.neumann_part().h1_length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_arcs_merge_at_corners() {
        let d = Domain::unit_square([D, D, N, N]);
        assert_eq!(d.dirichlet_arc_count(), 1);
        assert_eq!(d.neumann_arc_count(), 1);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Domain::rectangle(0.0, 0.0, 1.0, 1.0, [N; 4]).is_err());
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(BoundaryLoop::uniform(bowtie, D).is_err());
        let outer = BoundaryLoop::uniform(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
            D,
        )
        .unwrap();
        let far_hole = BoundaryLoop::uniform(
            vec![Point::new(2.0, 2.0), Point::new(3.0, 2.0), Point::new(3.0, 3.0)],
            N,
        )
        .unwrap();
        assert!(Domain::new(outer, vec![far_hole]).is_err());
    }

    #[test]
    fn holes_are_excluded() {
        let outer = BoundaryLoop::uniform(
            vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 3.0), Point::new(0.0, 3.0)],
            D,
        )
        .unwrap();
        let hole = BoundaryLoop::uniform(
            vec![Point::new(1.0, 1.0), Point::new(2.0, 1.0), Point::new(2.0, 2.0), Point::new(1.0, 2.0)],
            N,
        )
        .unwrap();
        let d = Domain::new(outer, vec![hole]).unwrap();
        assert_eq!(d.area(), 8.0);
        assert!(!d.contains(Point::new(1.5, 1.5)));
        assert!(d.contains(Point::new(1.0, 1.5)));
        assert!(!d.is_simply_connected());
    }

    #[test]
    fn json_round_trip() {
        let d = Domain::unit_square([D, N, D, N]);
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"boundary_edges\":[\"dirichlet\",\"neumann\""));
        let back: Domain = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"vertices":[[0,0],[1,0],[0,1]],"boundary_edges":["neumann","neumann","neumann"]}"#;
        assert!(serde_json::from_str::<Domain>(bad).is_err());
    }
}
