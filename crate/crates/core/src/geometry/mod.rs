//! Polygonal domains, polyline cracks and the set-level constructions used
//! by the stability experiments.

mod crack;
mod domain;
mod hausdorff;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

pub use crack::{
    components, extend_sequence, join_components, Crack, Joined,
};
pub use domain::{BoundaryKind, BoundaryLoop, Domain};
pub use hausdorff::{directed_hausdorff, hausdorff_distance};

/// Coincidence tolerance for points and segment distances.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Closed segment `[a, b]`; `a == b` encodes a single point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn is_point(&self) -> bool {
        self.length() <= GEOM_TOL
    }

    /// Closest point of the segment to `p`.
    pub fn closest_point(&self, p: Point) -> Point {
        let e = self.b - self.a;
        let l2 = e.norm2();
        if l2 == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(e) / l2).clamp(0.0, 1.0);
        self.a.lerp(self.b, t)
    }

    pub fn dist_to_point(&self, p: Point) -> f64 {
        p.dist(self.closest_point(p))
    }

    pub fn intersects(&self, o: &Segment) -> bool {
        segments_intersect(self, o)
    }

    /// Distance between two segments together with a closest pair
    /// `(on self, on other)`.
    pub fn closest_pair(&self, o: &Segment) -> (f64, Point, Point) {
        if let Some(x) = intersection_point(self, o) {
            return (0.0, x, x);
        }
        let cands = [
            (self.a, o.closest_point(self.a)),
            (self.b, o.closest_point(self.b)),
            (self.closest_point(o.a), o.a),
            (self.closest_point(o.b), o.b),
        ];
        let mut best = (f64::INFINITY, self.a, o.a);
        for (p, q) in cands {
            let d = p.dist(q);
            if d < best.0 {
                best = (d, p, q);
            }
        }
        best
    }

    pub fn dist_to_segment(&self, o: &Segment) -> f64 {
        self.closest_pair(o).0
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(s: &Segment, p: Point) -> bool {
    s.dist_to_point(p) <= GEOM_TOL
}

fn segments_intersect(s: &Segment, o: &Segment) -> bool {
    intersection_point(s, o).is_some()
}

/// A common point of two closed segments, if any.
fn intersection_point(s: &Segment, o: &Segment) -> Option<Point> {
    for (seg, p) in [(o, s.a), (o, s.b), (s, o.a), (s, o.b)] {
        if on_segment(seg, p) {
            return Some(p);
        }
    }
    let d1 = orient(o.a, o.b, s.a);
    let d2 = orient(o.a, o.b, s.b);
    let d3 = orient(s.a, s.b, o.a);
    let d4 = orient(s.a, s.b, o.b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        let t = d1 / (d1 - d2);
        return Some(s.a.lerp(s.b, t));
    }
    None
}

/// Union-find over `n` items.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Returns false if the two were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // smaller root wins so labels are deterministic
        if ra < rb {
            self.parent[rb] = ra;
        } else {
            self.parent[ra] = rb;
        }
        true
    }

    /// Dense labels `0..k` in order of first appearance.
    pub fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut k = 0;
        for i in 0..n {
            let r = self.find(i);
            if map[r] == usize::MAX {
                map[r] = k;
                k += 1;
            }
            out[i] = map[r];
        }
        (out, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distances() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let o = Segment::new(Point::new(0.5, 1.0), Point::new(0.5, 2.0));
        assert!((s.dist_to_segment(&o) - 1.0).abs() < 1e-15);
        let crossing = Segment::new(Point::new(0.5, -1.0), Point::new(0.5, 1.0));
        assert_eq!(s.dist_to_segment(&crossing), 0.0);
        let (d, p, q) = s.closest_pair(&Segment::new(Point::new(2.0, 1.0), Point::new(3.0, 1.0)));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p, Point::new(1.0, 0.0));
        assert_eq!(q, Point::new(2.0, 1.0));
    }

    #[test]
    fn touching_endpoints_intersect() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let o = Segment::new(Point::new(1.0, 0.0), Point::new(1.0, 1.0));
        assert!(s.intersects(&o));
        let p = Segment::new(Point::new(0.3, 0.0), Point::new(0.3, 0.0));
        assert!(s.intersects(&p));
    }

    #[test]
    fn disjoint_sets_labels() {
        let mut ds = DisjointSets::new(5);
        ds.union(3, 1);
        ds.union(4, 0);
        let (labels, k) = ds.labels();
        assert_eq!(k, 3);
        assert_eq!(labels, vec![0, 1, 2, 1, 0]);
    }
}
