//! Discrete `(1, r)`-capacity of a set `E` relative to a container `B`.
//!
//! `B`'s bounding box is meshed with `n` cells per side. The potential is
//! held at 0 at every node outside the interior of `B` and at 1 at every
//! node that marks `E`:
//!
//! * for a crack or point set, nodes within ℓ∞ distance one cell of `E`;
//! * for a polygonal region, nodes in the closed region.
//!
//! The capacity is `min Σ_T |T| |∇u_T|^r` over the remaining nodal values.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{BoundaryKind, BoundaryLoop, Crack, Domain, Point, Segment};
use crate::mesh::CrackedMesh;
use crate::solver::{flux_floor, NodalProblem, EL_TOL, MAX_ITERATIONS};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapacitySet {
    /// Points and segments.
    Crack { crack: Crack },
    /// Closed polygonal region.
    Region { polygon: Vec<Point> },
}

impl CapacitySet {
    pub fn point(p: Point) -> Self {
        Self::Crack { crack: Crack::point(p) }
    }

    pub fn disk(center: Point, radius: f64, sides: usize) -> Self {
        let polygon = (0..sides)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / sides as f64;
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Self::Region { polygon }
    }

    fn vertices(&self) -> Vec<Point> {
        match self {
            Self::Crack { crack } => crack.points().collect(),
            Self::Region { polygon } => polygon.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: f64,
    pub mesh: Arc<CrackedMesh>,
    /// Minimizing potential at the mesh nodes.
    pub potential: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Does the closed box `|x - c| <= hx, |y - c| <= hy` meet the segment?
fn box_meets_segment(c: Point, hx: f64, hy: f64, s: &Segment) -> bool {
    let (tx, ty) = (hx * (1.0 + 1e-12), hy * (1.0 + 1e-12));
    let d = s.b - s.a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, s.a.x - (c.x - tx)),
        (d.x, (c.x + tx) - s.a.x),
        (-d.y, s.a.y - (c.y - ty)),
        (d.y, (c.y + ty) - s.a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    t0 <= t1
}

pub fn capacity(e: &CapacitySet, b: &Domain, r: f64, n: usize) -> Result<CapacityResult> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("capacity exponent must lie in (1, inf), got {r}")));
    }
    if e.vertices().iter().any(|&p| !b.contains(p)) {
        return Err(Error::NotContained("set is not contained in the container".into()));
    }
    let region = match e {
        CapacitySet::Region { polygon } => Some(BoundaryLoop::uniform(polygon.clone(), BoundaryKind::Dirichlet)?),
        CapacitySet::Crack { .. } => None,
    };
    let (lo, hi) = b.bbox();
    let boxdom = Domain::rectangle(lo.x, lo.y, hi.x, hi.y, [BoundaryKind::Dirichlet; 4])?;
    let mesh = Arc::new(CrackedMesh::build(&boxdom, &Crack::empty(), n)?);
    let (hx, hy) = mesh.cell_size();
    let segs = match e {
        CapacitySet::Crack { crack } => crack.segments(),
        CapacitySet::Region { .. } => Vec::new(),
    };
    let fixed: Vec<Option<f64>> = mesh
        .nodes()
        .iter()
        .map(|node| {
            let x = node.x;
            if !b.contains_interior(x) {
                Some(0.0)
            } else if let Some(reg) = &region {
                reg.encloses(x).then_some(1.0)
            } else {
                segs.iter().any(|s| box_meets_segment(x, hx, hy, s)).then_some(1.0)
            }
        })
        .collect();
    let admissible: Vec<bool> = fixed.iter().map(Option::is_none).collect();
    let coeff = vec![1.0; mesh.triangles().len()];
    let floor = flux_floor(&mesh, &coeff, r, 1.0);
    let problem = NodalProblem { mesh: &mesh, coeff: &coeff, p: r, fixed, flux_floor: floor };
    let out = problem.minimize(1.0, &admissible, EL_TOL, MAX_ITERATIONS, None)?;
    Ok(CapacityResult {
        value: out.energy,
        mesh: mesh.clone(),
        potential: out.values,
        iterations: out.iterations,
        residual: out.residual,
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk() -> Domain {
        Domain::regular_polygon(Point::new(0.0, 0.0), 1.0, 256, BoundaryKind::Dirichlet).unwrap()
    }

    #[test]
    fn empty_set_has_zero_capacity() {
        let c = capacity(&CapacitySet::Crack { crack: Crack::empty() }, &unit_disk(), 2.0, 16).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn rejects_sets_outside_the_container() {
        let e = CapacitySet::point(Point::new(2.0, 0.0));
        assert!(matches!(capacity(&e, &unit_disk(), 2.0, 16), Err(Error::NotContained(_))));
    }

    #[test]
    fn box_segment_test() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!(box_meets_segment(Point::new(0.5, 0.6), 0.1, 0.1, &s));
        assert!(box_meets_segment(Point::new(0.6, 0.5), 0.1, 0.1, &s));
        assert!(box_meets_segment(Point::new(0.7, 0.5), 0.1, 0.1, &s));
        assert!(!box_meets_segment(Point::new(0.71, 0.5), 0.1, 0.1, &s));
        let p = Segment::new(Point::new(0.2, 0.2), Point::new(0.2, 0.2));
        assert!(box_meets_segment(Point::new(0.3, 0.1), 0.1, 0.1, &p));
        assert!(!box_meets_segment(Point::new(0.31, 0.1), 0.1, 0.1, &p));
    }

    #[test]
    fn nested_sets_have_ordered_capacities() {
        let b = unit_disk();
        let small = CapacitySet::Crack { crack: Crack::segment(Point::new(-0.25, 0.0), Point::new(0.0, 0.0)) };
        let big = CapacitySet::Crack { crack: Crack::segment(Point::new(-0.25, 0.0), Point::new(0.25, 0.0)) };
        let cs = capacity(&small, &b, 3.0, 16).unwrap().value;
        let cb = capacity(&big, &b, 3.0, 16).unwrap().value;
        assert!(cs > 0.0 && cs <= cb);
    }
}
