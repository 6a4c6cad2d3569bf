//! Structured crack-conforming triangulations.
//!
//! The bounding box of the domain is cut into `n x n` cells, each split
//! along its `(i, j)-(i+1, j+1)` diagonal. Triangles whose centroid lies in
//! the domain are kept. Crack segments must run along grid edges; around
//! every grid node the incident triangles are grouped into fans that are
//! connected through non-crack edges, and each fan gets its own node copy.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::geometry::{components, BoundaryKind, Crack, DisjointSets, Domain, Point, Segment};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeTag {
    Dirichlet,
    Neumann,
    Interior,
    CrackSide,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshNode {
    pub x: Point,
    /// Index of the underlying grid point.
    pub grid: usize,
    pub tag: NodeTag,
    /// Connected component of `Ω \ K` (discrete).
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    /// Node copies, counter-clockwise.
    pub nodes: [usize; 3],
    pub grid: [usize; 3],
    /// `edges[k]` is opposite local vertex `k`.
    pub edges: [usize; 3],
    pub area: f64,
    pub centroid: Point,
    /// Gradients of the three hat functions.
    pub grads: [[f64; 2]; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshEdge {
    pub grid: [usize; 2],
    /// One or two triangles, regardless of the crack.
    pub triangles: Vec<usize>,
    pub crack: bool,
    pub boundary: Option<BoundaryKind>,
}

impl MeshEdge {
    pub fn is_interior(&self) -> bool {
        self.triangles.len() == 2
    }
}

#[derive(Clone, Debug)]
pub struct CrackedMesh {
    domain: Domain,
    crack: Crack,
    n: usize,
    origin: Point,
    hx: f64,
    hy: f64,
    grid_points: Vec<Point>,
    nodes: Vec<MeshNode>,
    triangles: Vec<Triangle>,
    edges: Vec<MeshEdge>,
    cell_triangles: Vec<[Option<usize>; 2]>,
    component_count: usize,
}

fn hat_gradients(p: [Point; 3]) -> (f64, [[f64; 2]; 3]) {
    let a2 = (p[1] - p[0]).cross(p[2] - p[0]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (pj, pk) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        g[i] = [(pj.y - pk.y) / a2, (pk.x - pj.x) / a2];
    }
    (0.5 * a2, g)
}

impl CrackedMesh {
    pub fn build(domain: &Domain, crack: &Crack, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("mesh resolution must be positive".into()));
        }
        crack.validate_in(domain)?;
        let (lo, hi) = domain.bbox();
        let (hx, hy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
        let m = n + 1;
        let gid = |i: usize, j: usize| j * m + i;
        let grid_points: Vec<Point> = (0..m * m)
            .map(|k| Point::new(lo.x + (k % m) as f64 * hx, lo.y + (k / m) as f64 * hy))
            .collect();

        let crack_edges = snap_crack(crack, lo, hx, hy, n)?;

        // triangles
        let mut tri_grid: Vec<[usize; 3]> = Vec::new();
        let mut cell_triangles = vec![[None, None]; n * n];
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1));
                for (k, t) in [[a, b, c], [a, c, d]].into_iter().enumerate() {
                    let cen = (grid_points[t[0]] + grid_points[t[1]] + grid_points[t[2]]) * (1.0 / 3.0);
                    if domain.contains(cen) {
                        cell_triangles[j * n + i][k] = Some(tri_grid.len());
                        tri_grid.push(t);
                    }
                }
            }
        }
        if tri_grid.is_empty() {
            return Err(Error::ResolutionTooCoarse("no grid triangle lies in the domain".into()));
        }

        // edges
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut tri_edges = vec![[0usize; 3]; tri_grid.len()];
        for (t, g) in tri_grid.iter().enumerate() {
            for k in 0..3 {
                let (u, v) = (g[(k + 1) % 3], g[(k + 2) % 3]);
                let key = (u.min(v), u.max(v));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge {
                        grid: [key.0, key.1],
                        triangles: Vec::new(),
                        crack: crack_edges.contains(&key),
                        boundary: None,
                    });
                    edges.len() - 1
                });
                edges[e].triangles.push(t);
                tri_edges[t][k] = e;
            }
        }
        for key in &crack_edges {
            if !edge_index.contains_key(key) {
                return Err(Error::InvalidCrack("crack runs outside the triangulated region".into()));
            }
        }
        for e in edges.iter_mut().filter(|e| e.triangles.len() == 1) {
            let s = Segment::new(grid_points[e.grid[0]], grid_points[e.grid[1]]);
            e.boundary = Some(domain.boundary_kind_of(&s).unwrap_or_else(|| nearest_kind(domain, &s)));
        }

        // fans around each grid point
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); m * m];
        for (t, g) in tri_grid.iter().enumerate() {
            for &v in g {
                incident[v].push(t);
            }
        }
        let mut nodes = Vec::new();
        let mut tri_nodes = vec![[usize::MAX; 3]; tri_grid.len()];
        for v in 0..m * m {
            let fan = &incident[v];
            if fan.is_empty() {
                continue;
            }
            let mut ds = DisjointSets::new(fan.len());
            let mut fan_edges: Vec<(usize, usize)> = Vec::new(); // (edge, local fan index)
            for (a, &t) in fan.iter().enumerate() {
                for &e in &tri_edges[t] {
                    if edges[e].grid.contains(&v) {
                        fan_edges.push((e, a));
                    }
                }
            }
            for (x, &(e, a)) in fan_edges.iter().enumerate() {
                if edges[e].crack {
                    continue;
                }
                for &(f, b) in &fan_edges[x + 1..] {
                    if f == e {
                        ds.union(a, b);
                    }
                }
            }
            let (labels, groups) = ds.labels();
            let first = nodes.len();
            for gi in 0..groups {
                let mut dirichlet = false;
                let mut on_crack = groups > 1;
                let mut on_boundary = false;
                for &(e, a) in &fan_edges {
                    if labels[a] != gi {
                        continue;
                    }
                    let ed = &edges[e];
                    on_crack |= ed.crack;
                    if let Some(kind) = ed.boundary {
                        on_boundary = true;
                        dirichlet |= kind == BoundaryKind::Dirichlet && !ed.crack;
                    }
                }
                let tag = if dirichlet {
                    NodeTag::Dirichlet
                } else if on_crack {
                    NodeTag::CrackSide
                } else if on_boundary {
                    NodeTag::Neumann
                } else {
                    NodeTag::Interior
                };
                nodes.push(MeshNode { x: grid_points[v], grid: v, tag, component: 0 });
            }
            for (a, &t) in fan.iter().enumerate() {
                let k = tri_grid[t].iter().position(|&w| w == v).unwrap();
                tri_nodes[t][k] = first + labels[a];
            }
        }

        let triangles: Vec<Triangle> = tri_grid
            .iter()
            .enumerate()
            .map(|(t, g)| {
                let p = [grid_points[g[0]], grid_points[g[1]], grid_points[g[2]]];
                let (area, grads) = hat_gradients(p);
                Triangle {
                    nodes: tri_nodes[t],
                    grid: *g,
                    edges: tri_edges[t],
                    area,
                    centroid: (p[0] + p[1] + p[2]) * (1.0 / 3.0),
                    grads,
                }
            })
            .collect();

        let mut ds = DisjointSets::new(nodes.len());
        for t in &triangles {
            ds.union(t.nodes[0], t.nodes[1]);
            ds.union(t.nodes[0], t.nodes[2]);
        }
        let (labels, component_count) = ds.labels();
        for (node, c) in nodes.iter_mut().zip(labels) {
            node.component = c;
        }

        let mesh = Self {
            domain: domain.clone(),
            crack: crack.clone(),
            n,
            origin: lo,
            hx,
            hy,
            grid_points,
            nodes,
            triangles,
            edges,
            cell_triangles,
            component_count,
        };
        mesh.check_crack_components()?;
        Ok(mesh)
    }

    fn check_crack_components(&self) -> Result<()> {
        let solid: Vec<Vec<Point>> = self
            .crack
            .polylines()
            .iter()
            .filter(|pl| pl.len() > 1)
            .cloned()
            .collect();
        let expected = components(&Crack::new(solid)?, &Crack::empty()).len();
        let mut ds = DisjointSets::new(self.grid_points.len());
        let mut used = BTreeSet::new();
        for e in self.edges.iter().filter(|e| e.crack) {
            ds.union(e.grid[0], e.grid[1]);
            used.insert(e.grid[0]);
        }
        let roots: BTreeSet<usize> = used.into_iter().map(|v| ds.find(v)).collect();
        if roots.len() != expected {
            return Err(Error::ResolutionTooCoarse(format!(
                "crack has {expected} components but the mesh resolves {}",
                roots.len()
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn crack(&self) -> &Crack {
        &self.crack
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Cell widths `(hx, hy)`.
    pub fn cell_size(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    pub fn nodes(&self) -> &[MeshNode] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn grid_points(&self) -> &[Point] {
        &self.grid_points
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// Number of extra node copies created along cracks.
    pub fn duplicated_count(&self) -> usize {
        let distinct: BTreeSet<usize> = self.nodes.iter().map(|n| n.grid).collect();
        self.nodes.len() - distinct.len()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let g = self.edges[e].grid;
        self.grid_points[g[0]].lerp(self.grid_points[g[1]], 0.5)
    }

    /// Triangle containing `p`; points on shared edges go to the lower-left
    /// cell and the lower triangle.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let fx = (p.x - self.origin.x) / self.hx;
        let fy = (p.y - self.origin.y) / self.hy;
        let n = self.n as f64;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= n && fy <= n) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.n - 1);
        let j = (fy.floor() as usize).min(self.n - 1);
        let lower = fx - i as f64 >= fy - j as f64;
        self.cell_triangles[j * self.n + i][if lower { 0 } else { 1 }]
    }
}

/// Checks that every crack segment runs along edges of the resolution-`n`
/// grid over the domain's bounding box.
pub fn check_grid_aligned(domain: &Domain, crack: &Crack, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("mesh resolution must be positive".into()));
    }
    let (lo, hi) = domain.bbox();
    snap_crack(crack, lo, (hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64, n).map(|_| ())
}

fn nearest_kind(domain: &Domain, s: &Segment) -> BoundaryKind {
    let m = s.a.lerp(s.b, 0.5);
    domain
        .boundary_segments()
        .min_by(|a, b| a.0.dist_to_point(m).total_cmp(&b.0.dist_to_point(m)))
        .map(|(_, k)| k)
        .unwrap_or(BoundaryKind::Dirichlet)
}

/// Grid-edge keys `(min, max)` covered by the crack.
fn snap_crack(crack: &Crack, lo: Point, hx: f64, hy: f64, n: usize) -> Result<BTreeSet<(usize, usize)>> {
    let m = n + 1;
    let to_grid = |p: Point| -> Result<(i64, i64)> {
        let fx = (p.x - lo.x) / hx;
        let fy = (p.y - lo.y) / hy;
        let (i, j) = (fx.round(), fy.round());
        if (fx - i).abs() > 1e-9 || (fy - j).abs() > 1e-9 {
            return Err(Error::NotGridAligned(format!(
                "crack vertex ({}, {}) is not a grid node at resolution {n}",
                p.x, p.y
            )));
        }
        Ok((i as i64, j as i64))
    };
    let mut out = BTreeSet::new();
    for s in crack.segments() {
        if s.is_point() {
            continue;
        }
        let (a, b) = (to_grid(s.a)?, to_grid(s.b)?);
        let (di, dj) = (b.0 - a.0, b.1 - a.1);
        let steps = di.abs().max(dj.abs());
        let aligned = di == 0 || dj == 0 || di == dj;
        if !aligned || steps == 0 {
            return Err(Error::NotGridAligned(format!(
                "crack segment ({}, {})-({}, {}) does not follow grid edges",
                s.a.x, s.a.y, s.b.x, s.b.y
            )));
        }
        let (si, sj) = (di.signum(), dj.signum());
        for k in 0..steps {
            let u = ((a.0 + k * si) as usize, (a.1 + k * sj) as usize);
            let v = ((a.0 + (k + 1) * si) as usize, (a.1 + (k + 1) * sj) as usize);
            let (gu, gv) = (u.1 * m + u.0, v.1 * m + v.0);
            out.insert((gu.min(gv), gu.max(gv)));
        }
    }
    Ok(out)
}
