//! Conjugate potentials of the rotated flux.
//!
//! For a solution `u` with flux `σ_T = f_ξ(x_T, ∇u_T)`, the potential `v`
//! is affine on each triangle with `∇v = Rσ_T`, `R(y1, y2) = (-y2, y1)`, and
//! is matched at edge midpoints along a spanning tree of the triangle
//! adjacency graph (adjacency across cracks included). Walking once
//! around a vertex `z` through the midpoints of the edges at `z` gives
//! `Σ_T Rσ_T·(b - a)/2 = -Σ_T |T| σ_T·∇φ_z`, so the circulation of `v`
//! is the Euler-Lagrange pairing of `u`, summed over the copies of `z`.
//! Along a crack side or a Neumann arc, midpoint differences of `v` are the
//! pairings of the open fans, so `v` is constant there exactly when `u`
//! solves the equation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::geometry::{BoundaryKind, DisjointSets, Point};
use crate::mesh::{CrackedMesh, NodeTag};
use crate::solver::{el_residual, flux_q_norm, FieldSolution, EL_TOL};
use crate::{Error, Result};

/// `R(y1, y2) = (-y2, y1)`.
pub fn rotate(y: [f64; 2]) -> [f64; 2] {
    [-y[1], y[0]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Triangle-wise `|∇v - Rσ|`, relative to `max(1, |σ|)`.
    pub gradient: f64,
    /// Normalized vertex circulation.
    pub circulation: f64,
    /// Oscillation on a component relative to `‖v‖∞`.
    pub oscillation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gradient: 1e-10, circulation: 1e-8, oscillation: 1e-6 }
    }
}

/// Oscillation of `v` over one component of `K ∪ ∂_N Ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    /// Mesh edges making up the component.
    pub edges: Vec<usize>,
    /// `max v - min v` over the midpoint values on both sides.
    pub oscillation: f64,
    pub crack_edges: usize,
    pub neumann_edges: usize,
}

#[derive(Clone, Debug)]
pub struct ConjugateField {
    mesh: Arc<CrackedMesh>,
    /// Covered triangles, ascending.
    triangles: Vec<usize>,
    /// `v` at the centroid of each covered triangle.
    centroid_values: Vec<f64>,
    gradients: Vec<[f64; 2]>,
    /// Normalization `‖σ‖_q` (floored as for the residual).
    flux_norm: f64,
    /// Normalized circulation per interior grid vertex.
    circulation: BTreeMap<usize, f64>,
    components: Vec<ComponentReport>,
    sup_norm: f64,
    /// Bound on the residual derived from the certificate quantities.
    residual_bound: Option<f64>,
}

impl ConjugateField {
    pub fn mesh(&self) -> &CrackedMesh {
        &self.mesh
    }

    pub fn triangles(&self) -> &[usize] {
        &self.triangles
    }

    pub fn gradients(&self) -> &[[f64; 2]] {
        &self.gradients
    }

    pub fn centroid_values(&self) -> &[f64] {
        &self.centroid_values
    }

    fn local(&self, t: usize) -> Option<usize> {
        self.triangles.binary_search(&t).ok()
    }

    /// Value of the affine piece on mesh triangle `t` at `x`.
    pub fn value_on(&self, t: usize, x: Point) -> Option<f64> {
        let k = self.local(t)?;
        let c = self.mesh.triangles()[t].centroid;
        let g = self.gradients[k];
        Some(self.centroid_values[k] + g[0] * (x.x - c.x) + g[1] * (x.y - c.y))
    }

    /// `(edge, triangle, v_T(midpoint))` for every covered triangle side.
    pub fn midpoint_values(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &t in &self.triangles {
            for &e in &self.mesh.triangles()[t].edges {
                let m = self.mesh.edge_midpoint(e);
                out.push((e, t, self.value_on(t, m).unwrap()));
            }
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    pub fn circulation(&self) -> &BTreeMap<usize, f64> {
        &self.circulation
    }

    pub fn max_circulation(&self) -> f64 {
        self.circulation.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn components(&self) -> &[ComponentReport] {
        &self.components
    }

    pub fn max_oscillation(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.oscillation))
    }

    /// `max |v|` over midpoint values.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn flux_norm(&self) -> f64 {
        self.flux_norm
    }

    pub fn residual_bound(&self) -> Option<f64> {
        self.residual_bound
    }
}

/// Global conjugate of a converged solution on a simply connected domain.
pub fn build_conjugate(sol: &FieldSolution) -> Result<ConjugateField> {
    if !sol.mesh().domain().is_simply_connected() {
        return Err(Error::NotSimplyConnected);
    }
    let r = el_residual(sol);
    if !(r <= EL_TOL) {
        return Err(Error::Unconverged(r));
    }
    integrate_conjugate(sol)
}

/// Same construction without the convergence and topology checks, for
/// certifying (or refuting) arbitrary fields.
pub fn integrate_conjugate(sol: &FieldSolution) -> Result<ConjugateField> {
    let all: Vec<usize> = (0..sol.mesh().triangles().len()).collect();
    integrate_on(sol, all, None, true)
}

/// As [`integrate_conjugate`] with the spanning tree rooted at triangle
/// `root` instead of triangle 0.
pub fn integrate_conjugate_rooted(sol: &FieldSolution, root: usize) -> Result<ConjugateField> {
    let all: Vec<usize> = (0..sol.mesh().triangles().len()).collect();
    if root >= all.len() {
        return Err(Error::InvalidParameter(format!("no triangle {root}")));
    }
    integrate_on(sol, all, Some(root), true)
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    /// Closed containment.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Conjugate restricted to the triangles lying in the closed rectangle `u`,
/// which must form a nonempty simply connected region.
pub fn build_local_conjugate(sol: &FieldSolution, u: Rect) -> Result<ConjugateField> {
    let mesh = sol.mesh();
    let tris: Vec<usize> = mesh
        .triangles()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.grid.iter().all(|&g| u.contains(mesh.grid_points()[g])))
        .map(|(i, _)| i)
        .collect();
    if tris.is_empty() {
        return Err(Error::InvalidParameter("rectangle does not meet the domain".into()));
    }
    if !simply_connected(mesh, &tris) {
        return Err(Error::NotSimplyConnected);
    }
    let r = el_residual(sol);
    if !(r <= EL_TOL) {
        return Err(Error::Unconverged(r));
    }
    integrate_on(sol, tris, None, false)
}

/// Connected (through shared edges) with Euler characteristic 1.
fn simply_connected(mesh: &CrackedMesh, tris: &[usize]) -> bool {
    let set: BTreeSet<usize> = tris.iter().copied().collect();
    let mut verts = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for &t in tris {
        verts.extend(mesh.triangles()[t].grid);
        edges.extend(mesh.triangles()[t].edges);
    }
    let chi = verts.len() as i64 - edges.len() as i64 + tris.len() as i64;
    let reached = bfs_order(mesh, &set, tris[0]).len();
    chi == 1 && reached == tris.len()
}

/// Breadth-first order `(triangle, parent, shared edge)` over geometric
/// adjacency inside `set`.
fn bfs_order(mesh: &CrackedMesh, set: &BTreeSet<usize>, root: usize) -> Vec<(usize, Option<(usize, usize)>)> {
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut out = vec![(root, None)];
    while let Some(t) = queue.pop_front() {
        for &e in &mesh.triangles()[t].edges {
            for &s in &mesh.edges()[e].triangles {
                if s != t && set.contains(&s) && seen.insert(s) {
                    out.push((s, Some((t, e))));
                    queue.push_back(s);
                }
            }
        }
    }
    out
}

fn integrate_on(sol: &FieldSolution, tris: Vec<usize>, root: Option<usize>, global: bool) -> Result<ConjugateField> {
    let mesh = sol.mesh_arc().clone();
    let fluxes = sol.fluxes();
    let set: BTreeSet<usize> = tris.iter().copied().collect();
    let n = tris.len();
    let index = |t: usize| tris.binary_search(&t).unwrap();
    let gradients: Vec<[f64; 2]> = tris.iter().map(|&t| rotate(fluxes[t])).collect();
    let mut cvals = vec![f64::NAN; n];

    // integrate each connected piece, lowest triangle first
    let mut roots: Vec<usize> = root.into_iter().collect();
    roots.extend(tris.iter().copied());
    for r in roots {
        if !cvals[index(r)].is_nan() {
            continue;
        }
        cvals[index(r)] = 0.0;
        for (t, parent) in bfs_order(&mesh, &set, r) {
            let Some((p, e)) = parent else { continue };
            let m = mesh.edge_midpoint(e);
            let (kp, kt) = (index(p), index(t));
            let cp = mesh.triangles()[p].centroid;
            let ct = mesh.triangles()[t].centroid;
            let gp = gradients[kp];
            let gt = gradients[kt];
            let vm = cvals[kp] + gp[0] * (m.x - cp.x) + gp[1] * (m.y - cp.y);
            cvals[kt] = vm - gt[0] * (m.x - ct.x) - gt[1] * (m.y - ct.y);
        }
    }

    // zero mean
    let area: f64 = tris.iter().map(|&t| mesh.triangles()[t].area).sum();
    let mean = tris.iter().zip(&cvals).map(|(&t, v)| mesh.triangles()[t].area * v).sum::<f64>() / area;
    for v in &mut cvals {
        *v -= mean;
    }

    let flux_norm = flux_q_norm(sol).max(sol.flux_floor());
    let mut field = ConjugateField {
        mesh: mesh.clone(),
        triangles: tris,
        centroid_values: cvals,
        gradients,
        flux_norm,
        circulation: BTreeMap::new(),
        components: Vec::new(),
        sup_norm: 0.0,
        residual_bound: None,
    };
    let mids = field.midpoint_values();
    field.sup_norm = mids.iter().fold(0.0, |m, x| m.max(x.2.abs()));
    field.circulation = circulations(&field, &fluxes);
    field.components = component_reports(&field, &mids);
    if global {
        field.residual_bound = Some(residual_bound(&field, &mids));
    }
    Ok(field)
}

fn circulations(field: &ConjugateField, fluxes: &[[f64; 2]]) -> BTreeMap<usize, f64> {
    let mesh = &field.mesh;
    let set: BTreeSet<usize> = field.triangles.iter().copied().collect();
    // an interior vertex has every incident edge shared by two covered
    // triangles
    let mut boundary_vertex = BTreeSet::new();
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for &t in &field.triangles {
        let tri = &mesh.triangles()[t];
        for &e in &tri.edges {
            let covered = mesh.edges()[e].triangles.iter().filter(|s| set.contains(s)).count();
            if covered < 2 {
                boundary_vertex.extend(mesh.edges()[e].grid);
            }
        }
        let rs = rotate(fluxes[t]);
        let pts = mesh.grid_points();
        for k in 0..3 {
            let z = tri.grid[k];
            let (a, b) = (pts[tri.grid[(k + 1) % 3]], pts[tri.grid[(k + 2) % 3]]);
            *acc.entry(z).or_insert(0.0) += 0.5 * (rs[0] * (b.x - a.x) + rs[1] * (b.y - a.y));
        }
    }
    acc.into_iter()
        .filter(|(z, _)| !boundary_vertex.contains(z))
        .map(|(z, c)| (z, c / field.flux_norm))
        .collect()
}

/// Edges carrying the constancy condition: crack edges and Neumann
/// boundary edges of the domain.
fn is_free_edge(mesh: &CrackedMesh, e: usize) -> bool {
    let ed = &mesh.edges()[e];
    ed.crack || ed.boundary == Some(BoundaryKind::Neumann)
}

fn component_reports(field: &ConjugateField, mids: &[(usize, usize, f64)]) -> Vec<ComponentReport> {
    let mesh = &field.mesh;
    let free: BTreeSet<usize> = mids.iter().map(|m| m.0).filter(|&e| is_free_edge(mesh, e)).collect();
    let list: Vec<usize> = free.iter().copied().collect();
    let mut ds = DisjointSets::new(list.len());
    let mut by_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &e) in list.iter().enumerate() {
        for v in mesh.edges()[e].grid {
            if let Some(&j) = by_vertex.get(&v) {
                ds.union(i, j);
            } else {
                by_vertex.insert(v, i);
            }
        }
    }
    let (labels, count) = ds.labels();
    let mut reports: Vec<ComponentReport> = (0..count)
        .map(|_| ComponentReport { edges: Vec::new(), oscillation: 0.0, crack_edges: 0, neumann_edges: 0 })
        .collect();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); count];
    for (i, &e) in list.iter().enumerate() {
        let c = labels[i];
        reports[c].edges.push(e);
        if mesh.edges()[e].crack {
            reports[c].crack_edges += 1;
        } else {
            reports[c].neumann_edges += 1;
        }
    }
    let pos: BTreeMap<usize, usize> = list.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    for &(e, _, v) in mids {
        if let Some(&i) = pos.get(&e) {
            let r = &mut ranges[labels[i]];
            r.0 = r.0.min(v);
            r.1 = r.1.max(v);
        }
    }
    for (rep, (lo, hi)) in reports.iter_mut().zip(ranges) {
        rep.oscillation = hi - lo;
    }
    reports
}

/// For every copy not carrying Dirichlet data, the pairing equals the
/// telescoped midpoint differences around its fan: the circulation for a
/// closed fan, otherwise the interior midpoint jumps plus the difference
/// between its two end edges, which lie on one component of `K ∪ ∂_N Ω`.
fn residual_bound(field: &ConjugateField, mids: &[(usize, usize, f64)]) -> f64 {
    let mesh = &field.mesh;
    let mut side_values: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(e, t, v) in mids {
        side_values.insert((e, t), v);
    }
    let osc_of_edge: BTreeMap<usize, f64> = field
        .components
        .iter()
        .flat_map(|c| c.edges.iter().map(move |&e| (e, c.oscillation)))
        .collect();
    let mut fans: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &c in &tri.nodes {
            fans.entry(c).or_default().push(t);
        }
    }
    let mut worst: f64 = 0.0;
    for (c, fan) in fans {
        let node = &mesh.nodes()[c];
        if node.tag == NodeTag::Dirichlet {
            continue;
        }
        let z = node.grid;
        if let Some(circ) = field.circulation.get(&z) {
            if mesh.nodes().iter().filter(|n| n.grid == z).count() == 1 {
                worst = worst.max(circ.abs());
                continue;
            }
        }
        let mut seen: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &t in &fan {
            for &e in &mesh.triangles()[t].edges {
                if mesh.edges()[e].grid.contains(&z) {
                    seen.entry(e).or_default().push(t);
                }
            }
        }
        let mut bound = 0.0;
        let mut end_osc: f64 = 0.0;
        for (e, ts) in seen {
            if ts.len() == 2 {
                bound += (side_values[&(e, ts[0])] - side_values[&(e, ts[1])]).abs();
            } else {
                end_osc = end_osc.max(osc_of_edge.get(&e).copied().unwrap_or(f64::INFINITY));
            }
        }
        worst = worst.max((bound + end_osc) / field.flux_norm);
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    /// Worst triangle-wise `|∇v - Rσ| / max(1, |σ|)`.
    pub gradient_error: f64,
    pub max_circulation: f64,
    /// Worst component oscillation relative to `‖v‖∞`.
    pub max_oscillation: f64,
    pub el_residual: f64,
    pub residual_bound: Option<f64>,
    pub pass: bool,
}

/// Certifies `u` through `v`: the gradient identity, zero circulation and
/// constancy on each component of `K ∪ ∂_N Ω`.
pub fn verify_solution_via_conjugate(u: &FieldSolution, v: &ConjugateField) -> Result<Verdict> {
    verify_with(u, v, Tolerances::default())
}

pub fn verify_with(u: &FieldSolution, v: &ConjugateField, tol: Tolerances) -> Result<Verdict> {
    let same = std::ptr::eq(u.mesh(), v.mesh())
        || (u.mesh().triangles() == v.mesh().triangles() && u.mesh().nodes() == v.mesh().nodes());
    if !same {
        return Err(Error::MeshMismatch("solution and conjugate live on different meshes".into()));
    }
    let fluxes = u.fluxes();
    let mut gradient_error: f64 = 0.0;
    for (&t, g) in v.triangles.iter().zip(&v.gradients) {
        let rs = rotate(fluxes[t]);
        let scale = fluxes[t][0].hypot(fluxes[t][1]).max(1.0);
        gradient_error = gradient_error.max((g[0] - rs[0]).hypot(g[1] - rs[1]) / scale);
    }
    let max_circulation = v.max_circulation();
    let max_oscillation = if v.sup_norm > 0.0 { v.max_oscillation() / v.sup_norm } else { v.max_oscillation() };
    let pass = gradient_error <= tol.gradient && max_circulation <= tol.circulation && max_oscillation <= tol.oscillation;
    Ok(Verdict {
        gradient_error,
        max_circulation,
        max_oscillation,
        el_residual: el_residual(u),
        residual_bound: v.residual_bound,
        pass,
    })
}
