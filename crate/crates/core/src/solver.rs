//! Minimization of `Σ_T |T| a_T |∇v_T|^p` over continuous piecewise-linear
//! `v` on a cracked mesh, with prescribed values at selected nodes.

use std::sync::Arc;

use serde::Serialize;

use crate::energy::EnergyDensity;
use crate::expr::Expr;
use crate::geometry::Point;
use crate::linalg::SpdPattern;
use crate::mesh::{CrackedMesh, NodeTag};
use crate::{Error, Result};

/// Default tolerance on the normalized Euler-Lagrange residual.
pub const EL_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;
/// Regularization `ε = EPS_FACTOR * scale` of `|ξ|² + ε²`.
pub const EPS_FACTOR: f64 = 1e-8;
const ARMIJO_C: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Time at which the datum is evaluated.
    pub time: f64,
    /// Starting values for the free nodes (defaults to the `p = 2` solve).
    pub initial: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: EL_TOL, max_iterations: MAX_ITERATIONS, time: 0.0, initial: None }
    }
}

#[derive(Clone, Debug)]
pub struct FieldSolution {
    mesh: Arc<CrackedMesh>,
    density: EnergyDensity,
    datum: Expr,
    time: f64,
    values: Vec<f64>,
    gradients: Vec<[f64; 2]>,
    coefficients: Vec<f64>,
    pinned: Vec<usize>,
    flux_floor: f64,
    diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
}

impl FieldSolution {
    pub fn mesh(&self) -> &CrackedMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<CrackedMesh> {
        &self.mesh
    }

    pub fn density(&self) -> &EnergyDensity {
        &self.density
    }

    pub fn datum(&self) -> &Expr {
        &self.datum
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-triangle constant gradients.
    pub fn gradients(&self) -> &[[f64; 2]] {
        &self.gradients
    }

    /// Density coefficient at each triangle centroid.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Nodes fixed to 0 in components without Dirichlet data.
    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    /// Lower bound used for `‖f_ξ‖_q` when normalizing residuals.
    pub fn flux_floor(&self) -> f64 {
        self.flux_floor
    }

    /// `f_ξ(x_T, ∇u_T)` per triangle.
    pub fn fluxes(&self) -> Vec<[f64; 2]> {
        self.gradients
            .iter()
            .zip(&self.coefficients)
            .map(|(g, &a)| self.density.flux_with(a, *g))
            .collect()
    }

    /// Gradient at `x`; zero outside the mesh. The crack has measure zero,
    /// so the extension by zero never needs to be sampled.
    pub fn gradient_at(&self, x: Point) -> [f64; 2] {
        self.mesh.locate(x).map_or([0.0, 0.0], |t| self.gradients[t])
    }

    /// Builds a solution from given nodal values (no solve); used for
    /// perturbation experiments.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::MeshMismatch("value count differs from node count".into()));
        }
        let gradients = gradients_of(&self.mesh, &values);
        let mut out = Self { values, gradients, ..self.clone() };
        let residual = el_residual(&out);
        out.diagnostics = Diagnostics {
            iterations: 0,
            residual,
            energy: energy_of(&self.mesh, &out.coefficients, self.density.p(), &out.values, 0.0),
        };
        Ok(out)
    }
}

pub(crate) fn gradients_of(mesh: &CrackedMesh, values: &[f64]) -> Vec<[f64; 2]> {
    mesh.triangles()
        .iter()
        .map(|t| {
            let mut g = [0.0; 2];
            for k in 0..3 {
                let u = values[t.nodes[k]];
                g[0] += u * t.grads[k][0];
                g[1] += u * t.grads[k][1];
            }
            g
        })
        .collect()
}

fn energy_of(mesh: &CrackedMesh, coeff: &[f64], p: f64, values: &[f64], eps: f64) -> f64 {
    let e2 = eps * eps;
    mesh.triangles()
        .iter()
        .zip(coeff)
        .map(|(t, &a)| {
            let mut g = [0.0; 2];
            for k in 0..3 {
                let u = values[t.nodes[k]];
                g[0] += u * t.grads[k][0];
                g[1] += u * t.grads[k][1];
            }
            let s = g[0] * g[0] + g[1] * g[1] + e2;
            t.area * a * s.powf(0.5 * p)
        })
        .sum()
}

/// Nodal values to hold fixed; everything else is free.
pub(crate) struct NodalProblem<'a> {
    pub mesh: &'a CrackedMesh,
    pub coeff: &'a [f64],
    pub p: f64,
    pub fixed: Vec<Option<f64>>,
    pub flux_floor: f64,
}

/// Relative size of the floor under `‖f_ξ‖_q`.
const FLUX_FLOOR_FACTOR: f64 = 1e-6;

/// `1e-6 · ‖f_ξ(ξ_ref)‖_q` for a reference gradient of size
/// `scale / diam(Ω)`; keeps residuals of zero-flux solutions from being
/// ratios of round-off.
pub(crate) fn flux_floor(mesh: &CrackedMesh, coeff: &[f64], p: f64, scale: f64) -> f64 {
    let q = p / (p - 1.0);
    let r = scale / mesh.domain().diameter();
    let acc: f64 = mesh
        .triangles()
        .iter()
        .zip(coeff)
        .map(|(t, &a)| t.area * (a * p * r.powf(p - 1.0)).powf(q))
        .sum();
    FLUX_FLOOR_FACTOR * acc.powf(1.0 / q)
}

pub(crate) struct Minimized {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
}

impl NodalProblem<'_> {
    fn free_index(&self) -> (Vec<usize>, Vec<usize>) {
        let mut map = vec![usize::MAX; self.fixed.len()];
        let mut free = Vec::new();
        for (i, f) in self.fixed.iter().enumerate() {
            if f.is_none() {
                map[i] = free.len();
                free.push(i);
            }
        }
        (map, free)
    }

    fn pattern(&self, map: &[usize], nfree: usize) -> Result<SpdPattern> {
        let mut entries = Vec::new();
        for t in self.mesh.triangles() {
            for a in 0..3 {
                for b in 0..a {
                    let (i, j) = (map[t.nodes[a]], map[t.nodes[b]]);
                    if i != usize::MAX && j != usize::MAX && i != j {
                        entries.push((i, j));
                    }
                }
            }
        }
        SpdPattern::new(nfree, entries)
    }

    /// Gradient of the energy with respect to every node, using the
    /// regularization `eps` (0 for the exact functional).
    fn node_gradient(&self, values: &[f64], eps: f64) -> Vec<f64> {
        let p = self.p;
        let e2 = eps * eps;
        let mut g = vec![0.0; values.len()];
        for (t, &a) in self.mesh.triangles().iter().zip(self.coeff) {
            let xi = tri_grad(t, values);
            let s = xi[0] * xi[0] + xi[1] * xi[1] + e2;
            if s == 0.0 {
                continue;
            }
            let c = t.area * a * p * s.powf(0.5 * p - 1.0);
            for k in 0..3 {
                g[t.nodes[k]] += c * (xi[0] * t.grads[k][0] + xi[1] * t.grads[k][1]);
            }
        }
        g
    }

    /// `‖f_ξ‖_q` of the exact flux.
    fn flux_norm(&self, values: &[f64]) -> f64 {
        let p = self.p;
        let q = p / (p - 1.0);
        let mut acc = 0.0;
        for (t, &a) in self.mesh.triangles().iter().zip(self.coeff) {
            let xi = tri_grad(t, values);
            let r = xi[0].hypot(xi[1]);
            acc += t.area * (a * p * r.powf(p - 1.0)).powf(q);
        }
        acc.powf(1.0 / q)
    }

    /// Normalized residual over the admissible (non-fixed-by-data) nodes.
    fn residual(&self, values: &[f64], eps: f64, admissible: &[bool]) -> f64 {
        let norm = self.flux_norm(values).max(self.flux_floor);
        if norm == 0.0 {
            return 0.0;
        }
        let g = self.node_gradient(values, eps);
        g.iter()
            .zip(admissible)
            .filter(|(_, &ok)| ok)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
            / norm
    }

    fn assemble(
        &self,
        pat: &SpdPattern,
        map: &[usize],
        values: &[f64],
        p: f64,
        eps_grad: f64,
        eps_hess: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut h = vec![0.0; pat.len()];
        let mut grad = vec![0.0; pat.dim()];
        for (t, &a) in self.mesh.triangles().iter().zip(self.coeff) {
            let xi = tri_grad(t, values);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            let sg = r2 + eps_grad * eps_grad;
            let sh = r2 + eps_hess * eps_hess;
            let cg = if sg > 0.0 { t.area * a * p * sg.powf(0.5 * p - 1.0) } else { 0.0 };
            let (c1, c2) = if p == 2.0 {
                (2.0 * t.area * a, 0.0)
            } else if sh > 0.0 {
                (
                    t.area * a * p * sh.powf(0.5 * p - 1.0),
                    t.area * a * p * (p - 2.0) * sh.powf(0.5 * p - 2.0),
                )
            } else {
                (0.0, 0.0)
            };
            for k in 0..3 {
                let i = map[t.nodes[k]];
                if i == usize::MAX {
                    continue;
                }
                let gk = t.grads[k];
                let xk = xi[0] * gk[0] + xi[1] * gk[1];
                grad[i] += cg * xk;
                for l in 0..=k {
                    let j = map[t.nodes[l]];
                    if j == usize::MAX {
                        continue;
                    }
                    let gl = t.grads[l];
                    let xl = xi[0] * gl[0] + xi[1] * gl[1];
                    let v = c1 * (gk[0] * gl[0] + gk[1] * gl[1]) + c2 * xk * xl;
                    if l == k {
                        h[pat.slot(i, i)] += v;
                    } else if i == j {
                        // two copies never share a triangle, but guard anyway
                        h[pat.slot(i, i)] += 2.0 * v;
                    } else {
                        h[pat.slot(i, j)] += v;
                    }
                }
            }
        }
        (h, grad)
    }

    /// Newton with Armijo backtracking. `scale` sets `ε`; `admissible`
    /// marks nodes whose hat functions enter the residual.
    pub fn minimize(
        &self,
        scale: f64,
        admissible: &[bool],
        tol: f64,
        max_iterations: usize,
        initial: Option<&[f64]>,
    ) -> Result<Minimized> {
        let (map, free) = self.free_index();
        let pat = self.pattern(&map, free.len())?;
        let mut u: Vec<f64> = self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        let eps_final = EPS_FACTOR * scale;

        // p = 2 weighted solve as the starting point
        match initial {
            Some(init) => {
                if init.len() != u.len() {
                    return Err(Error::InvalidParameter("initial guess has wrong length".into()));
                }
                for &i in &free {
                    u[i] = init[i];
                }
            }
            None => {
                let (h, g) = self.assemble(&pat, &map, &u, 2.0, 0.0, 0.0);
                let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
                let d = pat.solve_regularized(&h, diag_scale(&h, &pat), &rhs)?;
                for (k, &i) in free.iter().enumerate() {
                    u[i] += d[k];
                }
            }
        }

        let stages: Vec<f64> = if self.p < 2.0 {
            vec![1e-2 * scale, 1e-5 * scale, eps_final, 0.0]
        } else {
            vec![0.0]
        };
        let mut iterations = 0;
        'stages: for (si, &eps_grad) in stages.iter().enumerate() {
            let last = si + 1 == stages.len();
            let eps_hess = eps_grad.max(eps_final);
            loop {
                if self.residual(&u, 0.0, admissible) <= tol {
                    break 'stages;
                }
                let res = self.residual(&u, eps_grad, admissible);
                if res <= tol {
                    break;
                }
                if iterations >= max_iterations {
                    if last {
                        return Err(Error::NonConvergence { iterations, residual: res });
                    }
                    break;
                }
                iterations += 1;
                let (h, g) = self.assemble(&pat, &map, &u, self.p, eps_grad, eps_hess);
                let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
                let d = pat.solve_regularized(&h, diag_scale(&h, &pat), &rhs)?;
                let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                let e0 = energy_of(self.mesh, self.coeff, self.p, &u, eps_grad);
                if -slope <= 1e-10 * e0.abs() {
                    // predicted decrease is below the round-off of the
                    // energy; judge the full step by the residual instead
                    let trial = step(&u, &free, &d, 1.0);
                    if self.residual(&trial, eps_grad, admissible) < res {
                        u = trial;
                        continue;
                    }
                }
                let mut alpha = 1.0;
                let mut accepted = None;
                for _ in 0..40 {
                    let trial = step(&u, &free, &d, alpha);
                    let e1 = energy_of(self.mesh, self.coeff, self.p, &trial, eps_grad);
                    if e1 <= e0 + ARMIJO_C * alpha * slope {
                        accepted = Some(trial);
                        break;
                    }
                    alpha *= 0.5;
                }
                u = match accepted {
                    Some(t) => t,
                    None => {
                        // energy differences are below round-off; fall back
                        // on the residual as merit function
                        let trial = step(&u, &free, &d, 1.0);
                        if self.residual(&trial, eps_grad, admissible) < res {
                            trial
                        } else if last {
                            return Err(Error::NonConvergence { iterations, residual: res });
                        } else {
                            break;
                        }
                    }
                };
            }
        }
        let residual = self.residual(&u, 0.0, admissible);
        let energy = energy_of(self.mesh, self.coeff, self.p, &u, 0.0);
        Ok(Minimized { values: u, iterations, residual, energy })
    }
}

fn diag_scale(h: &[f64], pat: &SpdPattern) -> f64 {
    let n = pat.dim().max(1);
    let s: f64 = (0..pat.dim()).map(|i| h[pat.slot(i, i)].abs()).sum();
    (s / n as f64).max(1e-300)
}

fn step(u: &[f64], free: &[usize], d: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = u.to_vec();
    for (k, &i) in free.iter().enumerate() {
        out[i] += alpha * d[k];
    }
    out
}

fn tri_grad(t: &crate::mesh::Triangle, values: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for k in 0..3 {
        let u = values[t.nodes[k]];
        g[0] += u * t.grads[k][0];
        g[1] += u * t.grads[k][1];
    }
    g
}

/// Prescribed values, coefficients and normalization shared by a solve
/// and by solutions rebuilt from stored values.
struct Setup {
    coeff: Vec<f64>,
    fixed: Vec<Option<f64>>,
    admissible: Vec<bool>,
    pinned: Vec<usize>,
    scale: f64,
    floor: f64,
}

fn setup(mesh: &CrackedMesh, density: &EnergyDensity, datum: &Expr, time: f64) -> Result<Setup> {
    let coeff: Vec<f64> = mesh.triangles().iter().map(|t| density.coefficient(t.centroid)).collect();
    let mut fixed: Vec<Option<f64>> = mesh
        .nodes()
        .iter()
        .map(|n| (n.tag == NodeTag::Dirichlet).then(|| datum.eval(n.x.x, n.x.y, time)))
        .collect();
    let admissible: Vec<bool> = fixed.iter().map(Option::is_none).collect();
    let mut has_data = vec![false; mesh.component_count()];
    for (n, f) in mesh.nodes().iter().zip(&fixed) {
        has_data[n.component] |= f.is_some();
    }
    let mut pinned = Vec::new();
    for (i, n) in mesh.nodes().iter().enumerate() {
        if !has_data[n.component] {
            has_data[n.component] = true;
            fixed[i] = Some(0.0);
            pinned.push(i);
        }
    }
    if let Some(v) = fixed.iter().flatten().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("boundary datum evaluates to {v}")));
    }
    let scale = fixed.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let floor = flux_floor(mesh, &coeff, density.p(), scale);
    Ok(Setup { coeff, fixed, admissible, pinned, scale, floor })
}

/// Minimizes the bulk energy on `Ω \ K` with `u = g` at Dirichlet nodes.
pub fn solve_elastic(
    mesh: Arc<CrackedMesh>,
    density: &EnergyDensity,
    datum: &Expr,
    opts: &SolveOptions,
) -> Result<FieldSolution> {
    let Setup { coeff, fixed, admissible, pinned, scale, floor } = setup(&mesh, density, datum, opts.time)?;
    let problem = NodalProblem { mesh: &mesh, coeff: &coeff, p: density.p(), fixed, flux_floor: floor };
    let out = problem.minimize(scale, &admissible, opts.tol, opts.max_iterations, opts.initial.as_deref())?;
    let gradients = gradients_of(&mesh, &out.values);
    Ok(FieldSolution {
        mesh,
        density: density.clone(),
        datum: datum.clone(),
        time: opts.time,
        values: out.values,
        gradients,
        coefficients: coeff,
        pinned,
        flux_floor: floor,
        diagnostics: Diagnostics { iterations: out.iterations, residual: out.residual, energy: out.energy },
    })
}

impl FieldSolution {
    /// Wraps stored nodal values without solving; the diagnostics report
    /// zero iterations and the residual of the given values.
    pub fn from_values(
        mesh: Arc<CrackedMesh>,
        density: &EnergyDensity,
        datum: &Expr,
        time: f64,
        values: Vec<f64>,
    ) -> Result<FieldSolution> {
        if values.len() != mesh.nodes().len() {
            return Err(Error::MeshMismatch(format!(
                "{} values for {} mesh nodes",
                values.len(),
                mesh.nodes().len()
            )));
        }
        let s = setup(&mesh, density, datum, time)?;
        let mut out = FieldSolution {
            gradients: gradients_of(&mesh, &values),
            mesh,
            density: density.clone(),
            datum: datum.clone(),
            time,
            values,
            coefficients: s.coeff,
            pinned: s.pinned,
            flux_floor: s.floor,
            diagnostics: Diagnostics { iterations: 0, residual: 0.0, energy: 0.0 },
        };
        out.diagnostics.residual = el_residual(&out);
        out.diagnostics.energy = energy_of(&out.mesh, &out.coefficients, density.p(), &out.values, 0.0);
        Ok(out)
    }
}

/// `max_φ |Σ_T |T| f_ξ(x_T, ∇u_T)·∇φ| / ‖f_ξ(∇u)‖_q` over hat functions of
/// nodes not carrying Dirichlet data. The norm is floored by
/// [`FieldSolution::flux_floor`].
pub fn el_residual(sol: &FieldSolution) -> f64 {
    let r = el_pairings(sol);
    let norm = flux_q_norm(sol).max(sol.flux_floor);
    if norm == 0.0 {
        return 0.0;
    }
    r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / norm
}

/// Pairings `Σ_T |T| f_ξ·∇φ_i` for every admissible node (0 elsewhere).
pub fn el_pairings(sol: &FieldSolution) -> Vec<f64> {
    let mesh = sol.mesh();
    let mut r = vec![0.0; mesh.nodes().len()];
    for (t, f) in mesh.triangles().iter().zip(sol.fluxes()) {
        for k in 0..3 {
            r[t.nodes[k]] += t.area * (f[0] * t.grads[k][0] + f[1] * t.grads[k][1]);
        }
    }
    for (v, n) in r.iter_mut().zip(mesh.nodes()) {
        if n.tag == NodeTag::Dirichlet {
            *v = 0.0;
        }
    }
    r
}

/// `‖f_ξ(∇u)‖_q`.
pub fn flux_q_norm(sol: &FieldSolution) -> f64 {
    let q = sol.density().q();
    sol.mesh()
        .triangles()
        .iter()
        .zip(sol.fluxes())
        .map(|(t, f)| t.area * f[0].hypot(f[1]).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_values_round_trip() {
        let dom = Domain::unit_square([BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Dirichlet, BoundaryKind::Neumann]);
        let m = mesh(&dom, &Crack::segment(Point::new(0.25, 0.5), Point::new(0.75, 0.5)), 8);
        let d = EnergyDensity::isotropic(3.0).unwrap();
        let g = Expr::parse("x + y").unwrap();
        let u = solve_elastic(m.clone(), &d, &g, &SolveOptions::default()).unwrap();
        let w = FieldSolution::from_values(m, &d, &g, 0.0, u.values().to_vec()).unwrap();
        assert_eq!(w.gradients(), u.gradients());
        assert_eq!(el_residual(&w), el_residual(&u));
        assert_eq!(w.pinned(), u.pinned());
    }
    use crate::energy::{bulk_energy, total_energy};
    use crate::geometry::{BoundaryKind, Crack, Domain};
    use BoundaryKind::{Dirichlet as D, Neumann as N};

    fn mesh(dom: &Domain, k: &Crack, n: usize) -> Arc<CrackedMesh> {
        Arc::new(CrackedMesh::build(dom, k, n).unwrap())
    }

    #[test]
    fn affine_data_is_reproduced() {
        let dom = Domain::unit_square([D; 4]);
        let m = mesh(&dom, &Crack::empty(), 8);
        let g = Expr::parse("x").unwrap();
        for p in [1.5, 2.0, 3.0, 4.0] {
            let d = EnergyDensity::isotropic(p).unwrap();
            let s = solve_elastic(m.clone(), &d, &g, &SolveOptions::default()).unwrap();
            for gr in s.gradients() {
                assert!((gr[0] - 1.0).abs() < 1e-12 && gr[1].abs() < 1e-12, "p={p} {gr:?} {:?}", s.diagnostics());
            }
            assert!(el_residual(&s) <= 1e-10);
            assert!((bulk_energy(&s, &d) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_cut_gives_piecewise_constants() {
        let dom = Domain::unit_square([N, D, N, D]);
        let k = Crack::segment(Point::new(0.5, 0.0), Point::new(0.5, 1.0));
        let m = mesh(&dom, &k, 8);
        let d = EnergyDensity::isotropic(3.0).unwrap();
        let g = Expr::parse("x").unwrap();
        let s = solve_elastic(m.clone(), &d, &g, &SolveOptions::default()).unwrap();
        let left = m.nodes()[0].component;
        for (n, v) in m.nodes().iter().zip(s.values()) {
            let expect = if n.component == left { 0.0 } else { 1.0 };
            assert!((v - expect).abs() < 1e-12, "{n:?} {v}");
        }
        let e = total_energy(&s, &k, &d).unwrap();
        assert!(e.bulk.abs() < 1e-20);
        assert!((e.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_polynomial_p2() {
        let dom = Domain::unit_square([D; 4]);
        let m = mesh(&dom, &Crack::empty(), 32);
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let s = solve_elastic(m.clone(), &d, &Expr::parse("x*y").unwrap(), &SolveOptions::default()).unwrap();
        let h = 1.0 / 32.0;
        for (t, g) in m.triangles().iter().zip(s.gradients()) {
            let c = t.centroid;
            assert!((g[0] - c.y).abs() < h && (g[1] - c.x).abs() < h);
        }
        // comparison principle
        assert!(s.values().iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn floating_component_is_pinned() {
        // a closed square crack cuts out an island
        let dom = Domain::unit_square([D; 4]);
        let k = Crack::new(vec![vec![
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.75, 0.75),
            Point::new(0.25, 0.75),
            Point::new(0.25, 0.25),
        ]])
        .unwrap();
        let m = mesh(&dom, &k, 8);
        assert_eq!(m.component_count(), 2);
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let s = solve_elastic(m.clone(), &d, &Expr::parse("1 + x").unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(s.pinned().len(), 1);
        assert_eq!(s.values()[s.pinned()[0]], 0.0);
        assert!(el_residual(&s) <= EL_TOL);
    }

    #[test]
    fn zero_datum_has_zero_residual() {
        let dom = Domain::unit_square([D; 4]);
        let m = mesh(&dom, &Crack::empty(), 4);
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let s = solve_elastic(m, &d, &Expr::constant(0.0), &SolveOptions::default()).unwrap();
        assert_eq!(el_residual(&s), 0.0);
    }

    #[test]
    fn slit_solves_converge_for_several_exponents() {
        let dom = Domain::unit_square([D, N, D, N]);
        let k = Crack::segment(Point::new(0.25, 0.5), Point::new(0.75, 0.5));
        let m = mesh(&dom, &k, 16);
        for p in [1.5, 2.0, 3.0, 4.0] {
            let d = EnergyDensity::isotropic(p).unwrap();
            let s = solve_elastic(m.clone(), &d, &Expr::parse("y").unwrap(), &SolveOptions::default()).unwrap();
            assert!(s.diagnostics().residual <= EL_TOL, "p={p}: {:?}", s.diagnostics());
            assert!((el_residual(&s) - s.diagnostics().residual).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_raises_the_residual() {
        use rand::{Rng, SeedableRng};
        let dom = Domain::unit_square([D; 4]);
        let m = mesh(&dom, &Crack::empty(), 16);
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let s = solve_elastic(m.clone(), &d, &Expr::parse("x").unwrap(), &SolveOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<f64> = s
            .values()
            .iter()
            .zip(m.nodes())
            .map(|(v, n)| if n.tag == NodeTag::Dirichlet { *v } else { v + rng.gen_range(-0.1..0.1) })
            .collect();
        assert!(el_residual(&s.with_values(noisy).unwrap()) > 1e-3);
    }
}
