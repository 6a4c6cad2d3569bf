//! Gradient convergence `∇u_h → ∇u` along a crack sequence.
//!
//! The data sequence is one expression `g(x, y, t)` read as
//! `g_h = g(·, ·, 1/h)` with limit `g = g(·, ·, 0)`. The limit solution
//! lives on the limit crack at the reference resolution; errors
//! `‖∇u_h − ∇u‖_{L^p}` are integrated over the reference triangles with
//! `∇u_h` sampled at their centroids, which is exact when `n_h` divides the
//! reference resolution.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sequence::{CrackSequence, SequenceKind, SequenceMember};
use crate::energy::{total_energy, EnergyDensity};
use crate::expr::Expr;
use crate::mesh::CrackedMesh;
use crate::solver::{solve_elastic, FieldSolution, SolveOptions};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceOptions {
    #[serde(default = "default_reference")]
    pub reference_resolution: usize,
    /// Exponent of the error norm; defaults to the density's `p`.
    #[serde(default)]
    pub exponent: Option<f64>,
}

fn default_reference() -> usize {
    256
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { reference_resolution: default_reference(), exponent: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceSummary {
    pub resolution: usize,
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
    /// `‖∇u‖_{L^p}`.
    pub gradient_norm: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: usize,
    pub resolution: usize,
    pub hausdorff: f64,
    pub length: f64,
    pub components: usize,
    pub added_length: f64,
    pub bulk: f64,
    pub total: f64,
    /// `‖∇u_h − ∇u‖_{L^p}`.
    pub error: f64,
    pub relative_error: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Solver failure for this row, if any (the other fields are NaN).
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub kind: SequenceKind,
    pub joined: bool,
    pub exponent: f64,
    pub reference: ReferenceSummary,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn relative_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.relative_error).collect()
    }
}

/// `(Σ_T |T| |∇a(x_T) − ∇b_T|^r)^{1/r}` over the triangles of `b`'s mesh.
/// Terms are evaluated in parallel and summed in triangle order, so the
/// result does not depend on the thread count.
pub fn gradient_error(a: &FieldSolution, b: &FieldSolution, r: f64) -> f64 {
    let terms: Vec<f64> = b
        .mesh()
        .triangles()
        .par_iter()
        .zip(b.gradients().par_iter())
        .map(|(t, gb)| {
            let ga = a.gradient_at(t.centroid);
            t.area * (ga[0] - gb[0]).hypot(ga[1] - gb[1]).powf(r)
        })
        .collect();
    terms.iter().sum::<f64>().powf(1.0 / r)
}

pub fn gradient_norm(u: &FieldSolution, r: f64) -> f64 {
    u.mesh()
        .triangles()
        .iter()
        .zip(u.gradients())
        .map(|(t, g)| t.area * g[0].hypot(g[1]).powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// Solves on the limit crack at the reference resolution with `t = 0`.
pub fn reference_solution(seq: &CrackSequence, data: &Expr, d: &EnergyDensity, n: usize) -> Result<FieldSolution> {
    let mesh = Arc::new(CrackedMesh::build(&seq.domain, &seq.limit, n)?);
    solve_elastic(mesh, d, data, &SolveOptions::default())
}

fn row(m: &SequenceMember, seq: &CrackSequence, data: &Expr, d: &EnergyDensity, reference: &FieldSolution, r: f64, norm: f64) -> ConvergenceRow {
    let solved = CrackedMesh::build(&seq.domain, &m.crack, m.resolution).and_then(|mesh| {
        let opts = SolveOptions { time: 1.0 / m.h as f64, ..SolveOptions::default() };
        let u = solve_elastic(Arc::new(mesh), d, data, &opts)?;
        let e = total_energy(&u, &m.crack, d)?;
        Ok((u, e))
    });
    let mut out = ConvergenceRow {
        h: m.h,
        resolution: m.resolution,
        hausdorff: m.hausdorff,
        length: m.length,
        components: m.components,
        added_length: m.added_length,
        bulk: f64::NAN,
        total: f64::NAN,
        error: f64::NAN,
        relative_error: f64::NAN,
        residual: f64::NAN,
        iterations: 0,
        failure: None,
    };
    match solved {
        Ok((u, e)) => {
            out.bulk = e.bulk;
            out.total = e.total;
            out.error = gradient_error(&u, reference, r);
            out.relative_error = if norm > 0.0 { out.error / norm } else { out.error };
            out.residual = u.diagnostics().residual;
            out.iterations = u.diagnostics().iterations;
        }
        Err(e) => out.failure = Some(e.to_string()),
    }
    out
}

/// Rows are solved concurrently; a failing row is recorded and the run
/// continues.
pub fn convergence_experiment(
    seq: &CrackSequence,
    data: &Expr,
    d: &EnergyDensity,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceTable> {
    let reference = reference_solution(seq, data, d, opts.reference_resolution)?;
    convergence_against(seq, data, d, &reference, opts.exponent)
}

/// As [`convergence_experiment`] with a precomputed limit solution.
pub fn convergence_against(
    seq: &CrackSequence,
    data: &Expr,
    d: &EnergyDensity,
    reference: &FieldSolution,
    exponent: Option<f64>,
) -> Result<ConvergenceTable> {
    let r = exponent.unwrap_or(d.p());
    let e = total_energy(reference, &seq.limit, d)?;
    let norm = gradient_norm(reference, r);
    let rows = seq.members.par_iter().map(|m| row(m, seq, data, d, reference, r, norm)).collect();
    Ok(ConvergenceTable {
        kind: seq.kind,
        joined: seq.join_factor.is_some(),
        exponent: r,
        reference: ReferenceSummary {
            resolution: reference.mesh().resolution(),
            bulk: e.bulk,
            surface: e.surface,
            total: e.total,
            gradient_norm: norm,
            residual: reference.diagnostics().residual,
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sequence::{make_sequence, SequenceParams};
    use crate::geometry::BoundaryKind::{Dirichlet as D, Neumann as N};
    use crate::geometry::{Crack, Domain, Point};

    #[test]
    fn constant_sequence_shows_discretization_error_only() {
        let dom = Domain::unit_square([N, D, N, D]);
        let k = Crack::segment(Point::new(0.5, 0.0), Point::new(0.5, 0.5));
        let mut params = SequenceParams::new(vec![8, 16, 32]);
        params.min_resolution = 8;
        params.cells_per_index = 1;
        let seq = make_sequence(SequenceKind::Constant, &dom, &k, &params).unwrap();
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let opts = ConvergenceOptions { reference_resolution: 64, exponent: None };
        let t = convergence_experiment(&seq, &Expr::parse("x").unwrap(), &d, &opts).unwrap();
        let errs = t.relative_errors();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(t.rows.iter().all(|r| r.failure.is_none() && r.hausdorff == 0.0));
    }

    #[test]
    fn affine_data_without_crack_is_exact() {
        let dom = Domain::unit_square([D; 4]);
        let mut params = SequenceParams::new(vec![4, 8]);
        params.min_resolution = 4;
        params.cells_per_index = 1;
        let seq = make_sequence(SequenceKind::Constant, &dom, &Crack::empty(), &params).unwrap();
        let d = EnergyDensity::isotropic(3.0).unwrap();
        let opts = ConvergenceOptions { reference_resolution: 16, exponent: None };
        let t = convergence_experiment(&seq, &Expr::parse("x - 2*y").unwrap(), &d, &opts).unwrap();
        assert!(t.rows.iter().all(|r| r.relative_error < 1e-9));
    }

    #[test]
    fn failing_rows_are_recorded() {
        let dom = Domain::unit_square([N, D, N, D]);
        let k = Crack::segment(Point::new(0.5, 0.0), Point::new(0.5, 0.5));
        let mut params = SequenceParams::new(vec![8]);
        params.min_resolution = 8;
        params.cells_per_index = 1;
        let seq = make_sequence(SequenceKind::Constant, &dom, &k, &params).unwrap();
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let opts = ConvergenceOptions { reference_resolution: 16, exponent: None };
        let t = convergence_experiment(&seq, &Expr::parse("1/t").unwrap(), &d, &opts);
        // the limit datum 1/0 is not finite
        assert!(t.is_err());
        let reference = reference_solution(&seq, &Expr::parse("x").unwrap(), &d, 16).unwrap();
        let t = convergence_against(&seq, &Expr::parse("x/(t - 1/8)").unwrap(), &d, &reference, None).unwrap();
        assert!(t.rows[0].failure.is_some() && t.rows[0].error.is_nan());
    }
}
