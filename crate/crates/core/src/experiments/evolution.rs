//! Dictionary-restricted unilateral minimality and greedy quasi-static
//! evolution.
//!
//! Competitors `H ⊇ K` range over single-arc extensions `K ∪ a` with `a`
//! from a finite dictionary of grid-aligned arcs. At each load the
//! evolution keeps adding the arc with the most negative energy gap until
//! no arc lowers the energy by more than the tolerance.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{total_energy, EnergyDensity, EnergyReport};
use crate::expr::Expr;
use crate::geometry::{components, Crack, Domain};
use crate::mesh::CrackedMesh;
use crate::solver::{solve_elastic, FieldSolution, SolveOptions};
use crate::{Error, Result};

/// Absolute tolerance on energy differences.
pub const UNILATERAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dictionary {
    pub arcs: Vec<Crack>,
    /// Extensions with more components than this are not admissible.
    #[serde(default)]
    pub max_components: Option<usize>,
}

impl Dictionary {
    pub fn new(arcs: Vec<Crack>) -> Self {
        Self { arcs, max_components: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub arc: usize,
    pub energy: EnergyReport,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    /// `E(u, K)`.
    pub base: EnergyReport,
    /// `min_a E(w_{K∪a}, K∪a) − E(u, K)`; `+∞` without admissible arcs.
    pub gap: f64,
    pub best_arc: Option<usize>,
    /// Admissible arcs, in dictionary order.
    pub candidates: Vec<Candidate>,
}

fn solve_on(dom: &Domain, k: &Crack, n: usize, d: &EnergyDensity, g: &Expr, time: f64) -> Result<FieldSolution> {
    let mesh = Arc::new(CrackedMesh::build(dom, k, n)?);
    solve_elastic(mesh, d, g, &SolveOptions { time, ..SolveOptions::default() })
}

fn admissible(k: &Crack, arc: &Crack, dict: &Dictionary) -> Option<Crack> {
    if k.contains(arc) {
        return None;
    }
    let h = k.union(arc);
    match dict.max_components {
        Some(m) if components(&h, &Crack::empty()).len() > m => None,
        _ => Some(h),
    }
}

/// Energy gap of `(u, K)` against every admissible single-arc extension,
/// solved on `u`'s domain and resolution at `u`'s time.
pub fn unilateral_gap(u: &FieldSolution, k: &Crack, dict: &Dictionary, d: &EnergyDensity, g: &Expr) -> Result<GapReport> {
    let base = total_energy(u, k, d)?;
    let dom = u.mesh().domain();
    let n = u.mesh().resolution();
    let candidates: Vec<Candidate> = dict
        .arcs
        .par_iter()
        .enumerate()
        .filter_map(|(i, arc)| admissible(k, arc, dict).map(|h| (i, h)))
        .map(|(i, h)| {
            let w = solve_on(dom, &h, n, d, g, u.time())?;
            let energy = total_energy(&w, &h, d)?;
            Ok(Candidate { arc: i, energy, gap: energy.total - base.total })
        })
        .collect::<Result<_>>()?;
    let best = candidates.iter().min_by(|a, b| a.gap.total_cmp(&b.gap).then(a.arc.cmp(&b.arc)));
    Ok(GapReport {
        base,
        gap: best.map_or(f64::INFINITY, |c| c.gap),
        best_arc: best.map(|c| c.arc),
        candidates,
    })
}

/// Boundary datum `g(x, y, t)` at the listed times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProgram {
    pub datum: Expr,
    pub times: Vec<f64>,
}

impl LoadProgram {
    pub fn new(datum: Expr, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("load program needs finite times".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("load times must be strictly increasing".into()));
        }
        Ok(Self { datum, times })
    }

    /// `t0, t0 + dt, …` for `steps + 1` times.
    pub fn uniform(datum: Expr, t0: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(datum, (0..=steps).map(|i| t0 + dt * i as f64).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionOptions {
    pub resolution: usize,
    #[serde(default)]
    pub initial_crack: Crack,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Cap on arcs added at one load.
    #[serde(default = "default_max_additions")]
    pub max_additions: usize,
}

fn default_tol() -> f64 {
    UNILATERAL_TOL
}

fn default_max_additions() -> usize {
    64
}

impl EvolutionOptions {
    pub fn new(resolution: usize) -> Self {
        Self { resolution, initial_crack: Crack::empty(), tol: default_tol(), max_additions: default_max_additions() }
    }
}

/// One recorded state `(u_i, K_i)`.
#[derive(Clone, Debug)]
pub struct EvolutionStep {
    pub time: f64,
    pub crack: Crack,
    pub solution: FieldSolution,
    pub energy: EnergyReport,
    /// Dictionary arcs added at this load, in order.
    pub added: Vec<usize>,
    /// Total energy after each greedy sub-step (first entry before any
    /// addition).
    pub substep_energies: Vec<f64>,
    /// Gap of the recorded state.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub dictionary: Dictionary,
    pub load: LoadProgram,
    pub steps: Vec<EvolutionStep>,
    /// Error that stopped the run early, if any.
    pub aborted: Option<String>,
}

impl EvolutionState {
    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.time).collect()
    }

    /// `K_i ⊆ K_{i+1}` for every recorded pair.
    pub fn is_irreversible(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].crack.contains(&w[0].crack))
    }

    /// First recorded time at which the crack differs from the initial one.
    pub fn first_growth(&self, initial: &Crack) -> Option<f64> {
        self.steps.iter().find(|s| !initial.contains(&s.crack)).map(|s| s.time)
    }
}

fn step(
    dom: &Domain,
    d: &EnergyDensity,
    g: &Expr,
    dict: &Dictionary,
    opts: &EvolutionOptions,
    time: f64,
    mut k: Crack,
) -> Result<EvolutionStep> {
    let mut u = solve_on(dom, &k, opts.resolution, d, g, time)?;
    let mut added = Vec::new();
    let mut energies = vec![total_energy(&u, &k, d)?.total];
    loop {
        let report = unilateral_gap(&u, &k, dict, d, g)?;
        let best = report.best_arc.filter(|_| report.gap < -opts.tol && added.len() < opts.max_additions);
        let Some(a) = best else {
            return Ok(EvolutionStep { time, crack: k, solution: u, energy: report.base, added, substep_energies: energies, gap: report.gap });
        };
        k = k.union(&dict.arcs[a]);
        u = solve_on(dom, &k, opts.resolution, d, g, time)?;
        energies.push(total_energy(&u, &k, d)?.total);
        added.push(a);
    }
}

/// Greedy unilateral evolution. Steps are sequential; a failing step
/// stops the run and the partial history is returned with the error.
pub fn quasistatic_evolve(
    dom: &Domain,
    d: &EnergyDensity,
    load: &LoadProgram,
    dict: &Dictionary,
    opts: &EvolutionOptions,
) -> Result<EvolutionState> {
    opts.initial_crack.validate_in(dom)?;
    for arc in &dict.arcs {
        arc.validate_in(dom)?;
        crate::mesh::check_grid_aligned(dom, arc, opts.resolution)?;
    }
    let mut state = EvolutionState { dictionary: dict.clone(), load: load.clone(), steps: Vec::new(), aborted: None };
    let mut k = opts.initial_crack.clone();
    for &t in &load.times {
        match step(dom, d, &load.datum, dict, opts, t, k.clone()) {
            Ok(s) => {
                k = s.crack.clone();
                state.steps.push(s);
            }
            Err(e) => {
                state.aborted = Some(format!("t = {t}: {e}"));
                break;
            }
        }
    }
    Ok(state)
}
