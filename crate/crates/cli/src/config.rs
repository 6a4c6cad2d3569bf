//! Run configurations. Files are TOML; a `manifest.json` written by an
//! earlier run is also accepted, in which case its `config` entry is used.

use std::path::Path;

use fraclab_core::energy::EnergyDensity;
use fraclab_core::experiments::{ConvergenceOptions, Dictionary, EvolutionOptions, SequenceKind, SequenceParams};
use fraclab_core::expr::Expr;
use fraclab_core::solver::{EL_TOL, MAX_ITERATIONS};
use fraclab_core::{BoundaryKind, Crack, Domain};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainInput {
    /// `rectangle = [x0, y0, x1, y1]`, boundary kinds bottom, right, top,
    /// left.
    Rectangle {
        rectangle: [f64; 4],
        #[serde(default = "all_dirichlet")]
        boundary: [BoundaryKind; 4],
    },
    /// Explicit polygon: `vertices`, `boundary_edges`, optional `holes`.
    Polygon(Domain),
}

fn all_dirichlet() -> [BoundaryKind; 4] {
    [BoundaryKind::Dirichlet; 4]
}

impl DomainInput {
    pub fn build(&self) -> Result<Domain, CliError> {
        match self {
            DomainInput::Rectangle { rectangle: [x0, y0, x1, y1], boundary } => {
                Domain::rectangle(*x0, *y0, *x1, *y1, *boundary).map_err(CliError::schema)
            }
            DomainInput::Polygon(d) => Ok(d.clone()),
        }
    }
}

fn default_tol() -> f64 {
    EL_TOL
}

fn default_max_iterations() -> usize {
    MAX_ITERATIONS
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub datum: Expr,
    pub resolution: usize,
    #[serde(default)]
    pub time: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub domain: DomainInput,
    #[serde(default)]
    pub crack: Crack,
    pub density: EnergyDensity,
    pub solve: SolveSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub kind: SequenceKind,
    pub limit: Crack,
    pub params: SequenceParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    /// `g(x, y, t)`, read as `g_h = g(·, ·, 1/h)`.
    pub datum: Expr,
    /// Join components closer than `join / h` (with the Neumann boundary as
    /// `Γ`); the raw sequence is then reported alongside.
    #[serde(default)]
    pub join: Option<f64>,
    #[serde(default)]
    pub convergence: ConvergenceOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub domain: DomainInput,
    pub density: EnergyDensity,
    pub sequence: SequenceSection,
    pub stability: StabilitySection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    List(Vec<f64>),
    Uniform { start: f64, step: f64, steps: usize },
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeGrid::List(t) => t.clone(),
            TimeGrid::Uniform { start, step, steps } => (0..=*steps).map(|i| start + step * i as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub datum: Expr,
    pub times: TimeGrid,
    pub dictionary: Dictionary,
    pub options: EvolutionOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub domain: DomainInput,
    pub density: EnergyDensity,
    pub evolve: EvolveSection,
}

/// Reads a TOML config or the `config` entry of a JSON manifest.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let mut v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
        if let Some(c) = v.get_mut("config") {
            v = c.take();
        }
        serde_json::from_value(v).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_solve_config_fills_defaults() {
        let c: SolveConfig = toml::from_str(
            r#"
            domain = { rectangle = [0, 0, 1, 1], boundary = ["dirichlet", "neumann", "dirichlet", "neumann"] }
            crack = { polylines = [[[0.25, 0.5], [0.75, 0.5]]] }
            density = { p = 3.0, family = "isotropic" }
            solve = { datum = "x + y", resolution = 16 }
            "#,
        )
        .unwrap();
        assert_eq!(c.solve.tol, EL_TOL);
        assert_eq!(c.solve.max_iterations, MAX_ITERATIONS);
        assert_eq!(c.crack.h1_length(), 0.5);
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["solve"]["tol"], serde_json::json!(EL_TOL));
        let back: SolveConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back.solve.datum, c.solve.datum);
    }

    #[test]
    fn polygon_domains_and_unknown_fields() {
        let c: SolveConfig = toml::from_str(
            r#"
            [domain]
            vertices = [[0, 0], [2, 0], [0, 2]]
            boundary_edges = ["dirichlet", "neumann", "neumann"]
            [density]
            p = 2
            family = "isotropic"
            [solve]
            datum = "x"
            resolution = 8
            "#,
        )
        .unwrap();
        assert_eq!(c.domain.build().unwrap().outer().vertices.len(), 3);
        let bad = toml::from_str::<SolveConfig>(
            r#"
            domain = { rectangle = [0, 0, 1, 1] }
            density = { p = 2, family = "isotropic" }
            solve = { datum = "x", resolution = 8, typo = 1 }
            "#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn time_specs() {
        assert_eq!(TimeGrid::Uniform { start: 0.0, step: 0.5, steps: 2 }.times(), vec![0.0, 0.5, 1.0]);
        let t: TimeGrid = toml::from_str::<toml::Table>("t = [0.0, 1.0]").unwrap()["t"].clone().try_into().unwrap();
        assert_eq!(t.times(), vec![0.0, 1.0]);
    }
}
