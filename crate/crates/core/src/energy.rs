//! Bulk densities `f(x, ξ) = a(x) |ξ|^p` and the Griffith functional.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::geometry::{Crack, Point};
use crate::solver::FieldSolution;
use crate::{Error, Result};

/// Violations smaller than this are treated as round-off.
pub const GROWTH_TOL: f64 = 1e-12;
/// Relative tolerance for the finite-difference check of `f_ξ`.
pub const DERIVATIVE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Isotropic,
    /// `a(x) |ξ|^p` with `a_min <= a <= a_max`.
    Weighted {
        coefficient: Expr,
        a_min: f64,
        a_max: f64,
    },
}

/// Claimed bounds `α|ξ|^p <= f <= β|ξ|^p + γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct EnergyDensity {
    p: f64,
    family: Family,
    growth: Growth,
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    p: f64,
    #[serde(flatten)]
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growth: Option<Growth>,
}

impl TryFrom<DensityRepr> for EnergyDensity {
    type Error = Error;
    fn try_from(r: DensityRepr) -> Result<Self> {
        let d = EnergyDensity::new(r.p, r.family)?;
        Ok(match r.growth {
            Some(g) => d.with_growth(g),
            None => d,
        })
    }
}

impl From<EnergyDensity> for DensityRepr {
    fn from(d: EnergyDensity) -> Self {
        let default = EnergyDensity::new(d.p, d.family.clone()).ok().map(|x| x.growth);
        DensityRepr {
            p: d.p,
            growth: (default != Some(d.growth)).then_some(d.growth),
            family: d.family,
        }
    }
}

impl EnergyDensity {
    pub fn new(p: f64, family: Family) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent p must lie in (1, inf), got {p}")));
        }
        let growth = match &family {
            Family::Isotropic => Growth { p, alpha: 1.0, beta: 1.0, gamma: 0.0 },
            Family::Weighted { a_min, a_max, .. } => {
                if !(*a_min > 0.0 && a_min <= a_max && a_max.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "need 0 < a_min <= a_max, got {a_min}, {a_max}"
                    )));
                }
                Growth { p, alpha: *a_min, beta: *a_max, gamma: 0.0 }
            }
        };
        Ok(Self { p, family, growth })
    }

    pub fn isotropic(p: f64) -> Result<Self> {
        Self::new(p, Family::Isotropic)
    }

    pub fn weighted(p: f64, coefficient: Expr, a_min: f64, a_max: f64) -> Result<Self> {
        Self::new(p, Family::Weighted { coefficient, a_min, a_max })
    }

    /// Replaces the claimed growth bounds (the density itself is unchanged).
    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p / (p - 1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn coefficient(&self, x: Point) -> f64 {
        match &self.family {
            Family::Isotropic => 1.0,
            Family::Weighted { coefficient, .. } => coefficient.eval(x.x, x.y, 0.0),
        }
    }

    /// `f` for a known coefficient value.
    pub fn value_with(&self, a: f64, xi: [f64; 2]) -> f64 {
        a * xi[0].hypot(xi[1]).powf(self.p)
    }

    /// `f_ξ = a p |ξ|^(p-2) ξ`, zero at `ξ = 0`.
    pub fn flux_with(&self, a: f64, xi: [f64; 2]) -> [f64; 2] {
        let r = xi[0].hypot(xi[1]);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let s = a * self.p * r.powf(self.p - 2.0);
        [s * xi[0], s * xi[1]]
    }

    pub fn value(&self, x: Point, xi: [f64; 2]) -> f64 {
        self.value_with(self.coefficient(x), xi)
    }

    pub fn flux(&self, x: Point, xi: [f64; 2]) -> [f64; 2] {
        self.flux_with(self.coefficient(x), xi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `min (f - α|ξ|^p)` over the samples.
    pub lower_margin: f64,
    /// `min (β|ξ|^p + γ - f)` over the samples.
    pub upper_margin: f64,
    pub pass: bool,
}

pub fn check_growth(d: &EnergyDensity, samples: &[(Point, [f64; 2])]) -> GrowthReport {
    let g = d.growth();
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for &(x, xi) in samples {
        let f = d.value(x, xi);
        let r = xi[0].hypot(xi[1]).powf(g.p);
        lower = lower.min(f - g.alpha * r);
        upper = upper.min(g.beta * r + g.gamma - f);
    }
    GrowthReport {
        lower_margin: lower,
        upper_margin: upper,
        pass: !samples.is_empty() && lower >= -GROWTH_TOL && upper >= -GROWTH_TOL,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// `min ((f(ξ) + f(η))/2 - f((ξ+η)/2))` over the sampled pairs.
    pub min_gap: f64,
    pub pass: bool,
}

/// Midpoint test on sampled pairs `(x, ξ, η)`; pairs with `ξ == η` are
/// skipped.
pub fn check_convexity(d: &EnergyDensity, pairs: &[(Point, [f64; 2], [f64; 2])]) -> ConvexityReport {
    let mut min_gap = f64::INFINITY;
    for &(x, a, b) in pairs {
        if a == b {
            continue;
        }
        let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let gap = 0.5 * (d.value(x, a) + d.value(x, b)) - d.value(x, m);
        min_gap = min_gap.min(gap);
    }
    ConvexityReport { min_gap, pass: min_gap.is_finite() && min_gap > 0.0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub max_relative_error: f64,
    pub pass: bool,
}

/// Compares `f_ξ` with central differences of `f`.
pub fn check_derivative(d: &EnergyDensity, samples: &[(Point, [f64; 2])]) -> DerivativeReport {
    let mut worst: f64 = 0.0;
    for &(x, xi) in samples {
        let r = xi[0].hypot(xi[1]);
        if r == 0.0 {
            continue;
        }
        let h = 1e-5 * r;
        let g = d.flux(x, xi);
        let mut fd = [0.0; 2];
        for k in 0..2 {
            let mut up = xi;
            let mut dn = xi;
            up[k] += h;
            dn[k] -= h;
            fd[k] = (d.value(x, up) - d.value(x, dn)) / (2.0 * h);
        }
        let err = (fd[0] - g[0]).hypot(fd[1] - g[1]) / g[0].hypot(g[1]);
        worst = worst.max(err);
    }
    DerivativeReport { max_relative_error: worst, pass: worst <= DERIVATIVE_TOL }
}

/// Uniform samples of `x` in the box `[lo, hi]` and `ξ` with
/// `|ξ| in [r_min, r_max]`.
pub fn random_samples<R: Rng>(
    rng: &mut R,
    lo: Point,
    hi: Point,
    r_min: f64,
    r_max: f64,
    count: usize,
) -> Vec<(Point, [f64; 2])> {
    (0..count)
        .map(|_| {
            let x = Point::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
            let r = rng.gen_range(r_min..=r_max);
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            (x, [r * th.cos(), r * th.sin()])
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn new(bulk: f64, surface: f64) -> Self {
        Self { bulk, surface, total: bulk + surface }
    }
}

/// `E(u, K) = Σ_T |T| f(x_T, ∇u_T) + H¹(K)`. The mesh of `u` must
/// realize `K`.
pub fn total_energy(u: &FieldSolution, k: &Crack, d: &EnergyDensity) -> Result<EnergyReport> {
    let mesh = u.mesh();
    if !mesh.crack().contains(k) || !k.contains(mesh.crack()) {
        return Err(Error::MeshMismatch("mesh does not realize the given crack".into()));
    }
    Ok(EnergyReport::new(bulk_energy(u, d), k.h1_length()))
}

/// Bulk term alone.
pub fn bulk_energy(u: &FieldSolution, d: &EnergyDensity) -> f64 {
    let mesh = u.mesh();
    mesh.triangles()
        .iter()
        .zip(u.gradients())
        .map(|(t, g)| t.area * d.value(t.centroid, *g))
        .sum()
}
