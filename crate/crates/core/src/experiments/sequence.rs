//! Hausdorff-converging crack sequences `K_h → K`.

use serde::{Deserialize, Serialize};

use crate::geometry::{components, hausdorff_distance, join_components, Crack, Domain, Point, Segment};
use crate::mesh::check_grid_aligned;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// A segment with a middle gap of length `1/h`: two components closing
    /// into one.
    MergeGap,
    /// The segment with its far end cut back by `1/h`.
    GrowToLimit,
    Constant,
    /// `K + shift / h`.
    Translate,
    /// The segment with its boundary end cut back by `1/h`, touching the
    /// boundary only in the limit.
    BoundaryTouch,
}

fn default_min_resolution() -> usize {
    32
}

fn default_cells_per_index() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceParams {
    /// Strictly increasing indices `h`.
    pub indices: Vec<usize>,
    /// Bound `λ` on `H¹(K_h)`.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Bound `m` on the number of components of `K_h`.
    #[serde(default)]
    pub max_components: Option<usize>,
    /// `n_h = max(min_resolution, cells_per_index * h)`.
    #[serde(default = "default_min_resolution")]
    pub min_resolution: usize,
    #[serde(default = "default_cells_per_index")]
    pub cells_per_index: usize,
    /// Direction for [`SequenceKind::Translate`]; defaults to `(1, 0)`.
    #[serde(default)]
    pub shift: Option<Point>,
}

impl SequenceParams {
    pub fn new(indices: Vec<usize>) -> Self {
        Self {
            indices,
            lambda: None,
            max_components: None,
            min_resolution: default_min_resolution(),
            cells_per_index: default_cells_per_index(),
            shift: None,
        }
    }

    pub fn resolution(&self, h: usize) -> usize {
        self.min_resolution.max(self.cells_per_index * h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceMember {
    pub h: usize,
    pub resolution: usize,
    pub crack: Crack,
    /// `d_H(K_h, K)`.
    pub hausdorff: f64,
    /// `H¹(K_h)`.
    pub length: f64,
    pub components: usize,
    /// For each component of `K_h ∪ ∂_N Ω`, the nearest component of
    /// `K ∪ ∂_N Ω`.
    pub component_map: Vec<usize>,
    /// Length added by joining (0 for raw members).
    pub added_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrackSequence {
    pub kind: SequenceKind,
    pub domain: Domain,
    pub limit: Crack,
    pub members: Vec<SequenceMember>,
    /// `δ·h` used by [`CrackSequence::joined`], if applied.
    pub join_factor: Option<f64>,
}

fn single_segment(k: &Crack, kind: SequenceKind) -> Result<Segment> {
    match k.polylines() {
        [pl] if pl.len() == 2 && pl[0] != pl[1] => Ok(Segment::new(pl[0], pl[1])),
        _ => Err(Error::InvalidParameter(format!("{kind:?} needs a single straight segment as limit"))),
    }
}

fn member_crack(kind: SequenceKind, dom: &Domain, k: &Crack, h: usize, params: &SequenceParams) -> Result<Crack> {
    let step = 1.0 / h as f64;
    let seg = || single_segment(k, kind);
    let cut_back = |s: Segment| -> Result<Segment> {
        if step >= s.length() {
            return Err(Error::InvalidParameter(format!("index {h} removes the whole segment")));
        }
        Ok(s)
    };
    Ok(match kind {
        SequenceKind::Constant => k.clone(),
        SequenceKind::GrowToLimit => {
            let s = cut_back(seg()?)?;
            let dir = (s.b - s.a) * (1.0 / s.length());
            Crack::segment(s.a, s.b - dir * step)
        }
        SequenceKind::BoundaryTouch => {
            let s = seg()?;
            let s = if dom.on_boundary(s.a) {
                s
            } else if dom.on_boundary(s.b) {
                Segment::new(s.b, s.a)
            } else {
                return Err(Error::InvalidParameter("boundary_touch needs a segment ending on the boundary".into()));
            };
            let s = cut_back(s)?;
            let dir = (s.b - s.a) * (1.0 / s.length());
            Crack::segment(s.a + dir * step, s.b)
        }
        SequenceKind::MergeGap => {
            let s = cut_back(seg()?)?;
            let dir = (s.b - s.a) * (1.0 / s.length());
            let m = s.a.lerp(s.b, 0.5);
            let half = dir * (0.5 * step);
            Crack::from_segments([Segment::new(s.a, m - half), Segment::new(m + half, s.b)])
        }
        SequenceKind::Translate => {
            let d = params.shift.unwrap_or(Point::new(1.0, 0.0)) * step;
            Crack::new(k.polylines().iter().map(|pl| pl.iter().map(|&p| p + d).collect()).collect())?
        }
    })
}

fn component_map(dom: &Domain, k_h: &Crack, k: &Crack) -> Vec<usize> {
    let gamma = dom.neumann_part();
    let limit = components(k, &gamma);
    components(k_h, &gamma)
        .iter()
        .map(|c| {
            limit
                .iter()
                .enumerate()
                .filter_map(|(i, l)| c.closest_pair(l).map(|(d, _, _)| (d, i)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map_or(0, |(_, i)| i)
        })
        .collect()
}

fn describe(dom: &Domain, limit: &Crack, h: usize, resolution: usize, crack: Crack, added_length: f64) -> Result<SequenceMember> {
    crack.validate_in(dom)?;
    check_grid_aligned(dom, &crack, resolution)?;
    Ok(SequenceMember {
        h,
        resolution,
        hausdorff: hausdorff_distance(&crack, limit, dom),
        length: crack.h1_length(),
        components: components(&crack, &Crack::empty()).len(),
        component_map: component_map(dom, &crack, limit),
        added_length,
        crack,
    })
}

pub fn make_sequence(kind: SequenceKind, dom: &Domain, k: &Crack, params: &SequenceParams) -> Result<CrackSequence> {
    if params.indices.is_empty() || params.indices[0] == 0 {
        return Err(Error::InvalidParameter("indices must be positive and nonempty".into()));
    }
    if params.indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("indices must be strictly increasing".into()));
    }
    k.validate_in(dom)?;
    let mut members = Vec::with_capacity(params.indices.len());
    for &h in &params.indices {
        let n = params.resolution(h);
        let m = describe(dom, k, h, n, member_crack(kind, dom, k, h, params)?, 0.0)?;
        if let Some(lambda) = params.lambda {
            if m.length > lambda + 1e-12 {
                return Err(Error::InvalidParameter(format!("H1(K_h) = {} exceeds lambda = {lambda} at h = {h}", m.length)));
            }
        }
        if let Some(cap) = params.max_components {
            if m.components > cap {
                return Err(Error::InvalidParameter(format!("{} components exceed the bound {cap} at h = {h}", m.components)));
            }
        }
        members.push(m);
    }
    Ok(CrackSequence { kind, domain: dom.clone(), limit: k.clone(), members, join_factor: None })
}

impl CrackSequence {
    /// Applies `join_components(K_h, gamma, factor / h)` to every member.
    pub fn joined(&self, factor: f64, gamma: &Crack) -> Result<CrackSequence> {
        let members = self
            .members
            .iter()
            .map(|m| {
                let j = join_components(&m.crack, gamma, factor / m.h as f64)?;
                describe(&self.domain, &self.limit, m.h, m.resolution, j.crack.clone(), j.added_length())
            })
            .collect::<Result<_>>()?;
        Ok(CrackSequence { members, join_factor: Some(factor), ..self.clone() })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
