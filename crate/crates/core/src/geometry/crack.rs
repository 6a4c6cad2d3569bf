use serde::{Deserialize, Serialize};

use super::{DisjointSets, Domain, Point, Segment, GEOM_TOL};
use crate::{Error, Result};

/// A finite union of polylines. A one-point polyline is an isolated point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CrackRepr", into = "CrackRepr")]
pub struct Crack {
    polylines: Vec<Vec<Point>>,
}

#[derive(Serialize, Deserialize)]
struct CrackRepr {
    polylines: Vec<Vec<Point>>,
}

impl TryFrom<CrackRepr> for Crack {
    type Error = Error;
    fn try_from(r: CrackRepr) -> Result<Self> {
        Crack::new(r.polylines)
    }
}

impl From<Crack> for CrackRepr {
    fn from(c: Crack) -> Self {
        CrackRepr { polylines: c.polylines }
    }
}

impl Crack {
    pub fn new(polylines: Vec<Vec<Point>>) -> Result<Self> {
        for pl in &polylines {
            if pl.is_empty() {
                return Err(Error::InvalidCrack("empty polyline".into()));
            }
            if pl.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::InvalidCrack("non-finite coordinate".into()));
            }
        }
        Ok(Self { polylines })
    }

    pub(crate) fn from_polylines_unchecked(polylines: Vec<Vec<Point>>) -> Self {
        Self { polylines }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn segment(a: Point, b: Point) -> Self {
        Self { polylines: vec![vec![a, b]] }
    }

    pub fn point(p: Point) -> Self {
        Self { polylines: vec![vec![p]] }
    }

    pub fn from_segments(segs: impl IntoIterator<Item = Segment>) -> Self {
        Self {
            polylines: segs
                .into_iter()
                .map(|s| if s.is_point() { vec![s.a] } else { vec![s.a, s.b] })
                .collect(),
        }
    }

    pub fn polylines(&self) -> &[Vec<Point>] {
        &self.polylines
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    /// All pieces, with isolated points as degenerate segments.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for pl in &self.polylines {
            if pl.len() == 1 {
                out.push(Segment::new(pl[0], pl[0]));
            } else {
                out.extend(pl.windows(2).map(|w| Segment::new(w[0], w[1])));
            }
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.polylines.iter().flatten().copied()
    }

    pub fn union(&self, other: &Crack) -> Crack {
        let mut polylines = self.polylines.clone();
        polylines.extend(other.polylines.iter().cloned());
        Crack { polylines }
    }

    /// Checks that every vertex lies in the closed domain.
    pub fn validate_in(&self, dom: &Domain) -> Result<()> {
        for p in self.points() {
            if !dom.contains(p) {
                return Err(Error::InvalidCrack(format!(
                    "point ({}, {}) lies outside the domain",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    /// Total length with collinear overlaps counted once.
    pub fn h1_length(&self) -> f64 {
        let segs: Vec<Segment> = self.segments().into_iter().filter(|s| !s.is_point()).collect();
        let mut used = vec![false; segs.len()];
        let mut total = 0.0;
        for i in 0..segs.len() {
            if used[i] {
                continue;
            }
            let base = segs[i];
            let dir = (base.b - base.a) * (1.0 / base.length());
            let mut intervals = Vec::new();
            for j in i..segs.len() {
                if used[j] || !collinear(&base, &segs[j]) {
                    continue;
                }
                used[j] = true;
                let s = (segs[j].a - base.a).dot(dir);
                let t = (segs[j].b - base.a).dot(dir);
                intervals.push((s.min(t), s.max(t)));
            }
            total += merged_length(&mut intervals);
        }
        total
    }

    /// True if every point of `other` lies in this set (up to `GEOM_TOL`).
    pub fn contains(&self, other: &Crack) -> bool {
        let mine = self.segments();
        other.segments().iter().all(|s| covered(s, &mine))
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.segments().iter().any(|s| s.dist_to_point(p) <= GEOM_TOL)
    }

    pub fn component_count(&self) -> usize {
        components(self, &Crack::empty()).len()
    }

    pub fn dist_to_point(&self, p: Point) -> f64 {
        self.segments()
            .iter()
            .map(|s| s.dist_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimal distance between two sets together with a closest pair.
    pub fn closest_pair(&self, other: &Crack) -> Option<(f64, Point, Point)> {
        let theirs = other.segments();
        let mut best: Option<(f64, Point, Point)> = None;
        for s in self.segments() {
            for o in &theirs {
                let c = s.closest_pair(o);
                if best.map_or(true, |b| c.0 < b.0) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

fn collinear(base: &Segment, s: &Segment) -> bool {
    let e = base.b - base.a;
    let l = e.norm();
    let off = |p: Point| (p - base.a).cross(e).abs() / l;
    off(s.a) <= GEOM_TOL && off(s.b) <= GEOM_TOL
}

fn merged_length(iv: &mut [(f64, f64)]) -> f64 {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(s, t) in iv.iter() {
        cur = match cur {
            Some((cs, ct)) if s <= ct => Some((cs, ct.max(t))),
            Some((cs, ct)) => {
                total += ct - cs;
                Some((s, t))
            }
            None => Some((s, t)),
        };
    }
    if let Some((cs, ct)) = cur {
        total += ct - cs;
    }
    total
}

/// Is segment `s` covered by the union of `pieces`?
fn covered(s: &Segment, pieces: &[Segment]) -> bool {
    if s.is_point() {
        return pieces.iter().any(|p| p.dist_to_point(s.a) <= GEOM_TOL);
    }
    let len = s.length();
    let dir = (s.b - s.a) * (1.0 / len);
    let mut iv = Vec::new();
    for p in pieces {
        if p.is_point() || !collinear(s, p) {
            continue;
        }
        let u = (p.a - s.a).dot(dir);
        let v = (p.b - s.a).dot(dir);
        iv.push((u.min(v), u.max(v)));
    }
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = 0.0;
    for (u, v) in iv {
        if u > reach + GEOM_TOL {
            break;
        }
        reach = f64::max(reach, v);
    }
    reach >= len - GEOM_TOL
}

/// Connected components of `k ∪ gamma`, each returned as its polylines.
pub fn components(k: &Crack, gamma: &Crack) -> Vec<Crack> {
    let all: Vec<&Vec<Point>> = k.polylines.iter().chain(gamma.polylines.iter()).collect();
    let segs: Vec<Vec<Segment>> = all
        .iter()
        .map(|pl| Crack::from_polylines_unchecked(vec![(*pl).clone()]).segments())
        .collect();
    let mut ds = DisjointSets::new(all.len());
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if ds.find(i) == ds.find(j) {
                continue;
            }
            let touch = segs[i]
                .iter()
                .any(|a| segs[j].iter().any(|b| a.dist_to_segment(b) <= GEOM_TOL));
            if touch {
                ds.union(i, j);
            }
        }
    }
    let (labels, count) = ds.labels();
    let mut out = vec![Vec::new(); count];
    for (pl, l) in all.into_iter().zip(labels) {
        out[l].push(pl.clone());
    }
    out.into_iter().map(Crack::from_polylines_unchecked).collect()
}

/// Result of [`join_components`] with the added arcs kept separately.
#[derive(Clone, Debug, PartialEq)]
pub struct Joined {
    pub crack: Crack,
    pub added: Vec<Segment>,
}

impl Joined {
    pub fn added_length(&self) -> f64 {
        self.added.iter().map(Segment::length).sum()
    }
}

/// Connects components of `k ∪ gamma` closer than `delta` by straight
/// segments between closest points, shortest first, skipping pairs that an
/// earlier segment already connected.
pub fn join_components(k: &Crack, gamma: &Crack, delta: f64) -> Result<Joined> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("join distance must be positive, got {delta}")));
    }
    let comps = components(k, gamma);
    let mut pairs = Vec::new();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if let Some((d, p, q)) = comps[i].closest_pair(&comps[j]) {
                if d < delta {
                    pairs.push((d, i, j, p, q));
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut ds = DisjointSets::new(comps.len());
    let mut added = Vec::new();
    for (_, i, j, p, q) in pairs {
        if ds.union(i, j) {
            added.push(Segment::new(p, q));
        }
    }
    let crack = k.union(&Crack::from_segments(added.iter().copied()));
    Ok(Joined { crack, added })
}

/// `k_h ∪ h`, after checking that `h` contains the declared limit.
pub fn extend_sequence(k_h: &Crack, h: &Crack, limit: &Crack) -> Result<Crack> {
    if !h.contains(limit) {
        return Err(Error::NotContained(
            "extension does not contain the limit crack".into(),
        ));
    }
    Ok(k_h.union(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn lengths() {
        assert_eq!(Crack::segment(p(0.0, 0.0), p(1.0, 0.0)).h1_length(), 1.0);
        let two = Crack::new(vec![vec![p(0.0, 0.0), p(1.0, 0.0)], vec![p(0.0, 1.0), p(1.0, 1.0)]]).unwrap();
        assert_eq!(two.h1_length(), 2.0);
        assert_eq!(Crack::empty().h1_length(), 0.0);
        let overlap = Crack::new(vec![vec![p(0.0, 0.0), p(1.0, 0.0)], vec![p(1.5, 0.0), p(0.5, 0.0)]]).unwrap();
        assert!((overlap.h1_length() - 1.5).abs() < 1e-15);
        assert_eq!(Crack::point(p(0.2, 0.2)).h1_length(), 0.0);
    }

    #[test]
    fn component_examples() {
        let cross = Crack::new(vec![vec![p(0.0, 0.5), p(1.0, 0.5)], vec![p(0.5, 0.0), p(0.5, 1.0)]]).unwrap();
        assert_eq!(components(&cross, &Crack::empty()).len(), 1);
        let parallel = Crack::new(vec![vec![p(0.2, 0.2), p(0.8, 0.2)], vec![p(0.2, 0.6), p(0.8, 0.6)]]).unwrap();
        assert_eq!(components(&parallel, &Crack::empty()).len(), 2);
        let slit = Crack::segment(p(0.0, 0.5), p(0.5, 0.5));
        let arc = Crack::segment(p(0.0, 0.0), p(0.0, 1.0));
        let c = components(&slit, &arc);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].polylines().len(), 2);
    }

    #[test]
    fn containment() {
        let k = Crack::new(vec![vec![p(0.0, 0.0), p(0.5, 0.0)], vec![p(0.5, 0.0), p(1.0, 0.0)]]).unwrap();
        assert!(k.contains(&Crack::segment(p(0.25, 0.0), p(0.75, 0.0))));
        assert!(k.contains(&Crack::point(p(1.0, 0.0))));
        assert!(!k.contains(&Crack::segment(p(0.5, 0.0), p(1.5, 0.0))));
        assert!(!k.contains(&Crack::segment(p(0.0, 0.0), p(0.0, 0.1))));
        let gap = Crack::new(vec![vec![p(0.0, 0.0), p(0.4, 0.0)], vec![p(0.6, 0.0), p(1.0, 0.0)]]).unwrap();
        assert!(!gap.contains(&Crack::segment(p(0.0, 0.0), p(1.0, 0.0))));
    }

    #[test]
    fn join_closes_small_gap() {
        let h = 16.0;
        let k = Crack::new(vec![
            vec![p(0.0, 0.5), p(0.5 - 0.5 / h, 0.5)],
            vec![p(0.5 + 0.5 / h, 0.5), p(1.0, 0.5)],
        ])
        .unwrap();
        let j = join_components(&k, &Crack::empty(), 2.0 / h).unwrap();
        assert_eq!(j.added.len(), 1);
        assert!(j.added_length() <= 1.0 / h + 1e-15);
        assert_eq!(j.crack.component_count(), 1);
        assert!(j.crack.contains(&k));
        assert!((j.crack.h1_length() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn join_leaves_far_or_connected_sets() {
        let one = Crack::segment(p(0.1, 0.1), p(0.9, 0.1));
        assert_eq!(join_components(&one, &Crack::empty(), 0.3).unwrap().crack, one);
        let far = Crack::new(vec![vec![p(0.1, 0.1), p(0.9, 0.1)], vec![p(0.1, 0.6), p(0.9, 0.6)]]).unwrap();
        let j = join_components(&far, &Crack::empty(), 0.01).unwrap();
        assert_eq!(j.crack, far);
        assert!(join_components(&far, &Crack::empty(), 0.0).is_err());
        assert!(join_components(&far, &Crack::empty(), -1.0).is_err());
    }

    #[test]
    fn extend_is_a_checked_union() {
        let k = Crack::segment(p(0.5, 0.0), p(0.5, 0.5));
        let k_h = Crack::segment(p(0.5, 0.0), p(0.5, 0.4));
        let s = Crack::segment(p(0.5, 0.5), p(0.8, 0.5));
        let h = k.union(&s);
        let h_h = extend_sequence(&k_h, &h, &k).unwrap();
        assert!(h_h.contains(&k_h) && h_h.contains(&h));
        assert!((h_h.h1_length() - 0.8).abs() < 1e-15);
        assert!(extend_sequence(&k_h, &s, &k).is_err());
        assert_eq!(extend_sequence(&k, &k, &k).unwrap().h1_length(), k.h1_length());
    }

    #[test]
    fn json_shape() {
        let k = Crack::new(vec![vec![p(0.0, 0.5), p(0.5, 0.5)], vec![p(0.2, 0.2)]]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"polylines":[[[0.0,0.5],[0.5,0.5]],[[0.2,0.2]]]}"#);
        assert_eq!(serde_json::from_str::<Crack>(&s).unwrap(), k);
        assert!(serde_json::from_str::<Crack>(r#"{"polylines":[[]]}"#).is_err());
    }
}
