//! Exact Hausdorff distance between finite unions of segments.
//!
//! Along a segment `P(t) = a + t e` of `A`, the squared distance to each
//! segment of `B` is piecewise quadratic in `t`, and each unsquared distance
//! is convex. The sup of their pointwise minimum is therefore attained at an
//! endpoint or where two of the distances coincide; those parameters are
//! found in closed form and the true distance is evaluated there.

use super::{Crack, Domain, Point, Segment};

/// `sup_{a in A} dist(a, B)`, with `sup ∅ = 0` and `dist(·, ∅) = diam`.
pub fn directed_hausdorff(a: &Crack, b: &Crack, diam: f64) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return diam;
    }
    let bs = b.segments();
    let mut worst: f64 = 0.0;
    for s in a.segments() {
        if b.contains(&Crack::from_segments([s])) {
            continue;
        }
        worst = worst.max(sup_on_segment(&s, &bs));
    }
    worst
}

/// Hausdorff distance with the conventions `d(∅, ∅) = 0` and
/// `d(∅, K) = diam(Ω)` for nonempty `K`.
pub fn hausdorff_distance(a: &Crack, b: &Crack, dom: &Domain) -> f64 {
    let diam = dom.diameter();
    directed_hausdorff(a, b, diam).max(directed_hausdorff(b, a, diam))
}

fn dist_to_set(p: Point, bs: &[Segment]) -> f64 {
    bs.iter().map(|s| s.dist_to_point(p)).fold(f64::INFINITY, f64::min)
}

/// Squared distance from `P(t)` to one segment of `B`, as pieces of
/// `q0 + q1 t + q2 t^2`.
struct SqDist {
    breaks: Vec<f64>,
    a: Point,
    e: Point,
    seg: Segment,
}

impl SqDist {
    fn new(s: &Segment, seg: Segment) -> Self {
        let (a, e) = (s.a, s.b - s.a);
        let f = seg.b - seg.a;
        let ff = f.norm2();
        let mut breaks = Vec::new();
        if ff > 0.0 {
            // projection parameter u(t) = u0 + u1 t crosses 0 and 1
            let u0 = (a - seg.a).dot(f) / ff;
            let u1 = e.dot(f) / ff;
            if u1 != 0.0 {
                for target in [0.0, 1.0] {
                    let t = (target - u0) / u1;
                    if t > 0.0 && t < 1.0 {
                        breaks.push(t);
                    }
                }
            }
        }
        Self { breaks, a, e, seg }
    }

    fn coeffs_at(&self, t: f64) -> [f64; 3] {
        let f = self.seg.b - self.seg.a;
        let ff = f.norm2();
        let quad_to = |c: Point| {
            let d = self.a - c;
            [d.norm2(), 2.0 * d.dot(self.e), self.e.norm2()]
        };
        if ff == 0.0 {
            return quad_to(self.seg.a);
        }
        let d = self.a - self.seg.a;
        let (al, be) = (d.dot(f), self.e.dot(f));
        let u = (al + be * t) / ff;
        if u <= 0.0 {
            quad_to(self.seg.a)
        } else if u >= 1.0 {
            quad_to(self.seg.b)
        } else {
            let base = quad_to(self.seg.a);
            [
                base[0] - al * al / ff,
                base[1] - 2.0 * al * be / ff,
                base[2] - be * be / ff,
            ]
        }
    }
}

fn roots_in(c: [f64; 3], lo: f64, hi: f64, out: &mut Vec<f64>) {
    let [c0, c1, c2] = c;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return;
    }
    let mut push = |t: f64| {
        if t > lo && t < hi {
            out.push(t);
        }
    };
    if c2.abs() <= 1e-14 * scale {
        if c1.abs() > 1e-14 * scale {
            push(-c0 / c1);
        }
        return;
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (c1 + c1.signum() * sq);
    if q != 0.0 {
        push(q / c2);
        push(c0 / q);
    } else {
        push(-c1 / (2.0 * c2));
    }
}

fn sup_on_segment(s: &Segment, bs: &[Segment]) -> f64 {
    let p = |t: f64| if t >= 1.0 { s.b } else { s.a.lerp(s.b, t) };
    let mut cands = vec![0.0, 1.0];
    if !s.is_point() {
        let sq: Vec<SqDist> = bs.iter().map(|b| SqDist::new(s, *b)).collect();
        for i in 0..sq.len() {
            for j in i + 1..sq.len() {
                let mut knots = vec![0.0, 1.0];
                knots.extend(&sq[i].breaks);
                knots.extend(&sq[j].breaks);
                knots.sort_by(f64::total_cmp);
                knots.dedup();
                for w in knots.windows(2) {
                    let mid = 0.5 * (w[0] + w[1]);
                    let (ci, cj) = (sq[i].coeffs_at(mid), sq[j].coeffs_at(mid));
                    let diff = [ci[0] - cj[0], ci[1] - cj[1], ci[2] - cj[2]];
                    roots_in(diff, w[0], w[1], &mut cands);
                }
            }
        }
    }
    cands
        .into_iter()
        .map(|t| dist_to_set(p(t), bs))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryKind;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn dom() -> Domain {
        Domain::unit_square([BoundaryKind::Dirichlet; 4])
    }

    #[test]
    fn conventions() {
        let k = Crack::segment(p(0.1, 0.1), p(0.2, 0.3));
        let e = Crack::empty();
        assert_eq!(hausdorff_distance(&e, &e, &dom()), 0.0);
        assert_eq!(hausdorff_distance(&e, &k, &dom()), 2f64.sqrt());
        assert_eq!(hausdorff_distance(&k, &e, &dom()), 2f64.sqrt());
        assert_eq!(hausdorff_distance(&k, &k, &dom()), 0.0);
    }

    #[test]
    fn singletons() {
        let d = hausdorff_distance(&Crack::point(p(0.0, 0.0)), &Crack::point(p(3.0, 4.0)), &dom());
        assert_eq!(d, 5.0);
    }

    #[test]
    fn segment_endpoint_shift() {
        let k = Crack::segment(p(0.5, 0.0), p(0.5, 0.5));
        let k_h = Crack::segment(p(0.5, 0.0), p(0.5, 0.5 - 1.0 / 8.0));
        assert!((hausdorff_distance(&k_h, &k, &dom()) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn interior_maximum_between_two_points() {
        // farthest point of the segment from {(0,1), (1,1)} is its midpoint
        let a = Crack::segment(p(0.0, 0.0), p(1.0, 0.0));
        let b = Crack::new(vec![vec![p(0.0, 1.0)], vec![p(1.0, 1.0)]]).unwrap();
        let d = directed_hausdorff(&a, &b, 10.0);
        assert!((d - 1.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisector_of_two_segments() {
        // A = x-axis piece; B = two vertical segments, max at x = 0.5
        let a = Crack::segment(p(0.0, 0.0), p(1.0, 0.0));
        let b = Crack::new(vec![
            vec![p(-0.2, 0.3), p(-0.2, 0.9)],
            vec![p(1.2, 0.3), p(1.2, 0.9)],
        ])
        .unwrap();
        let d = directed_hausdorff(&a, &b, 10.0);
        let expect = (0.7f64 * 0.7 + 0.3 * 0.3).sqrt();
        assert!((d - expect).abs() < 1e-14, "{d} vs {expect}");
    }
}
