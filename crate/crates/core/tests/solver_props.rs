use std::sync::Arc;

use fraclab_core::capacity::{capacity, CapacitySet};
use fraclab_core::energy::{bulk_energy, total_energy, EnergyDensity};
use fraclab_core::expr::Expr;
use fraclab_core::mesh::CrackedMesh;
use fraclab_core::solver::{el_residual, solve_elastic, SolveOptions, EL_TOL};
use fraclab_core::{BoundaryKind, Crack, Domain, Point};
use proptest::prelude::*;

use BoundaryKind::{Dirichlet as D, Neumann as N};

fn solve(dom: &Domain, k: &Crack, n: usize, p: f64, g: &str) -> fraclab_core::solver::FieldSolution {
    let mesh = Arc::new(CrackedMesh::build(dom, k, n).unwrap());
    solve_elastic(mesh, &EnergyDensity::isotropic(p).unwrap(), &Expr::parse(g).unwrap(), &SolveOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_data_is_reproduced(p in 1.2..5.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64, c in -1.0..1.0f64) {
        let dom = Domain::unit_square([D; 4]);
        let u = solve(&dom, &Crack::empty(), 8, p, &format!("{c} + {a}*x + {b}*y"));
        for g in u.gradients() {
            prop_assert!((g[0] - a).abs() < 1e-9 && (g[1] - b).abs() < 1e-9);
        }
    }

    #[test]
    fn solutions_are_certified_and_minimal(p in 1.5..4.0f64, i in 1usize..7, j in 1usize..7, len in 1usize..3) {
        let dom = Domain::unit_square([D, N, D, N]);
        let s = 1.0 / 8.0;
        let end = (i + len).min(7);
        let k = Crack::segment(Point::new(i as f64 * s, j as f64 * s), Point::new(end as f64 * s, j as f64 * s));
        let u = solve(&dom, &k, 8, p, "y + x*y");
        prop_assert!(el_residual(&u) <= EL_TOL);
        let d = EnergyDensity::isotropic(p).unwrap();
        let e = bulk_energy(&u, &d);
        // any admissible perturbation raises the energy
        let bumped: Vec<f64> = u.values().iter().zip(u.mesh().nodes()).map(|(v, n)| {
            if n.tag == fraclab_core::mesh::NodeTag::Dirichlet { *v } else { v + 1e-3 * (n.x.x * 7.0).sin() }
        }).collect();
        let w = u.with_values(bumped).unwrap();
        prop_assert!(bulk_energy(&w, &d) >= e - 1e-12);
    }

    #[test]
    fn cracks_lower_the_bulk_energy(j in 1usize..8) {
        let dom = Domain::unit_square([D, N, D, N]);
        let y = j as f64 / 8.0;
        let d = EnergyDensity::isotropic(2.0).unwrap();
        let plain = solve(&dom, &Crack::empty(), 8, 2.0, "x + y");
        let k = Crack::segment(Point::new(0.25, y), Point::new(0.75, y));
        let cracked = solve(&dom, &k, 8, 2.0, "x + y");
        prop_assert!(bulk_energy(&cracked, &d) <= bulk_energy(&plain, &d) + 1e-12);
        let e = total_energy(&cracked, &k, &d).unwrap();
        prop_assert!((e.surface - 0.5).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn capacity_is_monotone_in_the_set(r in 1.5..3.5f64, a in 1usize..4, b in 1usize..4) {
        let disk = Domain::regular_polygon(Point::new(0.0, 0.0), 1.0, 64, D).unwrap();
        let s = 1.0 / 8.0;
        let small = Crack::segment(Point::new(0.0, 0.0), Point::new(a as f64 * s, 0.0));
        let big = small.union(&Crack::segment(Point::new(0.0, 0.0), Point::new(0.0, b as f64 * s)));
        let cs = capacity(&CapacitySet::Crack { crack: small }, &disk, r, 16).unwrap().value;
        let cb = capacity(&CapacitySet::Crack { crack: big }, &disk, r, 16).unwrap().value;
        prop_assert!(cs > 0.0 && cs <= cb + 1e-12);
    }
}

#[test]
fn p_two_capacity_of_a_point_decays_under_refinement() {
    let disk = Domain::regular_polygon(Point::new(0.0, 0.0), 1.0, 128, D).unwrap();
    let e = CapacitySet::point(Point::new(0.0, 0.0));
    let c: Vec<f64> = [8, 16, 32].iter().map(|&n| capacity(&e, &disk, 2.0, n).unwrap().value).collect();
    assert!(c[0] > c[1] && c[1] > c[2], "{c:?}");
}

#[test]
fn annulus_capacity_is_close_to_the_radial_value() {
    let disk = Domain::regular_polygon(Point::new(0.0, 0.0), 1.0, 256, D).unwrap();
    let inner = CapacitySet::disk(Point::new(0.0, 0.0), 0.25, 256);
    let c = capacity(&inner, &disk, 2.0, 64).unwrap().value;
    let exact = std::f64::consts::TAU / 4f64.ln();
    assert!((c - exact).abs() / exact < 0.05, "{c} vs {exact}");
}
