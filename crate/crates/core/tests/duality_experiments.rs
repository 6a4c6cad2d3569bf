use std::sync::Arc;

use fraclab_core::duality::{build_conjugate, build_local_conjugate, integrate_conjugate, verify_solution_via_conjugate, Rect};
use fraclab_core::energy::EnergyDensity;
use fraclab_core::experiments::{
    make_sequence, quasistatic_evolve, unilateral_gap, Dictionary, EvolutionOptions, LoadProgram, SequenceKind,
    SequenceParams,
};
use fraclab_core::expr::Expr;
use fraclab_core::geometry::BoundaryLoop;
use fraclab_core::mesh::CrackedMesh;
use fraclab_core::solver::{solve_elastic, SolveOptions};
use fraclab_core::{BoundaryKind, Crack, Domain, Error, Point};

use BoundaryKind::{Dirichlet as D, Neumann as N};

fn solve(dom: &Domain, k: &Crack, n: usize, p: f64, g: &str) -> fraclab_core::solver::FieldSolution {
    let mesh = Arc::new(CrackedMesh::build(dom, k, n).unwrap());
    solve_elastic(mesh, &EnergyDensity::isotropic(p).unwrap(), &Expr::parse(g).unwrap(), &SolveOptions::default()).unwrap()
}

#[test]
fn interior_slit_certificate() {
    let dom = Domain::unit_square([D, N, D, N]);
    let k = Crack::segment(Point::new(0.25, 0.5), Point::new(0.75, 0.5));
    for p in [1.5, 2.0, 4.0] {
        let u = solve(&dom, &k, 64, p, "x + 2*y");
        let v = build_conjugate(&u).unwrap();
        let verdict = verify_solution_via_conjugate(&u, &v).unwrap();
        assert!(verdict.pass, "p={p}: {verdict:?}");
        assert!(verdict.max_circulation <= 1e-8);
    }
}

#[test]
fn unconverged_fields_are_refused_but_can_be_integrated() {
    let dom = Domain::unit_square([D; 4]);
    let u = solve(&dom, &Crack::empty(), 16, 2.0, "x*y");
    let bent: Vec<f64> = u.values().iter().enumerate().map(|(i, v)| v + if i % 3 == 0 { 0.01 } else { 0.0 }).collect();
    let bent = u.with_values(bent).unwrap();
    assert!(matches!(build_conjugate(&bent), Err(Error::Unconverged(_))));
    let v = integrate_conjugate(&bent).unwrap();
    assert!(!verify_solution_via_conjugate(&bent, &v).unwrap().pass);
}

#[test]
fn annulus_is_certified_through_local_rectangles() {
    let p = Point::new;
    let outer = BoundaryLoop::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)], vec![D, N, D, N]).unwrap();
    let hole = BoundaryLoop::uniform(vec![p(0.25, 0.25), p(0.75, 0.25), p(0.75, 0.75), p(0.25, 0.75)], N).unwrap();
    let dom = Domain::new(outer, vec![hole]).unwrap();
    let u = solve(&dom, &Crack::empty(), 32, 3.0, "y + 0.3*x");
    assert!(matches!(build_conjugate(&u), Err(Error::NotSimplyConnected)));
    for r in [
        Rect::new(p(-0.1, -0.1), p(0.8, 0.3)),
        Rect::new(p(0.7, -0.1), p(1.1, 0.8)),
        Rect::new(p(0.2, 0.7), p(1.1, 1.1)),
        Rect::new(p(-0.1, 0.2), p(0.3, 1.1)),
    ] {
        let v = build_local_conjugate(&u, r).unwrap();
        assert!(verify_solution_via_conjugate(&u, &v).unwrap().pass);
    }
}

#[test]
fn sequence_examples() {
    let dom = Domain::unit_square([N, D, N, D]);
    let k = Crack::segment(Point::new(0.5, 0.0), Point::new(0.5, 0.5));
    let s = make_sequence(SequenceKind::GrowToLimit, &dom, &k, &SequenceParams::new(vec![4, 8, 16, 32, 64])).unwrap();
    let d: Vec<f64> = s.members.iter().map(|m| m.hausdorff).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    assert!(s.members.iter().all(|m| (m.hausdorff * m.h as f64 - 1.0).abs() < 1e-12));
    let c = make_sequence(SequenceKind::Constant, &dom, &k, &SequenceParams::new(vec![4, 8])).unwrap();
    assert!(c.members.iter().all(|m| m.hausdorff == 0.0));
}

#[test]
fn uncracked_strip_gap() {
    let dom = Domain::unit_square([D, N, D, N]);
    let d = EnergyDensity::isotropic(2.0).unwrap();
    let g = Expr::parse("2*y").unwrap();
    let u = solve(&dom, &Crack::empty(), 16, 2.0, "2*y");
    let cut = Crack::segment(Point::new(0.0, 0.5), Point::new(1.0, 0.5));
    let r = unilateral_gap(&u, &Crack::empty(), &Dictionary::new(vec![cut]), &d, &g).unwrap();
    assert!((r.gap + 3.0).abs() <= 0.02 * 3.0, "{}", r.gap);
}

#[test]
fn evolution_invariants_under_a_non_monotone_load() {
    let dom = Domain::unit_square([D, N, D, N]);
    let d = EnergyDensity::isotropic(2.0).unwrap();
    let load = LoadProgram::new(Expr::parse("t*y").unwrap(), vec![0.5, 1.5, 0.2, 2.0]).unwrap_err();
    assert!(matches!(load, Error::InvalidParameter(_)));
    // a load that rises and falls over an increasing time grid
    let load = LoadProgram::uniform(Expr::parse("(1.6 - (t - 1.6)*(t - 1.6))*y").unwrap(), 0.0, 0.4, 8).unwrap();
    let cuts: Vec<Crack> = [0.25, 0.5, 0.75].iter().map(|&y| Crack::segment(Point::new(0.0, y), Point::new(1.0, y))).collect();
    let s = quasistatic_evolve(&dom, &d, &load, &Dictionary::new(cuts), &EvolutionOptions::new(8)).unwrap();
    assert!(s.aborted.is_none() && s.is_irreversible());
    let surface: Vec<f64> = s.steps.iter().map(|st| st.energy.surface).collect();
    assert!(surface.windows(2).all(|w| w[1] >= w[0]));
    assert!(s.steps.iter().all(|st| st.gap >= -1e-8));
    // once cut, the crack stays even after unloading
    assert_eq!(s.steps.last().unwrap().crack.component_count(), 1);
}
