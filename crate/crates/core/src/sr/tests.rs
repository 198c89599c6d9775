use super::*;
use crate::grid::{stream_function_curl, BoundaryTrace};
use crate::jl::JlSolver;
use std::f64::consts::PI;

fn vortex(grid: Grid) -> VectorField {
    stream_function_curl(grid, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2))
}

/// A vortex plus the Stokes lift of `ε sin πx sin πy` with a uniform
/// outward flux carrying its mass.
fn perturbed(grid: Grid, eps: f64) -> VectorField {
    let g = ScalarField::from_fn(grid, |x, y| eps * (PI * x).sin() * (PI * y).sin());
    let trace = BoundaryTrace::constant(grid, g.integral() / grid.perimeter());
    let z = Lifter::new(grid).lift_with_boundary(&g, &trace).unwrap().z;
    vortex(grid).add(&z)
}

#[test]
fn reduction_matches_reference_on_both_routes() {
    let grid = Grid::new(16).unwrap();
    let nu = 0.1;
    let jl = JlSolver::new(grid, nu).unwrap();
    let u0 = vortex(grid);
    let r0 = jl.initial_state(u0.clone(), ForcingSpec::Zero).unwrap();
    for lambda in [0.5, 1.0, 5.0] {
        let sr = SrSolver::new(grid, nu, lambda).unwrap();
        let s0 = sr.initial_state(u0.clone(), ForcingSpec::Zero).unwrap();
        assert!(s0.pressure.sub(&r0.pressure).l2_norm() <= 1e-9);
        let (mut u, mut p) = (u0.clone(), r0.pressure.clone());
        let (mut a, mut b) = (s0.clone(), s0);
        for k in 0..10 {
            let t = k as f64 * 1e-3;
            (u, p) = jl.step_reference(&u, &p, &ForcingSpec::Zero, t, 1e-3).unwrap();
            a = sr.step_constructive(&a, 1e-3).unwrap();
            b = sr.step_direct(&b, 1e-3).unwrap();
            assert!(a.u.sub(&u).l2_norm() <= 1e-8);
            assert!(b.u.sub(&u).l2_norm() <= 1e-8);
            assert!(divergence(&a.u).l2_norm() <= 1e-10);
            assert!(divergence(&b.u).l2_norm() <= 1e-10);
            assert!(a.h.h.max_abs() <= 1e-12 && b.h.h.max_abs() <= 1e-12);
        }
    }
}

#[test]
fn constructive_route_keeps_solvability_and_traces() {
    let grid = Grid::new(16).unwrap();
    let sr = SrSolver::new(grid, 0.1, 1.0).unwrap();
    let s0 = sr.initial_state(perturbed(grid, 1e-2), ForcingSpec::Zero).unwrap();
    assert!(s0.g.g.integral().abs() > 1e-4);
    let hist = run(&sr, s0, SrRoute::Constructive, 1e-3, 20).unwrap();
    for s in &hist {
        assert!(s.solvability_gap().abs() <= 1e-12, "{}", s.solvability_gap());
        let faces = s.u.normal_trace().sub(&s.h.h).max_abs();
        assert!(faces <= 1e-12, "{faces}");
        let d = divergence(&s.u).sub(&s.g.g).l2_norm();
        assert!(d <= 1e-9, "{d}");
    }
}

#[test]
fn incompatible_data_gap_contracts_exactly() {
    let grid = Grid::new(16).unwrap();
    let lambda = 2.0;
    let sr = SrSolver::new(grid, 0.1, lambda).unwrap();
    let g = DivergenceState::new(
        ScalarField::from_fn(grid, |x, y| (PI * x).sin() * (PI * y).sin()),
        ScalarBc::Dirichlet,
        0.1,
    )
    .unwrap();
    let mut h = BoundaryNormalState::zeros(grid);
    let mut gs = g;
    let gap0 = h.flux() - gs.g.integral();
    for k in 1..=50 {
        (gs, h, _) = sr.advance_data(&gs, &h, 1e-2).unwrap();
        let gap = h.flux() - gs.g.integral();
        let expect = gap0 * (-lambda * 1e-2 * k as f64).exp();
        assert!((gap - expect).abs() <= 1e-12 * gap0.abs(), "{gap} {expect}");
    }
}

#[test]
fn step_constructive_rejects_incompatible_state() {
    let grid = Grid::new(8).unwrap();
    let sr = SrSolver::new(grid, 0.1, 1.0).unwrap();
    let mut s = sr.initial_state(vortex(grid), ForcingSpec::Zero).unwrap();
    s.h = BoundaryNormalState::new(BoundaryTrace::constant(grid, 1e-3), 0.0).unwrap();
    assert!(matches!(sr.step_constructive(&s, 1e-3), Err(Error::SolvabilityDrift(_))));
}

#[test]
fn normal_flux_relaxes_at_the_damping_rate() {
    let grid = Grid::new(16).unwrap();
    let lambda = 5.0;
    let sr = SrSolver::new(grid, 0.1, lambda).unwrap();
    let u0 = normal_flux_field(grid, 0.1);
    let h0 = u0.normal_trace().max_abs();
    assert!(h0 > 0.09);
    let s0 = sr.initial_state(u0, ForcingSpec::Zero).unwrap();
    assert!(s0.g.g.l2_norm() < 1e-14);
    let dt = 2e-3;
    let steps = (10.0 / lambda / dt).round() as usize;
    let s = run_to_end(&sr, s0, SrRoute::Constructive, dt, steps).unwrap();
    let expect = h0 * (-lambda * s.time).exp();
    assert!((s.h.h.max_abs() - expect).abs() <= 1e-12);
    assert!(s.u.normal_trace().max_abs() <= 1e-4);
}

#[test]
fn routes_agree_to_first_order() {
    let grid = Grid::new(16).unwrap();
    let sr = SrSolver::new(grid, 0.1, 1.0).unwrap();
    let u0 = perturbed(grid, 1e-1);
    let mut gaps = vec![];
    for dt in [4e-3, 2e-3, 1e-3] {
        let steps = (0.04 / dt as f64).round() as usize;
        let s0 = sr.initial_state(u0.clone(), ForcingSpec::Zero).unwrap();
        let a = run_to_end(&sr, s0.clone(), SrRoute::Constructive, dt, steps).unwrap();
        let b = run_to_end(&sr, s0, SrRoute::Direct, dt, steps).unwrap();
        assert!(b.solvability_gap().abs() < 1e-12);
        assert!(b.u.normal_trace().sub(&b.h.h).max_abs() < 1e-14);
        assert!(divergence(&b.u).sub(&b.g.g).l2_norm() < 1e-10);
        assert!(wall_divergence(&b.g.g) < 1e-3);
        gaps.push(a.u.sub(&b.u).l2_norm());
    }
    let o1 = (gaps[0] / gaps[1]).log2();
    let o2 = (gaps[1] / gaps[2]).log2();
    assert!(o1 >= 0.9 && o2 >= 0.9, "{gaps:?}");
}
