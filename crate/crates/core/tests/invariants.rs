use enslab::cli::{random_field, random_solenoidal, FieldDump};
use enslab::grid::{divergence, gradient, gradient_inner, BoundaryTrace, Grid, ScalarBc, ScalarField};
use enslab::heat::{DivergenceState, HeatStepper};
use enslab::lift::Lifter;
use enslab::sr::{evolve_h, BoundaryNormalState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scalar(grid: Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.num_cells()).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScalarField::from_values(grid, v).unwrap()
}

fn grid_of(p: u32) -> Grid {
    Grid::new(1 << p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn divergence_is_minus_adjoint_of_gradient(p in 3u32..6, seed in any::<u64>()) {
        let grid = grid_of(p);
        let w = random_field(grid, seed);
        let q = random_scalar(grid, seed ^ 1);
        let lhs = divergence(&w).dot(&q);
        let rhs = -w.dot(&gradient(&q));
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn leray_projection_is_an_orthogonal_idempotent(p in 3u32..6, seed in any::<u64>()) {
        let grid = grid_of(p);
        let l = Lifter::new(grid);
        let u = random_field(grid, seed);
        let pu = l.leray_project(&u).unwrap();
        let ppu = l.leray_project(&pu).unwrap();
        prop_assert!(ppu.sub(&pu).l2_norm() <= 1e-9 * pu.l2_norm().max(1e-300));
        prop_assert!(pu.dot(&u.sub(&pu)).abs() <= 1e-9 * u.dot(&u));
        prop_assert!(divergence(&pu).l2_norm() <= 1e-9 * divergence(&u).l2_norm());
    }

    #[test]
    fn decomposition_splits_exactly(p in 3u32..6, seed in any::<u64>()) {
        let grid = grid_of(p);
        let u = random_field(grid, seed);
        let d = Lifter::new(grid).decompose(&u).unwrap();
        prop_assert!(d.reconstruct().sub(&u).max_abs() <= 1e-13);
        prop_assert!(d.orthogonality_residual() <= 1e-9);
        prop_assert!(divergence(&d.v).l2_norm() <= 1e-9 * divergence(&u).l2_norm());
        prop_assert!(d.v.boundary_max_abs() == 0.0 && d.z.boundary_max_abs() == 0.0);
    }

    #[test]
    fn lift_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let grid = Grid::new(16).unwrap();
        let l = Lifter::new(grid);
        let mut g1 = random_scalar(grid, seed);
        let mut g2 = random_scalar(grid, seed.wrapping_add(7));
        g1.remove_mean();
        g2.remove_mean();
        let mut g = g1.scaled(a);
        g.axpy(b, &g2);
        let z = l.lift_divergence(&g).unwrap().z;
        let mut zz = l.lift_divergence(&g1).unwrap().z.scaled(a);
        zz.axpy(b, &l.lift_divergence(&g2).unwrap().z);
        prop_assert!(z.sub(&zz).l2_norm() <= 1e-8 * (1.0 + z.l2_norm()));
    }

    #[test]
    fn neumann_heat_conserves_mass_and_dissipates(seed in any::<u64>(), nu in 0.01f64..1.0, dt in 1e-4f64..1e-1) {
        let grid = Grid::new(16).unwrap();
        let st = HeatStepper::new(grid, ScalarBc::Neumann);
        let s0 = DivergenceState::new(random_scalar(grid, seed), ScalarBc::Neumann, nu).unwrap();
        let s1 = st.step(&s0, dt).unwrap();
        prop_assert!((s1.mass() - s0.mass()).abs() <= 1e-12 * (1.0 + s0.g.l2_norm()));
        prop_assert!(s1.g.l2_norm() <= s0.g.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn dirichlet_heat_dissipates(seed in any::<u64>(), dt in 1e-4f64..1e-1) {
        let grid = Grid::new(16).unwrap();
        let st = HeatStepper::new(grid, ScalarBc::Dirichlet);
        let s0 = DivergenceState::new(random_scalar(grid, seed), ScalarBc::Dirichlet, 0.1).unwrap();
        let s1 = st.step(&s0, dt).unwrap();
        prop_assert!(s1.g.l2_norm() < s0.g.l2_norm());
    }

    #[test]
    fn boundary_ode_matches_closed_form(h0 in -2.0f64..2.0, c in -2.0f64..2.0, lambda in 0.1f64..10.0, dt in 1e-4f64..0.5) {
        // h' = −λh + C̄ with constant C̄ relaxes to C̄/λ.
        let grid = Grid::new(8).unwrap();
        let h = BoundaryNormalState::new(BoundaryTrace::constant(grid, h0), 0.0).unwrap();
        let h1 = evolve_h(&h, c, lambda, dt).unwrap();
        let want = c / lambda + (h0 - c / lambda) * (-lambda * dt).exp();
        for v in h1.h.iter() {
            prop_assert!((v - want).abs() <= 1e-13 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn solenoidal_fields_have_no_divergence(p in 3u32..6, seed in any::<u64>()) {
        let grid = grid_of(p);
        let w = random_solenoidal(grid, seed);
        prop_assert!(divergence(&w).l2_norm() <= 1e-12);
        prop_assert!(w.boundary_max_abs() <= 1e-14);
        prop_assert!(gradient_inner(&w, &w).unwrap() > 0.0);
    }

    #[test]
    fn dumps_round_trip(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 64), t in 0.0f64..10.0) {
        let dir = tempfile::tempdir().unwrap();
        let g = ScalarField::from_values(Grid::new(8).unwrap(), vals).unwrap();
        let d = FieldDump::from_scalar(&g, "g", t);
        let p = dir.path().join("g.ensf");
        d.write(&p).unwrap();
        let back = FieldDump::read(&p).unwrap();
        prop_assert_eq!(back.to_scalar().unwrap(), g);
        prop_assert_eq!(back.time, t);
    }
}
