use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Config, Forcing, Ic, System};
use crate::advection::advect;
use crate::error::Result;
use crate::forcing::ForcingSpec;
use crate::galerkin::Drive;
use crate::grid::{stream_function_curl, BoundaryTrace, Grid, ScalarField, VectorField};
use crate::jl::manufactured;
use crate::lift::Lifter;

pub fn vortex(grid: Grid, amp: f64) -> VectorField {
    stream_function_curl(grid, move |x, y| amp * (PI * x).sin().powi(2) * (PI * y).sin().powi(2))
}

/// Divergence eigenmode matching the system's closure: `cos cos` for the
/// Neumann flow, `sin sin` for the Dirichlet one.
pub fn divergence_mode(grid: Grid, system: System, mode: usize, eps: f64) -> ScalarField {
    let m = mode as f64 * PI;
    let mut g = match system {
        System::Jl => ScalarField::from_fn(grid, |x, y| eps * (m * x).cos() * (m * y).cos()),
        System::Sr => ScalarField::from_fn(grid, |x, y| eps * (m * x).sin() * (m * y).sin()),
    };
    if system == System::Jl {
        g.remove_mean();
    }
    g
}

/// Lift of the divergence mode: zero wall flux for JL, a uniform outward
/// flux carrying the mass for SR.
pub fn divergence_lift(lifter: &Lifter, system: System, g: &ScalarField) -> Result<VectorField> {
    let grid = g.grid();
    match system {
        System::Jl => Ok(lifter.lift_divergence(g)?.z),
        System::Sr => {
            let trace = BoundaryTrace::constant(grid, g.integral() / grid.perimeter());
            Ok(lifter.lift_with_boundary(g, &trace)?.z)
        }
    }
}

/// Exact eigenvalue of `−Δ_N` for the discrete `cos(mπx) cos(mπy)` mode.
pub fn discrete_neumann_eigenvalue(grid: Grid, mode: usize) -> f64 {
    let h = grid.h();
    let s = (mode as f64 * PI * h / 2.0).sin();
    8.0 * s * s / (h * h)
}

/// Seeded field with zero wall faces and unit L² norm.
pub fn random_field(grid: Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = (0..grid.num_u()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v = (0..grid.num_v()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut w = VectorField::from_components(grid, u, v).expect("sizes");
    w.zero_boundary();
    let n = w.l2_norm();
    w.scaled(1.0 / n)
}

/// Seeded smooth solenoidal field with no wall flux and unit L² norm.
pub fn random_solenoidal(grid: Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let w = stream_function_curl(grid, move |x, y| {
        let bump = (PI * x).sin().powi(2) * (PI * y).sin().powi(2);
        bump * c
            .iter()
            .enumerate()
            .map(|(k, (a, px, py))| a * ((k as f64 + 1.0) * PI * (x + px)).cos() * ((k as f64 % 3.0 + 1.0) * PI * (y + py)).sin())
            .sum::<f64>()
    });
    let n = w.l2_norm();
    w.scaled(1.0 / n)
}

pub fn initial_velocity(cfg: &Config, lifter: &Lifter) -> Result<VectorField> {
    let grid = lifter.grid();
    let div = || -> Result<VectorField> {
        let g = divergence_mode(grid, cfg.system, cfg.mode, cfg.eps);
        divergence_lift(lifter, cfg.system, &g)
    };
    Ok(match cfg.ic {
        Ic::Reduction => vortex(grid, cfg.amp),
        Ic::EigenmodeDiv => div()?,
        Ic::Perturbed => vortex(grid, cfg.amp).add(&div()?),
        Ic::NormalFlux => crate::sr::normal_flux_field(grid, cfg.eps),
        Ic::Random => random_field(grid, cfg.seed).scaled(cfg.amp),
    })
}

pub fn forcing(cfg: &Config) -> ForcingSpec {
    match cfg.forcing {
        Forcing::Zero => ForcingSpec::Zero,
        Forcing::Manufactured => manufactured::forcing(cfg.nu),
    }
}

/// `(z(t), f̃(t))` for the JL eigenmode data, whose divergence decays as a
/// single discrete exponential: `z = e^{−νμt} z₀` and `∂t z = −νμ z`.
pub fn eigenmode_drive(
    cfg: &Config,
    z0: VectorField,
    forcing: ForcingSpec,
) -> impl Fn(f64) -> Result<Drive> + Send + Sync {
    let grid = z0.grid();
    let rate = cfg.nu * discrete_neumann_eigenvalue(grid, cfg.mode);
    move |t: f64| {
        let z = z0.scaled((-rate * t).exp());
        let mut ft = forcing.eval(grid, t);
        ft.axpy(-1.0, &advect(&z, &z));
        ft.axpy(rate, &z);
        ft.zero_boundary();
        Ok(Drive { z, ftilde: ft })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian_neumann;

    #[test]
    fn discrete_mode_is_an_exact_eigenvector() {
        let grid = Grid::new(16).unwrap();
        for m in 1..4 {
            let g = divergence_mode(grid, System::Jl, m, 1.0);
            let mut lg = laplacian_neumann(&g);
            lg.axpy(discrete_neumann_eigenvalue(grid, m), &g);
            assert!(lg.l2_norm() <= 1e-10 * g.l2_norm() * discrete_neumann_eigenvalue(grid, m));
        }
    }

    #[test]
    fn random_fields_are_seeded() {
        let grid = Grid::new(8).unwrap();
        assert_eq!(random_field(grid, 3), random_field(grid, 3));
        assert_ne!(random_field(grid, 3), random_field(grid, 4));
        let w = random_solenoidal(grid, 9);
        assert!(crate::grid::divergence(&w).l2_norm() < 1e-12);
        assert!((w.l2_norm() - 1.0).abs() < 1e-12);
    }
}
