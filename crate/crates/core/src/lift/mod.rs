//! Divergence lifting, Leray projection and the `H¹₀` decomposition.

use crate::diagnostics::{h1_norm, hm1_norm_with, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{
    divergence, gradient, gradient_inner, BoundaryTrace, Grid, ScalarBc, ScalarField, VectorField,
};
use crate::linsolve::{PoissonSolver, StokesSolution, StokesSolver, DEFAULT_STOKES_TOL};

/// `u = v + z` with `v` solenoidal and `z` the Stokes lift of `div u`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub v: VectorField,
    pub z: VectorField,
    pub q: ScalarField,
}

impl Decomposition {
    /// `|⟨∇v, ∇z⟩| / (‖∇v‖‖∇z‖)`, zero when either factor vanishes.
    pub fn orthogonality_residual(&self) -> f64 {
        let ip = gradient_inner(&self.v, &self.z).expect("same grid");
        let scale = (gradient_inner(&self.v, &self.v).unwrap() * gradient_inner(&self.z, &self.z).unwrap()).sqrt();
        if scale > 0.0 {
            ip.abs() / scale
        } else {
            0.0
        }
    }

    pub fn reconstruct(&self) -> VectorField {
        self.v.add(&self.z)
    }
}

/// Cached solvers for repeated lifts and projections on one grid.
pub struct Lifter {
    grid: Grid,
    stokes: StokesSolver,
    neumann: PoissonSolver,
    tol: f64,
}

impl Lifter {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            stokes: StokesSolver::new(grid),
            neumann: PoissonSolver::new(grid, ScalarBc::Neumann),
            tol: DEFAULT_STOKES_TOL,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn stokes(&self) -> &StokesSolver {
        &self.stokes
    }

    pub fn neumann(&self) -> &PoissonSolver {
        &self.neumann
    }

    /// Leray projection: wall-normal faces are dropped, then the gradient of
    /// the Neumann potential of the divergence is removed.
    pub fn leray_project(&self, u: &VectorField) -> Result<VectorField> {
        Ok(self.leray_split(u)?.0)
    }

    /// `(ℙu, φ)` with `u = ℙu + ∇φ` on interior faces and `φ` mean-zero.
    pub fn leray_split(&self, u: &VectorField) -> Result<(VectorField, ScalarField)> {
        let mut w = u.clone();
        w.zero_boundary();
        let phi = self.neumann.poisson(&divergence(&w))?;
        w.axpy(-1.0, &gradient(&phi));
        Ok((w, phi))
    }

    /// Incremental pressure-correction step for a solenoidal field `w`
    /// driven by the explicit force `rhs`: implicit viscosity, then
    /// projection. Returns `(w⁺, π⁺)`.
    pub(crate) fn projection_step(
        &self,
        w: &VectorField,
        pressure: &ScalarField,
        mut rhs: VectorField,
        nu: f64,
        dt: f64,
    ) -> Result<(VectorField, ScalarField)> {
        rhs.axpy(-1.0, &gradient(pressure));
        let mut b = w.clone();
        b.axpy(dt, &rhs);
        let star = self.stokes.velocity_solver().solve(1.0, -dt * nu, &b)?;
        let (next, psi) = self.leray_split(&star)?;
        let mut p = pressure.clone();
        p.axpy(1.0 / dt, &psi);
        Ok((next, p))
    }

    /// Lift with zero boundary data; `g` must have zero mean.
    pub fn lift_divergence(&self, g: &ScalarField) -> Result<StokesSolution> {
        let mass = g.integral();
        let scale = g.values().iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_area();
        if mass.abs() > 1e-10 * (1.0 + scale) {
            return Err(Error::Compatibility {
                interior: mass,
                boundary: 0.0,
            });
        }
        self.stokes.solve(g, &BoundaryTrace::zeros(self.grid), self.tol)
    }

    /// Lift with wall-normal data `trace` and zero tangential velocity.
    pub fn lift_with_boundary(&self, g: &ScalarField, trace: &BoundaryTrace) -> Result<StokesSolution> {
        self.stokes.solve(g, trace, self.tol)
    }

    pub fn decompose(&self, u: &VectorField) -> Result<Decomposition> {
        if u.boundary_max_abs() > 1e-14 * (1.0 + u.max_abs()) {
            return Err(Error::InvalidArgument(
                "decompose needs zero wall-normal faces; project the flux first".into(),
            ));
        }
        let mut u = u.clone();
        u.zero_boundary();
        let s = self.lift_divergence(&divergence(&u))?;
        Ok(Decomposition {
            v: u.sub(&s.z),
            z: s.z,
            q: s.q,
        })
    }

    /// Ratio `‖z‖_{L²} / ‖g‖_{H̃⁻¹}` of the weak lifting bound. It is only
    /// measured: the square lacks the boundary regularity the bound needs.
    pub fn check_weak_lifting_bound(&self, g: &ScalarField) -> Result<DiagnosticsRecord> {
        let s = self.lift_divergence(g)?;
        let gm = hm1_norm_with(&self.neumann, g)?;
        let zl2 = s.z.l2_norm();
        let ratio = if gm > 0.0 { zl2 / gm } else { 0.0 };
        let mut r = DiagnosticsRecord::new("weak_lifting_bound", 0.0);
        r.set("n", self.grid.n() as f64)
            .set("z_l2", zl2)
            .set("g_hm1", gm)
            .set("ratio", ratio)
            .set("h1_ratio", lifting_constant(&s.z, g));
        Ok(r)
    }
}

/// `‖z‖_{H¹} / ‖g‖_{L²}`, the measured lifting constant.
pub fn lifting_constant(z: &VectorField, g: &ScalarField) -> f64 {
    let gn = g.l2_norm();
    if gn > 0.0 {
        h1_norm(z) / gn
    } else {
        0.0
    }
}

pub fn leray_project(u: &VectorField) -> Result<VectorField> {
    Lifter::new(u.grid()).leray_project(u)
}

pub fn lift_divergence(g: &ScalarField) -> Result<(VectorField, ScalarField)> {
    let s = Lifter::new(g.grid()).lift_divergence(g)?;
    Ok((s.z, s.q))
}

pub fn lift_with_boundary(g: &ScalarField, trace: &BoundaryTrace) -> Result<(VectorField, ScalarField)> {
    let s = Lifter::new(g.grid()).lift_with_boundary(g, trace)?;
    Ok((s.z, s.q))
}

pub fn decompose(u: &VectorField) -> Result<Decomposition> {
    Lifter::new(u.grid()).decompose(u)
}

pub fn check_weak_lifting_bound(g: &ScalarField) -> Result<DiagnosticsRecord> {
    Lifter::new(g.grid()).check_weak_lifting_bound(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::stream_function_curl;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: Grid, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = (0..grid.num_u()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = (0..grid.num_v()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut w = VectorField::from_components(grid, u, v).unwrap();
        w.zero_boundary();
        w
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal() {
        let grid = Grid::new(16).unwrap();
        let l = Lifter::new(grid);
        let mut p = ScalarField::from_fn(grid, |x, y| (2.0 * x).sin() + y * y);
        p.remove_mean();
        assert!(l.leray_project(&gradient(&p)).unwrap().max_abs() < 1e-9);
        let w = stream_function_curl(grid, |x, y| (PI * x).sin() * (PI * y).sin() * x);
        assert!(l.leray_project(&w).unwrap().sub(&w).max_abs() < 1e-10);
    }

    #[test]
    fn leray_is_idempotent_and_orthogonal() {
        let grid = Grid::new(16).unwrap();
        let l = Lifter::new(grid);
        let u = random_field(grid, 3);
        let pu = l.leray_project(&u).unwrap();
        let ppu = l.leray_project(&pu).unwrap();
        assert!(ppu.sub(&pu).l2_norm() <= 1e-10 * pu.l2_norm());
        assert!(pu.dot(&u.sub(&pu)).abs() <= 1e-9 * u.dot(&u));
        assert!(divergence(&pu).l2_norm() < 1e-10 * u.l2_norm() / grid.h());
    }

    #[test]
    fn lift_of_zero_and_of_random_divergence() {
        let grid = Grid::new(8).unwrap();
        let (z, q) = lift_divergence(&ScalarField::zeros(grid)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert_eq!(q.l2_norm(), 0.0);

        let grid = Grid::new(16).unwrap();
        let u = random_field(grid, 5);
        let g = divergence(&u);
        let (z, _) = lift_divergence(&g).unwrap();
        assert!(divergence(&z).sub(&g).l2_norm() <= 1e-9 * g.l2_norm());
    }

    #[test]
    fn lift_rejects_non_mean_zero() {
        let grid = Grid::new(8).unwrap();
        assert!(lift_divergence(&ScalarField::constant(grid, 1.0)).is_err());
    }

    #[test]
    fn boundary_lift_with_unit_outflow() {
        let grid = Grid::new(16).unwrap();
        let g = ScalarField::constant(grid, 4.0);
        let (z, _) = lift_with_boundary(&g, &BoundaryTrace::constant(grid, 1.0)).unwrap();
        assert!(divergence(&z).sub(&g).l2_norm() <= 1e-9 * g.l2_norm());
        assert!(lift_with_boundary(&ScalarField::zeros(grid), &BoundaryTrace::constant(grid, 1.0)).is_err());
        let (z0, _) = lift_with_boundary(&ScalarField::zeros(grid), &BoundaryTrace::zeros(grid)).unwrap();
        assert_eq!(z0.max_abs(), 0.0);
    }

    #[test]
    fn decomposition_invariants() {
        let grid = Grid::new(16).unwrap();
        let l = Lifter::new(grid);
        let u = random_field(grid, 8);
        let d = l.decompose(&u).unwrap();
        assert!(d.orthogonality_residual() <= 1e-9, "{}", d.orthogonality_residual());
        assert!(divergence(&d.v).l2_norm() <= 1e-9 * divergence(&u).l2_norm());
        assert!(d.reconstruct().sub(&u).max_abs() <= 1e-14 * u.max_abs());

        // A lift decomposes to itself.
        let d2 = l.decompose(&d.z).unwrap();
        assert!(d2.v.l2_norm() <= 1e-9 * d.z.l2_norm(), "{} {}", d2.v.l2_norm(), d.z.l2_norm());

        // A solenoidal field has no lift.
        let w = stream_function_curl(grid, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        let d3 = l.decompose(&w).unwrap();
        assert!(d3.z.l2_norm() <= 1e-9 * w.l2_norm());
    }

    #[test]
    fn lift_is_linear() {
        let grid = Grid::new(16).unwrap();
        let l = Lifter::new(grid);
        let g1 = divergence(&random_field(grid, 1));
        let g2 = divergence(&random_field(grid, 2));
        let mut g = g1.scaled(2.0);
        g.axpy(-0.5, &g2);
        let z = l.lift_divergence(&g).unwrap().z;
        let mut zz = l.lift_divergence(&g1).unwrap().z.scaled(2.0);
        zz.axpy(-0.5, &l.lift_divergence(&g2).unwrap().z);
        assert!(z.sub(&zz).l2_norm() <= 1e-8 * z.l2_norm());
    }

    #[test]
    fn weak_bound_ratio_of_zero_is_zero() {
        let grid = Grid::new(8).unwrap();
        let r = check_weak_lifting_bound(&ScalarField::zeros(grid)).unwrap();
        assert_eq!(r.metric("ratio"), Some(0.0));
    }
}
