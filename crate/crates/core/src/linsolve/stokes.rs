//! Stationary Stokes saddle-point solver.
//!
//! Solves `−L z + G q = f`, `D z = g`, `z·n = trace` on the walls by CG on
//! the pressure Schur complement `S = −D A⁻¹ G` with `A = −L`. The inner
//! velocity solves are direct, so `S` is applied to round-off and the outer
//! iteration count stays flat under refinement.

use super::{cg_solve, SolveReport, SparseOperator, VelocitySolver};
use crate::error::{Error, Result};
use crate::grid::{
    divergence, gradient, vector_laplacian, BoundaryTrace, Grid, ScalarField, VectorField,
    VelocityBc,
};

/// Default relative tolerance of the outer pressure iteration.
pub const DEFAULT_STOKES_TOL: f64 = 1e-12;

const MAX_OUTER: usize = 500;

#[derive(Clone, Debug)]
pub struct StokesSolution {
    pub z: VectorField,
    /// Mean-zero pressure.
    pub q: ScalarField,
    pub report: SolveReport,
    /// Relative ℓ² residual of the momentum rows.
    pub momentum_residual: f64,
    /// Relative ℓ² residual of `D z = g`.
    pub divergence_residual: f64,
}

/// Reusable Stokes solver for one grid.
pub struct StokesSolver {
    grid: Grid,
    velocity: VelocitySolver,
}

impl StokesSolver {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            velocity: VelocitySolver::new(grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn velocity_solver(&self) -> &VelocitySolver {
        &self.velocity
    }

    /// `A⁻¹ r` on interior faces.
    fn inv_a(&self, r: &VectorField) -> VectorField {
        self.velocity.solve(0.0, -1.0, r).expect("grid-matched solve")
    }

    /// Schur complement action `−D A⁻¹ G q`.
    pub fn schur_apply(&self, q: &ScalarField) -> ScalarField {
        divergence(&self.inv_a(&gradient(q))).scaled(-1.0)
    }

    pub fn solve(&self, g: &ScalarField, trace: &BoundaryTrace, tol: f64) -> Result<StokesSolution> {
        self.solve_forced(&VectorField::zeros(self.grid), g, trace, tol)
    }

    /// Same system with a body force `f` on the momentum rows.
    pub fn solve_forced(
        &self,
        f: &VectorField,
        g: &ScalarField,
        trace: &BoundaryTrace,
        tol: f64,
    ) -> Result<StokesSolution> {
        let grid = self.grid;
        grid.check_same(&g.grid())?;
        grid.check_same(&f.grid())?;
        grid.check_same(&trace.grid())?;
        if !g.is_finite() || !f.is_finite() || !trace.is_finite() {
            return Err(Error::NonFinite("stokes data"));
        }
        check_compatibility(g, trace)?;

        let mut zb = VectorField::zeros(grid);
        zb.set_normal_trace(trace);
        let mut r = f.clone();
        r.zero_boundary();
        r.axpy(1.0, &vector_laplacian(&zb, VelocityBc::NoSlip));
        let g_tilde = g.sub(&divergence(&zb));
        let rhs = g_tilde.sub(&divergence(&self.inv_a(&r)));

        let ncell = grid.num_cells();
        let op = SparseOperator::from_fn(ncell, |x, y| {
            let q = ScalarField::from_values(grid, x.to_vec()).expect("length");
            y.copy_from_slice(self.schur_apply(&q).values());
        })
        .with_null_space(vec![vec![1.0; ncell]])?;
        let (qv, report) = cg_solve(&op, rhs.values(), tol, MAX_OUTER)?;
        if !report.converged {
            return Err(Error::NotConverged {
                solver: "stokes",
                iterations: report.iterations,
                residual: report.residual,
            });
        }
        let q = ScalarField::from_values(grid, qv)?;
        let gq = gradient(&q);
        let mut z = self.inv_a(&r.sub(&gq));
        z.set_normal_trace(trace);

        let mut mom = vector_laplacian(&z, VelocityBc::NoSlip).scaled(-1.0);
        mom.axpy(1.0, &gq);
        mom.axpy(-1.0, f);
        mom.zero_boundary();
        let mut fi = f.clone();
        fi.zero_boundary();
        let mom_scale = fi.l2_norm() + gq.l2_norm() + vector_laplacian(&zb, VelocityBc::NoSlip).l2_norm();
        let div_err = divergence(&z).sub(g).l2_norm();
        let div_scale = g.l2_norm() + divergence(&zb).l2_norm();
        Ok(StokesSolution {
            z,
            q,
            report,
            momentum_residual: relative(mom.l2_norm(), mom_scale),
            divergence_residual: relative(div_err, div_scale),
        })
    }
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Checks `∑ g h² = ∑ trace h` to `1e−10` relative.
pub(crate) fn check_compatibility(g: &ScalarField, trace: &BoundaryTrace) -> Result<()> {
    let grid = g.grid();
    let interior = g.integral();
    let boundary = trace.integral();
    let scale = 1.0
        + g.values().iter().map(|v| v.abs()).sum::<f64>() * grid.cell_area()
        + trace.iter().map(|v| v.abs()).sum::<f64>() * grid.h();
    if (interior - boundary).abs() > 1e-10 * scale {
        return Err(Error::Compatibility { interior, boundary });
    }
    Ok(())
}

/// One-shot convenience wrapper around [`StokesSolver`].
pub fn stokes_solve(g: &ScalarField, trace: &BoundaryTrace, tol: f64) -> Result<StokesSolution> {
    StokesSolver::new(g.grid()).solve(g, trace, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gradient_energy;
    use crate::linsolve::dense_solve;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_gives_zero() {
        let grid = Grid::new(8).unwrap();
        let s = stokes_solve(&ScalarField::zeros(grid), &BoundaryTrace::zeros(grid), 1e-10).unwrap();
        assert_eq!(s.z.max_abs(), 0.0);
        assert_eq!(s.q.l2_norm(), 0.0);
    }

    #[test]
    fn incompatible_flux_is_rejected() {
        let grid = Grid::new(8).unwrap();
        let err = stokes_solve(&ScalarField::zeros(grid), &BoundaryTrace::constant(grid, 1.0), 1e-10)
            .unwrap_err();
        assert!(matches!(err, Error::Compatibility { .. }));
    }

    #[test]
    fn cosine_divergence_residuals() {
        let grid = Grid::new(32).unwrap();
        let g = ScalarField::from_fn(grid, |x, y| (PI * x).cos() * (PI * y).cos());
        let s = stokes_solve(&g, &BoundaryTrace::zeros(grid), 1e-10).unwrap();
        assert!(s.divergence_residual <= 1e-9, "{}", s.divergence_residual);
        assert!(s.momentum_residual <= 1e-9, "{}", s.momentum_residual);
        assert!(s.q.integral().abs() < 1e-12);
        assert_eq!(s.z.boundary_max_abs(), 0.0);
    }

    #[test]
    fn constant_outflow_is_solvable() {
        let grid = Grid::new(16).unwrap();
        let g = ScalarField::constant(grid, 4.0);
        let s = stokes_solve(&g, &BoundaryTrace::constant(grid, 1.0), 1e-10).unwrap();
        assert!(s.divergence_residual <= 1e-9);
        let t = s.z.normal_trace();
        assert!(t.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn schur_solution_matches_dense_saddle_point() {
        // Small grid: assemble the full saddle-point matrix and solve densely.
        let grid = Grid::new(5).unwrap();
        let g = ScalarField::from_fn(grid, |x, y| (PI * x).cos() + 0.3 * (2.0 * PI * y).cos());
        let s = stokes_solve(&g, &BoundaryTrace::zeros(grid), 1e-12).unwrap();

        let nf = grid.num_faces();
        let nc = grid.num_cells();
        let dim = nf + nc;
        let apply = |x: &[f64]| -> Vec<f64> {
            let w = VectorField::from_flat(grid, &x[..nf]).unwrap();
            let q = ScalarField::from_values(grid, x[nf..].to_vec()).unwrap();
            let mut m = vector_laplacian(&w, VelocityBc::NoSlip).scaled(-1.0);
            m.axpy(1.0, &gradient(&q));
            let mut out = m.to_flat();
            // Wall-normal rows pin the boundary faces.
            VectorField::for_each_boundary_face(grid, |k, _| out[k] = x[k]);
            out.extend_from_slice(divergence(&w).values());
            out
        };
        let mut a = nalgebra::DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for c in 0..dim {
            e[c] = 1.0;
            let col = apply(&e);
            for r in 0..dim {
                a[(r, c)] = col[r];
            }
            e[c] = 0.0;
        }
        let mut b = vec![0.0; dim];
        b[nf..].copy_from_slice(g.values());
        let mut null = vec![0.0; dim];
        null[nf..].iter_mut().for_each(|x| *x = 1.0);
        let x = dense_solve(&a, &b, &[null]).unwrap();
        let z = VectorField::from_flat(grid, &x[..nf]).unwrap();
        let dz = z.sub(&s.z);
        assert!(gradient_energy(&dz).sqrt() <= 1e-8 * gradient_energy(&z).sqrt());
    }
}
