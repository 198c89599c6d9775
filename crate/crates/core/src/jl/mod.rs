//! Time stepping of the extended system `∂t u + ℙ(u·∇u − f) = ν(ℙΔu + ∇ div u)`
//! with no-slip walls.
//!
//! Two routes discretize the same semi-discrete system:
//!
//! * [`JlSolver::step_decomposed`] evolves `g = div u` with the heat stepper,
//!   lifts it to `z`, and advances `v = u − z` by a projection step of the
//!   perturbed equation.
//! * [`JlSolver::step_direct`] splits `u = ℙu + ∇φ`, evolves the gradient
//!   part through its own backward Euler divergence flow and feeds the
//!   coupling `ν ℙΔ∇φ` to the solenoidal part in Stokes-pressure form.
//!
//! Both use the same incremental pressure-correction projection, which is
//! also the reference incompressible stepper ([`JlSolver::step_reference`]).

mod energy;
pub mod manufactured;

pub use energy::{check_energy_bound, coercivity_probe, energy_ledger, EnergyLedger};

use crate::advection::{advect, check_cfl};
use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::grid::{
    divergence, gradient, vector_laplacian, Grid, ScalarBc, ScalarField, VectorField, VelocityBc,
};
use crate::heat::{DivergenceState, HeatStepper};
use crate::lift::{Decomposition, Lifter};

#[derive(Clone, Debug)]
pub struct JlState {
    pub time: f64,
    pub u: VectorField,
    /// Divergence carried by the route: the heat-oracle state for the
    /// decomposed route, the route's own flow for the direct one.
    pub g: DivergenceState,
    /// `(v, z, q)`; kept current by the decomposed route.
    pub decomposition: Option<Decomposition>,
    /// Accumulated pressure of the incremental projection.
    pub pressure: ScalarField,
    pub nu: f64,
    pub forcing: ForcingSpec,
}

impl JlState {
    pub fn grid(&self) -> Grid {
        self.u.grid()
    }
}

/// Solvers for one grid and viscosity.
pub struct JlSolver {
    grid: Grid,
    nu: f64,
    lifter: Lifter,
    heat: HeatStepper,
}

impl JlSolver {
    pub fn new(grid: Grid, nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        Ok(Self {
            grid,
            nu,
            lifter: Lifter::new(grid),
            heat: HeatStepper::new(grid, ScalarBc::Neumann),
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lifter(&self) -> &Lifter {
        &self.lifter
    }

    pub fn heat(&self) -> &HeatStepper {
        &self.heat
    }

    /// Builds the initial state, decomposing `u0` and computing the
    /// pressure consistent with the first explicit right-hand side.
    pub fn initial_state(&self, u0: VectorField, forcing: ForcingSpec) -> Result<JlState> {
        self.grid.check_same(&u0.grid())?;
        if !u0.is_finite() {
            return Err(Error::NonFinite("initial velocity"));
        }
        if u0.boundary_max_abs() > 1e-14 * (1.0 + u0.max_abs()) {
            return Err(Error::InvalidArgument("initial velocity must vanish on the walls".into()));
        }
        let mut u = u0;
        u.zero_boundary();
        let g = DivergenceState::new(divergence(&u), ScalarBc::Neumann, self.nu)?;
        let dec = self.lifter.decompose(&u)?;
        let zdot = self.lifter.lift_divergence(&crate::grid::laplacian_neumann(&g.g).scaled(self.nu))?.z;
        let mut rhs = forcing.eval(self.grid, 0.0);
        rhs.axpy(-1.0, &zdot);
        rhs.axpy(-1.0, &advect(&u, &u));
        rhs.axpy(self.nu, &vector_laplacian(&dec.v, VelocityBc::NoSlip));
        let (_, pressure) = self.lifter.leray_split(&rhs)?;
        Ok(JlState {
            time: 0.0,
            u,
            g,
            decomposition: Some(dec),
            pressure,
            nu: self.nu,
            forcing,
        })
    }

    fn projection_step(
        &self,
        w: &VectorField,
        pressure: &ScalarField,
        rhs: VectorField,
        dt: f64,
    ) -> Result<(VectorField, ScalarField)> {
        self.lifter.projection_step(w, pressure, rhs, self.nu, dt)
    }

    /// Standard incompressible projection step, the reduction reference.
    pub fn step_reference(
        &self,
        u: &VectorField,
        pressure: &ScalarField,
        forcing: &ForcingSpec,
        t: f64,
        dt: f64,
    ) -> Result<(VectorField, ScalarField)> {
        check_dt(dt)?;
        check_cfl(u, dt)?;
        let mut rhs = forcing.eval(self.grid, t);
        rhs.axpy(-1.0, &advect(u, u));
        self.projection_step(u, pressure, rhs, dt)
    }

    pub fn step_decomposed(&self, s: &JlState, dt: f64) -> Result<JlState> {
        check_dt(dt)?;
        check_cfl(&s.u, dt)?;
        let dec = match &s.decomposition {
            Some(d) => d.clone(),
            None => self.lifter.decompose(&s.u)?,
        };
        let g = self.heat.step(&s.g, dt)?;
        let lift = self.lifter.lift_divergence(&g.g)?;
        let zdot = lift.z.sub(&dec.z).scaled(1.0 / dt);

        let mut rhs = s.forcing.eval(self.grid, s.time);
        rhs.axpy(-1.0, &zdot);
        rhs.axpy(-1.0, &advect(&s.u, &s.u));
        let (v, pressure) = self.projection_step(&dec.v, &s.pressure, rhs, dt)?;
        let u = v.add(&lift.z);
        finish(JlState {
            time: s.time + dt,
            u,
            g,
            decomposition: Some(Decomposition {
                v,
                z: lift.z,
                q: lift.q,
            }),
            pressure,
            nu: self.nu,
            forcing: s.forcing.clone(),
        })
    }

    /// `(∇p_s, p_s)` with `∇p_s = (I − ℙ)(Δu − ∇ div u)`.
    pub fn stokes_pressure(&self, u: &VectorField) -> Result<(VectorField, ScalarField)> {
        let mut x = vector_laplacian(u, VelocityBc::NoSlip);
        x.axpy(-1.0, &gradient(&divergence(u)));
        let (px, ps) = self.lifter.leray_split(&x)?;
        x.zero_boundary();
        Ok((x.sub(&px), ps))
    }

    /// `ℙΔw = Δw − ∇p_s(w) − ∇ div w` for `w` with zero wall-normal faces.
    fn projected_laplacian(&self, w: &VectorField) -> Result<VectorField> {
        let (gps, _) = self.stokes_pressure(w)?;
        let mut out = vector_laplacian(w, VelocityBc::NoSlip);
        out.axpy(-1.0, &gps);
        out.axpy(-1.0, &gradient(&divergence(w)));
        Ok(out)
    }

    pub fn step_direct(&self, s: &JlState, dt: f64) -> Result<JlState> {
        check_dt(dt)?;
        check_cfl(&s.u, dt)?;
        let g_next = self.heat.backward_euler(&divergence(&s.u), self.nu, dt)?;
        let phi = self.lifter.neumann().poisson(&g_next)?;
        let grad_phi = gradient(&phi);
        let (w, _) = self.lifter.leray_split(&s.u)?;

        let mut rhs = s.forcing.eval(self.grid, s.time);
        rhs.axpy(-1.0, &advect(&s.u, &s.u));
        rhs.axpy(self.nu, &self.projected_laplacian(&grad_phi)?);
        let (w_next, pressure) = self.projection_step(&w, &s.pressure, rhs, dt)?;
        let u = w_next.add(&grad_phi);
        let g = DivergenceState {
            g: g_next,
            time: s.time + dt,
            ..s.g.clone()
        };
        finish(JlState {
            time: s.time + dt,
            u,
            g,
            decomposition: None,
            pressure,
            nu: self.nu,
            forcing: s.forcing.clone(),
        })
    }
}

fn finish(s: JlState) -> Result<JlState> {
    if !s.u.is_finite() {
        return Err(Error::NonFinite("velocity after step"));
    }
    Ok(s)
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

/// Which stepper drives a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JlRoute {
    Decomposed,
    Direct,
}

/// Runs `steps` steps and returns every state, the initial one included.
pub fn run(solver: &JlSolver, s0: JlState, route: JlRoute, dt: f64, steps: usize) -> Result<Vec<JlState>> {
    let mut hist = Vec::with_capacity(steps + 1);
    hist.push(s0);
    for _ in 0..steps {
        let s = hist.last().unwrap();
        let next = match route {
            JlRoute::Decomposed => solver.step_decomposed(s, dt)?,
            JlRoute::Direct => solver.step_direct(s, dt)?,
        };
        hist.push(next);
    }
    Ok(hist)
}

/// Final state only, without keeping the history.
pub fn run_to_end(solver: &JlSolver, s0: JlState, route: JlRoute, dt: f64, steps: usize) -> Result<JlState> {
    let mut s = s0;
    for _ in 0..steps {
        s = match route {
            JlRoute::Decomposed => solver.step_decomposed(&s, dt)?,
            JlRoute::Direct => solver.step_direct(&s, dt)?,
        };
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::stream_function_curl;
    use std::f64::consts::PI;

    fn vortex(grid: Grid, amp: f64) -> VectorField {
        stream_function_curl(grid, move |x, y| amp * (PI * x).sin().powi(2) * (PI * y).sin().powi(2))
    }

    #[test]
    fn zero_stays_zero_on_both_routes() {
        let grid = Grid::new(8).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let s0 = solver.initial_state(VectorField::zeros(grid), ForcingSpec::Zero).unwrap();
        for route in [JlRoute::Decomposed, JlRoute::Direct] {
            let s = run_to_end(&solver, s0.clone(), route, 1e-2, 5).unwrap();
            assert_eq!(s.u.max_abs(), 0.0);
        }
    }

    #[test]
    fn solenoidal_start_matches_reference() {
        let grid = Grid::new(16).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let u0 = vortex(grid, 1.0);
        let s0 = solver.initial_state(u0.clone(), ForcingSpec::Zero).unwrap();
        let (mut u, mut p) = (u0, s0.pressure.clone());
        let mut a = s0.clone();
        let mut b = s0;
        for k in 0..10 {
            let t = k as f64 * 1e-3;
            (u, p) = solver.step_reference(&u, &p, &ForcingSpec::Zero, t, 1e-3).unwrap();
            a = solver.step_decomposed(&a, 1e-3).unwrap();
            b = solver.step_direct(&b, 1e-3).unwrap();
            assert!(a.u.sub(&u).l2_norm() <= 1e-8);
            assert!(b.u.sub(&u).l2_norm() <= 1e-8);
            assert!(divergence(&a.u).l2_norm() <= 1e-10);
            assert!(divergence(&b.u).l2_norm() <= 1e-10);
        }
    }

    #[test]
    fn decomposed_route_tracks_heat_oracle() {
        let grid = Grid::new(16).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let g0 = ScalarField::from_fn(grid, |x, y| 1e-3 * (PI * x).cos() * (PI * y).cos());
        let z0 = solver.lifter().lift_divergence(&g0).unwrap().z;
        let s0 = solver.initial_state(z0, ForcingSpec::Zero).unwrap();
        let s = run_to_end(&solver, s0, JlRoute::Decomposed, 1e-3, 10).unwrap();
        let err = divergence(&s.u).sub(&s.g.g).l2_norm();
        assert!(err <= 1e-9 * s.g.g.l2_norm().max(1e-300) + 1e-15, "{err}");
    }

    #[test]
    fn stokes_pressure_is_harmonic_in_the_interior() {
        let grid = Grid::new(16).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let u = vortex(grid, 1.0);
        let (gps, ps) = solver.stokes_pressure(&u).unwrap();
        let lap = crate::grid::laplacian_neumann(&ps);
        let n = grid.n();
        let (mut inner, mut total) = (0.0_f64, 0.0_f64);
        for j in 0..n {
            for i in 0..n {
                let v = lap.at(i, j).abs();
                total = total.max(v);
                if grid.is_interior_cell(i, j) {
                    inner = inner.max(v);
                }
            }
        }
        assert!(total > 0.0);
        assert!(inner <= 1e-6 * total, "{inner} {total}");
        // For solenoidal u the formula reduces to (I − ℙ)Δu.
        let lu = vector_laplacian(&u, VelocityBc::NoSlip);
        let alt = lu.sub(&solver.lifter().leray_project(&lu).unwrap());
        assert!(alt.sub(&gps).l2_norm() <= 1e-9 * gps.l2_norm());
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let grid = Grid::new(16).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let s0 = solver.initial_state(vortex(grid, 1.0), ForcingSpec::Zero).unwrap();
        assert!(matches!(solver.step_decomposed(&s0, 1.0), Err(Error::Cfl { .. })));
        assert!(matches!(solver.step_direct(&s0, 1.0), Err(Error::Cfl { .. })));
    }
}
