//! The pressure-Poisson system with tangential walls and a damped
//! boundary-normal relaxation.
//!
//! Walls pin the tangential velocity only; normal boundary faces carry the
//! free trace `h = u·n`, which obeys `∂t h + λh = 𝒞`. The divergence solves
//! the heat equation with homogeneous Dirichlet data.
//!
//! * [`SrSolver::step_constructive`] advances `g` and `h`, lifts them to `z`
//!   with the inhomogeneous Stokes problem and advances `v = u − z` with the
//!   perturbed equation.
//! * [`SrSolver::step_direct`] advances `u` itself: implicit viscosity with
//!   the new normal faces, then a Neumann pressure solve that imposes the
//!   next divergence.

mod boundary;

pub use boundary::{
    compat_constant, compat_constant_stepped, duhamel, duhamel_integral, evolve_h, wall_divergence,
    BoundaryNormalState,
};

use crate::advection::{advect, check_cfl};
use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::grid::{
    divergence, gradient, laplacian_dirichlet, vector_laplacian, Grid, ScalarBc,
    ScalarField, VectorField, VelocityBc,
};
use crate::heat::{DivergenceState, HeatStepper};
use crate::jl::check_dt;
use crate::lift::{Decomposition, Lifter};

/// Largest solvability gap tolerated before a lift.
pub const SOLVABILITY_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct SrState {
    pub time: f64,
    /// Normal boundary faces hold `±h`; tangential walls are pinned by the
    /// operator closures.
    pub u: VectorField,
    pub g: DivergenceState,
    pub h: BoundaryNormalState,
    pub lambda: f64,
    pub nu: f64,
    pub forcing: ForcingSpec,
    pub decomposition: Option<Decomposition>,
    pub pressure: ScalarField,
}

impl SrState {
    pub fn grid(&self) -> Grid {
        self.u.grid()
    }

    /// `∫_∂Ω h − ∫_Ω g`.
    pub fn solvability_gap(&self) -> f64 {
        self.h.flux() - self.g.g.integral()
    }
}

pub struct SrSolver {
    grid: Grid,
    nu: f64,
    lambda: f64,
    lifter: Lifter,
    heat: HeatStepper,
}

impl SrSolver {
    pub fn new(grid: Grid, nu: f64, lambda: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("damping λ must be positive, got {lambda}")));
        }
        Ok(Self {
            grid,
            nu,
            lambda,
            lifter: Lifter::new(grid),
            heat: HeatStepper::new(grid, ScalarBc::Dirichlet),
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lifter(&self) -> &Lifter {
        &self.lifter
    }

    pub fn heat(&self) -> &HeatStepper {
        &self.heat
    }

    /// Builds the state for `u0`, whose normal boundary faces are free.
    pub fn initial_state(&self, u0: VectorField, forcing: ForcingSpec) -> Result<SrState> {
        self.grid.check_same(&u0.grid())?;
        if !u0.is_finite() {
            return Err(Error::NonFinite("initial velocity"));
        }
        let g = DivergenceState::new(divergence(&u0), ScalarBc::Dirichlet, self.nu)?;
        let h = BoundaryNormalState::new(u0.normal_trace(), 0.0)?;
        let lift = self.lifter.lift_with_boundary(&g.g, &h.h)?;
        let v = u0.sub(&lift.z);

        // ∂t z at t = 0 is the lift of (ν Δg, −λh + 𝒞̄).
        let cbar = compat_constant(&g, self.lambda);
        let mut hdot = h.h.clone();
        hdot.iter_mut().for_each(|x| *x = cbar - self.lambda * *x);
        let zdot = self
            .lifter
            .lift_with_boundary(&laplacian_dirichlet(&g.g).scaled(self.nu), &hdot)?
            .z;
        let mut rhs = forcing.eval(self.grid, 0.0);
        rhs.axpy(-1.0, &zdot);
        rhs.axpy(-1.0, &advect(&u0, &u0));
        rhs.axpy(self.nu, &vector_laplacian(&v, VelocityBc::NoSlip));
        let (_, pressure) = self.lifter.leray_split(&rhs)?;
        Ok(SrState {
            time: 0.0,
            u: u0,
            g,
            h,
            lambda: self.lambda,
            nu: self.nu,
            forcing,
            decomposition: Some(Decomposition {
                v,
                z: lift.z,
                q: lift.q,
            }),
            pressure,
        })
    }

    /// Advances the data pair `(g, h)` alone: Crank–Nicolson Dirichlet heat
    /// for `g`, then the exact `h` update with the stepped compatibility
    /// constant. Returns `(g⁺, h⁺, 𝒞̄)`. The gap `∫h − ∫g` contracts by
    /// exactly `e^{−λdt}`, so incompatible data can be studied here.
    pub fn advance_data(
        &self,
        g: &DivergenceState,
        h: &BoundaryNormalState,
        dt: f64,
    ) -> Result<(DivergenceState, BoundaryNormalState, f64)> {
        let g_next = self.heat.step(g, dt)?;
        let cbar = compat_constant_stepped(&g.g, &g_next.g, self.lambda, dt)?;
        let h_next = evolve_h(h, cbar, self.lambda, dt)?;
        Ok((g_next, h_next, cbar))
    }

    pub fn step_constructive(&self, s: &SrState, dt: f64) -> Result<SrState> {
        check_dt(dt)?;
        check_cfl(&s.u, dt)?;
        check_solvability(s.h.flux(), s.g.g.integral())?;
        let dec = match &s.decomposition {
            Some(d) => d.clone(),
            None => {
                let lift = self.lifter.lift_with_boundary(&s.g.g, &s.h.h)?;
                Decomposition {
                    v: s.u.sub(&lift.z),
                    z: lift.z,
                    q: lift.q,
                }
            }
        };
        let (g, h, _) = self.advance_data(&s.g, &s.h, dt)?;
        check_solvability(h.flux(), g.g.integral())?;
        let lift = self.lifter.lift_with_boundary(&g.g, &h.h)?;
        let zdot = lift.z.sub(&dec.z).scaled(1.0 / dt);

        let mut rhs = s.forcing.eval(self.grid, s.time);
        rhs.axpy(-1.0, &zdot);
        rhs.axpy(-1.0, &advect(&s.u, &s.u));
        let (v, pressure) = self.lifter.projection_step(&dec.v, &s.pressure, rhs, self.nu, dt)?;
        let u = v.add(&lift.z);
        finish(SrState {
            time: s.time + dt,
            u,
            g,
            h,
            lambda: self.lambda,
            nu: self.nu,
            forcing: s.forcing.clone(),
            decomposition: Some(Decomposition {
                v,
                z: lift.z,
                q: lift.q,
            }),
            pressure,
        })
    }

    pub fn step_direct(&self, s: &SrState, dt: f64) -> Result<SrState> {
        check_dt(dt)?;
        check_cfl(&s.u, dt)?;
        let du = divergence(&s.u);
        let g_target = self.heat.backward_euler(&du, self.nu, dt)?;
        let cbar = compat_constant_stepped(&du, &g_target, self.lambda, dt)?;
        let h = evolve_h(&s.h, cbar, self.lambda, dt)?;

        // Implicit viscosity on interior faces with the new normal faces as data.
        let mut zb = VectorField::zeros(self.grid);
        zb.set_normal_trace(&h.h);
        let mut b = s.forcing.eval(self.grid, s.time);
        b.axpy(-1.0, &advect(&s.u, &s.u));
        b.axpy(-1.0, &gradient(&s.pressure));
        b.scale(dt);
        b.axpy(1.0, &s.u);
        b.zero_boundary();
        b.axpy(dt * self.nu, &vector_laplacian(&zb, VelocityBc::NoSlip));
        let mut star = self
            .lifter
            .stokes()
            .velocity_solver()
            .solve(1.0, -dt * self.nu, &b)?;
        star.axpy(1.0, &zb);

        // Pressure increment imposing div u⁺ = g⁺.
        let mut r = divergence(&star);
        r.axpy(-1.0, &g_target);
        let (interior, boundary) = (g_target.integral(), h.flux());
        let scale = r.values().iter().map(|x| x.abs()).sum::<f64>() * self.grid.cell_area();
        if r.integral().abs() > 1e-9 * (1.0 + scale + interior.abs()) {
            return Err(Error::Compatibility { interior, boundary });
        }
        r.remove_mean();
        let psi = self.lifter.neumann().poisson(&r)?;
        let mut u = star;
        u.axpy(-1.0, &gradient(&psi));
        let mut pressure = s.pressure.clone();
        pressure.axpy(1.0 / dt, &psi);
        let g = DivergenceState {
            g: g_target,
            time: s.time + dt,
            ..s.g.clone()
        };
        finish(SrState {
            time: s.time + dt,
            u,
            g,
            h,
            lambda: self.lambda,
            nu: self.nu,
            forcing: s.forcing.clone(),
            decomposition: None,
            pressure,
        })
    }
}

fn check_solvability(flux: f64, mass: f64) -> Result<()> {
    let gap = flux - mass;
    if gap.abs() > SOLVABILITY_TOL * (1.0 + mass.abs()) {
        return Err(Error::SolvabilityDrift(gap));
    }
    Ok(())
}

fn finish(s: SrState) -> Result<SrState> {
    if !s.u.is_finite() || !s.h.h.is_finite() {
        return Err(Error::NonFinite("velocity after step"));
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrRoute {
    Constructive,
    Direct,
}

fn step(solver: &SrSolver, s: &SrState, route: SrRoute, dt: f64) -> Result<SrState> {
    match route {
        SrRoute::Constructive => solver.step_constructive(s, dt),
        SrRoute::Direct => solver.step_direct(s, dt),
    }
}

/// Runs `steps` steps and returns every state, the initial one included.
pub fn run(solver: &SrSolver, s0: SrState, route: SrRoute, dt: f64, steps: usize) -> Result<Vec<SrState>> {
    let mut hist = Vec::with_capacity(steps + 1);
    hist.push(s0);
    for _ in 0..steps {
        let next = step(solver, hist.last().unwrap(), route, dt)?;
        hist.push(next);
    }
    Ok(hist)
}

pub fn run_to_end(solver: &SrSolver, s0: SrState, route: SrRoute, dt: f64, steps: usize) -> Result<SrState> {
    let mut s = s0;
    for _ in 0..steps {
        s = step(solver, &s, route, dt)?;
    }
    Ok(s)
}

/// A smooth field with unit normal flux through the vertical walls and no
/// divergence: `u = (sin πy, 0)`.
pub fn normal_flux_field(grid: Grid, amp: f64) -> VectorField {
    use std::f64::consts::PI;
    VectorField::from_fn(grid, |_, y| amp * (PI * y).sin(), |_, _| 0.0)
}

#[cfg(test)]
mod tests;
