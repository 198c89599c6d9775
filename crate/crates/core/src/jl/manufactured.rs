//! Steady manufactured solution for convergence studies.
//!
//! `u* = curl ψ` with `ψ = sin²(πx) sin²(πy)` vanishes on the walls with its
//! normal derivative, so it is an admissible no-slip state. The forcing
//! `f = (u*·∇)u* − ν Δu*` makes it a steady solution up to a pressure
//! gradient.

use std::f64::consts::PI;

use super::{run_to_end, JlRoute, JlSolver};
use crate::error::Result;
use crate::forcing::ForcingSpec;
use crate::grid::{stream_function_curl, Grid, VectorField};

pub fn stream(x: f64, y: f64) -> f64 {
    ((PI * x).sin() * (PI * y).sin()).powi(2)
}

pub fn velocity(x: f64, y: f64) -> [f64; 2] {
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    [
        PI * sx * sx * (2.0 * PI * y).sin(),
        -PI * (2.0 * PI * x).sin() * sy * sy,
    ]
}

/// `[[∂x u, ∂y u], [∂x v, ∂y v]]`.
pub fn velocity_gradient(x: f64, y: f64) -> [[f64; 2]; 2] {
    let p2 = PI * PI;
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    let (s2x, s2y) = ((2.0 * PI * x).sin(), (2.0 * PI * y).sin());
    let (c2x, c2y) = ((2.0 * PI * x).cos(), (2.0 * PI * y).cos());
    [
        [p2 * s2x * s2y, 2.0 * p2 * sx * sx * c2y],
        [-2.0 * p2 * c2x * sy * sy, -p2 * s2x * s2y],
    ]
}

pub fn velocity_laplacian(x: f64, y: f64) -> [f64; 2] {
    let p3 = PI * PI * PI;
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    let (s2x, s2y) = ((2.0 * PI * x).sin(), (2.0 * PI * y).sin());
    let (c2x, c2y) = ((2.0 * PI * x).cos(), (2.0 * PI * y).cos());
    [
        2.0 * p3 * c2x * s2y - 4.0 * p3 * sx * sx * s2y,
        4.0 * p3 * s2x * sy * sy - 2.0 * p3 * s2x * c2y,
    ]
}

pub fn forcing(nu: f64) -> ForcingSpec {
    ForcingSpec::from_fn(move |x, y, _| {
        let u = velocity(x, y);
        let d = velocity_gradient(x, y);
        let l = velocity_laplacian(x, y);
        [
            u[0] * d[0][0] + u[1] * d[0][1] - nu * l[0],
            u[0] * d[1][0] + u[1] * d[1][1] - nu * l[1],
        ]
    })
}

/// Point samples of `u*` on the faces.
pub fn exact(grid: Grid) -> VectorField {
    VectorField::from_fn(grid, |x, y| velocity(x, y)[0], |x, y| velocity(x, y)[1])
}

/// Discretely solenoidal initial data: the discrete curl of nodal `ψ`.
pub fn initial(grid: Grid) -> VectorField {
    let mut u = stream_function_curl(grid, stream);
    u.zero_boundary();
    u
}

/// L² error at time `t_end` with `dt = courant · h`.
pub fn error_at(n: usize, nu: f64, t_end: f64, courant: f64, route: JlRoute) -> Result<f64> {
    let grid = Grid::new(n)?;
    let solver = JlSolver::new(grid, nu)?;
    let dt0 = courant * grid.h();
    let steps = (t_end / dt0).ceil() as usize;
    let dt = t_end / steps as f64;
    let s0 = solver.initial_state(initial(grid), forcing(nu))?;
    let s = run_to_end(&solver, s0, route, dt, steps)?;
    Ok(s.u.sub(&exact(grid)).l2_norm())
}
