use std::str::FromStr;

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};

/// Boundary closure for cell-centered Laplacians.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarBc {
    /// Ghost equals interior: zero normal flux.
    Neumann,
    /// Ghost equals minus interior: zero wall value.
    Dirichlet,
}

/// Closure of the velocity Laplacian at the walls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VelocityBc {
    /// Normal faces pinned, tangential component reflected to zero.
    NoSlip,
    /// Tangential component reflected to zero, normal faces free.
    TangentialOnly,
}

impl FromStr for VelocityBc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-slip" | "noslip" => Ok(VelocityBc::NoSlip),
            "tangential-only" | "tangential" => Ok(VelocityBc::TangentialOnly),
            other => Err(Error::InvalidArgument(format!(
                "unknown velocity boundary condition `{other}`"
            ))),
        }
    }
}

/// Cell-wise `(u_{i+1,j} − u_{i,j})/h + (v_{i,j+1} − v_{i,j})/h`.
pub fn divergence(w: &VectorField) -> ScalarField {
    let grid = w.grid();
    let n = grid.n();
    let inv_h = 1.0 / grid.h();
    let mut out = ScalarField::zeros(grid);
    let vals = out.values_mut();
    for j in 0..n {
        for i in 0..n {
            vals[grid.cell(i, j)] = (w.u[grid.uface(i + 1, j)] - w.u[grid.uface(i, j)]
                + w.v[grid.vface(i, j + 1)]
                - w.v[grid.vface(i, j)])
                * inv_h;
        }
    }
    out
}

/// Face differences of a cell field; wall-normal faces are left at zero.
pub fn gradient(p: &ScalarField) -> VectorField {
    let grid = p.grid();
    let n = grid.n();
    let inv_h = 1.0 / grid.h();
    let vals = p.values();
    let mut out = VectorField::zeros(grid);
    for j in 0..n {
        for i in 1..n {
            out.u[grid.uface(i, j)] = (vals[grid.cell(i, j)] - vals[grid.cell(i - 1, j)]) * inv_h;
        }
    }
    for j in 1..n {
        for i in 0..n {
            out.v[grid.vface(i, j)] = (vals[grid.cell(i, j)] - vals[grid.cell(i, j - 1)]) * inv_h;
        }
    }
    out
}

pub fn laplacian_neumann(p: &ScalarField) -> ScalarField {
    laplacian(p, ScalarBc::Neumann)
}

pub fn laplacian_dirichlet(p: &ScalarField) -> ScalarField {
    laplacian(p, ScalarBc::Dirichlet)
}

/// Five-point Laplacian with ghost-cell reflection.
pub fn laplacian(p: &ScalarField, bc: ScalarBc) -> ScalarField {
    let grid = p.grid();
    let n = grid.n();
    let inv_h2 = 1.0 / grid.cell_area();
    let vals = p.values();
    let missing = match bc {
        ScalarBc::Neumann => 0.0,
        ScalarBc::Dirichlet => -2.0,
    };
    let mut out = ScalarField::zeros(grid);
    let o = out.values_mut();
    for j in 0..n {
        for i in 0..n {
            let c = vals[grid.cell(i, j)];
            let mut acc = 0.0;
            let mut side = |nb: Option<usize>| match nb {
                Some(k) => acc += vals[k] - c,
                None => acc += missing * c,
            };
            side((i > 0).then(|| grid.cell(i - 1, j)));
            side((i + 1 < n).then(|| grid.cell(i + 1, j)));
            side((j > 0).then(|| grid.cell(i, j - 1)));
            side((j + 1 < n).then(|| grid.cell(i, j + 1)));
            o[grid.cell(i, j)] = acc * inv_h2;
        }
    }
    out
}

/// `‖∇p‖²` in the energy form `−⟨Δ p, p⟩` of the chosen closure.
pub fn scalar_gradient_energy(p: &ScalarField, bc: ScalarBc) -> f64 {
    -laplacian(p, bc).dot(p)
}

/// Vector Laplacian on the face unknowns.
///
/// Interior faces use the five-point stencil; wall-normal faces act as
/// Dirichlet data for their neighbors and tangential ghosts are reflected to
/// zero. With [`VelocityBc::NoSlip`] the wall-normal outputs are zero. With
/// [`VelocityBc::TangentialOnly`] they are evaluated with a mirrored ghost in
/// the normal direction, the zero-normal-derivative closure implied by
/// `div u = 0` at a wall where the tangential velocity vanishes.
pub fn vector_laplacian(w: &VectorField, bc: VelocityBc) -> VectorField {
    let grid = w.grid();
    let n = grid.n();
    let inv_h2 = 1.0 / grid.cell_area();
    let mut out = VectorField::zeros(grid);

    // x-velocity: normal direction is x, tangential is y.
    for j in 0..n {
        for i in 0..=n {
            let on_wall = i == 0 || i == n;
            if on_wall && bc == VelocityBc::NoSlip {
                continue;
            }
            let c = w.u[grid.uface(i, j)];
            let xl = if i == 0 { w.u[grid.uface(1, j)] } else { w.u[grid.uface(i - 1, j)] };
            let xr = if i == n { w.u[grid.uface(n - 1, j)] } else { w.u[grid.uface(i + 1, j)] };
            let yd = if j == 0 { -c } else { w.u[grid.uface(i, j - 1)] };
            let yu = if j + 1 == n { -c } else { w.u[grid.uface(i, j + 1)] };
            out.u[grid.uface(i, j)] = (xl + xr + yd + yu - 4.0 * c) * inv_h2;
        }
    }
    // y-velocity: normal direction is y, tangential is x.
    for j in 0..=n {
        let on_wall = j == 0 || j == n;
        if on_wall && bc == VelocityBc::NoSlip {
            continue;
        }
        for i in 0..n {
            let c = w.v[grid.vface(i, j)];
            let yd = if j == 0 { w.v[grid.vface(i, 1)] } else { w.v[grid.vface(i, j - 1)] };
            let yu = if j == n { w.v[grid.vface(i, n - 1)] } else { w.v[grid.vface(i, j + 1)] };
            let xl = if i == 0 { -c } else { w.v[grid.vface(i - 1, j)] };
            let xr = if i + 1 == n { -c } else { w.v[grid.vface(i + 1, j)] };
            out.v[grid.vface(i, j)] = (xl + xr + yd + yu - 4.0 * c) * inv_h2;
        }
    }
    out
}

/// Discrete `⟨∇a, ∇b⟩` as a sum over nearest-neighbor face pairs.
///
/// Tangential ghost pairs at the walls carry the half-cell weight, so for
/// fields with zero wall-normal faces this equals `−⟨a, Δ b⟩` with the
/// no-slip vector Laplacian.
pub fn gradient_inner(a: &VectorField, b: &VectorField) -> Result<f64> {
    let grid = a.grid();
    grid.check_same(&b.grid())?;
    let n = grid.n();
    let mut s = 0.0;
    // x-velocity.
    for j in 0..n {
        for i in 0..n {
            let (p, q) = (grid.uface(i, j), grid.uface(i + 1, j));
            s += (a.u[q] - a.u[p]) * (b.u[q] - b.u[p]);
        }
    }
    for j in 0..n.saturating_sub(1) {
        for i in 0..=n {
            let (p, q) = (grid.uface(i, j), grid.uface(i, j + 1));
            s += (a.u[q] - a.u[p]) * (b.u[q] - b.u[p]);
        }
    }
    for i in 0..=n {
        for &j in &[0, n - 1] {
            let k = grid.uface(i, j);
            s += 2.0 * a.u[k] * b.u[k];
        }
    }
    // y-velocity.
    for j in 0..n {
        for i in 0..n {
            let (p, q) = (grid.vface(i, j), grid.vface(i, j + 1));
            s += (a.v[q] - a.v[p]) * (b.v[q] - b.v[p]);
        }
    }
    for j in 0..=n {
        for i in 0..n.saturating_sub(1) {
            let (p, q) = (grid.vface(i, j), grid.vface(i + 1, j));
            s += (a.v[q] - a.v[p]) * (b.v[q] - b.v[p]);
        }
        for &i in &[0, n - 1] {
            let k = grid.vface(i, j);
            s += 2.0 * a.v[k] * b.v[k];
        }
    }
    Ok(s)
}

/// `‖∇w‖²`.
pub fn gradient_energy(w: &VectorField) -> f64 {
    gradient_inner(w, w).expect("same grid")
}

/// Discrete curl of a nodal stream function, `u = ∂ψ/∂y`, `v = −∂ψ/∂x`.
///
/// The result is discretely divergence-free for any `ψ`; it also has zero
/// wall-normal faces when `ψ` vanishes on boundary nodes.
pub fn stream_function_curl(grid: Grid, psi: impl Fn(f64, f64) -> f64) -> VectorField {
    let n = grid.n();
    let h = grid.h();
    let node = |i: usize, j: usize| psi(i as f64 * h, j as f64 * h);
    let mut out = VectorField::zeros(grid);
    for j in 0..n {
        for i in 0..=n {
            out.u[grid.uface(i, j)] = (node(i, j + 1) - node(i, j)) / h;
        }
    }
    for j in 0..=n {
        for i in 0..n {
            out.v[grid.vface(i, j)] = -(node(i + 1, j) - node(i, j)) / h;
        }
    }
    out
}
