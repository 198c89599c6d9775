//! Discrete nonlinear term `(w·∇)v` on the MAC grid.
//!
//! `A(w)` is the centered advection stencil. The operator used everywhere is
//!
//! ```text
//! N(w; v) = ½ (A(w) v − A(w)ᵀ v) − ½ I(div w) v
//! ```
//!
//! on interior faces, with `I` averaging cell values to faces. The first part
//! is skew, so `⟨N(w; v), v⟩ = 0` exactly whenever `div w = 0` and `v` has
//! zero wall-normal faces; the second part restores consistency with
//! `(w·∇)v` when `w` is not solenoidal.

use crate::error::{Error, Result};
use crate::grid::{divergence, Grid, VectorField};
use crate::linsolve::CsrMatrix;

/// `N(w; ·)` for a fixed advecting field `w`.
#[derive(Clone, Debug)]
pub struct AdvectionOperator {
    grid: Grid,
    a: CsrMatrix,
    /// `½ I(div w)` per flat face index, zero on wall faces.
    half_div: Vec<f64>,
}

impl AdvectionOperator {
    pub fn new(w: &VectorField) -> Self {
        let grid = w.grid();
        Self {
            grid,
            a: advection_matrix(w),
            half_div: half_divergence_at_faces(w),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// The centered stencil `A(w)` in the flat `[u, v]` layout.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn apply(&self, v: &VectorField) -> VectorField {
        let x = v.to_flat();
        let av = self.a.apply(&x);
        let atv = self.a.apply_transpose(&x);
        let mut out: Vec<f64> = av
            .iter()
            .zip(&atv)
            .zip(&x)
            .zip(&self.half_div)
            .map(|(((a, t), xi), d)| 0.5 * (a - t) - d * xi)
            .collect();
        VectorField::for_each_boundary_face(self.grid, |k, _| out[k] = 0.0);
        VectorField::from_flat(self.grid, &out).expect("layout")
    }
}

/// `N(w; v)`.
pub fn advect(w: &VectorField, v: &VectorField) -> VectorField {
    AdvectionOperator::new(w).apply(v)
}

/// Trilinear form `b(u, v, w) = ⟨N(u; v), w⟩`.
pub fn trilinear_b(u: &VectorField, v: &VectorField, w: &VectorField) -> Result<f64> {
    u.grid().check_same(&v.grid())?;
    u.grid().check_same(&w.grid())?;
    Ok(advect(u, v).dot(w))
}

/// Largest stable step `h / (2 max|u|)`; infinite for `u = 0`.
pub fn cfl_limit(u: &VectorField) -> f64 {
    let m = u.max_abs();
    if m > 0.0 {
        u.grid().h() / (2.0 * m)
    } else {
        f64::INFINITY
    }
}

pub fn check_cfl(u: &VectorField, dt: f64) -> Result<()> {
    let limit = cfl_limit(u);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(())
}

fn half_divergence_at_faces(w: &VectorField) -> Vec<f64> {
    let grid = w.grid();
    let n = grid.n();
    let d = divergence(w);
    let d = d.values();
    let nu = grid.num_u();
    let mut out = vec![0.0; grid.num_faces()];
    for j in 0..n {
        for i in 1..n {
            out[grid.uface(i, j)] = 0.25 * (d[grid.cell(i - 1, j)] + d[grid.cell(i, j)]);
        }
    }
    for j in 1..n {
        for i in 0..n {
            out[nu + grid.vface(i, j)] = 0.25 * (d[grid.cell(i, j - 1)] + d[grid.cell(i, j)]);
        }
    }
    out
}

/// Centered `(w·∇)` acting on face velocities.
///
/// Interior rows carry the full stencil with tangential ghosts reflected to
/// zero. Wall rows only carry their coupling to the first interior face,
/// which is all the transpose needs to form the flux part of the skew form.
fn advection_matrix(w: &VectorField) -> CsrMatrix {
    let grid = w.grid();
    let n = grid.n();
    let c = 0.5 / grid.h();
    let nu = grid.num_u();
    let ui = |i: usize, j: usize| grid.uface(i, j);
    let vi = |i: usize, j: usize| nu + grid.vface(i, j);
    let mut t = Vec::with_capacity(6 * grid.num_faces());

    for j in 0..n {
        t.push((ui(0, j), ui(1, j), c * w.u[grid.uface(0, j)]));
        t.push((ui(n, j), ui(n - 1, j), -c * w.u[grid.uface(n, j)]));
        for i in 1..n {
            let r = ui(i, j);
            let wx = w.u[grid.uface(i, j)];
            let wy = 0.25
                * (w.v[grid.vface(i - 1, j)]
                    + w.v[grid.vface(i, j)]
                    + w.v[grid.vface(i - 1, j + 1)]
                    + w.v[grid.vface(i, j + 1)]);
            t.push((r, ui(i + 1, j), c * wx));
            t.push((r, ui(i - 1, j), -c * wx));
            if j + 1 < n {
                t.push((r, ui(i, j + 1), c * wy));
            } else {
                t.push((r, r, -c * wy));
            }
            if j > 0 {
                t.push((r, ui(i, j - 1), -c * wy));
            } else {
                t.push((r, r, c * wy));
            }
        }
    }
    for i in 0..n {
        t.push((vi(i, 0), vi(i, 1), c * w.v[grid.vface(i, 0)]));
        t.push((vi(i, n), vi(i, n - 1), -c * w.v[grid.vface(i, n)]));
    }
    for j in 1..n {
        for i in 0..n {
            let r = vi(i, j);
            let wy = w.v[grid.vface(i, j)];
            let wx = 0.25
                * (w.u[grid.uface(i, j - 1)]
                    + w.u[grid.uface(i + 1, j - 1)]
                    + w.u[grid.uface(i, j)]
                    + w.u[grid.uface(i + 1, j)]);
            t.push((r, vi(i, j + 1), c * wy));
            t.push((r, vi(i, j - 1), -c * wy));
            if i + 1 < n {
                t.push((r, vi(i + 1, j), c * wx));
            } else {
                t.push((r, r, -c * wx));
            }
            if i > 0 {
                t.push((r, vi(i - 1, j), -c * wx));
            } else {
                t.push((r, r, c * wx));
            }
        }
    }
    CsrMatrix::from_triplets(grid.num_faces(), grid.num_faces(), t).expect("in-range stencil")
}
