//! MAC staggered grid on the unit square.
//!
//! Pressure-like scalars live at cell centers, the x-velocity on vertical
//! faces and the y-velocity on horizontal faces. With this placement the
//! discrete divergence and gradient are exact negative adjoints of each other
//! in the `h²`-weighted inner products, which is what makes the Leray
//! projection and the `H¹₀` decomposition orthogonal to round-off.

mod field;
mod ops;

pub use field::{BoundaryTrace, ScalarField, VectorField};
pub use ops::{
    divergence, gradient, gradient_energy, gradient_inner, laplacian_dirichlet,
    laplacian, laplacian_neumann, scalar_gradient_energy, stream_function_curl, vector_laplacian, ScalarBc,
    VelocityBc,
};

use crate::error::{Error, Result};

/// Uniform `n × n` MAC grid on `[0,1]²` with spacing `h = 1/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} cells per axis, got {n}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { n })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.n
    }

    pub fn ny(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Area element of one cell, `h²`.
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }

    /// Number of x-velocity unknowns, `(n+1)·n`.
    pub fn num_u(&self) -> usize {
        (self.n + 1) * self.n
    }

    /// Number of y-velocity unknowns, `n·(n+1)`.
    pub fn num_v(&self) -> usize {
        self.n * (self.n + 1)
    }

    pub fn num_faces(&self) -> usize {
        self.num_u() + self.num_v()
    }

    /// Perimeter `|∂Ω|`.
    pub fn perimeter(&self) -> f64 {
        4.0
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        i + j * self.n
    }

    /// Index of the x-face at `x = i·h`, row `j`.
    #[inline]
    pub fn uface(&self, i: usize, j: usize) -> usize {
        i + j * (self.n + 1)
    }

    /// Index of the y-face at `y = j·h`, column `i`.
    #[inline]
    pub fn vface(&self, i: usize, j: usize) -> usize {
        i + j * self.n
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.h();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    pub fn uface_center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.h();
        (i as f64 * h, (j as f64 + 0.5) * h)
    }

    pub fn vface_center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.h();
        ((i as f64 + 0.5) * h, j as f64 * h)
    }

    /// True for cells that touch no wall.
    pub fn is_interior_cell(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.n && j + 1 < self.n
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}
