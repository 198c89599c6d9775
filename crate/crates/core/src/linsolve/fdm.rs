//! Direct solvers for the separable stencils by fast diagonalization.
//!
//! Each five-point operator used here is a Kronecker sum `Lx ⊗ I + I ⊗ Ly`
//! of tridiagonal 1D operators. Diagonalizing the 1D factors once turns every
//! solve `(a I + b L) x = r` into two dense transforms and a pointwise
//! division.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarBc, ScalarField, VectorField};

/// 1D second-difference closures, all scaled by `1/h²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis1d {
    /// `n` cells, zero-flux ends.
    CellNeumann(usize),
    /// `n` cells, wall value reflected to zero (end diagonal −3).
    CellDirichlet(usize),
    /// `m` interior nodes between two pinned nodes.
    FaceDirichlet(usize),
}

impl Axis1d {
    fn len(self) -> usize {
        match self {
            Axis1d::CellNeumann(n) | Axis1d::CellDirichlet(n) | Axis1d::FaceDirichlet(n) => n,
        }
    }

    fn matrix(self, h: f64) -> DMatrix<f64> {
        let n = self.len();
        let end = match self {
            Axis1d::CellNeumann(_) => -1.0,
            Axis1d::CellDirichlet(_) => -3.0,
            Axis1d::FaceDirichlet(_) => -2.0,
        };
        let s = 1.0 / (h * h);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = -2.0 * s;
            if i > 0 {
                m[(i, i - 1)] = s;
            }
            if i + 1 < n {
                m[(i, i + 1)] = s;
            }
        }
        if n == 1 {
            m[(0, 0)] = match self {
                Axis1d::CellNeumann(_) => 0.0,
                Axis1d::CellDirichlet(_) => -2.0 * s,
                Axis1d::FaceDirichlet(_) => -2.0 * s,
            };
        } else {
            m[(0, 0)] = end * s;
            m[(n - 1, n - 1)] = end * s;
        }
        m
    }
}

struct Eig1d {
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
}

impl Eig1d {
    fn new(axis: Axis1d, h: f64) -> Self {
        let e = SymmetricEigen::new(axis.matrix(h));
        Self {
            vals: e.eigenvalues,
            vecs: e.eigenvectors,
        }
    }
}

/// Solver for `(a I + b (Lx ⊗ I + I ⊗ Ly)) x = r` on an `nx × ny` block
/// stored with `x` fastest.
pub struct SeparableSolver {
    nx: usize,
    ny: usize,
    ex: Eig1d,
    ey: Eig1d,
    scale: f64,
}

impl SeparableSolver {
    pub fn new(x: Axis1d, y: Axis1d, h: f64) -> Self {
        Self {
            nx: x.len(),
            ny: y.len(),
            ex: Eig1d::new(x, h),
            ey: Eig1d::new(y, h),
            scale: 8.0 / (h * h),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Modes whose shifted eigenvalue vanishes are set to zero, which gives
    /// the solution orthogonal to the null space for singular operators.
    pub fn solve(&self, a: f64, b: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: rhs.len(),
            });
        }
        let r = DMatrix::from_row_slice(self.ny, self.nx, rhs);
        let mut hat = self.ey.vecs.transpose() * r * &self.ex.vecs;
        let tiny = 1e-12 * (a.abs() + b.abs() * self.scale);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let d = a + b * (self.ex.vals[i] + self.ey.vals[j]);
                hat[(j, i)] = if d.abs() <= tiny { 0.0 } else { hat[(j, i)] / d };
            }
        }
        let x = &self.ey.vecs * hat * self.ex.vecs.transpose();
        // Row-major read-out to match the input layout.
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(x[(j, i)]);
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("separable solve"));
        }
        Ok(out)
    }
}

/// Cell-centered Poisson/Helmholtz solver with either closure.
pub struct PoissonSolver {
    grid: Grid,
    bc: ScalarBc,
    inner: SeparableSolver,
}

impl PoissonSolver {
    pub fn new(grid: Grid, bc: ScalarBc) -> Self {
        let n = grid.n();
        let axis = match bc {
            ScalarBc::Neumann => Axis1d::CellNeumann(n),
            ScalarBc::Dirichlet => Axis1d::CellDirichlet(n),
        };
        Self {
            grid,
            bc,
            inner: SeparableSolver::new(axis, axis, grid.h()),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn bc(&self) -> ScalarBc {
        self.bc
    }

    /// Solves `(a I + b Δ) x = r`. For the singular Neumann case (`a = 0`)
    /// the mean of `r` is ignored and the mean-zero solution returned.
    pub fn solve(&self, a: f64, b: f64, rhs: &ScalarField) -> Result<ScalarField> {
        self.grid.check_same(&rhs.grid())?;
        let x = self.inner.solve(a, b, rhs.values())?;
        ScalarField::from_values(self.grid, x)
    }

    /// Mean-zero solution of `Δ φ = r`.
    pub fn poisson(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.solve(0.0, 1.0, rhs)
    }
}

/// Face-velocity Helmholtz solver for `(a I + b L) w = r` on interior faces
/// with homogeneous wall-normal faces, `L` the no-slip vector Laplacian.
pub struct VelocitySolver {
    grid: Grid,
    u: SeparableSolver,
    v: SeparableSolver,
}

impl VelocitySolver {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let h = grid.h();
        Self {
            grid,
            u: SeparableSolver::new(Axis1d::FaceDirichlet(n - 1), Axis1d::CellDirichlet(n), h),
            v: SeparableSolver::new(Axis1d::CellDirichlet(n), Axis1d::FaceDirichlet(n - 1), h),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Boundary entries of `rhs` are ignored; the result has zero
    /// wall-normal faces.
    pub fn solve(&self, a: f64, b: f64, rhs: &VectorField) -> Result<VectorField> {
        self.grid.check_same(&rhs.grid())?;
        let g = self.grid;
        let n = g.n();
        let mut ru = Vec::with_capacity((n - 1) * n);
        for j in 0..n {
            for i in 1..n {
                ru.push(rhs.u[g.uface(i, j)]);
            }
        }
        let mut rv = Vec::with_capacity(n * (n - 1));
        for j in 1..n {
            for i in 0..n {
                rv.push(rhs.v[g.vface(i, j)]);
            }
        }
        let xu = self.u.solve(a, b, &ru)?;
        let xv = self.v.solve(a, b, &rv)?;
        let mut out = VectorField::zeros(g);
        let mut k = 0;
        for j in 0..n {
            for i in 1..n {
                out.u[g.uface(i, j)] = xu[k];
                k += 1;
            }
        }
        k = 0;
        for j in 1..n {
            for i in 0..n {
                out.v[g.vface(i, j)] = xv[k];
                k += 1;
            }
        }
        Ok(out)
    }
}
