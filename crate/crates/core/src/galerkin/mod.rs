//! Discrete Stokes eigenbasis and the truncated Galerkin system.
//!
//! The discretely solenoidal no-slip fields are exactly the curls of stream
//! functions on the interior nodes. In those coordinates the Stokes
//! eigenproblem is the generalized symmetric problem `K c = λ M c` with
//! `K = Cᵀ(−Δ)C` and `M = CᵀC`, solved densely.

mod ode;

pub use ode::{integrate_galerkin, Drive, GalerkinSystem, GalerkinTrajectory};

pub use crate::advection::trilinear_b;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::{divergence, stream_function_curl, vector_laplacian, Grid, VectorField, VelocityBc};
use crate::lift::Lifter;

/// Largest grid the dense eigensolve accepts.
pub const MAX_BASIS_N: usize = 32;

#[derive(Clone, Debug)]
pub struct GalerkinBasis {
    grid: Grid,
    lambdas: Vec<f64>,
    modes: Vec<VectorField>,
}

/// Coefficients `g_j` of `v = Σ g_j w_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinState {
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl GalerkinBasis {
    /// Rebuilds a basis from cached eigenpairs, rejecting modes that are not
    /// orthonormal, solenoidal and no-slip to `1e-10`.
    pub fn from_parts(grid: Grid, lambdas: Vec<f64>, modes: Vec<VectorField>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != modes.len() {
            return Err(Error::DimensionMismatch {
                expected: lambdas.len(),
                found: modes.len(),
            });
        }
        for w in &modes {
            grid.check_same(&w.grid())?;
        }
        if lambdas.windows(2).any(|p| p[1] < p[0]) || !lambdas.iter().all(|l| *l > 0.0) {
            return Err(Error::InvalidArgument("eigenvalues must be positive and ascending".into()));
        }
        for (i, a) in modes.iter().enumerate() {
            if divergence(a).l2_norm() > 1e-10 || a.boundary_max_abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("mode {i} is not solenoidal and no-slip")));
            }
            for (j, b) in modes.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - want).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!("modes {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(Self { grid, lambdas, modes })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn k(&self) -> usize {
        self.modes.len()
    }

    /// Eigenvalues in ascending order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn modes(&self) -> &[VectorField] {
        &self.modes
    }

    /// Keeps the first `k` modes.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::InvalidArgument(format!("cannot truncate {} modes to {k}", self.k())));
        }
        Ok(Self {
            grid: self.grid,
            lambdas: self.lambdas[..k].to_vec(),
            modes: self.modes[..k].to_vec(),
        })
    }

    /// `g_j = ⟨u, w_j⟩`.
    pub fn project(&self, u: &VectorField) -> Result<GalerkinState> {
        self.grid.check_same(&u.grid())?;
        Ok(GalerkinState {
            coeffs: self.modes.iter().map(|w| u.dot(w)).collect(),
            time: 0.0,
        })
    }

    pub fn reconstruct(&self, s: &GalerkinState) -> Result<VectorField> {
        if s.coeffs.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: s.coeffs.len(),
            });
        }
        let mut v = VectorField::zeros(self.grid);
        for (c, w) in s.coeffs.iter().zip(&self.modes) {
            v.axpy(*c, w);
        }
        Ok(v)
    }

    /// Gram defect, eigen-residuals `‖−ℙΔw − λw‖`, divergence and wall
    /// values of every mode.
    pub fn check(&self) -> Result<DiagnosticsRecord> {
        let lifter = Lifter::new(self.grid);
        let mut gram = 0.0_f64;
        for (i, a) in self.modes.iter().enumerate() {
            for (j, b) in self.modes.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                gram = gram.max((a.dot(b) - want).abs());
            }
        }
        let (mut resid, mut div, mut wall) = (0.0_f64, 0.0_f64, 0.0_f64);
        for (w, &l) in self.modes.iter().zip(&self.lambdas) {
            let mut r = lifter.leray_project(&vector_laplacian(w, VelocityBc::NoSlip))?;
            r.scale(-1.0);
            r.axpy(-l, w);
            resid = resid.max(r.l2_norm());
            div = div.max(divergence(w).l2_norm());
            wall = wall.max(w.boundary_max_abs());
        }
        let mut rec = DiagnosticsRecord::new("galerkin_basis", 0.0);
        rec.set("k", self.k() as f64)
            .set("lambda_1", self.lambdas[0])
            .set("gram_defect", gram)
            .set("eigen_residual", resid)
            .set("max_div", div)
            .set("max_wall", wall);
        Ok(rec)
    }
}

/// The `k` lowest discrete Stokes eigenpairs, L²-orthonormal.
pub fn build_basis(grid: Grid, k: usize) -> Result<GalerkinBasis> {
    let n = grid.n();
    if n > MAX_BASIS_N {
        return Err(Error::InvalidArgument(format!(
            "dense basis limited to n ≤ {MAX_BASIS_N}, got {n}"
        )));
    }
    let m = (n - 1) * (n - 1);
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!("k must be in 1..={m}, got {k}")));
    }
    let h = grid.h();
    let faces = grid.num_faces();
    let mut c = DMatrix::<f64>::zeros(faces, m);
    let mut lc = DMatrix::<f64>::zeros(faces, m);
    for b in 1..n {
        for a in 1..n {
            let col = (a - 1) + (b - 1) * (n - 1);
            let w = stream_function_curl(grid, |x, y| {
                if (x / h).round() as usize == a && (y / h).round() as usize == b {
                    1.0
                } else {
                    0.0
                }
            });
            let lw = vector_laplacian(&w, VelocityBc::NoSlip);
            c.column_mut(col).copy_from_slice(&w.to_flat());
            lc.column_mut(col).copy_from_slice(&lw.to_flat());
        }
    }
    let area = grid.cell_area();
    let mass = c.tr_mul(&c) * area;
    let mut stiff = c.tr_mul(&lc) * -area;
    stiff = (&stiff + stiff.transpose()) * 0.5;

    let chol = Cholesky::new(mass).ok_or_else(|| Error::Eigen("stream-function mass matrix not SPD".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&stiff)
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let mut reduced = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut lambdas = Vec::with_capacity(k);
    let mut modes = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let lam = eig.eigenvalues[idx];
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::Eigen(format!("non-positive Stokes eigenvalue {lam}")));
        }
        let coef = lt
            .solve_upper_triangular(&eig.eigenvectors.column(idx).into_owned())
            .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
        let flat = &c * coef;
        let mut w = VectorField::from_flat(grid, flat.as_slice())?;
        let norm = w.l2_norm();
        w.scale(1.0 / norm);
        // Fix the sign so the largest entry is positive.
        let big = w
            .to_flat()
            .into_iter()
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if big < 0.0 {
            w.scale(-1.0);
        }
        lambdas.push(lam);
        modes.push(w);
    }
    Ok(GalerkinBasis { grid, lambdas, modes })
}
