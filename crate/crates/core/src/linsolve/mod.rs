//! Symmetric linear solvers for the elliptic sub-problems.

mod csr;
mod fdm;
mod stokes;

pub use csr::CsrMatrix;
pub use fdm::{Axis1d, PoissonSolver, SeparableSolver, VelocitySolver};
pub use stokes::{stokes_solve, StokesSolution, StokesSolver, DEFAULT_STOKES_TOL};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type ApplyFn<'a> = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync + 'a>;

/// A linear operator known only through its action.
pub struct SparseOperator<'a> {
    dim: usize,
    apply: ApplyFn<'a>,
    symmetric: bool,
    null_space: Vec<Vec<f64>>,
}

impl<'a> SparseOperator<'a> {
    pub fn from_fn(dim: usize, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'a) -> Self {
        Self {
            dim,
            apply: Box::new(f),
            symmetric: true,
            null_space: Vec::new(),
        }
    }

    pub fn from_csr(m: &'a CsrMatrix) -> Self {
        let mut op = Self::from_fn(m.nrows(), move |x, y| m.apply_into(x, y));
        op.symmetric = m.nrows() == m.ncols() && m.is_symmetric(1e-12);
        op
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |x, y| y.copy_from_slice(x))
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    /// Attaches null-space vectors; they are orthonormalized here.
    pub fn with_null_space(mut self, basis: Vec<Vec<f64>>) -> Result<Self> {
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for mut b in basis {
            if b.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: b.len(),
                });
            }
            for q in &ortho {
                let c = dot(q, &b);
                axpy(-c, q, &mut b);
            }
            let nb = dot(&b, &b).sqrt();
            if nb == 0.0 {
                return Err(Error::InvalidArgument("degenerate null-space vector".into()));
            }
            b.iter_mut().for_each(|x| *x /= nb);
            ortho.push(b);
        }
        self.null_space = ortho;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn null_space(&self) -> &[Vec<f64>] {
        &self.null_space
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (self.apply)(x, y)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// Removes the components along the null space.
    pub fn deflate(&self, x: &mut [f64]) {
        for q in &self.null_space {
            let c = dot(q, x);
            axpy(-c, q, x);
        }
    }

    /// Largest relative asymmetry `|⟨Ax,y⟩ − ⟨x,Ay⟩| / (‖Ax‖‖y‖)` over the probes.
    pub fn symmetry_defect(&self, probes: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        probes.iter().fold(0.0_f64, |m, (x, y)| {
            let ax = self.apply(x);
            let ay = self.apply(y);
            let scale = norm(&ax) * norm(y) + norm(x) * norm(&ay);
            let d = (dot(&ax, y) - dot(x, &ay)).abs();
            m.max(if scale > 0.0 { d / scale } else { d })
        })
    }

    /// Largest `‖A n‖ / ‖n‖` over the attached null-space vectors.
    pub fn null_space_defect(&self) -> f64 {
        self.null_space
            .iter()
            .fold(0.0_f64, |m, q| m.max(norm(&self.apply(q)) / norm(q)))
    }

    /// Materializes the operator column by column.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let mut e = vec![0.0; self.dim];
        let mut col = vec![0.0; self.dim];
        for c in 0..self.dim {
            e[c] = 1.0;
            self.apply_into(&e, &mut col);
            for r in 0..self.dim {
                m[(r, c)] = col[r];
            }
            e[c] = 0.0;
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖` after deflation of `b`.
    pub residual: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn exact() -> Self {
        Self {
            iterations: 0,
            residual: 0.0,
            converged: true,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Conjugate gradients for symmetric positive (semi-)definite operators.
///
/// When the operator carries a null space, `b` and every iterate are
/// deflated against it. A non-positive curvature `⟨p, Ap⟩` is reported as
/// [`Error::Breakdown`]. Running out of iterations is not an error; the
/// returned report has `converged = false`.
pub fn cg_solve(
    a: &SparseOperator,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let mut rhs = b.to_vec();
    a.deflate(&mut rhs);
    let bnorm = norm(&rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveReport::exact()));
    }

    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while iterations < max_iter && rr.sqrt() > tol * bnorm {
        a.apply_into(&p, &mut ap);
        if ap.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("operator output"));
        }
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Breakdown("cg"));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        a.deflate(&mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        iterations += 1;
    }
    a.deflate(&mut x);

    // Report the true residual, not the recursive one.
    let mut res = a.apply(&x);
    for (ri, bi) in res.iter_mut().zip(&rhs) {
        *ri = bi - *ri;
    }
    a.deflate(&mut res);
    let residual = norm(&res) / bnorm;
    Ok((
        x,
        SolveReport {
            iterations,
            residual,
            converged: residual <= tol,
        },
    ))
}

/// Dense LU solve, used as the small-grid reference.
///
/// A singular matrix with a known null space is handled by solving the
/// bordered system `[A N; Nᵀ 0]`, which returns the minimum-norm-in-null
/// solution orthogonal to `N`.
pub fn dense_solve(a: &DMatrix<f64>, b: &[f64], null_space: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let k = null_space.len();
    let mut m = DMatrix::zeros(n + k, n + k);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    let mut rhs = DVector::zeros(n + k);
    for i in 0..n {
        rhs[i] = b[i];
    }
    for (c, q) in null_space.iter().enumerate() {
        for i in 0..n {
            m[(i, n + c)] = q[i];
            m[(n + c, i)] = q[i];
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::InvalidArgument("singular dense system".into()))?;
    Ok(sol.iter().take(n).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian_neumann, Grid, ScalarField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn neumann_operator(grid: Grid) -> SparseOperator<'static> {
        SparseOperator::from_fn(grid.num_cells(), move |x, y| {
            let p = ScalarField::from_values(grid, x.to_vec()).unwrap();
            for (yi, v) in y.iter_mut().zip(laplacian_neumann(&p).values()) {
                *yi = -v;
            }
        })
        .with_null_space(vec![vec![1.0; grid.num_cells()]])
        .unwrap()
    }

    #[test]
    fn identity_in_one_iteration() {
        let op = SparseOperator::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let (x, rep) = cg_solve(&op, &b, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (a, c) in x.iter().zip(&b) {
            assert!((a - c).abs() < 1e-14);
        }
    }

    #[test]
    fn neumann_poisson_with_deflation() {
        let grid = Grid::new(16).unwrap();
        let op = neumann_operator(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut b: Vec<f64> = (0..grid.num_cells()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = b.iter().sum::<f64>() / b.len() as f64;
        b.iter_mut().for_each(|x| *x -= m);
        let (x, rep) = cg_solve(&op, &b, 1e-10, 2000).unwrap();
        assert!(rep.converged && rep.residual <= 1e-10, "{rep:?}");
        assert!(x.iter().sum::<f64>().abs() < 1e-9);
        let ax = op.apply(&x);
        let r: Vec<f64> = ax.iter().zip(&b).map(|(a, c)| a - c).collect();
        assert!(norm(&r) <= 1e-10 * norm(&b));
    }

    #[test]
    fn pure_null_space_gives_zero() {
        let grid = Grid::new(8).unwrap();
        let op = neumann_operator(grid);
        let (x, rep) = cg_solve(&op, &vec![3.0; 64], 1e-10, 100).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn matches_dense_reference() {
        let grid = Grid::new(8).unwrap();
        let op = neumann_operator(grid);
        let dense = op.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut b: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        op.deflate(&mut b);
        let (x, _) = cg_solve(&op, &b, 1e-13, 1000).unwrap();
        let y = dense_solve(&dense, &b, op.null_space()).unwrap();
        // Energy-norm agreement.
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, c)| a - c).collect();
        let e = dot(&d, &op.apply(&d)).sqrt();
        let s = dot(&y, &op.apply(&y)).sqrt();
        assert!(e <= 1e-8 * s, "{e} {s}");
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let op = SparseOperator::from_fn(2, |x, y| {
            y[0] = x[0];
            y[1] = -x[1];
        });
        let err = cg_solve(&op, &[1.0, 1.0], 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::Breakdown(_)));
    }

    #[test]
    fn rejects_non_finite_rhs() {
        let op = SparseOperator::identity(2);
        assert!(matches!(
            cg_solve(&op, &[1.0, f64::NAN], 1e-12, 10),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn reports_non_convergence() {
        let grid = Grid::new(16).unwrap();
        let op = neumann_operator(grid);
        let mut b = vec![0.0; 256];
        b[0] = 1.0;
        b[255] = -1.0;
        let (_, rep) = cg_solve(&op, &b, 1e-14, 2).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn symmetry_and_null_space_probes() {
        let grid = Grid::new(8).unwrap();
        let op = neumann_operator(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let probes: Vec<_> = (0..4)
            .map(|_| {
                let x: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
                (x, y)
            })
            .collect();
        assert!(op.symmetry_defect(&probes) <= 1e-12);
        assert!(op.null_space_defect() <= 1e-12);
    }
}
