use super::Grid;
use crate::error::{Error, Result};

/// One value per cell center.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.num_cells()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.num_cells()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_cells(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.num_cells());
        for j in 0..n {
            for i in 0..n {
                let (x, y) = grid.cell_center(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.cell(i, j)]
    }

    /// `∫ f` by the midpoint rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.integral()
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn remove_mean(&mut self) {
        let m = self.values.iter().sum::<f64>() / self.values.len() as f64;
        self.values.iter_mut().for_each(|v| *v -= m);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Face-normal velocity components on the MAC grid.
///
/// `u` holds `(n+1)·n` values on vertical faces, `v` holds `n·(n+1)` values
/// on horizontal faces. The first and last column of `u` (and row of `v`) are
/// the wall-normal boundary faces.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            u: vec![0.0; grid.num_u()],
            v: vec![0.0; grid.num_v()],
        }
    }

    pub fn from_components(grid: Grid, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != grid.num_u() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_u(),
                found: u.len(),
            });
        }
        if v.len() != grid.num_v() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_v(),
                found: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector field"));
        }
        Ok(Self { grid, u, v })
    }

    /// Samples `(fu, fv)` at the respective face centers.
    pub fn from_fn(
        grid: Grid,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let n = grid.n();
        let mut out = Self::zeros(grid);
        for j in 0..n {
            for i in 0..=n {
                let (x, y) = grid.uface_center(i, j);
                out.u[grid.uface(i, j)] = fu(x, y);
            }
        }
        for j in 0..=n {
            for i in 0..n {
                let (x, y) = grid.vface_center(i, j);
                out.v[grid.vface(i, j)] = fv(x, y);
            }
        }
        out
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    /// Concatenated `[u, v]`, the layout used by the linear solvers.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.u.len() + self.v.len());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.v);
        out
    }

    pub fn from_flat(grid: Grid, flat: &[f64]) -> Result<Self> {
        if flat.len() != grid.num_faces() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_faces(),
                found: flat.len(),
            });
        }
        let (u, v) = flat.split_at(grid.num_u());
        Ok(Self {
            grid,
            u: u.to_vec(),
            v: v.to_vec(),
        })
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        let s: f64 = self.u.iter().zip(&other.u).map(|(a, b)| a * b).sum::<f64>()
            + self.v.iter().zip(&other.v).map(|(a, b)| a * b).sum::<f64>();
        s * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&mut self, a: f64) {
        self.u.iter_mut().chain(self.v.iter_mut()).for_each(|x| *x *= a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Visits every wall-normal boundary face as `(flat index, outward sign)`.
    pub(crate) fn for_each_boundary_face(grid: Grid, mut f: impl FnMut(usize, f64)) {
        let n = grid.n();
        let nu = grid.num_u();
        for j in 0..n {
            f(grid.uface(0, j), -1.0);
            f(grid.uface(n, j), 1.0);
        }
        for i in 0..n {
            f(nu + grid.vface(i, 0), -1.0);
            f(nu + grid.vface(i, n), 1.0);
        }
    }

    /// Sets every wall-normal face to zero.
    pub fn zero_boundary(&mut self) {
        let n = self.grid.n();
        for j in 0..n {
            let a = self.grid.uface(0, j);
            let b = self.grid.uface(n, j);
            self.u[a] = 0.0;
            self.u[b] = 0.0;
        }
        for i in 0..n {
            let a = self.grid.vface(i, 0);
            let b = self.grid.vface(i, n);
            self.v[a] = 0.0;
            self.v[b] = 0.0;
        }
    }

    /// Largest absolute wall-normal face value.
    pub fn boundary_max_abs(&self) -> f64 {
        let mut m = 0.0_f64;
        let nu = self.grid.num_u();
        Self::for_each_boundary_face(self.grid, |k, _| {
            let x = if k < nu { self.u[k] } else { self.v[k - nu] };
            m = m.max(x.abs());
        });
        m
    }

    /// Outward normal trace `w·n` on every boundary face.
    pub fn normal_trace(&self) -> BoundaryTrace {
        let n = self.grid.n();
        let mut t = BoundaryTrace::zeros(self.grid);
        for j in 0..n {
            t.left[j] = -self.u[self.grid.uface(0, j)];
            t.right[j] = self.u[self.grid.uface(n, j)];
        }
        for i in 0..n {
            t.bottom[i] = -self.v[self.grid.vface(i, 0)];
            t.top[i] = self.v[self.grid.vface(i, n)];
        }
        t
    }

    /// Overwrites the wall-normal faces with the outward trace `trace`.
    pub fn set_normal_trace(&mut self, trace: &BoundaryTrace) {
        let n = self.grid.n();
        for j in 0..n {
            let a = self.grid.uface(0, j);
            let b = self.grid.uface(n, j);
            self.u[a] = -trace.left[j];
            self.u[b] = trace.right[j];
        }
        for i in 0..n {
            let a = self.grid.vface(i, 0);
            let b = self.grid.vface(i, n);
            self.v[a] = -trace.bottom[i];
            self.v[b] = trace.top[i];
        }
    }
}

/// One scalar per wall-normal boundary face, oriented along the outward
/// normal. Each side is ordered by increasing tangential coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    grid: Grid,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl BoundaryTrace {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.n();
        Self {
            grid,
            left: vec![c; n],
            right: vec![c; n],
            bottom: vec![c; n],
            top: vec![c; n],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.left
            .iter()
            .chain(&self.right)
            .chain(&self.bottom)
            .chain(&self.top)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.left
            .iter_mut()
            .chain(self.right.iter_mut())
            .chain(self.bottom.iter_mut())
            .chain(self.top.iter_mut())
    }

    /// `∫_∂Ω h` with one face length per value.
    pub fn integral(&self) -> f64 {
        self.iter().sum::<f64>() * self.grid.h()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    pub fn sub(&self, other: &BoundaryTrace) -> Self {
        let mut out = self.clone();
        for (a, b) in out.iter_mut().zip(other.iter()) {
            *a -= b;
        }
        out
    }
}
