use std::fmt;
use std::sync::Arc;

use crate::grid::{Grid, VectorField};

type ForceFn = dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync;

/// External body force `f(x, y, t)`.
#[derive(Clone, Default)]
pub enum ForcingSpec {
    #[default]
    Zero,
    Field(Arc<ForceFn>),
}

impl ForcingSpec {
    pub fn from_fn(f: impl Fn(f64, f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        ForcingSpec::Field(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ForcingSpec::Zero)
    }

    /// Samples the x-component on vertical faces and the y-component on
    /// horizontal faces at time `t`.
    pub fn eval(&self, grid: Grid, t: f64) -> VectorField {
        match self {
            ForcingSpec::Zero => VectorField::zeros(grid),
            ForcingSpec::Field(f) => VectorField::from_fn(grid, |x, y| f(x, y, t)[0], |x, y| f(x, y, t)[1]),
        }
    }
}

impl fmt::Debug for ForcingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingSpec::Zero => write!(f, "ForcingSpec::Zero"),
            ForcingSpec::Field(_) => write!(f, "ForcingSpec::Field(..)"),
        }
    }
}
