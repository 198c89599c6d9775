//! Norms, inequality margins, rate fits and convergence orders.

mod record;

pub use record::{DiagnosticsRecord, Margin, SLACK_ABS, SLACK_REL};

use crate::error::{Error, Result};
use crate::grid::{gradient_energy, scalar_gradient_energy, ScalarBc, ScalarField, VectorField};
use crate::linsolve::PoissonSolver;

/// `‖g‖_{H̃⁻¹} = sqrt⟨g, (I − Δ_N)⁻¹ g⟩`.
pub fn hm1_norm(g: &ScalarField) -> Result<f64> {
    hm1_norm_with(&PoissonSolver::new(g.grid(), ScalarBc::Neumann), g)
}

/// As [`hm1_norm`] with a prebuilt Neumann solver.
pub fn hm1_norm_with(solver: &PoissonSolver, g: &ScalarField) -> Result<f64> {
    if !g.is_finite() {
        return Err(Error::NonFinite("hm1 norm input"));
    }
    let w = solver.solve(1.0, -1.0, g)?;
    Ok(w.dot(g).max(0.0).sqrt())
}

/// L², H¹ seminorm, H¹ and H̃⁻¹ norms of a cell field. The gradient uses
/// the zero-flux closure, so constants have zero seminorm.
pub fn scalar_norms(g: &ScalarField) -> Result<DiagnosticsRecord> {
    if !g.is_finite() {
        return Err(Error::NonFinite("scalar norms input"));
    }
    let l2 = g.l2_norm();
    let semi = scalar_gradient_energy(g, ScalarBc::Neumann).max(0.0).sqrt();
    Ok(DiagnosticsRecord::new("norms", 0.0)
        .with("l2", l2)
        .with("h1_seminorm", semi)
        .with("h1", (l2 * l2 + semi * semi).sqrt())
        .with("hm1", hm1_norm(g)?))
}

/// L² and H¹ norms of a face field.
pub fn vector_norms(w: &VectorField) -> Result<DiagnosticsRecord> {
    if !w.is_finite() {
        return Err(Error::NonFinite("vector norms input"));
    }
    let l2 = w.l2_norm();
    let semi = gradient_energy(w).max(0.0).sqrt();
    Ok(DiagnosticsRecord::new("norms", 0.0)
        .with("l2", l2)
        .with("h1_seminorm", semi)
        .with("h1", (l2 * l2 + semi * semi).sqrt()))
}

/// `‖w‖_{H¹} = sqrt(‖w‖² + ‖∇w‖²)`.
pub fn h1_norm(w: &VectorField) -> f64 {
    (w.dot(w) + gradient_energy(w)).sqrt()
}

/// Composite trapezoid rule.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tt, yy)| 0.5 * (tt[1] - tt[0]) * (yy[0] + yy[1]))
        .sum()
}

/// Least-squares slope of `log y` against `t`.
pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least 10 samples, got {}",
            series.len()
        )));
    }
    if series.iter().any(|&(t, y)| !(y > 0.0) || !y.is_finite() || !t.is_finite()) {
        return Err(Error::InvalidArgument("decay fit needs positive finite values".into()));
    }
    let n = series.len() as f64;
    let tm = series.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = series.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, y) in series {
        sxy += (t - tm) * (y.ln() - lm);
        sxx += (t - tm) * (t - tm);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("decay fit over a single time".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceOrder {
    pub orders: [f64; 2],
    pub mean: f64,
    /// False when the errors do not decrease strictly.
    pub monotone: bool,
}

/// Observed orders `log₂(e₁/e₂)`, `log₂(e₂/e₃)` for errors at `h, h/2, h/4`.
pub fn convergence_order(errors: [f64; 3]) -> Result<ConvergenceOrder> {
    if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument("convergence order needs positive errors".into()));
    }
    let o1 = (errors[0] / errors[1]).log2();
    let o2 = (errors[1] / errors[2]).log2();
    Ok(ConvergenceOrder {
        orders: [o1, o2],
        mean: 0.5 * (o1 + o2),
        monotone: errors[0] > errors[1] && errors[1] > errors[2],
    })
}
