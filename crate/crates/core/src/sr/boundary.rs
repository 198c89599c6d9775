use crate::error::{Error, Result};
use crate::grid::{laplacian, BoundaryTrace, Grid, ScalarField};
use crate::heat::DivergenceState;

/// Outward normal velocity `h = u·n` on every boundary face.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNormalState {
    pub h: BoundaryTrace,
    pub time: f64,
}

impl BoundaryNormalState {
    pub fn new(h: BoundaryTrace, time: f64) -> Result<Self> {
        if !h.is_finite() || !time.is_finite() {
            return Err(Error::NonFinite("boundary normal state"));
        }
        Ok(Self { h, time })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            h: BoundaryTrace::zeros(grid),
            time: 0.0,
        }
    }

    /// `∫_∂Ω h`.
    pub fn flux(&self) -> f64 {
        self.h.integral()
    }
}

/// Volume form `𝒞̄ = (1/|∂Ω|) ∫(ν Δg + λ g)` with the state's closure.
pub fn compat_constant(g: &DivergenceState, lambda: f64) -> f64 {
    let lap = laplacian(&g.g, g.bc);
    let perimeter = g.grid().perimeter();
    (g.nu * lap.integral() + lambda * g.g.integral()) / perimeter
}

/// Step-integrated form of the compatibility constant.
///
/// `I = (1/|∂Ω|)(∫g⁺ − e^{−λdt}∫g)` is exactly the boundary-averaged
/// Duhamel increment the flux needs to stay compatible with the interior
/// mass. It is returned as the constant value that [`evolve_h`] turns into
/// that increment, `λI / (1 − e^{−λdt})`. No Laplacian is evaluated.
pub fn compat_constant_stepped(g: &ScalarField, g_next: &ScalarField, lambda: f64, dt: f64) -> Result<f64> {
    check_lambda(lambda)?;
    g.grid().check_same(&g_next.grid())?;
    let decay = (-lambda * dt).exp();
    let inc = (g_next.integral() - decay * g.integral()) / g.grid().perimeter();
    Ok(lambda * inc / -(-lambda * dt).exp_m1())
}

/// Exact integrating-factor update of `∂t h + λh = 𝒞̄` with `𝒞̄` frozen
/// over the step.
pub fn evolve_h(h: &BoundaryNormalState, cbar: f64, lambda: f64, dt: f64) -> Result<BoundaryNormalState> {
    check_lambda(lambda)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if !cbar.is_finite() {
        return Err(Error::NonFinite("compatibility constant"));
    }
    let decay = (-lambda * dt).exp();
    let relax = -(-lambda * dt).exp_m1() * cbar / lambda;
    let mut out = h.clone();
    out.h.iter_mut().for_each(|x| *x = decay * *x + relax);
    out.time = h.time + dt;
    Ok(out)
}

/// `∫₀ᵗ e^{−λ(t−s)} 𝒞̄(s) ds` for the piecewise-linear interpolant of the
/// samples `(times, cbar)`, integrated in closed form on each interval.
pub fn duhamel_integral(times: &[f64], cbar: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if times.len() != cbar.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: cbar.len(),
        });
    }
    let Some(&t_end) = times.last() else {
        return Ok(0.0);
    };
    let mut acc = 0.0;
    for k in 1..times.len() {
        let (a, b) = (times[k - 1], times[k]);
        let d = b - a;
        if d <= 0.0 {
            return Err(Error::InvalidArgument("sample times must increase".into()));
        }
        // On [a, b]: ∫ e^{−λ(b−s)} (c₀ + (c₁−c₀)(s−a)/d) ds, then decay to t_end.
        let e = (-lambda * d).exp();
        let w0 = (1.0 - e) / lambda;
        let w1 = (d - w0) / (lambda * d);
        let piece = cbar[k - 1] * (w0 - w1) + cbar[k] * w1;
        acc += piece * (-lambda * (t_end - b)).exp();
    }
    Ok(acc)
}

/// Closed-form Duhamel solution `h(t) = e^{−λt} h₀ + ∫₀ᵗ e^{−λ(t−s)} 𝒞̄`.
pub fn duhamel(h0: &BoundaryTrace, t: f64, lambda: f64, integral: f64) -> BoundaryTrace {
    let decay = (-lambda * t).exp();
    let mut out = h0.clone();
    out.iter_mut().for_each(|x| *x = decay * *x + integral);
    out
}

/// Largest wall value of `g` extrapolated from the two nearest cells,
/// `1.5 g₀ − 0.5 g₁` along each wall normal.
pub fn wall_divergence(g: &ScalarField) -> f64 {
    let n = g.grid().n();
    let mut m = 0.0_f64;
    let mut take = |a: f64, b: f64| m = m.max((1.5 * a - 0.5 * b).abs());
    for k in 0..n {
        take(g.at(0, k), g.at(1, k));
        take(g.at(n - 1, k), g.at(n - 2, k));
        take(g.at(k, 0), g.at(k, 1));
        take(g.at(k, n - 1), g.at(k, n - 2));
    }
    m
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("damping λ must be positive, got {lambda}")));
    }
    Ok(())
}
