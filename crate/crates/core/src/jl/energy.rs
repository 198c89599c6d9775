use super::{JlSolver, JlState};
use crate::advection::{advect, trilinear_b};
use crate::diagnostics::{trapezoid, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{
    divergence, gradient, gradient_energy, laplacian_neumann, vector_laplacian, BoundaryTrace,
    ScalarField, VectorField, VelocityBc,
};

/// Per-sample quantities of the energy argument for the solenoidal part.
#[derive(Clone, Debug, Default)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    /// `‖v‖²`.
    pub v_sq: Vec<f64>,
    /// `‖∇v‖²`.
    pub grad_v_sq: Vec<f64>,
    /// `‖∇z‖²`.
    pub grad_z_sq: Vec<f64>,
    /// `‖f̃‖²_{V'}`.
    pub ftilde_dual_sq: Vec<f64>,
    /// `⟨f̃, v⟩`.
    pub forcing_work: Vec<f64>,
    /// `b(v, z, v) + b(z, v, v)`.
    pub cross_work: Vec<f64>,
    /// Per step: `½Δ‖v‖² + dt ν ∫‖∇v‖² − dt ∫(⟨f̃,v⟩ − cross)`, trapezoid in time.
    pub imbalance: Vec<f64>,
}

impl EnergyLedger {
    pub fn max_imbalance(&self) -> f64 {
        self.imbalance.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Evaluates the energy ledger along a decomposed-route history.
///
/// `∂t z` is taken as the lift of `ν Δ g`, its exact semi-discrete value,
/// so the ledger does not reuse the stepper's own difference quotient.
pub fn energy_ledger(solver: &JlSolver, history: &[JlState]) -> Result<EnergyLedger> {
    let lifter = solver.lifter();
    let grid = solver.grid();
    let nu = solver.nu();
    let mut led = EnergyLedger::default();
    for s in history {
        let dec = s
            .decomposition
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("energy ledger needs cached decompositions".into()))?;
        let (v, z) = (&dec.v, &dec.z);
        let zdot = lifter.lift_divergence(&laplacian_neumann(&s.g.g).scaled(nu))?.z;
        let mut ft = s.forcing.eval(grid, s.time);
        ft.axpy(-1.0, &advect(z, z));
        ft.axpy(-1.0, &zdot);
        ft.zero_boundary();
        let dual = lifter
            .stokes()
            .solve_forced(&ft, &ScalarField::zeros(grid), &BoundaryTrace::zeros(grid), 1e-10)?;
        led.times.push(s.time);
        led.v_sq.push(v.dot(v));
        led.grad_v_sq.push(gradient_energy(v));
        led.grad_z_sq.push(gradient_energy(z));
        led.ftilde_dual_sq.push(ft.dot(&dual.z).max(0.0));
        led.forcing_work.push(ft.dot(v));
        led.cross_work.push(trilinear_b(v, z, v)? + trilinear_b(z, v, v)?);
    }
    for k in 1..led.times.len() {
        let dt = led.times[k] - led.times[k - 1];
        let lhs = 0.5 * (led.v_sq[k] - led.v_sq[k - 1])
            + dt * nu * 0.5 * (led.grad_v_sq[k] + led.grad_v_sq[k - 1]);
        let r = |i: usize| led.forcing_work[i] - led.cross_work[i];
        let rhs = 0.5 * dt * (r(k) + r(k - 1));
        led.imbalance.push(lhs - rhs);
    }
    Ok(led)
}

/// Energy and Gronwall checks for a decomposed-route history.
///
/// The constants of the differential inequality are measured per sample as
/// the smallest values for which the Young splittings of the proof hold:
///
/// ```text
/// |⟨f̃, v⟩|          ≤ ν/4 ‖∇v‖² + C_f/ν ‖f̃‖²_{V'}
/// |cross work|      ≤ ν/4 ‖∇v‖² + C_z/ν ‖∇z‖² ‖v‖²
/// ```
///
/// maximized over the run. The envelope is then
/// `(‖v₀‖² + 2C_f/ν ∫‖f̃‖²_{V'}) exp(2C_z/ν ∫‖∇z‖²)` against
/// `‖v(t)‖² + ν ∫‖∇v‖²`.
pub fn check_energy_bound(solver: &JlSolver, history: &[JlState]) -> Result<DiagnosticsRecord> {
    if history.is_empty() {
        return Err(Error::InvalidArgument("empty history".into()));
    }
    let led = energy_ledger(solver, history)?;
    let nu = solver.nu();
    let mut c_f = 0.0_f64;
    let mut c_z = 0.0_f64;
    for i in 0..led.times.len() {
        let quarter = 0.25 * nu * led.grad_v_sq[i];
        let f2 = led.ftilde_dual_sq[i];
        let fw = led.forcing_work[i].abs() - quarter;
        if fw > 0.0 && f2 > 0.0 {
            c_f = c_f.max(fw * nu / f2);
        }
        let zz = led.grad_z_sq[i] * led.v_sq[i];
        let cw = led.cross_work[i].abs() - quarter;
        if cw > 0.0 && zz > 0.0 {
            c_z = c_z.max(cw * nu / zz);
        }
    }

    // The first sample is an equality; rank the rest by lhs / rhs.
    let mut worst: Option<(f64, f64, f64)> = None;
    let start = usize::from(led.times.len() > 1);
    for k in start..led.times.len() {
        let ts = &led.times[..=k];
        let lhs = led.v_sq[k] + nu * trapezoid(ts, &led.grad_v_sq[..=k]);
        let rhs = (led.v_sq[0] + 2.0 * c_f / nu * trapezoid(ts, &led.ftilde_dual_sq[..=k]))
            * (2.0 * c_z / nu * trapezoid(ts, &led.grad_z_sq[..=k])).exp();
        if worst.is_none_or(|(_, l, r)| lhs * r > l * rhs) {
            worst = Some((led.times[k], lhs, rhs));
        }
    }
    let (t_worst, lhs, rhs) = worst.unwrap();

    let core = led.imbalance.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let growth = led
        .v_sq
        .windows(2)
        .map(|w| w[1].sqrt() - w[0].sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let passive = history.iter().all(|s| {
        s.forcing.is_zero() && s.decomposition.as_ref().is_some_and(|d| d.z.max_abs() <= 1e-12)
    });

    let last = history.last().unwrap();
    let mut rec = DiagnosticsRecord::new("energy_bound", last.time);
    rec.set("c_f", c_f)
        .set("c_z", c_z)
        .set("max_imbalance", led.max_imbalance())
        .set("gronwall_lhs", lhs)
        .set("gronwall_rhs", rhs)
        .set("gronwall_worst_time", t_worst)
        .set("gronwall_ratio", if rhs > 0.0 { lhs / rhs } else { 0.0 })
        .check("gronwall", lhs, rhs);
    if led.imbalance.is_empty() {
        rec.set("max_step_growth", 0.0);
    } else {
        // Positive imbalance means the step gained more energy than the
        // right-hand side supplies.
        rec.inform("core", core, 0.0).set("max_step_growth", growth);
        if passive {
            rec.check("energy_decay", growth, 1e-10);
        }
    }
    Ok(rec)
}

/// Boundary remainder `−⟨u, ℙΔu + ∇ div u⟩ − ‖∇ℙu‖² − ‖div u‖²`.
pub fn coercivity_probe(solver: &JlSolver, u: &VectorField) -> Result<DiagnosticsRecord> {
    if u.boundary_max_abs() > 1e-14 * (1.0 + u.max_abs()) {
        return Err(Error::InvalidArgument("coercivity probe needs zero wall faces".into()));
    }
    let lifter = solver.lifter();
    let pu = lifter.leray_project(u)?;
    let plu = lifter.leray_project(&vector_laplacian(u, VelocityBc::NoSlip))?;
    let du = divergence(u);
    let mut op = plu;
    op.axpy(1.0, &gradient(&du));
    let remainder = -u.dot(&op) - gradient_energy(&pu) - du.dot(&du);
    let scale = gradient_energy(u);
    let mut rec = DiagnosticsRecord::new("coercivity_probe", 0.0);
    rec.set("remainder", remainder)
        .set("relative", if scale > 0.0 { remainder / scale } else { 0.0 })
        .set("sign", remainder.signum());
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingSpec;
    use crate::grid::{stream_function_curl, Grid};
    use crate::jl::{run, JlRoute};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn probe_vanishes_on_solenoidal_fields() {
        let grid = Grid::new(16).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let u = stream_function_curl(grid, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        let r = coercivity_probe(&solver, &u).unwrap();
        assert!(r.metric("relative").unwrap().abs() <= 1e-8);
    }

    #[test]
    fn probe_is_indefinite() {
        let grid = Grid::new(12).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut pos, mut neg) = (0, 0);
        for _ in 0..100 {
            let u = (0..grid.num_u()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = (0..grid.num_v()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut w = VectorField::from_components(grid, u, v).unwrap();
            w.zero_boundary();
            let r = coercivity_probe(&solver, &w).unwrap().metric("remainder").unwrap();
            if r > 0.0 {
                pos += 1;
            } else if r < 0.0 {
                neg += 1;
            }
        }
        assert!(pos > 0 && neg > 0, "{pos} {neg}");
    }

    #[test]
    fn unforced_solenoidal_energy_decays() {
        let grid = Grid::new(16).unwrap();
        let solver = JlSolver::new(grid, 0.1).unwrap();
        let u0 = stream_function_curl(grid, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        let s0 = solver.initial_state(u0, ForcingSpec::Zero).unwrap();
        let hist = run(&solver, s0, JlRoute::Decomposed, 2e-3, 20).unwrap();
        let r = check_energy_bound(&solver, &hist).unwrap();
        assert!(r.passes(), "{r}");
        assert!(r.margin("energy_decay").is_some());
    }
}
