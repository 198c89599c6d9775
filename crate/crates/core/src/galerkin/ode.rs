use rayon::prelude::*;

use super::{GalerkinBasis, GalerkinState};
use crate::advection::AdvectionOperator;
use crate::error::{Error, Result};
use crate::grid::VectorField;

/// Lift `z` and reduced force `f̃` at one instant.
#[derive(Clone, Debug)]
pub struct Drive {
    pub z: VectorField,
    pub ftilde: VectorField,
}

/// Time series of one Galerkin run.
#[derive(Clone, Debug, Default)]
pub struct GalerkinTrajectory {
    pub times: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
    /// `‖v_k‖²`.
    pub energy: Vec<f64>,
    /// `‖∇v_k‖² = Σ λ_j g_j²`.
    pub grad_sq: Vec<f64>,
    /// Per step: `½Δ‖v_k‖² − ∫(⟨f̃, v_k⟩ − cross − ν‖∇v_k‖²)`, Simpson in time.
    pub imbalance: Vec<f64>,
    /// Per step, difference quotients `‖v'_k‖` and `‖∇v'_k‖`.
    pub dv_norm: Vec<f64>,
    pub grad_dv_norm: Vec<f64>,
    /// Largest `|Σ_j g_j Q_j(g)| / (‖g‖³ max|B|)` seen, `Q` the quadratic term.
    pub neutrality: f64,
}

impl GalerkinTrajectory {
    pub fn max_imbalance(&self) -> f64 {
        self.imbalance.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn last(&self) -> GalerkinState {
        GalerkinState {
            coeffs: self.coeffs.last().cloned().unwrap_or_default(),
            time: *self.times.last().unwrap_or(&0.0),
        }
    }
}

/// The ODE system for a fixed basis and viscosity with the quadratic
/// tensor `B[r][s][j] = b(w_r, w_s, w_j)` cached.
pub struct GalerkinSystem<'a> {
    basis: &'a GalerkinBasis,
    nu: f64,
    tensor: Vec<f64>,
    tensor_scale: f64,
}

/// Linear and constant terms contributed by a drive at one instant.
struct Coupling {
    /// `F_j = ⟨f̃, w_j⟩`.
    force: Vec<f64>,
    /// `Z[j][r] = b(w_r, z, w_j) + b(z, w_r, w_j)`, row-major.
    cross: Vec<f64>,
}

impl<'a> GalerkinSystem<'a> {
    pub fn new(basis: &'a GalerkinBasis, nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        let k = basis.k();
        let modes = basis.modes();
        let tensor: Vec<f64> = (0..k)
            .into_par_iter()
            .flat_map_iter(|r| {
                let op = AdvectionOperator::new(&modes[r]);
                (0..k).flat_map(move |s| {
                    let nrs = op.apply(&modes[s]);
                    modes.iter().map(move |w| nrs.dot(w)).collect::<Vec<_>>()
                })
            })
            .collect();
        let tensor_scale = tensor.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(Self {
            basis,
            nu,
            tensor,
            tensor_scale,
        })
    }

    pub fn basis(&self) -> &GalerkinBasis {
        self.basis
    }

    /// `max |b(w_r, w_s, w_j)|`.
    pub fn tensor_scale(&self) -> f64 {
        self.tensor_scale
    }

    /// `b(w_r, w_s, w_j)`.
    pub fn tensor(&self, r: usize, s: usize, j: usize) -> f64 {
        let k = self.basis.k();
        self.tensor[(r * k + s) * k + j]
    }

    fn coupling(&self, drive: Option<&dyn Fn(f64) -> Result<Drive>>, t: f64) -> Result<Coupling> {
        let k = self.basis.k();
        let Some(f) = drive else {
            return Ok(Coupling {
                force: vec![0.0; k],
                cross: vec![0.0; k * k],
            });
        };
        let d = f(t)?;
        let modes = self.basis.modes();
        let force = modes.iter().map(|w| d.ftilde.dot(w)).collect();
        let zop = AdvectionOperator::new(&d.z);
        let mut cross = vec![0.0; k * k];
        for r in 0..k {
            let mut a = AdvectionOperator::new(&modes[r]).apply(&d.z);
            a.axpy(1.0, &zop.apply(&modes[r]));
            for (j, w) in modes.iter().enumerate() {
                cross[j * k + r] = a.dot(w);
            }
        }
        Ok(Coupling { force, cross })
    }

    fn quadratic(&self, g: &[f64]) -> Vec<f64> {
        let k = g.len();
        let mut q = vec![0.0; k];
        for r in 0..k {
            for s in 0..k {
                let c = g[r] * g[s];
                if c == 0.0 {
                    continue;
                }
                let row = &self.tensor[(r * k + s) * k..(r * k + s + 1) * k];
                for (qj, b) in q.iter_mut().zip(row) {
                    *qj += b * c;
                }
            }
        }
        q
    }

    fn rhs(&self, g: &[f64], c: &Coupling) -> Vec<f64> {
        let k = g.len();
        let lam = self.basis.lambdas();
        let q = self.quadratic(g);
        (0..k)
            .map(|j| {
                let lin: f64 = (0..k).map(|r| c.cross[j * k + r] * g[r]).sum();
                -self.nu * lam[j] * g[j] - q[j] + c.force[j] - lin
            })
            .collect()
    }

    /// `⟨f̃, v⟩ − cross − ν‖∇v‖²`, the energy rate without the quadratic term.
    fn power(&self, g: &[f64], c: &Coupling) -> f64 {
        let k = g.len();
        let lam = self.basis.lambdas();
        let mut p = 0.0;
        for j in 0..k {
            let lin: f64 = (0..k).map(|r| c.cross[j * k + r] * g[r]).sum();
            p += g[j] * (c.force[j] - lin) - self.nu * lam[j] * g[j] * g[j];
        }
        p
    }

    /// Classical RK4 from `state` to `t_end` with steps close to `dt`.
    pub fn integrate(
        &self,
        state: &GalerkinState,
        drive: Option<&dyn Fn(f64) -> Result<Drive>>,
        dt: f64,
        t_end: f64,
    ) -> Result<GalerkinTrajectory> {
        let k = self.basis.k();
        if state.coeffs.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: state.coeffs.len(),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let span = t_end - state.time;
        if !(span >= 0.0) {
            return Err(Error::InvalidArgument("end time precedes the state".into()));
        }
        let steps = (span / dt).ceil() as usize;
        let dt = if steps > 0 { span / steps as f64 } else { dt };
        let lam = self.basis.lambdas();
        let energy = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>();
        let grad = |g: &[f64]| g.iter().zip(lam).map(|(x, l)| l * x * x).sum::<f64>();

        let mut traj = GalerkinTrajectory::default();
        let mut g = state.coeffs.clone();
        let mut t = state.time;
        traj.times.push(t);
        traj.energy.push(energy(&g));
        traj.grad_sq.push(grad(&g));
        traj.coeffs.push(g.clone());
        let mut c0 = self.coupling(drive, t)?;
        for _ in 0..steps {
            let cm = self.coupling(drive, t + 0.5 * dt)?;
            let c1 = self.coupling(drive, t + dt)?;
            let stage = |base: &[f64], k: &[f64], a: f64| -> Vec<f64> {
                base.iter().zip(k).map(|(x, d)| x + a * d).collect()
            };
            let k1 = self.rhs(&g, &c0);
            let k2 = self.rhs(&stage(&g, &k1, 0.5 * dt), &cm);
            let k3 = self.rhs(&stage(&g, &k2, 0.5 * dt), &cm);
            let k4 = self.rhs(&stage(&g, &k3, dt), &c1);
            let next: Vec<f64> = (0..k)
                .map(|j| g[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                .collect();
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("galerkin coefficients"));
            }

            // Simpson ledger with a cubic Hermite midpoint.
            let f1 = self.rhs(&next, &c1);
            let mid: Vec<f64> = (0..k)
                .map(|j| 0.5 * (g[j] + next[j]) + dt / 8.0 * (k1[j] - f1[j]))
                .collect();
            let work = dt / 6.0 * (self.power(&g, &c0) + 4.0 * self.power(&mid, &cm) + self.power(&next, &c1));
            traj.imbalance.push(0.5 * (energy(&next) - energy(&g)) - work);

            let norm = energy(&g).sqrt();
            if norm > 0.0 && self.tensor_scale > 0.0 {
                let q = self.quadratic(&g);
                let s: f64 = g.iter().zip(&q).map(|(a, b)| a * b).sum();
                traj.neutrality = traj.neutrality.max(s.abs() / (norm.powi(3) * self.tensor_scale));
            }
            let dg: Vec<f64> = (0..k).map(|j| (next[j] - g[j]) / dt).collect();
            traj.dv_norm.push(energy(&dg).sqrt());
            traj.grad_dv_norm.push(grad(&dg).sqrt());

            g = next;
            t += dt;
            c0 = c1;
            traj.times.push(t);
            traj.energy.push(energy(&g));
            traj.grad_sq.push(grad(&g));
            traj.coeffs.push(g.clone());
        }
        Ok(traj)
    }
}

/// Builds the system for `basis` and integrates it.
pub fn integrate_galerkin(
    basis: &GalerkinBasis,
    state: &GalerkinState,
    drive: Option<&dyn Fn(f64) -> Result<Drive>>,
    nu: f64,
    dt: f64,
    t_end: f64,
) -> Result<GalerkinTrajectory> {
    GalerkinSystem::new(basis, nu)?.integrate(state, drive, dt, t_end)
}
