use rayon::prelude::*;

use super::config::{Config, Route, System};
use super::report::Report;
use super::scenario::{forcing, initial_velocity, random_solenoidal};
use crate::diagnostics::{convergence_order, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{Grid, VectorField};
use crate::jl::{self, manufactured, JlRoute, JlSolver};
use crate::sr::{self, SrRoute, SrSolver};

fn lambda(cfg: &Config) -> Result<f64> {
    cfg.lambda
        .ok_or_else(|| Error::Config("missing required key `lambda` for system = sr".into()))
}

fn no_galerkin(cfg: &Config, what: &str) -> Result<()> {
    if cfg.route == Route::Galerkin {
        return Err(Error::Config(format!("`{what}` compares full-grid routes; route = galerkin is not supported")));
    }
    Ok(())
}

/// Final velocity of the configured system from `u0` (the preset when
/// `None`), along `route` with step `dt`.
pub fn final_velocity(cfg: &Config, route: Route, dt: f64, u0: Option<&VectorField>) -> Result<VectorField> {
    let grid = Grid::new(cfg.grid)?;
    let steps = (cfg.t_end / dt).round().max(1.0) as usize;
    match cfg.system {
        System::Jl => {
            let solver = JlSolver::new(grid, cfg.nu)?;
            let u0 = match u0 {
                Some(u) => u.clone(),
                None => initial_velocity(cfg, solver.lifter())?,
            };
            let s0 = solver.initial_state(u0, forcing(cfg))?;
            let r = if route == Route::Direct { JlRoute::Direct } else { JlRoute::Decomposed };
            Ok(jl::run_to_end(&solver, s0, r, dt, steps)?.u)
        }
        System::Sr => {
            let solver = SrSolver::new(grid, cfg.nu, lambda(cfg)?)?;
            let u0 = match u0 {
                Some(u) => u.clone(),
                None => initial_velocity(cfg, solver.lifter())?,
            };
            let s0 = solver.initial_state(u0, forcing(cfg))?;
            let r = if route == Route::Direct { SrRoute::Direct } else { SrRoute::Constructive };
            Ok(sr::run_to_end(&solver, s0, r, dt, steps)?.u)
        }
    }
}

/// L² error of the steady manufactured solution on an `n` grid.
pub fn manufactured_error(cfg: &Config, n: usize) -> Result<f64> {
    match cfg.system {
        System::Jl => {
            let r = if cfg.route == Route::Direct { JlRoute::Direct } else { JlRoute::Decomposed };
            manufactured::error_at(n, cfg.nu, cfg.t_end, cfg.courant, r)
        }
        System::Sr => {
            let grid = Grid::new(n)?;
            let solver = SrSolver::new(grid, cfg.nu, lambda(cfg)?)?;
            let steps = (cfg.t_end / (cfg.courant * grid.h())).ceil() as usize;
            let dt = cfg.t_end / steps as f64;
            let s0 = solver.initial_state(manufactured::initial(grid), manufactured::forcing(cfg.nu))?;
            let r = if cfg.route == Route::Direct { SrRoute::Direct } else { SrRoute::Constructive };
            let s = sr::run_to_end(&solver, s0, r, dt, steps)?;
            Ok(s.u.sub(&manufactured::exact(grid)).l2_norm())
        }
    }
}

pub fn convergence(cfg: &Config) -> Result<Report> {
    no_galerkin(cfg, "convergence")?;
    let grids: [usize; 3] = cfg
        .grids
        .clone()
        .try_into()
        .map_err(|_| Error::Config("convergence needs exactly three grids".into()))?;
    if !(grids[1] == 2 * grids[0] && grids[2] == 2 * grids[1]) {
        return Err(Error::Config("convergence grids must double, e.g. 16,32,64".into()));
    }
    let errors: Vec<f64> = grids
        .par_iter()
        .map(|&n| manufactured_error(cfg, n))
        .collect::<Result<_>>()?;
    let order = convergence_order([errors[0], errors[1], errors[2]])?;
    let mut rec = DiagnosticsRecord::new("convergence", cfg.t_end);
    for (n, e) in grids.iter().zip(&errors) {
        rec.set(format!("error_n{n:03}"), *e);
    }
    rec.set("order_1", order.orders[0])
        .set("order_2", order.orders[1])
        .set("order_mean", order.mean)
        .set("monotone", if order.monotone { 1.0 } else { 0.0 })
        .check("order", 1.8, order.orders[0].min(order.orders[1]));
    let mut report = Report::new(format!(
        "convergence system={} route={} grids={:?} nu={} T={} courant={}",
        cfg.system, cfg.route, grids, cfg.nu, cfg.t_end, cfg.courant
    ));
    report.checks.push(rec);
    Ok(report)
}

/// Route A against route B at `dt`, `dt/2`, `dt/4`.
pub fn compare(cfg: &Config) -> Result<Report> {
    no_galerkin(cfg, "compare")?;
    let dts = [cfg.dt, cfg.dt / 2.0, cfg.dt / 4.0];
    let jobs: Vec<(usize, Route)> = (0..3).flat_map(|i| [(i, Route::Decomposed), (i, Route::Direct)]).collect();
    let finals: Vec<VectorField> = jobs
        .par_iter()
        .map(|&(i, r)| final_velocity(cfg, r, dts[i], None))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = (0..3).map(|i| finals[2 * i].sub(&finals[2 * i + 1]).l2_norm()).collect();
    let mut rec = DiagnosticsRecord::new("compare", cfg.t_end);
    for (i, g) in gaps.iter().enumerate() {
        rec.set(format!("gap_{i}"), *g).set(format!("dt_{i}"), dts[i]);
    }
    let scale = finals[0].l2_norm().max(1e-300);
    if gaps.iter().all(|g| *g <= 1e-12 * (1.0 + scale)) {
        // Identical routes, as in the reduction case: no order to measure.
        rec.check("gap", gaps[0], 1e-9);
    } else {
        let o1 = (gaps[0] / gaps[1]).log2();
        let o2 = (gaps[1] / gaps[2]).log2();
        rec.set("order_1", o1).set("order_2", o2).check("order", 0.9, o1.min(o2));
    }
    let mut report = Report::new(format!(
        "compare system={} grid={} nu={} dt={} T={}",
        cfg.system, cfg.grid, cfg.nu, cfg.dt, cfg.t_end
    ));
    report.checks.push(rec);
    Ok(report)
}

pub const STABILITY_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Perturbs the preset by `ε δ` with a seeded solenoidal `δ` (so the
/// divergence data is unchanged) and measures `‖δu(T)‖ / ε`.
pub fn stability(cfg: &Config) -> Result<Report> {
    no_galerkin(cfg, "stability")?;
    let grid = Grid::new(cfg.grid)?;
    let lifter = crate::lift::Lifter::new(grid);
    let u0 = initial_velocity(cfg, &lifter)?;
    let delta = random_solenoidal(grid, cfg.seed);
    let starts: Vec<VectorField> = std::iter::once(u0.clone())
        .chain(STABILITY_EPS.iter().map(|&e| {
            let mut u = u0.clone();
            u.axpy(e, &delta);
            u
        }))
        .collect();
    let finals: Vec<VectorField> = starts
        .par_iter()
        .map(|u| final_velocity(cfg, cfg.route, cfg.dt, Some(u)))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = STABILITY_EPS
        .iter()
        .enumerate()
        .map(|(i, e)| finals[i + 1].sub(&finals[0]).l2_norm() / e)
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = if lo > 0.0 { (hi - lo) / lo } else { f64::INFINITY };
    let mut rec = DiagnosticsRecord::new("stability", cfg.t_end);
    for (e, r) in STABILITY_EPS.iter().zip(&ratios) {
        rec.set(format!("ratio_eps{:.0e}", e), *r);
    }
    rec.set("spread", spread).check("linear_response", spread, 0.1);
    let mut report = Report::new(format!(
        "stability system={} route={} grid={} nu={} dt={} T={} seed={}",
        cfg.system, cfg.route, cfg.grid, cfg.nu, cfg.dt, cfg.t_end, cfg.seed
    ));
    report.checks.push(rec);
    Ok(report)
}
