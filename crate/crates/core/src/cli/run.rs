use super::config::{Config, Ic, Route, System};
use super::io::FieldDump;
use super::report::Report;
use super::scenario::{eigenmode_drive, forcing, initial_velocity};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::galerkin::{build_basis, integrate_galerkin, Drive};
use crate::grid::{divergence, Grid};
use crate::heat::{check_heat_estimates, DivergenceState};
use crate::jl::{check_energy_bound, JlRoute, JlSolver, JlState};
use crate::lift::Lifter;
use crate::sr::{wall_divergence, SrRoute, SrSolver, SrState};

/// Largest grid for which full histories are kept for the energy check.
const HISTORY_MAX_N: usize = 64;
/// Largest grid for which the divergence history is kept.
const HEAT_HISTORY_MAX_N: usize = 128;

pub fn simulate(cfg: &Config) -> Result<Report> {
    match (cfg.system, cfg.route) {
        (System::Jl, Route::Galerkin) => run_galerkin(cfg),
        (System::Jl, _) => run_jl(cfg),
        (System::Sr, Route::Galerkin) => Err(Error::Config("route = galerkin needs system = jl".into())),
        (System::Sr, _) => run_sr(cfg),
    }
}

fn title(cfg: &Config) -> String {
    format!(
        "run system={} route={} grid={} nu={} dt={} T={}",
        cfg.system, cfg.route, cfg.grid, cfg.nu, cfg.dt, cfg.t_end
    )
}

fn jl_record(s: &JlState) -> DiagnosticsRecord {
    let d = divergence(&s.u);
    let mut r = DiagnosticsRecord::new("jl", s.time);
    r.set("div_l2", d.l2_norm())
        .set("div_gap", d.sub(&s.g.g).l2_norm())
        .set("g_l2", s.g.g.l2_norm())
        .set("energy", s.u.dot(&s.u));
    if let Some(dec) = &s.decomposition {
        r.set("v_l2", dec.v.l2_norm()).set("z_l2", dec.z.l2_norm());
    }
    r
}

pub fn run_jl(cfg: &Config) -> Result<Report> {
    let grid = Grid::new(cfg.grid)?;
    let solver = JlSolver::new(grid, cfg.nu)?;
    let u0 = initial_velocity(cfg, solver.lifter())?;
    let mut s = solver.initial_state(u0, forcing(cfg))?;
    let route = match cfg.route {
        Route::Direct => JlRoute::Direct,
        _ => JlRoute::Decomposed,
    };
    let keep = route == JlRoute::Decomposed && grid.n() <= HISTORY_MAX_N;
    let keep_g = grid.n() <= HEAT_HISTORY_MAX_N;
    let mut hist = if keep { vec![s.clone()] } else { Vec::new() };
    let mut gh = vec![s.g.clone()];
    let mut report = Report::new(title(cfg));
    let first = jl_record(&s);
    let (mut max_div, mut max_gap) = (first.metric("div_l2").unwrap(), first.metric("div_gap").unwrap());
    report.series.push(first);
    let steps = cfg.steps();
    for k in 1..=steps {
        s = match route {
            JlRoute::Decomposed => solver.step_decomposed(&s, cfg.dt)?,
            JlRoute::Direct => solver.step_direct(&s, cfg.dt)?,
        };
        let rec = jl_record(&s);
        max_div = max_div.max(rec.metric("div_l2").unwrap());
        max_gap = max_gap.max(rec.metric("div_gap").unwrap());
        if keep_g {
            gh.push(s.g.clone());
        }
        if keep {
            hist.push(s.clone());
        }
        if k % cfg.every == 0 || k == steps {
            report.series.push(rec);
        }
    }

    let mut run = DiagnosticsRecord::new("run", s.time);
    run.set("steps", steps as f64)
        .set("max_div_l2", max_div)
        .set("max_div_gap", max_gap)
        .set("final_energy", s.u.dot(&s.u));
    if cfg.ic == Ic::Reduction {
        run.check("div_ceiling", max_div, 1e-9);
    }
    if route == JlRoute::Decomposed {
        run.check("div_tracks_heat", max_gap, 1e-8);
    }
    report.checks.push(run);
    if keep_g {
        report.checks.push(check_heat_estimates(&gh)?);
    }
    if keep {
        report.checks.push(check_energy_bound(&solver, &hist)?);
    }

    report.fields.extend(FieldDump::from_vector(&s.u, "u", s.time));
    report.fields.push(FieldDump::from_scalar(&divergence(&s.u), "div", s.time));
    report.fields.push(FieldDump::from_scalar(&s.pressure, "pressure", s.time));
    if let Some(dec) = &s.decomposition {
        report.fields.extend(FieldDump::from_vector(&dec.v, "v", s.time));
        report.fields.extend(FieldDump::from_vector(&dec.z, "z", s.time));
    }
    Ok(report)
}

fn sr_record(s: &SrState) -> DiagnosticsRecord {
    let d = divergence(&s.u);
    let mut r = DiagnosticsRecord::new("sr", s.time);
    r.set("div_l2", d.l2_norm())
        .set("div_gap", d.sub(&s.g.g).l2_norm())
        .set("wall_div", wall_divergence(&d))
        .set("solvability_gap", s.solvability_gap())
        .set("h_max", s.h.h.max_abs())
        .set("face_mismatch", s.u.normal_trace().sub(&s.h.h).max_abs())
        .set("g_l2", s.g.g.l2_norm())
        .set("energy", s.u.dot(&s.u));
    r
}

pub fn run_sr(cfg: &Config) -> Result<Report> {
    let grid = Grid::new(cfg.grid)?;
    let lambda = cfg
        .lambda
        .ok_or_else(|| Error::Config("missing required key `lambda` for system = sr".into()))?;
    let solver = SrSolver::new(grid, cfg.nu, lambda)?;
    let u0 = initial_velocity(cfg, solver.lifter())?;
    let mut s = solver.initial_state(u0, forcing(cfg))?;
    let route = match cfg.route {
        Route::Direct => SrRoute::Direct,
        _ => SrRoute::Constructive,
    };
    let keep_g = grid.n() <= HEAT_HISTORY_MAX_N;
    let mut gh = vec![s.g.clone()];
    let gap0 = s.solvability_gap().abs();
    let mut report = Report::new(title(cfg));
    let first = sr_record(&s);
    let mut worst = [0.0_f64; 4];
    let mut track = |r: &DiagnosticsRecord, t: f64| {
        worst[0] = worst[0].max(r.metric("div_l2").unwrap());
        worst[1] = worst[1].max(r.metric("solvability_gap").unwrap().abs() - gap0 * (-lambda * t).exp());
        worst[2] = worst[2].max(r.metric("face_mismatch").unwrap());
        worst[3] = worst[3].max(r.metric("wall_div").unwrap());
    };
    track(&first, 0.0);
    report.series.push(first);
    let steps = cfg.steps();
    for k in 1..=steps {
        s = match route {
            SrRoute::Constructive => solver.step_constructive(&s, cfg.dt)?,
            SrRoute::Direct => solver.step_direct(&s, cfg.dt)?,
        };
        let rec = sr_record(&s);
        track(&rec, s.time);
        if keep_g {
            gh.push(s.g.clone());
        }
        if k % cfg.every == 0 || k == steps {
            report.series.push(rec);
        }
    }

    let [max_div, gap_excess, faces, wall] = worst;
    let mut run = DiagnosticsRecord::new("run", s.time);
    run.set("steps", steps as f64)
        .set("lambda", lambda)
        .set("max_div_l2", max_div)
        .set("max_wall_div", wall)
        .set("final_energy", s.u.dot(&s.u))
        .check("solvability", gap_excess, 1e-9)
        .check("normal_faces", faces, 1e-8)
        .inform("wall_div", wall, 1e-6);
    if cfg.ic == Ic::Reduction {
        run.check("div_ceiling", max_div, 1e-9);
    }
    report.checks.push(run);
    if keep_g {
        report.checks.push(check_heat_estimates(&gh)?);
    }

    report.fields.extend(FieldDump::from_vector(&s.u, "u", s.time));
    report.fields.push(FieldDump::from_scalar(&divergence(&s.u), "div", s.time));
    report.fields.push(FieldDump::from_scalar(&s.pressure, "pressure", s.time));
    Ok(report)
}

pub fn run_galerkin(cfg: &Config) -> Result<Report> {
    let grid = Grid::new(cfg.grid)?;
    let basis = match &cfg.basis {
        Some(dir) => super::tools::load_basis(dir, grid, cfg.k)?,
        None => build_basis(grid, cfg.k)?,
    };
    let lifter = Lifter::new(grid);
    let u0 = initial_velocity(cfg, &lifter)?;
    let g0 = DivergenceState::new(divergence(&u0), crate::grid::ScalarBc::Neumann, cfg.nu)?;
    let z0 = lifter.lift_divergence(&g0.g)?.z;
    let v0 = u0.sub(&z0);
    let state = basis.project(&v0)?;
    let f = forcing(cfg);
    // A lift of round-off divergence is not a drive.
    let driven = z0.l2_norm() > 1e-12 * (1.0 + v0.l2_norm()) || !f.is_zero();
    let drive = eigenmode_drive(cfg, z0, f);
    let drive_ref: Option<&dyn Fn(f64) -> Result<Drive>> = if driven { Some(&drive) } else { None };
    let traj = integrate_galerkin(&basis, &state, drive_ref, cfg.nu, cfg.dt, cfg.t_end)?;

    let mut report = Report::new(title(cfg));
    for (i, &t) in traj.times.iter().enumerate() {
        if i % cfg.every != 0 && i + 1 != traj.times.len() {
            continue;
        }
        let mut r = DiagnosticsRecord::new("galerkin", t);
        r.set("energy", traj.energy[i]).set("grad_sq", traj.grad_sq[i]);
        if i > 0 {
            r.set("imbalance", traj.imbalance[i - 1])
                .set("dv_norm", traj.dv_norm[i - 1])
                .set("grad_dv_norm", traj.grad_dv_norm[i - 1]);
        }
        report.series.push(r);
    }

    let v_k = basis.reconstruct(&state)?;
    let residual = if v0.l2_norm() > 0.0 { v0.sub(&v_k).l2_norm() / v0.l2_norm() } else { 0.0 };
    let last = traj.last();
    let mut run = DiagnosticsRecord::new("run", last.time);
    run.set("k", basis.k() as f64)
        .set("projection_residual", residual)
        .set("max_imbalance", traj.max_imbalance())
        .set("max_dv_norm", traj.dv_norm.iter().fold(0.0, |m: f64, x| m.max(*x)))
        .set("max_grad_dv_norm", traj.grad_dv_norm.iter().fold(0.0, |m: f64, x| m.max(*x)))
        .check("quadratic_neutrality", traj.neutrality, 1e-9)
        .inform("energy_ledger", traj.max_imbalance(), 1e-8 * (1.0 + traj.energy[0]));
    if !driven {
        let rise = traj.energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        run.check("energy_monotone", rise.max(0.0), 0.0);
    }
    report.checks.push(run);
    let mut bc = basis.check()?;
    let (gram, div) = (bc.metric("gram_defect").unwrap(), bc.metric("max_div").unwrap());
    bc.check("orthonormal", gram, 1e-10).check("solenoidal", div, 1e-10);
    report.checks.push(bc);

    let mut u = basis.reconstruct(&last)?;
    if driven {
        u.axpy(1.0, &drive(last.time)?.z);
    }
    report.fields.extend(FieldDump::from_vector(&u, "u", last.time));
    Ok(report)
}
