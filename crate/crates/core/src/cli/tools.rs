use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use super::config::{Config, Ic, System};
use super::io::FieldDump;
use super::report::Report;
use super::scenario::{divergence_mode, initial_velocity};
use crate::diagnostics::{fit_decay_rate, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::galerkin::{build_basis, GalerkinBasis};
use crate::grid::{divergence, Grid, ScalarBc, VectorField};
use crate::heat::{check_heat_estimates, DivergenceState, HeatStepper};
use crate::lift::{lifting_constant, Decomposition, Lifter};

/// Window of the decay-rate fit.
pub const DECAY_FIT_T: f64 = 0.2;

const LAMBDAS_FILE: &str = "lambdas.txt";

fn mode_name(j: usize) -> String {
    format!("mode{j:03}")
}

/// Writes `lambdas.txt` (grid size on the first line, then one eigenvalue
/// per line) and two dumps per mode.
pub fn save_basis(basis: &GalerkinBasis, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = format!("{}\n", basis.grid().n());
    for l in basis.lambdas() {
        text.push_str(&format!("{l}\n"));
    }
    fs::write(dir.join(LAMBDAS_FILE), text)?;
    for (j, w) in basis.modes().iter().enumerate() {
        for d in FieldDump::from_vector(w, &mode_name(j), 0.0) {
            d.write(&dir.join(format!("{}.ensf", d.kind)))?;
        }
    }
    Ok(())
}

/// Reads the first `k` modes of a cache written by [`save_basis`].
pub fn load_basis(dir: &Path, grid: Grid, k: usize) -> Result<GalerkinBasis> {
    let text = fs::read_to_string(dir.join(LAMBDAS_FILE))?;
    let bad = |m: String| Error::Format(format!("{}: {m}", dir.display()));
    let mut lines = text.lines();
    let n: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| bad("missing grid size".into()))?;
    if n != grid.n() {
        return Err(bad(format!("basis built for n = {n}, run uses n = {}", grid.n())));
    }
    let lambdas: Vec<f64> = lines
        .map(|l| l.trim().parse().map_err(|_| bad(format!("bad eigenvalue `{l}`"))))
        .collect::<Result<_>>()?;
    if k > lambdas.len() {
        return Err(bad(format!("cache holds {} modes, {k} requested", lambdas.len())));
    }
    let mut modes = Vec::with_capacity(k);
    for j in 0..k {
        let name = mode_name(j);
        let u = FieldDump::read(&dir.join(format!("{name}_u.ensf")))?;
        let v = FieldDump::read(&dir.join(format!("{name}_v.ensf")))?;
        modes.push(VectorField::from_components(grid, u.values, v.values)?);
    }
    GalerkinBasis::from_parts(grid, lambdas[..k].to_vec(), modes)
}

pub fn basis(cfg: &Config, dir: &Path) -> Result<Report> {
    let grid = Grid::new(cfg.grid)?;
    let b = build_basis(grid, cfg.k)?;
    save_basis(&b, dir)?;
    let mut report = Report::new(format!("basis grid={} k={}", cfg.grid, cfg.k));
    let mut rec = b.check()?;
    for (j, l) in b.lambdas().iter().enumerate() {
        rec.set(format!("lambda_{:03}", j + 1), *l);
    }
    let gram = rec.metric("gram_defect").unwrap();
    let div = rec.metric("max_div").unwrap();
    rec.check("orthonormal", gram, 1e-10).check("solenoidal", div, 1e-10);
    report.checks.push(rec);
    Ok(report)
}

/// Heat oracle alone: steps the divergence of the preset and fits its decay.
pub fn heat(cfg: &Config) -> Result<Report> {
    let grid = Grid::new(cfg.grid)?;
    let bc = match cfg.system {
        System::Jl => ScalarBc::Neumann,
        System::Sr => ScalarBc::Dirichlet,
    };
    let g0 = match cfg.ic {
        Ic::EigenmodeDiv | Ic::Perturbed => divergence_mode(grid, cfg.system, cfg.mode, cfg.eps),
        _ => divergence(&initial_velocity(cfg, &Lifter::new(grid))?),
    };
    let stepper = HeatStepper::new(grid, bc);
    let mut s = DivergenceState::new(g0, bc, cfg.nu)?;
    let keep = grid.n() <= 128;
    let mut hist = vec![s.clone()];
    let mut report = Report::new(format!(
        "heat system={} grid={} nu={} dt={} T={}",
        cfg.system, cfg.grid, cfg.nu, cfg.dt, cfg.t_end
    ));
    let row = |s: &DivergenceState| {
        DiagnosticsRecord::new("heat", s.time)
            .with("g_l2", s.g.l2_norm())
            .with("mass", s.mass())
    };
    let mut fit = vec![(0.0, s.g.l2_norm())];
    report.series.push(row(&s));
    let steps = cfg.steps();
    for k in 1..=steps {
        s = stepper.step(&s, cfg.dt)?;
        if s.time <= DECAY_FIT_T * (1.0 + 1e-12) {
            fit.push((s.time, s.g.l2_norm()));
        }
        if keep {
            hist.push(s.clone());
        }
        if k % cfg.every == 0 || k == steps {
            report.series.push(row(&s));
        }
    }

    let mut rec = DiagnosticsRecord::new("decay", s.time);
    if fit.len() >= 10 && fit.iter().all(|p| p.1 > 0.0) {
        let rate = -fit_decay_rate(&fit)?;
        rec.set("rate", rate);
        if cfg.ic == Ic::EigenmodeDiv {
            let m = cfg.mode as f64;
            let expected = 2.0 * m * m * PI * PI * cfg.nu;
            let rel = (rate - expected).abs() / expected;
            rec.set("expected_rate", expected)
                .set("relative_error", rel)
                .check("decay_rate", rel, 0.01);
        }
    }
    rec.set("final_g_l2", s.g.l2_norm()).set("final_mass", s.mass());
    report.checks.push(rec);
    if keep {
        report.checks.push(check_heat_estimates(&hist)?);
    }
    report.fields.push(FieldDump::from_scalar(&s.g, "g", s.time));
    Ok(report)
}

/// One-shot `u = v + z` of the preset, with the wall flux carried by `z`.
pub fn decompose(cfg: &Config) -> Result<Report> {
    let grid = Grid::new(cfg.grid)?;
    let lifter = Lifter::new(grid);
    let u = initial_velocity(cfg, &lifter)?;
    let g = divergence(&u);
    let lift = lifter.lift_with_boundary(&g, &u.normal_trace())?;
    let dec = Decomposition {
        v: u.sub(&lift.z),
        z: lift.z,
        q: lift.q,
    };
    let div_v = divergence(&dec.v).l2_norm();
    let orth = dec.orthogonality_residual();
    let mut rec = DiagnosticsRecord::new("decompose", 0.0);
    rec.set("u_l2", u.l2_norm())
        .set("g_l2", g.l2_norm())
        .set("v_l2", dec.v.l2_norm())
        .set("z_l2", dec.z.l2_norm())
        .set("v_wall", dec.v.boundary_max_abs())
        .set("div_v", div_v)
        .set("lifting_constant", lifting_constant(&dec.z, &g))
        .check("orthogonality", orth, 1e-9)
        .check("div_v", div_v, 1e-9 * g.l2_norm().max(1.0));
    let mut report = Report::new(format!("decompose system={} grid={} ic={:?}", cfg.system, cfg.grid, cfg.ic));
    report.checks.push(rec);
    if cfg.system == System::Jl && g.l2_norm() > 0.0 {
        report.checks.push(lifter.check_weak_lifting_bound(&g)?);
    }
    report.fields.extend(FieldDump::from_vector(&dec.v, "v", 0.0));
    report.fields.extend(FieldDump::from_vector(&dec.z, "z", 0.0));
    report.fields.push(FieldDump::from_scalar(&dec.q, "q", 0.0));
    Ok(report)
}
