use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    Jl,
    Sr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Route A: decomposed for JL, constructive for SR.
    Decomposed,
    Direct,
    Galerkin,
}

/// Initial-condition presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ic {
    /// Solenoidal vortex with no wall flux, of amplitude `amp`.
    Reduction,
    /// `v₀ = 0` plus the lift of an `eps`-sized divergence eigenmode.
    EigenmodeDiv,
    /// Vortex plus the eigenmode lift.
    Perturbed,
    /// Divergence-free field with `eps`-sized normal flux (SR only).
    NormalFlux,
    /// Seeded random field with zero wall faces, scaled to `amp`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Forcing {
    Zero,
    Manufactured,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($name:literal => $val:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($val),)+
                    _ => Err(Error::Config(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        s,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

keyword_enum!(System, "system", { "jl" => System::Jl, "sr" => System::Sr });
keyword_enum!(Route, "route", {
    "decomposed" => Route::Decomposed,
    "constructive" => Route::Decomposed,
    "direct" => Route::Direct,
    "galerkin" => Route::Galerkin,
});
keyword_enum!(Ic, "initial condition", {
    "reduction" => Ic::Reduction,
    "eigenmode_div" => Ic::EigenmodeDiv,
    "perturbed" => Ic::Perturbed,
    "normal_flux" => Ic::NormalFlux,
    "random" => Ic::Random,
});
keyword_enum!(Forcing, "forcing", { "zero" => Forcing::Zero, "manufactured" => Forcing::Manufactured });

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Jl => "jl",
            System::Sr => "sr",
        })
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Decomposed => "decomposed",
            Route::Direct => "direct",
            Route::Galerkin => "galerkin",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub system: System,
    pub route: Route,
    pub nu: f64,
    pub lambda: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub grid: usize,
    pub ic: Ic,
    /// Divergence or flux amplitude.
    pub eps: f64,
    /// Amplitude of the solenoidal part.
    pub amp: f64,
    /// Index of the divergence eigenmode.
    pub mode: usize,
    pub forcing: Forcing,
    pub seed: u64,
    /// Galerkin mode count.
    pub k: usize,
    /// Record every `every`-th step in the CSV.
    pub every: usize,
    /// Grids for the convergence study.
    pub grids: Vec<usize>,
    /// `dt / h` for the convergence study.
    pub courant: f64,
    pub out: Option<PathBuf>,
    /// Directory of a cached Galerkin basis written by `basis`.
    pub basis: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "system", "route", "nu", "lambda", "dt", "T", "grid", "ic", "eps", "amp", "mode", "forcing", "seed", "k",
    "every", "grids", "courant", "out", "basis",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
        }
        if v.is_empty() {
            return Err(Error::Config(format!("line {}: empty value for `{k}`", lineno + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }

    let required = |k: &str| -> Result<&String> {
        map.get(k)
            .ok_or_else(|| Error::Config(format!("missing required key `{k}`")))
    };
    fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::Config(format!("invalid value `{v}` for `{k}`")))
    }
    let opt = |k: &str| map.get(k).map(String::as_str);

    let system: System = required("system")?.parse()?;
    let lambda = match (system, opt("lambda")) {
        (System::Sr, None) => return Err(Error::Config("missing required key `lambda` for system = sr".into())),
        (_, Some(v)) => Some(num::<f64>("lambda", v)?),
        (System::Jl, None) => None,
    };
    let grids = match opt("grids") {
        Some(v) => v
            .split(',')
            .map(|s| num::<usize>("grids", s.trim()))
            .collect::<Result<Vec<_>>>()?,
        None => vec![16, 32, 64],
    };
    let cfg = Config {
        system,
        route: opt("route").unwrap_or("decomposed").parse()?,
        nu: num("nu", required("nu")?)?,
        lambda,
        dt: num("dt", required("dt")?)?,
        t_end: num("T", required("T")?)?,
        grid: num("grid", required("grid")?)?,
        ic: required("ic")?.parse()?,
        eps: opt("eps").map(|v| num("eps", v)).transpose()?.unwrap_or(1e-3),
        amp: opt("amp").map(|v| num("amp", v)).transpose()?.unwrap_or(1.0),
        mode: opt("mode").map(|v| num("mode", v)).transpose()?.unwrap_or(1),
        forcing: opt("forcing").unwrap_or("zero").parse()?,
        seed: opt("seed").map(|v| num("seed", v)).transpose()?.unwrap_or(0),
        k: opt("k").map(|v| num("k", v)).transpose()?.unwrap_or(8),
        every: opt("every").map(|v| num("every", v)).transpose()?.unwrap_or(1),
        grids,
        courant: opt("courant").map(|v| num("courant", v)).transpose()?.unwrap_or(0.1),
        out: opt("out").map(PathBuf::from),
        basis: opt("basis").map(PathBuf::from),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.system == System::Sr && !self.lambda.is_some_and(|l| l > 0.0 && l.is_finite()) {
            return bad(format!("lambda must be positive for system = sr, got {:?}", self.lambda));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad(format!("T must be at least dt, got T = {} and dt = {}", self.t_end, self.dt));
        }
        check_grid("grid", self.grid)?;
        for &g in &self.grids {
            check_grid("grids", g)?;
        }
        if self.mode == 0 {
            return bad("mode must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.every == 0 {
            return bad("every must be at least 1".into());
        }
        if !(self.courant > 0.0) || !self.courant.is_finite() {
            return bad(format!("courant must be positive, got {}", self.courant));
        }
        if !self.eps.is_finite() || !self.amp.is_finite() {
            return bad("eps and amp must be finite".into());
        }
        if self.ic == Ic::NormalFlux && self.system == System::Jl {
            return bad("ic = normal_flux needs system = sr; JL walls carry no normal flux".into());
        }
        if self.route == Route::Galerkin {
            if self.system != System::Jl {
                return bad("route = galerkin is only available for system = jl".into());
            }
            if self.ic == Ic::Random {
                return bad("route = galerkin needs a closed-form divergence history; ic = random has none".into());
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

fn check_grid(key: &str, n: usize) -> Result<()> {
    if !(8..=256).contains(&n) || !n.is_power_of_two() {
        return Err(Error::Config(format!("{key} must be a power of two in [8, 256], got {n}")));
    }
    Ok(())
}
