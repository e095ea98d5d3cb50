//! Run configuration: a flat `section.key = value` format.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! section.key = value   # trailing comment
//! ```
//!
//! Keys have exactly one dot. Unknown keys are errors. [`RunConfig::canonical`]
//! prints every key, defaults included, in a fixed order; parsing that text
//! gives back the same configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::diagnostics::Tolerances;
use crate::error::{Error, Result};
use crate::evolution::{Dynamics, Scheme, StepControl};
use crate::grid::{MeridionalGrid, Parity, ScalarField2D};
use crate::initdata::{annular_density, annulus_peak_factor, gaussian_vortex_ring, mollify, scale_to_l2, RingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nr: usize,
    pub nz: usize,
    pub lr: f64,
    pub lz: f64,
}

/// How a generator's amplitude is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Direct(f64),
    /// Vortex: cylindrical L2 norm of the vorticity.
    L2Norm(f64),
    /// Density: peak value.
    Peak(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexSpec {
    pub amplitude: Amplitude,
    pub r0: f64,
    pub z0: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    pub amplitude: Amplitude,
    pub r1: f64,
    pub r2: f64,
    pub z0: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSeed {
    pub r: f64,
    pub z: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub vortex: Option<VortexSpec>,
    pub density: Option<DensitySpec>,
    pub mollify: Option<usize>,
    pub step: StepControl,
    pub t_end: f64,
    pub record_interval: f64,
    pub snapshot_interval: f64,
    /// Support threshold relative to the initial density sup norm.
    pub support_threshold: f64,
    /// Reserved. Nothing is random.
    pub seed: u64,
    pub particles: Vec<ParticleSeed>,
    pub output_dir: String,
    pub tol: Tolerances,
    /// Box resolution for velocity Besov norms at snapshot times; 0 disables.
    pub besov_n: usize,
}

const KEYS: &[&str] = &[
    "grid.nr",
    "grid.nz",
    "grid.lr",
    "grid.lz",
    "vortex.amplitude",
    "vortex.l2_norm",
    "vortex.r0",
    "vortex.z0",
    "vortex.sigma",
    "density.amplitude",
    "density.peak",
    "density.r1",
    "density.r2",
    "density.z0",
    "density.h",
    "initial.mollify",
    "step.cfl_advect",
    "step.cfl_diffuse",
    "step.dt_max",
    "step.scheme",
    "step.dynamics",
    "run.t_end",
    "run.record_interval",
    "run.snapshot_interval",
    "run.support_threshold",
    "run.seed",
    "particles.seeds",
    "output.dir",
    "check.rho_l2",
    "check.v_l2",
    "check.energy",
    "check.gamma_l2",
    "check.support",
    "check.rho_over_r",
    "check.gamma_monotone",
    "check.axis_envelope",
    "besov.n",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::ConfigSyntax {
                line: *line,
                msg: format!("cannot parse value {v:?} for {key}"),
            }),
        }
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?.ok_or_else(|| Error::ConfigValidation(format!("{key} missing")))
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }
}

fn lex(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::ConfigSyntax { line, msg: "expected `section.key = value`".into() })?;
        let (key, value) = (key.trim(), value.trim());
        if key.matches('.').count() != 1 || key.starts_with('.') || key.ends_with('.') {
            return Err(Error::ConfigSyntax { line, msg: format!("key {key:?} must have the form section.key") });
        }
        if !KEYS.contains(&key) {
            return Err(Error::ConfigSyntax { line, msg: format!("unknown key {key:?}") });
        }
        if value.is_empty() {
            return Err(Error::ConfigSyntax { line, msg: format!("empty value for {key}") });
        }
        if map.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(Error::ConfigSyntax { line, msg: format!("duplicate key {key}") });
        }
    }
    Ok(Entries { map })
}

fn parse_seeds(e: &Entries) -> Result<Vec<ParticleSeed>> {
    let Some((line, v)) = e.raw("particles.seeds") else {
        return Ok(Vec::new());
    };
    if v == "none" {
        return Ok(Vec::new());
    }
    v.split(';')
        .map(|s| {
            let nums: Vec<f64> = s
                .split_whitespace()
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::ConfigSyntax { line: *line, msg: format!("bad particle seed {s:?}") })?;
            match nums[..] {
                [r, z] => Ok(ParticleSeed { r, z, theta: 0.0 }),
                [r, z, theta] => Ok(ParticleSeed { r, z, theta }),
                _ => Err(Error::ConfigSyntax { line: *line, msg: format!("particle seed {s:?} needs `r z [theta]`") }),
            }
        })
        .collect()
}

fn amplitude(e: &Entries, direct: &str, other: &str, wrap: fn(f64) -> Amplitude) -> Result<Amplitude> {
    match (e.parse::<f64>(direct)?, e.parse::<f64>(other)?) {
        (Some(_), Some(_)) => Err(Error::ConfigValidation(format!("give only one of {direct} and {other}"))),
        (Some(a), None) => Ok(Amplitude::Direct(a)),
        (None, Some(b)) => Ok(wrap(b)),
        (None, None) => Err(Error::ConfigValidation(format!("{direct} or {other} missing"))),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = lex(text)?;
    let grid = GridSpec {
        nr: e.required("grid.nr")?,
        nz: e.required("grid.nz")?,
        lr: e.required("grid.lr")?,
        lz: e.required("grid.lz")?,
    };
    let section = |s: &str| KEYS.iter().any(|k| k.starts_with(s) && e.has(k));
    let vortex = if section("vortex.") {
        Some(VortexSpec {
            amplitude: amplitude(&e, "vortex.amplitude", "vortex.l2_norm", Amplitude::L2Norm)?,
            r0: e.required("vortex.r0")?,
            z0: e.required("vortex.z0")?,
            sigma: e.required("vortex.sigma")?,
        })
    } else {
        None
    };
    let density = if section("density.") {
        Some(DensitySpec {
            amplitude: amplitude(&e, "density.amplitude", "density.peak", Amplitude::Peak)?,
            r1: e.required("density.r1")?,
            r2: e.required("density.r2")?,
            z0: e.required("density.z0")?,
            h: e.required("density.h")?,
        })
    } else {
        None
    };
    let mollify = match e.raw("initial.mollify") {
        Some((_, v)) if v == "none" => None,
        _ => e.parse("initial.mollify")?,
    };
    let d = StepControl::default();
    let scheme = match e.or("step.scheme", "imex".to_string())?.as_str() {
        "imex" => Scheme::Imex,
        "explicit" => Scheme::FullyExplicit,
        s => return Err(Error::ConfigValidation(format!("step.scheme must be imex or explicit, got {s}"))),
    };
    let dynamics = match e.or("step.dynamics", "coupled".to_string())?.as_str() {
        "coupled" => Dynamics::Coupled,
        "frozen" => Dynamics::FrozenFlow,
        s => return Err(Error::ConfigValidation(format!("step.dynamics must be coupled or frozen, got {s}"))),
    };
    let step = StepControl {
        cfl_advect: e.or("step.cfl_advect", d.cfl_advect)?,
        cfl_diffuse: e.or("step.cfl_diffuse", d.cfl_diffuse)?,
        dt_max: e.or("step.dt_max", d.dt_max)?,
        scheme,
        dynamics,
    };
    let t = Tolerances::default();
    let tol = Tolerances {
        rho_l2: e.or("check.rho_l2", t.rho_l2)?,
        v_l2: e.or("check.v_l2", t.v_l2)?,
        energy: e.or("check.energy", t.energy)?,
        gamma_l2: e.or("check.gamma_l2", t.gamma_l2)?,
        support: e.or("check.support", t.support)?,
        rho_over_r: e.or("check.rho_over_r", t.rho_over_r)?,
        gamma_monotone: e.or("check.gamma_monotone", t.gamma_monotone)?,
        axis_envelope: e.or("check.axis_envelope", t.axis_envelope)?,
    };
    let t_end: f64 = e.required("run.t_end")?;
    let cfg = RunConfig {
        grid,
        vortex,
        density,
        mollify,
        step,
        t_end,
        record_interval: e.or("run.record_interval", 0.05)?,
        snapshot_interval: e.or("run.snapshot_interval", 0.5)?,
        support_threshold: e.or("run.support_threshold", 1e-8)?,
        seed: e.or("run.seed", 0)?,
        particles: parse_seeds(&e)?,
        output_dir: e.or("output.dir", "out".to_string())?,
        tol,
        besov_n: e.or("besov.n", 0)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigValidation(msg.into())
}

impl RunConfig {
    pub fn grid(&self) -> Result<MeridionalGrid> {
        MeridionalGrid::new(self.grid.nr, self.grid.nz, self.grid.lr, self.grid.lz)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid().map_err(|e| invalid(format!("grid: {e}")))?;
        let (dr, lr, lz) = (g.dr(), g.lr(), g.lz());
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("run.t_end must be >= 0"));
        }
        for (k, v) in [("run.record_interval", self.record_interval), ("run.snapshot_interval", self.snapshot_interval)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{k} must be > 0")));
            }
        }
        if !(self.support_threshold > 0.0) {
            return Err(invalid("run.support_threshold must be > 0"));
        }
        self.step.validate().map_err(|e| invalid(format!("step: {e}")))?;
        if let Some(d) = &self.density {
            if !(d.r1 > 0.0) {
                return Err(invalid(
                    "density.r1 must be > 0: the axis-clearance hypothesis requires supp rho_0 to stay off the symmetry axis",
                ));
            }
            if d.r1 < 5.0 * dr {
                return Err(invalid(format!("density.r1 = {} must start at least 4 cells beyond the axis-adjacent row (>= {})", d.r1, 5.0 * dr)));
            }
            if !(d.r2 > d.r1) || !(d.h > 0.0) {
                return Err(invalid("density needs r1 < r2 and h > 0"));
            }
            if d.r2 > 0.75 * lr || d.z0.abs() + d.h > 0.75 * lz {
                return Err(invalid("density support must stay at least a quarter of the domain away from the outer boundary"));
            }
            if let Amplitude::Peak(p) | Amplitude::Direct(p) = d.amplitude {
                if !p.is_finite() {
                    return Err(invalid("density amplitude must be finite"));
                }
            }
        }
        if let Some(v) = &self.vortex {
            if !(v.r0 > 0.0) || !(v.sigma > 0.0) {
                return Err(invalid("vortex needs r0 > 0 and sigma > 0"));
            }
            if v.r0 + 4.0 * v.sigma > 0.75 * lr || v.z0.abs() + 4.0 * v.sigma > 0.75 * lz {
                return Err(invalid("vortex core (4 sigma) must stay a quarter of the domain away from the outer boundary"));
            }
            if let Amplitude::L2Norm(n) = v.amplitude {
                if !(n >= 0.0 && n.is_finite()) {
                    return Err(invalid("vortex.l2_norm must be >= 0"));
                }
            }
        }
        if let Some(n) = self.mollify {
            if n == 0 || 1.0 / (n as f64) < 2.0 * g.dr().max(g.dz()) {
                return Err(invalid(format!("initial.mollify = {n}: radius 1/n must be at least two cells")));
            }
        }
        for p in &self.particles {
            if !(p.r >= 0.0 && p.r < lr && p.z.abs() < lz) {
                return Err(invalid(format!("particle seed ({}, {}) lies outside the domain", p.r, p.z)));
            }
        }
        if self.besov_n != 0 && !self.besov_n.is_power_of_two() {
            return Err(invalid("besov.n must be 0 or a power of two"));
        }
        Ok(())
    }

    /// Initial `(omega_theta, rho)`.
    pub fn initial_fields(&self) -> Result<(ScalarField2D, ScalarField2D)> {
        let g = self.grid()?;
        let mut omega = match &self.vortex {
            None => ScalarField2D::zeros(g, Parity::Odd),
            Some(v) => {
                let a = match v.amplitude {
                    Amplitude::Direct(a) => a,
                    _ => 1.0,
                };
                let w = gaussian_vortex_ring(&RingParams::gaussian(a, v.r0, v.z0, v.sigma)?, g)?;
                match v.amplitude {
                    Amplitude::L2Norm(n) if n == 0.0 => ScalarField2D::zeros(g, Parity::Odd),
                    Amplitude::L2Norm(n) => scale_to_l2(&w, n)?,
                    _ => w,
                }
            }
        };
        let mut rho = match &self.density {
            None => ScalarField2D::zeros(g, Parity::Even),
            Some(d) => {
                let a = match d.amplitude {
                    Amplitude::Peak(p) => p / annulus_peak_factor(),
                    Amplitude::Direct(a) | Amplitude::L2Norm(a) => a,
                };
                annular_density(&RingParams::annulus(a, d.r1, d.r2, d.z0, d.h)?, g)?
            }
        };
        if let Some(n) = self.mollify {
            omega = mollify(&omega, n)?;
            rho = mollify(&rho, n)?;
        }
        Ok((omega, rho))
    }

    /// Absolute support threshold for a given initial density.
    pub fn support_threshold(&self, rho0: &ScalarField2D) -> f64 {
        let m = rho0.max_abs();
        if m > 0.0 {
            self.support_threshold * m
        } else {
            self.support_threshold
        }
    }

    /// Every key in a fixed order, one per line.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("grid.nr", self.grid.nr.to_string());
        kv("grid.nz", self.grid.nz.to_string());
        kv("grid.lr", self.grid.lr.to_string());
        kv("grid.lz", self.grid.lz.to_string());
        if let Some(v) = &self.vortex {
            match v.amplitude {
                Amplitude::L2Norm(n) => kv("vortex.l2_norm", n.to_string()),
                Amplitude::Direct(a) | Amplitude::Peak(a) => kv("vortex.amplitude", a.to_string()),
            }
            kv("vortex.r0", v.r0.to_string());
            kv("vortex.z0", v.z0.to_string());
            kv("vortex.sigma", v.sigma.to_string());
        }
        if let Some(d) = &self.density {
            match d.amplitude {
                Amplitude::Peak(p) => kv("density.peak", p.to_string()),
                Amplitude::Direct(a) | Amplitude::L2Norm(a) => kv("density.amplitude", a.to_string()),
            }
            kv("density.r1", d.r1.to_string());
            kv("density.r2", d.r2.to_string());
            kv("density.z0", d.z0.to_string());
            kv("density.h", d.h.to_string());
        }
        kv("initial.mollify", self.mollify.map_or("none".into(), |n| n.to_string()));
        kv("step.cfl_advect", self.step.cfl_advect.to_string());
        kv("step.cfl_diffuse", self.step.cfl_diffuse.to_string());
        kv("step.dt_max", self.step.dt_max.to_string());
        kv("step.scheme", match self.step.scheme {
            Scheme::Imex => "imex".into(),
            Scheme::FullyExplicit => "explicit".into(),
        });
        kv("step.dynamics", match self.step.dynamics {
            Dynamics::Coupled => "coupled".into(),
            Dynamics::FrozenFlow => "frozen".into(),
        });
        kv("run.t_end", self.t_end.to_string());
        kv("run.record_interval", self.record_interval.to_string());
        kv("run.snapshot_interval", self.snapshot_interval.to_string());
        kv("run.support_threshold", self.support_threshold.to_string());
        kv("run.seed", self.seed.to_string());
        let seeds = if self.particles.is_empty() {
            "none".to_string()
        } else {
            self.particles.iter().map(|p| format!("{} {} {}", p.r, p.z, p.theta)).collect::<Vec<_>>().join("; ")
        };
        kv("particles.seeds", seeds);
        kv("output.dir", self.output_dir.clone());
        let t = &self.tol;
        kv("check.rho_l2", t.rho_l2.to_string());
        kv("check.v_l2", t.v_l2.to_string());
        kv("check.energy", t.energy.to_string());
        kv("check.gamma_l2", t.gamma_l2.to_string());
        kv("check.support", t.support.to_string());
        kv("check.rho_over_r", t.rho_over_r.to_string());
        kv("check.gamma_monotone", t.gamma_monotone.to_string());
        kv("check.axis_envelope", t.axis_envelope.to_string());
        kv("besov.n", self.besov_n.to_string());
        s
    }
}
