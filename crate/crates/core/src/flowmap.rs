//! Particle trajectories in the meridional plane and support geometry of the
//! transported density.

use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lp_norm, MeridionalGrid, Parity, ScalarField2D, VelocityField};
use crate::interp::Bicubic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub id: usize,
    pub r: f64,
    pub theta: f64,
    pub z: f64,
    pub escaped: bool,
}

impl Particle {
    pub fn new(id: usize, r: f64, theta: f64, z: f64) -> Self {
        Self { id, r, theta, z, escaped: false }
    }
}

/// Anything that can report `(v^r, v^z)` at a time and meridional point.
pub trait VelocitySource: Sync {
    fn sample(&self, t: f64, r: f64, z: f64) -> (f64, f64);
    /// Whether `(r, z)` lies in the region where the velocity is known.
    fn contains(&self, r: f64, z: f64) -> bool;
}

/// Closed-form velocity on a bounded meridional box.
pub struct AnalyticVelocity<F> {
    pub f: F,
    pub lr: f64,
    pub lz: f64,
}

impl<F: Fn(f64, f64, f64) -> (f64, f64) + Sync> VelocitySource for AnalyticVelocity<F> {
    fn sample(&self, t: f64, r: f64, z: f64) -> (f64, f64) {
        (self.f)(t, r, z)
    }

    fn contains(&self, r: f64, z: f64) -> bool {
        r <= self.lr && z.abs() <= self.lz
    }
}

/// Stored velocity snapshots, linearly interpolated in time and bicubically
/// in space. Times outside the stored range use the nearest snapshot.
#[derive(Debug, Clone, Default)]
pub struct VelocityHistory {
    frames: Vec<(f64, VelocityField)>,
}

impl VelocityHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frozen(v: VelocityField) -> Self {
        Self { frames: vec![(0.0, v)] }
    }

    /// Appends a snapshot. Times must increase strictly.
    pub fn push(&mut self, t: f64, v: VelocityField) -> Result<()> {
        if let Some((last, prev)) = self.frames.last() {
            if t <= *last {
                return Err(Error::InvalidInput(format!("snapshot time {t} is not after {last}")));
            }
            if prev.grid() != v.grid() {
                return Err(Error::InvalidInput("velocity snapshots on different grids".into()));
            }
        }
        self.frames.push((t, v));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.frames.first()?.0, self.frames.last()?.0))
    }

    fn sample_frame(v: &VelocityField, r: f64, z: f64) -> (f64, f64) {
        (Bicubic::new(&v.vr).sample(r, z), Bicubic::new(&v.vz).sample(r, z))
    }
}

impl VelocitySource for VelocityHistory {
    fn sample(&self, t: f64, r: f64, z: f64) -> (f64, f64) {
        let f = &self.frames;
        if f.len() == 1 || t <= f[0].0 {
            return Self::sample_frame(&f[0].1, r, z);
        }
        let k = f.partition_point(|(ft, _)| *ft <= t);
        if k >= f.len() {
            return Self::sample_frame(&f[f.len() - 1].1, r, z);
        }
        let (t0, v0) = (&f[k - 1].0, &f[k - 1].1);
        let (t1, v1) = (&f[k].0, &f[k].1);
        let th = (t - t0) / (t1 - t0);
        let a = Self::sample_frame(v0, r, z);
        let b = Self::sample_frame(v1, r, z);
        (a.0 + th * (b.0 - a.0), a.1 + th * (b.1 - a.1))
    }

    fn contains(&self, r: f64, z: f64) -> bool {
        match self.frames.first() {
            Some((_, v)) => {
                let g = v.grid();
                r <= g.lr() && z.abs() <= g.lz()
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdvanceReport {
    pub particles: Vec<Particle>,
    /// Number of times a particle was pushed back onto the axis.
    pub axis_clamps: usize,
    pub newly_escaped: usize,
}

/// RK4 integration of `(dr/dt, dz/dt) = (v^r, v^z)` from `t0` to `t1` with
/// steps no longer than `dt`. `t1 < t0` integrates backwards. Theta is never
/// written.
pub fn advance_particles<S: VelocitySource>(
    particles: &[Particle],
    source: &S,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<AdvanceReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("particle step dt = {dt} must be positive")));
    }
    let span = t1 - t0;
    let steps = if span == 0.0 { 0 } else { (span.abs() / dt).ceil().max(1.0) as usize };
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };

    let results: Vec<(Particle, usize, bool)> = particles
        .par_iter()
        .map(|p0| {
            let mut p = *p0;
            let mut clamps = 0;
            if p.escaped {
                return (p, 0, false);
            }
            for s in 0..steps {
                let t = t0 + s as f64 * h;
                let f = |tt: f64, r: f64, z: f64| source.sample(tt, r, z);
                let k1 = f(t, p.r, p.z);
                let k2 = f(t + 0.5 * h, p.r + 0.5 * h * k1.0, p.z + 0.5 * h * k1.1);
                let k3 = f(t + 0.5 * h, p.r + 0.5 * h * k2.0, p.z + 0.5 * h * k2.1);
                let k4 = f(t + h, p.r + h * k3.0, p.z + h * k3.1);
                let mut r = p.r + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                let z = p.z + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                if r < 0.0 {
                    r = 0.0;
                    clamps += 1;
                }
                if !source.contains(r, z) || !r.is_finite() || !z.is_finite() {
                    p.escaped = true;
                    return (p, clamps, true);
                }
                p.r = r;
                p.z = z;
            }
            (p, clamps, false)
        })
        .collect();

    let mut report = AdvanceReport { particles: Vec::with_capacity(results.len()), axis_clamps: 0, newly_escaped: 0 };
    for (p, c, esc) in results {
        if esc {
            warn!("particle {} left the domain near (r, z) = ({:.4}, {:.4})", p.id, p.r, p.z);
            report.newly_escaped += 1;
        }
        report.axis_clamps += c;
        report.particles.push(p);
    }
    if report.axis_clamps > 0 {
        warn!("{} axis crossings clamped during particle integration", report.axis_clamps);
    }
    Ok(report)
}

/// Determinant of the 3D flow-map Jacobian at `(r, z)` over `[t0, t1]`,
/// from a centred particle triad of half-width `eps`. The azimuthal stretch
/// contributes `r(t) / r`.
pub fn triad_jacobian<S: VelocitySource>(
    source: &S,
    r: f64,
    z: f64,
    eps: f64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<f64> {
    let seeds = [
        Particle::new(0, r, 0.0, z),
        Particle::new(1, r + eps, 0.0, z),
        Particle::new(2, r - eps, 0.0, z),
        Particle::new(3, r, 0.0, z + eps),
        Particle::new(4, r, 0.0, z - eps),
    ];
    let out = advance_particles(&seeds, source, t0, t1, dt)?.particles;
    if out.iter().any(|p| p.escaped) {
        return Err(Error::InvalidInput("triad left the domain".into()));
    }
    let drr = (out[1].r - out[2].r) / (2.0 * eps);
    let dzr = (out[1].z - out[2].z) / (2.0 * eps);
    let drz = (out[3].r - out[4].r) / (2.0 * eps);
    let dzz = (out[3].z - out[4].z) / (2.0 * eps);
    Ok((drr * dzz - drz * dzr) * out[0].r / r)
}

/// Time integral of a piecewise-linear series over `[s, t]`.
pub fn integrate_series(series: &[(f64, f64)], s: f64, t: f64) -> Result<f64> {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    let tol = 1e-12 * (1.0 + hi.abs());
    let covers = series.first().is_some_and(|f| f.0 <= lo + tol) && series.last().is_some_and(|l| l.0 >= hi - tol);
    if !covers || series.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidInput(format!("history does not cover [{lo}, {hi}]")));
    }
    let value = |a: &(f64, f64), b: &(f64, f64), x: f64| {
        if b.0 == a.0 {
            a.1
        } else {
            a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
        }
    };
    let mut acc = 0.0;
    for w in series.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let x0 = a.0.max(lo);
        let x1 = b.0.min(hi);
        if x1 > x0 {
            acc += 0.5 * (value(a, b, x0) + value(a, b, x1)) * (x1 - x0);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisBounds {
    pub lhs: f64,
    pub observed: f64,
    pub rhs: f64,
}

impl AxisBounds {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs * (1.0 - tol) <= self.observed && self.observed <= self.rhs * (1.0 + tol)
    }
}

/// Exponential envelope `r(x) e^(-+ I)` with `I` the time integral of
/// `||v^r / r||_inf` between the start and end of the trajectory.
pub fn axis_distance_bounds_check(
    trajectory: &[(f64, Particle)],
    vr_over_r_history: &[(f64, f64)],
) -> Result<AxisBounds> {
    let (first, last) = match (trajectory.first(), trajectory.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidInput("empty trajectory".into())),
    };
    let i = integrate_series(vr_over_r_history, first.0, last.0)?.abs();
    let r0 = first.1.r;
    Ok(AxisBounds { lhs: r0 * (-i).exp(), observed: last.1.r, rhs: r0 * i.exp() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportMetrics {
    pub dist_to_axis: f64,
    pub z_diameter: f64,
    pub threshold: f64,
    pub empty: bool,
}

/// Support is `{|rho| > threshold}`. The distance to the axis is
/// `min r - dr` and the projected diameter is `max z - min z + 2 dz`, so both
/// bracket the exact support of the sampled profile.
pub fn support_metrics(rho: &ScalarField2D, threshold: f64) -> Result<SupportMetrics> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("support threshold {threshold} must be positive")));
    }
    let g = rho.grid();
    let (mut rmin, mut zmin, mut zmax) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..g.nr() {
        for (j, v) in rho.row(i).iter().enumerate() {
            if v.abs() > threshold {
                rmin = rmin.min(g.r(i));
                zmin = zmin.min(g.z(j));
                zmax = zmax.max(g.z(j));
            }
        }
    }
    if rmin.is_infinite() {
        return Ok(SupportMetrics { dist_to_axis: f64::INFINITY, z_diameter: 0.0, threshold, empty: true });
    }
    Ok(SupportMetrics {
        dist_to_axis: (rmin - g.dr()).max(0.0),
        z_diameter: zmax - zmin + 2.0 * g.dz(),
        threshold,
        empty: false,
    })
}

/// `||rho / r||_2^2` for a density vanishing on the axis. Returns `None`
/// when the density touches the axis row.
pub fn rho_over_r_sq(rho: &ScalarField2D) -> Result<Option<f64>> {
    if rho.parity() != Parity::Even {
        return Err(Error::InvalidParity("density must be even".into()));
    }
    if rho.row(0).iter().any(|&v| v != 0.0) {
        return Ok(None);
    }
    let g = *rho.grid();
    let q = ScalarField2D::from_raw(
        g,
        (0..g.len())
            .map(|k| {
                let r = g.r(k / g.nz());
                if r == 0.0 {
                    0.0
                } else {
                    rho.values()[k] / r
                }
            })
            .collect(),
        Parity::Even,
    );
    Ok(Some(lp_norm(&q, 2.0)?.powi(2)))
}

/// Inputs of the quadratic bound on `||rho / r||_2^2` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoOverRInputs {
    pub rho0_l2: f64,
    pub rho0_linf: f64,
    pub r0: f64,
    pub d0: f64,
    pub int_vr_over_r: f64,
    pub int_v_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoOverRCheck {
    Checked { lhs: f64, rhs: f64 },
    /// Support came within two cells of the axis.
    Suspended,
}

pub fn rho_over_r_rhs(p: &RhoOverRInputs) -> f64 {
    p.rho0_l2.powi(2) / (p.r0 * p.r0)
        + 2.0 * std::f64::consts::PI * p.rho0_linf.powi(2) * p.int_vr_over_r * (p.d0 + 2.0 * p.int_v_inf)
}

/// Evaluates the bound on each `(lhs, dist_to_axis, inputs)` entry.
pub fn rho_over_r_bound_check(grid: &MeridionalGrid, series: &[(f64, f64, RhoOverRInputs)]) -> Vec<RhoOverRCheck> {
    series
        .iter()
        .map(|(lhs, dist, p)| {
            if *dist < 2.0 * grid.dr() || p.r0 < 2.0 * grid.dr() {
                RhoOverRCheck::Suspended
            } else {
                RhoOverRCheck::Checked { lhs: *lhs, rhs: rho_over_r_rhs(p) }
            }
        })
        .collect()
}

/// Particle CSV with columns `t,id,r,theta,z,escaped`.
pub fn write_particles_csv<W: Write>(w: W, rows: &[(f64, Particle)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "id", "r", "theta", "z", "escaped"])?;
    for (t, p) in rows {
        out.write_record(&[
            t.to_string(),
            p.id.to_string(),
            p.r.to_string(),
            p.theta.to_string(),
            p.z.to_string(),
            (p.escaped as u8).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_particles_csv<R: std::io::Read>(r: R) -> Result<Vec<(f64, Particle)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad particle field {k}")))
        };
        out.push((
            f(0)?,
            Particle { id: f(1)? as usize, r: f(2)?, theta: f(3)?, z: f(4)?, escaped: f(5)? != 0.0 },
        ));
    }
    Ok(out)
}
