//! Monitored norms and the ledger of estimate checks.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::elliptic::vr_over_r;
use crate::error::{Error, Result};
use crate::evolution::FlowState;
use crate::flowmap::{axis_distance_bounds_check, rho_over_r_sq, support_metrics, Particle, SupportMetrics};
use crate::grid::{axis_quotient_unchecked, azimuthal_vector_h1, h1_seminorm, lp_norm, Parity, ScalarField2D};

/// One time slice of every monitored quantity. Column names in the CSV are
/// the field names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub v_l2: f64,
    pub grad_v_l2: f64,
    pub v_linf: f64,
    pub rho_l2: f64,
    pub rho_linf: f64,
    pub omega_l2: f64,
    pub omega_h1: f64,
    pub gamma_l2: f64,
    pub gamma_linf: f64,
    pub gamma_h1: f64,
    pub vr_over_r_linf: f64,
    pub rho_over_r_l2: f64,
    pub support_dist_to_axis: f64,
    pub support_z_diameter: f64,
    pub support_threshold: f64,
    pub support_empty: bool,
    pub int_vr_over_r_linf: f64,
    pub int_v_linf: f64,
    pub int_grad_v_l2_sq: f64,
    pub int_rho_over_r_l2_sq: f64,
    pub int_gamma_h1_sq: f64,
}

impl DiagnosticsRecord {
    pub fn support(&self) -> SupportMetrics {
        SupportMetrics {
            dist_to_axis: self.support_dist_to_axis,
            z_diameter: self.support_z_diameter,
            threshold: self.support_threshold,
            empty: self.support_empty,
        }
    }

    /// `(||v||^2 + ||grad v||^2)^(1/2)`.
    pub fn v_h1(&self) -> f64 {
        self.v_l2.hypot(self.grad_v_l2)
    }
}

/// Time-integrated quantities of the ledger, sampled pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integrands {
    pub vr_over_r_linf: f64,
    pub v_linf: f64,
    pub grad_v_l2_sq: f64,
    pub rho_over_r_l2_sq: f64,
    pub gamma_h1_sq: f64,
}

/// Running trapezoid sums of [`Integrands`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningIntegrals {
    pub t: f64,
    pub last: Integrands,
    pub int_vr_over_r_linf: f64,
    pub int_v_linf: f64,
    pub int_grad_v_l2_sq: f64,
    pub int_rho_over_r_l2_sq: f64,
    pub int_gamma_h1_sq: f64,
}

impl RunningIntegrals {
    pub fn start(t: f64, at: Integrands) -> Self {
        Self { t, last: at, ..Default::default() }
    }

    /// Adds the panel `[self.t, t]`.
    pub fn advance(&mut self, t: f64, now: Integrands) -> Result<()> {
        if t < self.t {
            return Err(Error::InvalidInput("integration time goes backwards".into()));
        }
        let h = 0.5 * (t - self.t);
        let a = self.last;
        self.int_vr_over_r_linf += h * (a.vr_over_r_linf + now.vr_over_r_linf);
        self.int_v_linf += h * (a.v_linf + now.v_linf);
        self.int_grad_v_l2_sq += h * (a.grad_v_l2_sq + now.grad_v_l2_sq);
        self.int_rho_over_r_l2_sq += h * (a.rho_over_r_l2_sq + now.rho_over_r_l2_sq);
        self.int_gamma_h1_sq += h * (a.gamma_h1_sq + now.gamma_h1_sq);
        self.t = t;
        self.last = now;
        Ok(())
    }
}

fn rho_over_r_sq_off_axis(rho: &ScalarField2D) -> Result<f64> {
    Ok(match rho_over_r_sq(rho)? {
        Some(v) => v,
        // Density reached the axis row; drop that row from the quotient.
        None => {
            let mut s = rho.clone();
            s.values_mut()[..rho.grid().nz()].iter_mut().for_each(|x| *x = 0.0);
            rho_over_r_sq(&s)?.unwrap_or(0.0)
        }
    })
}

pub fn integrands(state: &FlowState) -> Result<Integrands> {
    let v = &state.velocity;
    let vr_r = vr_over_r(v);
    let gamma = axis_quotient_unchecked(&state.omega_theta);
    Ok(Integrands {
        vr_over_r_linf: vr_r.max_abs(),
        v_linf: v.max_speed(),
        grad_v_l2_sq: h1_seminorm(&v.vr).powi(2) + lp_norm(&vr_r, 2.0)?.powi(2) + h1_seminorm(&v.vz).powi(2),
        rho_over_r_l2_sq: rho_over_r_sq_off_axis(&state.rho)?,
        gamma_h1_sq: h1_seminorm(&gamma).powi(2),
    })
}

/// Evaluates every norm of `state`. Cumulative integrals extend those of
/// `prev` by one trapezoid panel; runs that sample more often than they
/// record should use [`record_with`].
pub fn record(state: &FlowState, prev: Option<&DiagnosticsRecord>, threshold: f64) -> Result<DiagnosticsRecord> {
    if let Some(p) = prev {
        if state.t < p.t {
            return Err(Error::InvalidInput("record time goes backwards".into()));
        }
    }
    let now = integrands(state)?;
    let acc = match prev {
        Some(p) => {
            let mut acc = RunningIntegrals {
                t: p.t,
                last: Integrands {
                    vr_over_r_linf: p.vr_over_r_linf,
                    v_linf: p.v_linf,
                    grad_v_l2_sq: p.grad_v_l2 * p.grad_v_l2,
                    rho_over_r_l2_sq: p.rho_over_r_l2 * p.rho_over_r_l2,
                    gamma_h1_sq: p.gamma_h1 * p.gamma_h1,
                },
                int_vr_over_r_linf: p.int_vr_over_r_linf,
                int_v_linf: p.int_v_linf,
                int_grad_v_l2_sq: p.int_grad_v_l2_sq,
                int_rho_over_r_l2_sq: p.int_rho_over_r_l2_sq,
                int_gamma_h1_sq: p.int_gamma_h1_sq,
            };
            acc.advance(state.t, now)?;
            acc
        }
        None => RunningIntegrals::start(state.t, now),
    };
    record_with(state, &acc, threshold)
}

/// Like [`record`], with the cumulative integrals taken from `acc`, which
/// must already include the panel ending at `state.t`.
pub fn record_with(state: &FlowState, acc: &RunningIntegrals, threshold: f64) -> Result<DiagnosticsRecord> {
    if acc.t != state.t {
        return Err(Error::InvalidInput(format!("integrals end at t = {}, state is at t = {}", acc.t, state.t)));
    }
    let v = &state.velocity;
    let now = acc.last;
    let gamma = axis_quotient_unchecked(&state.omega_theta);
    let vr_l2 = lp_norm(&v.vr, 2.0)?;
    let vz_l2 = lp_norm(&v.vz, 2.0)?;
    let sup = support_metrics(&state.rho, threshold)?;

    Ok(DiagnosticsRecord {
        t: state.t,
        v_l2: vr_l2.hypot(vz_l2),
        grad_v_l2: now.grad_v_l2_sq.sqrt(),
        v_linf: now.v_linf,
        rho_l2: lp_norm(&state.rho, 2.0)?,
        rho_linf: state.rho.max_abs(),
        omega_l2: lp_norm(&state.omega_theta, 2.0)?,
        omega_h1: azimuthal_vector_h1(&state.omega_theta)?,
        gamma_l2: lp_norm(&gamma, 2.0)?,
        gamma_linf: gamma.max_abs(),
        gamma_h1: now.gamma_h1_sq.sqrt(),
        vr_over_r_linf: now.vr_over_r_linf,
        rho_over_r_l2: now.rho_over_r_l2_sq.sqrt(),
        support_dist_to_axis: sup.dist_to_axis,
        support_z_diameter: sup.z_diameter,
        support_threshold: sup.threshold,
        support_empty: sup.empty,
        int_vr_over_r_linf: acc.int_vr_over_r_linf,
        int_v_linf: acc.int_v_linf,
        int_grad_v_l2_sq: acc.int_grad_v_l2_sq,
        int_rho_over_r_l2_sq: acc.int_rho_over_r_l2_sq,
        int_gamma_h1_sq: acc.int_gamma_h1_sq,
    })
}

pub fn write_records_csv<W: Write>(w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Asserted,
    Reported,
    Suspended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: Status,
    pub paper_anchor: String,
    /// Absolute slack: an asserted check fails when `margin < -tolerance`.
    pub tolerance: f64,
}

impl InequalityCheck {
    fn new(name: &str, t: f64, lhs: f64, rhs: f64, status: Status, anchor: &str, tolerance: f64) -> Self {
        Self { name: name.into(), t, lhs, rhs, margin: rhs - lhs, status, paper_anchor: anchor.into(), tolerance }
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Asserted && !(self.margin >= -self.tolerance)
    }
}

/// Relative tolerances of the asserted checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rho_l2: f64,
    pub v_l2: f64,
    pub energy: f64,
    pub gamma_l2: f64,
    pub support: f64,
    pub rho_over_r: f64,
    pub gamma_monotone: f64,
    pub axis_envelope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rho_l2: 1e-3,
            v_l2: 1e-2,
            energy: 1e-2,
            gamma_l2: 5e-2,
            support: 1e-2,
            rho_over_r: 1e-2,
            gamma_monotone: 1e-6,
            axis_envelope: 1e-2,
        }
    }
}

/// Grid spacing and tolerances needed to judge a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckContext {
    pub dr: f64,
    pub dz: f64,
    pub tol: Tolerances,
}

pub mod anchors {
    pub const RHO_LINF: &str = "||rho(t)||_Linf <= ||rho_0||_Linf";
    pub const RHO_L2: &str = "||rho(t)||_L2 <= ||rho_0||_L2";
    pub const V_L2: &str = "||v(t)||_L2 <= ||v_0||_L2 + t ||rho_0||_L2";
    pub const ENERGY: &str =
        "1/2 ||v(t)||_L2^2 + int_0^t ||grad v||_L2^2 <= 1/2 ||v_0||_L2^2 + (||v_0||_L2 + t ||rho_0||_L2) ||rho_0||_L2 t";
    pub const GAMMA_L2: &str =
        "||omega_theta/r(t)||_L2^2 + int_0^t ||grad(omega_theta/r)||_L2^2 <= ||omega_theta/r(0)||_L2^2 + int_0^t ||rho/r||_L2^2";
    pub const AXIS_LOWER: &str = "d(supp rho(t), Oz) >= r_0 exp(-int_0^t ||v^r/r||_Linf)";
    pub const Z_DIAMETER: &str = "d(t) <= d_0 + 2 int_0^t ||v||_Linf";
    pub const RHO_OVER_R: &str = "||rho/r(t)||_L2^2 <= ||rho_0||_L2^2 / r_0^2 + 2 pi ||rho_0||_Linf^2 int_0^t ||v^r/r||_Linf (d_0 + 2 int_0^t ||v||_Linf)";
    pub const BS_V: &str = "||v||_Linf <= C ||omega_theta||_L2^(1/2) ||omega_theta||_H1^(1/2)";
    pub const BS_VR: &str = "||v^r/r||_Linf <= C ||omega_theta/r||_L2^(1/2) ||omega_theta/r||_H1^(1/2)";
    pub const STRONG: &str = "||v(t)||_H1 and ||omega_theta/r(t)||_L2 against C_0 exp(exp(C_0 t^9))";
    pub const GAMMA_MONO: &str = "||omega_theta/r(t)||_Lp <= ||omega_theta/r(s)||_Lp for t >= s when rho = 0";
    pub const PARTICLE_AXIS: &str = "r(x) exp(-|int_s^t ||v^r/r||_Linf|) <= d(psi(t,s,x), Oz) <= r(x) exp(|int_s^t ||v^r/r||_Linf|)";
}

/// The full ledger for a time-ordered series whose first entry is the
/// initial record.
pub fn evaluate_checks(series: &[DiagnosticsRecord], ctx: &CheckContext) -> Result<Vec<InequalityCheck>> {
    use anchors::*;
    use Status::*;
    let init = series.first().ok_or_else(|| Error::InvalidInput("empty diagnostics series".into()))?;
    if series.windows(2).any(|w| !(w[1].t >= w[0].t)) {
        return Err(Error::InvalidInput("diagnostics series is not time ordered".into()));
    }
    let tol = &ctx.tol;
    let homogeneous = init.rho_linf == 0.0;
    let r0 = init.support_dist_to_axis;
    let d0 = init.support_z_diameter;
    let mut out = Vec::new();

    for (k, rec) in series.iter().enumerate() {
        let t = rec.t;
        let c = |name, lhs, rhs, status, anchor, tolv| InequalityCheck::new(name, t, lhs, rhs, status, anchor, tolv);

        out.push(c("rho-Linf-max-principle", rec.rho_linf, init.rho_linf, Asserted, RHO_LINF, 0.0));
        out.push(c("rho-L2", rec.rho_l2, init.rho_l2, Asserted, RHO_L2, tol.rho_l2 * init.rho_l2));

        let v_rhs = init.v_l2 + t * init.rho_l2;
        out.push(c("v-L2-linear", rec.v_l2, v_rhs, Asserted, V_L2, tol.v_l2 * v_rhs));

        let e_lhs = 0.5 * rec.v_l2.powi(2) + rec.int_grad_v_l2_sq;
        let e_rhs = 0.5 * init.v_l2.powi(2) + (init.v_l2 + t * init.rho_l2) * init.rho_l2 * t;
        out.push(c("energy-budget", e_lhs, e_rhs, Asserted, ENERGY, tol.energy * e_rhs));

        let g_lhs = rec.gamma_l2.powi(2) + rec.int_gamma_h1_sq;
        let g_rhs = init.gamma_l2.powi(2) + rec.int_rho_over_r_l2_sq;
        out.push(c("gamma-L2-growth", g_lhs, g_rhs, Asserted, GAMMA_L2, tol.gamma_l2 * g_rhs));

        let support_ok = !init.support_empty && !rec.support_empty;
        let lower = if support_ok { r0 * (-rec.int_vr_over_r_linf).exp() } else { 0.0 };
        out.push(c(
            "support-axis-lower",
            lower,
            if support_ok { rec.support_dist_to_axis } else { 0.0 },
            if support_ok { Asserted } else { Suspended },
            AXIS_LOWER,
            tol.support * lower + ctx.dr,
        ));

        let d_rhs = d0 + 2.0 * rec.int_v_linf;
        out.push(c(
            "support-z-diameter",
            if support_ok { rec.support_z_diameter } else { 0.0 },
            if support_ok { d_rhs } else { 0.0 },
            if support_ok { Asserted } else { Suspended },
            Z_DIAMETER,
            2.0 * ctx.dz + tol.support * d_rhs,
        ));

        let axis_far = support_ok && rec.support_dist_to_axis >= 2.0 * ctx.dr && r0 >= 2.0 * ctx.dr;
        let q_rhs = if axis_far {
            init.rho_l2.powi(2) / (r0 * r0)
                + 2.0 * std::f64::consts::PI * init.rho_linf.powi(2) * rec.int_vr_over_r_linf * (d0 + 2.0 * rec.int_v_linf)
        } else {
            0.0
        };
        out.push(c(
            "rho-over-r-quadratic",
            if axis_far { rec.rho_over_r_l2.powi(2) } else { 0.0 },
            q_rhs,
            if axis_far { Asserted } else { Suspended },
            RHO_OVER_R,
            tol.rho_over_r * q_rhs,
        ));

        out.push(c("biot-savart-v", rec.v_linf, (rec.omega_l2 * rec.omega_h1).sqrt(), Reported, BS_V, 0.0));
        out.push(c(
            "biot-savart-vr-over-r",
            rec.vr_over_r_linf,
            (rec.gamma_l2 * rec.gamma_h1).sqrt(),
            Reported,
            BS_VR,
            0.0,
        ));
        out.push(c("strong-estimate-envelope", rec.v_h1(), rec.gamma_l2, Reported, STRONG, 0.0));

        if homogeneous && k > 0 {
            let p = &series[k - 1];
            out.push(c(
                "gamma-Lp-monotone[p=2]",
                rec.gamma_l2,
                p.gamma_l2,
                Asserted,
                GAMMA_MONO,
                tol.gamma_monotone * p.gamma_l2,
            ));
            out.push(c(
                "gamma-Lp-monotone[p=inf]",
                rec.gamma_linf,
                p.gamma_linf,
                Asserted,
                GAMMA_MONO,
                tol.gamma_monotone * p.gamma_linf,
            ));
        }
    }
    Ok(out)
}

/// Two-sided axis-distance envelope for every tracked particle at every
/// record time, using the record series for `||v^r/r||_inf`. Each particle
/// yields a lower and an upper check.
pub fn particle_envelope_checks(
    rows: &[(f64, Particle)],
    series: &[DiagnosticsRecord],
    tol: f64,
) -> Result<Vec<InequalityCheck>> {
    let hist: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.vr_over_r_linf)).collect();
    let mut ids: Vec<usize> = rows.iter().map(|(_, p)| p.id).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut out = Vec::new();
    for id in ids {
        let traj: Vec<(f64, Particle)> = rows.iter().filter(|(_, p)| p.id == id).copied().collect();
        let start = traj[0];
        for k in 1..traj.len() {
            let (t, p) = traj[k];
            let status = if p.escaped { Status::Suspended } else { Status::Asserted };
            let b = axis_distance_bounds_check(&[start, (t, p)], &hist)?;
            out.push(InequalityCheck::new(
                &format!("particle-axis-lower[{id}]"),
                t,
                b.lhs,
                b.observed,
                status,
                anchors::PARTICLE_AXIS,
                tol * b.lhs,
            ));
            out.push(InequalityCheck::new(
                &format!("particle-axis-upper[{id}]"),
                t,
                b.observed,
                b.rhs,
                status,
                anchors::PARTICLE_AXIS,
                tol * b.rhs,
            ));
        }
    }
    Ok(out)
}

pub fn write_checks_json<W: Write>(w: W, checks: &[InequalityCheck]) -> Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, checks)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Short human summary: one line per check name with worst margin.
pub fn summarize(checks: &[InequalityCheck]) -> Vec<String> {
    let mut names: Vec<&str> = Vec::new();
    for c in checks {
        let base = c.name.split('[').next().unwrap_or(&c.name);
        if !names.contains(&base) {
            names.push(base);
        }
    }
    names
        .into_iter()
        .map(|n| {
            let group: Vec<&InequalityCheck> =
                checks.iter().filter(|c| c.name.split('[').next() == Some(n)).collect();
            let failed = group.iter().filter(|c| c.failed()).count();
            let status = group.iter().map(|c| c.status).fold(Status::Suspended, |a, s| match (a, s) {
                (Status::Asserted, _) | (_, Status::Asserted) => Status::Asserted,
                (Status::Reported, _) | (_, Status::Reported) => Status::Reported,
                _ => Status::Suspended,
            });
            let worst = group
                .iter()
                .filter(|c| c.status != Status::Suspended)
                .map(|c| c.margin + c.tolerance)
                .fold(f64::INFINITY, f64::min);
            let label = match status {
                Status::Asserted if failed > 0 => "FAIL",
                Status::Asserted => "ok",
                Status::Reported => "report",
                Status::Suspended => "suspended",
            };
            format!("{label:>9}  {n:<28} {} entries, worst slack {worst:.3e}", group.len())
        })
        .collect()
}

/// Consistency check for callers building a record from scratch.
pub fn parity_ok(state: &FlowState) -> bool {
    state.omega_theta.parity() == Parity::Odd && state.rho.parity() == Parity::Even
}
