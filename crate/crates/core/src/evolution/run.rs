use log::{info, warn};

use super::{FlowState, Simulator};
use crate::config::RunConfig;
use crate::diagnostics::{integrands, record_with, DiagnosticsRecord, RunningIntegrals};
use crate::elliptic::boundary_proximity;
use crate::error::{Error, Result};
use crate::flowmap::{advance_particles, Particle, VelocityHistory};

/// Hooks for streaming run output. File writing stays with the caller.
pub trait RunObserver {
    fn on_record(&mut self, _rec: &DiagnosticsRecord, _state: &FlowState) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _state: &FlowState) -> Result<()> {
        Ok(())
    }
}

pub struct NoopObserver;

impl RunObserver for NoopObserver {}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Particle positions at every record time.
    pub particles: Vec<(f64, Particle)>,
    pub axis_clamps: usize,
    pub boundary_warnings: usize,
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    run_observed(config, &mut NoopObserver)
}

const EPS_T: f64 = 1e-12;

/// Integrates to `t_end`, landing exactly on every record and snapshot time.
/// On blow-up the observer has already seen every record up to the failure.
pub fn run_observed(config: &RunConfig, obs: &mut dyn RunObserver) -> Result<RunOutput> {
    let grid = config.grid()?;
    let mut sim = Simulator::new(grid, config.step)?;
    let (omega0, rho0) = config.initial_fields()?;
    let mut state = sim.initial_state(omega0, rho0)?;
    let threshold = config.support_threshold(&state.rho);
    let homogeneous = state.rho.is_zero();

    let mut particles: Vec<Particle> = config
        .particles
        .iter()
        .enumerate()
        .map(|(k, p)| Particle::new(k, p.r, p.theta, p.z))
        .collect();
    let mut particle_rows: Vec<(f64, Particle)> = particles.iter().map(|p| (0.0, *p)).collect();
    let mut axis_clamps = 0;

    // Ledger integrals advance every step; records only sample them.
    let mut acc = RunningIntegrals::start(state.t, integrands(&state)?);
    let first = record_with(&state, &acc, threshold)?;
    obs.on_record(&first, &state)?;
    obs.on_snapshot(&state)?;
    let mut records = vec![first];
    let (mut steps, mut rejected, mut boundary_warnings) = (0, 0, 0);
    let mut worst_decade = f64::NEG_INFINITY;

    let t_end = config.t_end;
    let mut next_record = config.record_interval;
    let mut next_snapshot = config.snapshot_interval;
    let mut dt_hint = f64::INFINITY;

    while state.t < t_end - EPS_T * t_end.max(1.0) {
        let target = next_record.min(next_snapshot).min(t_end);
        let mut dt = sim.control().choose_dt(&state.velocity).min(dt_hint);
        if state.t + dt > target - EPS_T * target.max(1.0) {
            dt = target - state.t;
        }
        let next = match sim.step_dt(&state, dt) {
            Ok(n) => n,
            Err(Error::StepRejected { admissible, .. }) => {
                rejected += 1;
                if rejected > 10_000 {
                    return Err(Error::SolverFailure("step size collapsed".into()));
                }
                dt_hint = 0.9 * admissible;
                continue;
            }
            Err(e) => {
                warn!("run stopped at t = {}: {e}", state.t);
                return Err(e);
            }
        };
        dt_hint = f64::INFINITY;
        steps += 1;

        if !particles.is_empty() {
            let mut hist = VelocityHistory::new();
            hist.push(state.t, state.velocity.clone())?;
            hist.push(next.t, next.velocity.clone())?;
            let rep = advance_particles(&particles, &hist, state.t, next.t, dt)?;
            particles = rep.particles;
            axis_clamps += rep.axis_clamps;
        }

        let mut t_new = next.t;
        if (t_new - target).abs() <= 1e-9 * target.max(1.0) {
            t_new = target;
        }
        state = FlowState { t: t_new, ..next };
        acc.advance(state.t, integrands(&state)?)?;

        if state.t >= next_record - EPS_T * next_record.max(1.0) || state.t >= t_end {
            let rec = record_with(&state, &acc, threshold)?;
            obs.on_record(&rec, &state)?;
            records.push(rec);
            particle_rows.extend(particles.iter().map(|p| (state.t, *p)));
            next_record = config.record_interval * ((state.t / config.record_interval).round() + 1.0);
            let prox = boundary_proximity(&state.omega_theta);
            if prox > 1e-6 {
                boundary_warnings += 1;
            }
            // Once per decade of growth, not once per record.
            if prox > 1e-6 && prox.log10().floor() > worst_decade {
                worst_decade = prox.log10().floor();
                warn!("vorticity near the outer boundary at t = {:.4}: {:.3e} of its max", state.t, prox);
            }
        }
        if state.t >= next_snapshot - EPS_T * next_snapshot.max(1.0) {
            obs.on_snapshot(&state)?;
            next_snapshot = config.snapshot_interval * ((state.t / config.snapshot_interval).round() + 1.0);
        }
    }
    info!("run finished: {steps} steps, {rejected} rejected, homogeneous = {homogeneous}");
    Ok(RunOutput {
        records,
        final_state: state,
        steps,
        rejected_steps: rejected,
        particles: particle_rows,
        axis_clamps,
        boundary_warnings,
    })
}
