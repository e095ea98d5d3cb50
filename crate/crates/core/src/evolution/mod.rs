//! Time stepping of the coupled vorticity/density system
//!
//! `d_t w + v.grad w - (Lap - 1/r^2) w = (v^r / r) w - d_r rho`,
//! `d_t rho + v.grad rho = 0`,
//!
//! with `w = omega_theta`, the velocity recovered from `w` after every
//! update. The default IMEX scheme is the two-stage, L-stable ARS(2,2,2)
//! pair: diffusion implicit through the sine-transform solver, transport,
//! stretching and buoyancy explicit.

mod run;
mod transport;

pub use run::{run, run_observed, NoopObserver, RunObserver, RunOutput};
pub use transport::{admissible_dt, advect_density, LabelMap};

use std::f64::consts::SQRT_2;

use crate::elliptic::modal::{apply_operator, ModalSolver, RadialOperator};
use crate::elliptic::{vr_over_r, StreamSolver};
use crate::error::{Error, Result};
use crate::grid::{d_dr, d_dz, MeridionalGrid, Parity, ScalarField2D, VelocityField};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub omega_theta: ScalarField2D,
    pub rho: ScalarField2D,
    pub velocity: VelocityField,
    /// Characteristic map carrying the density. `None` falls back to
    /// stepwise semi-Lagrangian transport of `rho`.
    pub labels: Option<LabelMap>,
}

impl FlowState {
    /// Builds a state with the velocity recovered from `omega_theta`.
    pub fn new(t: f64, omega_theta: ScalarField2D, rho: ScalarField2D, solver: &StreamSolver) -> Result<Self> {
        if rho.parity() != Parity::Even {
            return Err(Error::InvalidParity("density must be even".into()));
        }
        if rho.grid() != omega_theta.grid() {
            return Err(Error::InvalidInput("vorticity and density live on different grids".into()));
        }
        let velocity = solver.velocity(&omega_theta)?;
        let labels = (!rho.is_zero()).then(|| LabelMap::identity(rho.clone()));
        Ok(Self { t, omega_theta, rho, velocity, labels })
    }

    pub fn grid(&self) -> &MeridionalGrid {
        self.omega_theta.grid()
    }

    pub fn all_finite(&self) -> bool {
        self.omega_theta.all_finite()
            && self.rho.all_finite()
            && self.velocity.vr.all_finite()
            && self.velocity.vz.all_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Imex,
    FullyExplicit,
}

/// `FrozenFlow` keeps the initial velocity for the whole run instead of
/// recovering it from the vorticity. Only meant for verification runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    Coupled,
    FrozenFlow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl_advect: f64,
    pub cfl_diffuse: f64,
    pub dt_max: f64,
    pub scheme: Scheme,
    pub dynamics: Dynamics,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { cfl_advect: 0.5, cfl_diffuse: 0.25, dt_max: 0.01, scheme: Scheme::Imex, dynamics: Dynamics::Coupled }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_advect > 0.0 && self.cfl_advect <= 1.0) {
            return Err(Error::InvalidParameter("cfl_advect must lie in (0, 1]".into()));
        }
        if !(self.cfl_diffuse > 0.0 && self.cfl_diffuse.is_finite()) {
            return Err(Error::InvalidParameter("cfl_diffuse must be positive".into()));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::InvalidParameter("dt_max must be positive".into()));
        }
        Ok(())
    }

    /// `min(cfl_advect min(dr,dz) / max|v|, dt_max)`, plus the diffusive
    /// limit when diffusion is explicit.
    pub fn choose_dt(&self, v: &VelocityField) -> f64 {
        let g = v.grid();
        let mut dt = admissible_dt(v, self.cfl_advect).min(self.dt_max);
        if self.scheme == Scheme::FullyExplicit {
            let inv = 1.0 / (g.dr() * g.dr()) + 1.0 / (g.dz() * g.dz());
            dt = dt.min(self.cfl_diffuse / inv);
        }
        dt
    }
}

const GAMMA: f64 = 1.0 - 1.0 / SQRT_2;

/// Explicit part `-v.grad w + (v^r/r) w - d_r rho` at interior nodes; zero
/// on the axis and outer rows.
pub fn explicit_terms(omega: &ScalarField2D, rho: &ScalarField2D, v: &VelocityField) -> ScalarField2D {
    let g = *omega.grid();
    let (nr, nz) = (g.nr(), g.nz());
    let wr = d_dr(omega);
    let wz = d_dz(omega);
    let rr = d_dr(rho);
    let q = vr_over_r(v);
    let mut out = vec![0.0; g.len()];
    for i in 1..nr - 1 {
        for j in 1..nz - 1 {
            let k = i * nz + j;
            out[k] = -(v.vr.values()[k] * wr[k] + v.vz.values()[k] * wz[k]) + q.values()[k] * omega.values()[k] - rr[k];
        }
    }
    ScalarField2D::from_raw(g, out, Parity::Odd)
}

/// `(Lap - 1/r^2) w` at interior nodes.
pub fn diffusion_term(omega: &ScalarField2D) -> ScalarField2D {
    let g = *omega.grid();
    let op = RadialOperator::azimuthal_laplacian(&g);
    ScalarField2D::from_raw(g, apply_operator(&g, &op, omega.values()), Parity::Odd)
}

/// Full right-hand side of the vorticity equation.
pub fn vorticity_rhs(state: &FlowState) -> ScalarField2D {
    explicit_terms(&state.omega_theta, &state.rho, &state.velocity).lin_comb(1.0, &diffusion_term(&state.omega_theta), 1.0)
}

/// Owns the elliptic solver and a cached implicit diffusion factorisation.
pub struct Simulator {
    grid: MeridionalGrid,
    stream: StreamSolver,
    ctl: StepControl,
    diffusion_op: RadialOperator,
    implicit: Option<(u64, ModalSolver)>,
}

impl Simulator {
    pub fn new(grid: MeridionalGrid, ctl: StepControl) -> Result<Self> {
        ctl.validate()?;
        Ok(Self {
            grid,
            stream: StreamSolver::new(grid)?,
            ctl,
            diffusion_op: RadialOperator::azimuthal_laplacian(&grid),
            implicit: None,
        })
    }

    pub fn control(&self) -> &StepControl {
        &self.ctl
    }

    pub fn stream_solver(&self) -> &StreamSolver {
        &self.stream
    }

    pub fn initial_state(&self, omega_theta: ScalarField2D, rho: ScalarField2D) -> Result<FlowState> {
        FlowState::new(0.0, omega_theta, rho, &self.stream)
    }

    /// Steps with the CFL-limited dt.
    pub fn step(&mut self, state: &FlowState) -> Result<FlowState> {
        let dt = self.ctl.choose_dt(&state.velocity);
        self.step_dt(state, dt)
    }

    /// Steps with a caller-chosen dt. Returns `StepRejected` when the
    /// transport CFL bound fails for the predicted velocities.
    pub fn step_dt(&mut self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        if state.grid() != &self.grid {
            return Err(Error::InvalidInput("state lives on a different grid".into()));
        }
        let next = match self.ctl.scheme {
            Scheme::Imex => self.imex(state, dt)?,
            Scheme::FullyExplicit => self.heun(state, dt)?,
        };
        if !next.all_finite() {
            return Err(Error::BlowUp { last_valid: Box::new(state.clone()) });
        }
        Ok(next)
    }

    fn velocity_of(&self, omega: &ScalarField2D, frozen: &VelocityField) -> Result<VelocityField> {
        match self.ctl.dynamics {
            Dynamics::Coupled => self.stream.velocity(omega),
            Dynamics::FrozenFlow => Ok(frozen.clone()),
        }
    }

    fn implicit_solver(&mut self, dt: f64) -> Result<&ModalSolver> {
        let key = dt.to_bits();
        if self.implicit.as_ref().is_none_or(|(k, _)| *k != key) {
            let s = ModalSolver::new(self.grid, &self.diffusion_op, 1.0, -GAMMA * dt)?;
            self.implicit = Some((key, s));
        }
        Ok(&self.implicit.as_ref().unwrap().1)
    }

    fn transport(&self, s: &FlowState, v: &VelocityField, dt: f64) -> Result<(ScalarField2D, Option<LabelMap>)> {
        if s.rho.is_zero() && s.labels.is_none() {
            return Ok((s.rho.clone(), None));
        }
        match &s.labels {
            Some(m) => {
                let m = m.advance(v, dt, self.ctl.cfl_advect)?;
                Ok((m.density(), Some(m)))
            }
            None => Ok((advect_density(&s.rho, v, dt, self.ctl.cfl_advect)?, None)),
        }
    }

    fn imex(&mut self, s: &FlowState, dt: f64) -> Result<FlowState> {
        let g = self.grid;
        let delta = 1.0 - 1.0 / (2.0 * GAMMA);
        let w0 = &s.omega_theta;

        // Density predictor with the old velocity, used for the stage forcing.
        let (rho_pred, _) = self.transport(s, &s.velocity, dt)?;

        let e1 = explicit_terms(w0, &s.rho, &s.velocity);
        let rhs2 = w0.lin_comb(1.0, &e1, GAMMA * dt);
        let u2 = ScalarField2D::from_raw(g, self.implicit_solver(dt)?.solve(rhs2.values()), Parity::Odd);
        let lu2 = u2.lin_comb(1.0, &rhs2, -1.0).scaled(1.0 / (GAMMA * dt));

        let v2 = self.velocity_of(&u2, &s.velocity)?;
        let rho2 = s.rho.lin_comb(1.0 - GAMMA, &rho_pred, GAMMA);
        let e2 = explicit_terms(&u2, &rho2, &v2);

        let mut rhs3 = w0.lin_comb(1.0, &e1, delta * dt);
        rhs3 = rhs3.lin_comb(1.0, &e2, (1.0 - delta) * dt);
        rhs3 = rhs3.lin_comb(1.0, &lu2, (1.0 - GAMMA) * dt);
        let w1 = ScalarField2D::from_raw(g, self.implicit_solver(dt)?.solve(rhs3.values()), Parity::Odd);
        let v1 = self.velocity_of(&w1, &s.velocity)?;

        let (rho1, labels) = self.transport(s, &s.velocity.lerp(&v1, 0.5), dt)?;
        Ok(FlowState { t: s.t + dt, omega_theta: w1, rho: rho1, velocity: v1, labels })
    }

    fn heun(&mut self, s: &FlowState, dt: f64) -> Result<FlowState> {
        let rhs = |w: &ScalarField2D, rho: &ScalarField2D, v: &VelocityField| {
            explicit_terms(w, rho, v).lin_comb(1.0, &diffusion_term(w), 1.0)
        };
        let (rho_pred, _) = self.transport(s, &s.velocity, dt)?;
        let k1 = rhs(&s.omega_theta, &s.rho, &s.velocity);
        let w_star = s.omega_theta.lin_comb(1.0, &k1, dt);
        let v_star = self.velocity_of(&w_star, &s.velocity)?;
        let k2 = rhs(&w_star, &rho_pred, &v_star);
        let w1 = s.omega_theta.lin_comb(1.0, &k1.lin_comb(0.5, &k2, 0.5), dt);
        let v1 = self.velocity_of(&w1, &s.velocity)?;
        let (rho1, labels) = self.transport(s, &s.velocity.lerp(&v1, 0.5), dt)?;
        Ok(FlowState { t: s.t + dt, omega_theta: w1, rho: rho1, velocity: v1, labels })
    }
}

/// One CFL-limited step with a throwaway simulator.
pub fn step(state: &FlowState, ctl: StepControl) -> Result<FlowState> {
    Simulator::new(*state.grid(), ctl)?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{axis_quotient, lp_norm};
    use crate::initdata::{annular_density, gaussian_vortex_ring, RingParams};
    use std::f64::consts::PI;

    fn heat_kernel(t: f64, r: f64, z: f64) -> f64 {
        (4.0 * PI * t).powf(-2.5) * (-(r * r + z * z) / (4.0 * t)).exp()
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let g = MeridionalGrid::new(17, 17, 2.0, 2.0).unwrap();
        let mut sim = Simulator::new(g, StepControl::default()).unwrap();
        let s = sim.initial_state(ScalarField2D::zeros(g, Parity::Odd), ScalarField2D::zeros(g, Parity::Even)).unwrap();
        let n = sim.step(&s).unwrap();
        assert_eq!(n.t, 0.01);
        assert!(n.omega_theta.is_zero() && n.rho.is_zero());
        assert!(vorticity_rhs(&s).is_zero());
    }

    #[test]
    fn buoyancy_sign() {
        let g = MeridionalGrid::new(33, 33, 4.0, 2.0).unwrap();
        let rho = ScalarField2D::from_fn(g, Parity::Even, |r, _| (r / 4.0).powi(2));
        let st = FlowState::new(0.0, ScalarField2D::zeros(g, Parity::Odd), rho, &StreamSolver::new(g).unwrap()).unwrap();
        let rhs = vorticity_rhs(&st);
        for i in 1..g.nr() - 1 {
            for j in 1..g.nz() - 1 {
                assert!(rhs.at(i, j) < 0.0);
            }
        }
    }

    #[test]
    fn rhs_matches_heat_kernel_derivative() {
        // With v = 0, rho = 0 the right-hand side is r d_t Gamma.
        let t0 = 0.1;
        let err = |n: usize| {
            let g = MeridionalGrid::new(n, 2 * n - 1, 3.0, 3.0).unwrap();
            let w = ScalarField2D::from_fn(g, Parity::Odd, |r, z| r * heat_kernel(t0, r, z));
            let st = FlowState { t: 0.0, omega_theta: w, rho: ScalarField2D::zeros(g, Parity::Even), velocity: VelocityField::zeros(g), labels: None };
            let rhs = vorticity_rhs(&st);
            let exact = ScalarField2D::from_fn(g, Parity::Odd, |r, z| {
                let s2 = r * r + z * z;
                r * heat_kernel(t0, r, z) * (-2.5 / t0 + s2 / (4.0 * t0 * t0))
            });
            let mut m = 0.0_f64;
            for i in 1..g.nr() - 1 {
                for j in 1..g.nz() - 1 {
                    m = m.max((rhs.at(i, j) - exact.at(i, j)).abs());
                }
            }
            m / exact.max_abs()
        };
        let (a, b) = (err(49), err(97));
        assert!(a < 5e-2 && (a / b).log2() > 1.8, "{a} {b}");
    }

    #[test]
    fn pure_diffusion_tracks_heat_kernel() {
        let (t0, n) = (0.1, 65);
        let g = MeridionalGrid::new(n, 2 * n - 1, 3.0, 3.0).unwrap();
        let ctl = StepControl { dt_max: 1e-3, dynamics: Dynamics::FrozenFlow, ..Default::default() };
        let mut sim = Simulator::new(g, ctl).unwrap();
        let w = ScalarField2D::from_fn(g, Parity::Odd, |r, z| r * heat_kernel(t0, r, z));
        let mut s = FlowState { t: 0.0, omega_theta: w, rho: ScalarField2D::zeros(g, Parity::Even), velocity: VelocityField::zeros(g), labels: None };
        while s.t < 0.05 - 1e-12 {
            s = sim.step_dt(&s, 1e-3).unwrap();
        }
        let gamma = axis_quotient(&s.omega_theta).unwrap();
        let exact = ScalarField2D::from_fn(g, Parity::Even, |r, z| heat_kernel(t0 + s.t, r, z));
        let rel = lp_norm(&gamma.lin_comb(1.0, &exact, -1.0), 2.0).unwrap() / lp_norm(&exact, 2.0).unwrap();
        assert!(rel < 5e-3, "{rel}");
    }

    #[test]
    fn explicit_and_imex_agree_at_small_dt() {
        let g = MeridionalGrid::new(33, 65, 4.0, 4.0).unwrap();
        let w = gaussian_vortex_ring(&RingParams::gaussian(3.0, 1.2, 0.0, 0.5).unwrap(), g).unwrap();
        let rho = annular_density(&RingParams::annulus(1.0, 1.0, 2.0, 0.0, 0.7).unwrap(), g).unwrap();
        let run = |scheme| {
            let ctl = StepControl { scheme, dt_max: 1e-3, ..Default::default() };
            let mut sim = Simulator::new(g, ctl).unwrap();
            let mut s = sim.initial_state(w.clone(), rho.clone()).unwrap();
            for _ in 0..20 {
                s = sim.step_dt(&s, 5e-4).unwrap();
            }
            s
        };
        let a = run(Scheme::Imex);
        let b = run(Scheme::FullyExplicit);
        let diff = lp_norm(&a.omega_theta.lin_comb(1.0, &b.omega_theta, -1.0), 2.0).unwrap();
        assert!(diff < 1e-3 * lp_norm(&a.omega_theta, 2.0).unwrap(), "{diff}");
    }

    #[test]
    fn density_max_principle_and_blowup_guard() {
        let g = MeridionalGrid::new(33, 65, 4.0, 4.0).unwrap();
        let w = gaussian_vortex_ring(&RingParams::gaussian(20.0, 1.5, 0.0, 0.5).unwrap(), g).unwrap();
        let rho = annular_density(&RingParams::annulus(1.0, 1.0, 2.0, 0.0, 0.7).unwrap(), g).unwrap();
        let mut sim = Simulator::new(g, StepControl::default()).unwrap();
        let mut s = sim.initial_state(w, rho.clone()).unwrap();
        for _ in 0..10 {
            s = sim.step(&s).unwrap();
            assert!(s.rho.max_abs() <= rho.max_abs());
        }
        assert!(sim.step_dt(&s, 10.0).is_err());
    }
}
