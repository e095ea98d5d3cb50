//! Velocity recovery from azimuthal vorticity.
//!
//! The production path solves the Stokes streamfunction problem
//! `E^2 Psi = d_rr Psi - (1/r) d_r Psi + d_zz Psi = -r omega_theta` with
//! `Psi = 0` on the axis and on the truncated outer boundary, then
//! differentiates: `v^r = -(1/r) d_z Psi`, `v^z = (1/r) d_r Psi`.
//! [`biot_savart_direct`] evaluates the singular integral directly and is
//! kept as a slow cross-check.

mod biot_savart;
pub(crate) mod modal;

pub use biot_savart::{
    biot_savart_direct, complete_elliptic_integrals, ring_filament_velocity, write_velocity_csv,
};

use crate::error::{Error, Result};
use crate::grid::{axis_quotient_unchecked, d_dr, d_dz, MeridionalGrid, Parity, ScalarField2D, VelocityField};
use modal::{apply_operator, ModalSolver, RadialOperator};

pub struct StreamSolver {
    grid: MeridionalGrid,
    op: RadialOperator,
    solver: ModalSolver,
}

impl StreamSolver {
    pub fn new(grid: MeridionalGrid) -> Result<Self> {
        let op = RadialOperator::stokes(&grid);
        let solver = ModalSolver::new(grid, &op, 0.0, 1.0)?;
        Ok(Self { grid, op, solver })
    }

    pub fn grid(&self) -> &MeridionalGrid {
        &self.grid
    }

    pub fn solve_streamfunction(&self, omega_theta: &ScalarField2D) -> Result<ScalarField2D> {
        self.check_input(omega_theta)?;
        let rhs = self.rhs(omega_theta);
        Ok(ScalarField2D::from_raw(self.grid, self.solver.solve(&rhs), Parity::Odd))
    }

    /// Streamfunction solve followed by [`velocity_from_streamfunction`].
    pub fn velocity(&self, omega_theta: &ScalarField2D) -> Result<VelocityField> {
        let psi = self.solve_streamfunction(omega_theta)?;
        Ok(velocity_from_streamfunction(&psi))
    }

    /// Max-norm of `E^2 Psi + r omega` over interior nodes, relative to the
    /// max-norm of `r omega`.
    pub fn relative_residual(&self, psi: &ScalarField2D, omega_theta: &ScalarField2D) -> f64 {
        let applied = apply_operator(&self.grid, &self.op, psi.values());
        let rhs = self.rhs(omega_theta);
        let scale = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let res = applied
            .iter()
            .zip(&rhs)
            .enumerate()
            .filter(|(k, _)| {
                let (i, j) = (k / self.grid.nz(), k % self.grid.nz());
                i > 0 && i + 1 < self.grid.nr() && j > 0 && j + 1 < self.grid.nz()
            })
            .fold(0.0_f64, |m, (_, (a, b))| m.max((a - b).abs()));
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }

    fn rhs(&self, omega_theta: &ScalarField2D) -> Vec<f64> {
        let nz = self.grid.nz();
        let mut rhs = omega_theta.values().to_vec();
        for i in 0..self.grid.nr() {
            let r = self.grid.r(i);
            rhs[i * nz..(i + 1) * nz].iter_mut().for_each(|v| *v *= -r);
        }
        rhs
    }

    fn check_input(&self, omega_theta: &ScalarField2D) -> Result<()> {
        if omega_theta.parity() != Parity::Odd {
            return Err(Error::InvalidParity("azimuthal vorticity must be odd".into()));
        }
        if omega_theta.grid() != &self.grid {
            return Err(Error::InvalidInput("vorticity lives on a different grid".into()));
        }
        Ok(())
    }
}

/// `v^r = -(1/r) d_z Psi`, `v^z = (1/r) d_r Psi` with centred differences and
/// the axis limit of `v^z` taken by [`crate::grid::axis_quotient`].
pub fn velocity_from_streamfunction(psi: &ScalarField2D) -> VelocityField {
    let g = *psi.grid();
    let nz = g.nz();
    let dpsi_dz = d_dz(psi);
    let mut vr = vec![0.0; g.len()];
    for i in 1..g.nr() {
        let inv_r = 1.0 / g.r(i);
        for j in 0..nz {
            vr[i * nz + j] = -dpsi_dz[i * nz + j] * inv_r;
        }
    }
    // d_r Psi vanishes on the axis; the odd tag zeroes that row.
    let dpsi_dr = ScalarField2D::from_raw(g, d_dr(psi), Parity::Odd);
    VelocityField {
        vr: ScalarField2D::from_raw(g, vr, Parity::Odd),
        vz: axis_quotient_unchecked(&dpsi_dr),
    }
}

/// `v^r / r`, with the axis value given by the radial derivative limit.
pub fn vr_over_r(v: &VelocityField) -> ScalarField2D {
    axis_quotient_unchecked(&v.vr)
}

/// Largest `|f|` within four cells of the outer boundary, relative to the
/// global max. Zero for a zero field.
pub fn boundary_proximity(f: &ScalarField2D) -> f64 {
    let g = f.grid();
    let max = f.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let band = 4;
    let mut edge = 0.0_f64;
    for i in 0..g.nr() {
        for j in 0..g.nz() {
            if i + band >= g.nr() || j < band || j + band >= g.nz() {
                edge = edge.max(f.at(i, j).abs());
            }
        }
    }
    edge / max
}
