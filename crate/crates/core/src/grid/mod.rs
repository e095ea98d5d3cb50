//! Node-centred meridional grid on `[0, Lr] x [-Lz, Lz]` and the fields that
//! live on it.
//!
//! The axis row `r = 0` is part of the grid. Fields carry their parity under
//! `r -> -r`, which supplies ghost values across the axis for every stencil
//! and interpolation that reaches past it.

mod norms;
pub(crate) use norms::{axis_quotient_unchecked, l2};
pub mod snapshot;

pub use norms::{
    axis_quotient, azimuthal_vector_h1, d_dr, d_dz, h1_seminorm, lp_norm, mul_by_r,
    volume_integral, weighted_sum,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridionalGrid {
    nr: usize,
    nz: usize,
    lr: f64,
    lz: f64,
}

impl MeridionalGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(nr: usize, nz: usize, lr: f64, lz: f64) -> Result<Self> {
        if nr < Self::MIN_NODES || nz < Self::MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} nodes per direction, got {nr} x {nz}",
                Self::MIN_NODES
            )));
        }
        if !(lr.is_finite() && lr > 0.0 && lz.is_finite() && lz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid extents must be positive, got Lr = {lr}, Lz = {lz}"
            )));
        }
        Ok(Self { nr, nz, lr, lz })
    }

    #[inline]
    pub fn nr(&self) -> usize {
        self.nr
    }

    #[inline]
    pub fn nz(&self) -> usize {
        self.nz
    }

    #[inline]
    pub fn lr(&self) -> f64 {
        self.lr
    }

    #[inline]
    pub fn lz(&self) -> f64 {
        self.lz
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.lr / (self.nr - 1) as f64
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        2.0 * self.lz / (self.nz - 1) as f64
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        -self.lz + j as f64 * self.dz()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nr * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index, r-major.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        (0.0..=self.lr).contains(&r) && (-self.lz..=self.lz).contains(&z)
    }

    /// Volume of the cylinder `r <= Lr, |z| <= Lz`.
    pub fn cylinder_volume(&self) -> f64 {
        std::f64::consts::PI * self.lr * self.lr * 2.0 * self.lz
    }
}

/// Behaviour of a meridional field under the reflection `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: MeridionalGrid,
    values: Vec<f64>,
    parity: Parity,
}

impl ScalarField2D {
    /// Validating constructor: values must be finite, and an odd field must
    /// vanish on the axis row.
    pub fn new(grid: MeridionalGrid, values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at node ({}, {})",
                k / grid.nz(),
                k % grid.nz()
            )));
        }
        if parity == Parity::Odd {
            if let Some(j) = values[..grid.nz()].iter().position(|&v| v != 0.0) {
                return Err(Error::InvalidParity(format!(
                    "odd field is nonzero on the axis at j = {j}"
                )));
            }
        }
        Ok(Self {
            grid,
            values,
            parity,
        })
    }

    /// Builds a field without validation. The caller guarantees the
    /// invariants; odd fields still get their axis row zeroed.
    pub(crate) fn from_raw(grid: MeridionalGrid, mut values: Vec<f64>, parity: Parity) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        if parity == Parity::Odd {
            values[..grid.nz()].iter_mut().for_each(|v| *v = 0.0);
        }
        Self {
            grid,
            values,
            parity,
        }
    }

    pub fn zeros(grid: MeridionalGrid, parity: Parity) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()], parity)
    }

    /// Samples `f(r, z)` at every node. Odd fields are forced to zero on the
    /// axis.
    pub fn from_fn(grid: MeridionalGrid, parity: Parity, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nr() {
            let r = grid.r(i);
            for j in 0..grid.nz() {
                values.push(f(r, grid.z(j)));
            }
        }
        Self::from_raw(grid, values, parity)
    }

    #[inline]
    pub fn grid(&self) -> &MeridionalGrid {
        &self.grid
    }

    #[inline]
    pub fn parity(&self) -> Parity {
        self.parity
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Value at radial index `i` which may be negative (reflected through the
    /// axis by parity). Indices past the outer boundary are clamped.
    #[inline]
    pub fn at_ghost(&self, i: isize, j: usize) -> f64 {
        if i < 0 {
            let m = ((-i) as usize).min(self.grid.nr() - 1);
            self.parity.sign() * self.at(m, j)
        } else {
            self.at((i as usize).min(self.grid.nr() - 1), j)
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nz = self.grid.nz();
        &self.values[i * nz..(i + 1) * nz]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_raw(
            self.grid,
            self.values.iter().map(|v| a * v).collect(),
            self.parity,
        )
    }

    /// `a * self + b * other`; parities must agree.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        debug_assert_eq!(self.parity, other.parity);
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            self.parity,
        )
    }

    pub fn map(&self, parity: Parity, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect(), parity)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Axisymmetric no-swirl velocity `v^r e_r + v^z e_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub vr: ScalarField2D,
    pub vz: ScalarField2D,
}

impl VelocityField {
    pub fn zeros(grid: MeridionalGrid) -> Self {
        Self {
            vr: ScalarField2D::zeros(grid, Parity::Odd),
            vz: ScalarField2D::zeros(grid, Parity::Even),
        }
    }

    pub fn new(vr: ScalarField2D, vz: ScalarField2D) -> Result<Self> {
        if vr.parity() != Parity::Odd || vz.parity() != Parity::Even {
            return Err(Error::InvalidParity(
                "velocity needs odd v^r and even v^z".into(),
            ));
        }
        if vr.grid() != vz.grid() {
            return Err(Error::InvalidInput("velocity components on different grids".into()));
        }
        Ok(Self { vr, vz })
    }

    pub fn grid(&self) -> &MeridionalGrid {
        self.vr.grid()
    }

    /// Nodal maximum of `|v|`.
    pub fn max_speed(&self) -> f64 {
        self.vr
            .values()
            .iter()
            .zip(self.vz.values())
            .fold(0.0_f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn lerp(&self, other: &Self, theta: f64) -> Self {
        Self {
            vr: self.vr.lin_comb(1.0 - theta, &other.vr, theta),
            vz: self.vz.lin_comb(1.0 - theta, &other.vz, theta),
        }
    }

    /// `(1/r) d_r(r v^r) + d_z v^z` with centred differences at interior
    /// nodes. Dirichlet boundary rows are reported as zero; the axis row
    /// carries the L'Hopital limit `2 d_r v^r + d_z v^z`.
    pub fn discrete_divergence(&self) -> ScalarField2D {
        let g = *self.grid();
        let (nr, nz, dr, dz) = (g.nr(), g.nz(), g.dr(), g.dz());
        let mut out = vec![0.0; g.len()];
        for j in 1..nz - 1 {
            let dvz = (self.vz.at(0, j + 1) - self.vz.at(0, j - 1)) / (2.0 * dz);
            out[g.idx(0, j)] = 2.0 * self.vr.at(1, j) / dr + dvz;
        }
        for i in 1..nr - 1 {
            let r = g.r(i);
            for j in 1..nz - 1 {
                let flux = (g.r(i + 1) * self.vr.at(i + 1, j) - g.r(i - 1) * self.vr.at(i - 1, j))
                    / (2.0 * dr);
                let dvz = (self.vz.at(i, j + 1) - self.vz.at(i, j - 1)) / (2.0 * dz);
                out[g.idx(i, j)] = flux / r + dvz;
            }
        }
        ScalarField2D::from_raw(g, out, Parity::Even)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_axis() {
        let g = MeridionalGrid::new(11, 21, 1.0, 2.0).unwrap();
        assert_eq!(g.r(0), 0.0);
        assert!((g.dr() - 0.1).abs() < 1e-15);
        assert!((g.dz() - 0.2).abs() < 1e-15);
        assert!((g.z(g.nz() - 1) - 2.0).abs() < 1e-12);
        assert_eq!(g.z(0), -2.0);
    }

    #[test]
    fn grid_rejects_small_or_degenerate() {
        assert!(MeridionalGrid::new(7, 16, 1.0, 1.0).is_err());
        assert!(MeridionalGrid::new(16, 16, 0.0, 1.0).is_err());
        assert!(MeridionalGrid::new(16, 16, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn odd_field_must_vanish_on_axis() {
        let g = MeridionalGrid::new(8, 8, 1.0, 1.0).unwrap();
        let mut v = vec![0.0; g.len()];
        v[3] = 1.0;
        assert!(matches!(
            ScalarField2D::new(g, v.clone(), Parity::Odd),
            Err(Error::InvalidParity(_))
        ));
        assert!(ScalarField2D::new(g, v, Parity::Even).is_ok());
    }

    #[test]
    fn non_finite_rejected() {
        let g = MeridionalGrid::new(8, 8, 1.0, 1.0).unwrap();
        let mut v = vec![0.0; g.len()];
        v[20] = f64::NAN;
        assert!(ScalarField2D::new(g, v, Parity::Even).is_err());
    }

    #[test]
    fn ghost_values_follow_parity() {
        let g = MeridionalGrid::new(8, 8, 1.0, 1.0).unwrap();
        let odd = ScalarField2D::from_fn(g, Parity::Odd, |r, _| r);
        let even = ScalarField2D::from_fn(g, Parity::Even, |r, _| r * r);
        assert_eq!(odd.at_ghost(-2, 3), -odd.at(2, 3));
        assert_eq!(even.at_ghost(-2, 3), even.at(2, 3));
    }
}
