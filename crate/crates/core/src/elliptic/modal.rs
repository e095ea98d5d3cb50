//! Fast direct solver for separable operators on the interior nodes.
//!
//! The axial second difference is diagonalised by a type-I discrete sine
//! transform (which bakes in the Dirichlet rows at `z = +-Lz`); each sine
//! mode then leaves a tridiagonal system in `r`, factored once.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::MeridionalGrid;

/// Type-I DST of length `m`: `X_k = sum_{j=1..m} x_j sin(pi j k / (m + 1))`,
/// computed through an odd extension of length `2(m + 1)`.
pub(crate) struct SineTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        Self { m, fft }
    }

    /// In-place forward transform. The inverse is `2 / (m + 1)` times the
    /// forward transform.
    pub fn apply(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.m);
        let n = 2 * (self.m + 1);
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = Complex::new(v, 0.0);
            buf[n - 1 - j] = Complex::new(-v, 0.0);
        }
        self.fft.process(&mut buf);
        for (k, out) in x.iter_mut().enumerate() {
            *out = -0.5 * buf[k + 1].im;
        }
    }

    pub fn inverse(&self, x: &mut [f64]) {
        self.apply(x);
        let s = 2.0 / (self.m + 1) as f64;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// Three-point radial operator on interior rows `i = 1..nr-2`. Entry `k`
/// belongs to row `k + 1`; `lower[k]` multiplies `u_{i-1}`, `upper[k]`
/// multiplies `u_{i+1}`.
#[derive(Debug, Clone)]
pub(crate) struct RadialOperator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RadialOperator {
    /// `d_rr - (1/r) d_r`, the radial part of the Stokes operator.
    pub fn stokes(grid: &MeridionalGrid) -> Self {
        let dr = grid.dr();
        let n = grid.nr() - 2;
        let mut op = Self {
            lower: Vec::with_capacity(n),
            diag: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
        };
        for i in 1..grid.nr() - 1 {
            let r = grid.r(i);
            op.lower.push(1.0 / (dr * dr) + 1.0 / (2.0 * r * dr));
            op.diag.push(-2.0 / (dr * dr));
            op.upper.push(1.0 / (dr * dr) - 1.0 / (2.0 * r * dr));
        }
        op
    }

    /// `d_rr + (1/r) d_r - 1/r^2`, the radial part of the vector Laplacian
    /// acting on an azimuthal component. Discretised as `r L5 (w / r)` with
    /// `L5 = d_rr + (3/r) d_r`, which equals the operator for smooth `w`;
    /// the naive stencil loses an order at the first row because `w_r / r`
    /// amplifies the centred-difference error. `w / r` is extended to the
    /// axis by even extrapolation `(4 G_1 - G_2) / 3`, so the first row
    /// stays tridiagonal and the stencil is exact on `r` and `r^3`.
    pub fn azimuthal_laplacian(grid: &MeridionalGrid) -> Self {
        let h2 = grid.dr() * grid.dr();
        let n = grid.nr() - 2;
        let mut op = Self {
            lower: Vec::with_capacity(n),
            diag: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
        };
        for i in 1..grid.nr() - 1 {
            let x = i as f64;
            if i == 1 {
                op.lower.push(0.0);
                op.diag.push(-8.0 / (3.0 * h2));
                op.upper.push(4.0 / (3.0 * h2));
            } else {
                op.lower.push((x - 1.5) / ((x - 1.0) * h2));
                op.diag.push(-2.0 / h2);
                op.upper.push((x + 1.5) / ((x + 1.0) * h2));
            }
        }
        op
    }
}

struct Factor {
    cp: Vec<f64>,
    inv_denom: Vec<f64>,
    sub: Vec<f64>,
}

/// Direct solver for `(alpha I + beta (R + D_zz)) u = f` with homogeneous
/// Dirichlet data on every boundary row.
pub(crate) struct ModalSolver {
    grid: MeridionalGrid,
    dst: SineTransform,
    factors: Vec<Factor>,
}

impl ModalSolver {
    pub fn new(grid: MeridionalGrid, op: &RadialOperator, alpha: f64, beta: f64) -> Result<Self> {
        let m = grid.nz() - 2;
        let n = grid.nr() - 2;
        let dz = grid.dz();
        let mut factors = Vec::with_capacity(m);
        for k in 1..=m {
            let s = (PI * k as f64 / (2.0 * (m + 1) as f64)).sin();
            let lambda = -4.0 * s * s / (dz * dz);
            let mut cp = vec![0.0; n];
            let mut inv_denom = vec![0.0; n];
            let sub: Vec<f64> = op.lower.iter().map(|a| beta * a).collect();
            for i in 0..n {
                let main = alpha + beta * (op.diag[i] + lambda);
                let denom = if i == 0 { main } else { main - sub[i] * cp[i - 1] };
                let scale = main.abs().max(1e-300);
                if !denom.is_finite() || denom.abs() <= 1e-14 * scale {
                    return Err(Error::SolverFailure(format!(
                        "singular tridiagonal pivot at mode {k}, row {}",
                        i + 1
                    )));
                }
                inv_denom[i] = 1.0 / denom;
                cp[i] = beta * op.upper[i] / denom;
            }
            factors.push(Factor { cp, inv_denom, sub });
        }
        Ok(Self {
            grid,
            dst: SineTransform::new(m),
            factors,
        })
    }

    /// Solves with right-hand side `rhs` given at every node (boundary rows
    /// ignored). The returned nodal vector is zero on every boundary row.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (nr, nz) = (g.nr(), g.nz());
        let (n, m) = (nr - 2, nz - 2);

        // Rows -> sine modes.
        let mut rows: Vec<Vec<f64>> = (1..nr - 1)
            .into_par_iter()
            .map(|i| {
                let mut row = rhs[i * nz + 1..i * nz + 1 + m].to_vec();
                self.dst.apply(&mut row);
                row
            })
            .collect();

        // Tridiagonal sweep per mode.
        let cols: Vec<Vec<f64>> = self
            .factors
            .par_iter()
            .enumerate()
            .map(|(k, f)| {
                let mut x: Vec<f64> = rows.iter().map(|row| row[k]).collect();
                x[0] *= f.inv_denom[0];
                for i in 1..n {
                    x[i] = (x[i] - f.sub[i] * x[i - 1]) * f.inv_denom[i];
                }
                for i in (0..n - 1).rev() {
                    x[i] -= f.cp[i] * x[i + 1];
                }
                x
            })
            .collect();

        rows.par_iter_mut().enumerate().for_each(|(i, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                *v = cols[k][i];
            }
            self.dst.inverse(row);
        });

        let mut out = vec![0.0; g.len()];
        for (i, row) in rows.iter().enumerate() {
            let base = (i + 1) * nz + 1;
            out[base..base + m].copy_from_slice(row);
        }
        out
    }
}

/// Applies `R + D_zz` at interior nodes, treating boundary rows as given
/// data. Boundary entries of the result are zero.
pub(crate) fn apply_operator(grid: &MeridionalGrid, op: &RadialOperator, u: &[f64]) -> Vec<f64> {
    let (nr, nz) = (grid.nr(), grid.nz());
    let dz2 = grid.dz() * grid.dz();
    let mut out = vec![0.0; grid.len()];
    for i in 1..nr - 1 {
        let k = i - 1;
        for j in 1..nz - 1 {
            let c = u[i * nz + j];
            out[i * nz + j] = op.lower[k] * u[(i - 1) * nz + j]
                + op.diag[k] * c
                + op.upper[k] * u[(i + 1) * nz + j]
                + (u[i * nz + j + 1] - 2.0 * c + u[i * nz + j - 1]) / dz2;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dst_matches_direct_sum_and_inverts() {
        let m = 13;
        let x: Vec<f64> = (0..m).map(|j| ((j * 7 + 3) % 5) as f64 - 1.7).collect();
        let mut y = x.clone();
        let t = SineTransform::new(m);
        t.apply(&mut y);
        for k in 1..=m {
            let direct: f64 = (1..=m)
                .map(|j| x[j - 1] * (PI * (j * k) as f64 / (m + 1) as f64).sin())
                .sum();
            assert!((y[k - 1] - direct).abs() < 1e-12);
        }
        t.inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn modal_solve_inverts_operator() {
        let g = MeridionalGrid::new(17, 23, 2.0, 1.5).unwrap();
        let op = RadialOperator::azimuthal_laplacian(&g);
        let solver = ModalSolver::new(g, &op, 1.0, -0.01).unwrap();
        let mut u = vec![0.0; g.len()];
        for i in 1..g.nr() - 1 {
            for j in 1..g.nz() - 1 {
                u[i * g.nz() + j] = ((i * 31 + j * 17) % 11) as f64 / 11.0;
            }
        }
        let lu = apply_operator(&g, &op, &u);
        let rhs: Vec<f64> = u.iter().zip(&lu).map(|(a, b)| a - 0.01 * b).collect();
        let back = solver.solve(&rhs);
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }
}
