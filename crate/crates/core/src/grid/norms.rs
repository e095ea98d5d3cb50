//! Cylindrically weighted quadrature, norms and stencils.
//!
//! Every norm here is the three-dimensional norm of the axisymmetric field,
//! i.e. `int_{R^3} f dx = 2 pi int int f r dr dz`, evaluated with the
//! trapezoidal rule and the weight `r` taken at the nodes.

use std::f64::consts::PI;

use super::{MeridionalGrid, Parity, ScalarField2D};
use crate::error::{Error, Result};

#[inline]
fn trapezoid_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// `2 pi sum w_i w_j r_i g_ij dr dz` for nodal values `g` on `grid`.
pub fn weighted_sum(grid: &MeridionalGrid, g: &[f64]) -> f64 {
    let (nr, nz) = (grid.nr(), grid.nz());
    let mut total = 0.0;
    for i in 1..nr {
        let wr = trapezoid_weight(i, nr) * grid.r(i);
        let row = &g[i * nz..(i + 1) * nz];
        let mut acc = 0.0;
        for (j, v) in row.iter().enumerate() {
            acc += trapezoid_weight(j, nz) * v;
        }
        total += wr * acc;
    }
    2.0 * PI * total * grid.dr() * grid.dz()
}

pub fn volume_integral(f: &ScalarField2D) -> f64 {
    weighted_sum(f.grid(), f.values())
}

/// L^p norm for `p` in `[1, inf]`; `p = f64::INFINITY` gives the nodal max,
/// a lower bound for the true supremum.
pub fn lp_norm(f: &ScalarField2D, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let powered: Vec<f64> = if p == 2.0 {
        f.values().iter().map(|v| v * v).collect()
    } else if p == 1.0 {
        f.values().iter().map(|v| v.abs()).collect()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).collect()
    };
    let s = weighted_sum(f.grid(), &powered);
    Ok(if p == 2.0 { s.sqrt() } else { s.powf(1.0 / p) })
}

pub(crate) fn l2(f: &ScalarField2D) -> f64 {
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    weighted_sum(f.grid(), &sq).sqrt()
}

/// Radial derivative: centred in the interior, parity ghost on the axis,
/// one-sided second order at `r = Lr`.
pub fn d_dr(f: &ScalarField2D) -> Vec<f64> {
    let g = f.grid();
    let (nr, nz) = (g.nr(), g.nz());
    let h2 = 2.0 * g.dr();
    let mut out = vec![0.0; g.len()];
    for j in 0..nz {
        out[g.idx(0, j)] = (f.at(1, j) - f.at_ghost(-1, j)) / h2;
        for i in 1..nr - 1 {
            out[g.idx(i, j)] = (f.at(i + 1, j) - f.at(i - 1, j)) / h2;
        }
        let n = nr - 1;
        out[g.idx(n, j)] = (3.0 * f.at(n, j) - 4.0 * f.at(n - 1, j) + f.at(n - 2, j)) / h2;
    }
    out
}

/// Axial derivative: centred in the interior, one-sided second order at
/// `z = +-Lz`.
pub fn d_dz(f: &ScalarField2D) -> Vec<f64> {
    let g = f.grid();
    let (nr, nz) = (g.nr(), g.nz());
    let h2 = 2.0 * g.dz();
    let mut out = vec![0.0; g.len()];
    for i in 0..nr {
        let row = f.row(i);
        let o = &mut out[i * nz..(i + 1) * nz];
        o[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / h2;
        for j in 1..nz - 1 {
            o[j] = (row[j + 1] - row[j - 1]) / h2;
        }
        let n = nz - 1;
        o[n] = (3.0 * row[n] - 4.0 * row[n - 1] + row[n - 2]) / h2;
    }
    out
}

/// `(int |d_r f|^2 + |d_z f|^2 dx)^(1/2)`.
pub fn h1_seminorm(f: &ScalarField2D) -> f64 {
    let gr = d_dr(f);
    let gz = d_dz(f);
    let sq: Vec<f64> = gr.iter().zip(&gz).map(|(a, b)| a * a + b * b).collect();
    weighted_sum(f.grid(), &sq).sqrt()
}

/// `f / r` for an odd field. On the axis the limit `d_r f(0, z)` comes from
/// even extrapolation of `f / r`: `(4 q_1 - q_2) / 3 = (8 f_1 - f_2) / (6 dr)`,
/// exact for `a r + b r^3`.
pub fn axis_quotient(f: &ScalarField2D) -> Result<ScalarField2D> {
    if f.parity() != Parity::Odd {
        return Err(Error::InvalidParity(
            "axis quotient of an even field is singular on the axis".into(),
        ));
    }
    Ok(axis_quotient_unchecked(f))
}

pub(crate) fn axis_quotient_unchecked(f: &ScalarField2D) -> ScalarField2D {
    let g = *f.grid();
    let (nr, nz, dr) = (g.nr(), g.nz(), g.dr());
    let mut out = vec![0.0; g.len()];
    for j in 0..nz {
        out[j] = (8.0 * f.at(1, j) - f.at(2, j)) / (6.0 * dr);
    }
    for i in 1..nr {
        let inv_r = 1.0 / g.r(i);
        let src = f.row(i);
        for (o, v) in out[i * nz..(i + 1) * nz].iter_mut().zip(src) {
            *o = v * inv_r;
        }
    }
    ScalarField2D::from_raw(g, out, Parity::Even)
}

/// `r f` for an even field; the result is odd.
pub fn mul_by_r(f: &ScalarField2D) -> Result<ScalarField2D> {
    if f.parity() != Parity::Even {
        return Err(Error::InvalidParity("r * (odd field) is not odd".into()));
    }
    let g = *f.grid();
    let nz = g.nz();
    let mut out = f.values().to_vec();
    for i in 0..g.nr() {
        let r = g.r(i);
        out[i * nz..(i + 1) * nz].iter_mut().for_each(|v| *v *= r);
    }
    Ok(ScalarField2D::from_raw(g, out, Parity::Odd))
}

/// Homogeneous H^1 norm of the vector field `omega_theta e_theta`:
/// `|grad omega|^2 = |grad omega_theta|^2 + |omega_theta / r|^2`.
pub fn azimuthal_vector_h1(omega_theta: &ScalarField2D) -> Result<f64> {
    let q = axis_quotient(omega_theta)?;
    let a = h1_seminorm(omega_theta);
    let b = l2(&q);
    Ok((a * a + b * b).sqrt())
}
