//! Direct Biot-Savart evaluation for axisymmetric vorticity.
//!
//! The azimuthal integral of the 3D kernel is done in closed form: each
//! meridional node carries a circular vortex filament whose induced velocity
//! is expressed with complete elliptic integrals. The remaining meridional
//! sum is a trapezoid rule, except on the dual cells of the 5x5 block of
//! nodes around the evaluation point. There the vorticity is interpolated
//! and integrated with an 8x8 midpoint rule per cell; the kernel singularity
//! is only `1/d`, so this converges without special treatment.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::Bicubic;
use crate::grid::{Parity, ScalarField2D};

/// Complete elliptic integrals `(K(m), E(m))` with parameter `m = k^2`,
/// `0 <= m < 1`, by the arithmetic-geometric mean.
pub fn complete_elliptic_integrals(m: f64) -> (f64, f64) {
    debug_assert!((0.0..1.0).contains(&m));
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut pow = 0.5;
    let mut sum = pow * c * c;
    for _ in 0..64 {
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        // c_(n+1) = (a - b) / 2 without the cancellation
        c = c * c / (4.0 * an);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Velocity `(v^r, v^z)` at `(r, z)` induced by a circular filament of
/// circulation `kappa` through `(rs, zs)`.
pub fn ring_filament_velocity(kappa: f64, rs: f64, zs: f64, r: f64, z: f64) -> (f64, f64) {
    let dz = z - zs;
    let a = (r + rs).powi(2) + dz * dz;
    let b = (rs - r).powi(2) + dz * dz;
    let m = 4.0 * r * rs / a;
    let (k, e) = complete_elliptic_integrals(m.min(1.0 - 1e-16));
    let pre = kappa / (2.0 * PI * a.sqrt());
    let vz = pre * (k + (rs * rs - r * r - dz * dz) / b * e);
    let vr = if r == 0.0 {
        0.0
    } else {
        pre * dz / r * (-k + (rs * rs + r * r + dz * dz) / b * e)
    };
    (vr, vz)
}

/// Velocity at each point from the direct integral. Cost is one pass over
/// the grid per point.
pub fn biot_savart_direct(omega_theta: &ScalarField2D, points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if omega_theta.parity() != Parity::Odd {
        return Err(Error::InvalidParity("azimuthal vorticity must be odd".into()));
    }
    let g = *omega_theta.grid();
    for &(r, z) in points {
        if !(r >= 0.0 && r < g.lr() && z > -g.lz() && z < g.lz()) {
            return Err(Error::InvalidParameter(format!("point ({r}, {z}) is outside the grid")));
        }
    }
    let (nr, nz) = (g.nr(), g.nz());
    let cell = g.dr() * g.dz();
    let weight = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
    let interp = Bicubic::new(omega_theta);

    Ok(points
        .par_iter()
        .map(|&(r, z)| {
            let i0 = (r / g.dr()).round() as isize;
            let j0 = ((z + g.lz()) / g.dz()).round() as isize;
            let (mut vr, mut vz) = (0.0, 0.0);
            let near = |i: usize, j: usize| (i as isize - i0).abs() <= NEAR && (j as isize - j0).abs() <= NEAR;
            for i in 1..nr {
                let rs = g.r(i);
                let wi = weight(i, nr);
                for j in 0..nz {
                    if near(i, j) {
                        continue;
                    }
                    let w = omega_theta.at(i, j);
                    if w == 0.0 {
                        continue;
                    }
                    let kappa = w * wi * weight(j, nz) * cell;
                    let (a, b) = ring_filament_velocity(kappa, rs, g.z(j), r, z);
                    vr += a;
                    vz += b;
                }
            }
            let (hr, hz) = (0.5 * g.dr(), 0.5 * g.dz());
            for i in (i0 - NEAR).max(0)..=(i0 + NEAR).min(nr as isize - 1) {
                for j in (j0 - NEAR).max(0)..=(j0 + NEAR).min(nz as isize - 1) {
                    let (rc, zc) = (g.r(i as usize), g.z(j as usize));
                    let (ra, rb) = ((rc - hr).max(0.0), (rc + hr).min(g.lr()));
                    let (za, zb) = ((zc - hz).max(-g.lz()), (zc + hz).min(g.lz()));
                    let (sr, sz) = ((rb - ra) / SUB as f64, (zb - za) / SUB as f64);
                    for a in 0..SUB {
                        let rs = ra + (a as f64 + 0.5) * sr;
                        for b in 0..SUB {
                            let zs = za + (b as f64 + 0.5) * sz;
                            if (rs - r).hypot(zs - z) < 1e-12 * hr {
                                continue;
                            }
                            let kappa = interp.sample(rs, zs) * sr * sz;
                            let (u, w) = ring_filament_velocity(kappa, rs, zs, r, z);
                            vr += u;
                            vz += w;
                        }
                    }
                }
            }
            (vr, vz)
        })
        .collect())
}

const NEAR: isize = 2;
const SUB: usize = 8;

/// CSV with columns `r,z,vr,vz`.
pub fn write_velocity_csv<W: Write>(w: W, points: &[(f64, f64)], velocities: &[(f64, f64)]) -> Result<()> {
    if points.len() != velocities.len() {
        return Err(Error::InvalidInput("points and velocities differ in length".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["r", "z", "vr", "vz"])?;
    for (p, v) in points.iter().zip(velocities) {
        out.write_record(&[p.0.to_string(), p.1.to_string(), v.0.to_string(), v.1.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MeridionalGrid;

    #[test]
    fn elliptic_reference_values() {
        let (k, e) = complete_elliptic_integrals(0.0);
        assert!((k - PI / 2.0).abs() < 1e-15 && (e - PI / 2.0).abs() < 1e-15);
        let (k, e) = complete_elliptic_integrals(0.5);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((e - 1.350_643_881_047_675_5).abs() < 1e-14);
        let (k, e) = complete_elliptic_integrals(0.99);
        assert!((k - 3.695_637_362_989_875).abs() < 1e-12);
        assert!((e - 1.015_993_545_025_223_8).abs() < 1e-12);
    }

    #[test]
    fn filament_on_axis_closed_form() {
        let (r0, kappa) = (1.3, 2.0);
        for dz in [-1.0, 0.0, 0.4, 2.5] {
            let (vr, vz) = ring_filament_velocity(kappa, r0, 0.0, 0.0, dz);
            let exact = kappa * r0 * r0 / (2.0 * (r0 * r0 + dz * dz).powf(1.5));
            assert_eq!(vr, 0.0);
            assert!((vz - exact).abs() < 1e-13 * exact.abs());
        }
    }

    #[test]
    fn filament_field_is_solenoidal_and_irrotational() {
        let (rs, zs) = (1.0, 0.2);
        let h = 1e-4;
        let v = |r: f64, z: f64| ring_filament_velocity(1.0, rs, zs, r, z);
        for &(r, z) in &[(0.5, 0.9), (1.7, -0.4), (0.3, 0.2), (2.2, 1.5)] {
            let div = ((r + h) * v(r + h, z).0 - (r - h) * v(r - h, z).0) / (2.0 * h * r)
                + (v(r, z + h).1 - v(r, z - h).1) / (2.0 * h);
            let curl = (v(r, z + h).0 - v(r, z - h).0) / (2.0 * h) - (v(r + h, z).1 - v(r - h, z).1) / (2.0 * h);
            let scale = v(r, z).0.hypot(v(r, z).1);
            assert!(div.abs() < 1e-6 * scale / h.min(1.0), "div {div}");
            assert!(curl.abs() < 1e-6 * scale / h.min(1.0), "curl {curl}");
        }
    }

    #[test]
    fn single_cell_spike_matches_filament() {
        let g = MeridionalGrid::new(65, 129, 4.0, 4.0).unwrap();
        let (i0, j0) = (16, 64);
        let mut w = vec![0.0; g.len()];
        w[g.idx(i0, j0)] = 1.0;
        let f = ScalarField2D::new(g, w, Parity::Odd).unwrap();
        let kappa = g.dr() * g.dz();
        let r0 = g.r(i0);
        let v = biot_savart_direct(&f, &[(0.0, g.z(j0))]).unwrap();
        let exact = kappa / (2.0 * r0);
        assert!((v[0].1 - exact).abs() < 0.05 * exact);
    }

    #[test]
    fn zero_and_errors() {
        let g = MeridionalGrid::new(17, 17, 1.0, 1.0).unwrap();
        let v = biot_savart_direct(&ScalarField2D::zeros(g, Parity::Odd), &[(0.3, 0.1)]).unwrap();
        assert_eq!(v, vec![(0.0, 0.0)]);
        assert!(biot_savart_direct(&ScalarField2D::zeros(g, Parity::Odd), &[(2.0, 0.0)]).is_err());
        assert!(biot_savart_direct(&ScalarField2D::zeros(g, Parity::Even), &[(0.1, 0.0)]).is_err());
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_velocity_csv(&mut buf, &[(0.5, 0.25)], &[(1.0, -2.0)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "r,z,vr,vz\n0.5,0.25,1,-2\n");
    }
}
