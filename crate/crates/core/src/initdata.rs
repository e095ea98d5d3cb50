//! Initial data: odd-image Gaussian vortex rings, compactly supported
//! annular densities, and the axisymmetric mollifier.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{l2, MeridionalGrid, Parity, ScalarField2D};
use crate::lpaley::smoothstep_cutoff;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RingShape {
    Gaussian { sigma: f64 },
    /// `r in [r1, r2]`, `|z - z0| <= h`.
    Annulus { r1: f64, r2: f64, h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParams {
    pub amplitude: f64,
    pub r0: f64,
    pub z0: f64,
    pub shape: RingShape,
}

impl RingParams {
    pub fn gaussian(amplitude: f64, r0: f64, z0: f64, sigma: f64) -> Result<Self> {
        let p = Self { amplitude, r0, z0, shape: RingShape::Gaussian { sigma } };
        p.validate()?;
        Ok(p)
    }

    /// `r0` is set to the annulus mid-radius.
    pub fn annulus(amplitude: f64, r1: f64, r2: f64, z0: f64, h: f64) -> Result<Self> {
        let p = Self {
            amplitude,
            r0: 0.5 * (r1 + r2),
            z0,
            shape: RingShape::Annulus { r1, r2, h },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.z0.is_finite() {
            return Err(Error::InvalidParameter("ring amplitude and z0 must be finite".into()));
        }
        match self.shape {
            RingShape::Gaussian { sigma } => {
                if !(self.r0 > 0.0 && self.r0.is_finite()) {
                    return Err(Error::InvalidParameter("ring radius r0 must be positive".into()));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameter("ring width sigma must be positive".into()));
                }
            }
            RingShape::Annulus { r1, r2, h } => {
                if !(r1 > 0.0) {
                    return Err(Error::InvalidParameter(
                        "density support must stay off the axis (r1 > 0)".into(),
                    ));
                }
                if !(r2 > r1 && r2.is_finite()) {
                    return Err(Error::InvalidParameter("annulus needs r1 < r2".into()));
                }
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::InvalidParameter("annulus half-height h must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// `exp(-1/(s(1-s)))` on `(0, 1)`, zero elsewhere.
pub fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

/// Peak of the product bump, `B(1/2)^2 = e^-8`.
pub fn annulus_peak_factor() -> f64 {
    bump(0.5) * bump(0.5)
}

pub fn gaussian_vortex_ring(p: &RingParams, grid: MeridionalGrid) -> Result<ScalarField2D> {
    p.validate()?;
    let RingShape::Gaussian { sigma } = p.shape else {
        return Err(Error::InvalidParameter("vortex ring needs a Gaussian shape".into()));
    };
    let s2 = sigma * sigma;
    let (a, r0, z0) = (p.amplitude, p.r0, p.z0);
    Ok(ScalarField2D::from_fn(grid, Parity::Odd, |r, z| {
        let dz2 = (z - z0) * (z - z0);
        a * ((-((r - r0).powi(2) + dz2) / s2).exp() - (-((r + r0).powi(2) + dz2) / s2).exp())
    }))
}

pub fn annular_density(p: &RingParams, grid: MeridionalGrid) -> Result<ScalarField2D> {
    p.validate()?;
    let RingShape::Annulus { r1, r2, h } = p.shape else {
        return Err(Error::InvalidParameter("annular density needs an annulus shape".into()));
    };
    let (a, z0) = (p.amplitude, p.z0);
    Ok(ScalarField2D::from_fn(grid, Parity::Even, |r, z| {
        a * bump((r - r1) / (r2 - r1)) * bump((z - z0 + h) / (2.0 * h))
    }))
}

/// Closed-form extent `(r_lo, r_hi, z_lo, z_hi)` of `{rho > threshold}` for
/// the annular profile, or `None` when the threshold is at or above the
/// peak. Inverts `bump(s) bump(1/2) = threshold / amplitude`.
pub fn annulus_level_set(p: &RingParams, threshold: f64) -> Option<(f64, f64, f64, f64)> {
    let RingShape::Annulus { r1, r2, h } = p.shape else {
        return None;
    };
    let ratio = p.amplitude.abs() * bump(0.5) / threshold;
    if !(ratio > 1.0) {
        return None;
    }
    // exp(-1/(s(1-s))) = 1/ratio  =>  s(1-s) = 1/ln(ratio)
    let c = 1.0 / ratio.ln();
    if c > 0.25 {
        return None;
    }
    let s = 0.5 * (1.0 - (1.0 - 4.0 * c).sqrt());
    let w = r2 - r1;
    Some((r1 + s * w, r2 - s * w, p.z0 - h + 2.0 * h * s, p.z0 + h - 2.0 * h * s))
}

/// Rescales `f` so its cylindrical L2 norm equals `target`.
pub fn scale_to_l2(f: &ScalarField2D, target: f64) -> Result<ScalarField2D> {
    let n = l2(f);
    if n == 0.0 {
        return Err(Error::InvalidParameter("cannot rescale a zero field".into()));
    }
    Ok(f.scaled(target / n))
}

const AZIMUTH_POINTS: usize = 32;

/// Convolution with `n^3 phi(n x)`, `phi` a radial bump built from the
/// smoothstep cutoff and supported in the unit ball. The 3D convolution is
/// reduced to the meridional plane with a 32-point midpoint rule over the
/// azimuthal window where the kernel is nonzero. Weights are
/// renormalised per target node so the discrete kernel has unit mass.
///
/// Odd fields are treated as azimuthal vector components, so the kernel picks
/// up the `cos(theta)` projection between source and target directions.
pub fn mollify(f: &ScalarField2D, n: usize) -> Result<ScalarField2D> {
    let g = *f.grid();
    if n == 0 {
        return Err(Error::InvalidParameter("mollifier index n must be positive".into()));
    }
    let eps = 1.0 / n as f64;
    if eps < 2.0 * g.dr().max(g.dz()) {
        return Err(Error::InvalidParameter(format!(
            "mollifier radius 1/{n} is not resolved by the grid (needs >= {})",
            2.0 * g.dr().max(g.dz())
        )));
    }
    let (nr, nz) = (g.nr(), g.nz());
    let di = (eps / g.dr()).ceil() as usize;
    let dj = (eps / g.dz()).ceil() as usize;
    let odd = f.parity() == Parity::Odd;
    let unit: Vec<f64> = (0..AZIMUTH_POINTS).map(|k| (k as f64 + 0.5) / AZIMUTH_POINTS as f64).collect();
    let tw = |k: usize, len: usize| if k == 0 || k + 1 == len { 0.5 } else { 1.0 };
    let kernel = |d: f64| smoothstep_cutoff(4.0 / 3.0 * d / eps);

    let rows: Vec<Vec<f64>> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let r = g.r(i);
            let mut row = vec![0.0; nz];
            for (j, out) in row.iter_mut().enumerate() {
                let z = g.z(j);
                let (mut acc, mut mass) = (0.0, 0.0);
                for si in i.saturating_sub(di)..(i + di + 1).min(nr) {
                    let rs = g.r(si);
                    if rs == 0.0 {
                        continue;
                    }
                    for sj in j.saturating_sub(dj)..(j + dj + 1).min(nz) {
                        let dz = z - g.z(sj);
                        let base = r * r + rs * rs + dz * dz;
                        // |theta| < tmax is where the source ring meets the ball
                        let tmax = if r == 0.0 {
                            if base < eps * eps { PI } else { 0.0 }
                        } else {
                            ((base - eps * eps) / (2.0 * r * rs)).clamp(-1.0, 1.0).acos()
                        };
                        if tmax == 0.0 {
                            continue;
                        }
                        let (mut ks, mut kc) = (0.0, 0.0);
                        for u in &unit {
                            let c = (tmax * (2.0 * u - 1.0)).cos();
                            let d = (base - 2.0 * r * rs * c).max(0.0).sqrt();
                            let k = kernel(d);
                            ks += k;
                            kc += k * c;
                        }
                        ks *= tmax;
                        kc *= tmax;
                        let w = rs * tw(si, nr) * tw(sj, nz);
                        mass += w * ks;
                        let kv = if odd { kc } else { ks };
                        acc += w * kv * f.at(si, sj);
                    }
                }
                *out = if mass > 0.0 { acc / mass } else { 0.0 };
            }
            row
        })
        .collect();
    Ok(ScalarField2D::from_raw(g, rows.concat(), f.parity()))
}
