//! Catmull-Rom bicubic interpolation on meridional fields.
//!
//! The stencil reaches two nodes past the containing cell. Across the axis
//! it uses parity ghosts; past the outer boundaries indices are clamped.

use crate::grid::ScalarField2D;

#[inline]
fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Containing cell and local coordinates of a point, `r >= 0` assumed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell {
    pub i: usize,
    pub j: usize,
    pub tr: f64,
    pub tz: f64,
}

pub struct Bicubic<'a> {
    f: &'a ScalarField2D,
}

impl<'a> Bicubic<'a> {
    pub fn new(f: &'a ScalarField2D) -> Self {
        Self { f }
    }

    #[inline]
    pub(crate) fn locate(&self, r: f64, z: f64) -> Cell {
        let g = self.f.grid();
        let x = (r / g.dr()).clamp(0.0, (g.nr() - 1) as f64);
        let y = ((z + g.lz()) / g.dz()).clamp(0.0, (g.nz() - 1) as f64);
        let i = (x.floor() as usize).min(g.nr() - 2);
        let j = (y.floor() as usize).min(g.nz() - 2);
        Cell {
            i,
            j,
            tr: x - i as f64,
            tz: y - j as f64,
        }
    }

    #[inline]
    fn eval_cell(&self, c: Cell) -> f64 {
        let nz = self.f.grid().nz();
        let wr = catmull_rom_weights(c.tr);
        let wz = catmull_rom_weights(c.tz);
        let mut acc = 0.0;
        for (a, wa) in wr.iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            let ii = c.i as isize - 1 + a as isize;
            let mut col = 0.0;
            for (b, wb) in wz.iter().enumerate() {
                let jj = (c.j as isize - 1 + b as isize).clamp(0, nz as isize - 1) as usize;
                col += wb * self.f.at_ghost(ii, jj);
            }
            acc += wa * col;
        }
        acc
    }

    /// Interpolated value at `(r, z)`. Negative `r` is reflected through the
    /// axis using the field's parity.
    pub fn sample(&self, r: f64, z: f64) -> f64 {
        if r < 0.0 {
            return self.f.parity().sign() * self.eval_cell(self.locate(-r, z));
        }
        self.eval_cell(self.locate(r, z))
    }

    /// Interpolated value clipped to the range of the four corners of the
    /// containing cell. Never creates a new extremum.
    pub fn sample_monotone(&self, r: f64, z: f64) -> f64 {
        let (sign, r) = if r < 0.0 {
            (self.f.parity().sign(), -r)
        } else {
            (1.0, r)
        };
        let c = self.locate(r, z);
        let corners = [
            self.f.at(c.i, c.j),
            self.f.at(c.i + 1, c.j),
            self.f.at(c.i, c.j + 1),
            self.f.at(c.i + 1, c.j + 1),
        ];
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        sign * self.eval_cell(c).clamp(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{MeridionalGrid, Parity};

    #[test]
    fn weights_partition_unity() {
        for k in 0..=10 {
            let w = catmull_rom_weights(k as f64 / 10.0);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(catmull_rom_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn reproduces_nodes_and_quadratics() {
        let g = MeridionalGrid::new(16, 16, 1.0, 1.0).unwrap();
        let f = ScalarField2D::from_fn(g, Parity::Even, |r, z| 1.0 + 2.0 * z + r * r + z * r * r);
        let b = Bicubic::new(&f);
        assert_eq!(b.sample(g.r(4), g.z(7)), f.at(4, 7));
        let (r, z) = (0.437, -0.2213);
        assert!((b.sample(r, z) - (1.0 + 2.0 * z + r * r + z * r * r)).abs() < 1e-12);
        // r^2 is even, so the ghost row is exact near the axis too.
        let (r, z) = (0.01, 0.3);
        assert!((b.sample(r, z) - (1.0 + 2.0 * z + r * r + z * r * r)).abs() < 1e-12 + 1e-3 * r);
    }

    #[test]
    fn odd_reflection() {
        let g = MeridionalGrid::new(16, 16, 1.0, 1.0).unwrap();
        let f = ScalarField2D::from_fn(g, Parity::Odd, |r, z| r * (1.0 + z));
        let b = Bicubic::new(&f);
        assert!((b.sample(0.03, 0.2) - 0.03 * 1.2).abs() < 1e-12);
        assert!((b.sample(-0.03, 0.2) + 0.03 * 1.2).abs() < 1e-12);
    }

    #[test]
    fn monotone_sample_stays_in_cell_range() {
        let g = MeridionalGrid::new(16, 16, 1.0, 1.0).unwrap();
        let f = ScalarField2D::from_fn(g, Parity::Even, |r, z| {
            if (r - 0.5).abs() < 0.1 && z.abs() < 0.1 { 1.0 } else { 0.0 }
        });
        let b = Bicubic::new(&f);
        for k in 0..200 {
            let r = k as f64 / 200.0;
            let v = b.sample_monotone(r, 0.05);
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
