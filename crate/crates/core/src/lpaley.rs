//! Littlewood-Paley decomposition on a periodic Cartesian box.
//!
//! Frequencies are `xi_a = 2 pi k_a / side`. Block `q = -1` is `chi(|xi|)`,
//! block `q >= 0` is `phi(2^-q |xi|)` with `phi(x) = chi(x/2) - chi(x)`.
//! Blocks are kept up to the first `q` for which the remaining tail
//! `chi(2^-(q+1) xi)` is 1 on every grid frequency, so the blocks always add
//! up to the input. Blocks whose band pokes past the axis Nyquist frequency
//! are flagged.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{ScalarField2D, VelocityField};
use crate::interp::Bicubic;

const LO: f64 = 3.0 / 4.0;
const HI: f64 = 4.0 / 3.0;

/// Radial cutoff: 1 on `[0, 3/4]`, 0 on `[4/3, inf)`, quintic smoothstep in
/// between.
pub fn smoothstep_cutoff(s: f64) -> f64 {
    let s = s.abs();
    if s <= LO {
        1.0
    } else if s >= HI {
        0.0
    } else {
        let t = (s - LO) / (HI - LO);
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffPair;

impl CutoffPair {
    pub fn new() -> Self {
        Self
    }

    pub fn chi(&self, xi: f64) -> f64 {
        smoothstep_cutoff(xi)
    }

    pub fn phi(&self, xi: f64) -> f64 {
        smoothstep_cutoff(0.5 * xi) - smoothstep_cutoff(xi)
    }

    /// Multiplier of block `q` at frequency magnitude `xi`.
    pub fn block_multiplier(&self, q: i32, xi: f64) -> f64 {
        if q < 0 {
            self.chi(xi)
        } else {
            self.phi(xi / 2f64.powi(q))
        }
    }

    /// Inclusive frequency band `[lo, hi]` outside which block `q` vanishes.
    pub fn band(&self, q: i32) -> (f64, f64) {
        if q < 0 {
            (0.0, HI)
        } else {
            let s = 2f64.powi(q);
            (LO * s, 2.0 * HI * s)
        }
    }

    /// SHA-256 over the construction parameters and 4097 samples of `chi`
    /// on `[0, 2]`, hex encoded. Two builds print the same hash iff they use
    /// the same cutoff.
    pub fn identity_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"quintic-smoothstep chi lo=3/4 hi=4/3 phi=chi(x/2)-chi(x)");
        for k in 0..=4096 {
            h.update(self.chi(2.0 * k as f64 / 4096.0).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Real samples on the periodic box `[-side/2, side/2)^3`, index
/// `(a * n + b) * n + c` for `(x1, x2, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianField {
    pub n: usize,
    pub side: f64,
    pub data: Vec<f64>,
}

impl CartesianField {
    pub fn zeros(n: usize, side: f64) -> Result<Self> {
        check_box(n, side)?;
        Ok(Self { n, side, data: vec![0.0; n * n * n] })
    }

    pub fn from_fn(n: usize, side: f64, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<Self> {
        check_box(n, side)?;
        let h = side / n as f64;
        let x = |k: usize| -0.5 * side + k as f64 * h;
        let data = (0..n * n * n)
            .into_par_iter()
            .map(|idx| f(x(idx / (n * n)), x((idx / n) % n), x(idx % n)))
            .collect();
        Ok(Self { n, side, data })
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    /// `(sum |u|^p h^3)^(1/p)`, or the max for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        box_lp(&self.data, self.spacing(), p)
    }
}

fn check_box(n: usize, side: f64) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("box resolution {n} must be a power of two >= 4")));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidParameter("box side must be positive".into()));
    }
    Ok(())
}

fn box_lp(data: &[f64], h: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("Lebesgue exponent {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(data.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let s: f64 = data.iter().map(|v| v.abs().powf(p)).sum();
    Ok((s * h * h * h).powf(1.0 / p))
}

/// Samples the axisymmetric field on a box of side `2 max(Lr, Lz)` centred
/// on the origin. Points outside the meridional domain get 0. Sampling uses
/// the cell-clipped bicubic so no new extrema or support are created.
pub fn embed_cartesian(f: &ScalarField2D, n: usize) -> Result<CartesianField> {
    let g = f.grid();
    let side = 2.0 * g.lr().max(g.lz());
    let interp = Bicubic::new(f);
    let (lr, lz) = (g.lr(), g.lz());
    CartesianField::from_fn(n, side, |x1, x2, z| {
        let r = x1.hypot(x2);
        if r > lr || z.abs() > lz {
            0.0
        } else {
            interp.sample_monotone(r, z)
        }
    })
}

/// Cartesian components `(v^r x1/r, v^r x2/r, v^z)` of an axisymmetric
/// velocity, on the same box as [`embed_cartesian`].
pub fn embed_velocity(v: &VelocityField, n: usize) -> Result<[CartesianField; 3]> {
    let g = v.grid();
    let side = 2.0 * g.lr().max(g.lz());
    let (ir, iz) = (Bicubic::new(&v.vr), Bicubic::new(&v.vz));
    let (lr, lz) = (g.lr(), g.lz());
    let inside = move |r: f64, z: f64| r <= lr && z.abs() <= lz;
    let radial = |c: usize| {
        CartesianField::from_fn(n, side, |x1, x2, z| {
            let r = x1.hypot(x2);
            if !inside(r, z) || r == 0.0 {
                return 0.0;
            }
            ir.sample(r, z) * if c == 0 { x1 } else { x2 } / r
        })
    };
    let axial = CartesianField::from_fn(n, side, |x1, x2, z| {
        let r = x1.hypot(x2);
        if inside(r, z) {
            iz.sample(r, z)
        } else {
            0.0
        }
    })?;
    Ok([radial(0)?, radial(1)?, axial])
}

/// Raised-cosine window over the outer 1/16 of the box on each side.
pub fn taper(u: &mut CartesianField) {
    let n = u.n;
    let width = (n as f64 / 16.0).max(1.0);
    let w: Vec<f64> = (0..n)
        .map(|k| {
            let d = (k as f64).min((n - 1 - k) as f64);
            if d >= width {
                1.0
            } else {
                0.5 * (1.0 - (PI * d / width).cos())
            }
        })
        .collect();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                u.data[(a * n + b) * n + c] *= w[a] * w[b] * w[c];
            }
        }
    }
}

fn fft3(data: &mut [Complex<f64>], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let strides = [n * n, n, 1];
    for &stride in &strides {
        // Gather every line along this axis, transform, scatter back.
        let starts: Vec<usize> = (0..n * n * n).filter(|i| (i / stride) % n == 0).collect();
        let lines: Vec<Vec<Complex<f64>>> = starts
            .par_iter()
            .map(|&s| {
                let mut line: Vec<Complex<f64>> = (0..n).map(|k| data[s + k * stride]).collect();
                fft.process(&mut line);
                line
            })
            .collect();
        for (s, line) in starts.iter().zip(lines) {
            for (k, v) in line.into_iter().enumerate() {
                data[s + k * stride] = v;
            }
        }
    }
    if inverse {
        let s = 1.0 / (n * n * n) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

fn wavenumbers(n: usize, side: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * PI * k / side
        })
        .collect()
}

struct Spectrum {
    n: usize,
    side: f64,
    hat: Vec<Complex<f64>>,
    mag: Vec<f64>,
}

impl Spectrum {
    fn of(u: &CartesianField) -> Self {
        let n = u.n;
        let mut hat: Vec<Complex<f64>> = u.data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft3(&mut hat, n, false);
        let k = wavenumbers(n, u.side);
        let mag = (0..n * n * n)
            .map(|i| (k[i / (n * n)].powi(2) + k[(i / n) % n].powi(2) + k[i % n].powi(2)).sqrt())
            .collect();
        Self { n, side: u.side, hat, mag }
    }

    fn max_xi(&self) -> f64 {
        self.mag.iter().fold(0.0_f64, |m, &v| m.max(v))
    }

    fn filtered(&self, mult: impl Fn(usize) -> Complex<f64> + Sync) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = self.hat.par_iter().enumerate().map(|(i, &h)| h * mult(i)).collect();
        fft3(&mut buf, self.n, true);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Index of the last block needed for the blocks to sum to the input on a
/// box whose largest frequency magnitude is `max_xi`.
pub fn top_block(max_xi: f64) -> i32 {
    let mut q = -1;
    while max_xi / 2f64.powi(q + 1) > LO {
        q += 1;
    }
    q
}

#[derive(Debug, Clone)]
pub struct Block {
    pub q: i32,
    pub field: CartesianField,
    /// The block's band reaches past the per-axis Nyquist frequency.
    pub nyquist_limited: bool,
}

#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub n: usize,
    pub side: f64,
    pub blocks: Vec<Block>,
}

impl DyadicDecomposition {
    pub fn reconstruct(&self) -> CartesianField {
        let mut out = vec![0.0; self.n * self.n * self.n];
        for b in &self.blocks {
            out.iter_mut().zip(&b.field.data).for_each(|(o, v)| *o += v);
        }
        CartesianField { n: self.n, side: self.side, data: out }
    }

    pub fn block(&self, q: i32) -> Option<&Block> {
        self.blocks.iter().find(|b| b.q == q)
    }

    pub fn block_norms(&self, p: f64) -> Result<Vec<(i32, f64)>> {
        self.blocks.iter().map(|b| Ok((b.q, b.field.lp_norm(p)?))).collect()
    }
}

pub fn dyadic_blocks(u: &CartesianField, cutoffs: &CutoffPair) -> Result<DyadicDecomposition> {
    if u.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite box values".into()));
    }
    let spec = Spectrum::of(u);
    let nyquist = PI * u.n as f64 / u.side;
    let blocks = (-1..=top_block(spec.max_xi()))
        .map(|q| {
            let data = spec.filtered(|i| Complex::new(cutoffs.block_multiplier(q, spec.mag[i]), 0.0));
            Block {
                q,
                field: CartesianField { n: u.n, side: u.side, data },
                nyquist_limited: cutoffs.band(q).1 > nyquist,
            }
        })
        .collect();
    Ok(DyadicDecomposition { n: u.n, side: u.side, blocks })
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 1.0 {
        return Err(Error::InvalidParameter(format!("{name} = {v} must be >= 1 or inf")));
    }
    Ok(())
}

/// `|| (2^(q s) ||Delta_q u||_p)_q ||_(l^r)` over the stored blocks.
pub fn besov_norm(d: &DyadicDecomposition, s: f64, p: f64, r: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("r", r)?;
    if !s.is_finite() {
        return Err(Error::InvalidParameter("smoothness index must be finite".into()));
    }
    let terms: Vec<f64> = d
        .blocks
        .iter()
        .map(|b| Ok(2f64.powf(b.q as f64 * s) * b.field.lp_norm(p)?))
        .collect::<Result<_>>()?;
    Ok(if r.is_infinite() {
        terms.iter().fold(0.0_f64, |m, &t| m.max(t))
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    })
}

/// `max_a ||d_a Delta_q u||_p / ||Delta_q u||_p` with spectral derivatives.
pub fn bernstein_ratio(u: &CartesianField, cutoffs: &CutoffPair, q: i32, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let spec = Spectrum::of(u);
    let n = u.n;
    let k = wavenumbers(n, u.side);
    let nyq = |i: usize| n % 2 == 0 && i == n / 2;
    let block = spec.filtered(|i| Complex::new(cutoffs.block_multiplier(q, spec.mag[i]), 0.0));
    let h = u.spacing();
    let bn = box_lp(&block, h, p)?;
    let un = u.lp_norm(p)?;
    if !(bn > 1e-12 * un) || bn == 0.0 {
        return Err(Error::UndefinedRatio(format!("block {q} vanishes")));
    }
    let mut best = 0.0_f64;
    for axis in 0..3 {
        let d = spec.filtered(|i| {
            let c = [i / (n * n), (i / n) % n, i % n][axis];
            if nyq(c) {
                return Complex::new(0.0, 0.0);
            }
            Complex::new(0.0, k[c] * cutoffs.block_multiplier(q, spec.mag[i]))
        });
        best = best.max(box_lp(&d, h, p)?);
    }
    let _ = spec.side;
    Ok(best / bn)
}

/// CSV with columns `q,norm`.
pub fn write_block_energies<W: Write>(w: W, d: &DyadicDecomposition, p: f64) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["q", "norm"])?;
    for (q, v) in d.block_norms(p)? {
        out.write_record(&[q.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Outcome of one identity in [`identity_suite`].
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.value <= self.bound
    }
}

/// Partition of unity, block disjointness, reconstruction, single-mode
/// confinement and the Bernstein band on a Gaussian family, on an `n^3` box.
pub fn identity_suite(n: usize) -> Result<Vec<IdentityCheck>> {
    let c = CutoffPair::new();
    let mut out = Vec::new();

    let side = 2.0 * PI;
    let probe = CartesianField::zeros(n, side)?;
    let spec = Spectrum::of(&probe);
    let top = top_block(spec.max_xi());
    let mut pou = 0.0_f64;
    let mut overlap = 0.0_f64;
    for &xi in &spec.mag {
        let s: f64 = (-1..=top).map(|q| c.block_multiplier(q, xi)).sum();
        pou = pou.max((s - 1.0).abs());
        for p in 0..=top {
            for q in p + 2..=top {
                overlap = overlap.max((c.block_multiplier(p, xi) * c.block_multiplier(q, xi)).abs());
            }
        }
    }
    out.push(IdentityCheck { name: "partition-of-unity", value: pou, bound: 1e-12 });
    out.push(IdentityCheck { name: "block-disjointness", value: overlap, bound: 0.0 });

    let smooth = CartesianField::from_fn(n, side, |x, y, z| {
        (-(x * x + 2.0 * y * y + z * z)).exp() * (1.0 + 0.3 * (3.0 * x).sin())
    })?;
    let d = dyadic_blocks(&smooth, &c)?;
    let rec = d.reconstruct();
    let err = rec.data.iter().zip(&smooth.data).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    out.push(IdentityCheck {
        name: "reconstruction",
        value: err / smooth.lp_norm(f64::INFINITY)?,
        bound: 1e-10,
    });

    let q0 = 2;
    let freq = 2f64.powi(q0);
    let wave = CartesianField::from_fn(n, side, |x, _, _| (freq * x).cos())?;
    let d = dyadic_blocks(&wave, &c)?;
    let total = wave.lp_norm(2.0)?;
    let leak = d
        .blocks
        .iter()
        .filter(|b| (b.q - q0).abs() > 1)
        .map(|b| b.field.lp_norm(2.0))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    out.push(IdentityCheck { name: "single-mode-confinement", value: leak / total, bound: 1e-10 });

    let mut worst = 0.0_f64;
    for sigma in [0.04, 0.05, 0.06] {
        let g = CartesianField::from_fn(n.max(64), 1.0, |x, y, z| {
            (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp()
        })?;
        for q in 2..=6 {
            let ratio = bernstein_ratio(&g, &c, q, 2.0)? / 2f64.powi(q);
            worst = worst.max(ratio.max(1.0 / ratio));
        }
    }
    out.push(IdentityCheck { name: "bernstein-band", value: worst, bound: 4.0 });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, MeridionalGrid, Parity};
    use proptest::prelude::*;

    #[test]
    fn cutoff_shape() {
        let c = CutoffPair::new();
        assert_eq!(c.chi(0.0), 1.0);
        assert_eq!(c.chi(0.75), 1.0);
        assert_eq!(c.chi(4.0 / 3.0), 0.0);
        assert!((c.chi(0.5 * (LO + HI)) - 0.5).abs() < 1e-15);
        assert_eq!(c.phi(0.5), 0.0);
        assert_eq!(c.phi(3.0), 0.0);
        assert_eq!(c.identity_hash(), CutoffPair::new().identity_hash());
        assert_eq!(c.identity_hash().len(), 64);
    }

    #[test]
    fn top_block_covers_spectrum() {
        assert_eq!(top_block(0.5), -1);
        assert_eq!(top_block(1.0), 0);
        let t = top_block(54.0);
        assert!(54.0 / 2f64.powi(t + 1) <= LO && 54.0 / 2f64.powi(t) > LO);
    }

    #[test]
    fn suite_passes() {
        for check in identity_suite(32).unwrap() {
            assert!(check.passed(), "{check:?}");
        }
    }

    #[test]
    fn zero_field() {
        let u = CartesianField::zeros(16, 1.0).unwrap();
        let d = dyadic_blocks(&u, &CutoffPair::new()).unwrap();
        assert!(d.blocks.iter().all(|b| b.field.data.iter().all(|&v| v == 0.0)));
        assert_eq!(besov_norm(&d, 1.0, 2.0, 1.0).unwrap(), 0.0);
        assert!(matches!(bernstein_ratio(&u, &CutoffPair::new(), 1, 2.0), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn besov_l2_plancherel() {
        // Modes in the interior of single bands, so blocks are orthogonal.
        let u = CartesianField::from_fn(32, 2.0 * PI, |x, y, z| {
            (3.0 * x).cos() * 0.3 + (6.0 * y).sin() + 0.5 * (12.0 * z).cos() + 2.0
        })
        .unwrap();
        let d = dyadic_blocks(&u, &CutoffPair::new()).unwrap();
        let b = besov_norm(&d, 0.0, 2.0, 2.0).unwrap();
        let l2 = u.lp_norm(2.0).unwrap();
        assert!((b - l2).abs() <= 0.05 * l2, "{b} vs {l2}");
    }

    #[test]
    fn besov_general_field_bounds() {
        let u = CartesianField::from_fn(32, 2.0 * PI, |x, y, z| (-(x * x + y * y + z * z) / 0.5).exp()).unwrap();
        let d = dyadic_blocks(&u, &CutoffPair::new()).unwrap();
        let b2 = besov_norm(&d, 0.0, 2.0, 2.0).unwrap().powi(2);
        let l2 = u.lp_norm(2.0).unwrap().powi(2);
        assert!(b2 <= l2 * (1.0 + 1e-12) && b2 >= 0.5 * l2 * (1.0 - 1e-12));
        assert!(besov_norm(&d, 0.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn sinusoid_bernstein_exact_and_besov_scaling() {
        let c = CutoffPair::new();
        for q in 1..=3 {
            let f = 2f64.powi(q);
            let u = CartesianField::from_fn(32, 2.0 * PI, |_, y, _| (f * y).sin()).unwrap();
            let ratio = bernstein_ratio(&u, &c, q, 2.0).unwrap();
            assert!((ratio / f - 1.0).abs() < 1e-9);
            let d = dyadic_blocks(&u, &c).unwrap();
            let s = 1.5;
            let b = besov_norm(&d, s, 2.0, 1.0).unwrap();
            let target = 2f64.powf(q as f64 * s) * u.lp_norm(2.0).unwrap();
            assert!(b / target < 3.0 && target / b < 3.0);
        }
    }

    #[test]
    fn embed_matches_cylindrical_norm() {
        let g = MeridionalGrid::new(65, 129, 2.0, 2.0).unwrap();
        let f = ScalarField2D::from_fn(g, Parity::Even, |r, z| (-2.0 * (r * r + z * z)).exp());
        let u = embed_cartesian(&f, 64).unwrap();
        let a = u.lp_norm(2.0).unwrap();
        let b = lp_norm(&f, 2.0).unwrap();
        assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
        let c = ScalarField2D::from_fn(g, Parity::Even, |_, _| 2.5);
        let uc = embed_cartesian(&c, 16).unwrap();
        // The box corners sit outside the cylinder; the centre is exact.
        assert_eq!(uc.data[(8 * 16 + 8) * 16 + 8], 2.5);
        assert!(embed_cartesian(&f, 48).is_err());
    }

    #[test]
    fn taper_kills_edges() {
        let mut u = CartesianField::from_fn(32, 1.0, |_, _, _| 1.0).unwrap();
        taper(&mut u);
        assert_eq!(u.data[0], 0.0);
        assert_eq!(u.data[(16 * 32 + 16) * 32 + 16], 1.0);
    }

    #[test]
    fn block_csv() {
        let u = CartesianField::from_fn(8, 2.0 * PI, |x, _, _| x.cos()).unwrap();
        let d = dyadic_blocks(&u, &CutoffPair::new()).unwrap();
        let mut buf = Vec::new();
        write_block_energies(&mut buf, &d, 2.0).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("q,norm\n-1,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn partition_and_disjointness(xi in 0.0f64..500.0) {
            let c = CutoffPair::new();
            let top = top_block(xi);
            let s: f64 = (-1..=top).map(|q| c.block_multiplier(q, xi)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            for p in 0..=top {
                for q in p + 2..=top + 2 {
                    prop_assert_eq!(c.block_multiplier(p, xi) * c.block_multiplier(q, xi), 0.0);
                }
            }
        }

        #[test]
        fn reconstruction_random(vals in proptest::collection::vec(-1.0f64..1.0, 512)) {
            let u = CartesianField { n: 8, side: 3.0, data: vals };
            let d = dyadic_blocks(&u, &CutoffPair::new()).unwrap();
            let r = d.reconstruct();
            let m = u.lp_norm(f64::INFINITY).unwrap();
            for (a, b) in r.data.iter().zip(&u.data) {
                prop_assert!((a - b).abs() <= 1e-10 * m);
            }
        }
    }
}
