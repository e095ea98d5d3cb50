//! The two initial-data families: a Gaussian vortex ring scaled to unit L2
//! norm and a compactly supported annular density, plus mollification.

use axibouss::grid::{axis_quotient, lp_norm, MeridionalGrid};
use axibouss::initdata::{annular_density, annulus_level_set, annulus_peak_factor, gaussian_vortex_ring, mollify, scale_to_l2, RingParams};

fn main() -> axibouss::Result<()> {
    let g = MeridionalGrid::new(129, 257, 6.0, 6.0)?;
    let w = scale_to_l2(&gaussian_vortex_ring(&RingParams::gaussian(1.0, 1.5, -1.5, 0.5)?, g)?, 1.0)?;
    println!("ring: |w|_2 = {:.6}, |w/r|_2 = {:.6}", lp_norm(&w, 2.0)?, lp_norm(&axis_quotient(&w)?, 2.0)?);

    let p = RingParams::annulus(1.0 / annulus_peak_factor(), 1.0, 2.0, -1.5, 0.5)?;
    let rho = annular_density(&p, g)?;
    println!("annulus: |rho|_inf = {:.6}, |rho|_2 = {:.6}", rho.max_abs(), lp_norm(&rho, 2.0)?);
    if let Some((r_lo, r_hi, z_lo, z_hi)) = annulus_level_set(&p, 1e-8) {
        println!("level set rho = 1e-8: r in [{r_lo:.4}, {r_hi:.4}], z in [{z_lo:.4}, {z_hi:.4}]");
    }

    for n in [8, 4] {
        let m = mollify(&rho, n)?;
        println!("mollified at scale 1/{n}: |rho|_inf = {:.6}, |rho|_2 = {:.6}", m.max_abs(), lp_norm(&m, 2.0)?);
    }
    Ok(())
}
