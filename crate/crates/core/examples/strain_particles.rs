//! Particles in the linear strain `v^r = -a r, v^z = 2 a z`. The distance to
//! the axis decays exactly like `r0 exp(-a t)`, which is the lower envelope.

use axibouss::flowmap::{advance_particles, axis_distance_bounds_check, Particle, VelocityHistory};
use axibouss::grid::{MeridionalGrid, Parity, ScalarField2D, VelocityField};

fn main() -> axibouss::Result<()> {
    let a = 0.5;
    let g = MeridionalGrid::new(129, 257, 4.0, 4.0)?;
    let v = VelocityField::new(
        ScalarField2D::from_fn(g, Parity::Odd, |r, _| -a * r),
        ScalarField2D::from_fn(g, Parity::Even, |_, z| 2.0 * a * z),
    )?;
    let hist = VelocityHistory::frozen(v);
    let seeds: Vec<Particle> = [1.0, 2.0, 3.0].iter().enumerate().map(|(k, &r)| Particle::new(k, r, 0.3 * k as f64, 0.0)).collect();
    let t = 2.0;
    let out = advance_particles(&seeds, &hist, 0.0, t, 1e-3)?;
    let series = [(0.0, a), (t, a)];
    for (p0, p1) in seeds.iter().zip(&out.particles) {
        let b = axis_distance_bounds_check(&[(0.0, *p0), (t, *p1)], &series)?;
        println!(
            "particle {}: r {:.4} -> {:.6}, envelope [{:.6}, {:.4}], observed/lower = {:.8}, theta kept: {}",
            p0.id,
            p0.r,
            p1.r,
            b.lhs,
            b.rhs,
            b.observed / b.lhs,
            p0.theta == p1.theta
        );
    }
    Ok(())
}
