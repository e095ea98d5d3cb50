//! Short coupled run: a vortex ring above a heavy annulus, stepped by hand.

use axibouss::evolution::{Simulator, StepControl};
use axibouss::grid::{lp_norm, MeridionalGrid};
use axibouss::initdata::{annular_density, annulus_peak_factor, gaussian_vortex_ring, scale_to_l2, RingParams};

fn main() -> axibouss::Result<()> {
    let g = MeridionalGrid::new(65, 129, 6.0, 6.0)?;
    let omega = scale_to_l2(&gaussian_vortex_ring(&RingParams::gaussian(1.0, 1.5, -1.5, 0.5)?, g)?, 1.0)?;
    let rho = annular_density(&RingParams::annulus(1.0 / annulus_peak_factor(), 1.0, 2.0, -1.5, 0.5)?, g)?;

    let mut sim = Simulator::new(g, StepControl::default())?;
    let mut state = sim.initial_state(omega, rho)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "|v|_2", "|v|_inf", "|rho|_2", "|rho|_inf");
    for k in 0..=50 {
        if k % 10 == 0 {
            println!(
                "{:6.2} {:10.6} {:10.6} {:10.6} {:10.6}",
                state.t,
                lp_norm(&state.velocity.vr, 2.0)?.hypot(lp_norm(&state.velocity.vz, 2.0)?),
                state.velocity.max_speed(),
                lp_norm(&state.rho, 2.0)?,
                state.rho.max_abs(),
            );
        }
        state = sim.step(&state)?;
    }
    Ok(())
}
