//! Velocity of a Gaussian vortex ring from the streamfunction solve,
//! compared with the direct Biot-Savart sum at a few points.

use axibouss::elliptic::{biot_savart_direct, StreamSolver};
use axibouss::grid::MeridionalGrid;
use axibouss::initdata::{gaussian_vortex_ring, RingParams};

fn main() -> axibouss::Result<()> {
    let g = MeridionalGrid::new(129, 257, 8.0, 8.0)?;
    let omega = gaussian_vortex_ring(&RingParams::gaussian(1.0, 1.0, 0.0, 0.3)?, g)?;
    let solver = StreamSolver::new(g)?;
    let psi = solver.solve_streamfunction(&omega)?;
    println!("residual of E^2 psi = -r omega: {:.2e}", solver.relative_residual(&psi, &omega));

    let v = solver.velocity(&omega)?;
    let nodes = [(0usize, 128usize), (8, 136), (16, 120), (24, 136)];
    let points: Vec<(f64, f64)> = nodes.iter().map(|&(i, j)| (g.r(i), g.z(j))).collect();
    let direct = biot_savart_direct(&omega, &points)?;
    println!("{:>6} {:>6} {:>12} {:>12} {:>12} {:>12}", "r", "z", "vr", "vz", "vr (BS)", "vz (BS)");
    for ((&(i, j), &(r, z)), &(br, bz)) in nodes.iter().zip(&points).zip(&direct) {
        println!("{r:6.3} {z:6.3} {:12.6} {:12.6} {br:12.6} {bz:12.6}", v.vr.at(i, j), v.vz.at(i, j));
    }
    println!("max |div v| (discrete): {:.2e}", v.discrete_divergence().max_abs());
    Ok(())
}
