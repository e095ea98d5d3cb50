//! Littlewood-Paley blocks of a Gaussian on a periodic box: block energies,
//! a Besov norm and the Bernstein ratio per block.

use axibouss::lpaley::{bernstein_ratio, besov_norm, dyadic_blocks, write_block_energies, CartesianField, CutoffPair};

fn main() -> axibouss::Result<()> {
    let c = CutoffPair::new();
    println!("cutoff identity {}", c.identity_hash());
    let sigma = 0.05;
    let u = CartesianField::from_fn(64, 1.0, |x, y, z| (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp())?;
    let d = dyadic_blocks(&u, &c)?;
    write_block_energies(std::io::stdout().lock(), &d, 2.0)?;
    for s in [0.0, 1.0, 2.5] {
        println!("B^{s}_(2,1) = {:.6e}", besov_norm(&d, s, 2.0, 1.0)?);
    }
    for q in 2..=5 {
        println!("q = {q}: |grad D_q u| / (2^q |D_q u|) = {:.3}", bernstein_ratio(&u, &c, q, 2.0)? / 2f64.powi(q));
    }
    Ok(())
}
