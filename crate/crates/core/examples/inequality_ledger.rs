//! Runs a small scenario in memory and prints the inequality ledger.

use axibouss::cli::check_context;
use axibouss::config::parse_config;
use axibouss::diagnostics::{evaluate_checks, summarize};
use axibouss::evolution::run;

const CONFIG: &str = "
grid.nr = 65
grid.nz = 129
grid.lr = 6
grid.lz = 6
vortex.l2_norm = 1
vortex.r0 = 1.5
vortex.z0 = -1.5
vortex.sigma = 0.5
density.peak = 1
density.r1 = 1
density.r2 = 2
density.z0 = -1.5
density.h = 0.5
run.t_end = 1
run.record_interval = 0.1
";

fn main() -> axibouss::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let out = run(&cfg)?;
    println!("{} steps, {} records", out.steps, out.records.len());
    let checks = evaluate_checks(&out.records, &check_context(&cfg)?)?;
    for line in summarize(&checks) {
        println!("{line}");
    }
    let last = out.records.last().unwrap();
    println!(
        "t = {}: support distance to axis {:.4}, lower envelope r0 exp(-int |v^r/r|) = {:.4}, one cell = {:.4}",
        last.t,
        last.support_dist_to_axis,
        out.records[0].support_dist_to_axis * (-last.int_vr_over_r_linf).exp(),
        cfg.grid()?.dr()
    );
    Ok(())
}
