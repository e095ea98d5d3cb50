//! Command-line front end. Exit codes: 0 success, 1 a check or oracle
//! failed (or a runtime error), 2 bad configuration or usage, 3 blow-up.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::warn;

use crate::config::{parse_config, RunConfig};
use crate::diagnostics::{
    evaluate_checks, particle_envelope_checks, read_records_csv, summarize, write_checks_json, CheckContext,
    DiagnosticsRecord, InequalityCheck,
};
use crate::error::{Error, Result};
use crate::evolution::{run_observed, FlowState, RunObserver};
use crate::flowmap::{read_particles_csv, write_particles_csv, Particle};
use crate::grid::snapshot::write_field;
use crate::lpaley::{besov_norm, dyadic_blocks, embed_velocity, identity_suite, CutoffPair};
use crate::oracles::run_oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "axibouss", about = "Axisymmetric Boussinesq simulator and estimate checker")]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a simulation and evaluate the inequality ledger.
    Run {
        config: Option<PathBuf>,
        #[arg(long = "config", value_name = "PATH")]
        config_flag: Option<PathBuf>,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the canonical configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Re-evaluate the ledger from a diagnostics CSV.
    Check {
        diagnostics: PathBuf,
        /// Run configuration; defaults to run.cfg next to the CSV.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for checks.json; printed to stdout otherwise.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a named verification suite.
    Oracle {
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Littlewood-Paley identity suite.
    LpVerify {
        #[arg(long, default_value_t = 32)]
        n: usize,
    },
    /// Print the version and the cutoff identity hash.
    Version,
}

pub fn version_text() -> String {
    format!("axibouss {}\ncutoff {}\n", env!("CARGO_PKG_VERSION"), CutoffPair::new().identity_hash())
}

fn init_runtime(quiet: bool) {
    let level = if quiet { "error" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(n) = std::env::var("AXIBOUSS_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            warn!("thread pool already initialised; AXIBOUSS_THREADS ignored");
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_runtime(cli.quiet);
    let quiet = cli.quiet;
    match cli.cmd {
        Cmd::Version => {
            print!("{}", version_text());
            EXIT_OK
        }
        Cmd::LpVerify { n } => lp_verify(n, quiet),
        Cmd::Oracle { name, output } => oracle(&name, output.as_deref(), quiet),
        Cmd::Check { diagnostics, config, output } => check(&diagnostics, config.as_deref(), output.as_deref(), quiet),
        Cmd::Run { config, config_flag, output, print_config } => {
            let Some(path) = config_flag.or(config) else {
                eprintln!("error: run needs a configuration file");
                return EXIT_CONFIG;
            };
            let cfg = match load_config(&path) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return EXIT_CONFIG;
                }
            };
            if print_config {
                print!("{}", cfg.canonical());
                return EXIT_OK;
            }
            let dir = output.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            match execute_run(&cfg, &dir) {
                Ok(summary) => {
                    if !quiet {
                        println!(
                            "t = {} reached in {} steps ({} rejected); output in {}",
                            cfg.t_end,
                            summary.steps,
                            summary.rejected_steps,
                            dir.display()
                        );
                        for line in summarize(&summary.checks) {
                            println!("{line}");
                        }
                    }
                    if summary.failed() {
                        EXIT_FAILED
                    } else {
                        EXIT_OK
                    }
                }
                Err(Error::BlowUp { last_valid }) => {
                    eprintln!("error: non-finite state after t = {}; last valid state saved", last_valid.t);
                    EXIT_BLOWUP
                }
                Err(e @ (Error::ConfigValidation(_) | Error::ConfigSyntax { .. })) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_FAILED
                }
            }
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&fs::read_to_string(path)?)
}

pub fn check_context(cfg: &RunConfig) -> Result<CheckContext> {
    let g = cfg.grid()?;
    Ok(CheckContext { dr: g.dr(), dz: g.dz(), tol: cfg.tol })
}

/// What [`execute_run`] produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub rejected_steps: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub checks: Vec<InequalityCheck>,
    pub final_state: FlowState,
}

impl RunSummary {
    pub fn failed(&self) -> bool {
        self.checks.iter().any(InequalityCheck::failed)
    }
}

pub fn snapshot_name(t: f64) -> String {
    format!("snap_t{t:.6}.fld")
}

fn write_snapshot(dir: &Path, name: &str, s: &FlowState) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    write_field(&mut w, &s.omega_theta)?;
    write_field(&mut w, &s.rho)?;
    w.flush()?;
    Ok(())
}

struct FileObserver<'a> {
    dir: &'a Path,
    diagnostics: csv::Writer<File>,
    besov: Option<(usize, csv::Writer<File>)>,
}

impl RunObserver for FileObserver<'_> {
    fn on_record(&mut self, rec: &DiagnosticsRecord, state: &FlowState) -> Result<()> {
        self.diagnostics.serialize(rec)?;
        self.diagnostics.flush()?;
        if let Some((n, w)) = &mut self.besov {
            // B^{3/p+1}_{p,1} with p = 2, summed over Cartesian components.
            let c = CutoffPair::new();
            let mut total = 0.0;
            for comp in embed_velocity(&state.velocity, *n)? {
                total += besov_norm(&dyadic_blocks(&comp, &c)?, 2.5, 2.0, 1.0)?;
            }
            w.write_record(&[state.t.to_string(), total.to_string()])?;
            w.flush()?;
        }
        Ok(())
    }

    fn on_snapshot(&mut self, state: &FlowState) -> Result<()> {
        write_snapshot(self.dir, &snapshot_name(state.t), state)
    }
}

/// Full pipeline: simulation, diagnostics, particles, snapshots and the
/// ledger, written into `dir`. On blow-up the last finite state is saved
/// as `snap_t<t>_last.fld` before the error is returned.
pub fn execute_run(cfg: &RunConfig, dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("run.cfg"), cfg.canonical())?;
    let besov = if cfg.besov_n > 0 {
        let mut w = csv::Writer::from_path(dir.join("besov.csv"))?;
        w.write_record(["t", "v_besov_2_1"])?;
        Some((cfg.besov_n, w))
    } else {
        None
    };
    let mut obs = FileObserver { dir, diagnostics: csv::Writer::from_path(dir.join("diagnostics.csv"))?, besov };
    let out = match run_observed(cfg, &mut obs) {
        Ok(o) => o,
        Err(Error::BlowUp { last_valid }) => {
            write_snapshot(dir, &format!("snap_t{:.6}_last.fld", last_valid.t), &last_valid)?;
            return Err(Error::BlowUp { last_valid });
        }
        Err(e) => return Err(e),
    };
    let checks = ledger(&out.records, &out.particles, cfg)?;
    write_particles_csv(BufWriter::new(File::create(dir.join("particles.csv"))?), &out.particles)?;
    write_checks_json(BufWriter::new(File::create(dir.join("checks.json"))?), &checks)?;
    Ok(RunSummary {
        steps: out.steps,
        rejected_steps: out.rejected_steps,
        records: out.records,
        checks,
        final_state: out.final_state,
    })
}

fn ledger(records: &[DiagnosticsRecord], particles: &[(f64, Particle)], cfg: &RunConfig) -> Result<Vec<InequalityCheck>> {
    let mut checks = evaluate_checks(records, &check_context(cfg)?)?;
    checks.extend(particle_envelope_checks(particles, records, cfg.tol.axis_envelope)?);
    Ok(checks)
}

fn check(csv_path: &Path, config: Option<&Path>, output: Option<&Path>, quiet: bool) -> i32 {
    let sibling = |name: &str| csv_path.parent().unwrap_or(Path::new(".")).join(name);
    let cfg_path = config.map(Path::to_path_buf).unwrap_or_else(|| sibling("run.cfg"));
    let cfg = match load_config(&cfg_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cfg_path.display());
            return EXIT_CONFIG;
        }
    };
    let result = (|| -> Result<Vec<InequalityCheck>> {
        let records = read_records_csv(File::open(csv_path)?)?;
        let ppath = sibling("particles.csv");
        let particles = if ppath.exists() { read_particles_csv(File::open(ppath)?)? } else { Vec::new() };
        let checks = ledger(&records, &particles, &cfg)?;
        match output {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                write_checks_json(BufWriter::new(File::create(dir.join("checks.json"))?), &checks)?;
            }
            None => write_checks_json(std::io::stdout().lock(), &checks)?,
        }
        Ok(checks)
    })();
    match result {
        Ok(checks) => {
            if !quiet && output.is_some() {
                for line in summarize(&checks) {
                    println!("{line}");
                }
            }
            if checks.iter().any(InequalityCheck::failed) {
                EXIT_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILED
        }
    }
}

fn oracle(name: &str, output: Option<&Path>, quiet: bool) -> i32 {
    let rep = match run_oracle(name) {
        Ok(r) => r,
        Err(e @ Error::InvalidParameter(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    };
    let lines = rep.lines();
    if !quiet {
        for l in &lines {
            println!("{l}");
        }
    }
    if let Some(dir) = output {
        let res = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join(format!("{name}.txt")), lines.join("\n") + "\n"));
        if let Err(e) = res {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    }
    if rep.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn lp_verify(n: usize, quiet: bool) -> i32 {
    match identity_suite(n) {
        Ok(checks) => {
            if !quiet {
                println!("cutoff {}", CutoffPair::new().identity_hash());
                for c in &checks {
                    let tag = if c.passed() { "PASS" } else { "FAIL" };
                    println!("{tag} {}: {:.3e} (bound {:e})", c.name, c.value, c.bound);
                }
            }
            if checks.iter().all(|c| c.passed()) {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main(["axibouss", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(main(["axibouss", "run"]), EXIT_CONFIG);
        assert_eq!(main(["axibouss", "oracle", "nope"]), EXIT_CONFIG);
    }

    #[test]
    fn version_has_hash() {
        let v = version_text();
        let hash = v.lines().nth(1).unwrap().strip_prefix("cutoff ").unwrap();
        assert_eq!(hash.len(), 64);
        assert_eq!(main(["axibouss", "version"]), EXIT_OK);
    }

    #[test]
    fn snapshot_names_are_fixed_width() {
        assert_eq!(snapshot_name(0.5), "snap_t0.500000.fld");
    }
}
