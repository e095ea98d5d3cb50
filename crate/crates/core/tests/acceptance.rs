//! Acceptance suite. One PASS/FAIL line per criterion; the process exits
//! nonzero when any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use axibouss::cli;
use axibouss::config::parse_config;
use axibouss::diagnostics::{evaluate_checks, InequalityCheck, Status};
use axibouss::elliptic::StreamSolver;
use axibouss::evolution::{run, Dynamics, FlowState, Simulator, StepControl};
use axibouss::grid::{lp_norm, MeridionalGrid, Parity, ScalarField2D, VelocityField};
use axibouss::lpaley::identity_suite;
use axibouss::oracles::{biot_savart_ring, flow_map, strain_sharpness, Metric};

const ELLIPTIC_ORDER: f64 = 1.9;
const ELLIPTIC_SECONDS: f64 = 30.0;
const HEAT_REL_L2: f64 = 1e-3;
const BIOT_SAVART_REL: f64 = 0.02;
const SHARPNESS: (f64, f64) = (0.99, 1.01);
const ROUND_TRIP_CELLS: f64 = 1e-6;
const DET_J: f64 = 1e-3;
const POU: f64 = 1e-12;
const RECONSTRUCTION: f64 = 1e-10;
const LEAKAGE: f64 = 1e-10;
const BERNSTEIN: f64 = 4.0;
const GAMMA_MONOTONE: f64 = 1e-6;

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/standard_ring.cfg")
}

fn elliptic_manufactured() -> Outcome {
    // Psi* = f(r) cos(pi z / 2) with f = r^2 (1 - r^2)^2 on [0,1] x [-1,1].
    let k = PI / 2.0;
    let f = |r: f64| r * r * (1.0 - r * r).powi(2);
    // f'' - f'/r = -16 r^2 + 24 r^4, so E^2 Psi = (-16 r^2 + 24 r^4 - k^2 f) cos(kz).
    let omega = move |r: f64, z: f64| -(-16.0 * r * r + 24.0 * r.powi(4) - k * k * f(r)) * (k * z).cos() / r.max(1e-300);
    let start = Instant::now();
    let mut errs = Vec::new();
    for n in [64, 128, 256] {
        let g = MeridionalGrid::new(n + 1, n + 1, 1.0, 1.0).map_err(|e| e.to_string())?;
        let w = ScalarField2D::from_fn(g, Parity::Odd, |r, z| if r == 0.0 { 0.0 } else { omega(r, z) });
        let psi = StreamSolver::new(g).and_then(|s| s.solve_streamfunction(&w)).map_err(|e| e.to_string())?;
        let exact = ScalarField2D::from_fn(g, Parity::Odd, |r, z| f(r) * (k * z).cos());
        errs.push(psi.lin_comb(1.0, &exact, -1.0).max_abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    verdict(
        o1 >= ELLIPTIC_ORDER && o2 >= ELLIPTIC_ORDER && secs < ELLIPTIC_SECONDS,
        format!("orders {o1:.3}, {o2:.3} (>= {ELLIPTIC_ORDER}), {secs:.2} s (< {ELLIPTIC_SECONDS} s)"),
    )
}

fn heat_kernel() -> Outcome {
    // Gamma = omega/r under pure diffusion follows the 5D heat kernel.
    let kernel = |t: f64, r: f64, z: f64| (4.0 * PI * t).powf(-2.5) * (-(r * r + z * z) / (4.0 * t)).exp();
    let (t0, span, dt) = (0.1, 0.1, 1e-4);
    let g = MeridionalGrid::new(129, 129, 3.0, 3.0).map_err(|e| e.to_string())?;
    let ctl = StepControl { dt_max: dt, dynamics: Dynamics::FrozenFlow, ..Default::default() };
    let mut sim = Simulator::new(g, ctl).map_err(|e| e.to_string())?;
    let mut st = FlowState {
        t: 0.0,
        omega_theta: ScalarField2D::from_fn(g, Parity::Odd, |r, z| r * kernel(t0, r, z)),
        rho: ScalarField2D::zeros(g, Parity::Even),
        velocity: VelocityField::zeros(g),
        labels: None,
    };
    for _ in 0..(span / dt).round() as usize {
        st = sim.step_dt(&st, dt).map_err(|e| e.to_string())?;
    }
    let exact = ScalarField2D::from_fn(g, Parity::Odd, |r, z| r * kernel(t0 + span, r, z));
    let gamma = |w: &ScalarField2D| axibouss::grid::axis_quotient(w).and_then(|q| lp_norm(&q, 2.0));
    let diff = gamma(&st.omega_theta.lin_comb(1.0, &exact, -1.0)).map_err(|e| e.to_string())?;
    let rel = diff / gamma(&exact).map_err(|e| e.to_string())?;
    verdict(rel <= HEAT_REL_L2, format!("relative L2 error of Gamma {rel:.3e} (<= {HEAT_REL_L2:e})"))
}

fn metric<'a>(ms: &'a [Metric], prefix: &str) -> Result<&'a Metric, String> {
    ms.iter().find(|m| m.name.starts_with(prefix)).ok_or(format!("metric {prefix} missing"))
}

fn biot_savart() -> Outcome {
    let rep = biot_savart_ring(256).map_err(|e| e.to_string())?;
    let worst = metric(&rep.metrics, "max relative")?.value;
    verdict(worst <= BIOT_SAVART_REL, format!("max relative difference {worst:.3e} (<= {BIOT_SAVART_REL})"))
}

fn standard_scenario() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = scenario();
    let args = ["axibouss", "--quiet", "run", cfg.to_str().unwrap(), "--output", dir.path().to_str().unwrap()];
    let code = cli::main(args);
    let text = std::fs::read_to_string(dir.path().join("checks.json")).map_err(|e| e.to_string())?;
    let checks: Vec<InequalityCheck> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let asserted = checks.iter().filter(|c| c.status == Status::Asserted).count();
    let failed: Vec<&str> = checks.iter().filter(|c| c.failed()).map(|c| c.name.as_str()).collect();
    verdict(
        code == 0 && failed.is_empty() && asserted > 0,
        format!("exit {code}, {asserted} asserted entries, failing: {failed:?}"),
    )
}

fn sharpness() -> Outcome {
    let rep = strain_sharpness(0.5, 2.0).map_err(|e| e.to_string())?;
    let lo = metric(&rep.metrics, "min observed")?.value;
    let hi = metric(&rep.metrics, "max observed")?.value;
    verdict(
        lo >= SHARPNESS.0 && hi <= SHARPNESS.1,
        format!("observed/lhs in [{lo:.6}, {hi:.6}] (within [{}, {}])", SHARPNESS.0, SHARPNESS.1),
    )
}

fn flow_map_properties() -> Outcome {
    let rep = flow_map().map_err(|e| e.to_string())?;
    let trip = metric(&rep.metrics, "round trip")?.value;
    let theta = metric(&rep.metrics, "theta")?.value;
    let det = metric(&rep.metrics, "max |det")?.value;
    verdict(
        trip <= ROUND_TRIP_CELLS && theta == 1.0 && det <= DET_J,
        format!("round trip {trip:.2e} cells (<= {ROUND_TRIP_CELLS:e}), theta bitwise {}, |det J - 1| {det:.2e} (<= {DET_J:e})", theta == 1.0),
    )
}

fn littlewood_paley() -> Outcome {
    let checks = identity_suite(64).map_err(|e| e.to_string())?;
    let get = |n: &str| checks.iter().find(|c| c.name == n).map(|c| c.value).ok_or(format!("{n} missing"));
    let pou = get("partition-of-unity")?;
    let rec = get("reconstruction")?;
    let leak = get("single-mode-confinement")?;
    let bern = get("bernstein-band")?;
    verdict(
        pou <= POU && rec <= RECONSTRUCTION && leak <= LEAKAGE && bern <= BERNSTEIN,
        format!("unity {pou:.1e}, reconstruction {rec:.1e}, leakage {leak:.1e}, worst Bernstein factor {bern:.3} (<= {BERNSTEIN})"),
    )
}

fn homogeneous_gamma() -> Outcome {
    let text = std::fs::read_to_string(scenario()).map_err(|e| e.to_string())?;
    let text: String = text
        .lines()
        .filter(|l| !l.starts_with("density.") && !l.starts_with("particles."))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = parse_config(&text).map_err(|e| e.to_string())?;
    let out = run(&cfg).map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    for w in out.records.windows(2) {
        worst = worst.max((w[1].gamma_l2 - w[0].gamma_l2) / w[0].gamma_l2);
        worst = worst.max((w[1].gamma_linf - w[0].gamma_linf) / w[0].gamma_linf);
    }
    let ctx = cli::check_context(&cfg).map_err(|e| e.to_string())?;
    let ledger = evaluate_checks(&out.records, &ctx).map_err(|e| e.to_string())?;
    let mono = ledger.iter().filter(|c| c.name.starts_with("gamma-Lp-monotone")).count();
    let failed = ledger.iter().filter(|c| c.failed()).count();
    verdict(
        worst <= GAMMA_MONOTONE && mono > 0 && failed == 0,
        format!("worst relative growth per record {worst:.2e} (<= {GAMMA_MONOTONE:e}), {mono} monotonicity entries, {failed} failed"),
    )
}

fn determinism() -> Outcome {
    let cfg = cli::load_config(&scenario()).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        cli::execute_run(&cfg, dir.path()).map_err(|e| e.to_string())?;
        outputs.push(std::fs::read(dir.path().join("diagnostics.csv")).map_err(|e| e.to_string())?);
    }
    verdict(outputs[0] == outputs[1] && !outputs[0].is_empty(), format!("diagnostics.csv {} bytes, identical: {}", outputs[0].len(), outputs[0] == outputs[1]))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 elliptic manufactured solution", elliptic_manufactured),
        ("2 heat kernel in five dimensions", heat_kernel),
        ("3 Biot-Savart cross-validation", biot_savart),
        ("4 inequality ledger on the standard ring", standard_scenario),
        ("5 strain sharpness witness", sharpness),
        ("6 flow-map properties", flow_map_properties),
        ("7 Littlewood-Paley suite", littlewood_paley),
        ("8 homogeneous Gamma monotonicity", homogeneous_gamma),
        ("9 determinism", determinism),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {name}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
