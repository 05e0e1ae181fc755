//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by
//! the individual checks, and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use relax_hydro::config::{parse_config, RunConfig};
use relax_hydro::diagnostics::identity_balance;
use relax_hydro::entropy::EntropyLaw;
use relax_hydro::fields::{PeriodicGrid, PotentialSpec, Potentials, ScalarField, VectorField};
use relax_hydro::hyperbolic::{run_euler, EulerConfig};
use relax_hydro::parabolic::{run_diffusion, DiffusionConfig, LimitSolution};
use relax_hydro::scenario::{
    coercivity_checks, euler_run_checks, limit_run_checks, rate_checks, run_sweep,
};
use relax_hydro::subsolution::dt_psi_from_density;
use relax_hydro::suites::{self, all_passed, Check};
use relax_hydro::Result;

const SEED: u64 = 20240611;

const CONSERVATION_1D: &str = r#"
schema_version = 1
scenario = "conservation-1d"

[grid]
dim = 1
n = 256
L = 1.0

[entropy]
m = 2.0
k = 1.0

[potentials]
c_k = 0.05
kernel = { kind = "wrapped-gaussian", amplitude = -1.0, width = 0.25 }
confinement = { kind = "cosine-mode", amplitude = 0.1, modes = [1] }

[initial]
density = { kind = "gaussian-bump", base = 0.5, amplitude = 1.0, width = 0.2 }
velocity = { kind = "well-prepared" }

[solver]
epsilon = 0.1
t_end = 1.0
snapshot_stride = 100
"#;

const RELAXATION_2D: &str = r#"
schema_version = 1
scenario = "relaxation-2d"
seed = 2024

[grid]
dim = 2
n = 64
L = 4.0

[entropy]
m = 2.0
k = 1.0

[potentials]
c_k = 0.05
kernel = { kind = "wrapped-gaussian", amplitude = -1.0, width = 1.0 }
confinement = { kind = "cosine-mode", amplitude = 0.1, modes = [1, 0] }

[initial]
density = { kind = "gaussian-bump", base = 1.0, amplitude = 0.5, width = 1.2 }
velocity = { kind = "well-prepared" }

[solver]
epsilons = [0.2, 0.1, 0.05, 0.025]
t_end = 1.0
snapshot_stride = 10
"#;

const SUBSOLUTION_2D: &str = r#"
schema_version = 1
scenario = "subsolution-2d"

[grid]
dim = 2
n = 32
L = 1.0

[entropy]
m = 2.0
k = 1.0

[potentials]
c_k = 0.05
kernel = { kind = "wrapped-gaussian", amplitude = -1.0, width = 0.3 }
confinement = { kind = "cosine-mode", amplitude = 0.1, modes = [1, 1] }

[initial]
density = { kind = "cosine-mode", base = 1.0, amplitude = 0.3, modes = [1, 2] }
velocity = { kind = "shear", amplitude = 0.5 }

[solver]
epsilon = 1.0
t_end = 1.0
"#;

struct Criterion {
    name: &'static str,
    budget: Duration,
    elapsed: Duration,
    checks: Vec<Check>,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && all_passed(&self.checks) && self.elapsed <= self.budget
    }
}

fn timed(name: &'static str, budget_s: u64, f: impl FnOnce() -> Result<Vec<Check>>) -> Criterion {
    let start = Instant::now();
    let checks = f().unwrap_or_else(|e| vec![Check::new("run", false, format!("error: {e}"))]);
    Criterion { name, budget: Duration::from_secs(budget_s), elapsed: start.elapsed(), checks }
}

fn config(text: &str) -> Result<RunConfig> {
    parse_config(text)
}

fn conservation() -> Result<Vec<Check>> {
    let cfg = config(CONSERVATION_1D)?;
    let pots = cfg.build_potentials()?;
    let rho0 = cfg.initial_density();
    let u0 = cfg.initial_velocity(&rho0, &pots);
    let mut ecfg = EulerConfig::new(cfg.epsilons()[0], cfg.law, pots.clone(), cfg.solver.t_end)?;
    ecfg.snapshot_stride = cfg.solver.snapshot_stride;
    let run = run_euler(&ecfg, rho0.clone(), &u0)?;
    let mut checks = euler_run_checks(&run);
    let mut dcfg = DiffusionConfig::new(cfg.law, pots, cfg.solver.t_end)?;
    dcfg.snapshot_stride = cfg.solver.snapshot_stride;
    checks.extend(limit_run_checks(&run_diffusion(&dcfg, rho0)?));
    Ok(checks)
}

/// Residual of the relative-entropy identity at `t_end` on an `n`-cell grid:
/// ρ₀ = 1 + 0.3 cos(πx/L), u₀ = 0, Euler step capped at dx/20.
fn identity_residual(n: usize) -> Result<f64> {
    let l = 1.0;
    let t_end = 0.5;
    let law = EntropyLaw::new(2.0, 1.0)?;
    let grid = PeriodicGrid::new(1, n, l)?;
    let pots = Potentials::new(
        grid,
        &PotentialSpec::WrappedGaussian { amplitude: -1.0, width: 0.25 * l },
        &PotentialSpec::CosineMode { amplitude: 0.1, modes: vec![1] },
        0.05,
    )?;
    let rho0 = ScalarField::from_fn(grid, |x| 1.0 + 0.3 * (std::f64::consts::PI * x[0] / l).cos());
    let mut ecfg = EulerConfig::new(0.1, law, pots.clone(), t_end)?;
    ecfg.dt_max = Some(0.05 * grid.dx());
    let run = run_euler(&ecfg, rho0.clone(), &VectorField::zeros(grid))?;
    let traj = run_diffusion(&DiffusionConfig::new(law, pots.clone(), t_end)?, rho0)?;
    let limit = LimitSolution::new(&traj, &law, &pots);
    Ok(identity_balance(&run.snapshots, &limit, &ecfg, run.final_state().t)?.residual())
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn identity() -> Result<Vec<Check>> {
    let ns = [64usize, 128, 256];
    let residuals = ns.iter().map(|&n| identity_residual(n)).collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let observed = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::new(
            "residual decreasing under refinement",
            residuals.windows(2).all(|w| w[1] < w[0]),
            format!("n = {ns:?}, residual = {}", sci(&residuals)),
        ),
        Check::new(
            "identity order",
            observed >= 0.7,
            format!("pairwise orders {orders:.3?}, min {observed:.3} (target ≥ 0.7)"),
        ),
    ])
}

fn subsolution() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let cfg = config(SUBSOLUTION_2D)?;
    checks.extend(suites::decomposition_suite(cfg.grid, SEED));
    checks.extend(suites::decomposition_suite(PeriodicGrid::new(3, 8, 1.0)?, SEED));
    checks.push(suites::v_ode_suite()?);
    for d in [2, 3] {
        checks.push(suites::algebraic_suite(100_000, d, SEED + d as u64)?);
    }
    let pots = cfg.build_potentials()?;
    let rho = cfg.initial_density();
    let mom = cfg.initial_velocity(&rho, &pots).mul_scalar_field(&rho);
    let dt_psi = ScalarField::zeros(cfg.grid);
    let (_, study) = suites::gauge_study(&rho, &mom, dt_psi, &cfg.law, &pots)?;
    checks.extend(study.checks());
    // a second frame where Ψ moves with the density
    let rate = ScalarField::from_fn(cfg.grid, |x| {
        0.2 * (std::f64::consts::PI * (x[0] + 2.0 * x[1])).sin()
    });
    let (_, moving) = suites::gauge_study(&rho, &mom, dt_psi_from_density(&rate), &cfg.law, &pots)?;
    checks.extend(moving.checks().into_iter().map(|mut c| {
        c.name = format!("{} (moving Ψ)", c.name);
        c
    }));
    Ok(checks)
}

fn main() -> ExitCode {
    let mut criteria = Vec::new();
    criteria.push(timed("1 entropy law suite", 5, || Ok(suites::entropy_suite(10_000, SEED))));
    criteria.push(timed("2 conservation and dissipation", 60, conservation));
    criteria.push(timed("3 relative-entropy identity refinement", 300, identity));

    let start = Instant::now();
    let sweep = config(RELAXATION_2D).and_then(|cfg| Ok((run_sweep(&cfg)?, cfg.potentials.c_k)));
    let sweep_time = start.elapsed();
    match &sweep {
        Ok((out, c_k)) => {
            criteria.push(Criterion {
                name: "4 relaxation rate",
                budget: Duration::from_secs(1800),
                elapsed: sweep_time,
                checks: rate_checks(out),
            });
            let start = Instant::now();
            let checks = coercivity_checks(out, *c_k);
            criteria.push(Criterion {
                name: "5 coercivity witnesses",
                budget: Duration::from_secs(60),
                elapsed: start.elapsed(),
                checks,
            });
        }
        Err(e) => {
            for name in ["4 relaxation rate", "5 coercivity witnesses"] {
                criteria.push(Criterion {
                    name,
                    budget: Duration::ZERO,
                    elapsed: sweep_time,
                    checks: vec![Check::new("sweep", false, format!("error: {e}"))],
                });
            }
        }
    }
    criteria.push(timed("6 subsolution suite", 30, subsolution));

    for c in &criteria {
        println!(
            "{} criterion {} ({:.2} s, budget {} s)",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!();
    for c in &criteria {
        println!("criterion {}:", c.name);
        for check in &c.checks {
            println!("  {}", check.line());
        }
    }
    if criteria.iter().all(Criterion::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
