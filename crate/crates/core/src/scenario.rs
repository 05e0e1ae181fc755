//! Subcommand orchestration: builds solver inputs from a [`RunConfig`],
//! runs them, writes CSV tables and snapshots, and renders the report.
//!
//! Every file written goes through [`ArtifactWriter`], which records its
//! SHA-256 for the report. Outputs depend only on the config and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::diagnostics::{compare_run, convergence_fit, RunComparison, SweepResult};
use crate::diagnostics::sweep::sweep_csv;
use crate::error::{Error, Result};
use crate::fields::snapshot;
use crate::fields::{Potentials, ScalarField};
use crate::hyperbolic::{next_dt, run_euler, EulerConfig, EulerRun, EulerState};
use crate::parabolic::{mass_drift, run_diffusion, stable_dt, DiffusionConfig, LimitSolution, LimitTrajectory};
use crate::subsolution::{mean_force, solve_v_ode};
use crate::suites::{self, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Euler,
    Limit,
    Sweep,
    Verify,
    Subsolution,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Euler, Command::Limit, Command::Sweep, Command::Verify, Command::Subsolution];

    pub fn name(self) -> &'static str {
        match self {
            Command::Euler => "euler",
            Command::Limit => "limit",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Subsolution => "subsolution",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes files under one directory and remembers their checksums.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    fn snapshot(&mut self, cfg: &RunConfig, stem: &str, field: &ScalarField, t: f64) -> Result<()> {
        for &format in &cfg.output.formats {
            let bytes = match format {
                snapshot::SnapshotFormat::Csv => snapshot::to_csv(field, t).into_bytes(),
                snapshot::SnapshotFormat::Binary => snapshot::to_binary(field, t),
            };
            self.write(&format!("{stem}.{}", format.extension()), &bytes)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: Command,
    pub scenario: String,
    pub seed: u64,
    pub advisories: Vec<String>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn passed(&self) -> bool {
        suites::all_passed(&self.checks)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "relax-hydro {}", self.command.name());
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(out, "seed: {}", self.seed);
        for a in &self.advisories {
            let _ = writeln!(out, "advisory {a}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note {n}");
        }
        for c in &self.checks {
            let _ = writeln!(out, "{}", c.line());
        }
        for a in &self.artifacts {
            let _ = writeln!(out, "artifact {} sha256={} bytes={}", a.name, a.sha256, a.bytes);
        }
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs `command` and writes its artifacts plus `report.txt` into `out`.
/// A solver abort writes `abort_*` dumps before the error is returned.
pub fn run_command(command: Command, cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut writer = ArtifactWriter::new(out)?;
    let mut notes = Vec::new();
    let result = match command {
        Command::Euler => euler_command(cfg, &mut writer, &mut notes),
        Command::Limit => limit_command(cfg, &mut writer, &mut notes),
        Command::Sweep => sweep_command(cfg, &mut writer, &mut notes),
        Command::Verify => verify_command(cfg, &mut writer, &mut notes),
        Command::Subsolution => subsolution_command(cfg, &mut writer, &mut notes),
    };
    let checks = match result {
        Ok(c) => c,
        Err(e) => {
            dump_abort(&mut writer, &e)?;
            return Err(e);
        }
    };
    let report = Report {
        command,
        scenario: cfg.scenario.clone(),
        seed: cfg.seed,
        advisories: cfg.advisories.iter().map(|a| a.message.clone()).collect(),
        notes,
        checks,
        artifacts: writer.artifacts().to_vec(),
    };
    let path = out.join("report.txt");
    std::fs::write(&path, report.render()).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

fn dump_abort(writer: &mut ArtifactWriter, err: &Error) -> Result<()> {
    if let Error::Aborted { reason, snapshot: snap } = err {
        writer.write("abort_rho.csv", snapshot::to_csv(&snap.rho, snap.t).as_bytes())?;
        if let Some(mom) = &snap.mom {
            for (a, c) in mom.components().iter().enumerate() {
                writer.write(&format!("abort_mom{a}.csv"), snapshot::to_csv(c, snap.t).as_bytes())?;
            }
        }
        let text = format!("step = {}\nt = {}\nreason = {reason}\n", snap.step, snap.t);
        writer.write("abort.txt", text.as_bytes())?;
    }
    Ok(())
}

fn euler_config(cfg: &RunConfig, pots: &Potentials, epsilon: f64) -> Result<EulerConfig> {
    let s = &cfg.solver;
    let mut e = EulerConfig::new(epsilon, cfg.law, pots.clone(), s.t_end)?;
    e.cfl = s.cfl;
    e.snapshot_stride = s.snapshot_stride;
    e.rho_floor = s.rho_floor;
    e.coupling = s.coupling;
    e.dt_max = s.dt_max;
    Ok(e)
}

fn diffusion_config(cfg: &RunConfig, pots: &Potentials) -> Result<DiffusionConfig> {
    let mut d = DiffusionConfig::new(cfg.law, pots.clone(), cfg.solver.t_end)?;
    d.snapshot_stride = cfg.solver.snapshot_stride;
    d.dt_max = cfg.solver.dt_max;
    Ok(d)
}

/// Relative mass drift and per-step energy monotonicity of an Euler run.
pub fn euler_run_checks(run: &EulerRun) -> Vec<Check> {
    let m0 = run.records[0].energy.mass;
    let drift = run.records.iter().map(|r| ((r.energy.mass - m0) / m0).abs()).fold(0.0, f64::max);
    let e0 = run.records[0].energy.total();
    let slack = 1e-8 * e0.abs();
    let worst = run
        .records
        .windows(2)
        .map(|w| w[1].energy.total() - w[0].energy.total())
        .fold(f64::NEG_INFINITY, f64::max);
    let bad = run.records.windows(2).filter(|w| w[1].energy.total() - w[0].energy.total() > slack).count();
    vec![
        Check::new("euler mass conservation", drift <= 1e-12, format!("relative drift {drift:.2e}")),
        Check::new(
            "euler energy non-increasing",
            bad == 0,
            format!("{} steps, largest increase {worst:.3e}, {bad} above slack {slack:.2e}", run.records.len() - 1),
        ),
    ]
}

/// Relative mass drift and free-energy monotonicity of a limit run.
pub fn limit_run_checks(traj: &LimitTrajectory) -> Vec<Check> {
    let drift = mass_drift(traj);
    let e0 = traj.free_energy[0].1;
    let slack = 1e-8 * e0.abs();
    let worst = traj.free_energy.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);
    let bad = traj.free_energy.windows(2).filter(|w| w[1].1 - w[0].1 > slack).count();
    vec![
        Check::new("limit mass conservation", drift <= 1e-12, format!("relative drift {drift:.2e}")),
        Check::new(
            "limit free energy non-increasing",
            bad == 0,
            format!("{} steps, largest increase {worst:.3e}, {bad} above slack {slack:.2e}", traj.free_energy.len() - 1),
        ),
    ]
}

fn euler_command(cfg: &RunConfig, w: &mut ArtifactWriter, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let pots = cfg.build_potentials()?;
    let eps = cfg.epsilons()[0];
    if cfg.epsilons().len() > 1 {
        notes.push(format!("euler runs the first ε of the list, {eps}"));
    }
    let ecfg = euler_config(cfg, &pots, eps)?;
    let rho0 = cfg.initial_density();
    let u0 = cfg.initial_velocity(&rho0, &pots);
    let run = run_euler(&ecfg, rho0, &u0)?;
    w.write("euler_steps.csv", run.records_csv().as_bytes())?;
    if cfg.output.snapshots {
        for (k, s) in run.snapshots.iter().enumerate() {
            w.snapshot(cfg, &format!("euler_rho_{k:06}"), &s.rho, s.t)?;
        }
    }
    notes.push(format!("ε = {eps}, {} steps, final t = {}", run.records.len() - 1, run.final_state().t));
    Ok(euler_run_checks(&run))
}

fn limit_csv(traj: &LimitTrajectory) -> String {
    let mut out = String::from("t,free_energy\n");
    for (t, e) in &traj.free_energy {
        let _ = writeln!(out, "{t},{e}");
    }
    out
}

fn limit_command(cfg: &RunConfig, w: &mut ArtifactWriter, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let pots = cfg.build_potentials()?;
    let traj = run_diffusion(&diffusion_config(cfg, &pots)?, cfg.initial_density())?;
    w.write("limit_energy.csv", limit_csv(&traj).as_bytes())?;
    if cfg.output.snapshots {
        for (k, s) in traj.states.iter().enumerate() {
            w.snapshot(cfg, &format!("limit_rho_{k:06}"), &s.rho_bar, s.t)?;
        }
    }
    notes.push(format!("{} steps", traj.free_energy.len() - 1));
    Ok(limit_run_checks(&traj))
}

/// Everything a sweep produces before reporting.
#[derive(Debug)]
pub struct SweepOutcome {
    pub limit: LimitTrajectory,
    pub members: Vec<RunComparison>,
    pub runs: Vec<EulerRun>,
    pub fit: SweepResult,
    /// The common step size, if `solver.shared_dt` is set.
    pub shared_dt: Option<f64>,
}

/// Runs the limit equation and one Euler trajectory per `ε` (in parallel)
/// and compares each against the limit.
///
/// With `solver.shared_dt` all runs use half the smallest stable step over
/// the limit scheme and every `ε` at `t = 0`, so the comparison does not
/// pick up differences between time grids.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    let pots = cfg.build_potentials()?;
    let rho0 = cfg.initial_density();
    let u0 = cfg.initial_velocity(&rho0, &pots);
    let epsilons = cfg.epsilons();
    let mut configs = epsilons.iter().map(|&e| euler_config(cfg, &pots, e)).collect::<Result<Vec<_>>>()?;
    let mut dcfg = diffusion_config(cfg, &pots)?;
    let shared_dt = if cfg.solver.shared_dt {
        let start = EulerState::from_velocity(rho0.clone(), &u0, 0.0)?;
        let mut dt = stable_dt(&rho0, &cfg.law, &pots);
        for c in &configs {
            let mut probe = c.clone();
            probe.t_end = f64::INFINITY;
            dt = dt.min(next_dt(&start, &probe)?);
        }
        let dt = 0.5 * cfg.solver.dt_max.map_or(dt, |cap| dt.min(cap));
        for c in &mut configs {
            c.dt_max = Some(dt);
        }
        dcfg.dt_max = Some(dt);
        Some(dt)
    } else {
        None
    };
    let limit = run_diffusion(&dcfg, rho0.clone())?;
    let solution = LimitSolution::new(&limit, &cfg.law, &pots);
    let results: Vec<Result<(EulerRun, RunComparison)>> = configs
        .par_iter()
        .map(|c| {
            let run = run_euler(c, rho0.clone(), &u0)?;
            let cmp = compare_run(&run, &solution, c)?;
            Ok((run, cmp))
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    let mut members = Vec::with_capacity(results.len());
    for r in results {
        let (run, cmp) = r?;
        runs.push(run);
        members.push(cmp);
    }
    let points: Vec<(f64, f64)> = members.iter().map(|m| (m.epsilon, m.sup_theta)).collect();
    let fit = convergence_fit(&points)?;
    Ok(SweepOutcome { limit, members, runs, fit, shared_dt })
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Relaxation-rate checks on a finished sweep.
pub fn rate_checks(out: &SweepOutcome) -> Vec<Check> {
    let worst_theta0 = out
        .members
        .iter()
        .zip(&out.runs)
        .map(|(m, r)| crate::diagnostics::sweep::relative_theta0(m, r))
        .fold(0.0, f64::max);
    let decreasing = |xs: Vec<f64>| xs.windows(2).all(|w| w[1] < w[0]);
    let l2: Vec<f64> = out.members.iter().map(|m| m.l2_density_gap_max).collect();
    let vel: Vec<f64> = out.members.iter().map(|m| m.velocity_gap_l2l2).collect();
    vec![
        Check::new("well-prepared data", worst_theta0 <= 1e-6, format!("max Θ(0)/mass = {worst_theta0:.2e}")),
        Check::new(
            "sup Θ strictly decreasing in ε",
            out.fit.monotone,
            format!("sup Θ = {}", sci(&out.fit.sup_theta)),
        ),
        Check::new(
            "relaxation order",
            out.fit.fitted_order >= 0.8,
            format!("fitted order {:.4} (target ≥ 0.8)", out.fit.fitted_order),
        ),
        Check::new("density gap decreasing", decreasing(l2.clone()), format!("max_t ‖ρ-ρ̄‖ = {}", sci(&l2))),
        Check::new("velocity gap decreasing", decreasing(vel.clone()), format!("‖√ρ(u-ū)‖ = {}", sci(&vel))),
    ]
}

/// Interaction-smallness and coercivity checks on a finished sweep.
pub fn coercivity_checks(out: &SweepOutcome, c_k: f64) -> Vec<Check> {
    let c_star = out.members.iter().map(|m| m.c_star_max).fold(0.0, f64::max);
    let violations: usize = out.members.iter().map(|m| m.coercivity_violations).sum();
    let small = out.members.iter().all(|m| m.smallness_holds);
    let snapshots: usize = out.members.iter().map(|m| m.records.len()).sum();
    vec![
        Check::new(
            "interaction smallness",
            c_star.is_finite() && small,
            format!("max C* = {c_star:.4}, C_k = {c_k}, 2/C* = {:.4}", 2.0 / c_star),
        ),
        Check::new(
            "coercivity of Θ",
            violations == 0,
            format!("{violations} violations over {snapshots} snapshots"),
        ),
    ]
}

const DIAGNOSTICS_HEADER: &str = "t,mass,E_total,E_free_bar,theta,theta_entropy,theta_kinetic,theta_interaction,dissipation_residual,l2_density_gap,weighted_velocity_gap";

fn diagnostics_csv(m: &RunComparison) -> String {
    let mut out = format!("{DIAGNOSTICS_HEADER}\n");
    for r in &m.records {
        let p = &r.theta_parts;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t, r.mass, r.e_total, r.e_free_bar, r.theta, p.entropy, p.kinetic, p.interaction,
            r.dissipation_residual, r.l2_density_gap, r.weighted_velocity_gap
        );
    }
    out
}

fn sweep_command(cfg: &RunConfig, w: &mut ArtifactWriter, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let out = run_sweep(cfg)?;
    w.write("sweep.csv", sweep_csv(&out.members).as_bytes())?;
    w.write("limit_energy.csv", limit_csv(&out.limit).as_bytes())?;
    for (i, m) in out.members.iter().enumerate() {
        w.write(&format!("sweep_{i}_diagnostics.csv"), diagnostics_csv(m).as_bytes())?;
    }
    if cfg.output.snapshots {
        for (i, run) in out.runs.iter().enumerate() {
            let s = run.final_state();
            w.snapshot(cfg, &format!("sweep_{i}_rho_final"), &s.rho, s.t)?;
        }
        let last = out.limit.states.last().expect("non-empty");
        w.snapshot(cfg, "limit_rho_final", &last.rho_bar, last.t)?;
    }
    if let Some(dt) = out.shared_dt {
        notes.push(format!("shared dt = {dt:e}"));
    }
    notes.push(format!("fitted order {}", out.fit.fitted_order));
    for (e, c) in out.fit.epsilons.iter().zip(&out.fit.constants) {
        notes.push(format!("ε = {e}: sup Θ/ε = {c:.4}"));
    }
    let mut checks = rate_checks(&out);
    checks.extend(coercivity_checks(&out, cfg.potentials.c_k));
    Ok(checks)
}

fn verify_command(cfg: &RunConfig, w: &mut ArtifactWriter, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let seed = cfg.seed;
    let mut checks = suites::entropy_suite(cfg.verify.entropy_pairs, seed);
    for d in [2, 3] {
        checks.push(suites::algebraic_suite(cfg.verify.algebraic_draws, d, seed.wrapping_add(d as u64))?);
    }
    checks.extend(suites::decomposition_suite(cfg.grid, seed));
    let cube = crate::fields::PeriodicGrid::new(3, 8, 1.0)?;
    if cfg.grid.dim() != 3 {
        checks.extend(suites::decomposition_suite(cube, seed));
    }
    checks.push(suites::v_ode_suite()?);
    let pots = cfg.build_potentials()?;
    checks.push(Check::new(
        "kernel even",
        pots.kernel().is_even(),
        format!("‖K‖₁ = {:.4}", pots.kernel().l1_norm()),
    ));
    checks.push(suites::coercivity_suite(&cfg.initial_density(), &pots, &cfg.law, 32, seed));
    let mut table = String::from("check,passed,detail\n");
    for c in &checks {
        let _ = writeln!(table, "{:?},{},{:?}", c.name, c.passed, c.detail);
    }
    w.write("verify.csv", table.as_bytes())?;
    notes.push(format!("{} checks", checks.len()));
    Ok(checks)
}

fn subsolution_command(cfg: &RunConfig, w: &mut ArtifactWriter, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    if cfg.grid.dim() < 2 {
        return Err(Error::Usage("the subsolution study needs d ≥ 2".into()));
    }
    let pots = cfg.build_potentials()?;
    let rho = cfg.initial_density();
    let u0 = cfg.initial_velocity(&rho, &pots);
    let mom = u0.mul_scalar_field(&rho);
    // ρ(t) = ρ₀ - tΔΨ₀ keeps Ψ = Ψ₀ fixed, so ∂tΨ = 0
    let dt_psi = ScalarField::zeros(cfg.grid);
    let (frame, study) = suites::gauge_study(&rho, &mom, dt_psi, &cfg.law, &pots)?;
    let mut checks = suites::decomposition_suite(cfg.grid, cfg.seed);
    checks.extend(study.checks());
    w.snapshot(cfg, "x0_margin", &study.at_pi0.margin, 0.0)?;
    w.snapshot(cfg, "e_gauge", &frame.e_gauge, 0.0)?;

    let steps = 100;
    let dt = cfg.solver.t_end.max(1e-12) / steps as f64;
    let g = mean_force(&rho, &pots);
    let series = solve_v_ode(&vec![g.clone(); steps], &frame.big_v, dt)?;
    let mut table = String::from("t");
    for a in 0..cfg.grid.dim() {
        let _ = write!(table, ",V{a}");
    }
    table.push('\n');
    for (k, v) in series.iter().enumerate() {
        let _ = write!(table, "{}", k as f64 * dt);
        for x in v {
            let _ = write!(table, ",{x}");
        }
        table.push('\n');
    }
    w.write("v_ode.csv", table.as_bytes())?;
    notes.push(format!("Π₀ = {}", study.pi0));
    notes.push(format!("V(0) = {:?}, forcing G = {g:?}", frame.big_v));
    Ok(checks)
}
