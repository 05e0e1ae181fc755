//! Finite-volume integrator for the damped nonlocal Euler system
//!
//! ```text
//! ρ_t + div(ρu) = 0
//! (ρu)_t + div(ρu⊗u) + ∇p(ρ)/ε = -(C_k/ε)(∇K∗ρ)ρ - ρu/ε - ρ∇Φ/ε
//! ```
//!
//! Each step is Strang split into half source, full flux, half source.
//! The source update is linearly implicit in the damping,
//! `m ← (m - (dt/ε) g) / (1 + dt/ε)` with `g` frozen at the substep start.
//!
//! Where the pressure gradient lives is set by [`PressureCoupling`]. With
//! [`PressureCoupling::Source`] the pressure joins the forces in `g` through
//! the chemical potential, `g = ρ∇(h'(ρ) + C_k K∗ρ + Φ)`, and the flux stage
//! is pressureless transport with a central mass flux. As `ε → 0` a step then
//! collapses onto one forward-Euler step of the limit scheme in
//! [`crate::parabolic`]. With [`PressureCoupling::Flux`] the pressure `p/ε`
//! sits in a classic Rusanov flux with acoustic speed `|u| + √(p'/ε)`; this
//! adds `O(dx·√(p'/ε))` numerical diffusion to the mass equation.

use serde::{Deserialize, Serialize};

use crate::diagnostics::energy::{damping_rate, total_energy, EnergyBreakdown};
use crate::entropy::EntropyLaw;
use crate::error::{AbortSnapshot, Error, Result};
use crate::fields::{gradient, integrate, PeriodicGrid, Potentials, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PressureCoupling {
    #[default]
    Source,
    Flux,
}

#[derive(Debug, Clone)]
pub struct EulerConfig {
    pub epsilon: f64,
    pub law: EntropyLaw,
    pub potentials: Potentials,
    /// Courant number in `(0, 1]`.
    pub cfl: f64,
    pub t_end: f64,
    /// Keep every `snapshot_stride`-th step (the final state is always kept).
    pub snapshot_stride: usize,
    pub rho_floor: f64,
    pub coupling: PressureCoupling,
    /// Upper bound on the step, used to put several runs on one time grid.
    pub dt_max: Option<f64>,
}

impl EulerConfig {
    pub const DEFAULT_CFL: f64 = 0.45;
    pub const DEFAULT_RHO_FLOOR: f64 = 1e-10;

    pub fn new(epsilon: f64, law: EntropyLaw, potentials: Potentials, t_end: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            law,
            potentials,
            cfl: Self::DEFAULT_CFL,
            t_end,
            snapshot_stride: 1,
            rho_floor: Self::DEFAULT_RHO_FLOOR,
            coupling: PressureCoupling::default(),
            dt_max: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Domain(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Domain(format!("t_end must be ≥ 0, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Domain("snapshot_stride must be ≥ 1".into()));
        }
        if !(self.rho_floor.is_finite() && self.rho_floor >= 0.0) {
            return Err(Error::Domain(format!("rho_floor must be ≥ 0, got {}", self.rho_floor)));
        }
        if let Some(dt) = self.dt_max {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Domain(format!("dt_max must be > 0, got {dt}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.potentials.grid()
    }
}

/// Conservative variables `(ρ, ρu)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerState {
    pub rho: ScalarField,
    pub mom: VectorField,
    pub t: f64,
}

impl EulerState {
    pub fn new(rho: ScalarField, mom: VectorField, t: f64) -> Result<Self> {
        rho.grid().ensure_same(mom.grid())?;
        Ok(Self { rho, mom, t })
    }

    pub fn at_rest(rho: ScalarField) -> Self {
        let mom = VectorField::zeros(*rho.grid());
        Self { rho, mom, t: 0.0 }
    }

    pub fn from_velocity(rho: ScalarField, u: &VectorField, t: f64) -> Result<Self> {
        rho.grid().ensure_same(u.grid())?;
        let mom = u.mul_scalar_field(&rho);
        Ok(Self { rho, mom, t })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.rho.grid()
    }

    pub fn velocity(&self) -> VectorField {
        self.mom.div_scalar_field(&self.rho)
    }

    pub fn mass(&self) -> f64 {
        integrate(&self.rho)
    }
}

/// `u₀ = -∇(h'(ρ₀) + C_k K∗ρ₀ + Φ)`, the limit velocity of `ρ₀`.
pub fn well_prepared_velocity(
    rho0: &ScalarField,
    law: &EntropyLaw,
    potentials: &Potentials,
) -> VectorField {
    gradient(&potentials.chemical_potential(law, rho0)).scale(-1.0)
}

fn ensure_positive(rho: &ScalarField) -> Result<()> {
    match rho.values().iter().position(|&r| !(r > 0.0)) {
        Some(i) => Err(Error::State(format!(
            "density {} at cell {i} is not positive",
            rho.values()[i]
        ))),
        None => Ok(()),
    }
}

/// `max over cells and axes of |u_a| + √(p'(ρ)/ε)`.
pub fn max_wave_speed(state: &EulerState, cfg: &EulerConfig) -> Result<f64> {
    ensure_positive(&state.rho)?;
    let mut speed: f64 = 0.0;
    for (i, &r) in state.rho.values().iter().enumerate() {
        let c = (cfg.law.p_prime(r) / cfg.epsilon).sqrt();
        for a in 0..state.grid().dim() {
            let u = state.mom.component(a).values()[i] / r;
            speed = speed.max(u.abs() + c);
        }
    }
    Ok(speed)
}

/// Largest step the flux stage accepts for `state`.
pub fn cfl_limit(state: &EulerState, cfg: &EulerConfig) -> Result<f64> {
    let speed = max_wave_speed(state, cfg)?;
    Ok(if speed > 0.0 {
        cfg.cfl * state.grid().dx() / speed
    } else {
        f64::INFINITY
    })
}

/// Conservative Rusanov update of the transport terms over `dt`.
pub fn flux_step(state: &EulerState, cfg: &EulerConfig, dt: f64) -> Result<EulerState> {
    let limit = cfl_limit(state, cfg)?;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Usage(format!(
            "dt = {dt} violates the CFL bound {limit}"
        )));
    }
    let g = *state.grid();
    let dim = g.dim();
    let acoustic = cfg.coupling == PressureCoupling::Flux;
    let rho = state.rho.values();
    let mom: Vec<&[f64]> = state.mom.components().iter().map(|c| c.values()).collect();
    let pressure: Vec<f64> = if acoustic {
        rho.iter().map(|&r| cfg.law.p(r) / cfg.epsilon).collect()
    } else {
        vec![0.0; g.len()]
    };
    let sound: Vec<f64> = if acoustic {
        rho.iter().map(|&r| (cfg.law.p_prime(r) / cfg.epsilon).sqrt()).collect()
    } else {
        vec![0.0; g.len()]
    };

    let ratio = dt / g.dx();
    let mut new_rho = rho.to_vec();
    let mut new_mom: Vec<Vec<f64>> = mom.iter().map(|c| c.to_vec()).collect();
    // face flux between cell i and its right neighbour along one axis
    let mut face_rho = vec![0.0; g.len()];
    let mut face_mom = vec![vec![0.0; g.len()]; dim];
    for axis in 0..dim {
        for i in 0..g.len() {
            let j = g.shifted(i, axis, 1);
            let (ul, ur) = (mom[axis][i] / rho[i], mom[axis][j] / rho[j]);
            let alpha = (ul.abs() + sound[i]).max(ur.abs() + sound[j]);
            face_rho[i] = 0.5 * (mom[axis][i] + mom[axis][j]);
            if acoustic {
                face_rho[i] -= 0.5 * alpha * (rho[j] - rho[i]);
            }
            for b in 0..dim {
                let mut fl = mom[b][i] * ul;
                let mut fr = mom[b][j] * ur;
                if b == axis {
                    fl += pressure[i];
                    fr += pressure[j];
                }
                face_mom[b][i] = 0.5 * (fl + fr) - 0.5 * alpha * (mom[b][j] - mom[b][i]);
            }
        }
        for i in 0..g.len() {
            let l = g.shifted(i, axis, -1);
            new_rho[i] -= ratio * (face_rho[i] - face_rho[l]);
            for b in 0..dim {
                new_mom[b][i] -= ratio * (face_mom[b][i] - face_mom[b][l]);
            }
        }
    }
    if let Some(i) = new_rho.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::State(format!(
            "flux step produced density {} at cell {i}",
            new_rho[i]
        )));
    }
    let comps = new_mom.into_iter().map(|c| ScalarField::from_vec(g, c)).collect();
    Ok(EulerState {
        rho: ScalarField::from_vec(g, new_rho),
        mom: VectorField::from_components(g, comps),
        t: state.t,
    })
}

/// The frozen part `g` of the source, so that `∂t m = -(g + m)/ε`.
pub fn source_force(state: &EulerState, cfg: &EulerConfig) -> VectorField {
    let potential = match cfg.coupling {
        PressureCoupling::Source => cfg.potentials.chemical_potential(&cfg.law, &state.rho),
        PressureCoupling::Flux => cfg.potentials.field_potential(&state.rho),
    };
    gradient(&potential).mul_scalar_field(&state.rho)
}

/// Damping and force update over `dt`; density is untouched.
pub fn source_step(state: &EulerState, cfg: &EulerConfig, dt: f64) -> EulerState {
    let beta = dt / cfg.epsilon;
    let force = source_force(state, cfg);
    let mom = state.mom.axpy(-beta, &force).scale(1.0 / (1.0 + beta));
    EulerState {
        rho: state.rho.clone(),
        mom,
        t: state.t,
    }
}

/// One CSV row of the per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub energy: EnergyBreakdown,
    /// `ΔE + dt·(D_n + D_{n+1})/2` with `D = (1/ε)∫ρ|u|²`; zero on step 0.
    pub dissipation_residual: f64,
}

impl StepRecord {
    pub const CSV_HEADER: &'static str =
        "step,t,dt,mass,kinetic,internal,interaction,confinement,E_total,dissipation_residual";

    pub fn csv_row(&self) -> String {
        let e = &self.energy;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.t,
            self.dt,
            e.mass,
            e.kinetic,
            e.internal,
            e.interaction,
            e.confinement,
            e.total(),
            self.dissipation_residual
        )
    }
}

/// Snapshots and per-step records of one trajectory.
#[derive(Debug, Clone)]
pub struct EulerRun {
    pub snapshots: Vec<EulerState>,
    pub records: Vec<StepRecord>,
}

impl EulerRun {
    pub fn final_state(&self) -> &EulerState {
        self.snapshots.last().expect("a run keeps its initial state")
    }

    pub fn records_csv(&self) -> String {
        let mut out = String::from(StepRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

fn check_state(state: &EulerState, floor: f64) -> Result<()> {
    if !state.rho.all_finite() || !state.mom.all_finite() {
        return Err(Error::State("non-finite value".into()));
    }
    if let Some(i) = state.rho.values().iter().position(|&r| r < floor) {
        return Err(Error::State(format!(
            "density {} at cell {i} fell below the floor {floor}",
            state.rho.values()[i]
        )));
    }
    Ok(())
}

/// One Strang step `S(dt/2) F(dt) S(dt/2)`; `dt` is shrunk if the half
/// source step raised the wave speed past the CFL bound. Returns the new
/// state and the step actually taken.
pub fn strang_step(state: &EulerState, cfg: &EulerConfig, mut dt: f64) -> Result<(EulerState, f64)> {
    loop {
        let half = source_step(state, cfg, 0.5 * dt);
        let limit = cfl_limit(&half, cfg)?;
        if dt > limit {
            dt = limit;
            continue;
        }
        let mut next = source_step(&flux_step(&half, cfg, dt)?, cfg, 0.5 * dt);
        next.t = state.t + dt;
        return Ok((next, dt));
    }
}

pub fn next_dt(state: &EulerState, cfg: &EulerConfig) -> Result<f64> {
    let mut dt = cfl_limit(state, cfg)?.min(0.5 * cfg.epsilon);
    if let Some(cap) = cfg.dt_max {
        dt = dt.min(cap);
    }
    Ok(dt.min(cfg.t_end - state.t))
}

pub fn run_euler(cfg: &EulerConfig, rho0: ScalarField, u0: &VectorField) -> Result<EulerRun> {
    run_euler_observed(cfg, EulerState::from_velocity(rho0, u0, 0.0)?, &mut |_, _| {})
}

/// Advances `initial` to `cfg.t_end`, calling `observer` after every step
/// (and once for the initial state).
pub fn run_euler_observed(
    cfg: &EulerConfig,
    initial: EulerState,
    observer: &mut dyn FnMut(&EulerState, &StepRecord),
) -> Result<EulerRun> {
    cfg.validate()?;
    cfg.grid().ensure_same(initial.grid())?;
    let abort = |state: &EulerState, step: usize, err: Error| Error::Aborted {
        reason: err.to_string(),
        snapshot: Box::new(AbortSnapshot {
            step,
            t: state.t,
            rho: state.rho.clone(),
            mom: Some(state.mom.clone()),
        }),
    };
    check_state(&initial, cfg.rho_floor.max(f64::MIN_POSITIVE))
        .map_err(|e| abort(&initial, 0, e))?;

    let mut energy = total_energy(&initial, cfg);
    let mut rate = damping_rate(&initial, cfg.epsilon);
    let first = StepRecord {
        step: 0,
        t: initial.t,
        dt: 0.0,
        energy,
        dissipation_residual: 0.0,
    };
    observer(&initial, &first);
    let mut records = vec![first];
    let mut snapshots = vec![initial.clone()];
    let mut state = initial;
    let mut step = 0;
    // stop once the remaining time is round-off
    while cfg.t_end - state.t > 1e-12 * cfg.t_end.max(1.0) {
        let dt = next_dt(&state, cfg).map_err(|e| abort(&state, step, e))?;
        let (next, dt) = strang_step(&state, cfg, dt).map_err(|e| abort(&state, step, e))?;
        check_state(&next, cfg.rho_floor).map_err(|e| abort(&state, step, e))?;
        step += 1;
        let e_next = total_energy(&next, cfg);
        let rate_next = damping_rate(&next, cfg.epsilon);
        let record = StepRecord {
            step,
            t: next.t,
            dt,
            energy: e_next,
            dissipation_residual: e_next.total() - energy.total() + 0.5 * dt * (rate + rate_next),
        };
        observer(&next, &record);
        records.push(record);
        energy = e_next;
        rate = rate_next;
        state = next;
        if step % cfg.snapshot_stride == 0 {
            snapshots.push(state.clone());
        }
    }
    if snapshots.last().map(|s| s.t) != Some(state.t) {
        snapshots.push(state);
    }
    Ok(EulerRun { snapshots, records })
}
