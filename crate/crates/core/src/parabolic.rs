//! Explicit solver for the aggregation-diffusion limit
//! `∂t ρ̄ = div(ρ̄ ∇μ(ρ̄))`, `μ = h'(ρ̄) + C_k K∗ρ̄ + Φ`, and the limit
//! velocity `ū = -∇μ(ρ̄)` with its momentum residual
//! `ē = ∂t(ρ̄ū) + div(ρ̄ū⊗ū)`.
//!
//! Because `ρ∇h'(ρ) = ∇p(ρ)` the right side equals
//! `Δp(ρ̄) + C_k div(ρ̄∇K∗ρ̄) + div(ρ̄∇Φ)`. It is discretized in the
//! chemical-potential form with the centered operators of
//! [`crate::fields::ops`], the same form the Euler source step relaxes to.

use crate::diagnostics::energy::free_energy;
use crate::entropy::EntropyLaw;
use crate::error::{AbortSnapshot, Error, Result};
use crate::fields::ops::divergence_of_outer;
use crate::fields::{divergence, gradient, integrate, Potentials, ScalarField, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionState {
    pub rho_bar: ScalarField,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct DiffusionConfig {
    pub law: EntropyLaw,
    pub potentials: Potentials,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub dt_max: Option<f64>,
}

impl DiffusionConfig {
    pub fn new(law: EntropyLaw, potentials: Potentials, t_end: f64) -> Result<Self> {
        let cfg = Self {
            law,
            potentials,
            t_end,
            snapshot_stride: 1,
            dt_max: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Domain(format!("t_end must be ≥ 0, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Domain("snapshot_stride must be ≥ 1".into()));
        }
        if let Some(dt) = self.dt_max {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Domain(format!("dt_max must be > 0, got {dt}")));
            }
        }
        Ok(())
    }
}

/// `ū = -∇μ(ρ̄)`.
pub fn reconstruct_u_bar(rho_bar: &ScalarField, law: &EntropyLaw, pots: &Potentials) -> VectorField {
    gradient(&pots.chemical_potential(law, rho_bar)).scale(-1.0)
}

/// Discrete `div(ρ̄∇μ(ρ̄)) = -div(ρ̄ū)`.
pub fn diffusion_rhs(state: &DiffusionState, law: &EntropyLaw, pots: &Potentials) -> ScalarField {
    let flux = reconstruct_u_bar(&state.rho_bar, law, pots).mul_scalar_field(&state.rho_bar);
    divergence(&flux).scale(-1.0)
}

/// Largest forward-Euler step: `0.2 dx²/max p'` and `0.2 dx/max|C_k∇K∗ρ̄ + ∇Φ|`.
pub fn stable_dt(rho_bar: &ScalarField, law: &EntropyLaw, pots: &Potentials) -> f64 {
    let dx = rho_bar.grid().dx();
    let stiff = rho_bar.values().iter().fold(0.0f64, |m, &r| m.max(law.p_prime(r)));
    let drift = pots.force(rho_bar).max_abs();
    let mut dt = f64::INFINITY;
    if stiff > 0.0 {
        dt = dt.min(0.2 * dx * dx / stiff);
    }
    if drift > 0.0 {
        dt = dt.min(0.2 * dx / drift);
    }
    dt
}

/// Stored snapshots of a limit run plus per-step free energies.
#[derive(Debug, Clone)]
pub struct LimitTrajectory {
    pub states: Vec<DiffusionState>,
    /// `(t, 𝓔(ρ̄))` after every step, starting at `t = 0`.
    pub free_energy: Vec<(f64, f64)>,
}

pub fn run_diffusion(cfg: &DiffusionConfig, rho0: ScalarField) -> Result<LimitTrajectory> {
    cfg.validate()?;
    cfg.potentials.grid().ensure_same(rho0.grid())?;
    let abort = |state: &DiffusionState, step: usize, reason: String| Error::Aborted {
        reason,
        snapshot: Box::new(AbortSnapshot {
            step,
            t: state.t,
            rho: state.rho_bar.clone(),
            mom: None,
        }),
    };
    let mut state = DiffusionState { rho_bar: rho0, t: 0.0 };
    if let Some(i) = state.rho_bar.values().iter().position(|&r| !(r > 0.0)) {
        return Err(abort(&state, 0, format!("initial density not positive at cell {i}")));
    }
    let (law, pots) = (&cfg.law, &cfg.potentials);
    let mut energies = vec![(0.0, free_energy(&state.rho_bar, law, pots))];
    let mut states = vec![state.clone()];
    let mut step = 0;
    while cfg.t_end - state.t > 1e-12 * cfg.t_end.max(1.0) {
        let mut dt = stable_dt(&state.rho_bar, law, pots).min(cfg.t_end - state.t);
        if let Some(cap) = cfg.dt_max {
            dt = dt.min(cap);
        }
        let rhs = diffusion_rhs(&state, law, pots);
        let next = DiffusionState {
            rho_bar: state.rho_bar.axpy(dt, &rhs),
            t: state.t + dt,
        };
        if !next.rho_bar.all_finite() {
            return Err(abort(&state, step, "non-finite density".into()));
        }
        if let Some(i) = next.rho_bar.values().iter().position(|&r| !(r > 0.0)) {
            return Err(abort(&state, step, format!("positivity lost at cell {i}")));
        }
        step += 1;
        state = next;
        energies.push((state.t, free_energy(&state.rho_bar, law, pots)));
        if step % cfg.snapshot_stride == 0 {
            states.push(state.clone());
        }
    }
    if states.last().map(|s| s.t) != Some(state.t) {
        states.push(state);
    }
    Ok(LimitTrajectory {
        states,
        free_energy: energies,
    })
}

/// How `ē` was obtained at a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualQuality {
    /// Three-point centered difference in time.
    Centered,
    /// Two-point one-sided difference at a trajectory end; first order only.
    OneSided,
    /// Fewer than two snapshots.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitVelocity {
    pub u_bar: VectorField,
    pub e_bar: Option<VectorField>,
    pub quality: ResidualQuality,
    pub t: f64,
}

/// Limit trajectory with `ū` and `ē` evaluated at every snapshot.
#[derive(Debug, Clone)]
pub struct LimitSolution {
    pub states: Vec<DiffusionState>,
    pub velocities: Vec<LimitVelocity>,
}

impl LimitSolution {
    pub fn new(traj: &LimitTrajectory, law: &EntropyLaw, pots: &Potentials) -> Self {
        let states = traj.states.clone();
        let u: Vec<VectorField> = states
            .iter()
            .map(|s| reconstruct_u_bar(&s.rho_bar, law, pots))
            .collect();
        let m: Vec<VectorField> = states
            .iter()
            .zip(&u)
            .map(|(s, u)| u.mul_scalar_field(&s.rho_bar))
            .collect();
        let n = states.len();
        let velocities = (0..n)
            .map(|k| {
                let t = states[k].t;
                let (dm, quality) = if n < 2 {
                    (None, ResidualQuality::Unavailable)
                } else if k == 0 || k == n - 1 {
                    let (a, b) = if k == 0 { (0, 1) } else { (n - 2, n - 1) };
                    let h = states[b].t - states[a].t;
                    (Some(m[b].sub(&m[a]).scale(1.0 / h)), ResidualQuality::OneSided)
                } else {
                    let h1 = t - states[k - 1].t;
                    let h2 = states[k + 1].t - t;
                    let d = m[k - 1]
                        .scale(-h2 / (h1 * (h1 + h2)))
                        .axpy((h2 - h1) / (h1 * h2), &m[k])
                        .axpy(h1 / (h2 * (h1 + h2)), &m[k + 1]);
                    (Some(d), ResidualQuality::Centered)
                };
                let e_bar = dm.map(|d| d.add(&divergence_of_outer(&states[k].rho_bar, &u[k], &u[k])));
                LimitVelocity {
                    u_bar: u[k].clone(),
                    e_bar,
                    quality,
                    t,
                }
            })
            .collect();
        Self { states, velocities }
    }

    pub fn t_end(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.t)
    }

    /// Linear interpolation in time of `(ρ̄, ū, ē)`.
    pub fn at(&self, t: f64) -> Result<(DiffusionState, LimitVelocity)> {
        let n = self.states.len();
        let (t0, t1) = (self.states[0].t, self.t_end());
        let tol = 1e-12 * t1.abs().max(1.0);
        if n == 0 || t < t0 - tol || t > t1 + tol {
            return Err(Error::Usage(format!(
                "time {t} outside the limit trajectory [{t0}, {t1}]"
            )));
        }
        if let Some(k) = self.states.iter().position(|s| (s.t - t).abs() <= tol) {
            return Ok((self.states[k].clone(), self.velocities[k].clone()));
        }
        let k = self.states.partition_point(|s| s.t <= t).clamp(1, n - 1);
        let (a, b) = (&self.states[k - 1], &self.states[k]);
        let w = (t - a.t) / (b.t - a.t);
        let (va, vb) = (&self.velocities[k - 1], &self.velocities[k]);
        let lerp_v = |x: &VectorField, y: &VectorField| x.scale(1.0 - w).axpy(w, y);
        let e_bar = match (&va.e_bar, &vb.e_bar) {
            (Some(x), Some(y)) => Some(lerp_v(x, y)),
            _ => None,
        };
        let quality = if va.quality == ResidualQuality::Centered && vb.quality == ResidualQuality::Centered {
            ResidualQuality::Centered
        } else if e_bar.is_some() {
            ResidualQuality::OneSided
        } else {
            ResidualQuality::Unavailable
        };
        Ok((
            DiffusionState {
                rho_bar: a.rho_bar.scale(1.0 - w).axpy(w, &b.rho_bar),
                t,
            },
            LimitVelocity {
                u_bar: lerp_v(&va.u_bar, &vb.u_bar),
                e_bar,
                quality,
                t,
            },
        ))
    }
}

/// Relative mass drift `|M(t) - M(0)|/M(0)` over the stored snapshots.
pub fn mass_drift(traj: &LimitTrajectory) -> f64 {
    let m0 = integrate(&traj.states[0].rho_bar);
    traj.states
        .iter()
        .map(|s| (integrate(&s.rho_bar) - m0).abs() / m0)
        .fold(0.0, f64::max)
}
