use crate::error::{Error, Result};
use crate::fields::{divergence, gradient, integrate, ScalarField};
use crate::hyperbolic::{EulerConfig, EulerState};
use crate::parabolic::{DiffusionState, LimitVelocity};

/// The three parts of `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThetaParts {
    /// `(1/ε)∫h(ρ|ρ̄)`
    pub entropy: f64,
    /// `½∫ρ|u-ū|²`
    pub kinetic: f64,
    /// `(C_k/2ε)∫(ρ-ρ̄)K∗(ρ-ρ̄)`
    pub interaction: f64,
}

impl ThetaParts {
    pub fn total(&self) -> f64 {
        self.entropy + self.kinetic + self.interaction
    }
}

/// Per-snapshot comparison of an Euler state with the limit solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub e_total: f64,
    /// `(1/ε)` times the limit free energy, matching the scaling of `e_total`.
    pub e_free_bar: f64,
    pub theta: f64,
    pub theta_parts: ThetaParts,
    pub dissipation_residual: f64,
    /// `‖ρ-ρ̄‖_{L²}`
    pub l2_density_gap: f64,
    /// `‖√ρ(u-ū)‖_{L²}`
    pub weighted_velocity_gap: f64,
}

fn ensure_positive(rho_bar: &ScalarField) -> Result<()> {
    match rho_bar.values().iter().position(|&r| !(r > 0.0)) {
        Some(i) => Err(Error::Domain(format!(
            "limit density {} at cell {i} is not positive",
            rho_bar.values()[i]
        ))),
        None => Ok(()),
    }
}

/// `Θ(t)` split into its parts.
pub fn theta(
    state: &EulerState,
    limit: (&DiffusionState, &LimitVelocity),
    cfg: &EulerConfig,
) -> Result<ThetaParts> {
    let (bar, vel) = limit;
    state.grid().ensure_same(bar.rho_bar.grid())?;
    ensure_positive(&bar.rho_bar)?;
    let eps = cfg.epsilon;
    let rho = &state.rho;
    let rel = rho.zip_map(&bar.rho_bar, |r, rb| cfg.law.rel_h(r, rb));
    let w = state.velocity().sub(&vel.u_bar);
    let interaction = if cfg.potentials.c_k() == 0.0 {
        0.0
    } else {
        let delta = rho.sub(&bar.rho_bar);
        0.5 * cfg.potentials.c_k() * integrate(&cfg.potentials.convolve(&delta).mul(&delta)) / eps
    };
    Ok(ThetaParts {
        entropy: integrate(&rel) / eps,
        kinetic: 0.5 * integrate(&w.norm_squared().mul(rho)),
        interaction,
    })
}

pub fn diagnostics_record(
    state: &EulerState,
    limit: (&DiffusionState, &LimitVelocity),
    cfg: &EulerConfig,
    dissipation_residual: f64,
) -> Result<DiagnosticsRecord> {
    let parts = theta(state, limit, cfg)?;
    let (bar, vel) = limit;
    let energy = super::energy::total_energy(state, cfg);
    let delta = state.rho.sub(&bar.rho_bar);
    let w = state.velocity().sub(&vel.u_bar);
    Ok(DiagnosticsRecord {
        t: state.t,
        mass: energy.mass,
        e_total: energy.total(),
        e_free_bar: super::energy::free_energy(&bar.rho_bar, &cfg.law, &cfg.potentials) / cfg.epsilon,
        theta: parts.total(),
        theta_parts: parts,
        dissipation_residual,
        l2_density_gap: integrate(&delta.mul(&delta)).sqrt(),
        weighted_velocity_gap: integrate(&w.norm_squared().mul(&state.rho)).sqrt(),
    })
}

/// Time integrands of the relative-entropy identity at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityRates {
    /// `-(1/ε)∫ρ|u-ū|²`
    pub damping: f64,
    /// `-∫ρ∇ū:(u-ū)⊗(u-ū)`
    pub j1: f64,
    /// `-(C_k/ε)∫(K∗(ρ-ρ̄)) div((ρ-ρ̄)ū)`
    pub j2: f64,
    /// `-(1/ε)∫p(ρ|ρ̄) div ū`
    pub j3: f64,
    /// `-∫(ρ/ρ̄)ē·(u-ū)`; zero when `ē` is unavailable.
    pub j4: f64,
}

pub fn identity_rates(
    state: &EulerState,
    limit: (&DiffusionState, &LimitVelocity),
    cfg: &EulerConfig,
) -> Result<IdentityRates> {
    let (bar, vel) = limit;
    state.grid().ensure_same(bar.rho_bar.grid())?;
    ensure_positive(&bar.rho_bar)?;
    let eps = cfg.epsilon;
    let g = *state.grid();
    let rho = &state.rho;
    let u_bar = &vel.u_bar;
    let w = state.velocity().sub(u_bar);

    let mut quad = ScalarField::zeros(g);
    for i in 0..g.dim() {
        let grad_i = gradient(u_bar.component(i));
        for j in 0..g.dim() {
            let term = grad_i.component(j).mul(w.component(i)).mul(w.component(j));
            quad = quad.add(&term);
        }
    }
    let div_u = divergence(u_bar);
    let rel_p = rho.zip_map(&bar.rho_bar, |r, rb| cfg.law.rel_p(r, rb));
    let j2 = if cfg.potentials.c_k() == 0.0 {
        0.0
    } else {
        let delta = rho.sub(&bar.rho_bar);
        let transport = divergence(&u_bar.mul_scalar_field(&delta));
        -cfg.potentials.c_k() * integrate(&cfg.potentials.convolve(&delta).mul(&transport)) / eps
    };
    let j4 = vel.e_bar.as_ref().map_or(0.0, |e| {
        -integrate(&e.dot(&w).mul(&rho.zip_map(&bar.rho_bar, |r, rb| r / rb)))
    });
    Ok(IdentityRates {
        damping: -integrate(&w.norm_squared().mul(rho)) / eps,
        j1: -integrate(&quad.mul(rho)),
        j2,
        j3: -integrate(&rel_p.mul(&div_u)) / eps,
        j4,
    })
}
