use crate::entropy::EntropyLaw;
use crate::fields::{integrate, Potentials, ScalarField, VectorField};
use crate::hyperbolic::{EulerConfig, EulerState};

/// The parts of the damped-Euler total energy, each already scaled by its
/// `1/ε` weight where one applies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub mass: f64,
    /// `½∫ρ|u|²`
    pub kinetic: f64,
    /// `(1/ε)∫h(ρ)`
    pub internal: f64,
    /// `(C_k/2ε)∫(K∗ρ)ρ`
    pub interaction: f64,
    /// `(1/ε)∫ρΦ`
    pub confinement: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic + self.internal + self.interaction + self.confinement
    }
}

pub fn total_energy(state: &EulerState, cfg: &EulerConfig) -> EnergyBreakdown {
    energy_parts(
        &state.rho,
        Some(&state.mom),
        cfg.epsilon,
        &cfg.law,
        &cfg.potentials,
    )
}

pub(crate) fn energy_parts(
    rho: &ScalarField,
    mom: Option<&VectorField>,
    epsilon: f64,
    law: &EntropyLaw,
    pots: &Potentials,
) -> EnergyBreakdown {
    let kinetic = mom.map_or(0.0, |m| {
        0.5 * integrate(&m.norm_squared().zip_map(rho, |q, r| q / r))
    });
    let interaction = if pots.c_k() == 0.0 {
        0.0
    } else {
        0.5 * pots.c_k() * integrate(&pots.convolve(rho).mul(rho)) / epsilon
    };
    EnergyBreakdown {
        mass: integrate(rho),
        kinetic,
        internal: integrate(&rho.map(|r| law.h(r))) / epsilon,
        interaction,
        confinement: integrate(&rho.mul(pots.phi())) / epsilon,
    }
}

/// `(1/ε)∫ρ|u|²`, the damping dissipation rate.
pub fn damping_rate(state: &EulerState, epsilon: f64) -> f64 {
    integrate(&state.mom.norm_squared().zip_map(&state.rho, |q, r| q / r)) / epsilon
}

/// Free energy of the limit equation, `∫h(ρ̄) + (C_k/2)(K∗ρ̄)ρ̄ + ρ̄Φ`.
pub fn free_energy(rho_bar: &ScalarField, law: &EntropyLaw, pots: &Potentials) -> f64 {
    energy_parts(rho_bar, None, 1.0, law, pots).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{PeriodicGrid, PotentialSpec};

    fn config(grid: PeriodicGrid, phi: PotentialSpec) -> EulerConfig {
        let pots = Potentials::new(grid, &PotentialSpec::Zero, &phi, 0.0).unwrap();
        EulerConfig::new(1.0, EntropyLaw::new(2.0, 1.0).unwrap(), pots, 1.0).unwrap()
    }

    #[test]
    fn uniform_quadratic_energy() {
        let g = PeriodicGrid::new(1, 16, 1.0).unwrap();
        let cfg = config(g, PotentialSpec::Zero);
        let state = EulerState::at_rest(ScalarField::constant(g, 1.0));
        let e = total_energy(&state, &cfg);
        assert!((e.total() - 2.0).abs() < 1e-14);
        assert!((e.mass - 2.0).abs() < 1e-14);
    }

    #[test]
    fn confinement_shift_and_kinetic_scaling() {
        let g = PeriodicGrid::new(2, 8, 1.0).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * x[0] * x[1]);
        let u = VectorField::from_fn(g, |x| [x[1].sin(), 0.5, 0.0]);
        let a = config(g, PotentialSpec::CosineMode { amplitude: 0.2, modes: vec![1, 0] });
        let shifted: Vec<f64> = a.potentials.phi().values().iter().map(|v| v + 0.7).collect();
        let b = config(g, PotentialSpec::Tabulated { values: shifted });
        let state = EulerState::from_velocity(rho.clone(), &u, 0.0).unwrap();
        let (ea, eb) = (total_energy(&state, &a), total_energy(&state, &b));
        assert!((eb.total() - ea.total() - 0.7 * ea.mass).abs() < 1e-12);

        let fast = EulerState::from_velocity(rho, &u.scale(2.0), 0.0).unwrap();
        assert!((total_energy(&fast, &a).kinetic - 4.0 * ea.kinetic).abs() < 1e-12);
    }
}
