use crate::entropy::EntropyLaw;
use crate::fields::{integrate, KernelOperator, ScalarField};

/// Interaction energy of the difference against its relative entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlsCheck {
    /// `|∫(ρ-ρ̄)K∗(ρ-ρ̄)|`
    pub lhs: f64,
    /// `∫h(ρ|ρ̄)`
    pub rhs: f64,
    /// `lhs/rhs`; 0 when both vanish, infinite when only `rhs` does.
    pub c_star: f64,
}

pub fn hls_check(
    rho: &ScalarField,
    rho_bar: &ScalarField,
    kernel: &KernelOperator,
    law: &EntropyLaw,
) -> HlsCheck {
    let delta = rho.sub(rho_bar);
    let lhs = integrate(&kernel.apply(&delta).mul(&delta)).abs();
    let rhs = integrate(&rho.zip_map(rho_bar, |r, rb| law.rel_h(r, rb)));
    let c_star = if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    };
    HlsCheck { lhs, rhs, c_star }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityCheck {
    /// `[∫h(ρ|ρ̄) + (C_k/2)∫(ρ-ρ̄)K∗(ρ-ρ̄)] / ∫h(ρ|ρ̄)`, 1 when the denominator vanishes.
    pub ratio: f64,
    /// `1 - C_k C*/2`
    pub bound: f64,
    pub c_star: f64,
}

impl CoercivityCheck {
    pub fn holds(&self) -> bool {
        self.ratio >= self.bound - 1e-12 * self.bound.abs().max(1.0)
    }

    /// Whether `C_k < 2/C*`, which makes `bound` positive.
    pub fn small_enough(&self, c_k: f64) -> bool {
        c_k * self.c_star < 2.0
    }
}

pub fn coercivity_check(
    rho: &ScalarField,
    rho_bar: &ScalarField,
    kernel: &KernelOperator,
    law: &EntropyLaw,
    c_k: f64,
) -> CoercivityCheck {
    let hls = hls_check(rho, rho_bar, kernel, law);
    let ratio = if hls.rhs == 0.0 {
        1.0
    } else {
        let delta = rho.sub(rho_bar);
        let pairing = integrate(&kernel.apply(&delta).mul(&delta));
        (hls.rhs + 0.5 * c_k * pairing) / hls.rhs
    };
    CoercivityCheck {
        ratio,
        bound: 1.0 - 0.5 * c_k * hls.c_star,
        c_star: hls.c_star,
    }
}
