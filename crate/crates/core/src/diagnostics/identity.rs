use crate::error::{Error, Result};
use crate::hyperbolic::{EulerConfig, EulerState};
use crate::parabolic::{LimitSolution, ResidualQuality};

use super::theta::{identity_rates, theta, IdentityRates};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityTerm {
    Damping,
    J1,
    J2,
    J3,
    J4,
}

/// Both sides of the relative-entropy identity on `[0, t]`, right side
/// integrated in time by the trapezoid rule over the Euler snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityBalance {
    pub t: f64,
    /// `Θ(t) - Θ(0)`
    pub lhs: f64,
    pub damping: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    pub nodes: usize,
    /// False if `ē` was missing or one-sided at an interior node.
    pub e_bar_complete: bool,
}

impl IdentityBalance {
    pub fn rhs(&self) -> f64 {
        self.damping + self.j1 + self.j2 + self.j3 + self.j4
    }

    /// `|LHS - RHS| / max(|LHS|, |RHS|, 1e-30)`.
    pub fn residual(&self) -> f64 {
        let (l, r) = (self.lhs, self.rhs());
        (l - r).abs() / l.abs().max(r.abs()).max(1e-30)
    }

    /// Copy with `delta` added to one time-integrated term.
    pub fn perturbed(&self, term: IdentityTerm, delta: f64) -> Self {
        let mut out = *self;
        match term {
            IdentityTerm::Damping => out.damping += delta,
            IdentityTerm::J1 => out.j1 += delta,
            IdentityTerm::J2 => out.j2 += delta,
            IdentityTerm::J3 => out.j3 += delta,
            IdentityTerm::J4 => out.j4 += delta,
        }
        out
    }
}

/// The balance at every Euler snapshot, cumulative from the first one.
pub fn identity_series(
    euler: &[EulerState],
    limit: &LimitSolution,
    cfg: &EulerConfig,
) -> Result<Vec<IdentityBalance>> {
    let Some(first) = euler.first() else {
        return Err(Error::Usage("empty Euler trajectory".into()));
    };
    let mut out = Vec::with_capacity(euler.len());
    let (bar, vel) = limit.at(first.t)?;
    let theta0 = theta(first, (&bar, &vel), cfg)?.total();
    let mut prev: IdentityRates = identity_rates(first, (&bar, &vel), cfg)?;
    let mut acc = IdentityBalance {
        t: first.t,
        lhs: 0.0,
        damping: 0.0,
        j1: 0.0,
        j2: 0.0,
        j3: 0.0,
        j4: 0.0,
        nodes: 1,
        e_bar_complete: vel.e_bar.is_some(),
    };
    out.push(acc);
    let last = euler.len() - 1;
    for (k, state) in euler.iter().enumerate().skip(1) {
        let (bar, vel) = limit.at(state.t)?;
        let rates = identity_rates(state, (&bar, &vel), cfg)?;
        let h = 0.5 * (state.t - acc.t);
        acc.damping += h * (prev.damping + rates.damping);
        acc.j1 += h * (prev.j1 + rates.j1);
        acc.j2 += h * (prev.j2 + rates.j2);
        acc.j3 += h * (prev.j3 + rates.j3);
        acc.j4 += h * (prev.j4 + rates.j4);
        acc.t = state.t;
        acc.nodes += 1;
        let interior_ok = k == last || vel.quality == ResidualQuality::Centered;
        acc.e_bar_complete &= vel.e_bar.is_some() && interior_ok;
        acc.lhs = theta(state, (&bar, &vel), cfg)?.total() - theta0;
        out.push(acc);
        prev = rates;
    }
    Ok(out)
}

/// Balance on `[t₀, t]` using the snapshots up to `t`.
pub fn identity_balance(
    euler: &[EulerState],
    limit: &LimitSolution,
    cfg: &EulerConfig,
    t: f64,
) -> Result<IdentityBalance> {
    let tol = 1e-12 * t.abs().max(1.0);
    let upto = euler.partition_point(|s| s.t <= t + tol);
    let Some(end) = euler[..upto].last() else {
        return Err(Error::Usage(format!("no Euler snapshot at or before t = {t}")));
    };
    if (end.t - t).abs() > tol {
        return Err(Error::Usage(format!(
            "no Euler snapshot at t = {t} (nearest earlier is {})",
            end.t
        )));
    }
    Ok(*identity_series(&euler[..upto], limit, cfg)?
        .last()
        .expect("series is non-empty"))
}

pub fn relative_entropy_residual(
    euler: &[EulerState],
    limit: &LimitSolution,
    cfg: &EulerConfig,
    t: f64,
) -> Result<f64> {
    Ok(identity_balance(euler, limit, cfg, t)?.residual())
}
