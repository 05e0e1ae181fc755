use crate::error::{Error, Result};
use crate::fields::integrate;
use crate::hyperbolic::{EulerConfig, EulerRun};
use crate::parabolic::LimitSolution;

use super::coercivity::coercivity_check;
use super::theta::{diagnostics_record, DiagnosticsRecord};

/// Log-log fit of `sup_t Θ` against `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub sup_theta: Vec<f64>,
    /// Least-squares slope of `log sup Θ` against `log ε`.
    pub fitted_order: f64,
    /// `sup Θ / ε` per member.
    pub constants: Vec<f64>,
    /// Whether `sup Θ` strictly decreases along the sweep.
    pub monotone: bool,
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits `sup Θ ≈ C ε^order`. Needs at least three points with strictly
/// decreasing positive `ε` and positive `sup Θ`.
pub fn convergence_fit(points: &[(f64, f64)]) -> Result<SweepResult> {
    if points.len() < 3 {
        return Err(Error::Usage(format!(
            "a convergence fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(e, s)| !(e > 0.0 && s > 0.0 && e.is_finite() && s.is_finite())) {
        return Err(Error::Domain("epsilon and sup Θ must be positive and finite".into()));
    }
    if points.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::Usage("epsilons must be strictly decreasing".into()));
    }
    let epsilons: Vec<f64> = points.iter().map(|p| p.0).collect();
    let sup_theta: Vec<f64> = points.iter().map(|p| p.1).collect();
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = sup_theta.iter().map(|s| s.ln()).collect();
    Ok(SweepResult {
        fitted_order: least_squares_slope(&lx, &ly),
        constants: points.iter().map(|&(e, s)| s / e).collect(),
        monotone: sup_theta.windows(2).all(|w| w[1] < w[0]),
        epsilons,
        sup_theta,
    })
}

/// One sweep member compared against the limit solution at every snapshot.
#[derive(Debug, Clone)]
pub struct RunComparison {
    pub epsilon: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub sup_theta: f64,
    pub theta0: f64,
    /// `max_t ‖ρ-ρ̄‖_{L²}`
    pub l2_density_gap_max: f64,
    /// `(∫₀ᵀ ∫ρ|u-ū|²)^{1/2}`, trapezoid in time.
    pub velocity_gap_l2l2: f64,
    /// Largest `C*` over the snapshots.
    pub c_star_max: f64,
    pub coercivity_violations: usize,
    /// `C_k < 2/C*` at every snapshot.
    pub smallness_holds: bool,
}

pub fn compare_run(run: &EulerRun, limit: &LimitSolution, cfg: &EulerConfig) -> Result<RunComparison> {
    let mut records = Vec::with_capacity(run.snapshots.len());
    let mut c_star_max: f64 = 0.0;
    let mut violations = 0;
    let mut small = true;
    for state in &run.snapshots {
        let (bar, vel) = limit.at(state.t)?;
        let k = run.records.partition_point(|r| r.t < state.t);
        let residual = run
            .records
            .get(k)
            .filter(|r| r.t == state.t)
            .map_or(f64::NAN, |r| r.dissipation_residual);
        records.push(diagnostics_record(state, (&bar, &vel), cfg, residual)?);
        let c = coercivity_check(
            &state.rho,
            &bar.rho_bar,
            cfg.potentials.kernel(),
            &cfg.law,
            cfg.potentials.c_k(),
        );
        c_star_max = c_star_max.max(c.c_star);
        if !c.holds() {
            violations += 1;
        }
        small &= c.small_enough(cfg.potentials.c_k());
    }
    let mut gap_sq = 0.0;
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        gap_sq += 0.5 * dt * (w[0].weighted_velocity_gap.powi(2) + w[1].weighted_velocity_gap.powi(2));
    }
    Ok(RunComparison {
        epsilon: cfg.epsilon,
        sup_theta: records.iter().map(|r| r.theta).fold(f64::NEG_INFINITY, f64::max),
        theta0: records.first().map_or(f64::NAN, |r| r.theta),
        l2_density_gap_max: records.iter().map(|r| r.l2_density_gap).fold(0.0, f64::max),
        velocity_gap_l2l2: gap_sq.sqrt(),
        c_star_max,
        coercivity_violations: violations,
        smallness_holds: small,
        records,
    })
}

pub const SWEEP_CSV_HEADER: &str =
    "epsilon,sup_theta,theta0,fitted_order_running,l2_density_gap_max,velocity_gap_l2l2";

/// Sweep summary; the running order uses the members up to and including each row.
pub fn sweep_csv(members: &[RunComparison]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for (i, m) in members.iter().enumerate() {
        let running = if i >= 1 {
            let lx: Vec<f64> = members[..=i].iter().map(|m| m.epsilon.ln()).collect();
            let ly: Vec<f64> = members[..=i].iter().map(|m| m.sup_theta.ln()).collect();
            least_squares_slope(&lx, &ly)
        } else {
            f64::NAN
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.epsilon, m.sup_theta, m.theta0, running, m.l2_density_gap_max, m.velocity_gap_l2l2
        ));
    }
    out
}

/// Mass-normalized `Θ(0)`, the well-preparedness measure.
pub fn relative_theta0(member: &RunComparison, run: &EulerRun) -> f64 {
    member.theta0 / integrate(&run.snapshots[0].rho)
}
