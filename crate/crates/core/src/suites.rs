//! Property suites shared by the `verify` and `subsolution` commands and
//! the acceptance tests. Each suite returns named pass/fail checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::coercivity_check;
use crate::entropy::{certify_compact_range, certify_pairs, EntropyLaw};
use crate::error::Result;
use crate::fields::{PeriodicGrid, Potentials, ScalarField, SpectralPlan, VectorField};
use crate::subsolution::{
    algebraic_inequality_margin, decompose_momentum, kinetic_bound_violations, solve_v_ode,
    x0_margin, SubsolutionFrame, SymMatrix, TensorField, X0Margin,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn law(m: f64) -> EntropyLaw {
    EntropyLaw::new(m, 1.0).expect("valid exponent")
}

/// Densities spread log-uniformly over `[0.1, 10]`.
fn density_samples(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| 0.1 * 100f64.powf(i as f64 / (n - 1) as f64))
}

/// Thermodynamic relations, the relative-entropy lower bounds, the power-law identity and
/// the tail condition, over `pairs` random `(ρ, ρ̄) ∈ (0, 10]²`.
pub fn entropy_suite(pairs: usize, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let exponents = [1.0, 1.5, 2.0, 3.0];

    let step = 1e-5;
    let mut worst_fd = 0.0f64;
    let mut worst_euler = 0.0f64;
    for &m in &exponents {
        let l = law(m);
        for rho in density_samples(200) {
            let fd = (l.p(rho + step) - l.p(rho - step)) / (2.0 * step);
            let exact = rho * l.h_second(rho);
            worst_fd = worst_fd.max((fd - exact).abs() / exact.abs());
            let lhs = rho * l.h_prime(rho);
            let rhs = l.p(rho) + l.h(rho);
            worst_euler = worst_euler.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300));
        }
    }
    checks.push(Check::new(
        "thermodynamic consistency",
        worst_fd <= 1e-6 && worst_euler <= 1e-10,
        format!("max rel. error p' vs ρh'' = {worst_fd:.2e}, ρh' vs p+h = {worst_euler:.2e}"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<(f64, f64)> = (0..pairs)
        .map(|_| (10.0 * (1.0 - rng.gen::<f64>()), 10.0 * (1.0 - rng.gen::<f64>())))
        .collect();
    for m in [1.0, 1.5, 2.0] {
        let cert = certify_pairs(&law(m), &sample);
        checks.push(Check::new(
            format!("quadratic lower bound m={m}"),
            cert.passed() && cert.worst_margin >= 0.0,
            format!(
                "{} pairs, {} violations, worst margin {:.3e}",
                cert.samples_checked, cert.violations, cert.worst_margin
            ),
        ));
    }
    let compact: Vec<(f64, f64)> = sample.iter().map(|&(r, rb)| (r, 0.5 + 0.15 * rb)).collect();
    let cert = certify_compact_range(&law(3.0), &compact);
    checks.push(Check::new(
        "split lower bound m=3",
        cert.passed(),
        format!(
            "R0 = {:?}, C1 = {:.3e}, C2 = {:?}, {} violations",
            cert.r0, cert.c1, cert.c2, cert.violations
        ),
    ));

    let mut worst_identity = 0.0f64;
    for m in [1.5, 2.0, 2.5, 3.0] {
        let l = law(m);
        for &(r, rb) in &sample {
            let h = l.rel_h(r, rb);
            if h == 0.0 {
                continue;
            }
            worst_identity = worst_identity.max((l.rel_p(r, rb) - (m - 1.0) * h).abs() / h);
        }
    }
    checks.push(Check::new(
        "relative pressure = (m-1) relative entropy",
        worst_identity <= 1e-12,
        format!("max rel. error {worst_identity:.2e}"),
    ));

    let mut worst_tail = f64::NEG_INFINITY;
    for m in [2.5, 3.0, 4.0] {
        let l = law(m);
        let a = l.tail_constant().expect("m > 2");
        for rho in density_samples(200) {
            let excess = l.p_second(rho).abs() - a * l.p_prime(rho) / rho;
            worst_tail = worst_tail.max(excess / (a * l.p_prime(rho) / rho));
        }
    }
    checks.push(Check::new(
        "tail condition with A = m-1",
        worst_tail <= 1e-12,
        format!("max (|p''| - A p'/ρ)/(A p'/ρ) = {worst_tail:.2e}"),
    ));
    checks
}

/// Random symmetric trace-free `d×d` matrix with entries in `[-1, 1]`.
fn trace_free(rng: &mut impl Rng, d: usize) -> SymMatrix {
    let mut h = [[0.0; 3]; 3];
    for i in 0..d {
        for j in i..d {
            let x = rng.gen_range(-1.0..=1.0);
            h[i][j] = x;
            h[j][i] = x;
        }
    }
    let tr: f64 = (0..d).map(|i| h[i][i]).sum::<f64>() / d as f64;
    for (i, row) in h.iter_mut().enumerate().take(d) {
        row[i] -= tr;
    }
    h
}

/// Smallest algebraic-inequality margin over `draws` random `(M, r, H)`;
/// every fourth draw sits on the equality case.
pub fn algebraic_suite(draws: usize, d: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for k in 0..draws {
        let m: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let r = rng.gen_range(0.1..=2.0);
        let mut h = trace_free(&mut rng, d);
        if k % 4 == 0 {
            // equality case: H is the trace-free part of M⊗M/r
            let m2: f64 = m.iter().map(|x| x * x).sum();
            for i in 0..d {
                for j in 0..d {
                    h[i][j] = m[i] * m[j] / r - if i == j { m2 / (r * d as f64) } else { 0.0 };
                }
            }
        }
        worst = worst.min(algebraic_inequality_margin(&m, r, &h)?);
    }
    Ok(Check::new(
        format!("algebraic inequality d={d}"),
        worst >= -1e-12,
        format!("{draws} draws, min margin {worst:.3e}"),
    ))
}

/// Smooth random momentum: a few random Fourier modes plus a mean.
pub fn random_momentum(grid: PeriodicGrid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let l = grid.half_width();
    let modes: Vec<(Vec<f64>, [f64; 3], f64)> = (0..6)
        .map(|_| {
            let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
            let amp = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            (k, amp, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let mean = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    VectorField::from_fn(grid, |x| {
        let mut out = mean;
        for (k, amp, phase) in &modes {
            let arg: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() * std::f64::consts::PI / l + phase;
            for a in 0..d {
                out[a] += amp[a] * arg.sin();
            }
        }
        out
    })
}

/// Helmholtz projection properties on a seeded random momentum.
pub fn decomposition_suite(grid: PeriodicGrid, seed: u64) -> Vec<Check> {
    let mom = random_momentum(grid, seed);
    let parts = decompose_momentum(&mom);
    let plan = SpectralPlan::new(grid);
    let again = decompose_momentum(&parts.reconstruct());
    let idem = again.v.sub(&parts.v).max_abs().max(again.psi.sub(&parts.psi).max_abs()).max(
        again.big_v.iter().zip(&parts.big_v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
    );
    let recon = parts.reconstruct().sub(&mom).max_abs();
    let div = plan.divergence(&parts.v).max_abs();
    let means = parts.v.mean().iter().fold(0.0f64, |a, m| a.max(m.abs()));
    let d = grid.dim();
    vec![
        Check::new(format!("decomposition idempotent d={d}"), idem <= 1e-12, format!("max change {idem:.2e}")),
        Check::new(
            format!("decomposition exact d={d}"),
            recon <= 1e-10 && div <= 1e-10 && means <= 1e-10 && parts.psi.mean().abs() <= 1e-12,
            format!("reconstruction {recon:.2e}, div v {div:.2e}, mean v {means:.2e}"),
        ),
    ]
}

/// The exponential integrator against `V(t) = G + (V₀ - G)e^{-t}`.
pub fn v_ode_suite() -> Result<Check> {
    let dt = 1e-2;
    let g = [0.3, -1.1, 0.7];
    let v0 = [1.0, 0.5, -2.0];
    let series = solve_v_ode(&vec![g.to_vec(); 500], &v0, dt)?;
    let mut worst = 0.0f64;
    for (k, v) in series.iter().enumerate() {
        let e = (-(k as f64) * dt).exp();
        for a in 0..3 {
            worst = worst.max((v[a] - (g[a] + (v0[a] - g[a]) * e)).abs());
        }
    }
    let decay = solve_v_ode(&vec![vec![0.0]; 500], &[1.0], dt)?;
    for (k, v) in decay.iter().enumerate() {
        worst = worst.max((v[0] - (-(k as f64) * dt).exp()).abs());
    }
    Ok(Check::new("V equation closed form", worst <= 1e-12, format!("max error {worst:.2e}")))
}

/// Outcome of the gauge study on one frame.
#[derive(Debug, Clone)]
pub struct GaugeStudy {
    pub pi0: f64,
    pub at_pi0: X0Margin,
    pub below_violations: usize,
    pub kinetic_violations: usize,
}

impl GaugeStudy {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::new(
                "subsolution margin negative at computed gauge",
                self.at_pi0.passes(),
                format!("Π₀ = {:.6e}, max margin {:.3e}", self.pi0, self.at_pi0.margin.max()),
            ),
            Check::new(
                "gauge 0.9·Π₀ violates",
                self.below_violations >= 1,
                format!("{} violating cells", self.below_violations),
            ),
            Check::new(
                "kinetic energy bound",
                self.kinetic_violations == 0,
                format!("{} cells break ½|m|²/ρ < e", self.kinetic_violations),
            ),
        ]
    }
}

/// Computes `Π₀` for `F = 0`, then checks `Π₀` and `0.9·Π₀`.
pub fn gauge_study(
    rho: &ScalarField,
    mom: &VectorField,
    dt_psi: ScalarField,
    law: &EntropyLaw,
    pots: &Potentials,
) -> Result<(SubsolutionFrame, GaugeStudy)> {
    let frame = SubsolutionFrame::new(rho, mom, dt_psi, law, pots, 0.0)?;
    let f = TensorField::zeros(*rho.grid());
    let pi0 = x0_margin(&frame, &f, rho, law)?.pi0;
    let frame = frame.with_pi(pi0);
    let at_pi0 = x0_margin(&frame, &f, rho, law)?;
    let below = x0_margin(&frame.with_pi(0.9 * pi0), &f, rho, law)?;
    let kinetic_violations = kinetic_bound_violations(&frame, rho, &at_pi0.margin);
    Ok((frame, GaugeStudy { pi0, at_pi0, below_violations: below.violations(), kinetic_violations }))
}

/// Coercivity witnesses on `samples` seeded perturbations of `rho_bar`.
pub fn coercivity_suite(
    rho_bar: &ScalarField,
    pots: &Potentials,
    law: &EntropyLaw,
    samples: usize,
    seed: u64,
) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = *rho_bar.grid();
    let mut worst_c = 0.0f64;
    let mut violations = 0;
    for s in 0..samples {
        let amp = rng.gen_range(0.01..0.3);
        let pert = random_momentum(grid, seed.wrapping_add(s as u64 + 1));
        let rho = rho_bar.zip_map(pert.component(0), |rb, p| rb * (1.0 + amp * p.tanh()));
        let c = coercivity_check(&rho, rho_bar, pots.kernel(), law, pots.c_k());
        worst_c = worst_c.max(c.c_star);
        if !c.holds() {
            violations += 1;
        }
    }
    Check::new(
        "coercivity on random fields",
        violations == 0 && worst_c.is_finite(),
        format!("{samples} samples, max C* = {worst_c:.3}, {violations} violations"),
    )
}
