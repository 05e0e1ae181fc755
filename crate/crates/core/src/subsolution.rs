//! Building blocks of the convex-integration reformulation: the momentum
//! decomposition `ρu = v + V + ∇Ψ`, the ODE fixing `V`, the tensor `ℍ[v]`,
//! the kinetic-energy gauge `e` and the strict subsolution inequality.
//!
//! All spatial operators here are spectral, so that the decomposition is an
//! exact orthogonal projection on the discrete torus.

use nalgebra::Matrix3;

use crate::entropy::EntropyLaw;
use crate::error::{Error, Result};
use crate::fields::spectral::C64;
use crate::fields::{PeriodicGrid, Potentials, ScalarField, SpectralPlan, VectorField};

/// Small symmetric matrix stored in the top-left `d×d` block.
pub type SymMatrix = [[f64; 3]; 3];

/// Symmetric matrix field, `d×d` components in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: PeriodicGrid,
    comps: Vec<ScalarField>,
}

impl TensorField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        let d = grid.dim();
        Self { grid, comps: vec![ScalarField::zeros(grid); d * d] }
    }

    /// Field whose entry `(i, j)` is `f(x)[i][j]`.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([f64; 3]) -> SymMatrix) -> Self {
        let d = grid.dim();
        let samples: Vec<SymMatrix> = (0..grid.len()).map(|idx| f(grid.center_of(idx))).collect();
        let comps = (0..d * d)
            .map(|c| ScalarField::from_vec(grid, samples.iter().map(|m| m[c / d][c % d]).collect()))
            .collect();
        Self { grid, comps }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i * self.grid.dim() + j]
    }

    pub fn at(&self, idx: usize) -> SymMatrix {
        let d = self.grid.dim();
        let mut m = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = self.comps[i * d + j].values()[idx];
            }
        }
        m
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, comps: self.comps.iter().map(|f| f.scale(c)).collect() }
    }

    /// Largest `|A_ij - A_ji|` over all cells.
    pub fn max_asymmetry(&self) -> f64 {
        let d = self.grid.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                worst = worst.max(self.component(i, j).sub(self.component(j, i)).max_abs());
            }
        }
        worst
    }

    /// Largest `|tr A|` over all cells.
    pub fn max_trace(&self) -> f64 {
        let d = self.grid.dim();
        let mut tr = ScalarField::zeros(self.grid);
        for i in 0..d {
            tr = tr.add(self.component(i, i));
        }
        tr.max_abs()
    }

    /// Row-wise divergence `(div A)_i = Σ_j ∂_j A_ij`, spectral.
    pub fn divergence(&self, plan: &SpectralPlan) -> VectorField {
        let d = self.grid.dim();
        let rows = (0..d)
            .map(|i| {
                let row = VectorField::from_components(
                    self.grid,
                    (0..d).map(|j| self.component(i, j).clone()).collect(),
                );
                plan.divergence(&row)
            })
            .collect();
        VectorField::from_components(self.grid, rows)
    }
}

/// `ρu = v + V + ∇Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumParts {
    /// Divergence-free, mean-zero part.
    pub v: VectorField,
    /// Spatial mean.
    pub big_v: Vec<f64>,
    /// Mean-zero potential of the curl-free part.
    pub psi: ScalarField,
}

impl MomentumParts {
    pub fn grad_psi(&self) -> VectorField {
        SpectralPlan::new(*self.psi.grid()).gradient(&self.psi)
    }

    pub fn reconstruct(&self) -> VectorField {
        self.v.add(&self.grad_psi()).add_constant(&self.big_v)
    }
}

/// Spectral Helmholtz decomposition of a momentum field.
pub fn decompose_momentum(mom: &VectorField) -> MomentumParts {
    let g = *mom.grid();
    let d = g.dim();
    let plan = SpectralPlan::new(g);
    let big_v = mom.mean();
    let hats: Vec<Vec<C64>> = mom.components().iter().map(|c| plan.forward(c.values())).collect();
    let zero = C64::new(0.0, 0.0);
    let mut psi_hat = vec![zero; g.len()];
    let mut v_hat = hats.clone();
    for idx in 0..g.len() {
        let k = plan.wavevector(idx);
        let k2: f64 = k[..d].iter().map(|x| x * x).sum();
        if idx == 0 {
            for comp in v_hat.iter_mut() {
                comp[0] = zero;
            }
            continue;
        }
        if k2 == 0.0 {
            continue;
        }
        let k_dot_m: C64 = (0..d).map(|a| hats[a][idx] * k[a]).sum();
        // m̂ = ik ψ̂ + v̂ with k·v̂ = 0
        psi_hat[idx] = C64::new(0.0, -1.0) * k_dot_m / k2;
        for a in 0..d {
            v_hat[a][idx] -= k_dot_m * (k[a] / k2);
        }
    }
    let v = VectorField::from_components(
        g,
        v_hat.into_iter().map(|h| ScalarField::from_vec(g, plan.inverse_real(h))).collect(),
    );
    MomentumParts { v, big_v, psi: ScalarField::from_vec(g, plan.inverse_real(psi_hat)) }
}

/// Mean-zero `Ψ` with `ΔΨ = -∂tρ`.
pub fn psi_from_density_rate(drho_dt: &ScalarField) -> ScalarField {
    SpectralPlan::new(*drho_dt.grid()).solve_poisson(&drho_dt.scale(-1.0))
}

/// `∂tΨ` from `Δ∂tΨ = -∂ttρ`.
pub fn dt_psi_from_density(d2rho_dt2: &ScalarField) -> ScalarField {
    psi_from_density_rate(d2rho_dt2)
}

/// `-|Ω|⁻¹∫ρ(∇K∗ρ + ∇Φ)`, the forcing of the `V` equation.
pub fn mean_force(rho: &ScalarField, pots: &Potentials) -> Vec<f64> {
    let f = pots.force(rho).mul_scalar_field(rho);
    f.mean().into_iter().map(|x| -x).collect()
}

/// Integrates `V' + V = G(t)` with `G` held constant on each step, exactly.
/// Returns `V` at `t = 0, dt, 2dt, …`, one entry more than `forcing`.
pub fn solve_v_ode(forcing: &[Vec<f64>], v0: &[f64], dt: f64) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    if let Some(bad) = forcing.iter().find(|g| g.len() != v0.len()) {
        return Err(Error::Usage(format!(
            "forcing has {} components, V0 has {}",
            bad.len(),
            v0.len()
        )));
    }
    let decay = (-dt).exp();
    let mut out = Vec::with_capacity(forcing.len() + 1);
    out.push(v0.to_vec());
    for g in forcing {
        let prev = out.last().expect("non-empty");
        out.push(g.iter().zip(prev).map(|(&g, &v)| g + (v - g) * decay).collect());
    }
    Ok(out)
}

fn symmetrized(a: &SymMatrix, d: usize) -> Result<SymMatrix> {
    let mut scale = 1.0f64;
    for row in a.iter().take(d) {
        for x in row.iter().take(d) {
            if !x.is_finite() {
                return Err(Error::Usage("matrix has non-finite entries".into()));
            }
            scale = scale.max(x.abs());
        }
    }
    let mut s = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            if (a[i][j] - a[j][i]).abs() > 1e-10 * scale {
                return Err(Error::Usage(format!(
                    "matrix is not symmetric: A[{i}][{j}] = {}, A[{j}][{i}] = {}",
                    a[i][j], a[j][i]
                )));
            }
            s[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    Ok(s)
}

/// Largest eigenvalue of the symmetric `d×d` block of `a`, `d ∈ {1, 2, 3}`.
pub fn lambda_max(a: &SymMatrix, d: usize) -> Result<f64> {
    let s = symmetrized(a, d)?;
    match d {
        1 => Ok(s[0][0]),
        2 => {
            let mid = 0.5 * (s[0][0] + s[1][1]);
            Ok(mid + (0.5 * (s[0][0] - s[1][1])).hypot(s[0][1]))
        }
        3 => {
            let m = Matrix3::from_fn(|i, j| s[i][j]);
            Ok(m.symmetric_eigenvalues().max())
        }
        _ => Err(Error::Usage(format!("dimension {d} is not supported"))),
    }
}

/// `(d/2)λ_max[M⊗M/r - H] - ½|M|²/r`; nonnegative whenever `H` is trace-free.
pub fn algebraic_inequality_margin(m: &[f64], r: f64, h: &SymMatrix) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    let d = m.len();
    let mut a = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            a[i][j] = m[i] * m[j] / r - h[i][j];
        }
    }
    let m2: f64 = m.iter().map(|x| x * x).sum();
    Ok(0.5 * d as f64 * lambda_max(&a, d)? - 0.5 * m2 / r)
}

/// `ℍ[v] = ∇w + ∇ᵀw - (2/d) div w 𝕀` where
/// `-div ℍ = f - mean(f)`, solved mode by mode.
pub fn h_tensor(f: &VectorField) -> TensorField {
    let g = *f.grid();
    let d = g.dim();
    let plan = SpectralPlan::new(g);
    let hats: Vec<Vec<C64>> = f.components().iter().map(|c| plan.forward(c.values())).collect();
    // symbol of the operator is |k|²𝕀 + (1 - 2/d) k kᵀ
    let beta = 1.0 - 2.0 / d as f64;
    let alpha = beta / (1.0 + beta);
    let zero = C64::new(0.0, 0.0);
    let mut w_hat = vec![vec![zero; g.len()]; d];
    for idx in 0..g.len() {
        let k = plan.wavevector(idx);
        let k2: f64 = k[..d].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let k_dot_f: C64 = (0..d).map(|a| hats[a][idx] * k[a]).sum();
        for a in 0..d {
            w_hat[a][idx] = (hats[a][idx] - k_dot_f * (alpha * k[a] / k2)) / k2;
        }
    }
    let w: Vec<ScalarField> =
        w_hat.into_iter().map(|h| ScalarField::from_vec(g, plan.inverse_real(h))).collect();
    let grads: Vec<VectorField> = w.iter().map(|wi| plan.gradient(wi)).collect();
    let div_w = plan.divergence(&VectorField::from_components(g, w));
    let mut comps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut c = grads[i].component(j).add(grads[j].component(i));
            if i == j {
                c = c.axpy(-2.0 / d as f64, &div_w);
            }
            comps.push(c);
        }
    }
    TensorField { grid: g, comps }
}

/// Inputs and derived quantities at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionFrame {
    pub v: VectorField,
    pub big_v: Vec<f64>,
    pub psi: ScalarField,
    pub dt_psi: ScalarField,
    pub h_field: TensorField,
    pub pi: f64,
    /// `Π - (d/2)(p(ρ) + ∂tΨ)`
    pub e_gauge: ScalarField,
}

impl SubsolutionFrame {
    /// Frame for the momentum `mom = ρu` with `V` taken as its mean.
    ///
    /// `ℍ` balances `𝔈 - mean(𝔈)` with
    /// `𝔈 = -ρ(∇K∗ρ + ∇Φ) - (v + V + ∇Ψ)`.
    pub fn new(
        rho: &ScalarField,
        mom: &VectorField,
        dt_psi: ScalarField,
        law: &EntropyLaw,
        pots: &Potentials,
        pi: f64,
    ) -> Result<Self> {
        let g = *rho.grid();
        g.ensure_same(mom.grid())?;
        g.ensure_same(dt_psi.grid())?;
        g.ensure_same(pots.grid())?;
        if let Some(i) = rho.values().iter().position(|&r| !(r > 0.0)) {
            return Err(Error::Domain(format!(
                "density {} at cell {i} is not positive",
                rho.values()[i]
            )));
        }
        let parts = decompose_momentum(mom);
        let forcing = pots.force(rho).mul_scalar_field(rho).add(mom).scale(-1.0);
        let h_field = h_tensor(&forcing);
        let half_d = 0.5 * g.dim() as f64;
        let e_gauge = rho.zip_map(&dt_psi, |r, dp| pi - half_d * (law.p(r) + dp));
        Ok(Self { v: parts.v, big_v: parts.big_v, psi: parts.psi, dt_psi, h_field, pi, e_gauge })
    }

    pub fn momentum(&self) -> VectorField {
        MomentumParts { v: self.v.clone(), big_v: self.big_v.clone(), psi: self.psi.clone() }
            .reconstruct()
    }

    /// Same frame with a different gauge level `Π`.
    pub fn with_pi(&self, pi: f64) -> Self {
        let mut out = self.clone();
        out.e_gauge = self.e_gauge.add_scalar(pi - self.pi);
        out.pi = pi;
        out
    }
}

/// Pointwise subsolution margin and the gauge level that makes it pass.
#[derive(Debug, Clone, PartialEq)]
pub struct X0Margin {
    /// `(d/2)λ_max[m⊗m/ρ - F + ℍ] - e`; negative means the cell passes.
    pub margin: ScalarField,
    /// Smallest `Π` (up to a relative `1e-9` guard) with the margin negative everywhere.
    pub pi0: f64,
}

impl X0Margin {
    pub fn passes(&self) -> bool {
        self.margin.values().iter().all(|&m| m < 0.0)
    }

    pub fn violations(&self) -> usize {
        self.margin.values().iter().filter(|&&m| m >= 0.0).count()
    }
}

pub fn x0_margin(
    frame: &SubsolutionFrame,
    f: &TensorField,
    rho: &ScalarField,
    law: &EntropyLaw,
) -> Result<X0Margin> {
    let g = *rho.grid();
    g.ensure_same(f.grid())?;
    g.ensure_same(frame.v.grid())?;
    let d = g.dim();
    let half_d = 0.5 * d as f64;
    let m = frame.momentum();
    let mut lam = Vec::with_capacity(g.len());
    for idx in 0..g.len() {
        let (mi, r) = (m.at(idx), rho.values()[idx]);
        let (fi, hi) = (f.at(idx), frame.h_field.at(idx));
        let mut a = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                a[i][j] = mi[i] * mi[j] / r - fi[i][j] + hi[i][j];
            }
        }
        lam.push(half_d * lambda_max(&a, d)?);
    }
    let lam = ScalarField::from_vec(g, lam);
    let margin = lam.sub(&frame.e_gauge);
    let pressure_part =
        rho.zip_map(&frame.dt_psi, |r, dp| half_d * (law.p(r) + dp));
    let s = lam.add(&pressure_part).max();
    let pi0 = s + (1e-9 * s.abs()).max(1e-12);
    Ok(X0Margin { margin, pi0 })
}

/// Cells where the margin is negative but `½|m|²/ρ < e` fails.
pub fn kinetic_bound_violations(
    frame: &SubsolutionFrame,
    rho: &ScalarField,
    margin: &ScalarField,
) -> usize {
    let kinetic = frame.momentum().norm_squared().zip_map(rho, |m2, r| 0.5 * m2 / r);
    (0..rho.grid().len())
        .filter(|&i| margin.values()[i] < 0.0 && !(kinetic.values()[i] < frame.e_gauge.values()[i]))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PotentialSpec;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid2(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(2, n, 1.0).unwrap()
    }

    fn sample_momentum(g: PeriodicGrid) -> VectorField {
        VectorField::from_fn(g, |x| {
            let (a, b) = (PI * x[0], PI * x[1]);
            [0.3 + a.sin() * b.cos() + (2.0 * b).cos(), -0.1 + (a + b).cos() - 0.5 * a.cos(), 0.0]
        })
    }

    #[test]
    fn constant_momentum_is_all_mean() {
        let g = grid2(16);
        let p = decompose_momentum(&VectorField::constant(g, &[0.7, -1.2]));
        assert!(p.v.max_abs() < 1e-14);
        assert!(p.psi.max_abs() < 1e-14);
        assert!((p.big_v[0] - 0.7).abs() < 1e-14 && (p.big_v[1] + 1.2).abs() < 1e-14);
    }

    #[test]
    fn gradient_momentum_recovers_potential() {
        let g = grid2(32);
        let psi = ScalarField::from_fn(g, |x| (PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
        let mom = VectorField::from_fn(g, |x| {
            [
                PI * (PI * x[0]).cos() * (2.0 * PI * x[1]).cos(),
                -2.0 * PI * (PI * x[0]).sin() * (2.0 * PI * x[1]).sin(),
                0.0,
            ]
        });
        let p = decompose_momentum(&mom);
        assert!(p.v.max_abs() < 1e-10);
        assert!(p.big_v.iter().all(|v| v.abs() < 1e-12));
        assert!(p.psi.sub(&psi).max_abs() < 1e-10);
    }

    #[test]
    fn rotated_gradient_is_divergence_free_part() {
        let g = grid2(32);
        // (-∂_y s, ∂_x s) for s = sin(πx) sin(πy)
        let mom = VectorField::from_fn(g, |x| {
            let (a, b) = (PI * x[0], PI * x[1]);
            [-PI * a.sin() * b.cos(), PI * a.cos() * b.sin(), 0.0]
        });
        let p = decompose_momentum(&mom);
        assert!(p.v.sub(&mom).max_abs() < 1e-10);
        assert!(p.psi.max_abs() < 1e-10);
    }

    #[test]
    fn decomposition_invariants() {
        for g in [grid2(24), PeriodicGrid::new(3, 8, 1.0).unwrap()] {
            let mom = VectorField::from_fn(g, |x| {
                [(PI * x[0]).sin() + x[2], (PI * (x[1] + x[2])).cos(), 0.2 + (PI * x[0] * 2.0).cos()]
            });
            let p = decompose_momentum(&mom);
            let plan = SpectralPlan::new(g);
            assert!(p.reconstruct().sub(&mom).max_abs() < 1e-10);
            assert!(plan.divergence(&p.v).max_abs() < 1e-10);
            assert!(p.v.mean().iter().all(|m| m.abs() < 1e-10));
            assert!(p.psi.mean().abs() < 1e-12);
            let again = decompose_momentum(&p.reconstruct());
            assert!(again.v.sub(&p.v).max_abs() < 1e-12);
            assert!(again.psi.sub(&p.psi).max_abs() < 1e-12);
        }
    }

    #[test]
    fn v_ode_closed_forms() {
        let dt = 0.01;
        let out = solve_v_ode(&vec![vec![0.0, 0.0]; 300], &[1.5, -2.0], dt).unwrap();
        for (k, v) in out.iter().enumerate() {
            let e = (-(k as f64) * dt).exp();
            assert!((v[0] - 1.5 * e).abs() < 1e-12 && (v[1] + 2.0 * e).abs() < 1e-12);
        }
        let fixed = solve_v_ode(&vec![vec![0.4]; 50], &[0.4], 0.1).unwrap();
        assert!(fixed.iter().all(|v| (v[0] - 0.4).abs() < 1e-15));
        let relax = solve_v_ode(&vec![vec![2.0]; 1000], &[-1.0], 0.01).unwrap();
        for (k, v) in relax.iter().enumerate() {
            let t = k as f64 * 0.01;
            assert!((v[0] - 2.0).abs() <= 3.0 * (-t).exp() + 1e-12);
            assert!((v[0] - (2.0 - 3.0 * (-t).exp())).abs() < 1e-12);
        }
        assert!(solve_v_ode(&[vec![1.0]], &[0.0, 0.0], 0.1).is_err());
        assert!(solve_v_ode(&[], &[0.0], 0.0).is_err());
    }

    #[test]
    fn lambda_max_examples() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]];
        assert_eq!(lambda_max(&id, 2).unwrap(), 1.0);
        let diag = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0; 3]];
        assert_eq!(lambda_max(&diag, 2).unwrap(), 3.0);
        let mm = [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0; 3]];
        assert!((lambda_max(&mm, 2).unwrap() - 5.0).abs() < 1e-12);
        let bad = [[1.0, 2.0, 0.0], [2.1, 4.0, 0.0], [0.0; 3]];
        assert!(matches!(lambda_max(&bad, 2), Err(Error::Usage(_))));
    }

    /// Largest root of the characteristic cubic by the trigonometric formula.
    fn cubic_lambda_max(a: &SymMatrix) -> f64 {
        let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return q;
        }
        let mut b = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
            }
        }
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        q + 2.0 * p * phi.cos()
    }

    proptest! {
        #[test]
        fn lambda_max_3d_matches_cubic(e in proptest::array::uniform6(-5.0f64..5.0)) {
            let a = [[e[0], e[3], e[4]], [e[3], e[1], e[5]], [e[4], e[5], e[2]]];
            let got = lambda_max(&a, 3).unwrap();
            let want = cubic_lambda_max(&a);
            prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
        }

        #[test]
        fn lambda_max_2d_bounds_rayleigh(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, th in 0.0f64..6.3) {
            let m = [[a, b, 0.0], [b, c, 0.0], [0.0; 3]];
            let lam = lambda_max(&m, 2).unwrap();
            let (x, y) = (th.cos(), th.sin());
            prop_assert!(a * x * x + 2.0 * b * x * y + c * y * y <= lam + 1e-12);
            prop_assert!(lam >= a.max(c) - 1e-12);
        }

        #[test]
        fn algebraic_margin_nonnegative(
            m in proptest::array::uniform3(-1.0f64..1.0),
            r in 0.1f64..2.0,
            e in proptest::array::uniform6(-1.0f64..1.0),
            three in proptest::bool::ANY,
        ) {
            let d = if three { 3 } else { 2 };
            let mut h = [[e[0], e[3], e[4]], [e[3], e[1], e[5]], [e[4], e[5], e[2]]];
            let tr: f64 = (0..d).map(|i| h[i][i]).sum();
            for (i, row) in h.iter_mut().enumerate().take(d) {
                row[i] -= tr / d as f64;
            }
            prop_assert!(algebraic_inequality_margin(&m[..d], r, &h).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn algebraic_margin_examples() {
        let zero = [[0.0; 3]; 3];
        assert!((algebraic_inequality_margin(&[1.0, 0.0], 1.0, &zero).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(algebraic_inequality_margin(&[0.0, 0.0], 1.0, &zero).unwrap(), 0.0);
        assert!(matches!(algebraic_inequality_margin(&[1.0, 0.0], 0.0, &zero), Err(Error::Domain(_))));
    }

    #[test]
    fn h_tensor_solves_its_defining_equation() {
        for g in [grid2(32), PeriodicGrid::new(3, 12, 1.0).unwrap()] {
            let f = VectorField::from_fn(g, |x| {
                [
                    (PI * x[0]).sin() * (PI * x[1]).cos() + 0.4,
                    (PI * (x[0] - x[1])).cos(),
                    (PI * x[2]).sin() * (PI * x[0]).cos(),
                ]
            });
            let h = h_tensor(&f);
            assert!(h.max_asymmetry() < 1e-12);
            assert!(h.max_trace() < 1e-12);
            let plan = SpectralPlan::new(g);
            let mean = f.mean();
            let target = f.add_constant(&mean.iter().map(|m| -m).collect::<Vec<_>>());
            let residual = h.divergence(&plan).scale(-1.0).sub(&target);
            assert!(residual.max_abs() < 1e-10, "{}", residual.max_abs());
        }
    }

    fn frame_setup(n: usize) -> (ScalarField, SubsolutionFrame, EntropyLaw) {
        let g = grid2(n);
        let law = EntropyLaw::new(2.0, 1.0).unwrap();
        let pots = Potentials::new(
            g,
            &PotentialSpec::WrappedGaussian { amplitude: -1.0, width: 0.3 },
            &PotentialSpec::CosineMode { amplitude: 0.1, modes: vec![1, 0] },
            0.05,
        )
        .unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (PI * x[0]).cos() * (PI * x[1]).sin());
        let mom = sample_momentum(g);
        let d2rho = ScalarField::from_fn(g, |x| 0.2 * (PI * x[1]).cos());
        let dt_psi = dt_psi_from_density(&d2rho);
        let frame = SubsolutionFrame::new(&rho, &mom, dt_psi, &law, &pots, 0.0).unwrap();
        (rho, frame, law)
    }

    #[test]
    fn frame_invariants() {
        let (_, frame, _) = frame_setup(32);
        let plan = SpectralPlan::new(*frame.v.grid());
        assert!(plan.divergence(&frame.v).max_abs() < 1e-10);
        assert!(frame.v.mean().iter().all(|m| m.abs() < 1e-10));
        assert!(frame.psi.mean().abs() < 1e-12);
        assert!(frame.h_field.max_asymmetry() < 1e-12);
        assert!(frame.h_field.max_trace() < 1e-12);
    }

    #[test]
    fn gauge_threshold_is_sharp() {
        let (rho, frame, law) = frame_setup(32);
        let f = TensorField::zeros(*rho.grid());
        let probe = x0_margin(&frame, &f, &rho, &law).unwrap();
        assert!(probe.pi0 > 0.0);
        let pass = x0_margin(&frame.with_pi(probe.pi0), &f, &rho, &law).unwrap();
        assert!(pass.passes());
        assert_eq!(kinetic_bound_violations(&frame.with_pi(probe.pi0), &rho, &pass.margin), 0);
        let fail = x0_margin(&frame.with_pi(0.9 * probe.pi0), &f, &rho, &law).unwrap();
        assert!(fail.violations() >= 1);
        let huge = x0_margin(&frame.with_pi(1e6), &f, &rho, &law).unwrap();
        assert!(huge.passes());
    }

    #[test]
    fn kinetic_bound_follows_from_margin_with_forcing_tensor() {
        let (rho, frame, law) = frame_setup(16);
        let g = *rho.grid();
        let f = TensorField::from_fn(g, |x| {
            let s = 2.0 * (PI * x[0]).sin();
            let c = (PI * x[1]).cos();
            [[s, c, 0.0], [c, -s, 0.0], [0.0; 3]]
        });
        let probe = x0_margin(&frame, &f, &rho, &law).unwrap();
        for pi in [0.5 * probe.pi0, probe.pi0, 2.0 * probe.pi0] {
            let fr = frame.with_pi(pi);
            let x = x0_margin(&fr, &f, &rho, &law).unwrap();
            assert_eq!(kinetic_bound_violations(&fr, &rho, &x.margin), 0);
        }
    }

    #[test]
    fn psi_satisfies_heat_constraint() {
        let g = grid2(32);
        let drho = ScalarField::from_fn(g, |x| (PI * x[0]).sin() * (PI * x[1]).sin());
        let psi = psi_from_density_rate(&drho);
        let plan = SpectralPlan::new(g);
        assert!(plan.laplacian(&psi).add(&drho).max_abs() < 1e-10);
        assert!(psi.mean().abs() < 1e-12);
    }

    #[test]
    fn mean_force_vanishes_without_potentials() {
        let g = grid2(8);
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.2 * (PI * x[0]).sin());
        let f = mean_force(&rho, &Potentials::none(g));
        assert!(f.iter().all(|x| x.abs() < 1e-15));
    }
}
