//! Finite-difference calculus and quadrature on the periodic grid.

use crate::error::Result;

use super::spectral::{SpectralPlan, C64};
use super::{PeriodicGrid, ScalarField, VectorField};

/// Per-axis cell count from which [`convolve`] switches to the FFT path.
pub const FFT_CROSSOVER: usize = 64;

/// `dx^dim · Σ values`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid().cell_volume() * f.values().iter().sum::<f64>()
}

/// Second-order centered difference along `axis`.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let g = *f.grid();
    let inv = 0.5 / g.dx();
    let v = f.values();
    let out = (0..g.len())
        .map(|i| (v[g.shifted(i, axis, 1)] - v[g.shifted(i, axis, -1)]) * inv)
        .collect();
    ScalarField::from_vec(g, out)
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let g = *f.grid();
    VectorField::from_components(g, (0..g.dim()).map(|a| partial(f, a)).collect())
}

pub fn divergence(field: &VectorField) -> ScalarField {
    let g = *field.grid();
    let mut out = ScalarField::zeros(g);
    for a in 0..g.dim() {
        out = out.add(&partial(field.component(a), a));
    }
    out
}

/// Row-wise divergence of the symmetric tensor `ρ a ⊗ b`:
/// `(div T)_j = Σ_i ∂_i (ρ a_i b_j)`.
pub fn divergence_of_outer(rho: &ScalarField, a: &VectorField, b: &VectorField) -> VectorField {
    let g = *rho.grid();
    let comps = (0..g.dim())
        .map(|j| {
            let mut acc = ScalarField::zeros(g);
            for i in 0..g.dim() {
                let flux = rho.mul(a.component(i)).mul(b.component(j));
                acc = acc.add(&partial(&flux, i));
            }
            acc
        })
        .collect();
    VectorField::from_components(g, comps)
}

/// Circular convolution `(K∗ρ)_i = dx^dim Σ_j K_{i-j} ρ_j`.
///
/// `kernel` is stored by offset: entry `j` holds `K` at displacement
/// `signed(j)·dx` (see [`PeriodicGrid::offset_displacement`]).
pub fn convolve(kernel: &ScalarField, rho: &ScalarField) -> Result<ScalarField> {
    kernel.grid().ensure_same(rho.grid())?;
    if kernel.grid().n() >= FFT_CROSSOVER {
        Ok(KernelOperator::new(kernel.clone()).apply(rho))
    } else {
        Ok(convolve_direct(kernel, rho))
    }
}

/// Direct `O(N²)` evaluation of the circular convolution.
pub fn convolve_direct(kernel: &ScalarField, rho: &ScalarField) -> ScalarField {
    let g = *rho.grid();
    let kv = kernel.values();
    let rv = rho.values();
    let mut out = vec![0.0; g.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let mi = g.unflatten(i);
        let mut acc = 0.0;
        for (j, r) in rv.iter().enumerate() {
            let mj = g.unflatten(j);
            let mut off = [0; 3];
            for a in 0..g.dim() {
                off[a] = (mi[a] + g.n() - mj[a]) % g.n();
            }
            acc += kv[g.flatten(off)] * r;
        }
        *o = acc * g.cell_volume();
    }
    ScalarField::from_vec(g, out)
}

/// A kernel with its transform cached, for repeated convolutions.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    kernel: ScalarField,
    spectral: Option<(SpectralPlan, Vec<C64>)>,
}

impl KernelOperator {
    pub fn new(kernel: ScalarField) -> Self {
        let g = *kernel.grid();
        let spectral = (g.n() >= FFT_CROSSOVER).then(|| {
            let plan = SpectralPlan::new(g);
            let hat = plan.forward(kernel.values());
            (plan, hat)
        });
        Self { kernel, spectral }
    }

    pub fn kernel(&self) -> &ScalarField {
        &self.kernel
    }

    pub fn apply(&self, rho: &ScalarField) -> ScalarField {
        let g = *rho.grid();
        match &self.spectral {
            Some((plan, khat)) => {
                let mut hat = plan.forward(rho.values());
                let vol = g.cell_volume();
                for (h, k) in hat.iter_mut().zip(khat) {
                    *h *= k * vol;
                }
                ScalarField::from_vec(g, plan.inverse_real(hat))
            }
            None => convolve_direct(&self.kernel, rho),
        }
    }

    /// `dx^dim Σ |K|`, the discrete L¹ norm.
    pub fn l1_norm(&self) -> f64 {
        self.kernel.grid().cell_volume() * self.kernel.values().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Whether `K(x) = K(-x)` holds bit-for-bit on the grid.
    pub fn is_even(&self) -> bool {
        is_even_kernel(&self.kernel)
    }
}

pub fn is_even_kernel(kernel: &ScalarField) -> bool {
    let g = kernel.grid();
    let v = kernel.values();
    (0..g.len()).all(|i| v[i] == v[g.negated_offset(i)])
}

/// Kernel layout of a function of displacement.
pub fn sample_kernel(grid: PeriodicGrid, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
    let values = (0..grid.len())
        .map(|i| f(grid.offset_displacement(i)))
        .collect();
    ScalarField::from_vec(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> PeriodicGrid {
        PeriodicGrid::new(1, n, l).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let g = PeriodicGrid::new(2, 7, 1.0).unwrap();
        assert!((integrate(&ScalarField::constant(g, 1.0)) - 4.0).abs() < 1e-14);
        let g = grid1(64, 3.0);
        let s = ScalarField::from_fn(g, |x| (PI * x[0] / 3.0).sin());
        assert!(integrate(&s).abs() < 1e-12);
        let g = grid1(4, 1.0);
        let f = ScalarField::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(integrate(&f), 5.0);
    }

    #[test]
    fn convolution_hand_example() {
        let g = grid1(4, 2.0);
        let k = ScalarField::new(g, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let rho = ScalarField::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = convolve(&k, &rho).unwrap();
        assert_eq!(out.values(), &[4.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn convolution_constant_and_delta_kernels() {
        for n in [8, 64] {
            let g = PeriodicGrid::new(2, n, 1.0).unwrap();
            let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (PI * x[0]).sin() + 0.1 * x[1]);
            let mass = integrate(&rho);
            let c = ScalarField::constant(g, 2.5);
            let out = convolve(&c, &rho).unwrap();
            for v in out.values() {
                assert!((v - 2.5 * mass).abs() < 1e-12 * mass.abs().max(1.0));
            }
            let mut delta = vec![0.0; g.len()];
            delta[0] = 1.0 / g.cell_volume();
            let delta = ScalarField::new(g, delta).unwrap();
            let out = convolve(&delta, &rho).unwrap();
            assert!(out.sub(&rho).max_abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_usage_error() {
        let a = ScalarField::zeros(grid1(8, 1.0));
        let b = ScalarField::zeros(grid1(8, 2.0));
        assert!(matches!(
            convolve(&a, &b),
            Err(crate::error::Error::Usage(_))
        ));
    }

    #[test]
    fn gradient_and_divergence_examples() {
        let g = PeriodicGrid::new(2, 16, 1.0).unwrap();
        let grad = gradient(&ScalarField::constant(g, 3.0));
        assert_eq!(grad.max_abs(), 0.0);

        let f = ScalarField::from_fn(g, |x| (PI * x[0]).sin() * (PI * x[1]).cos() + x[0] * 0.0);
        let lap = divergence(&gradient(&f));
        assert!(integrate(&lap).abs() < 1e-12);

        // Observed order of the centered gradient under refinement.
        let err = |n: usize| {
            let g = grid1(n, 2.0);
            let f = ScalarField::from_fn(g, |x| (PI * x[0] / 2.0).sin());
            let exact = ScalarField::from_fn(g, |x| PI / 2.0 * (PI * x[0] / 2.0).cos());
            gradient(&f).component(0).sub(&exact).max_abs()
        };
        let order = (err(32) / err(64)).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn div_grad_is_three_point_laplacian_at_twice_the_spacing() {
        let g = grid1(16, 1.0);
        let f = ScalarField::from_fn(g, |x| (x[0] * 3.0).cos() + 0.2 * (x[0] * PI).sin());
        let lap = divergence(&gradient(&f));
        let v = f.values();
        let h = 2.0 * g.dx();
        for i in 0..g.len() {
            let s = (v[g.shifted(i, 0, 2)] - 2.0 * v[i] + v[g.shifted(i, 0, -2)]) / (h * h);
            assert!((lap.values()[i] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_matches_direct_convolution() {
        let cases = [(1, 8), (1, 64), (1, 128), (1, 256), (2, 16), (2, 64), (3, 8)];
        for (dim, n) in cases {
            let g = PeriodicGrid::new(dim, n, 1.3).unwrap();
            let k = sample_kernel(g, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() - 0.2);
            let rho = ScalarField::from_fn(g, |x| 1.0 + 0.4 * (2.0 * x[0]).sin() + 0.1 * x[1] * x[2]);
            let direct = convolve_direct(&k, &rho);
            let op = KernelOperator {
                kernel: k.clone(),
                spectral: Some((SpectralPlan::new(g), SpectralPlan::new(g).forward(k.values()))),
            };
            let fast = op.apply(&rho);
            let scale = direct.max_abs();
            assert!(fast.sub(&direct).max_abs() <= 1e-12 * scale, "dim {dim} n {n}");
        }
    }

    #[test]
    fn gradient_and_divergence_are_skew_adjoint() {
        let g = PeriodicGrid::new(2, 24, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * x[1] * 5.0).sin() + x[0]);
        let v = VectorField::from_fn(g, |x| [(3.0 * x[1]).cos() * x[0], (x[0] - x[1]).exp(), 0.0]);
        let a = integrate(&f.mul(&divergence(&v)));
        let b = -integrate(&gradient(&f).dot(&v));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
