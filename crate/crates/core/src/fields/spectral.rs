//! Discrete Fourier transforms on the periodic grid and the spectral
//! derivative operators built on them.
//!
//! Wavenumbers follow `k = π j / L` for signed index `j`. Odd derivatives
//! drop the Nyquist mode so that `divergence ∘ gradient` equals the
//! spectral Laplacian used for inversion.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{PeriodicGrid, ScalarField, VectorField};

pub type C64 = Complex<f64>;

#[derive(Clone)]
pub struct SpectralPlan {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("grid", &self.grid).finish()
    }
}

impl SpectralPlan {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn apply(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let g = &self.grid;
        let n = g.n();
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..g.dim() {
            let stride = g.stride(axis);
            for start in 0..g.len() {
                if !(start / stride).is_multiple_of(n) {
                    continue;
                }
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<C64> {
        let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.apply(&mut data, &self.forward);
        data
    }

    pub fn forward_complex(&self, mut data: Vec<C64>) -> Vec<C64> {
        self.apply(&mut data, &self.forward);
        data
    }

    /// Inverse transform, normalized, real part.
    pub fn inverse_real(&self, mut data: Vec<C64>) -> Vec<f64> {
        self.apply(&mut data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        data.into_iter().map(|c| c.re * scale).collect()
    }

    /// Wavevector of mode `idx` with Nyquist components set to zero.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let g = &self.grid;
        let m = g.unflatten(idx);
        let mut k = [0.0; 3];
        for a in 0..g.dim() {
            if 2 * m[a] != g.n() {
                k[a] = std::f64::consts::PI * g.signed_offset(m[a]) as f64 / g.half_width();
            }
        }
        k
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        let hat = self.forward(f.values());
        let comps = (0..self.grid.dim())
            .map(|a| {
                let d: Vec<C64> = hat
                    .iter()
                    .enumerate()
                    .map(|(i, v)| C64::new(0.0, self.wavevector(i)[a]) * v)
                    .collect();
                ScalarField::from_vec(self.grid, self.inverse_real(d))
            })
            .collect();
        VectorField::from_components(self.grid, comps)
    }

    pub fn divergence(&self, v: &VectorField) -> ScalarField {
        let mut acc = vec![C64::new(0.0, 0.0); self.grid.len()];
        for a in 0..self.grid.dim() {
            let hat = self.forward(v.component(a).values());
            for (i, (o, h)) in acc.iter_mut().zip(hat).enumerate() {
                *o += C64::new(0.0, self.wavevector(i)[a]) * h;
            }
        }
        ScalarField::from_vec(self.grid, self.inverse_real(acc))
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        let hat = self.forward(f.values());
        let d: Vec<C64> = hat
            .iter()
            .enumerate()
            .map(|(i, v)| -norm2(self.wavevector(i)) * v)
            .collect();
        ScalarField::from_vec(self.grid, self.inverse_real(d))
    }

    /// Mean-zero solution of `Δu = f` (the mean of `f` is discarded).
    pub fn solve_poisson(&self, f: &ScalarField) -> ScalarField {
        let hat = self.forward(f.values());
        let d: Vec<C64> = hat
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k2 = norm2(self.wavevector(i));
                if k2 == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    -v / k2
                }
            })
            .collect();
        ScalarField::from_vec(self.grid, self.inverse_real(d))
    }
}

pub(crate) fn norm2(k: [f64; 3]) -> f64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}
