//! Interaction kernels `K` and confinement potentials `Φ`.

use serde::{Deserialize, Serialize};

use crate::entropy::EntropyLaw;
use crate::error::{Error, Result};

use super::ops::{gradient, sample_kernel, KernelOperator};
use super::{PeriodicGrid, ScalarField, VectorField};

/// Image sums of the wrapped Gaussian stop once `|x + 2Lj|` exceeds this many widths.
const GAUSSIAN_CUTOFF: f64 = 6.0;

/// Named analytic family, or raw samples, for a potential on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// `amplitude · Σ_j exp(-|x + 2Lj|² / (2 width²))` over periodic images.
    WrappedGaussian { amplitude: f64, width: f64 },
    /// `amplitude · cos(π (modes · x) / L)`.
    CosineMode { amplitude: f64, modes: Vec<i64> },
    /// Raw samples: kernel offset layout when used as `K`, cell centers when used as `Φ`.
    Tabulated { values: Vec<f64> },
}

impl PotentialSpec {
    fn validate(&self, grid: &PeriodicGrid) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::WrappedGaussian { amplitude, width } => {
                if !amplitude.is_finite() || !(width.is_finite() && *width > 0.0) {
                    return Err(Error::Domain(format!(
                        "wrapped gaussian needs finite amplitude and positive width, got {amplitude}, {width}"
                    )));
                }
                Ok(())
            }
            PotentialSpec::CosineMode { amplitude, modes } => {
                if !amplitude.is_finite() {
                    return Err(Error::Domain(format!("non-finite amplitude {amplitude}")));
                }
                if modes.len() != grid.dim() {
                    return Err(Error::Usage(format!(
                        "cosine mode needs {} mode numbers, got {}",
                        grid.dim(),
                        modes.len()
                    )));
                }
                Ok(())
            }
            PotentialSpec::Tabulated { values } => {
                ScalarField::new(*grid, values.clone()).map(|_| ())
            }
        }
    }

    /// Samples `K` in kernel offset layout and checks `K(x) = K(-x)` exactly.
    pub fn sample_kernel(&self, grid: PeriodicGrid) -> Result<ScalarField> {
        self.validate(&grid)?;
        let field = match self {
            PotentialSpec::Zero => ScalarField::zeros(grid),
            PotentialSpec::WrappedGaussian { amplitude, width } => {
                // |x| per axis keeps the samples bitwise even.
                sample_kernel(grid, |x| {
                    let mut v = *amplitude;
                    for xa in x.iter().take(grid.dim()) {
                        v *= wrapped_gaussian_1d(xa.abs(), *width, grid.half_width());
                    }
                    v
                })
            }
            PotentialSpec::CosineMode { amplitude, modes } => sample_kernel(grid, |x| {
                let phase: f64 = (0..grid.dim()).map(|a| modes[a] as f64 * x[a]).sum();
                amplitude * (std::f64::consts::PI * phase / grid.half_width()).cos()
            }),
            PotentialSpec::Tabulated { values } => ScalarField::new(grid, values.clone())?,
        };
        let v = field.values();
        if let Some(i) = (0..grid.len()).find(|&i| v[i] != v[grid.negated_offset(i)]) {
            return Err(Error::Domain(format!(
                "kernel is not even: K at offset {:?} is {} but K at its negation is {}",
                grid.unflatten(i),
                v[i],
                v[grid.negated_offset(i)]
            )));
        }
        Ok(field)
    }

    /// Samples `Φ` at cell centers.
    pub fn sample_confinement(&self, grid: PeriodicGrid) -> Result<ScalarField> {
        self.validate(&grid)?;
        Ok(match self {
            PotentialSpec::Zero => ScalarField::zeros(grid),
            PotentialSpec::WrappedGaussian { amplitude, width } => ScalarField::from_fn(grid, |x| {
                let mut v = *amplitude;
                for xa in x.iter().take(grid.dim()) {
                    v *= wrapped_gaussian_1d(*xa, *width, grid.half_width());
                }
                v
            }),
            PotentialSpec::CosineMode { amplitude, modes } => ScalarField::from_fn(grid, |x| {
                let phase: f64 = (0..grid.dim()).map(|a| modes[a] as f64 * x[a]).sum();
                amplitude * (std::f64::consts::PI * phase / grid.half_width()).cos()
            }),
            PotentialSpec::Tabulated { values } => ScalarField::new(grid, values.clone())?,
        })
    }
}

fn wrapped_gaussian_1d(x: f64, width: f64, half_width: f64) -> f64 {
    let period = 2.0 * half_width;
    let reach = (GAUSSIAN_CUTOFF * width / period).ceil() as i64 + 1;
    let mut sum = 0.0;
    for j in -reach..=reach {
        let y = x + period * j as f64;
        if y.abs() <= GAUSSIAN_CUTOFF * width {
            sum += (-0.5 * (y / width).powi(2)).exp();
        }
    }
    sum
}

/// Sampled `K` and `Φ` with the interaction strength `C_k`, ready for repeated use.
#[derive(Debug, Clone)]
pub struct Potentials {
    kernel: KernelOperator,
    phi: ScalarField,
    grad_phi: VectorField,
    c_k: f64,
    phi_lower_bound: f64,
}

impl Potentials {
    pub fn new(
        grid: PeriodicGrid,
        kernel: &PotentialSpec,
        confinement: &PotentialSpec,
        c_k: f64,
    ) -> Result<Self> {
        if !(c_k.is_finite() && c_k >= 0.0) {
            return Err(Error::Domain(format!("C_k must be finite and ≥ 0, got {c_k}")));
        }
        let phi = confinement.sample_confinement(grid)?;
        Ok(Self::from_fields(kernel.sample_kernel(grid)?, phi, c_k))
    }

    /// Builds from already sampled fields; `kernel` must be in offset layout.
    pub fn from_fields(kernel: ScalarField, phi: ScalarField, c_k: f64) -> Self {
        let grad_phi = gradient(&phi);
        let phi_lower_bound = phi.min();
        Self {
            kernel: KernelOperator::new(kernel),
            phi,
            grad_phi,
            c_k,
            phi_lower_bound,
        }
    }

    /// No interaction and no confinement.
    pub fn none(grid: PeriodicGrid) -> Self {
        Self::from_fields(ScalarField::zeros(grid), ScalarField::zeros(grid), 0.0)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.phi.grid()
    }

    pub fn kernel(&self) -> &KernelOperator {
        &self.kernel
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn grad_phi(&self) -> &VectorField {
        &self.grad_phi
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    /// Minimum of the sampled `Φ`.
    pub fn phi_lower_bound(&self) -> f64 {
        self.phi_lower_bound
    }

    pub fn convolve(&self, f: &ScalarField) -> ScalarField {
        self.kernel.apply(f)
    }

    /// `C_k K∗ρ + Φ`.
    pub fn field_potential(&self, rho: &ScalarField) -> ScalarField {
        if self.c_k == 0.0 {
            return self.phi.clone();
        }
        self.phi.axpy(self.c_k, &self.convolve(rho))
    }

    /// `C_k ∇(K∗ρ) + ∇Φ`.
    pub fn force(&self, rho: &ScalarField) -> VectorField {
        if self.c_k == 0.0 {
            return self.grad_phi.clone();
        }
        self.grad_phi
            .axpy(self.c_k, &gradient(&self.convolve(rho)))
    }

    /// Chemical potential `μ = h'(ρ) + C_k K∗ρ + Φ`.
    pub fn chemical_potential(&self, law: &EntropyLaw, rho: &ScalarField) -> ScalarField {
        self.field_potential(rho).add(&rho.map(|r| law.h_prime(r)))
    }
}
