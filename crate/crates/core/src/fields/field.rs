use crate::error::{Error, Result};

use super::PeriodicGrid;

/// One real value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value {} at cell {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee the length.
    pub(crate) fn from_vec(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.center_of(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_vec(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Grid average of the values.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }
}

/// `dim` components per cell, each stored as a [`ScalarField`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: PeriodicGrid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Usage("vector field needs components".into()));
        };
        let grid = *first.grid();
        if components.len() != grid.dim() {
            return Err(Error::Usage(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            grid.ensure_same(c.grid())?;
        }
        Ok(Self { grid, components })
    }

    pub(crate) fn from_components(grid: PeriodicGrid, components: Vec<ScalarField>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        Self { grid, components }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::constant(grid, &vec![0.0; grid.dim()])
    }

    pub fn constant(grid: PeriodicGrid, c: &[f64]) -> Self {
        let components = (0..grid.dim())
            .map(|a| ScalarField::constant(grid, c[a]))
            .collect();
        Self { grid, components }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let samples: Vec<[f64; 3]> = (0..grid.len()).map(|i| f(grid.center_of(i))).collect();
        let components = (0..grid.dim())
            .map(|a| ScalarField::from_vec(grid, samples.iter().map(|s| s[a]).collect()))
            .collect();
        Self { grid, components }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut ScalarField {
        &mut self.components[axis]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (a, c) in self.components.iter().enumerate() {
            out[a] = c.values()[idx];
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.components.iter().all(ScalarField::all_finite)
    }

    fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(f).collect(),
        }
    }

    fn zip_components(
        &self,
        other: &VectorField,
        f: impl Fn(&ScalarField, &ScalarField) -> ScalarField,
    ) -> Self {
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f.scale(c))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        self.zip_components(other, ScalarField::add)
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.zip_components(other, ScalarField::sub)
    }

    pub fn axpy(&self, c: f64, other: &VectorField) -> Self {
        self.zip_components(other, |a, b| a.axpy(c, b))
    }

    /// Componentwise product with a scalar field.
    pub fn mul_scalar_field(&self, s: &ScalarField) -> Self {
        self.map_components(|f| f.mul(s))
    }

    /// Componentwise quotient by a scalar field.
    pub fn div_scalar_field(&self, s: &ScalarField) -> Self {
        self.map_components(|f| f.zip_map(s, |a, b| a / b))
    }

    pub fn add_constant(&self, c: &[f64]) -> Self {
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(a, f)| f.add_scalar(c[a]))
                .collect(),
        }
    }

    /// Pointwise `|F|²`.
    pub fn norm_squared(&self) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        ScalarField::from_vec(self.grid, out)
    }

    /// Pointwise `F · G`.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((o, x), y) in out.iter_mut().zip(a.values()).zip(b.values()) {
                *o += x * y;
            }
        }
        ScalarField::from_vec(self.grid, out)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// Grid average of each component.
    pub fn mean(&self) -> Vec<f64> {
        self.components.iter().map(ScalarField::mean).collect()
    }
}
