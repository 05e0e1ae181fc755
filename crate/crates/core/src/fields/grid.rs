use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centered grid on the flat torus `[-L, L)^dim`.
///
/// Values are stored row-major: axis 0 varies slowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    half_width: f64,
    dx: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl TryFrom<GridSpec> for PeriodicGrid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        PeriodicGrid::new(s.dim, s.n, s.half_width)
    }
}

impl From<PeriodicGrid> for GridSpec {
    fn from(g: PeriodicGrid) -> Self {
        GridSpec {
            dim: g.dim,
            n: g.n,
            half_width: g.half_width,
        }
    }
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("need at least 2 cells per axis, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(Self {
            dim,
            n,
            half_width,
            dx: 2.0 * half_width / n as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `dx^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    /// Torus volume `(2L)^dim`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Distance between consecutive entries along `axis` in the flat storage.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn flatten(&self, multi: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.n + multi[a])
    }

    /// Flat index of the neighbour `shift` cells away along `axis`, wrapping.
    pub fn shifted(&self, idx: usize, axis: usize, shift: isize) -> usize {
        let stride = self.stride(axis);
        let i = (idx / stride) % self.n;
        let n = self.n as isize;
        let j = (i as isize + shift).rem_euclid(n) as usize;
        idx + j * stride - i * stride
    }

    /// Cell-center coordinate `-L + (i + 1/2) dx`.
    pub fn center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.dx
    }

    pub fn center_of(&self, idx: usize) -> [f64; 3] {
        let m = self.unflatten(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.center(m[a]);
        }
        x
    }

    /// Signed offset index in `(-n/2, n/2]` for a wrapped offset `j`.
    pub fn signed_offset(&self, j: usize) -> isize {
        if 2 * j <= self.n {
            j as isize
        } else {
            j as isize - self.n as isize
        }
    }

    /// Displacement represented by a kernel sample at flat offset `idx`.
    pub fn offset_displacement(&self, idx: usize) -> [f64; 3] {
        let m = self.unflatten(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.signed_offset(m[a]) as f64 * self.dx;
        }
        x
    }

    /// Flat offset of `-offset` (componentwise negation mod n).
    pub fn negated_offset(&self, idx: usize) -> usize {
        let m = self.unflatten(idx);
        let mut neg = [0; 3];
        for a in 0..self.dim {
            neg[a] = (self.n - m[a]) % self.n;
        }
        self.flatten(neg)
    }

    pub(crate) fn ensure_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(Error::Usage(format!(
                "grid mismatch: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}
