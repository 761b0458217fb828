//! Periodic cubic lattice and the fields living on it.
//!
//! Everything else in the crate is built on three types: [`Grid`] (geometry
//! plus the vacuum constants), [`ScalarField`] and [`VectorField`] (one f64
//! or one 3-vector per site). Sites are laid out row-major, x slowest:
//! site (i, j, k) at flat index `(i*n + j)*n + k` and position
//! `(i*dx, j*dx, k*dx)`. All integrals are plain lattice sums times dx^3.
//!
//! Differential operators are spectral and live in [`Spectral`]; trilinear
//! interpolation in [`sample`]; the real-space transverse projector kernel
//! in [`kernel`].

mod kernel;
mod sample;
mod spectral;

pub use kernel::{
    convolve_transverse, expected_trace_mean, projector_mode_trace_mean,
    transverse_projector_kernel,
};
pub use sample::{sample_scalar, sample_vector};
pub use spectral::Spectral;

use crate::error::{Error, Result};

/// Cubic periodic lattice: n sites per axis, box extent `length`, plus the
/// vacuum constants that fix the light speed c^2 = 1/(eps0 mu0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
    pub eps0: f64,
    pub mu0: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64, eps0: f64, mu0: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n per axis must be even and at least 8, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        if !(eps0 > 0.0 && mu0 > 0.0) || !(eps0 * mu0).is_finite() {
            return Err(Error::InvalidGrid(format!(
                "vacuum constants must be positive and finite, got eps0 = {eps0}, mu0 = {mu0}"
            )));
        }
        Ok(Grid { n, length, eps0, mu0 })
    }

    /// Natural units: unit box is not assumed, but eps0 = mu0 = 1 so c = 1.
    pub fn cubic(n: usize, length: f64) -> Result<Self> {
        Grid::new(n, length, 1.0, 1.0)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn c2(&self) -> f64 {
        1.0 / (self.eps0 * self.mu0)
    }

    pub fn sites(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Volume element dx^3 of one site; lattice sums times this realize
    /// volume integrals.
    pub fn cell_volume(&self) -> f64 {
        let dx = self.dx();
        dx * dx * dx
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Position of a flat site index, components in [0, L).
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let n = self.n;
        let k = flat % n;
        let j = (flat / n) % n;
        let i = flat / (n * n);
        let dx = self.dx();
        [i as f64 * dx, j as f64 * dx, k as f64 * dx]
    }

    /// Segments and probes must stay within |x| <= L/4 of the charge centre
    /// so that smeared supports never straddle the periodic seam.
    pub fn trusted_radius(&self) -> f64 {
        self.length / 4.0
    }

    /// Signed displacement from the origin, wrapped to (-L/2, L/2] per axis.
    pub fn centered(&self, x: [f64; 3]) -> [f64; 3] {
        let l = self.length;
        let mut out = [0.0; 3];
        for c in 0..3 {
            let mut v = x[c].rem_euclid(l);
            if v > 0.5 * l {
                v -= l;
            }
            out[c] = v;
        }
        out
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: {}^3 / L = {} vs {}^3 / L = {}",
                self.n, self.length, other.n, other.length
            )));
        }
        Ok(())
    }
}

/// One real sample per lattice site.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.sites()] }
    }

    /// Build from a function of position.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.sites()).map(|s| f(grid.position(s))).collect();
        ScalarField { grid, values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Lattice inner product dx^3 sum(a * b).
    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.grid.check_same(&other.grid, "scalar inner product").expect("grid mismatch");
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        dot * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// self + s * other, elementwise.
    pub fn add_scaled(&self, other: &ScalarField, s: f64) -> ScalarField {
        self.grid.check_same(&other.grid, "scalar add").expect("grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// One real 3-vector per lattice site, stored component-major.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub grid: Grid,
    pub values: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![0.0; grid.sites()];
        VectorField { grid, values: [z.clone(), z.clone(), z] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = VectorField::zeros(grid);
        for s in 0..grid.sites() {
            let v = f(grid.position(s));
            for c in 0..3 {
                out.values[c][s] = v[c];
            }
        }
        out
    }

    pub fn at(&self, site: usize) -> [f64; 3] {
        [self.values[0][site], self.values[1][site], self.values[2][site]]
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        self.grid.check_same(&other.grid, "vector inner product").expect("grid mismatch");
        let mut dot = 0.0;
        for c in 0..3 {
            dot += self.values[c]
                .iter()
                .zip(&other.values[c])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        dot * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        let values = [
            self.values[0].iter().map(|v| v * s).collect(),
            self.values[1].iter().map(|v| v * s).collect(),
            self.values[2].iter().map(|v| v * s).collect(),
        ];
        VectorField { grid: self.grid, values }
    }

    /// self + s * other, elementwise.
    pub fn add_scaled(&self, other: &VectorField, s: f64) -> VectorField {
        self.grid.check_same(&other.grid, "vector add").expect("grid mismatch");
        let mut out = self.clone();
        for c in 0..3 {
            for (o, b) in out.values[c].iter_mut().zip(&other.values[c]) {
                *o += s * b;
            }
        }
        out
    }

    /// Pointwise cross product self x other.
    pub fn cross(&self, other: &VectorField) -> VectorField {
        self.grid.check_same(&other.grid, "cross product").expect("grid mismatch");
        let mut out = VectorField::zeros(self.grid);
        for s in 0..self.grid.sites() {
            let a = self.at(s);
            let b = other.at(s);
            out.values[0][s] = a[1] * b[2] - a[2] * b[1];
            out.values[1][s] = a[2] * b[0] - a[0] * b[2];
            out.values[2][s] = a[0] * b[1] - a[1] * b[0];
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

/// Dot product of two 3-vectors.
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Cross product of two 3-vectors.
pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
