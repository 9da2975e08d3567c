//! Spatial discretization on (extent)^d, d in {1, 2}, with homogeneous
//! Dirichlet boundary.
//!
//! Fields store interior node values only; the boundary is identically zero
//! by construction. The discrete gradient is the cell-averaged gradient of
//! the multilinear interpolant (forward differences in 1-D, corner averages
//! in 2-D), and the divergence is defined as the *negative adjoint* of the
//! gradient under the cell/node volume-weighted inner products:
//!
//! ```text
//!     <div F, v> + <F, grad v> = 0        exactly, for every F and v.
//! ```
//!
//! This discrete integration-by-parts is what makes the energy identities
//! close at the discrete level, so both stencils below are written as literal
//! transposes of each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridError {
    /// Operands live on different grids.
    ShapeMismatch,
    /// Fewer than 4 cells per axis, or a degenerate extent.
    InvalidDomain,
}

impl core::fmt::Display for GridError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GridError::ShapeMismatch => write!(f, "grid shape mismatch"),
            GridError::InvalidDomain => write!(f, "domain needs >= 4 cells and positive extent"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GridError {}

/// Rectangular domain (lo, hi)^d with `cells` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub cells: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(dim: usize, cells: usize, lo: f64, hi: f64) -> Result<Self, GridError> {
        if !(dim == 1 || dim == 2) || cells < 4 || !(hi > lo) {
            return Err(GridError::InvalidDomain);
        }
        Ok(Self { dim, cells, lo, hi })
    }

    pub fn unit_interval(cells: usize) -> Self {
        Self::new(1, cells, 0.0, 1.0).expect("valid 1-D domain")
    }

    pub fn unit_square(cells: usize) -> Self {
        Self::new(2, cells, 0.0, 1.0).expect("valid 2-D domain")
    }

    /// Grid spacing, identical on every axis.
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    /// Number of interior nodes.
    pub fn node_count(&self) -> usize {
        let m = self.cells - 1;
        if self.dim == 1 {
            m
        } else {
            m * m
        }
    }

    /// Number of cells (gradient sample points).
    pub fn cell_count(&self) -> usize {
        if self.dim == 1 {
            self.cells
        } else {
            self.cells * self.cells
        }
    }

    /// Volume weight carried by one node or cell.
    pub fn volume_weight(&self) -> f64 {
        let h = self.spacing();
        if self.dim == 1 {
            h
        } else {
            h * h
        }
    }

    /// Coordinates of the interior node with linear index `idx`.
    pub fn node_coord(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let m = self.cells - 1;
        if self.dim == 1 {
            [self.lo + (idx + 1) as f64 * h, 0.0]
        } else {
            let ix = idx % m + 1;
            let iy = idx / m + 1;
            [self.lo + ix as f64 * h, self.lo + iy as f64 * h]
        }
    }

    /// Coordinates of the center of cell `idx`.
    pub fn cell_center(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        if self.dim == 1 {
            [self.lo + (idx as f64 + 0.5) * h, 0.0]
        } else {
            let cx = idx % self.cells;
            let cy = idx / self.cells;
            [
                self.lo + (cx as f64 + 0.5) * h,
                self.lo + (cy as f64 + 0.5) * h,
            ]
        }
    }
}

/// Scalar field on the interior nodes; zero trace on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub domain: Domain,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            values: vec![0.0; domain.node_count()],
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(domain: Domain, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..domain.node_count())
            .map(|i| f(domain.node_coord(i)))
            .collect();
        Self { domain, values }
    }

    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != domain.node_count() {
            return Err(GridError::ShapeMismatch);
        }
        Ok(Self { domain, values })
    }

    fn node(&self, ix: usize, iy: usize) -> f64 {
        // Full-lattice lookup with the Dirichlet zeros filled in.
        let n = self.domain.cells;
        if ix == 0 || ix == n || iy == 0 || iy == n {
            0.0
        } else {
            let m = n - 1;
            self.values[(iy - 1) * m + (ix - 1)]
        }
    }

    /// Cell-averaged gradient of the multilinear interpolant.
    pub fn gradient(&self) -> GradientField {
        let n = self.domain.cells;
        let h = self.domain.spacing();
        let mut vecs = vec![[0.0; 2]; self.domain.cell_count()];
        if self.domain.dim == 1 {
            for c in 0..n {
                let left = if c == 0 { 0.0 } else { self.values[c - 1] };
                let right = if c + 1 == n { 0.0 } else { self.values[c] };
                vecs[c] = [(right - left) / h, 0.0];
            }
        } else {
            for cy in 0..n {
                for cx in 0..n {
                    let u00 = self.node(cx, cy);
                    let u10 = self.node(cx + 1, cy);
                    let u01 = self.node(cx, cy + 1);
                    let u11 = self.node(cx + 1, cy + 1);
                    vecs[cy * n + cx] = [
                        (u10 + u11 - u00 - u01) / (2.0 * h),
                        (u01 + u11 - u00 - u10) / (2.0 * h),
                    ];
                }
            }
        }
        GradientField {
            domain: self.domain,
            vecs,
        }
    }

    /// Volume-weighted inner product.
    pub fn l2_inner(&self, other: &Self) -> Result<f64, GridError> {
        if self.domain != other.domain {
            return Err(GridError::ShapeMismatch);
        }
        let mut s = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            s += a * b;
        }
        Ok(s * self.domain.volume_weight())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_inner(self).expect("same domain")
    }

    pub fn l2_norm(&self) -> f64 {
        fmath::sqrt(self.l2_norm_sq())
    }

    /// Integral over D (trapezoid with the zero boundary).
    pub fn integral(&self) -> f64 {
        let w = self.domain.volume_weight();
        self.values.iter().sum::<f64>() * w
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(fmath::abs(*v)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GridError> {
        if self.domain != other.domain {
            return Err(GridError::ShapeMismatch);
        }
        Ok(Self {
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        if self.domain != other.domain {
            return Err(GridError::ShapeMismatch);
        }
        Ok(Self {
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Pointwise map of node values (the domain is unchanged).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// Vector field on cells; the second component is zero in 1-D.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub domain: Domain,
    pub vecs: Vec<[f64; 2]>,
}

impl GradientField {
    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            vecs: vec![[0.0; 2]; domain.cell_count()],
        }
    }

    fn cell(&self, cx: usize, cy: usize) -> [f64; 2] {
        self.vecs[cy * self.domain.cells + cx]
    }

    /// Negative adjoint of [`GridFunction::gradient`]; the stencil is the
    /// literal transpose, so `<div F, v> = -<F, grad v>` to rounding.
    pub fn divergence(&self) -> GridFunction {
        let n = self.domain.cells;
        let h = self.domain.spacing();
        let mut out = GridFunction::zeros(self.domain);
        if self.domain.dim == 1 {
            for i in 1..n {
                out.values[i - 1] = (self.vecs[i][0] - self.vecs[i - 1][0]) / h;
            }
        } else {
            let m = n - 1;
            for iy in 1..n {
                for ix in 1..n {
                    let f00 = self.cell(ix - 1, iy - 1);
                    let f10 = self.cell(ix, iy - 1);
                    let f01 = self.cell(ix - 1, iy);
                    let f11 = self.cell(ix, iy);
                    let dx = (f11[0] + f10[0] - f01[0] - f00[0]) / (2.0 * h);
                    let dy = (f11[1] + f01[1] - f10[1] - f00[1]) / (2.0 * h);
                    out.values[(iy - 1) * m + (ix - 1)] = dx + dy;
                }
            }
        }
        out
    }

    /// Volume-weighted inner product of two cell fields.
    pub fn inner(&self, other: &Self) -> Result<f64, GridError> {
        if self.domain != other.domain {
            return Err(GridError::ShapeMismatch);
        }
        let mut s = 0.0;
        for (a, b) in self.vecs.iter().zip(&other.vecs) {
            s += fmath::dot2(*a, *b);
        }
        Ok(s * self.domain.volume_weight())
    }

    pub fn norm(&self) -> f64 {
        fmath::sqrt(self.inner(self).expect("same domain"))
    }
}

/// Time-indexed family of fields on a common grid; frame `m` lives at
/// `times[m]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<GridFunction>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, frames: Vec<GridFunction>) -> Result<Self, GridError> {
        if times.len() != frames.len() || frames.is_empty() {
            return Err(GridError::ShapeMismatch);
        }
        let d = frames[0].domain;
        if frames.iter().any(|f| f.domain != d) {
            return Err(GridError::ShapeMismatch);
        }
        Ok(Self { times, frames })
    }

    pub fn domain(&self) -> Domain {
        self.frames[0].domain
    }

    /// Integrates `g(t, x, f(t,x))` over Q_T by the midpoint rule in time
    /// (frames interpolated linearly to the interval midpoints) and the node
    /// sum in space.
    pub fn qt_quadrature(&self, g: impl Fn(f64, [f64; 2], f64) -> f64) -> f64 {
        let dom = self.domain();
        let w = dom.volume_weight();
        let mut total = 0.0;
        for m in 0..self.frames.len() - 1 {
            let dt = self.times[m + 1] - self.times[m];
            let t_mid = 0.5 * (self.times[m] + self.times[m + 1]);
            let (a, b) = (&self.frames[m], &self.frames[m + 1]);
            let mut slab = 0.0;
            for i in 0..a.values.len() {
                let v = 0.5 * (a.values[i] + b.values[i]);
                slab += g(t_mid, dom.node_coord(i), v);
            }
            total += dt * w * slab;
        }
        total
    }

    /// Integral of the field itself over Q_T.
    pub fn qt_integral(&self) -> f64 {
        self.qt_quadrature(|_, _, v| v)
    }

    /// Largest L^2 distance between corresponding frames.
    pub fn sup_l2_diff(&self, other: &Self) -> Result<f64, GridError> {
        if self.frames.len() != other.frames.len() {
            return Err(GridError::ShapeMismatch);
        }
        let mut sup = 0.0f64;
        for (a, b) in self.frames.iter().zip(&other.frames) {
            sup = sup.max(a.sub(b)?.l2_norm());
        }
        Ok(sup)
    }
}

/// Midpoint-in-time, node-sum-in-space quadrature of a pointwise function
/// over (t0, t1) x D.
pub fn qt_integral_fn(
    domain: Domain,
    t0: f64,
    t1: f64,
    steps: usize,
    f: impl Fn(f64, [f64; 2]) -> f64,
) -> f64 {
    let dt = (t1 - t0) / steps as f64;
    let w = domain.volume_weight();
    let mut total = 0.0;
    for m in 0..steps {
        let t = t0 + (m as f64 + 0.5) * dt;
        let mut slab = 0.0;
        for i in 0..domain.node_count() {
            slab += f(t, domain.node_coord(i));
        }
        total += dt * w * slab;
    }
    total
}
