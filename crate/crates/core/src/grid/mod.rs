//! Staggered (MAC) grid on the periodic strip `𝕋 × (0, 1)`.
//!
//! Cell centers sit at `((i + ½) dx, (j + ½) dz)`. The horizontal velocity
//! lives on x-faces `(i dx, (j + ½) dz)` and the vertical velocity on z-faces
//! `((i + ½) dx, j dz)`, `j = 0..=nz`, so the wall rows of a z-face field are
//! physical boundary nodes. Storage is row-major with `x` fastest.

mod ops;
mod snapshot;
mod solvers;

pub use ops::{
    center_to_xface, center_to_zface, div, grad, laplacian, vector_at_centers, xface_to_center,
    zface_to_center,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use solvers::SpectralSolver;

use crate::error::{BllError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub nz: usize,
    pub lx: f64,
    pub dx: f64,
    pub dz: f64,
}

impl Grid {
    pub fn new(nx: usize, nz: usize, lx: f64) -> Result<Self> {
        if nx < 4 || nz < 4 {
            return Err(BllError::Parameter(format!("grid must be at least 4x4, got {nx}x{nz}")));
        }
        if !(lx > 0.0) || !lx.is_finite() {
            return Err(BllError::Parameter(format!("period Lx must be positive, got {lx}")));
        }
        Ok(Self { nx, nz, lx, dx: lx / nx as f64, dz: 1.0 / nz as f64 })
    }

    /// Unit-period grid.
    pub fn unit(nx: usize, nz: usize) -> Result<Self> {
        Self::new(nx, nz, 1.0)
    }

    pub fn area(&self) -> f64 {
        self.lx
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dz
    }

    pub fn rows(&self, stag: Staggering) -> usize {
        match stag {
            Staggering::ZFace => self.nz + 1,
            _ => self.nz,
        }
    }

    pub fn len(&self, stag: Staggering) -> usize {
        self.nx * self.rows(stag)
    }

    /// Physical coordinates of node `(i, j)` for the given staggering.
    pub fn coords(&self, stag: Staggering, i: usize, j: usize) -> (f64, f64) {
        match stag {
            Staggering::Center => ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dz),
            Staggering::XFace => (i as f64 * self.dx, (j as f64 + 0.5) * self.dz),
            Staggering::ZFace => ((i as f64 + 0.5) * self.dx, j as f64 * self.dz),
        }
    }

    /// Same grid refined (or coarsened) by the given integer factors.
    pub fn refined(&self, fx: usize, fz: usize) -> Result<Self> {
        Self::new(self.nx * fx, self.nz * fz, self.lx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Staggering {
    Center,
    XFace,
    ZFace,
}

impl Staggering {
    pub fn tag(self) -> u8 {
        match self {
            Staggering::Center => 0,
            Staggering::XFace => 1,
            Staggering::ZFace => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Staggering::Center),
            1 => Some(Staggering::XFace),
            2 => Some(Staggering::ZFace),
            _ => None,
        }
    }
}

/// Boundary data on the two walls, one value per column.
#[derive(Debug, Clone, PartialEq)]
pub struct WallValues {
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl WallValues {
    pub fn constant(nx: usize, bottom: f64, top: f64) -> Self {
        Self { bottom: vec![bottom; nx], top: vec![top; nx] }
    }

    pub fn zeros(nx: usize) -> Self {
        Self::constant(nx, 0.0, 0.0)
    }

    pub fn from_fn<F: Fn(f64) -> (f64, f64)>(grid: &Grid, f: F) -> Self {
        let (bottom, top) = (0..grid.nx)
            .map(|i| f((i as f64 + 0.5) * grid.dx))
            .unzip();
        Self { bottom, top }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            bottom: self.bottom.iter().map(|v| v * s).collect(),
            top: self.top.iter().map(|v| v * s).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            bottom: self.bottom.iter().map(|v| v + c).collect(),
            top: self.top.iter().map(|v| v + c).collect(),
        }
    }

    /// Mean over both walls.
    pub fn mean(&self) -> f64 {
        let n = (self.bottom.len() + self.top.len()) as f64;
        (self.bottom.iter().sum::<f64>() + self.top.iter().sum::<f64>()) / n
    }

    pub fn is_zero(&self) -> bool {
        self.bottom.iter().chain(&self.top).all(|&v| v == 0.0)
    }

    fn check(&self, nx: usize) -> Result<()> {
        if self.bottom.len() != nx || self.top.len() != nx {
            return Err(BllError::Shape(format!(
                "wall data has {}/{} entries, grid has {nx} columns",
                self.bottom.len(),
                self.top.len()
            )));
        }
        Ok(())
    }
}

/// Wall condition for the z-direction of elliptic operators.
#[derive(Debug, Clone, PartialEq)]
pub enum ZBc {
    /// Homogeneous Neumann.
    Neumann,
    /// Dirichlet data at the walls.
    Dirichlet(WallValues),
}

impl ZBc {
    pub fn zero_dirichlet(nx: usize) -> Self {
        ZBc::Dirichlet(WallValues::zeros(nx))
    }
}

/// A scalar grid function with its staggering.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    stag: Staggering,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid, stag: Staggering) -> Self {
        Self { grid, stag, data: vec![0.0; grid.len(stag)] }
    }

    pub fn constant(grid: Grid, stag: Staggering, c: f64) -> Self {
        Self { grid, stag, data: vec![c; grid.len(stag)] }
    }

    pub fn from_vec(grid: Grid, stag: Staggering, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len(stag) {
            return Err(BllError::Shape(format!(
                "{} values for a {:?} field on {}x{}",
                data.len(),
                stag,
                grid.nx,
                grid.nz
            )));
        }
        Ok(Self { grid, stag, data })
    }

    /// Samples `f(x, z)` at the nodes of the given staggering.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid, stag: Staggering, f: F) -> Self {
        let mut data = Vec::with_capacity(grid.len(stag));
        for j in 0..grid.rows(stag) {
            for i in 0..grid.nx {
                let (x, z) = grid.coords(stag, i, j);
                data.push(f(x, z));
            }
        }
        Self { grid, stag, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn staggering(&self) -> Staggering {
        self.stag
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.grid.nx + i] = v;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.data[j * nx..(j + 1) * nx]
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self { grid: self.grid, stag: self.stag, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        self.same_layout(other)?;
        Ok(Self {
            grid: self.grid,
            stag: self.stag,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn same_layout(&self, other: &Self) -> Result<()> {
        if self.stag != other.stag || self.grid != other.grid {
            return Err(BllError::Shape(format!(
                "layout mismatch: {:?} on {}x{} vs {:?} on {}x{}",
                self.stag, self.grid.nx, self.grid.nz, other.stag, other.grid.nx, other.grid.nz
            )));
        }
        Ok(())
    }

    pub fn require(&self, stag: Staggering) -> Result<()> {
        if self.stag != stag {
            return Err(BllError::Shape(format!("expected a {stag:?} field, got {:?}", self.stag)));
        }
        Ok(())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.same_layout(other)?;
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn add_scalar(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v += c);
    }

    fn row_weight(&self, j: usize) -> f64 {
        if self.stag == Staggering::ZFace && (j == 0 || j == self.grid.nz) {
            0.5
        } else {
            1.0
        }
    }

    /// Area-weighted average. Exact midpoint rule for centers and x-faces;
    /// trapezoidal in z for z-face fields.
    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.area()
    }

    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.grid.rows(self.stag) {
            total += self.row_weight(j) * self.row(j).iter().sum::<f64>();
        }
        total * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn norm_l1(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.grid.rows(self.stag) {
            total += self.row_weight(j) * self.row(j).iter().map(|v| v.abs()).sum::<f64>();
        }
        total * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).map(f64::sqrt).unwrap_or(f64::NAN)
    }

    /// Discrete `L²` inner product with the same weights as [`Self::integral`].
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.same_layout(other)?;
        let nx = self.grid.nx;
        let mut total = 0.0;
        for j in 0..self.grid.rows(self.stag) {
            let a = &self.data[j * nx..(j + 1) * nx];
            let b = &other.data[j * nx..(j + 1) * nx];
            total += self.row_weight(j) * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        Ok(total * self.grid.cell_area())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Mirror image under `x ↦ Lx - x`.
    pub fn mirrored_x(&self) -> Self {
        let nx = self.grid.nx;
        let mut out = self.clone();
        for j in 0..self.grid.rows(self.stag) {
            for i in 0..nx {
                let src = match self.stag {
                    Staggering::XFace => (nx - i) % nx,
                    _ => nx - 1 - i,
                };
                out.data[j * nx + i] = self.data[j * nx + src];
            }
        }
        out
    }

    /// Column-averaged profile (one value per row).
    pub fn horizontal_mean(&self) -> Vec<f64> {
        (0..self.grid.rows(self.stag))
            .map(|j| self.row(j).iter().sum::<f64>() / self.grid.nx as f64)
            .collect()
    }
}

/// MAC velocity: `u` on x-faces, `w` on z-faces.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u: ScalarField,
    pub w: ScalarField,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            u: ScalarField::zeros(grid, Staggering::XFace),
            w: ScalarField::zeros(grid, Staggering::ZFace),
        }
    }

    pub fn new(u: ScalarField, w: ScalarField) -> Result<Self> {
        u.require(Staggering::XFace)?;
        w.require(Staggering::ZFace)?;
        if u.grid() != w.grid() {
            return Err(BllError::Shape("velocity components live on different grids".into()));
        }
        Ok(Self { u, w })
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// Zeroes the wall-normal velocity on both walls.
    pub fn enforce_no_slip(&mut self) {
        let (nx, nz) = (self.grid().nx, self.grid().nz);
        let w = self.w.values_mut();
        w[..nx].iter_mut().for_each(|v| *v = 0.0);
        w[nz * nx..].iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.u.axpy(a, &other.u)?;
        self.w.axpy(a, &other.w)
    }

    pub fn scale(&mut self, a: f64) {
        self.u.scale(a);
        self.w.scale(a);
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.w.max_abs())
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        Ok(self.u.dot(&other.u)? + self.w.dot(&other.w)?)
    }

    pub fn all_finite(&self) -> bool {
        self.u.all_finite() && self.w.all_finite()
    }

    /// Mirror image under `x ↦ Lx - x`; the horizontal component flips sign.
    pub fn mirrored_x(&self) -> Self {
        let mut u = self.u.mirrored_x();
        u.scale(-1.0);
        Self { u, w: self.w.mirrored_x() }
    }
}
