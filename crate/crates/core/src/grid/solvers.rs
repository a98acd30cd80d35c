//! Direct elliptic solves: FFT along the periodic direction, one tridiagonal
//! (Thomas) solve per horizontal wavenumber along `z`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Grid, ScalarField, Staggering, ZBc};
use crate::error::{BllError, Result};

type C64 = Complex<f64>;

/// Cached FFT plans and horizontal eigenvalues for one grid.
#[derive(Clone)]
pub struct SpectralSolver {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Eigenvalues of `-∂²_x` for the three-point stencil.
    kx2: Vec<f64>,
}

impl std::fmt::Debug for SpectralSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSolver").field("grid", &self.grid).finish()
    }
}

impl SpectralSolver {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.nx);
        let inv = planner.plan_fft_inverse(grid.nx);
        let kx2 = (0..grid.nx)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / grid.nx as f64;
                (2.0 - 2.0 * th.cos()) / (grid.dx * grid.dx)
            })
            .collect();
        Self { grid, fwd, inv, kx2 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn forward_rows(&self, data: &[f64], rows: usize) -> Vec<C64> {
        let nx = self.grid.nx;
        let mut spec: Vec<C64> = data[..rows * nx].iter().map(|&v| C64::new(v, 0.0)).collect();
        self.fwd.process(&mut spec);
        spec
    }

    fn forward_wall(&self, wall: &[f64]) -> Vec<C64> {
        let mut spec: Vec<C64> = wall.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.fwd.process(&mut spec);
        spec
    }

    fn inverse_rows(&self, mut spec: Vec<C64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let scale = 1.0 / self.grid.nx as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// Solves `Δφ = rhs` with homogeneous Neumann walls and `mean(φ) = 0`.
    /// The mean of `rhs` is removed first and returned alongside `φ`.
    pub fn poisson(&self, rhs: &ScalarField) -> Result<(ScalarField, f64)> {
        rhs.require(Staggering::Center)?;
        self.check_grid(rhs)?;
        if !rhs.all_finite() {
            return Err(BllError::Domain("non-finite right-hand side".into()));
        }
        let (nx, nz, dz) = (self.grid.nx, self.grid.nz, self.grid.dz);
        let m = rhs.mean();
        let shifted: Vec<f64> = rhs.values().iter().map(|v| v - m).collect();
        let mut spec = self.forward_rows(&shifted, nz);

        let idz2 = 1.0 / (dz * dz);
        let mut col = vec![C64::new(0.0, 0.0); nz];
        let mut diag = vec![0.0; nz];
        for k in 0..nx {
            for j in 0..nz {
                col[j] = spec[j * nx + k];
            }
            if k == 0 {
                // Singular mode: integrate the flux from the bottom wall.
                let mut flux = C64::new(0.0, 0.0);
                let mut phi = C64::new(0.0, 0.0);
                let mut out = vec![C64::new(0.0, 0.0); nz];
                for j in 0..nz {
                    out[j] = phi;
                    flux += col[j] * dz;
                    phi += flux * dz;
                }
                let mean = out.iter().sum::<C64>() / nz as f64;
                for j in 0..nz {
                    col[j] = out[j] - mean;
                }
            } else {
                // -Δ is positive definite for k ≠ 0; solve (-Δ)φ = -rhs.
                for (j, d) in diag.iter_mut().enumerate() {
                    let walls = usize::from(j == 0) + usize::from(j + 1 == nz);
                    *d = self.kx2[k] + (2 - walls) as f64 * idz2;
                }
                for c in col.iter_mut() {
                    *c = -*c;
                }
                thomas(-idz2, &diag, -idz2, &mut col);
            }
            for j in 0..nz {
                spec[j * nx + k] = col[j];
            }
        }
        let phi = ScalarField::from_vec(self.grid, Staggering::Center, self.inverse_rows(spec))?;
        Ok((phi, m))
    }

    /// Solves `(I - cΔ) g = f`.
    pub fn helmholtz(&self, f: &ScalarField, c: f64, bc: &ZBc) -> Result<ScalarField> {
        self.shifted(f, 1.0, c, bc)
    }

    /// Solves `(σ - cΔ) g = f` for any staggering. With `σ = 0` and
    /// Dirichlet data this is a (harmonic-extension type) Poisson solve.
    pub fn shifted(&self, f: &ScalarField, sigma: f64, c: f64, bc: &ZBc) -> Result<ScalarField> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(BllError::Parameter(format!("diffusion coefficient must be positive, got {c}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(BllError::Parameter(format!("shift must be non-negative, got {sigma}")));
        }
        self.check_grid(f)?;
        if !f.all_finite() {
            return Err(BllError::Domain("non-finite right-hand side".into()));
        }
        let (nx, nz, dz) = (self.grid.nx, self.grid.nz, self.grid.dz);
        let off = c / (dz * dz);
        let stag = f.staggering();

        // Unknown rows and their offset in the stored field.
        let (first, count) = match stag {
            Staggering::ZFace => (1usize, nz - 1),
            _ => (0usize, nz),
        };
        let walls = match (bc, stag) {
            (ZBc::Dirichlet(w), _) => {
                if w.bottom.len() != nx || w.top.len() != nx {
                    return Err(BllError::Shape("wall data length differs from nx".into()));
                }
                Some((self.forward_wall(&w.bottom), self.forward_wall(&w.top)))
            }
            (ZBc::Neumann, Staggering::ZFace) => {
                return Err(BllError::Shape(
                    "z-face fields carry wall nodes and need Dirichlet data".into(),
                ))
            }
            (ZBc::Neumann, _) => {
                if sigma == 0.0 {
                    return Err(BllError::Parameter(
                        "pure Neumann problem is singular; use the Poisson solve".into(),
                    ));
                }
                None
            }
        };

        let rows: Vec<f64> = f.values()[first * nx..(first + count) * nx].to_vec();
        let mut spec = self.forward_rows(&rows, count);

        // Wall weight: Dirichlet ghost `2b - g` adds 3 to the diagonal, the
        // Neumann ghost adds 1; a z-face unknown next to a wall node adds 2.
        let (end_diag, end_rhs) = match (stag, walls.is_some()) {
            (Staggering::ZFace, _) => (2.0, 1.0),
            (_, true) => (3.0, 2.0),
            (_, false) => (1.0, 0.0),
        };
        let mut col = vec![C64::new(0.0, 0.0); count];
        let mut diag = vec![0.0; count];
        for k in 0..nx {
            let base = sigma + c * self.kx2[k];
            for (j, d) in diag.iter_mut().enumerate() {
                *d = base + 2.0 * off;
                if j == 0 {
                    *d += (end_diag - 2.0) * off;
                }
                if j + 1 == count {
                    *d += (end_diag - 2.0) * off;
                }
            }
            for j in 0..count {
                col[j] = spec[j * nx + k];
            }
            if let Some((bot, top)) = &walls {
                col[0] += bot[k] * (end_rhs * off);
                col[count - 1] += top[k] * (end_rhs * off);
            }
            thomas(-off, &diag, -off, &mut col);
            for j in 0..count {
                spec[j * nx + k] = col[j];
            }
        }
        let solved = self.inverse_rows(spec);
        let mut out = ScalarField::zeros(self.grid, stag);
        {
            let o = out.values_mut();
            o[first * nx..(first + count) * nx].copy_from_slice(&solved);
            if let (Staggering::ZFace, ZBc::Dirichlet(w)) = (stag, bc) {
                o[..nx].copy_from_slice(&w.bottom);
                o[nz * nx..].copy_from_slice(&w.top);
            }
        }
        Ok(out)
    }

    fn check_grid(&self, f: &ScalarField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(BllError::Shape("field grid differs from the solver grid".into()));
        }
        Ok(())
    }
}

/// Thomas algorithm for a tridiagonal system with constant off-diagonals,
/// real coefficients and complex right-hand side (solved in place).
fn thomas(sub: f64, diag: &[f64], sup: f64, rhs: &mut [C64]) {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for j in 1..n {
        cp[j - 1] = sup / beta;
        beta = diag[j] - sub * cp[j - 1];
        let prev = rhs[j - 1];
        rhs[j] = (rhs[j] - prev * sub) / beta;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= next * cp[j];
    }
}
