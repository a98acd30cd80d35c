//! Oberbeck–Boussinesq limit system with the non-local temperature closure.
//!
//! Two equivalent formulations are integrated: the 𝒯-frame, where the wall
//! trace is the data `Θ_B` and the mean temperature enters through the
//! source `Λ`, and the Θ-frame `Θ = 𝒯 - λ⨍𝒯`, where the source is absent and
//! the wall trace becomes `Θ_B - λ/(1-λ) ⨍Θ`.

mod lambda;
mod run;
mod step;

use std::sync::Arc;

pub use lambda::{boundary_flux, lambda_diagnostics, LambdaRecord, LambdaTrace, MeanFluxSample};
pub use run::{run_ob, ObLogRecord, ObRun, ObSnapshot};
pub use step::{step_ob_tframe, step_ob_thetaframe, ObSolver};

use crate::error::{BllError, Result};
use crate::grid::{grad, div, Grid, ScalarField, SpectralSolver, Staggering, VectorField, WallValues};
use crate::thermo::{ob_coefficients, EosParams, ObCoefficients};

/// Heat source hook `(t, x, z) ↦ value`, added to the right side of the
/// temperature equation (used for manufactured solutions).
pub type SourceFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Temperature stored as 𝒯 with Dirichlet trace `Θ_B`.
    T,
    /// Temperature stored as `Θ = 𝒯 - λ⨍𝒯` with the non-local trace.
    Theta,
}

#[derive(Clone)]
pub struct ObScenario {
    pub grid: Grid,
    pub eos: EosParams,
    pub rho_bar: f64,
    pub theta_bar: f64,
    /// Potential `G`, cell-centered, mean-free.
    pub potential: ScalarField,
    /// Wall data `Θ_B` for the temperature deviation.
    pub theta_b: WallValues,
    pub dt: f64,
    pub t_end: f64,
    /// Time between stored snapshots.
    pub snapshot_interval: f64,
    /// Initial temperature deviation 𝒯₀ (𝒯-frame).
    pub t0: ScalarField,
    pub u0: VectorField,
    /// Replaces the mixing weight λ; `Some(0.0)` gives the classical
    /// Dirichlet problem.
    pub lambda_override: Option<f64>,
    pub heat_source: Option<SourceFn>,
}

impl std::fmt::Debug for ObScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObScenario")
            .field("grid", &self.grid)
            .field("eos", &self.eos)
            .field("rho_bar", &self.rho_bar)
            .field("theta_bar", &self.theta_bar)
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("lambda_override", &self.lambda_override)
            .field("heat_source", &self.heat_source.is_some())
            .finish_non_exhaustive()
    }
}

impl ObScenario {
    /// Quiescent scenario with `G = 0`, `Θ_B = 0`, `𝒯₀ = 0`, `U₀ = 0`.
    pub fn new(grid: Grid, eos: EosParams, rho_bar: f64, theta_bar: f64) -> Self {
        Self {
            grid,
            eos,
            rho_bar,
            theta_bar,
            potential: ScalarField::zeros(grid, Staggering::Center),
            theta_b: WallValues::zeros(grid.nx),
            dt: 1e-3,
            t_end: 0.0,
            snapshot_interval: 0.1,
            t0: ScalarField::zeros(grid, Staggering::Center),
            u0: VectorField::zeros(grid),
            lambda_override: None,
            heat_source: None,
        }
    }

    /// `G = -g (z - ½)` with its discrete mean removed.
    pub fn with_gravity(self, g: f64) -> Self {
        let grid = self.grid;
        let pot = gravity_potential(grid, g);
        Self { potential: pot, ..self }
    }

    /// Arbitrary potential; its mean is subtracted.
    pub fn with_potential(self, mut potential: ScalarField) -> Result<Self> {
        potential.require(Staggering::Center)?;
        if *potential.grid() != self.grid {
            return Err(BllError::Shape("potential lives on a different grid".into()));
        }
        let m = potential.mean();
        potential.add_scalar(-m);
        Ok(Self { potential, ..self })
    }

    pub fn with_walls(self, theta_b: WallValues) -> Self {
        Self { theta_b, ..self }
    }

    pub fn with_initial(self, t0: ScalarField, u0: VectorField) -> Self {
        Self { t0, u0, ..self }
    }

    pub fn with_time(self, dt: f64, t_end: f64, snapshot_interval: f64) -> Self {
        Self { dt, t_end, snapshot_interval, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda_override: Some(lambda), ..self }
    }

    pub fn with_heat_source(self, source: SourceFn) -> Self {
        Self { heat_source: Some(source), ..self }
    }

    pub fn coefficients(&self) -> Result<ObCoefficients> {
        ob_coefficients(self.rho_bar, self.theta_bar, &self.eos)
    }

    /// Mixing weight in use (the override when set).
    pub fn lambda(&self) -> Result<f64> {
        match self.lambda_override {
            Some(l) => Ok(l),
            None => Ok(self.coefficients()?.lambda),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.eos.validate()?;
        let c = self.coefficients()?;
        if !(c.alpha > 0.0) {
            return Err(BllError::Stability(format!("thermal expansion {} is not positive", c.alpha)));
        }
        let lambda = self.lambda()?;
        if !(0.0..1.0).contains(&lambda) {
            return Err(BllError::Parameter(format!("mixing weight {lambda} outside [0, 1)")));
        }
        for (name, f) in [("potential", &self.potential), ("initial temperature", &self.t0)] {
            f.require(Staggering::Center)?;
            if *f.grid() != self.grid {
                return Err(BllError::Shape(format!("{name} lives on a different grid")));
            }
            if !f.all_finite() {
                return Err(BllError::Domain(format!("{name} has non-finite entries")));
            }
        }
        if *self.u0.grid() != self.grid {
            return Err(BllError::Shape("initial velocity lives on a different grid".into()));
        }
        if self.potential.mean().abs() > 1e-10 * self.potential.max_abs().max(1.0) {
            return Err(BllError::Parameter("potential G must have zero mean".into()));
        }
        if self.theta_b.bottom.len() != self.grid.nx || self.theta_b.top.len() != self.grid.nx {
            return Err(BllError::Shape("wall data length differs from nx".into()));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || !(self.snapshot_interval > 0.0) {
            return Err(BllError::Parameter(format!(
                "need dt > 0, t_end >= 0, snapshot interval > 0 (got {}, {}, {})",
                self.dt, self.t_end, self.snapshot_interval
            )));
        }
        Ok(())
    }
}

/// `G = -g (z - ½)` sampled at cell centers, mean removed.
pub fn gravity_potential(grid: Grid, g: f64) -> ScalarField {
    let mut pot = ScalarField::from_fn(grid, Staggering::Center, |_, z| -g * (z - 0.5));
    let m = pot.mean();
    pot.add_scalar(-m);
    pot
}

/// Harmonic extension of wall data: `Δh = 0`, `h = data` on the walls.
pub fn harmonic_extension(grid: Grid, walls: &WallValues) -> Result<ScalarField> {
    let solver = SpectralSolver::new(grid);
    solver.shifted(
        &ScalarField::zeros(grid, Staggering::Center),
        0.0,
        1.0,
        &crate::grid::ZBc::Dirichlet(walls.clone()),
    )
}

/// MAC velocity of the stream function `ψ` sampled at cell corners:
/// `u = ∂_z ψ`, `w = -∂_x ψ`. Discretely divergence-free; the wall normal
/// velocity vanishes when `ψ` is constant along each wall.
pub fn velocity_from_streamfunction<F: Fn(f64, f64) -> f64>(grid: Grid, psi: F) -> VectorField {
    let (nx, nz, dx, dz) = (grid.nx, grid.nz, grid.dx, grid.dz);
    let corner = |i: usize, j: usize| psi(i as f64 * dx, j as f64 * dz);
    let mut v = VectorField::zeros(grid);
    for j in 0..nz {
        for i in 0..nx {
            v.u.set(i, j, (corner(i, j + 1) - corner(i, j)) / dz);
        }
    }
    for j in 0..=nz {
        for i in 0..nx {
            v.w.set(i, j, -(corner(i + 1, j) - corner(i, j)) / dx);
        }
    }
    v
}

/// State of the limit system.
#[derive(Debug, Clone)]
pub struct ObState {
    pub u: VectorField,
    /// 𝒯 or Θ depending on `frame`.
    pub temp: ScalarField,
    pub pi: ScalarField,
    pub t: f64,
    pub frame: Frame,
    pub(crate) history: Option<History>,
}

/// Explicit right-hand sides of the previous step (Adams–Bashforth).
#[derive(Debug, Clone)]
pub(crate) struct History {
    pub momentum: VectorField,
    pub heat: ScalarField,
    pub dt: f64,
}

impl ObState {
    /// Temperature in the 𝒯-frame.
    pub fn t_field(&self, lambda: f64) -> ScalarField {
        match self.frame {
            Frame::T => self.temp.clone(),
            Frame::Theta => theta_to_t(&self.temp, lambda),
        }
    }

    /// Temperature in the Θ-frame.
    pub fn theta_field(&self, lambda: f64) -> ScalarField {
        match self.frame {
            Frame::T => t_to_theta(&self.temp, lambda),
            Frame::Theta => self.temp.clone(),
        }
    }
}

fn t_to_theta(t: &ScalarField, lambda: f64) -> ScalarField {
    let shift = lambda * t.mean();
    t.map(|v| v - shift)
}

fn theta_to_t(theta: &ScalarField, lambda: f64) -> ScalarField {
    let shift = lambda / (1.0 - lambda) * theta.mean();
    theta.map(|v| v + shift)
}

/// Changes the temperature variable of a state; the velocity is untouched.
pub fn transform_frame(state: &ObState, to: Frame, lambda: f64) -> ObState {
    let mut out = state.clone();
    out.temp = match to {
        Frame::T => state.t_field(lambda),
        Frame::Theta => state.theta_field(lambda),
    };
    out.frame = to;
    out
}

/// Density deviation `r = (ρ̄G + p_θ⨍𝒯 - p_θ𝒯)/p_ρ` from a 𝒯-frame field.
pub fn recover_density_deviation(t_field: &ScalarField, scenario: &ObScenario) -> Result<ScalarField> {
    let c = scenario.coefficients()?;
    recover_with(t_field, &scenario.potential, &c)
}

pub(crate) fn recover_with(t_field: &ScalarField, potential: &ScalarField, c: &ObCoefficients) -> Result<ScalarField> {
    if !(c.p_rho > 0.0) {
        return Err(BllError::Stability(format!("p_rho = {} is not positive", c.p_rho)));
    }
    let m = t_field.mean();
    potential.zip_map(t_field, |g, t| (c.rho_bar * g + c.p_theta * m - c.p_theta * t) / c.p_rho)
}

/// Maximum mismatch between the extrapolated wall trace of a cell field and
/// the wall data, and the tolerance allowed by the local curvature.
pub fn trace_mismatch(f: &ScalarField, walls: &WallValues) -> (f64, f64) {
    let g = f.grid();
    let nz = g.nz;
    let mut worst: f64 = 0.0;
    let mut excess: f64 = f64::NEG_INFINITY;
    for i in 0..g.nx {
        let (a, b, c) = (f.at(i, 0), f.at(i, 1), f.at(i, 2));
        let bot = (1.5 * a - 0.5 * b - walls.bottom[i]).abs();
        let bot_tol = 1e-10 + (a - 2.0 * b + c).abs();
        let (a, b, c) = (f.at(i, nz - 1), f.at(i, nz - 2), f.at(i, nz - 3));
        let top = (1.5 * a - 0.5 * b - walls.top[i]).abs();
        let top_tol = 1e-10 + (a - 2.0 * b + c).abs();
        worst = worst.max(bot).max(top);
        excess = excess.max(bot - bot_tol).max(top - top_tol);
    }
    (worst, excess)
}

/// Projects `U₀` onto discretely divergence-free, no-penetration fields and
/// checks that `𝒯₀` attains the wall data.
pub fn build_initial_ob(scenario: &ObScenario) -> Result<ObState> {
    scenario.validate()?;
    let (worst, excess) = trace_mismatch(&scenario.t0, &scenario.theta_b);
    if excess > 0.0 {
        return Err(BllError::Compatibility {
            what: "initial temperature trace differs from the wall data".into(),
            mismatch: worst,
        });
    }
    let grid = scenario.grid;
    let mut u = scenario.u0.clone();
    u.enforce_no_slip();
    let solver = SpectralSolver::new(grid);
    let (phi, _) = solver.poisson(&div(&u)?)?;
    u.axpy(-1.0, &grad(&phi)?)?;
    u.enforce_no_slip();
    Ok(ObState {
        u,
        temp: scenario.t0.clone(),
        pi: ScalarField::zeros(grid, Staggering::Center),
        t: 0.0,
        frame: Frame::T,
        history: None,
    })
}
