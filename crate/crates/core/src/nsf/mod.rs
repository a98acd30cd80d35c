//! Explicit integrator for the scaled compressible system at finite ε.
//!
//! Density and internal energy density live at cell centers and are updated
//! in conservative form; velocity lives on the MAC faces and is advanced in
//! advective form. Walls are no-slip with Dirichlet temperature
//! `θ̄ + ε Θ_B`.

mod hydrostatic;
mod run;
mod step;

pub use hydrostatic::{hydrostatic_stationary_1d, HydrostaticProfile};
pub use run::{ballistic_energy, run_nsf, run_nsf_observed, ConservationRecord, NsfRun, NsfSnapshot};
pub use step::{stable_dt, step_nsf, Integrator, NsfStepper, NSF_CFL_MAX};

use crate::error::{BllError, Result};
use crate::grid::{Grid, ScalarField, Staggering, VectorField, WallValues};
use crate::ob::{build_initial_ob, recover_density_deviation, ObScenario};
use crate::thermo::{energy_unchecked, EosParams};

#[derive(Debug, Clone)]
pub struct NsfScenario {
    pub grid: Grid,
    pub eos: EosParams,
    pub rho_bar: f64,
    pub theta_bar: f64,
    /// Potential `G`, mean-free.
    pub potential: ScalarField,
    /// Wall data; the wall temperature is `θ̄ + ε Θ_B`.
    pub theta_b: WallValues,
    pub eps: f64,
    /// Courant number used to pick the step.
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    /// Density deviation `ρ₀`: `ρ(0) = ρ̄ + ε ρ₀`, mean-free.
    pub rho_dev: ScalarField,
    /// Temperature deviation: `θ(0) = θ̄ + ε θ₀`.
    pub theta_dev: ScalarField,
    pub u0: VectorField,
    pub integrator: Integrator,
}

impl NsfScenario {
    /// Well-prepared data built from a limit scenario: `𝒯₀` and the projected
    /// `U₀` of the limit problem, and `ρ₀` from the Boussinesq relation.
    pub fn well_prepared(ob: &ObScenario, eps: f64, cfl: f64) -> Result<Self> {
        let init = build_initial_ob(ob)?;
        let rho_dev = recover_density_deviation(&init.temp, ob)?;
        Ok(Self {
            grid: ob.grid,
            eos: ob.eos,
            rho_bar: ob.rho_bar,
            theta_bar: ob.theta_bar,
            potential: ob.potential.clone(),
            theta_b: ob.theta_b.clone(),
            eps,
            cfl,
            t_end: ob.t_end,
            snapshot_interval: ob.snapshot_interval,
            rho_dev,
            theta_dev: init.temp,
            u0: init.u,
            integrator: Integrator::default(),
        })
    }

    /// Uniform state `(ρ̄, θ̄, 0)` with `G = 0` and `Θ_B = 0`.
    pub fn uniform(grid: Grid, eos: EosParams, rho_bar: f64, theta_bar: f64, eps: f64) -> Self {
        Self {
            grid,
            eos,
            rho_bar,
            theta_bar,
            potential: ScalarField::zeros(grid, Staggering::Center),
            theta_b: WallValues::zeros(grid.nx),
            eps,
            cfl: 0.4,
            t_end: 0.0,
            snapshot_interval: 0.1,
            rho_dev: ScalarField::zeros(grid, Staggering::Center),
            theta_dev: ScalarField::zeros(grid, Staggering::Center),
            u0: VectorField::zeros(grid),
            integrator: Integrator::default(),
        }
    }

    pub fn with_time(self, t_end: f64, snapshot_interval: f64) -> Self {
        Self { t_end, snapshot_interval, ..self }
    }

    /// Wall temperatures `θ̄ + ε Θ_B`.
    pub fn wall_temperature(&self) -> WallValues {
        self.theta_b.scaled(self.eps).shifted(self.theta_bar)
    }

    pub fn validate(&self) -> Result<()> {
        self.eos.validate()?;
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(BllError::Parameter(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(BllError::Parameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.rho_bar > 0.0) || !(self.theta_bar > 0.0) {
            return Err(BllError::Parameter("reference state must be positive".into()));
        }
        for f in [&self.potential, &self.rho_dev, &self.theta_dev] {
            f.require(Staggering::Center)?;
            if *f.grid() != self.grid {
                return Err(BllError::Shape("initial field lives on a different grid".into()));
            }
        }
        if *self.u0.grid() != self.grid {
            return Err(BllError::Shape("initial velocity lives on a different grid".into()));
        }
        if self.theta_b.bottom.len() != self.grid.nx || self.theta_b.top.len() != self.grid.nx {
            return Err(BllError::Shape("wall data length differs from nx".into()));
        }
        let scale = self.rho_dev.max_abs().max(1.0);
        if self.rho_dev.mean().abs() > 1e-10 * scale {
            return Err(BllError::Parameter("initial density deviation must have zero mean".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsfState {
    pub rho: ScalarField,
    pub theta: ScalarField,
    pub u: VectorField,
    pub t: f64,
    pub eps: f64,
}

impl NsfState {
    pub fn total_mass(&self) -> f64 {
        self.rho.integral()
    }

    /// Internal energy density `ρ e` at cell centers.
    pub fn energy_density(&self, eos: &EosParams) -> ScalarField {
        self.rho
            .zip_map(&self.theta, |r, t| r * energy_unchecked(r, t, eos))
            .expect("density and temperature share a layout")
    }

    pub fn mirrored_x(&self) -> Self {
        Self {
            rho: self.rho.mirrored_x(),
            theta: self.theta.mirrored_x(),
            u: self.u.mirrored_x(),
            t: self.t,
            eps: self.eps,
        }
    }
}

/// `ρ = ρ̄ + ε ρ₀`, `θ = θ̄ + ε θ₀`, `u = u₀`; positivity is required.
pub fn build_initial_nsf(scenario: &NsfScenario) -> Result<NsfState> {
    scenario.validate()?;
    let eps = scenario.eps;
    let rho = scenario.rho_dev.map(|r| scenario.rho_bar + eps * r);
    let theta = scenario.theta_dev.map(|t| scenario.theta_bar + eps * t);
    if rho.min() <= 0.0 {
        return Err(BllError::EpsTooLarge { eps, field: "density", min: rho.min() });
    }
    if theta.min() <= 0.0 {
        return Err(BllError::EpsTooLarge { eps, field: "temperature", min: theta.min() });
    }
    let wall = scenario.wall_temperature();
    let wall_min = wall.bottom.iter().chain(&wall.top).copied().fold(f64::INFINITY, f64::min);
    if wall_min <= 0.0 {
        return Err(BllError::EpsTooLarge { eps, field: "wall temperature", min: wall_min });
    }
    let mut u = scenario.u0.clone();
    u.enforce_no_slip();
    Ok(NsfState { rho, theta, u, t: 0.0, eps })
}
