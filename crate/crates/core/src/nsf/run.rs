use std::time::Instant;

use super::step::NsfStepper;
use super::{build_initial_nsf, NsfScenario, NsfState};
use crate::error::{BllError, Result};
use crate::grid::{ScalarField, Staggering, VectorField};
use crate::ob::{harmonic_extension, trace_mismatch};
use crate::thermo::{energy_unchecked, entropy_unchecked};

#[derive(Debug, Clone)]
pub struct NsfSnapshot {
    pub t: f64,
    pub rho: ScalarField,
    pub theta: ScalarField,
    pub u: VectorField,
}

impl NsfSnapshot {
    fn of(s: &NsfState) -> Self {
        Self { t: s.t, rho: s.rho.clone(), theta: s.theta.clone(), u: s.u.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass: f64,
    pub ballistic_energy: f64,
    /// Integrated entropy production rate.
    pub entropy_proxy: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct NsfRun {
    pub steps: usize,
    pub wall_clock_secs: f64,
    pub snapshots: Vec<NsfSnapshot>,
    pub log: Vec<ConservationRecord>,
}

impl NsfRun {
    pub fn final_snapshot(&self) -> &NsfSnapshot {
        self.snapshots.last().expect("a run stores at least the initial snapshot")
    }

    /// Largest relative deviation of the total mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.log.first().map_or(0.0, |r| r.mass);
        self.log.iter().fold(0.0, |d, r| d.max(((r.mass - m0) / m0).abs()))
    }

    pub fn log_csv(&self) -> String {
        let mut s = String::from("t,mass,ballistic_energy,entropy_proxy,dt\n");
        for r in &self.log {
            s.push_str(&format!(
                "{:.12e},{:.16e},{:.12e},{:.12e},{:.6e}\n",
                r.t, r.mass, r.ballistic_energy, r.entropy_proxy, r.dt
            ));
        }
        s
    }
}

/// `∫ ε² ½ ρ|u|² + ρ e - θ̃ ρ s`. The kinetic part is assembled on faces
/// with face-averaged density; `theta_tilde` must carry the wall temperature.
pub fn ballistic_energy(state: &NsfState, theta_tilde: &ScalarField, scenario: &NsfScenario) -> Result<f64> {
    theta_tilde.require(Staggering::Center)?;
    state.rho.same_layout(theta_tilde)?;
    if !(theta_tilde.min() > 0.0) {
        return Err(BllError::Domain(format!("reference temperature must be positive, min {}", theta_tilde.min())));
    }
    let (worst, excess) = trace_mismatch(theta_tilde, &scenario.wall_temperature());
    if excess > 0.0 {
        return Err(BllError::Compatibility {
            what: "reference temperature trace differs from the wall temperature".into(),
            mismatch: worst,
        });
    }
    let g = state.rho.grid();
    let (nx, nz) = (g.nx, g.nz);
    let eos = &scenario.eos;
    let rho = state.rho.values();
    let theta = state.theta.values();
    let tt = theta_tilde.values();
    let mut thermal = 0.0;
    for k in 0..nx * nz {
        let (r, t) = (rho[k], theta[k]);
        thermal += r * energy_unchecked(r, t, eos) - tt[k] * r * entropy_unchecked(r, t, eos);
    }
    let (u, w) = (state.u.u.values(), state.u.w.values());
    let mut kinetic = 0.0;
    for j in 0..nz {
        for i in 0..nx {
            let k = j * nx + i;
            let im = j * nx + if i == 0 { nx - 1 } else { i - 1 };
            kinetic += 0.5 * (rho[k] + rho[im]) * u[k] * u[k];
            if j > 0 {
                kinetic += 0.5 * (rho[k] + rho[k - nx]) * w[k] * w[k];
            }
        }
    }
    let eps2 = state.eps * state.eps;
    Ok((eps2 * 0.5 * kinetic + thermal) * g.cell_area())
}

/// Integrates to `t_end`. The step is re-chosen from the CFL condition at the
/// start of every snapshot interval and shrunk so the interval is hit exactly.
pub fn run_nsf(scenario: &NsfScenario) -> Result<NsfRun> {
    run_nsf_observed(scenario, |_, _| Ok(()))
}

/// [`run_nsf`] with a callback invoked on the initial state and after every
/// accepted step, together with the step just taken (zero initially).
pub fn run_nsf_observed<F>(scenario: &NsfScenario, mut observe: F) -> Result<NsfRun>
where
    F: FnMut(&NsfState, f64) -> Result<()>,
{
    let started = Instant::now();
    let stepper = NsfStepper::new(scenario)?;
    let mut state = build_initial_nsf(scenario)?;
    let theta_tilde = harmonic_extension(scenario.grid, &scenario.wall_temperature())?;
    let interval = scenario.snapshot_interval;
    if !(interval > 0.0) || !(scenario.t_end >= 0.0) {
        return Err(BllError::Parameter("snapshot interval and end time must be positive".into()));
    }
    let ratio = scenario.t_end / interval;
    let n_intervals = ratio.round() as usize;
    if (ratio - n_intervals as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(BllError::Parameter(format!(
            "t_end = {} is not a multiple of the snapshot interval {interval}",
            scenario.t_end
        )));
    }

    let log_entry = |s: &NsfState, dt: f64| -> Result<ConservationRecord> {
        Ok(ConservationRecord {
            t: s.t,
            mass: s.total_mass(),
            ballistic_energy: ballistic_energy(s, &theta_tilde, scenario)?,
            entropy_proxy: stepper.entropy_production(s),
            dt,
        })
    };
    observe(&state, 0.0)?;
    let mut log = vec![log_entry(&state, 0.0)?];
    let mut snapshots = vec![NsfSnapshot::of(&state)];
    let mut steps = 0;
    for m in 1..=n_intervals {
        let dt_cfl = stepper.stable_dt(&state)?;
        let n = (interval / dt_cfl).ceil().max(1.0) as usize;
        let dt = interval / n as f64;
        let t_start = (m - 1) as f64 * interval;
        for q in 1..=n {
            steps += 1;
            state = stepper.step(&state, dt).map_err(|e| match e {
                BllError::Divergence { time, reason, .. } => BllError::Divergence { step: steps, time, reason },
                other => other,
            })?;
            state.t = if q == n { m as f64 * interval } else { t_start + q as f64 * dt };
            observe(&state, dt)?;
            log.push(log_entry(&state, dt)?);
        }
        snapshots.push(NsfSnapshot::of(&state));
    }
    Ok(NsfRun { steps, wall_clock_secs: started.elapsed().as_secs_f64(), snapshots, log })
}
