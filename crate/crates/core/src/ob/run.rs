use super::lambda::{lambda_diagnostics, LambdaTrace, MeanFluxSample};
use super::step::ObSolver;
use super::{build_initial_ob, recover_with, transform_frame, Frame, ObScenario, ObState};
use crate::error::{BllError, Result};
use crate::grid::{div, ScalarField, VectorField};
use crate::timing::Schedule;

#[derive(Debug, Clone)]
pub struct ObSnapshot {
    pub t: f64,
    pub u: VectorField,
    /// Temperature deviation in the 𝒯-frame.
    pub t_field: ScalarField,
    /// Density deviation recovered from the Boussinesq relation.
    pub r: ScalarField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObLogRecord {
    pub t: f64,
    pub mean_t: f64,
    pub kinetic_energy: f64,
    pub max_div: f64,
}

#[derive(Debug, Clone)]
pub struct ObRun {
    pub frame: Frame,
    pub lambda: f64,
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<ObSnapshot>,
    pub lambda_trace: LambdaTrace,
    pub log: Vec<ObLogRecord>,
}

impl ObRun {
    pub fn final_snapshot(&self) -> &ObSnapshot {
        self.snapshots.last().expect("a run stores at least the initial snapshot")
    }

    pub fn log_csv(&self) -> String {
        let mut s = String::from("t,mean_T,kinetic_energy,max_div\n");
        for r in &self.log {
            s.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.6e}\n", r.t, r.mean_t, r.kinetic_energy, r.max_div));
        }
        s
    }
}

/// Integrates the limit system to `t_end`, storing snapshots every
/// `snapshot_interval` and the per-step mean-temperature diagnostics.
pub fn run_ob(scenario: &ObScenario, frame: Frame) -> Result<ObRun> {
    let schedule = Schedule::new(scenario.dt, scenario.snapshot_interval, scenario.t_end)?;
    let mut solver = ObSolver::new(scenario)?;
    let lambda = solver.lambda();
    let c = *solver.coefficients();
    let initial = build_initial_ob(scenario)?;
    let mut state = transform_frame(&initial, frame, lambda);

    let mut snapshots = Vec::with_capacity(schedule.snapshots + 1);
    let mut samples = Vec::with_capacity(schedule.total_steps() + 1);
    let mut log = Vec::with_capacity(schedule.total_steps() + 1);
    let record = |st: &ObState, snaps: &mut Vec<ObSnapshot>, store: bool, samples: &mut Vec<MeanFluxSample>, log: &mut Vec<ObLogRecord>| -> Result<()> {
        let t_field = st.t_field(lambda);
        samples.push(MeanFluxSample::of(st.t, &t_field));
        log.push(ObLogRecord {
            t: st.t,
            mean_t: t_field.mean(),
            kinetic_energy: 0.5 * c.rho_bar * st.u.dot(&st.u)?,
            max_div: div(&st.u)?.max_abs(),
        });
        if store {
            let r = recover_with(&t_field, &scenario.potential, &c)?;
            snaps.push(ObSnapshot { t: st.t, u: st.u.clone(), t_field, r });
        }
        Ok(())
    };
    record(&state, &mut snapshots, true, &mut samples, &mut log)?;

    for n in 1..=schedule.total_steps() {
        state = solver.step(&state, schedule.dt).map_err(|e| match e {
            BllError::Divergence { time, reason, .. } => BllError::Divergence { step: n, time, reason },
            other => other,
        })?;
        state.t = schedule.time_of(n);
        record(&state, &mut snapshots, n % schedule.steps_per_snapshot == 0, &mut samples, &mut log)?;
    }

    let lambda_trace = if samples.len() >= 2 {
        lambda_diagnostics(&samples, c.lambda_prefactor(), lambda, c.diffusivity(), scenario.grid.area())?
    } else {
        LambdaTrace::default()
    };
    Ok(ObRun {
        frame,
        lambda,
        dt: schedule.dt,
        steps: schedule.total_steps(),
        snapshots,
        lambda_trace,
        log,
    })
}
