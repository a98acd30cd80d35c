//! ε-sweeps of the compressible solver against one shared limit run, and the
//! comparison of the non-local limit with the classical Dirichlet one.

use rayon::prelude::*;

use super::norms::{error_norms_m7, ConvergenceRow, ConvergenceTable};
use super::relative::{ess_res_decompose, EssentialSet};
use crate::error::{BllError, Result};
use crate::nsf::{run_nsf_observed, Integrator, NsfScenario, NsfSnapshot};
use crate::ob::{run_ob, Frame, ObRun, ObScenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub cfl: f64,
    pub integrator: Integrator,
    /// Also tabulate errors against the classical Dirichlet limit (λ = 0).
    pub naive: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { cfl: 0.4, integrator: Integrator::default(), naive: false }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub modified: ConvergenceTable,
    pub naive: Option<ConvergenceTable>,
    pub ob_run: ObRun,
}

struct Member {
    eps: f64,
    snapshots: Vec<NsfSnapshot>,
    steps: usize,
    residual_measure: f64,
}

fn run_member(ob: &ObScenario, eps: f64, opts: &SweepOptions) -> Result<Member> {
    let mut sc = NsfScenario::well_prepared(ob, eps, opts.cfl)?;
    sc.integrator = opts.integrator;
    let set = EssentialSet::around(sc.rho_bar, sc.theta_bar)?;
    let mut residual: f64 = 0.0;
    let run = run_nsf_observed(&sc, |s, _| {
        residual = residual.max(ess_res_decompose(s, &set).residual_measure);
        Ok(())
    })?;
    Ok(Member { eps, snapshots: run.snapshots, steps: run.steps, residual_measure: residual })
}

fn row_against(member: &Result<Member>, eps: f64, target: &ObRun, ob: &ObScenario) -> ConvergenceRow {
    match member {
        Ok(m) => match error_norms_m7(&m.snapshots, &target.snapshots, m.eps, ob.rho_bar, ob.theta_bar) {
            Ok(mut row) => {
                row.steps = m.steps;
                row.residual_measure = m.residual_measure;
                row
            }
            Err(e) => ConvergenceRow::failed(eps, e.to_string()),
        },
        Err(e) => ConvergenceRow::failed(eps, e.to_string()),
    }
}

/// One limit run and one compressible run per ε (in parallel), tabulated.
/// Failed members are kept as annotated rows.
pub fn sweep(ob: &ObScenario, eps_list: &[f64], frame: Frame, opts: &SweepOptions) -> Result<SweepReport> {
    if eps_list.is_empty() {
        return Err(BllError::Parameter("eps list is empty".into()));
    }
    if eps_list.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(BllError::Parameter("eps list must be strictly decreasing".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0)) {
        return Err(BllError::Parameter(format!("eps must be positive, got {e}")));
    }
    let ob_run = run_ob(ob, frame)?;
    let naive_run = if opts.naive { Some(run_ob(&ob.clone().with_lambda(0.0), frame)?) } else { None };
    let members: Vec<Result<Member>> = eps_list.par_iter().map(|&eps| run_member(ob, eps, opts)).collect();

    let table = |target: &ObRun| {
        ConvergenceTable::new(
            eps_list.iter().zip(&members).map(|(&eps, m)| row_against(m, eps, target, ob)).collect(),
        )
    };
    Ok(SweepReport {
        modified: table(&ob_run),
        naive: naive_run.as_ref().map(table),
        ob_run,
    })
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub eps: f64,
    pub lambda: f64,
    pub modified: ConvergenceRow,
    pub naive: ConvergenceRow,
    /// Temperature error against the naive target over the one against the
    /// modified target.
    pub ratio: f64,
    /// Largest `|⨍𝒯|` seen in the modified limit run.
    pub max_mean: f64,
    /// The two targets coincide, so the ratio carries no information.
    pub coincident: bool,
}

impl ComparisonReport {
    pub fn warning(&self) -> Option<String> {
        self.coincident.then(|| {
            format!(
                "warning: modified and naive targets coincide (max |mean T| = {:.3e}, lambda = {}); ratio is uninformative",
                self.max_mean, self.lambda
            )
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("target,eps,err_rho,err_theta,err_mom\n");
        for (name, r) in [("modified", &self.modified), ("naive", &self.naive)] {
            s.push_str(&format!(
                "{name},{:.6e},{:.10e},{:.10e},{:.10e}\n",
                r.eps, r.err_rho, r.err_theta, r.err_mom
            ));
        }
        s.push_str(&format!("# ratio,{:.10e},coincident,{}\n", self.ratio, self.coincident));
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "eps = {}\nlambda = {}\ntemperature error vs modified limit: {:.6e}\ntemperature error vs naive limit:    {:.6e}\nratio naive/modified: {:.6}\nmax |mean T|: {:.3e}\n",
            self.eps, self.lambda, self.modified.err_theta, self.naive.err_theta, self.ratio, self.max_mean
        );
        if let Some(w) = self.warning() {
            s.push_str(&w);
            s.push('\n');
        }
        s
    }
}

/// Runs the compressible system at one ε and measures it against the limit
/// with and without the non-local boundary term.
pub fn compare_modified_vs_naive(ob: &ObScenario, eps: f64, frame: Frame, opts: &SweepOptions) -> Result<ComparisonReport> {
    let lambda = ob.lambda()?;
    let modified_run = run_ob(ob, frame)?;
    let naive_scenario = ob.clone().with_lambda(0.0);
    let naive_run = if lambda == 0.0 { modified_run.clone() } else { run_ob(&naive_scenario, frame)? };
    let member = run_member(ob, eps, opts)?;
    let row = |target: &ObRun| -> Result<ConvergenceRow> {
        let mut r = error_norms_m7(&member.snapshots, &target.snapshots, eps, ob.rho_bar, ob.theta_bar)?;
        r.steps = member.steps;
        r.residual_measure = member.residual_measure;
        Ok(r)
    };
    let modified = row(&modified_run)?;
    let naive = row(&naive_run)?;
    let max_mean = modified_run.log.iter().fold(0.0f64, |m, r| m.max(r.mean_t.abs()));
    let scale = modified_run.snapshots.iter().fold(0.0f64, |m, s| m.max(s.t_field.max_abs())).max(1e-300);
    let coincident = lambda == 0.0 || max_mean <= 1e-12 * scale;
    let ratio = if naive.err_theta == modified.err_theta { 1.0 } else { naive.err_theta / modified.err_theta };
    Ok(ComparisonReport { eps, lambda, modified, naive, ratio, max_mean, coincident })
}
