use std::fmt::Write as _;
use std::path::PathBuf;

use bll_core::diagnostics::{compare_modified_vs_naive, sweep, L4Monitor, SweepOptions};
use bll_core::grid::ScalarField;
use bll_core::nsf::{hydrostatic_stationary_1d, run_nsf_observed};
use bll_core::ob::run_ob;
use bll_core::thermo::{
    check_hypotheses, check_limit_identities, gibbs_residual, maxwell_residual, ob_coefficients, ThermoPoint,
};
use clap::ValueEnum;

use crate::config::ScenarioConfig;
use crate::output::Output;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Constitutive hypotheses, thermodynamic identities and limit coefficients.
    ThermoCheck,
    /// Limit (incompressible) run.
    RunOb,
    /// Compressible run at one ε.
    RunNsf,
    /// Compressible runs over the ε list against one limit run.
    Sweep,
    /// Errors against the limit with and without the non-local boundary term.
    Compare,
    /// One-dimensional stationary column.
    Hydrostatic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ThermoCheck => "thermo-check",
            Command::RunOb => "run-ob",
            Command::RunNsf => "run-nsf",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
            Command::Hydrostatic => "hydrostatic",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `[output] directory`.
    pub out: Option<PathBuf>,
}

/// What a command produced: a human summary, warnings and the files written.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub summary: String,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

pub fn run(command: Command, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let mut out = Output::create(dir, cfg.output.formats)?;
    let mut report = match command {
        Command::ThermoCheck => thermo_check(cfg, &mut out)?,
        Command::RunOb => run_ob_cmd(cfg, &mut out)?,
        Command::RunNsf => run_nsf_cmd(cfg, &mut out)?,
        Command::Sweep => sweep_cmd(cfg, &mut out)?,
        Command::Compare => compare_cmd(cfg, &mut out)?,
        Command::Hydrostatic => hydrostatic_cmd(cfg, &mut out)?,
    };
    report.files = out.finish(command.name(), &cfg.echo())?;
    Ok(report)
}

fn log_grid() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0)).collect()
}

fn thermo_check(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report, CliError> {
    let eos = &cfg.eos;
    let hyp = check_hypotheses(eos, (1e-3, 1e3), (1e-2, 1e2));
    let mut csv = String::from("name,passed,witness\n");
    let mut text = String::from("constitutive hypotheses\n");
    for c in &hyp.checks {
        let _ = writeln!(csv, "{},{},{}", c.name, c.passed, c.witness.replace(',', ";"));
        let _ = writeln!(text, "  {:<5} {:<4} {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.witness);
    }
    let (lo, hi) = hyp.energy_bound_constants;
    let _ = writeln!(
        text,
        "  fitted constants: w10 {:.6e}, energy bounds ({lo:.6e}, {hi:.6e}), entropy bound {:.6e}",
        hyp.w10_constant, hyp.entropy_bound_constant
    );
    out.csv("hypotheses", &csv)?;

    let mut ids = String::from("rho,theta,gibbs,maxwell\n");
    let (mut gmax, mut mmax) = (0.0f64, 0.0f64);
    for &rho in &log_grid() {
        for &theta in &log_grid() {
            let pt = ThermoPoint::new(rho, theta)?;
            let (g, m) = (gibbs_residual(pt, eos)?, maxwell_residual(pt, eos)?);
            gmax = gmax.max(g);
            mmax = mmax.max(m);
            let _ = writeln!(ids, "{rho:.12e},{theta:.12e},{g:.6e},{m:.6e}");
        }
    }
    out.csv("identities", &ids)?;
    let _ = writeln!(text, "thermodynamic identities on [0.1, 10]^2\n  max Gibbs residual {gmax:.3e}\n  max Maxwell residual {mmax:.3e}");

    let r = &cfg.reference;
    let lim = check_limit_identities(r.rho_bar, r.theta_bar, eos)?;
    let c = ob_coefficients(r.rho_bar, r.theta_bar, eos)?;
    out.csv(
        "coefficients",
        &format!(
            "rho_bar,theta_bar,alpha,c_p,lambda,diffusivity,r26,r27,r29\n{:.12e},{:.12e},{:.16e},{:.16e},{:.16e},{:.16e},{:.6e},{:.6e},{:.6e}\n",
            r.rho_bar, r.theta_bar, c.alpha, c.c_p, c.lambda, c.diffusivity(), lim.r26, lim.r27, lim.r29
        ),
    )?;
    let _ = writeln!(
        text,
        "limit coefficients at (rho_bar, theta_bar) = ({}, {})\n  alpha {:.12e}\n  c_p {:.12e}\n  lambda {:.12e}\n  diffusivity {:.12e}\n  identity residuals {:.3e} {:.3e} {:.3e}",
        r.rho_bar, r.theta_bar, c.alpha, c.c_p, c.lambda, c.diffusivity(), lim.r26, lim.r27, lim.r29
    );
    out.text("thermo_report.txt", &text)?;
    Ok(Report { summary: text, ..Default::default() })
}

fn column_means(f: &ScalarField) -> Vec<f64> {
    f.horizontal_mean()
}

fn heights(cfg: &ScenarioConfig) -> Vec<f64> {
    let dz = 1.0 / cfg.grid.nz as f64;
    (0..cfg.grid.nz).map(|j| (j as f64 + 0.5) * dz).collect()
}

fn profile(out: &mut Output, stem: &str, names: &[&str], cols: &[Vec<f64>]) -> Result<(), CliError> {
    let n = cols[0].len();
    let rows: Vec<Vec<f64>> = (0..n).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
    let mut csv = names.join(",");
    csv.push('\n');
    for r in &rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    out.csv(stem, &csv)?;
    out.dat(stem, names, &rows)
}

fn run_ob_cmd(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report, CliError> {
    let sc = cfg.ob_scenario(cfg.ob.t_end)?;
    let run = run_ob(&sc, cfg.ob.frame)?;
    out.csv("ob_log", &run.log_csv())?;
    out.csv("lambda_trace", &run.lambda_trace.to_csv())?;
    for (k, s) in run.snapshots.iter().enumerate() {
        out.field(&format!("snapshots/T_{k:04}"), &s.t_field)?;
        out.field(&format!("snapshots/r_{k:04}"), &s.r)?;
    }
    let last = run.final_snapshot();
    profile(out, "ob_profile", &["z", "T_mean", "r_mean"], &[heights(cfg), column_means(&last.t_field), column_means(&last.r)])?;
    let worst = run.lambda_trace.records.iter().fold(0.0f64, |m, r| m.max(r.s24_residual.abs()));
    Ok(Report {
        summary: format!(
            "limit run: {} steps of {:.6e}, lambda = {}, final mean T = {:.6e}, max heat-balance residual {:.3e}",
            run.steps,
            run.dt,
            run.lambda,
            last.t_field.mean(),
            worst
        ),
        ..Default::default()
    })
}

fn run_nsf_cmd(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report, CliError> {
    let eps = cfg.nsf.eps.single();
    let sc = cfg.nsf_scenario(eps)?;
    let mut monitor = L4Monitor::new(&sc)?;
    let run = run_nsf_observed(&sc, |s, dt| monitor.observe(s, dt))?;
    out.csv("conservation", &run.log_csv())?;
    out.csv("relative_energy", &monitor.to_csv())?;
    for (k, s) in run.snapshots.iter().enumerate() {
        out.field(&format!("snapshots/rho_{k:04}"), &s.rho)?;
        out.field(&format!("snapshots/theta_{k:04}"), &s.theta)?;
    }
    let last = run.final_snapshot();
    profile(out, "nsf_profile", &["z", "rho_mean", "theta_mean"], &[heights(cfg), column_means(&last.rho), column_means(&last.theta)])?;
    Ok(Report {
        summary: format!("compressible run at eps = {eps}: {} steps, relative mass drift {:.3e}", run.steps, run.mass_drift()),
        ..Default::default()
    })
}

fn aligned_horizon(cfg: &ScenarioConfig) -> Result<f64, CliError> {
    if cfg.nsf.t_end != cfg.ob.t_end {
        return Err(CliError::Config {
            line: Some(cfg.line("nsf", "t_end")),
            msg: format!("[nsf] t_end = {} differs from [ob] t_end = {}; comparisons need one horizon", cfg.nsf.t_end, cfg.ob.t_end),
        });
    }
    Ok(cfg.ob.t_end)
}

fn sweep_options(cfg: &ScenarioConfig) -> SweepOptions {
    SweepOptions { cfl: cfg.nsf.cfl, integrator: cfg.nsf.integrator, naive: false }
}

fn sweep_cmd(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report, CliError> {
    let sc = cfg.ob_scenario(aligned_horizon(cfg)?)?;
    let rep = sweep(&sc, &cfg.nsf.eps.list(), cfg.ob.frame, &sweep_options(cfg))?;
    let table = &rep.modified;
    out.csv("convergence", &table.to_csv())?;
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| vec![r.eps, r.err_rho, r.err_theta, r.err_mom, r.residual_measure])
        .collect();
    out.dat("convergence", &["eps", "err_rho", "err_theta", "err_mom", "residual_measure"], &rows)?;
    let mut summary = String::from("eps          err_rho      err_theta    err_mom\n");
    for r in &table.rows {
        match &r.failure {
            None => {
                let _ = writeln!(summary, "{:<12} {:.6e} {:.6e} {:.6e}", r.eps, r.err_rho, r.err_theta, r.err_mom);
            }
            Some(f) => {
                let _ = writeln!(summary, "{:<12} failed: {f}", r.eps);
            }
        }
    }
    let monotone = table.is_monotone();
    let _ = write!(summary, "monotone decrease: {}", if monotone { "yes" } else { "no" });
    let mut warnings = Vec::new();
    if !monotone {
        warnings.push("warning: errors do not decrease monotonically across the eps list".to_string());
    }
    Ok(Report { summary, warnings, ..Default::default() })
}

fn compare_cmd(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report, CliError> {
    let sc = cfg.ob_scenario(aligned_horizon(cfg)?)?;
    let rep = compare_modified_vs_naive(&sc, cfg.nsf.eps.single(), cfg.ob.frame, &sweep_options(cfg))?;
    out.csv("compare", &rep.to_csv())?;
    out.text("compare.txt", &rep.to_text())?;
    Ok(Report {
        summary: format!("temperature error ratio naive/modified at eps = {}: {:.6}", rep.eps, rep.ratio),
        warnings: rep.warning().into_iter().collect(),
        ..Default::default()
    })
}

fn hydrostatic_cmd(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report, CliError> {
    let sc = cfg.nsf_scenario(cfg.nsf.eps.single())?;
    let prof = hydrostatic_stationary_1d(&sc)?;
    profile(out, "hydrostatic", &["z", "rho", "theta"], &[prof.z.clone(), prof.rho.clone(), prof.theta.clone()])?;
    Ok(Report {
        summary: format!(
            "stationary column at eps = {}: rho at walls {:.12e} (bottom), {:.12e} (top)",
            sc.eps, prof.rho_walls.0, prof.rho_walls.1
        ),
        ..Default::default()
    })
}
