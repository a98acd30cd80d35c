//! Distances between compressible trajectories and their incompressible
//! targets, and the ε-convergence table.

use crate::error::{BllError, Result};
use crate::nsf::NsfSnapshot;
use crate::ob::ObSnapshot;

/// Errors of one ε member over the shared snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// `sup_t ‖(ρ - ρ̄)/ε - r‖_{L¹}`.
    pub err_rho: f64,
    /// `sup_t ‖(θ - θ̄)/ε - 𝒯‖_{L¹}`.
    pub err_theta: f64,
    /// `sup_t ‖√ρ u - √ρ̄ U‖_{L²}`.
    pub err_mom: f64,
    /// Largest measure of the residual set along the run.
    pub residual_measure: f64,
    pub steps: usize,
    /// Set when the member run failed; the errors are then NaN.
    pub failure: Option<String>,
}

impl ConvergenceRow {
    pub fn failed(eps: f64, reason: String) -> Self {
        Self {
            eps,
            err_rho: f64::NAN,
            err_theta: f64::NAN,
            err_mom: f64::NAN,
            residual_measure: f64::NAN,
            steps: 0,
            failure: Some(reason),
        }
    }

    pub fn errors(&self) -> [f64; 3] {
        [self.err_rho, self.err_theta, self.err_mom]
    }
}

/// The three norms over snapshots that must sit at identical times.
pub fn error_norms_m7(
    nsf: &[NsfSnapshot],
    ob: &[ObSnapshot],
    eps: f64,
    rho_bar: f64,
    theta_bar: f64,
) -> Result<ConvergenceRow> {
    if !(eps > 0.0) {
        return Err(BllError::Parameter(format!("eps must be positive, got {eps}")));
    }
    if nsf.len() != ob.len() || nsf.is_empty() {
        return Err(BllError::Alignment(format!(
            "{} compressible snapshots against {} limit snapshots",
            nsf.len(),
            ob.len()
        )));
    }
    let (mut er, mut et, mut em) = (0.0f64, 0.0f64, 0.0f64);
    let sqrt_bar = rho_bar.sqrt();
    for (a, b) in nsf.iter().zip(ob) {
        if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
            return Err(BllError::Alignment(format!("snapshot at t = {} paired with t = {}", a.t, b.t)));
        }
        if a.rho.grid() != b.t_field.grid() {
            return Err(BllError::Alignment("trajectories live on different grids".into()));
        }
        let dr = a.rho.zip_map(&b.r, |rho, r| ((rho - rho_bar) / eps - r).abs())?;
        let dt = a.theta.zip_map(&b.t_field, |th, t| ((th - theta_bar) / eps - t).abs())?;
        er = er.max(dr.integral());
        et = et.max(dt.integral());

        let g = *a.rho.grid();
        let (nx, nz) = (g.nx, g.nz);
        let rho = a.rho.values();
        let (u, w) = (a.u.u.values(), a.u.w.values());
        let (uu, ww) = (b.u.u.values(), b.u.w.values());
        let mut sum = 0.0;
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let km = j * nx + if i == 0 { nx - 1 } else { i - 1 };
                let d = (0.5 * (rho[k] + rho[km])).sqrt() * u[k] - sqrt_bar * uu[k];
                sum += d * d;
                if j > 0 {
                    let d = (0.5 * (rho[k] + rho[k - nx])).sqrt() * w[k] - sqrt_bar * ww[k];
                    sum += d * d;
                }
            }
        }
        em = em.max((sum * g.cell_area()).sqrt());
    }
    Ok(ConvergenceRow {
        eps,
        err_rho: er,
        err_theta: et,
        err_mom: em,
        residual_measure: 0.0,
        steps: 0,
        failure: None,
    })
}

/// Rows sorted by ε descending, with least-squares log-log rates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite()).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

impl ConvergenceTable {
    pub fn new(mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        Self { rows }
    }

    /// Fitted rates for `(err_rho, err_theta, err_mom)` over successful rows.
    pub fn rates(&self) -> [Option<f64>; 3] {
        let ok: Vec<&ConvergenceRow> = self.rows.iter().filter(|r| r.failure.is_none()).collect();
        let col = |c: usize| fit_rate(&ok.iter().map(|r| (r.eps, r.errors()[c])).collect::<Vec<_>>());
        [col(0), col(1), col(2)]
    }

    /// Exponent of the residual-set measure against ε.
    pub fn residual_rate(&self) -> Option<f64> {
        fit_rate(
            &self
                .rows
                .iter()
                .filter(|r| r.failure.is_none())
                .map(|r| (r.eps, r.residual_measure))
                .collect::<Vec<_>>(),
        )
    }

    /// Every norm strictly decreases as ε decreases, with no failed rows.
    pub fn is_monotone(&self) -> bool {
        self.rows.iter().all(|r| r.failure.is_none())
            && self.rows.windows(2).all(|p| (0..3).all(|c| p[1].errors()[c] < p[0].errors()[c]))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,err_rho,err_theta,err_mom,residual_measure,steps,status\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.6e},{:.10e},{:.10e},{:.10e},{:.6e},{},{}\n",
                r.eps,
                r.err_rho,
                r.err_theta,
                r.err_mom,
                r.residual_measure,
                r.steps,
                r.failure.as_deref().map_or("ok".to_string(), |f| format!("failed: {}", f.replace(',', ";")))
            ));
        }
        let fmt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.4}"));
        let [a, b, c] = self.rates();
        s.push_str(&format!("# rates,{},{},{},{}\n", fmt(a), fmt(b), fmt(c), fmt(self.residual_rate())));
        s
    }
}
