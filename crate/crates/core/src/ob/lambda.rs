//! Mean-temperature bookkeeping: Λ, wall heat flux and the residual of the
//! integrated heat balance `(1 - λ)|Ω| d⨍𝒯/dt = D ∮ ∇𝒯·n`.

use crate::error::{BllError, Result};
use crate::grid::ScalarField;

/// Mean and outward wall flux of a 𝒯-frame field at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFluxSample {
    pub t: f64,
    pub mean_t: f64,
    /// `∮ ∇𝒯·n` (outward normal), second order.
    pub flux: f64,
}

impl MeanFluxSample {
    pub fn of(t: f64, t_field: &ScalarField) -> Self {
        Self { t, mean_t: t_field.mean(), flux: boundary_flux(t_field) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRecord {
    pub t: f64,
    pub mean_t: f64,
    /// `θ̄ α p_θ (⨍𝒯ⁿ - ⨍𝒯ⁿ⁻¹)/dt`.
    pub lambda: f64,
    pub flux: f64,
    pub s24_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LambdaTrace {
    pub records: Vec<LambdaRecord>,
}

impl LambdaTrace {
    /// Largest `|s24|` over records with `t` in `[t0, t1]`.
    pub fn max_residual_in(&self, t0: f64, t1: f64) -> f64 {
        self.records
            .iter()
            .filter(|r| r.t >= t0 - 1e-12 && r.t <= t1 + 1e-12)
            .fold(0.0, |m, r| m.max(r.s24_residual.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mean_T,Lambda,flux,s24_residual\n");
        for r in &self.records {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.t, r.mean_t, r.lambda, r.flux, r.s24_residual
            ));
        }
        s
    }
}

/// `∮ ∇f·n` over both walls using one-sided second-order derivatives built
/// from the first three cell values.
pub fn boundary_flux(f: &ScalarField) -> f64 {
    let g = f.grid();
    let nz = g.nz;
    let mut total = 0.0;
    for i in 0..g.nx {
        let d_bot = (-2.0 * f.at(i, 0) + 3.0 * f.at(i, 1) - f.at(i, 2)) / g.dz;
        let d_top = (2.0 * f.at(i, nz - 1) - 3.0 * f.at(i, nz - 2) + f.at(i, nz - 3)) / g.dz;
        total += d_top - d_bot;
    }
    total * g.dx
}

/// Builds the trace from consecutive samples.
///
/// `lambda_prefactor` is `θ̄ α p_θ`, `mix` the mixing weight in use and
/// `diffusivity` the coefficient `κ̄/(ρ̄ c_p)`. The residual pairs the backward
/// difference of the mean with the average of the two end-point fluxes.
pub fn lambda_diagnostics(
    samples: &[MeanFluxSample],
    lambda_prefactor: f64,
    mix: f64,
    diffusivity: f64,
    area: f64,
) -> Result<LambdaTrace> {
    if samples.len() < 2 {
        return Err(BllError::InsufficientData(format!(
            "need at least two samples, got {}",
            samples.len()
        )));
    }
    let mut records = Vec::with_capacity(samples.len() - 1);
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            return Err(BllError::InsufficientData("samples must be strictly increasing in time".into()));
        }
        let rate = (b.mean_t - a.mean_t) / dt;
        let s24 = (1.0 - mix) * area * rate - diffusivity * 0.5 * (a.flux + b.flux);
        records.push(LambdaRecord {
            t: b.t,
            mean_t: b.mean_t,
            lambda: lambda_prefactor * rate,
            flux: b.flux,
            s24_residual: s24,
        });
    }
    Ok(LambdaTrace { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Staggering};

    #[test]
    fn flux_is_exact_for_quadratics() {
        let g = Grid::unit(4, 16).unwrap();
        let f = ScalarField::from_fn(g, Staggering::Center, |_, z| 1.0 + 2.0 * z - 3.0 * z * z);
        // d/dz at 0 is 2, at 1 is -4; outward: -2 + (-4).
        assert!((boundary_flux(&f) - (-6.0)).abs() < 1e-11);
    }

    #[test]
    fn steady_samples_give_zero() {
        let s = MeanFluxSample { t: 0.0, mean_t: 0.3, flux: 0.0 };
        let s2 = MeanFluxSample { t: 0.1, ..s };
        let tr = lambda_diagnostics(&[s, s2], 1.0, 0.4, 0.1, 1.0).unwrap();
        assert_eq!(tr.records[0].lambda, 0.0);
        assert_eq!(tr.records[0].s24_residual, 0.0);
        assert!(matches!(lambda_diagnostics(&[s], 1.0, 0.4, 0.1, 1.0), Err(BllError::InsufficientData(_))));
    }
}
