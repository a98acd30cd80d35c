//! Resting stratified equilibrium of the compressible system in one dimension.
//!
//! Steady conduction fixes θ through the Kirchhoff potential
//! `K(θ) = ∫κ = kappa0 (θ + θ^{β+1}/(β+1))`, which is linear in z. The
//! balance `p' = ε ρ G'` then gives `ρ' = (ε ρ G' - p_θ θ') / p_ρ`, integrated
//! with an adaptive Dormand–Prince scheme and shot on `ρ(0)` so that the
//! column mass equals `ρ̄`.

use super::{NsfScenario, NsfState};
use crate::error::{BllError, Result};
use crate::grid::{Grid, ScalarField, Staggering, VectorField};
use crate::thermo::{pressure_derivatives, EosParams, ThermoPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct HydrostaticProfile {
    /// Cell-center heights of the scenario grid.
    pub z: Vec<f64>,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    /// Density at the walls.
    pub rho_walls: (f64, f64),
}

impl HydrostaticProfile {
    /// The profile broadcast in x as cell-center fields.
    pub fn fields(&self, grid: Grid) -> Result<(ScalarField, ScalarField)> {
        if grid.nz != self.z.len() {
            return Err(BllError::Shape(format!("profile has {} levels, grid has {}", self.z.len(), grid.nz)));
        }
        let spread = |col: &[f64]| {
            let mut v = Vec::with_capacity(grid.nx * grid.nz);
            for &c in col {
                v.extend(std::iter::repeat_n(c, grid.nx));
            }
            v
        };
        Ok((
            ScalarField::from_vec(grid, Staggering::Center, spread(&self.rho))?,
            ScalarField::from_vec(grid, Staggering::Center, spread(&self.theta))?,
        ))
    }

    /// A resting compressible state sampled from the profile.
    pub fn state(&self, scenario: &NsfScenario) -> Result<NsfState> {
        let (rho, theta) = self.fields(scenario.grid)?;
        Ok(NsfState { rho, theta, u: VectorField::zeros(scenario.grid), t: 0.0, eps: scenario.eps })
    }
}

/// Natural cubic spline through `(xs, ys)`, used for `G'` between samples.
struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let r = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self { xs, ys, m }
    }

    fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = match self.xs.iter().position(|&v| v > x) {
            Some(0) => 0,
            Some(p) => (p - 1).min(n - 2),
            None => n - 2,
        };
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - x) / h, (x - x0) / h);
        (self.ys[k + 1] - self.ys[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * self.m[k]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[k + 1]
    }
}

fn kirchhoff(theta: f64, eos: &EosParams) -> f64 {
    eos.kappa0 * (theta + theta.powf(eos.beta + 1.0) / (eos.beta + 1.0))
}

fn kirchhoff_inverse(k: f64, guess: f64, eos: &EosParams) -> Result<f64> {
    let mut th = guess;
    for _ in 0..100 {
        let f = kirchhoff(th, eos) - k;
        let df = eos.kappa0 * (1.0 + th.powf(eos.beta));
        let mut next = th - f / df;
        if next <= 0.0 {
            next = 0.5 * th;
        }
        if (next - th).abs() <= 1e-15 * th {
            return Ok(next);
        }
        th = next;
    }
    if (kirchhoff(th, eos) - k).abs() <= 1e-12 * k.abs().max(1.0) {
        Ok(th)
    } else {
        Err(BllError::Domain(format!("Kirchhoff inversion failed for K = {k}")))
    }
}

struct Column<'a> {
    eos: &'a EosParams,
    eps: f64,
    k_bot: f64,
    k_top: f64,
    theta_bot: f64,
    theta_top: f64,
    dg: Spline,
}

impl Column<'_> {
    fn theta(&self, z: f64) -> Result<f64> {
        if self.k_top == self.k_bot {
            return Ok(self.theta_bot);
        }
        let guess = self.theta_bot + (self.theta_top - self.theta_bot) * z;
        kirchhoff_inverse(self.k_bot + (self.k_top - self.k_bot) * z, guess, self.eos)
    }

    /// `(ρ', mass')` at height z.
    fn rhs(&self, z: f64, y: [f64; 2]) -> Result<[f64; 2]> {
        let th = self.theta(z)?;
        let kappa = self.eos.kappa0 * (1.0 + th.powf(self.eos.beta));
        let dth = (self.k_top - self.k_bot) / kappa;
        let pt = ThermoPoint::new(y[0], th)?;
        let (p_rho, p_theta) = pressure_derivatives(pt, self.eos)?;
        Ok([(self.eps * y[0] * self.dg.derivative(z) - p_theta * dth) / p_rho, y[0]])
    }

    /// Integrates from z = 0 and records ρ at every requested height.
    fn integrate(&self, rho0: f64, outputs: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
        const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
        const B4: [f64; 7] = [
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ];
        let tol = 1e-13;
        let mut z = 0.0;
        let mut y = [rho0, 0.0];
        let mut h: f64 = 1e-3;
        let mut out = Vec::with_capacity(outputs.len());
        let mut targets = outputs.iter().copied().chain(std::iter::once(1.0)).peekable();
        while let Some(&target) = targets.peek() {
            if (target - z).abs() <= 1e-15 {
                out.push(y[0]);
                targets.next();
                continue;
            }
            let step = h.min(target - z);
            let mut k = [[0.0; 2]; 7];
            for s in 0..7 {
                let mut ys = y;
                for (r, a) in A[s].iter().enumerate().take(s) {
                    ys[0] += step * a * k[r][0];
                    ys[1] += step * a * k[r][1];
                }
                k[s] = self.rhs(z + C[s] * step, ys)?;
            }
            let mut y5 = y;
            let mut err: f64 = 0.0;
            for c in 0..2 {
                let (mut hi, mut lo) = (0.0, 0.0);
                for s in 0..7 {
                    hi += B5[s] * k[s][c];
                    lo += B4[s] * k[s][c];
                }
                y5[c] += step * hi;
                err = err.max((step * (hi - lo)).abs() / (1.0 + y5[c].abs()));
            }
            if err <= tol {
                z = if step == target - z { target } else { z + step };
                y = y5;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
            h = (step * factor).max(1e-10);
        }
        let rho_top = out.pop().expect("the end point is always recorded");
        Ok((out, y[1], rho_top))
    }
}

/// Solves the resting column for a scenario whose potential depends on z
/// only and whose wall data is constant on each wall.
pub fn hydrostatic_stationary_1d(scenario: &NsfScenario) -> Result<HydrostaticProfile> {
    scenario.validate()?;
    let g = scenario.grid;
    let pot = &scenario.potential;
    let scale = pot.max_abs().max(1.0);
    let mut column = Vec::with_capacity(g.nz);
    for j in 0..g.nz {
        let row = pot.row(j);
        if row.iter().any(|&v| (v - row[0]).abs() > 1e-12 * scale) {
            return Err(BllError::Shape(format!("potential varies in x on row {j}")));
        }
        column.push(row[0]);
    }
    let walls = scenario.wall_temperature();
    let flat = |w: &[f64]| w.iter().all(|&v| (v - w[0]).abs() <= 1e-14 * w[0].abs().max(1.0));
    if !flat(&walls.bottom) || !flat(&walls.top) {
        return Err(BllError::Shape("wall temperature varies along a wall".into()));
    }
    let (theta_bot, theta_top) = (walls.bottom[0], walls.top[0]);
    if !(theta_bot > 0.0) || !(theta_top > 0.0) {
        return Err(BllError::EpsTooLarge { eps: scenario.eps, field: "wall temperature", min: theta_bot.min(theta_top) });
    }
    let eos = &scenario.eos;
    let zs: Vec<f64> = (0..g.nz).map(|j| (j as f64 + 0.5) * g.dz).collect();
    let col = Column {
        eos,
        eps: scenario.eps,
        k_bot: kirchhoff(theta_bot, eos),
        k_top: kirchhoff(theta_top, eos),
        theta_bot,
        theta_top,
        dg: Spline::new(zs.clone(), column),
    };

    let target = scenario.rho_bar;
    let mass = |r0: f64| -> Result<f64> { Ok(col.integrate(r0, &[])?.1 - target) };
    let (mut a, mut b) = (target, target * 1.01);
    let (mut fa, mut fb) = (mass(a)?, mass(b)?);
    for _ in 0..50 {
        if fb.abs() <= 1e-14 * target {
            break;
        }
        let next = b - fb * (b - a) / (fb - fa);
        if !(next > 0.0) || !next.is_finite() {
            return Err(BllError::Domain("density shooting left the admissible range".into()));
        }
        a = b;
        fa = fb;
        b = next;
        fb = mass(b)?;
    }
    if fb.abs() > 1e-10 * target {
        return Err(BllError::Domain(format!("mass normalization did not converge, residual {fb}")));
    }
    let (rho, _, rho_top) = col.integrate(b, &zs)?;
    let theta = zs.iter().map(|&z| col.theta(z)).collect::<Result<Vec<_>>>()?;
    Ok(HydrostaticProfile { z: zs, rho, theta, rho_walls: (b, rho_top) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ob::gravity_potential;

    fn scenario(g: f64, eps: f64) -> NsfScenario {
        let grid = Grid::unit(4, 32).unwrap();
        let mut sc = NsfScenario::uniform(grid, EosParams::ideal(), 1.0, 1.0, eps);
        sc.potential = gravity_potential(grid, g);
        sc
    }

    #[test]
    fn ideal_gas_matches_exponential() {
        let sc = scenario(2.0, 0.1);
        let p = hydrostatic_stationary_1d(&sc).unwrap();
        // ρ = C exp(ε G / θ̄) with ∫ρ = 1.
        let eg = |z: f64| (0.1 * -2.0 * (z - 0.5)).exp();
        let c = 0.2 / (0.1f64.exp() - (-0.1f64).exp());
        for (z, r) in p.z.iter().zip(&p.rho) {
            assert!((r - c * eg(*z)).abs() < 1e-11, "{z}: {r} vs {}", c * eg(*z));
        }
        assert!(p.theta.iter().all(|&t| (t - 1.0).abs() < 1e-14));
    }

    #[test]
    fn zero_gravity_is_uniform_and_small_eps_is_near_uniform() {
        let p = hydrostatic_stationary_1d(&scenario(0.0, 0.1)).unwrap();
        assert!(p.rho.iter().all(|&r| (r - 1.0).abs() < 1e-13));
        let d1 = hydrostatic_stationary_1d(&scenario(1.0, 0.02)).unwrap();
        let d2 = hydrostatic_stationary_1d(&scenario(1.0, 0.01)).unwrap();
        let dev = |p: &HydrostaticProfile| p.rho.iter().fold(0.0f64, |m, r| m.max((r - 1.0).abs()));
        let ratio = dev(&d1) / dev(&d2);
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn heated_column_balances_pressure() {
        let mut sc = scenario(1.0, 0.1);
        sc.eos = EosParams::with_closure(0.3, 0.1);
        sc.theta_b = crate::grid::WallValues::constant(4, 1.0, -1.0);
        let p = hydrostatic_stationary_1d(&sc).unwrap();
        // Kirchhoff potential is linear in z.
        let k: Vec<f64> = p.theta.iter().map(|&t| kirchhoff(t, &sc.eos)).collect();
        let slope = (k[1] - k[0]) / (p.z[1] - p.z[0]);
        for j in 1..k.len() {
            assert!(((k[j] - k[0]) / (p.z[j] - p.z[0]) - slope).abs() < 1e-10);
        }
        // Centered pressure differences balance ε ρ G' to second order.
        let pr: Vec<f64> =
            p.rho.iter().zip(&p.theta).map(|(&r, &t)| crate::thermo::pressure_unchecked(r, t, &sc.eos)).collect();
        let dz = p.z[1] - p.z[0];
        for j in 1..pr.len() - 1 {
            let lhs = (pr[j + 1] - pr[j - 1]) / (2.0 * dz);
            assert!((lhs - -(0.1 * p.rho[j])).abs() < 5e-3, "{j}: {lhs}");
        }
    }

    #[test]
    fn x_dependent_input_is_a_shape_error() {
        let mut sc = scenario(1.0, 0.1);
        sc.potential = ScalarField::from_fn(sc.grid, Staggering::Center, |x, z| (6.0 * x).sin() * z);
        assert!(matches!(hydrostatic_stationary_1d(&sc), Err(BllError::Shape(_))));
        let mut sc = scenario(1.0, 0.1);
        sc.theta_b = crate::grid::WallValues::from_fn(&sc.grid, |x| (x, 0.0));
        assert!(matches!(hydrostatic_stationary_1d(&sc), Err(BllError::Shape(_))));
    }
}
