//! Relative energy of a compressible state with respect to a smooth
//! reference, its essential/residual split and the coercivity bounds.

use crate::error::{BllError, Result};
use crate::grid::{grad, Grid, ScalarField, Staggering, VectorField};
use crate::nsf::{NsfScenario, NsfState, NsfStepper};
use crate::ob::harmonic_extension;
use crate::thermo::{
    energy_dtheta, energy_unchecked, entropy_unchecked, pressure_derivatives, pressure_unchecked, transport_unchecked,
    EosParams, ThermoPoint,
};

/// Reference trio `(ρ̃, θ̃, ũ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub rho: ScalarField,
    pub theta: ScalarField,
    pub u: VectorField,
}

impl Reference {
    pub fn constant(grid: Grid, rho: f64, theta: f64) -> Self {
        Self {
            rho: ScalarField::constant(grid, Staggering::Center, rho),
            theta: ScalarField::constant(grid, Staggering::Center, theta),
            u: VectorField::zeros(grid),
        }
    }

    /// `(ρ̄, θ̄ + ε Θ̃_B, 0)` with the harmonic extension of the wall data.
    pub fn for_scenario(scenario: &NsfScenario) -> Result<Self> {
        let g = scenario.grid;
        Ok(Self {
            rho: ScalarField::constant(g, Staggering::Center, scenario.rho_bar),
            theta: harmonic_extension(g, &scenario.wall_temperature())?,
            u: VectorField::zeros(g),
        })
    }

    fn check(&self, state: &NsfState) -> Result<()> {
        self.rho.require(Staggering::Center)?;
        self.theta.require(Staggering::Center)?;
        state.rho.same_layout(&self.rho)?;
        state.rho.same_layout(&self.theta)?;
        if *self.u.grid() != *state.rho.grid() {
            return Err(BllError::Shape("reference velocity lives on a different grid".into()));
        }
        if !(self.rho.min() > 0.0) || !(self.theta.min() > 0.0) {
            return Err(BllError::Domain(format!(
                "reference must be positive, min density {}, min temperature {}",
                self.rho.min(),
                self.theta.min()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEnergy {
    /// Cell density of the relative energy.
    pub density: ScalarField,
    pub integral: f64,
}

/// Thermostatic Bregman gap at one point, before the `1/ε²` scaling.
pub fn thermal_gap(rho: f64, theta: f64, rt: f64, tt: f64, eos: &EosParams) -> f64 {
    let s = entropy_unchecked(rho, theta, eos);
    let st = entropy_unchecked(rt, tt, eos);
    let et = energy_unchecked(rt, tt, eos);
    let pt = pressure_unchecked(rt, tt, eos);
    rho * energy_unchecked(rho, theta, eos) - tt * (rho * s - rt * st) - (et - tt * st + pt / rt) * (rho - rt) - rt * et
}

/// `|v - ṽ|²` per cell, averaging the squared face differences.
fn velocity_gap_sq(u: &VectorField, ut: &VectorField) -> Vec<f64> {
    let g = *u.grid();
    let (nx, nz) = (g.nx, g.nz);
    let (a, b) = (u.u.values(), ut.u.values());
    let (c, d) = (u.w.values(), ut.w.values());
    let mut out = vec![0.0; nx * nz];
    for j in 0..nz {
        for i in 0..nx {
            let k = j * nx + i;
            let kr = j * nx + if i + 1 == nx { 0 } else { i + 1 };
            let du0 = a[k] - b[k];
            let du1 = a[kr] - b[kr];
            let dw0 = c[k] - d[k];
            let dw1 = c[k + nx] - d[k + nx];
            out[k] = 0.5 * (du0 * du0 + du1 * du1) + 0.5 * (dw0 * dw0 + dw1 * dw1);
        }
    }
    out
}

/// `½ ρ |u - ũ|² + ε⁻² [ρe - θ̃(ρs - ρ̃s̃) - (ẽ - θ̃s̃ + p̃/ρ̃)(ρ - ρ̃) - ρ̃ẽ]`
/// cell by cell, with `ε` taken from the state.
pub fn relative_energy(state: &NsfState, reference: &Reference, eos: &EosParams) -> Result<RelativeEnergy> {
    reference.check(state)?;
    let g = *state.rho.grid();
    let inv_eps2 = 1.0 / (state.eps * state.eps);
    let kin = velocity_gap_sq(&state.u, &reference.u);
    let (rho, theta) = (state.rho.values(), state.theta.values());
    let (rt, tt) = (reference.rho.values(), reference.theta.values());
    let mut density = Vec::with_capacity(rho.len());
    for k in 0..rho.len() {
        if !(rho[k] > 0.0) || !(theta[k] > 0.0) {
            return Err(BllError::Domain(format!("state is not positive in cell {k}")));
        }
        density.push(0.5 * rho[k] * kin[k] + inv_eps2 * thermal_gap(rho[k], theta[k], rt[k], tt[k], eos));
    }
    let density = ScalarField::from_vec(g, Staggering::Center, density)?;
    let integral = density.integral();
    Ok(RelativeEnergy { density, integral })
}

/// Box `[rho_lo, rho_hi] × [theta_lo, theta_hi]` separating the essential
/// and residual ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialSet {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl EssentialSet {
    pub fn new(rho_lo: f64, rho_hi: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        if !(0.0 < rho_lo && rho_lo < rho_hi && 0.0 < theta_lo && theta_lo < theta_hi) || !rho_hi.is_finite() || !theta_hi.is_finite() {
            return Err(BllError::Configuration(format!(
                "invalid essential set [{rho_lo}, {rho_hi}] x [{theta_lo}, {theta_hi}]"
            )));
        }
        Ok(Self { rho_lo, rho_hi, theta_lo, theta_hi })
    }

    /// The dyadic box `[ρ̄/2, 2ρ̄] × [θ̄/2, 2θ̄]`.
    pub fn around(rho_bar: f64, theta_bar: f64) -> Result<Self> {
        Self::new(0.5 * rho_bar, 2.0 * rho_bar, 0.5 * theta_bar, 2.0 * theta_bar)
    }

    pub fn contains(&self, rho: f64, theta: f64) -> bool {
        (self.rho_lo..=self.rho_hi).contains(&rho) && (self.theta_lo..=self.theta_hi).contains(&theta)
    }

    pub fn contains_interior(&self, rho: f64, theta: f64) -> bool {
        rho > self.rho_lo && rho < self.rho_hi && theta > self.theta_lo && theta < self.theta_hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// 1 where `(ρ, θ) ∈ K`, else 0.
    pub essential: ScalarField,
    /// `1 - essential`.
    pub residual: ScalarField,
    pub essential_measure: f64,
    pub residual_measure: f64,
}

pub fn ess_res_decompose(state: &NsfState, set: &EssentialSet) -> Decomposition {
    let ess = state
        .rho
        .zip_map(&state.theta, |r, t| if set.contains(r, t) { 1.0 } else { 0.0 })
        .expect("density and temperature share a layout");
    let res = ess.map(|e| 1.0 - e);
    Decomposition {
        essential_measure: ess.integral(),
        residual_measure: res.integral(),
        essential: ess,
        residual: res,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelEnergyReport {
    pub total: f64,
    pub essential: f64,
    pub residual: f64,
    pub residual_measure: f64,
    /// Integrated right side of the essential bound (without `C`).
    pub bb1_rhs: f64,
    /// Integrated right side of the residual bound (without `C`).
    pub bb2_rhs: f64,
    /// Largest `C` for which the essential bound holds cellwise.
    pub c_bb1: Option<f64>,
    /// Largest `C` for which the residual bound holds cellwise.
    pub c_bb2: Option<f64>,
}

impl RelEnergyReport {
    /// Smallest admissible constant over both bounds, if any cell is tested.
    pub fn c_fit(&self) -> Option<f64> {
        match (self.c_bb1, self.c_bb2) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Both bounds hold with a positive constant (vacuous for empty sets).
    pub fn holds(&self) -> bool {
        self.c_bb1.is_none_or(|c| c > 0.0) && self.c_bb2.is_none_or(|c| c > 0.0)
    }
}

/// `½ min(p_ρ/ρ, ρ e_θ/θ, ρ)`: the small-perturbation limit of the essential
/// constant, from the Hessian of the relative energy at `(ρ, θ)`.
pub fn quadratic_bound(rho: f64, theta: f64, eos: &EosParams) -> Result<f64> {
    let pt = ThermoPoint::new(rho, theta)?;
    let p_rho = pressure_derivatives(pt, eos)?.0;
    let e_theta = energy_dtheta(pt, eos)?;
    Ok(0.5 * (p_rho / rho).min(rho * e_theta / theta).min(rho))
}

/// Evaluates both coercivity bounds cell by cell and reports the largest
/// admissible constants.
pub fn coercivity_check(
    state: &NsfState,
    reference: &Reference,
    set: &EssentialSet,
    eos: &EosParams,
) -> Result<RelEnergyReport> {
    reference.check(state)?;
    for (k, (&r, &t)) in reference.rho.values().iter().zip(reference.theta.values()).enumerate() {
        if !set.contains_interior(r, t) {
            return Err(BllError::Configuration(format!(
                "reference ({r}, {t}) in cell {k} is not inside the essential set"
            )));
        }
    }
    let rel = relative_energy(state, reference, eos)?;
    let dec = ess_res_decompose(state, set);
    let inv_eps2 = 1.0 / (state.eps * state.eps);
    let kin = velocity_gap_sq(&state.u, &reference.u);
    let speed = velocity_gap_sq(&state.u, &VectorField::zeros(*state.rho.grid()));
    let (rho, theta) = (state.rho.values(), state.theta.values());
    let (rt, tt) = (reference.rho.values(), reference.theta.values());
    let cell = state.rho.grid().cell_area();
    let (mut ess, mut res, mut bb1, mut bb2) = (0.0, 0.0, 0.0, 0.0);
    let (mut c1, mut c2): (Option<f64>, Option<f64>) = (None, None);
    let fold = |c: &mut Option<f64>, e: f64, rhs: f64| {
        if rhs > 0.0 {
            let ratio = e / rhs;
            *c = Some(c.map_or(ratio, |v| v.min(ratio)));
        }
    };
    for (k, &e) in rel.density.values().iter().enumerate() {
        if dec.essential.values()[k] == 1.0 {
            let dr = rho[k] - rt[k];
            let dt = theta[k] - tt[k];
            let rhs = inv_eps2 * (dr * dr + dt * dt) + kin[k];
            ess += e * cell;
            bb1 += rhs * cell;
            fold(&mut c1, e, rhs);
        } else {
            let (r, t) = (rho[k], theta[k]);
            let rhs = inv_eps2 * (1.0 + r * energy_unchecked(r, t, eos) + r * entropy_unchecked(r, t, eos).abs())
                + r * speed[k];
            res += e * cell;
            bb2 += rhs * cell;
            fold(&mut c2, e, rhs);
        }
    }
    Ok(RelEnergyReport {
        total: rel.integral,
        essential: ess,
        residual: res,
        residual_measure: dec.residual_measure,
        bb1_rhs: bb1,
        bb2_rhs: bb2,
        c_bb1: c1,
        c_bb2: c2,
    })
}

/// One sample of the relative energy inequality with reference
/// `(ρ̄, θ̄ + ε Θ̃_B, 0)`. `gap = ΔE + dissipation - forcing`; the inequality
/// asks for `gap ≤ 0`. Time integrals use the trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L4Record {
    pub t: f64,
    pub relative_energy: f64,
    pub dissipation: f64,
    pub forcing: f64,
    pub gap: f64,
}

/// Accumulates the two sides of the relative energy inequality along an
/// NSF trajectory. Monitored, never enforced.
#[derive(Debug, Clone)]
pub struct L4Monitor {
    eos: EosParams,
    eps: f64,
    rho_bar: f64,
    reference: Reference,
    stepper: NsfStepper,
    wall_bottom: Vec<f64>,
    wall_top: Vec<f64>,
    theta_grad: VectorField,
    p_grad: VectorField,
    g_grad: VectorField,
    s_ref: Vec<f64>,
    last: Option<(f64, f64)>,
    e0: f64,
    records: Vec<L4Record>,
}

impl L4Monitor {
    pub fn new(scenario: &NsfScenario) -> Result<Self> {
        let reference = Reference::for_scenario(scenario)?;
        let eos = scenario.eos;
        let p_ref = reference.rho.zip_map(&reference.theta, |r, t| pressure_unchecked(r, t, &eos))?;
        let s_ref = reference
            .rho
            .zip_map(&reference.theta, |r, t| entropy_unchecked(r, t, &eos))?
            .into_values();
        let walls = scenario.wall_temperature();
        Ok(Self {
            eos,
            eps: scenario.eps,
            rho_bar: scenario.rho_bar,
            theta_grad: grad(&reference.theta)?,
            p_grad: grad(&p_ref)?,
            g_grad: grad(&scenario.potential)?,
            reference,
            stepper: NsfStepper::new(scenario)?,
            wall_bottom: walls.bottom,
            wall_top: walls.top,
            s_ref,
            last: None,
            e0: 0.0,
            records: Vec::new(),
        })
    }

    /// Instantaneous dissipation and forcing rates.
    fn rates(&self, s: &NsfState) -> (f64, f64) {
        let g = *s.rho.grid();
        let (nx, nz, dx, dz) = (g.nx, g.nz, g.dx, g.dz);
        let inv_eps2 = 1.0 / (self.eps * self.eps);
        let tt = self.reference.theta.values();
        let dissipation = inv_eps2 * self.stepper.weighted_production(s, Some(tt));

        let (rho, theta) = (s.rho.values(), s.theta.values());
        let (u, w) = (s.u.u.values(), s.u.w.values());
        let (tgx, tgz) = (self.theta_grad.u.values(), self.theta_grad.w.values());
        let (pgx, pgz) = (self.p_grad.u.values(), self.p_grad.w.values());
        let (ggx, ggz) = (self.g_grad.u.values(), self.g_grad.w.values());
        let sdev: Vec<f64> = (0..nx * nz)
            .map(|k| rho[k] * (entropy_unchecked(rho[k], theta[k], &self.eos) - self.s_ref[k]))
            .collect();
        let kappa_over = |a: f64, b: f64| {
            let tf = 0.5 * (a + b);
            transport_unchecked(tf, &self.eos).2 / tf
        };
        // Per-face integrand of -ε⁻²[ρ(s - s̃) v·∇θ̃ - κ∇θ/θ·∇θ̃] + ε⁻¹ ρ v·∇G - ε⁻² (ρ/ρ̃) v·∇p̃.
        let mut forcing = 0.0;
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let km = j * nx + if i == 0 { nx - 1 } else { i - 1 };
                let rf = 0.5 * (rho[k] + rho[km]);
                let sf = 0.5 * (sdev[k] + sdev[km]);
                let heat = kappa_over(theta[k], theta[km]) * (theta[k] - theta[km]) / dx * tgx[k];
                forcing += -inv_eps2 * (sf * u[k] * tgx[k] - heat) + rf * u[k] * ggx[k] / self.eps
                    - inv_eps2 * rf / self.rho_bar * u[k] * pgx[k];
                if j > 0 {
                    let kb = k - nx;
                    let rf = 0.5 * (rho[k] + rho[kb]);
                    let sf = 0.5 * (sdev[k] + sdev[kb]);
                    let heat = kappa_over(theta[k], theta[kb]) * (theta[k] - theta[kb]) / dz * tgz[k];
                    forcing += -inv_eps2 * (sf * w[k] * tgz[k] - heat) + rf * w[k] * ggz[k] / self.eps
                        - inv_eps2 * rf / self.rho_bar * w[k] * pgz[k];
                }
            }
        }
        for i in 0..nx {
            let h = 0.5 * dz;
            let (tw, t0, r0) = (self.wall_bottom[i], theta[i], tt[i]);
            let gb = kappa_over(tw, t0) * (t0 - tw) / h * ((r0 - tw) / h);
            let k = (nz - 1) * nx + i;
            let (tw, tn, rn) = (self.wall_top[i], theta[k], tt[k]);
            let gt = kappa_over(tw, tn) * (tw - tn) / h * ((tw - rn) / h);
            forcing += 0.5 * inv_eps2 * (gb + gt);
        }
        (dissipation, forcing * dx * dz)
    }

    pub fn observe(&mut self, s: &NsfState, dt: f64) -> Result<()> {
        let e = relative_energy(s, &self.reference, &self.eos)?.integral;
        let (d, f) = self.rates(s);
        let (dis, frc) = match (self.last, self.records.last()) {
            (Some((d0, f0)), Some(prev)) => (prev.dissipation + 0.5 * dt * (d0 + d), prev.forcing + 0.5 * dt * (f0 + f)),
            _ => {
                self.e0 = e;
                (0.0, 0.0)
            }
        };
        self.last = Some((d, f));
        self.records.push(L4Record { t: s.t, relative_energy: e, dissipation: dis, forcing: frc, gap: e - self.e0 + dis - frc });
        Ok(())
    }

    pub fn records(&self) -> &[L4Record] {
        &self.records
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,relative_energy,dissipation,forcing,gap\n");
        for r in &self.records {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.6e}\n",
                r.t, r.relative_energy, r.dissipation, r.forcing, r.gap
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nsf::build_initial_nsf;

    fn uniform(eps: f64) -> (NsfScenario, NsfState) {
        let g = Grid::unit(8, 8).unwrap();
        let sc = NsfScenario::uniform(g, EosParams::with_closure(0.4, 0.2), 1.0, 1.0, eps);
        let st = build_initial_nsf(&sc).unwrap();
        (sc, st)
    }

    #[test]
    fn equal_states_have_zero_energy() {
        let (sc, st) = uniform(0.1);
        let r = Reference::constant(sc.grid, 1.0, 1.0);
        let e = relative_energy(&st, &r, &sc.eos).unwrap();
        assert!(e.density.max_abs() < 1e-12);
    }

    #[test]
    fn small_density_perturbation_matches_quadratic_form() {
        let g = Grid::new(8, 8, 2.0).unwrap();
        let sc = NsfScenario::uniform(g, EosParams::ideal(), 1.0, 1.0, 0.1);
        let mut st = build_initial_nsf(&sc).unwrap();
        let delta = 1e-3;
        st.rho.add_scalar(delta);
        let e = relative_energy(&st, &Reference::constant(g, 1.0, 1.0), &sc.eos).unwrap();
        // |Ω| θ̄/(2ρ̄) (δ/ε)².
        let expect = 2.0 * 0.5 * (delta / 0.1f64).powi(2);
        assert!(((e.integral - expect) / expect).abs() < 1e-3, "{} vs {expect}", e.integral);
    }

    #[test]
    fn decomposition_counts_one_cell() {
        let (sc, mut st) = uniform(0.1);
        let set = EssentialSet::around(1.0, 1.0).unwrap();
        assert_eq!(ess_res_decompose(&st, &set).residual_measure, 0.0);
        st.rho.set(3, 4, 4.0);
        let d = ess_res_decompose(&st, &set);
        assert!((d.residual_measure - sc.grid.cell_area()).abs() < 1e-15);
        assert!((d.essential_measure + d.residual_measure - sc.grid.area()).abs() < 1e-14);
    }

    #[test]
    fn reference_outside_set_is_rejected() {
        let (sc, st) = uniform(0.1);
        let set = EssentialSet::new(1.5, 3.0, 0.5, 2.0).unwrap();
        let r = Reference::constant(sc.grid, 1.0, 1.0);
        assert!(matches!(coercivity_check(&st, &r, &set, &sc.eos), Err(BllError::Configuration(_))));
        assert!(EssentialSet::new(2.0, 1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn residual_block_satisfies_bound() {
        let (sc, mut st) = uniform(0.1);
        for j in 2..4 {
            for i in 2..4 {
                st.theta.set(i, j, 6.0);
            }
        }
        let set = EssentialSet::around(1.0, 1.0).unwrap();
        let rep = coercivity_check(&st, &Reference::constant(sc.grid, 1.0, 1.0), &set, &sc.eos).unwrap();
        assert!(rep.c_bb2.unwrap() > 0.0);
        assert!(rep.c_bb1.is_none());
        assert!(rep.holds());
        assert!((rep.total - rep.essential - rep.residual).abs() < 1e-12 * rep.total);
    }

    #[test]
    fn monitor_is_flat_at_rest() {
        let (sc, st) = uniform(0.1);
        let mut m = L4Monitor::new(&sc).unwrap();
        m.observe(&st, 0.0).unwrap();
        m.observe(&st, 0.01).unwrap();
        assert_eq!(m.records().len(), 2);
        assert!(m.records()[1].gap.abs() < 1e-12);
    }
}
