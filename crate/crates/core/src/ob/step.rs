//! Semi-implicit step: Adams–Bashforth advection and buoyancy, implicit
//! Euler diffusion, Chorin projection, and the scalar closure for the mean
//! temperature.

use super::{recover_with, Frame, History, ObScenario, ObState};
use crate::error::{BllError, Result};
use crate::grid::{
    center_to_xface, center_to_zface, div, grad, ScalarField, SpectralSolver, Staggering,
    VectorField, WallValues, ZBc,
};
use crate::thermo::ObCoefficients;

/// Largest admissible advective Courant number for the explicit terms.
pub const OB_CFL_LIMIT: f64 = 0.5;

/// Per-scenario solver with cached FFT plans and unit responses.
#[derive(Debug, Clone)]
pub struct ObSolver {
    scenario: ObScenario,
    coeffs: ObCoefficients,
    lambda: f64,
    spectral: SpectralSolver,
    grad_g: VectorField,
    /// `(dt, V)` with `(I - dt D Δ) V = 1`, zero walls.
    unit_t: Option<(f64, ScalarField)>,
    /// `(dt, W)` with `(I - dt D Δ) W = 0`, walls `-λ/(1-λ)`.
    unit_theta: Option<(f64, ScalarField)>,
}

impl ObSolver {
    pub fn new(scenario: &ObScenario) -> Result<Self> {
        scenario.validate()?;
        let coeffs = scenario.coefficients()?;
        let lambda = scenario.lambda()?;
        let grad_g = grad(&scenario.potential)?;
        Ok(Self {
            spectral: SpectralSolver::new(scenario.grid),
            scenario: scenario.clone(),
            coeffs,
            lambda,
            grad_g,
            unit_t: None,
            unit_theta: None,
        })
    }

    pub fn scenario(&self) -> &ObScenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &ObCoefficients {
        &self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Time step allowed by the explicit advection.
    pub fn stable_dt(&self, state: &ObState) -> f64 {
        let g = &self.scenario.grid;
        let rate = state.u.u.max_abs() / g.dx + state.u.w.max_abs() / g.dz;
        if rate == 0.0 {
            f64::INFINITY
        } else {
            OB_CFL_LIMIT / rate
        }
    }

    pub fn step(&mut self, state: &ObState, dt: f64) -> Result<ObState> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(BllError::Parameter(format!("time step must be positive, got {dt}")));
        }
        let limit = self.stable_dt(state);
        if dt > limit {
            return Err(BllError::CflViolation { dt, suggested: 0.8 * limit });
        }
        let lambda = self.lambda;
        let c = self.coeffs;

        // Explicit parts at t^n.
        let temp_t = state.t_field(lambda);
        let mut heat = advect_scalar(&state.u, &state.temp)?;
        heat.axpy(c.adiabatic_coefficient(), &potential_work(&self.grad_g, &state.u)?)?;
        if let Some(src) = &self.scenario.heat_source {
            let t = state.t;
            let s = ScalarField::from_fn(self.scenario.grid, Staggering::Center, |x, z| src(t, x, z));
            heat.axpy(1.0, &s)?;
        }
        let mut mom = advect_momentum(&state.u)?;
        let buoy = match state.frame {
            Frame::T => {
                // -α 𝒯 ∇G per unit mass.
                let f = temp_t.map(|v| -c.alpha * v);
                face_product(&f, &self.grad_g)?
            }
            Frame::Theta => {
                let mut r = recover_with(&temp_t, &self.scenario.potential, &c)?;
                r.scale(1.0 / c.rho_bar);
                face_product(&r, &self.grad_g)?
            }
        };
        mom.axpy(1.0, &buoy)?;

        // Adams–Bashforth 2 with variable step; Euler on the first step.
        let (mut mom_rhs, mut heat_rhs) = (mom.clone(), heat.clone());
        if let Some(h) = &state.history {
            let w = dt / (2.0 * h.dt);
            mom_rhs.scale(1.0 + w);
            mom_rhs.axpy(-w, &h.momentum)?;
            heat_rhs.scale(1.0 + w);
            heat_rhs.axpy(-w, &h.heat)?;
        }

        // Momentum: implicit viscosity, then projection.
        let nu = c.kinematic_viscosity();
        let nx = self.scenario.grid.nx;
        let zero = ZBc::zero_dirichlet(nx);
        let mut u_star = state.u.clone();
        u_star.axpy(dt, &mom_rhs)?;
        let mut u_new = VectorField {
            u: self.spectral.helmholtz(&u_star.u, dt * nu, &zero)?,
            w: self.spectral.helmholtz(&u_star.w, dt * nu, &zero)?,
        };
        let (phi, _) = self.spectral.poisson(&div(&u_new)?)?;
        u_new.axpy(-1.0, &grad(&phi)?)?;
        u_new.enforce_no_slip();
        let mut pi = phi;
        pi.scale(c.rho_bar / dt);

        // Temperature with the scalar closure.
        let diff = dt * c.diffusivity();
        let mut rhs = state.temp.clone();
        rhs.axpy(dt, &heat_rhs)?;
        let data = ZBc::Dirichlet(self.scenario.theta_b.clone());
        let s = self.spectral.helmholtz(&rhs, diff, &data)?;
        let temp_new = match state.frame {
            Frame::T => {
                let v = self.unit_response_t(dt, diff)?;
                let (mean_s, mean_v, m_old) = (s.mean(), v.mean(), state.temp.mean());
                let det = 1.0 - lambda * mean_v;
                if det.abs() < 1e-12 {
                    return Err(BllError::DegenerateClosure(det));
                }
                let m_new = (mean_s - lambda * m_old * mean_v) / det;
                let mut out = s;
                out.axpy(lambda * (m_new - m_old), &v)?;
                out
            }
            Frame::Theta => {
                let w = self.unit_response_theta(dt, diff)?;
                let det = 1.0 - w.mean();
                if det.abs() < 1e-12 {
                    return Err(BllError::DegenerateClosure(det));
                }
                let m = s.mean() / det;
                let mut out = s;
                out.axpy(m, &w)?;
                out
            }
        };

        let next = ObState {
            u: u_new,
            temp: temp_new,
            pi,
            t: state.t + dt,
            frame: state.frame,
            history: Some(History { momentum: mom, heat, dt }),
        };
        if !next.temp.all_finite() || !next.u.all_finite() {
            return Err(BllError::Divergence {
                step: 0,
                time: next.t,
                reason: "non-finite field".into(),
            });
        }
        Ok(next)
    }

    fn unit_response_t(&mut self, dt: f64, diff: f64) -> Result<ScalarField> {
        if let Some((cached, v)) = &self.unit_t {
            if *cached == dt {
                return Ok(v.clone());
            }
        }
        let grid = self.scenario.grid;
        let v = self.spectral.helmholtz(
            &ScalarField::constant(grid, Staggering::Center, 1.0),
            diff,
            &ZBc::zero_dirichlet(grid.nx),
        )?;
        self.unit_t = Some((dt, v.clone()));
        Ok(v)
    }

    fn unit_response_theta(&mut self, dt: f64, diff: f64) -> Result<ScalarField> {
        if let Some((cached, w)) = &self.unit_theta {
            if *cached == dt {
                return Ok(w.clone());
            }
        }
        let grid = self.scenario.grid;
        let beta = self.lambda / (1.0 - self.lambda);
        let w = self.spectral.helmholtz(
            &ScalarField::zeros(grid, Staggering::Center),
            diff,
            &ZBc::Dirichlet(WallValues::constant(grid.nx, -beta, -beta)),
        )?;
        self.unit_theta = Some((dt, w.clone()));
        Ok(w)
    }
}

/// One 𝒯-frame step built from scratch (see [`ObSolver`] for repeated steps).
pub fn step_ob_tframe(state: &ObState, scenario: &ObScenario, dt: f64) -> Result<ObState> {
    if state.frame != Frame::T {
        return Err(BllError::Parameter("state is not in the T-frame".into()));
    }
    ObSolver::new(scenario)?.step(state, dt)
}

/// One Θ-frame step built from scratch.
pub fn step_ob_thetaframe(state: &ObState, scenario: &ObScenario, dt: f64) -> Result<ObState> {
    if state.frame != Frame::Theta {
        return Err(BllError::Parameter("state is not in the Theta-frame".into()));
    }
    ObSolver::new(scenario)?.step(state, dt)
}

/// `-div(U f)` with centered face values; zero flux through the walls.
pub(crate) fn advect_scalar(v: &VectorField, f: &ScalarField) -> Result<ScalarField> {
    f.require(Staggering::Center)?;
    let g = *f.grid();
    let (nx, nz) = (g.nx, g.nz);
    let (u, w, t) = (v.u.values(), v.w.values(), f.values());
    let mut fx = vec![0.0; nx * nz];
    for j in 0..nz {
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            fx[j * nx + i] = u[j * nx + i] * 0.5 * (t[j * nx + i] + t[j * nx + im]);
        }
    }
    let mut fz = vec![0.0; nx * (nz + 1)];
    for j in 1..nz {
        for i in 0..nx {
            fz[j * nx + i] = w[j * nx + i] * 0.5 * (t[j * nx + i] + t[(j - 1) * nx + i]);
        }
    }
    let mut out = vec![0.0; nx * nz];
    for j in 0..nz {
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            out[j * nx + i] = -(fx[j * nx + ip] - fx[j * nx + i]) / g.dx
                - (fz[(j + 1) * nx + i] - fz[j * nx + i]) / g.dz;
        }
    }
    ScalarField::from_vec(g, Staggering::Center, out)
}

/// `-div(U ⊗ U)` on the MAC grid. Corner fluxes on the walls vanish
/// (no-slip ghost `u = -u`, `w = 0`).
pub(crate) fn advect_momentum(v: &VectorField) -> Result<VectorField> {
    let g = *v.grid();
    let (nx, nz) = (g.nx, g.nz);
    let (u, w) = (v.u.values(), v.w.values());
    // Corner flux u w at (i dx, j dz).
    let mut corner = vec![0.0; nx * (nz + 1)];
    for j in 1..nz {
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let uc = 0.5 * (u[j * nx + i] + u[(j - 1) * nx + i]);
            let wc = 0.5 * (w[j * nx + i] + w[j * nx + im]);
            corner[j * nx + i] = uc * wc;
        }
    }
    let mut out = VectorField::zeros(g);
    {
        let ou = out.u.values_mut();
        for j in 0..nz {
            for i in 0..nx {
                let im = if i == 0 { nx - 1 } else { i - 1 };
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let here = 0.5 * (u[j * nx + i] + u[j * nx + ip]);
                let left = 0.5 * (u[j * nx + im] + u[j * nx + i]);
                ou[j * nx + i] = -(here * here - left * left) / g.dx
                    - (corner[(j + 1) * nx + i] - corner[j * nx + i]) / g.dz;
            }
        }
    }
    {
        let ow = out.w.values_mut();
        for j in 1..nz {
            for i in 0..nx {
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let above = 0.5 * (w[j * nx + i] + w[(j + 1) * nx + i]);
                let below = 0.5 * (w[(j - 1) * nx + i] + w[j * nx + i]);
                ow[j * nx + i] = -(corner[j * nx + ip] - corner[j * nx + i]) / g.dx
                    - (above * above - below * below) / g.dz;
            }
        }
    }
    Ok(out)
}

/// Cell-centered `∇G · U` from face products.
pub(crate) fn potential_work(grad_g: &VectorField, v: &VectorField) -> Result<ScalarField> {
    let gu = grad_g.u.zip_map(&v.u, |a, b| a * b)?;
    let gw = grad_g.w.zip_map(&v.w, |a, b| a * b)?;
    let mut out = crate::grid::xface_to_center(&gu)?;
    out.axpy(1.0, &crate::grid::zface_to_center(&gw)?)?;
    Ok(out)
}

/// Face values of a cell field times a face vector field.
pub(crate) fn face_product(f: &ScalarField, v: &VectorField) -> Result<VectorField> {
    let fx = center_to_xface(f)?;
    let fz = center_to_zface(f, None)?;
    let mut out = VectorField {
        u: fx.zip_map(&v.u, |a, b| a * b)?,
        w: fz.zip_map(&v.w, |a, b| a * b)?,
    };
    out.enforce_no_slip();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::ob::{build_initial_ob, transform_frame, velocity_from_streamfunction};
    use crate::thermo::EosParams;
    use std::f64::consts::PI;

    #[test]
    fn quiescent_state_is_fixed_point() {
        let g = Grid::unit(16, 8).unwrap();
        let sc = ObScenario::new(g, EosParams::ideal(), 1.0, 1.0).with_gravity(3.0);
        let mut solver = ObSolver::new(&sc).unwrap();
        let mut st = build_initial_ob(&sc).unwrap();
        for _ in 0..5 {
            st = solver.step(&st, 0.01).unwrap();
        }
        assert!(st.u.max_abs() < 1e-13);
        assert!(st.temp.max_abs() < 1e-13);
    }

    #[test]
    fn momentum_advection_conserves_energy_for_divergence_free_fields() {
        let g = Grid::unit(16, 16).unwrap();
        let v = velocity_from_streamfunction(g, |x, z| (2.0 * PI * x).sin() * (PI * z).sin().powi(2));
        let a = advect_momentum(&v).unwrap();
        let work = a.dot(&v).unwrap();
        assert!(work.abs() < 1e-10, "{work}");
    }

    #[test]
    fn scalar_advection_conserves_integral() {
        let g = Grid::unit(16, 16).unwrap();
        let v = velocity_from_streamfunction(g, |x, z| (2.0 * PI * x).cos() * (PI * z).sin().powi(2));
        let f = ScalarField::from_fn(g, Staggering::Center, |x, z| (x * 7.0).sin() + z * z);
        assert!(advect_scalar(&v, &f).unwrap().integral().abs() < 1e-13);
    }

    #[test]
    fn constant_walls_relax_to_shifted_theta() {
        let g = Grid::unit(8, 8).unwrap();
        let c = 0.7;
        let t0 = ScalarField::from_fn(g, Staggering::Center, |_, z| c + 0.3 * (PI * z).sin());
        let sc = ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
            .with_walls(WallValues::constant(8, c, c))
            .with_initial(t0, VectorField::zeros(g));
        let lambda = sc.lambda().unwrap();
        let mut solver = ObSolver::new(&sc).unwrap();
        let st0 = build_initial_ob(&sc).unwrap();
        let mut th = transform_frame(&st0, Frame::Theta, lambda);
        let mut st = st0;
        for _ in 0..200 {
            st = solver.step(&st, 200.0).unwrap();
            th = solver.step(&th, 200.0).unwrap();
        }
        for v in th.temp.values() {
            assert!((v - (1.0 - lambda) * c).abs() < 1e-8);
        }
        for v in st.temp.values() {
            assert!((v - c).abs() < 1e-8);
        }
    }

    /// Classical Dirichlet step (no mean closure), Euler then AB2.
    fn classical_steps(sc: &ObScenario, n: usize, dt: f64) -> (VectorField, ScalarField) {
        let c = sc.coefficients().unwrap();
        let sp = SpectralSolver::new(sc.grid);
        let gg = grad(&sc.potential).unwrap();
        let st = build_initial_ob(sc).unwrap();
        let (mut u, mut t) = (st.u, st.temp);
        let mut prev: Option<(VectorField, ScalarField)> = None;
        let zero = ZBc::zero_dirichlet(sc.grid.nx);
        for _ in 0..n {
            let mut heat = advect_scalar(&u, &t).unwrap();
            heat.axpy(c.adiabatic_coefficient(), &potential_work(&gg, &u).unwrap()).unwrap();
            let mut mom = advect_momentum(&u).unwrap();
            mom.axpy(1.0, &face_product(&t.map(|v| -c.alpha * v), &gg).unwrap()).unwrap();
            let (mut mr, mut hr) = (mom.clone(), heat.clone());
            if let Some((pm, ph)) = &prev {
                mr.scale(1.5);
                mr.axpy(-0.5, pm).unwrap();
                hr.scale(1.5);
                hr.axpy(-0.5, ph).unwrap();
            }
            let mut us = u.clone();
            us.axpy(dt, &mr).unwrap();
            let nu = c.kinematic_viscosity();
            let mut un = VectorField {
                u: sp.helmholtz(&us.u, dt * nu, &zero).unwrap(),
                w: sp.helmholtz(&us.w, dt * nu, &zero).unwrap(),
            };
            let (phi, _) = sp.poisson(&div(&un).unwrap()).unwrap();
            un.axpy(-1.0, &grad(&phi).unwrap()).unwrap();
            un.enforce_no_slip();
            let mut rhs = t.clone();
            rhs.axpy(dt, &hr).unwrap();
            t = sp.helmholtz(&rhs, dt * c.diffusivity(), &ZBc::Dirichlet(sc.theta_b.clone())).unwrap();
            u = un;
            prev = Some((mom, heat));
        }
        (u, t)
    }

    #[test]
    fn zero_lambda_reduces_to_classical_dirichlet() {
        let g = Grid::new(16, 8, 2.0).unwrap();
        let t0 = ScalarField::from_fn(g, Staggering::Center, |x, z| 1.0 - 0.5 * z + 0.3 * (PI * x).cos() * (PI * z).sin());
        let u0 = velocity_from_streamfunction(g, |x, z| 0.1 * (PI * x).sin() * (PI * z).sin().powi(2));
        let sc = ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
            .with_gravity(2.0)
            .with_walls(WallValues::constant(16, 1.0, 0.5))
            .with_initial(t0, u0)
            .with_lambda(0.0);
        let (u_ref, t_ref) = classical_steps(&sc, 4, 0.01);
        for frame in [Frame::T, Frame::Theta] {
            let mut solver = ObSolver::new(&sc).unwrap();
            let mut st = transform_frame(&build_initial_ob(&sc).unwrap(), frame, 0.0);
            for _ in 0..4 {
                st = solver.step(&st, 0.01).unwrap();
            }
            let dt = st.temp.zip_map(&t_ref, |a, b| a - b).unwrap().max_abs();
            let mut du = st.u.clone();
            du.axpy(-1.0, &u_ref).unwrap();
            assert!(dt < 1e-13 && du.max_abs() < 1e-13, "{frame:?}: {dt:e} {:e}", du.max_abs());
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = Grid::unit(16, 16).unwrap();
        let v = velocity_from_streamfunction(g, |x, z| 10.0 * (2.0 * PI * x).sin() * (PI * z).sin().powi(2));
        let sc = ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
            .with_initial(ScalarField::zeros(g, Staggering::Center), v);
        let mut solver = ObSolver::new(&sc).unwrap();
        let st = build_initial_ob(&sc).unwrap();
        assert!(matches!(solver.step(&st, 1.0), Err(BllError::CflViolation { .. })));
    }
}
