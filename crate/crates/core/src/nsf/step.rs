//! Right-hand side of the compressible system and the Runge–Kutta update.
//!
//! All x-stencils are written with mirror-symmetric operand grouping so that
//! an x-mirrored scenario reproduces the mirrored trajectory bit for bit.

use super::{NsfScenario, NsfState};
use crate::error::{BllError, Result};
use crate::grid::{grad, ScalarField, Staggering, VectorField};
use crate::thermo::{
    pressure_unchecked, sound_speed_sq, temperature_from_energy,
    transport_unchecked, EosParams, ThermoPoint,
};

/// Hard stability bound on the acoustic Courant number.
pub const NSF_CFL_MAX: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Two-stage strong-stability-preserving Runge–Kutta.
    SspRk2,
    /// Three-stage strong-stability-preserving Runge–Kutta.
    #[default]
    SspRk3,
}

/// Conserved variables `(ρ, ρe, u, w)` as flat arrays.
#[derive(Debug, Clone)]
struct Cons {
    rho: Vec<f64>,
    en: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
}

impl Cons {
    /// `a * x + b * (y + dt * r)`.
    fn combine(a: f64, x: &Cons, b: f64, y: &Cons, dt: f64, r: &Cons) -> Cons {
        let mix = |xs: &[f64], ys: &[f64], rs: &[f64]| -> Vec<f64> {
            xs.iter()
                .zip(ys)
                .zip(rs)
                .map(|((&x, &y), &r)| a * x + b * (y + dt * r))
                .collect()
        };
        Cons {
            rho: mix(&x.rho, &y.rho, &r.rho),
            en: mix(&x.en, &y.en, &r.en),
            u: mix(&x.u, &y.u, &r.u),
            w: mix(&x.w, &y.w, &r.w),
        }
    }
}

/// Precomputed per-scenario data.
struct Stress {
    mu: Vec<f64>,
    eta: Vec<f64>,
    dux: Vec<f64>,
    dwz: Vec<f64>,
    sxx: Vec<f64>,
    szz: Vec<f64>,
    /// `∂_z u + ∂_x w` at cell corners, `nz + 1` rows.
    shear: Vec<f64>,
    sxz: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NsfStepper {
    nx: usize,
    nz: usize,
    dx: f64,
    dz: f64,
    eps: f64,
    eos: EosParams,
    wall_bottom: Vec<f64>,
    wall_top: Vec<f64>,
    gx: Vec<f64>,
    gz: Vec<f64>,
    integrator: Integrator,
    cfl: f64,
    scenario: NsfScenario,
}

impl NsfStepper {
    pub fn new(scenario: &NsfScenario) -> Result<Self> {
        scenario.validate()?;
        let g = scenario.grid;
        let walls = scenario.wall_temperature();
        let gg = grad(&scenario.potential)?;
        Ok(Self {
            nx: g.nx,
            nz: g.nz,
            dx: g.dx,
            dz: g.dz,
            eps: scenario.eps,
            eos: scenario.eos,
            wall_bottom: walls.bottom,
            wall_top: walls.top,
            gx: gg.u.into_values(),
            gz: gg.w.into_values(),
            integrator: scenario.integrator,
            cfl: scenario.cfl,
            scenario: scenario.clone(),
        })
    }

    pub fn scenario(&self) -> &NsfScenario {
        &self.scenario
    }

    fn to_cons(&self, s: &NsfState) -> Cons {
        Cons {
            rho: s.rho.values().to_vec(),
            en: s.energy_density(&self.eos).into_values(),
            u: s.u.u.values().to_vec(),
            w: s.u.w.values().to_vec(),
        }
    }

    fn temperatures(&self, c: &Cons, guess: &[f64]) -> Result<Vec<f64>> {
        let mut theta = Vec::with_capacity(c.rho.len());
        for k in 0..c.rho.len() {
            let (r, e) = (c.rho[k], c.en[k]);
            if !(r > 0.0) || !e.is_finite() {
                return Err(BllError::Domain(format!("density {r} or energy {e} invalid in cell {k}")));
            }
            let t = temperature_from_energy(r, e / r, guess[k], &self.eos)?;
            if !(t > 0.0) {
                return Err(BllError::Domain(format!("temperature {t} in cell {k}")));
            }
            theta.push(t);
        }
        Ok(theta)
    }

    fn to_state(&self, c: Cons, theta: Vec<f64>, t: f64) -> Result<NsfState> {
        let g = self.scenario.grid;
        Ok(NsfState {
            rho: ScalarField::from_vec(g, Staggering::Center, c.rho)?,
            theta: ScalarField::from_vec(g, Staggering::Center, theta)?,
            u: VectorField {
                u: ScalarField::from_vec(g, Staggering::XFace, c.u)?,
                w: ScalarField::from_vec(g, Staggering::ZFace, c.w)?,
            },
            t,
            eps: self.eps,
        })
    }

    /// Largest stable step for the state at the configured Courant number.
    pub fn stable_dt(&self, s: &NsfState) -> Result<f64> {
        self.stable_dt_at(s, self.cfl)
    }

    fn stable_dt_at(&self, s: &NsfState, cfl: f64) -> Result<f64> {
        let h = self.dx.min(self.dz);
        let mut speed: f64 = 0.0;
        let mut diff: f64 = 0.0;
        for (k, (&r, &t)) in s.rho.values().iter().zip(s.theta.values()).enumerate() {
            let pt = ThermoPoint::new(r, t).map_err(|e| BllError::Domain(format!("cell {k}: {e}")))?;
            let c = sound_speed_sq(pt, &self.eos)?.sqrt() / self.eps;
            speed = speed.max(c);
            let (mu, eta, kappa) = transport_unchecked(t, &self.eos);
            let e_theta = crate::thermo::energy_dtheta(pt, &self.eos)?;
            diff = diff.max((2.0 * mu + eta) / r).max(kappa / (r * e_theta));
        }
        let adv = s.u.u.max_abs().max(s.u.w.max_abs());
        let dt_wave = cfl * h / (speed + adv);
        let dt_diff = if diff > 0.0 { 0.25 * cfl * h * h / diff } else { f64::INFINITY };
        Ok(dt_wave.min(dt_diff))
    }

    /// One Runge–Kutta step. Rejects steps above the hard stability bound.
    pub fn step(&self, s: &NsfState, dt: f64) -> Result<NsfState> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(BllError::Parameter(format!("time step must be positive, got {dt}")));
        }
        let limit = self.stable_dt_at(s, NSF_CFL_MAX)?;
        if dt > limit {
            return Err(BllError::CflViolation { dt, suggested: self.stable_dt(s)? });
        }
        let diverged = |e: BllError| match e {
            BllError::Domain(reason) => BllError::Divergence { step: 0, time: s.t, reason },
            other => other,
        };
        let c0 = self.to_cons(s);
        let th0 = s.theta.values().to_vec();
        let r0 = self.rhs(&c0, &th0);
        let out = match self.integrator {
            Integrator::SspRk2 => {
                let c1 = Cons::combine(0.0, &c0, 1.0, &c0, dt, &r0);
                let th1 = self.temperatures(&c1, &th0).map_err(diverged)?;
                let r1 = self.rhs(&c1, &th1);
                Cons::combine(0.5, &c0, 0.5, &c1, dt, &r1)
            }
            Integrator::SspRk3 => {
                let c1 = Cons::combine(0.0, &c0, 1.0, &c0, dt, &r0);
                let th1 = self.temperatures(&c1, &th0).map_err(diverged)?;
                let r1 = self.rhs(&c1, &th1);
                let c2 = Cons::combine(0.75, &c0, 0.25, &c1, dt, &r1);
                let th2 = self.temperatures(&c2, &th1).map_err(diverged)?;
                let r2 = self.rhs(&c2, &th2);
                Cons::combine(1.0 / 3.0, &c0, 2.0 / 3.0, &c2, dt, &r2)
            }
        };
        let theta = self.temperatures(&out, &th0).map_err(diverged)?;
        let next = self.to_state(out, theta, s.t + dt)?;
        if !next.u.all_finite() {
            return Err(BllError::Divergence { step: 0, time: next.t, reason: "non-finite velocity".into() });
        }
        Ok(next)
    }

    /// Viscosities, cell strain rates, normal stresses and corner shear.
    fn stress(&self, u: &[f64], w: &[f64], theta: &[f64]) -> Stress {
        let (nx, nz, dx, dz) = (self.nx, self.nz, self.dx, self.dz);
        let eos = &self.eos;
        let ncell = nx * nz;
        let left = |i: usize| if i == 0 { nx - 1 } else { i - 1 };
        let right = |i: usize| if i + 1 == nx { 0 } else { i + 1 };
        let mut mu = vec![0.0; ncell];
        let mut eta = vec![0.0; ncell];
        for k in 0..ncell {
            let (m, e, _) = transport_unchecked(theta[k], eos);
            mu[k] = m;
            eta[k] = e;
        }

        // Cell strain rates and normal stresses.
        let mut dux = vec![0.0; ncell];
        let mut dwz = vec![0.0; ncell];
        let mut sxx = vec![0.0; ncell];
        let mut szz = vec![0.0; ncell];
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let a = (u[j * nx + right(i)] - u[k]) / dx;
                let b = (w[(j + 1) * nx + i] - w[k]) / dz;
                let dv = a + b;
                dux[k] = a;
                dwz[k] = b;
                sxx[k] = mu[k] * (a - b) + eta[k] * dv;
                szz[k] = mu[k] * (b - a) + eta[k] * dv;
            }
        }

        // Corner shear stress at (i dx, j dz), j = 0..=nz.
        let mut shear = vec![0.0; nx * (nz + 1)];
        let mut sxz = vec![0.0; nx * (nz + 1)];
        for j in 0..=nz {
            for i in 0..nx {
                let im = left(i);
                let dudz = if j == 0 {
                    2.0 * u[i] / dz
                } else if j == nz {
                    -2.0 * u[(nz - 1) * nx + i] / dz
                } else {
                    (u[j * nx + i] - u[(j - 1) * nx + i]) / dz
                };
                let dwdx = (w[j * nx + i] - w[j * nx + im]) / dx;
                let th = if j == 0 {
                    0.5 * (self.wall_bottom[im] + self.wall_bottom[i])
                } else if j == nz {
                    0.5 * (self.wall_top[im] + self.wall_top[i])
                } else {
                    0.25 * ((theta[(j - 1) * nx + im] + theta[(j - 1) * nx + i])
                        + (theta[j * nx + im] + theta[j * nx + i]))
                };
                let m = transport_unchecked(th, eos).0;
                let rate = dudz + dwdx;
                shear[j * nx + i] = rate;
                sxz[j * nx + i] = m * rate;
            }
        }

        Stress { mu, eta, dux, dwz, sxx, szz, shear, sxz }
    }

    /// Cell dissipation `𝕊:∇u` with the corner shear averaged to centers.
    fn dissipation(&self, st: &Stress) -> Vec<f64> {
        let (nx, nz) = (self.nx, self.nz);
        let right = |i: usize| if i + 1 == nx { 0 } else { i + 1 };
        let mut out = vec![0.0; nx * nz];
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let kc = j * nx + right(i);
                let ka = (j + 1) * nx + i;
                let kac = (j + 1) * nx + right(i);
                let corners = 0.25
                    * ((st.sxz[k] * st.shear[k] + st.sxz[kc] * st.shear[kc])
                        + (st.sxz[ka] * st.shear[ka] + st.sxz[kac] * st.shear[kac]));
                let dv = st.dux[k] + st.dwz[k];
                let d = st.dux[k] - st.dwz[k];
                out[k] = st.mu[k] * d * d + st.eta[k] * dv * dv + corners;
            }
        }
        out
    }

    /// Integrated entropy production `∫ ε² 𝕊:∇u / θ + κ |∇θ|² / θ²`, with
    /// face gradients and the wall half cells included.
    pub fn entropy_production(&self, s: &NsfState) -> f64 {
        self.weighted_production(s, None)
    }

    /// Entropy production weighted by a cell field; on faces the weight is
    /// averaged, on the walls it takes the wall temperature.
    pub(crate) fn weighted_production(&self, s: &NsfState, weight: Option<&[f64]>) -> f64 {
        let (nx, nz, dx, dz) = (self.nx, self.nz, self.dx, self.dz);
        let eps2 = self.eps * self.eps;
        let theta = s.theta.values();
        let wt = |k: usize| weight.map_or(1.0, |w| w[k]);
        let st = self.stress(s.u.u.values(), s.u.w.values(), theta);
        let diss = self.dissipation(&st);
        let mut total = 0.0;
        for k in 0..nx * nz {
            total += wt(k) * eps2 * diss[k] / theta[k];
        }
        let heat = |a: f64, b: f64, h: f64| {
            let tf = 0.5 * (a + b);
            let kappa = transport_unchecked(tf, &self.eos).2;
            let g = (b - a) / h;
            kappa * g * g / (tf * tf)
        };
        let mut faces = 0.0;
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let km = j * nx + if i == 0 { nx - 1 } else { i - 1 };
                faces += 0.5 * (wt(k) + wt(km)) * heat(theta[km], theta[k], dx);
                if j > 0 {
                    faces += 0.5 * (wt(k) + wt(k - nx)) * heat(theta[k - nx], theta[k], dz);
                }
            }
        }
        for i in 0..nx {
            let k = (nz - 1) * nx + i;
            let (b, t) = if weight.is_some() { (self.wall_bottom[i], self.wall_top[i]) } else { (1.0, 1.0) };
            faces += 0.5 * b * heat(self.wall_bottom[i], theta[i], 0.5 * dz);
            faces += 0.5 * t * heat(theta[k], self.wall_top[i], 0.5 * dz);
        }
        (total + faces) * dx * dz
    }

    /// Time derivative of the conserved variables.
    fn rhs(&self, c: &Cons, theta: &[f64]) -> Cons {
        let (nx, nz, dx, dz) = (self.nx, self.nz, self.dx, self.dz);
        let eos = &self.eos;
        let eps2 = self.eps * self.eps;
        let inv_eps = 1.0 / self.eps;
        let ncell = nx * nz;
        let left = |i: usize| if i == 0 { nx - 1 } else { i - 1 };
        let right = |i: usize| if i + 1 == nx { 0 } else { i + 1 };
        let (rho, en, u, w) = (&c.rho, &c.en, &c.u, &c.w);

        let mut p = vec![0.0; ncell];
        for k in 0..ncell {
            p[k] = pressure_unchecked(rho[k], theta[k], eos);
        }
        let st = self.stress(u, w, theta);
        let diss = self.dissipation(&st);
        let Stress { sxx, szz, sxz, .. } = &st;
        let (dux, dwz) = (&st.dux, &st.dwz);

        let mut out = Cons {
            rho: vec![0.0; ncell],
            en: vec![0.0; ncell],
            u: vec![0.0; ncell],
            w: vec![0.0; nx * (nz + 1)],
        };

        // Face fluxes of mass and energy.
        let mut fx_m = vec![0.0; ncell];
        let mut fx_e = vec![0.0; ncell];
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let km = j * nx + left(i);
                let vel = u[k];
                let th_f = 0.5 * (theta[k] + theta[km]);
                let kappa = transport_unchecked(th_f, eos).2;
                fx_m[k] = vel * 0.5 * (rho[k] + rho[km]);
                fx_e[k] = vel * 0.5 * (en[k] + en[km]) - kappa * (theta[k] - theta[km]) / dx;
            }
        }
        let mut fz_m = vec![0.0; nx * (nz + 1)];
        let mut fz_e = vec![0.0; nx * (nz + 1)];
        for i in 0..nx {
            let (tb, t0) = (self.wall_bottom[i], theta[i]);
            let kb = transport_unchecked(0.5 * (tb + t0), eos).2;
            fz_e[i] = -kb * (t0 - tb) / (0.5 * dz);
            let (tt, tn) = (self.wall_top[i], theta[(nz - 1) * nx + i]);
            let kt = transport_unchecked(0.5 * (tt + tn), eos).2;
            fz_e[nz * nx + i] = -kt * (tt - tn) / (0.5 * dz);
        }
        for j in 1..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let kb = (j - 1) * nx + i;
                let vel = w[k];
                let th_f = 0.5 * (theta[k] + theta[kb]);
                let kappa = transport_unchecked(th_f, eos).2;
                fz_m[k] = vel * 0.5 * (rho[k] + rho[kb]);
                fz_e[k] = vel * 0.5 * (en[k] + en[kb]) - kappa * (theta[k] - theta[kb]) / dz;
            }
        }

        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let kr = j * nx + right(i);
                let ka = (j + 1) * nx + i;
                out.rho[k] = -(fx_m[kr] - fx_m[k]) / dx - (fz_m[ka] - fz_m[k]) / dz;
                out.en[k] = -(fx_e[kr] - fx_e[k]) / dx - (fz_e[ka] - fz_e[k]) / dz + eps2 * diss[k] - p[k] * (dux[k] + dwz[k]);
            }
        }

        // Horizontal velocity on x-faces.
        for j in 0..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let (im, ip) = (left(i), right(i));
                let km = j * nx + im;
                let rho_f = 0.5 * (rho[k] + rho[km]);
                let below = if j == 0 { -u[k] } else { u[k - nx] };
                let above = if j + 1 == nz { -u[k] } else { u[k + nx] };
                let wbar = 0.25 * ((w[j * nx + im] + w[j * nx + i]) + (w[(j + 1) * nx + im] + w[(j + 1) * nx + i]));
                let adv = u[k] * (u[j * nx + ip] - u[km]) / (2.0 * dx) + wbar * (above - below) / (2.0 * dz);
                let pgrad = (p[k] - p[km]) / dx;
                let visc = (sxx[k] - sxx[km]) / dx + (sxz[(j + 1) * nx + i] - sxz[j * nx + i]) / dz;
                out.u[k] = -adv - pgrad / (eps2 * rho_f) + visc / rho_f + inv_eps * self.gx[k];
            }
        }

        // Vertical velocity on interior z-faces; wall rows stay zero.
        for j in 1..nz {
            for i in 0..nx {
                let k = j * nx + i;
                let (im, ip) = (left(i), right(i));
                let kb = k - nx;
                let rho_f = 0.5 * (rho[k] + rho[kb]);
                let ubar = 0.25 * ((u[kb] + u[(j - 1) * nx + ip]) + (u[k] + u[j * nx + ip]));
                let adv = ubar * (w[j * nx + ip] - w[j * nx + im]) / (2.0 * dx) + w[k] * (w[k + nx] - w[kb]) / (2.0 * dz);
                let pgrad = (p[k] - p[kb]) / dz;
                let visc = (sxz[j * nx + ip] - sxz[k]) / dx + (szz[k] - szz[kb]) / dz;
                out.w[k] = -adv - pgrad / (eps2 * rho_f) + visc / rho_f + inv_eps * self.gz[k];
            }
        }
        out
    }
}

/// Largest stable step for a state of the scenario.
pub fn stable_dt(state: &NsfState, scenario: &NsfScenario) -> Result<f64> {
    NsfStepper::new(scenario)?.stable_dt(state)
}

/// One explicit step of size `dt`.
pub fn step_nsf(state: &NsfState, scenario: &NsfScenario, dt: f64) -> Result<NsfState> {
    NsfStepper::new(scenario)?.step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::nsf::build_initial_nsf;
    use crate::ob::{velocity_from_streamfunction, ObScenario};
    use std::f64::consts::PI;

    #[test]
    fn uniform_state_is_exact_fixed_point() {
        let g = Grid::unit(8, 8).unwrap();
        let sc = NsfScenario::uniform(g, EosParams::with_closure(0.5, 0.2), 1.3, 0.9, 0.1);
        let st = build_initial_nsf(&sc).unwrap();
        let stepper = NsfStepper::new(&sc).unwrap();
        let dt = stepper.stable_dt(&st).unwrap();
        let mut s = st.clone();
        for _ in 0..10 {
            s = stepper.step(&s, dt).unwrap();
        }
        assert_eq!(s.rho, st.rho);
        assert_eq!(s.u, st.u);
        for (a, b) in s.theta.values().iter().zip(st.theta.values()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn cfl_violation_suggests_a_step() {
        let g = Grid::unit(8, 8).unwrap();
        let sc = NsfScenario::uniform(g, EosParams::ideal(), 1.0, 1.0, 0.1);
        let st = build_initial_nsf(&sc).unwrap();
        let stepper = NsfStepper::new(&sc).unwrap();
        match stepper.step(&st, 1.0) {
            Err(BllError::CflViolation { suggested, .. }) => {
                assert!(suggested > 0.0 && suggested < 1.0);
                assert!(stepper.step(&st, suggested).is_ok());
            }
            other => panic!("expected a CFL violation, got {other:?}"),
        }
    }

    #[test]
    fn mass_is_conserved_and_mirror_is_exact() {
        let g = Grid::new(16, 8, 2.0).unwrap();
        let t0 = ScalarField::from_fn(g, Staggering::Center, |x, z| 0.5 - z + 0.1 * (PI * x).sin() * (1.0 - z) + 0.3 * (PI * x).cos() * (PI * z).sin() + 0.1 * (PI * x).sin() * (2.0 * PI * z).sin());
        let u0 = velocity_from_streamfunction(g, |x, z| 0.2 * (PI * x + 0.3).sin() * (PI * z).sin().powi(2));
        let ob = ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
            .with_gravity(1.0)
            .with_walls(crate::grid::WallValues::from_fn(&g, |x| (0.5 + 0.1 * (PI * x).sin(), -0.5)))
            .with_initial(t0, u0);
        let sc = NsfScenario::well_prepared(&ob, 0.1, 0.4).unwrap();
        let st = build_initial_nsf(&sc).unwrap();

        let mut msc = sc.clone();
        msc.potential = sc.potential.mirrored_x();
        msc.theta_b = crate::grid::WallValues {
            bottom: sc.theta_b.bottom.iter().rev().copied().collect(),
            top: sc.theta_b.top.iter().rev().copied().collect(),
        };
        let stepper = NsfStepper::new(&sc).unwrap();
        let mstepper = NsfStepper::new(&msc).unwrap();
        let dt = stepper.stable_dt(&st).unwrap();
        let (mut a, mut b) = (st.clone(), st.mirrored_x());
        let m0 = a.total_mass();
        for _ in 0..50 {
            a = stepper.step(&a, dt).unwrap();
            b = mstepper.step(&b, dt).unwrap();
        }
        assert!(((a.total_mass() - m0) / m0).abs() < 1e-14);
        assert_eq!(a.mirrored_x(), b);
    }
}
