//! Exit gate for the solver suite. Every check runs at its pinned tolerance
//! and prints one PASS/FAIL line; the process exits non-zero if any fails.
//!
//! `cargo test --test acceptance` runs all ten; `cargo test --test acceptance
//! -- 4 7` runs a subset by number.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bll_core::diagnostics::{
    compare_modified_vs_naive, coercivity_check, ess_res_decompose, relative_energy, sweep, EssentialSet, Reference,
    SweepOptions,
};
use bll_core::grid::{Grid, ScalarField, Staggering, VectorField, WallValues};
use bll_core::nsf::{hydrostatic_stationary_1d, NsfScenario, NsfState, NsfStepper};
use bll_core::ob::{gravity_potential, run_ob, velocity_from_streamfunction, Frame, ObScenario};
use bll_core::thermo::{
    check_limit_identities, gibbs_residual, maxwell_residual, ob_coefficients, EosParams, ThermoPoint,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn log_grid() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0)).collect()
}

fn corners() -> Vec<EosParams> {
    let mut v = Vec::new();
    for p_inf in [0.0, 1.0] {
        for a in [0.0, 1.0] {
            v.push(EosParams::with_closure(p_inf, a));
        }
    }
    v
}

fn thermodynamic_identities() -> Outcome {
    let (mut gibbs, mut maxwell) = (0.0f64, 0.0f64);
    for eos in corners() {
        for &rho in &log_grid() {
            for &theta in &log_grid() {
                let pt = ThermoPoint::new(rho, theta).unwrap();
                gibbs = gibbs.max(gibbs_residual(pt, &eos).unwrap());
                maxwell = maxwell.max(maxwell_residual(pt, &eos).unwrap());
            }
        }
    }
    Outcome {
        pass: gibbs <= 1e-6 && maxwell <= 1e-10,
        detail: format!("max Gibbs {gibbs:.2e} <= 1e-6, max Maxwell {maxwell:.2e} <= 1e-10"),
    }
}

fn limit_identities() -> Outcome {
    let mut worst = 0.0f64;
    for eos in corners() {
        for &rho in &log_grid() {
            for &theta in &log_grid() {
                worst = worst.max(check_limit_identities(rho, theta, &eos).unwrap().max_abs());
            }
        }
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max residual {worst:.2e} <= 1e-10") }
}

fn ideal_gas_coefficients() -> Outcome {
    let eos = EosParams::ideal();
    let (mut ea, mut ec, mut el) = (0.0f64, 0.0f64, 0.0f64);
    for &rho in &log_grid() {
        for &theta in &log_grid() {
            let c = ob_coefficients(rho, theta, &eos).unwrap();
            ea = ea.max((c.alpha * theta - 1.0).abs());
            ec = ec.max((c.c_p - 2.5).abs() / 2.5);
            el = el.max((c.lambda - 0.4).abs() / 0.4);
        }
    }
    Outcome {
        pass: ea <= 1e-14 && ec <= 1e-14 && el <= 1e-14,
        detail: format!("relative errors alpha {ea:.1e}, c_p {ec:.1e}, lambda {el:.1e} <= 1e-14"),
    }
}

fn nonlocal_steady_state() -> Outcome {
    let g = Grid::new(32, 16, 2.0).unwrap();
    let c = 0.7;
    let mut worst = 0.0f64;
    for lambda in [0.1, 0.4, 0.9] {
        let t0 = ScalarField::from_fn(g, Staggering::Center, |x, z| {
            c + 0.5 * (PI * z).sin() * (1.0 + 0.3 * (PI * x).cos())
        });
        let sc = ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
            .with_walls(WallValues::constant(32, c, c))
            .with_initial(t0, VectorField::zeros(g))
            .with_lambda(lambda)
            .with_time(20.0, 4000.0, 4000.0);
        let run = run_ob(&sc, Frame::Theta).unwrap();
        let theta = &run.final_snapshot().t_field;
        let theta = theta.map(|v| v - lambda * theta.mean());
        let err = theta.map(|v| v - (1.0 - lambda) * c).max_abs();
        worst = worst.max(err);
    }
    Outcome { pass: worst <= 1e-8, detail: format!("max |Theta - (1 - lambda) c| = {worst:.2e} <= 1e-8") }
}

fn rb_scenario(nx: usize, nz: usize, dt: f64) -> ObScenario {
    let g = Grid::new(nx, nz, 2.0).unwrap();
    let t0 = ScalarField::from_fn(g, Staggering::Center, |x, z| 0.5 - z + 0.1 * (PI * x).cos() * (PI * z).sin());
    let u0 = velocity_from_streamfunction(g, |x, z| 0.05 * (PI * x).sin() * (PI * z).sin().powi(2));
    ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
        .with_gravity(1.0)
        .with_walls(WallValues::constant(nx, 0.5, -0.5))
        .with_initial(t0, u0)
        .with_time(dt, 1.0, 0.25)
}

fn frame_equivalence() -> Outcome {
    // Each level halves h and quarters dt, i.e. two halvings of (dt, h²).
    let levels = [(32usize, 16usize, 4e-3), (64, 32, 1e-3), (128, 64, 2.5e-4)];
    let mut gaps = Vec::new();
    let mut bound_ok = true;
    for &(nx, nz, dt) in &levels {
        let sc = rb_scenario(nx, nz, dt);
        let a = run_ob(&sc, Frame::T).unwrap();
        let b = run_ob(&sc, Frame::Theta).unwrap();
        let mut gap = 0.0f64;
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            let d = x.t_field.zip_map(&y.t_field, |p, q| p - q).unwrap().max_abs();
            let du = {
                let mut v = x.u.clone();
                v.axpy(-1.0, &y.u).unwrap();
                v.max_abs()
            };
            gap = gap.max(d).max(du);
        }
        let h = 1.0 / nz as f64;
        // C = 1 bounds the gap by the truncation scale of the scheme.
        bound_ok &= gap <= dt + h * h;
        gaps.push(gap);
    }
    let per_halving: Vec<f64> = gaps.windows(2).map(|p| (p[0] / p[1]).sqrt()).collect();
    let reduces = per_halving.iter().all(|&r| r >= 1.8);
    Outcome {
        pass: bound_ok && reduces,
        detail: format!(
            "gaps {:?}, bound with C = 1 {}, reduction per halving {:?} (need >= 1.8)",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>(),
            if bound_ok { "holds" } else { "fails" },
            per_halving.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        ),
    }
}

/// Pure conduction with unequal wall temperatures: the mean relaxes, so the
/// balance between its rate and the wall flux is exercised.
fn heating_ramp(nx: usize, nz: usize, dt: f64) -> ObScenario {
    let g = Grid::new(nx, nz, 1.0).unwrap();
    let mut eos = EosParams::ideal();
    eos.kappa0 = 0.125;
    let t0 = ScalarField::from_fn(g, Staggering::Center, |_, z| 1.0 - 0.5 * z - (PI * z).sin());
    ObScenario::new(g, eos, 1.0, 1.0)
        .with_walls(WallValues::constant(nx, 1.0, 0.5))
        .with_initial(t0, VectorField::zeros(g))
        .with_time(dt, 0.3, 0.1)
}

fn s24_residual(nx: usize, nz: usize, dt: f64) -> f64 {
    let run = run_ob(&heating_ramp(nx, nz, dt), Frame::T).unwrap();
    run.lambda_trace.max_residual_in(0.1, 0.3)
}

fn order(a: f64, b: f64, ratio: f64) -> f64 {
    (a / b).ln() / ratio.ln()
}

fn s24_identity() -> Outcome {
    let in_dt: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&dt| s24_residual(4, 4096, dt)).collect();
    let in_h: Vec<f64> = [16, 32, 64, 128].iter().map(|&nz| s24_residual(4, nz, 2e-5)).collect();
    let odt: Vec<f64> = in_dt.windows(2).map(|p| order(p[0], p[1], 2.0)).collect();
    let oh: Vec<f64> = in_h.windows(2).map(|p| order(p[0], p[1], 2.0)).collect();
    let pass = odt.iter().all(|&o| o >= 1.0) && oh.iter().all(|&o| o >= 1.8);
    let fmt = |v: &[f64], p: usize| v.iter().map(|x| format!("{x:.*e}", p)).collect::<Vec<_>>().join(" ");
    Outcome {
        pass,
        detail: format!(
            "dt orders {} (>= 1), h orders {} (>= 1.8); residuals dt [{}] h [{}]",
            odt.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(" "),
            oh.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(" "),
            fmt(&in_dt, 2),
            fmt(&in_h, 2)
        ),
    }
}

fn hydrostatic_drift(nx: usize, nz: usize) -> (f64, f64) {
    let grid = Grid::new(nx, nz, 2.0).unwrap();
    let mut sc = NsfScenario::uniform(grid, EosParams::ideal(), 1.0, 1.0, 0.1);
    sc.potential = gravity_potential(grid, 1.0);
    sc.theta_b = WallValues::constant(nx, 0.5, -0.5);
    let start: NsfState = hydrostatic_stationary_1d(&sc).unwrap().state(&sc).unwrap();
    let stepper = NsfStepper::new(&sc).unwrap();
    let n = (1.0 / stepper.stable_dt(&start).unwrap()).ceil() as usize;
    let dt = 1.0 / n as f64;
    let m0 = start.total_mass();
    let (mut s, mut mass) = (start.clone(), 0.0f64);
    for _ in 0..n {
        s = stepper.step(&s, dt).unwrap();
        mass = mass.max(((s.total_mass() - m0) / m0).abs());
    }
    let drift = s.rho.zip_map(&start.rho, |a, b| a - b).unwrap().max_abs();
    (drift, mass)
}

fn conservation_and_balance() -> Outcome {
    let (coarse, _) = hydrostatic_drift(32, 16);
    let (fine, mass) = hydrostatic_drift(64, 32);
    let o = order(coarse, fine, 2.0);
    Outcome {
        pass: mass <= 1e-12 && o >= 1.8,
        detail: format!(
            "mass drift {mass:.2e} <= 1e-12; hydrostatic drift {coarse:.2e} (32x16) -> {fine:.2e} (64x32), order {o:.2} >= 1.8"
        ),
    }
}

fn rb_sweep_scenario() -> ObScenario {
    let g = Grid::new(64, 32, 2.0).unwrap();
    let t0 = ScalarField::from_fn(g, Staggering::Center, |x, z| 0.5 - z + 0.2 * (PI * x).cos() * (PI * z).sin());
    ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
        .with_gravity(1.0)
        .with_walls(WallValues::constant(64, 0.5, -0.5))
        .with_initial(t0, VectorField::zeros(g))
        .with_time(1e-3, 0.25, 0.05)
}

fn asymmetric_scenario() -> ObScenario {
    let g = Grid::new(64, 32, 2.0).unwrap();
    let t0 = ScalarField::from_fn(g, Staggering::Center, |x, z| {
        1.0 - 2.0 * (PI * z).sin() + 0.2 * (PI * x).cos() * (PI * z).sin()
    });
    ObScenario::new(g, EosParams::ideal(), 1.0, 1.0)
        .with_gravity(1.0)
        .with_walls(WallValues::constant(64, 1.0, 1.0))
        .with_initial(t0, VectorField::zeros(g))
        .with_time(1e-3, 0.25, 0.05)
}

fn singular_limit_sweep() -> Outcome {
    let rep = sweep(&rb_sweep_scenario(), &[0.2, 0.1, 0.05], Frame::T, &SweepOptions::default()).unwrap();
    let rows: Vec<String> = rep
        .modified
        .rows
        .iter()
        .map(|r| format!("eps {}: {:.2e} {:.2e} {:.2e}", r.eps, r.err_rho, r.err_theta, r.err_mom))
        .collect();
    Outcome { pass: rep.modified.is_monotone(), detail: format!("strictly decreasing norms; {}", rows.join("; ")) }
}

fn unexpected_term() -> Outcome {
    let opts = SweepOptions::default();
    let asym = compare_modified_vs_naive(&asymmetric_scenario(), 0.05, Frame::T, &opts).unwrap();
    let sym = compare_modified_vs_naive(&rb_sweep_scenario(), 0.05, Frame::T, &opts).unwrap();
    let pass = asym.ratio > 1.0 && (sym.ratio - 1.0).abs() <= 0.05 && sym.warning().is_some();
    Outcome {
        pass,
        detail: format!(
            "asymmetric ratio {:.3} > 1; symmetric ratio {:.3} within 1 +- 0.05, warning {}",
            asym.ratio,
            sym.ratio,
            if sym.warning().is_some() { "issued" } else { "missing" }
        ),
    }
}

fn random_state(rng: &mut StdRng, grid: Grid, eps: f64, centre: (f64, f64)) -> NsfState {
    let n = grid.nx * grid.nz;
    let positive = |rng: &mut StdRng, wide: bool, c: f64| -> f64 {
        if wide {
            c * 10f64.powf(rng.gen_range(-1.3..0.7))
        } else {
            c * (1.0 + eps * rng.gen_range(-0.5..0.5))
        }
    };
    let mut rho = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for _ in 0..n {
        let wide = rng.gen_bool(0.3);
        rho.push(positive(rng, wide, centre.0));
        theta.push(positive(rng, wide, centre.1));
    }
    let a = rng.gen_range(-1.0..1.0);
    let k = rng.gen_range(1..4) as f64;
    let u = velocity_from_streamfunction(grid, |x, z| a * (k * PI * x).sin() * (PI * z).sin().powi(2));
    NsfState {
        rho: ScalarField::from_vec(grid, Staggering::Center, rho).unwrap(),
        theta: ScalarField::from_vec(grid, Staggering::Center, theta).unwrap(),
        u,
        t: 0.0,
        eps,
    }
}

fn bregman_coercivity() -> Outcome {
    let grid = Grid::unit(4, 4).unwrap();
    let eos = EosParams::ideal();
    // Off the unit state so that the reference entropy is not zero.
    let (rt, tt) = (1.3, 0.8);
    let reference = Reference::constant(grid, rt, tt);
    let set = EssentialSet::around(rt, tt).unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut negative, mut flat, mut partition, mut coercive) = (0usize, 0usize, 0usize, 0usize);
    let mut c_min = f64::INFINITY;

    // The reference itself has zero relative energy.
    let equal = NsfState {
        rho: reference.rho.clone(),
        theta: reference.theta.clone(),
        u: VectorField::zeros(grid),
        t: 0.0,
        eps: 0.1,
    };
    let at_rest = relative_energy(&equal, &reference, &eos).unwrap().integral;

    for _ in 0..1000 {
        let eps = rng.gen_range(0.02..0.5);
        let s = random_state(&mut rng, grid, eps, (rt, tt));
        let rel = relative_energy(&s, &reference, &eos).unwrap();
        for (k, &e) in rel.density.values().iter().enumerate() {
            let differs = s.rho.values()[k] != rt || s.theta.values()[k] != tt;
            if e < 0.0 {
                negative += 1;
            } else if differs && e == 0.0 {
                flat += 1;
            }
        }
        let dec = ess_res_decompose(&s, &set);
        let cover = dec.essential.zip_map(&dec.residual, |a, b| a + b).unwrap();
        let disjoint = dec.essential.zip_map(&dec.residual, |a, b| a * b).unwrap();
        if cover.values().iter().any(|&v| v != 1.0)
            || disjoint.values().iter().any(|&v| v != 0.0)
            || (dec.essential_measure + dec.residual_measure - grid.area()).abs() > 1e-12
        {
            partition += 1;
        }
        let report = coercivity_check(&s, &reference, &set, &eos).unwrap();
        if !report.holds() {
            coercive += 1;
        }
        if let Some(c) = report.c_fit() {
            c_min = c_min.min(c);
        }
    }
    Outcome {
        pass: at_rest == 0.0 && negative == 0 && flat == 0 && partition == 0 && coercive == 0,
        detail: format!(
            "1000 states: E(ref) = {at_rest:e}, negative cells {negative}, zero at distinct states {flat}, partition failures {partition}, coercivity failures {coercive}, smallest C {c_min:.3e}"
        ),
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "thermodynamic identities", Duration::from_secs(1), thermodynamic_identities),
        (2, "limit identities", Duration::from_secs(1), limit_identities),
        (3, "ideal-gas coefficients", Duration::from_secs(1), ideal_gas_coefficients),
        (4, "non-local steady state", Duration::from_secs(30), nonlocal_steady_state),
        (5, "frame equivalence", Duration::from_secs(300), frame_equivalence),
        (6, "mean heat balance", Duration::from_secs(300), s24_identity),
        (7, "mass conservation and well-balancing", Duration::from_secs(600), conservation_and_balance),
        (8, "singular-limit sweep", Duration::from_secs(3600), singular_limit_sweep),
        (9, "unexpected-term experiment", Duration::from_secs(3600), unexpected_term),
        (10, "relative energy properties", Duration::from_secs(60), bregman_coercivity),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, budget, check) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let started = Instant::now();
        let outcome = check();
        let took = started.elapsed();
        let pass = outcome.pass && took <= budget;
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
