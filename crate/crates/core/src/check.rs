//! Self-check: the invariant suites of every module at small fixed sizes,
//! run by `active-doi check`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::LedgerRow;
use crate::driver::Simulation;
use crate::field::{ConfigurationField, FaceField, ScalarField};
use crate::flow::{assemble_flow, skew_convection, solve_flow, FlowTolerances};
use crate::grid::{BcMode, DomainGrid, OrientationGrid};
use crate::init::{
    initial_density, initialize_config, initialize_velocity, DensityPreset, InitialData,
};
use crate::mollifier::MollifierKernel;
use crate::ops::{curl_of_stream, dirichlet_energy, divergence_residual};
use crate::params::{Params, Problem};
use crate::potential::{build_potential, grad_g_potential};
use crate::regularization::{entropy, Cutoff};
use crate::smoluchowski::{assemble_config, solve_config};
use crate::sphere::{laplace_beltrami, sphere_integrate, surface_divergence, surface_gradient, SpectralCircle};

/// Deliberate defects used to confirm that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaultInjection {
    /// Multiplies every mollifier weight (1 is no fault).
    pub kernel_scale: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Only suites whose name contains this substring.
    pub filter: Option<String>,
    pub fault: FaultInjection,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type SuiteResult = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail(e: crate::error::Error) -> String {
    e.to_string()
}

/// Random trigonometric polynomial of degree `< deg` sampled on the circle.
fn trig_poly(rng: &mut ChaCha8Rng, orient: &OrientationGrid, deg: usize) -> Vec<f64> {
    let coef: Vec<(f64, f64)> = (0..deg)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    (0..orient.len())
        .map(|k| {
            let phi = orient.angle(k);
            coef.iter()
                .enumerate()
                .map(|(n, (a, b))| a * (n as f64 * phi).cos() + b * (n as f64 * phi).sin())
                .sum()
        })
        .collect()
}

fn sphere_suite(_: FaultInjection) -> SuiteResult {
    let orient = OrientationGrid::new(16).map_err(fail)?;
    let circle = SpectralCircle::new(&orient);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = trig_poly(&mut rng, &orient, 4);
        let g = trig_poly(&mut rng, &orient, 4);
        let a = trig_poly(&mut rng, &orient, 4);
        let v: Vec<[f64; 2]> = (0..orient.len())
            .map(|k| {
                let t = orient.t(k);
                [a[k] * t[0], a[k] * t[1]]
            })
            .collect();
        let div = surface_divergence(&orient, &circle, &v).map_err(fail)?;
        let gf = surface_gradient(&orient, &circle, &f);
        let lhs: Vec<f64> = div.iter().zip(&f).map(|(d, f)| d * f).collect();
        let rhs: Vec<f64> = v.iter().zip(&gf).map(|(v, g)| -(v[0] * g[0] + v[1] * g[1])).collect();
        worst = worst.max((sphere_integrate(&orient, &lhs) - sphere_integrate(&orient, &rhs)).abs());

        let lf = laplace_beltrami(&circle, &f);
        let gg = surface_gradient(&orient, &circle, &g);
        let lhs: Vec<f64> = lf.iter().zip(&g).map(|(l, g)| l * g).collect();
        let rhs: Vec<f64> = gf.iter().zip(&gg).map(|(a, b)| -(a[0] * b[0] + a[1] * b[1])).collect();
        worst = worst.max((sphere_integrate(&orient, &lhs) - sphere_integrate(&orient, &rhs)).abs());

        // traceless A: ∫ (t·A m) ∂_φ f = ∫ f (2 m⊗m − I) : A
        let (p, q, r): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let am = |m: [f64; 2]| [p * m[0] + q * m[1], r * m[0] - p * m[1]];
        let df = circle.derivative(&f);
        let (mut l, mut rr) = (0.0, 0.0);
        for k in 0..orient.len() {
            let (m, t) = (orient.m(k), orient.t(k));
            let v = am(m);
            l += (t[0] * v[0] + t[1] * v[1]) * df[k];
            let mam = m[0] * v[0] + m[1] * v[1];
            rr += f[k] * (2.0 * mam);
        }
        worst = worst.max((l - rr).abs() * orient.weight());
    }
    ensure(worst <= 1e-12, || format!("integration-by-parts defect {worst:.3e}"))?;
    let c = vec![1.0; orient.len()];
    let lc = laplace_beltrami(&circle, &c);
    ensure(lc.iter().all(|v| v.abs() < 1e-12), || "Laplace-Beltrami of a constant is nonzero".into())?;
    Ok(format!("max defect {worst:.1e}"))
}

fn regularization_suite(_: FaultInjection) -> SuiteResult {
    let mut checked = 0;
    for level in [2.0, 10.0, 100.0] {
        let cut = Cutoff::new(level).map_err(fail)?;
        for k in 1..=2000 {
            let s = 3.0 * level * k as f64 / 2000.0;
            let fl = cut.entropy(s).map_err(fail)?;
            let f = entropy(s).map_err(fail)?;
            ensure(fl >= f, || format!("F^L({s}) < F({s}) at L = {level}"))?;
            let d2 = cut.entropy_d2(s).map_err(fail)?;
            ensure((d2 - 1.0 / cut.q(s)).abs() <= 1e-12 * d2, || format!("(F^L)'' mismatch at s = {s}"))?;
            ensure(d2 >= 1.0 / level && d2 * s >= 1.0 - 1e-15, || format!("(F^L)'' too small at s = {s}"))?;
            for delta in [0.5, 0.1, 0.01] {
                let lhs = cut.entropy(cut.q(s) + delta).map_err(fail)?;
                let rhs = delta + 0.5 * delta * delta + entropy(s + delta).map_err(fail)?;
                ensure(lhs <= rhs, || format!("F^L(Q^L(s)+δ) bound fails at s = {s}, δ = {delta}"))?;
                ensure(1.0 / (s + delta) <= 1.0 / delta, || "F'' bound".into())?;
            }
            let signed = s - 1.5 * level;
            ensure(
                cut.q0(signed).abs() <= cut.q(signed).abs() && cut.q(signed).abs() <= signed.abs(),
                || format!("|Q0| <= |Q| <= |s| fails at {signed}"),
            )?;
            checked += 1;
        }
        let below = cut.entropy_d1(level * (1.0 - 1e-12)).map_err(fail)?;
        let above = cut.entropy_d1(level * (1.0 + 1e-12)).map_err(fail)?;
        ensure((below - above).abs() < 1e-9, || format!("(F^L)' jumps at L = {level}"))?;
    }
    Ok(format!("{checked} samples"))
}

fn mollifier_suite(fault: FaultInjection) -> SuiteResult {
    let mut worst_mass: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
        let grid = DomainGrid::unit(16, bc).map_err(fail)?;
        let mut kernel = MollifierKernel::new(&grid, 0.2).map_err(fail)?;
        if let Some(s) = fault.kernel_scale {
            kernel = kernel.rescaled(s);
        }
        worst_mass = worst_mass.max((kernel.discrete_mass(&grid) - 1.0).abs());
        for _ in 0..10 {
            let f = ScalarField::from_fn(&grid, |_, _| rng.random_range(-1.0..1.0));
            let g = ScalarField::from_fn(&grid, |_, _| rng.random_range(-1.0..1.0));
            let jf = kernel.mollify_scalar(&grid, &f);
            let jg = kernel.mollify_scalar(&grid, &g);
            let adj = (jf.dot(&g, &grid) - f.dot(&jg, &grid)).abs();
            ensure(adj <= 1e-12, || format!("adjointness defect {adj:.3e}"))?;
            ensure(jf.norm_l2(&grid) <= f.norm_l2(&grid) * (1.0 + 1e-12), || {
                format!("L2 stability fails: {} > {}", jf.norm_l2(&grid), f.norm_l2(&grid))
            })?;
        }
        let one = ScalarField::constant(&grid, 1.0);
        let j1 = kernel.mollify_scalar(&grid, &one);
        ensure(j1.max_abs() <= 1.0 + 1e-12, || format!("J[1] reaches {}", j1.max_abs()))?;
        ensure(kernel.weight(1, 2) == kernel.weight(-1, -2) && kernel.weight(1, 2) == kernel.weight(2, 1), || "kernel is not symmetric".into())?;
    }
    ensure(worst_mass <= 1e-12, || format!("kernel mass off by {worst_mass:.3e}"))?;
    Ok(format!("mass defect {worst_mass:.1e}"))
}

fn potential_suite(fault: FaultInjection) -> SuiteResult {
    let grid = DomainGrid::unit(8, BcMode::NoSlipNoFlux).map_err(fail)?;
    let orient = OrientationGrid::new(16).map_err(fail)?;
    let circle = SpectralCircle::new(&orient);
    let mut kernel = MollifierKernel::new(&grid, 0.25).map_err(fail)?;
    if let Some(s) = fault.kernel_scale {
        kernel = kernel.rescaled(s);
    }
    let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.4, seed: 3, ..InitialData::default() };
    let psi = initial_density(&grid, &orient, &init).map_err(fail)?;
    let u0 = 2.0;
    let pot = build_potential(&kernel, &grid, &orient, &psi, u0);
    let values = pot.values(&orient);
    let grads = grad_g_potential(&pot, &orient);
    let m = orient.len();
    let mut worst: f64 = 0.0;
    for c in 0..grid.cells() {
        let d = circle.derivative(&values[c * m..(c + 1) * m]);
        for k in 0..m {
            let t = orient.t(k);
            let g = grads[c * m + k];
            worst = worst.max((g[0] * t[0] + g[1] * t[1] - d[k]).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("surface gradient defect {worst:.3e}"))?;
    let l1 = psi.norm_l1(&grid, &orient);
    let bound = 2.0 * u0 * kernel.max_weight() * l1;
    let umax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    ensure(umax <= bound, || format!("|U| = {umax} exceeds {bound}"))?;
    Ok(format!("surface gradient defect {worst:.1e}"))
}

fn check_problem(bc: BcMode, params: Params) -> std::result::Result<Problem, String> {
    Problem::new(params, DomainGrid::unit(8, bc).map_err(fail)?, 8).map_err(fail)
}

fn flow_suite(_: FaultInjection) -> SuiteResult {
    let params = Params { epsilon: 0.25, alpha: 1.5, potential_strength: 1.0, ..Params::default() };
    let pr = check_problem(BcMode::NoSlipNoFlux, params)?;
    let g = &pr.grid;
    let v = curl_of_stream(g, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
    let c = skew_convection(g, &v);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w: Vec<f64> = (0..g.face_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let skew = c.quadratic_form(&w).abs();
    ensure(skew <= 1e-12, || format!("convection is not skew: {skew:.3e}"))?;
    let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 2, ..InitialData::default() };
    let psi = initial_density(g, &pr.orient, &init).map_err(fail)?;
    let pot = build_potential(&pr.kernel, g, &pr.orient, &psi, pr.params.potential_strength);
    let sys = assemble_flow(&pr, &psi, &v, &pot).map_err(fail)?;
    let tol = FlowTolerances { linear: 1e-10, div: 1e-10 };
    let st = solve_flow(g, &sys, tol, None).map_err(fail)?;
    ensure(st.div_residual <= 1e-10, || format!("divergence {:.3e}", st.div_residual))?;
    ensure(st.u.max_abs() > 0.0, || "active stress produced no flow".into())?;
    let a_form = sys.matrix.quadratic_form(&st.u.data);
    ensure(a_form > 0.0, || "velocity block is not positive".into())?;
    Ok(format!("div {:.1e}, {} outer iterations", st.div_residual, st.outer_iterations))
}

fn smoluchowski_suite(_: FaultInjection) -> SuiteResult {
    let params = Params { epsilon: 0.25, potential_strength: 2.0, ..Params::default() };
    let pr = check_problem(BcMode::NoSlipNoFlux, params)?;
    let g = &pr.grid;
    let u = curl_of_stream(g, |x, y| 0.3 * (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
    let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 4, ..InitialData::default() };
    let psi = initial_density(g, &pr.orient, &init).map_err(fail)?;
    let pot = build_potential(&pr.kernel, g, &pr.orient, &psi, pr.params.potential_strength);
    let sys = assemble_config(&pr, &u, &psi, &psi, &pot).map_err(fail)?;
    ensure(sys.certificate <= 1e-12 * pr.node_weight().max(1.0), || {
        format!("column sums deviate by {:.3e}", sys.certificate)
    })?;
    let out = solve_config(&pr, &sys, &psi).map_err(fail)?;
    let rel = out.mass_drift / sys.prev_mass;
    ensure(rel <= 1e-10, || format!("relative mass drift {rel:.3e}"))?;
    Ok(format!("column-sum defect {:.1e}, mass drift {rel:.1e}", sys.certificate))
}

fn initialization_suite(_: FaultInjection) -> SuiteResult {
    let grid = DomainGrid::unit(8, BcMode::NoSlipNoFlux).map_err(fail)?;
    let orient = OrientationGrid::new(8).map_err(fail)?;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let tol = FlowTolerances { linear: 1e-10, div: 1e-10 };
    let mut worst: f64 = f64::NEG_INFINITY;
    for trial in 0..5 {
        let cut = Cutoff::new([2.0, 10.0, 100.0][trial % 3]).map_err(fail)?;
        let (a, b, kx, ky): (f64, f64, f64, f64) =
            (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(1.0..3.0), rng.random_range(1.0..3.0));
        let u0 = curl_of_stream(&grid, |x, y| {
            (PI * x).sin().powi(2) * (PI * y).sin().powi(2) * (a * (kx * x).cos() + b * (ky * y).sin())
        });
        let st = initialize_velocity(&grid, &u0, &cut, tol).map_err(fail)?;
        let lhs = st.u.dot(&st.u, &grid) + dirichlet_energy(&grid, &st.u) / cut.level();
        worst = worst.max(lhs - u0.dot(&u0, &grid));
        let psi0 = ConfigurationField::from_fn(&grid, &orient, |_, _, _| rng.random_range(0.0..3.0 * cut.level()));
        let psi = initialize_config(&psi0, &cut).map_err(fail)?;
        ensure(psi.mass(&grid, &orient) <= psi0.mass(&grid, &orient), || "cut-off increased the mass".into())?;
        ensure(psi.data.iter().all(|v| *v <= cut.level()), || "cut-off exceeded L".into())?;
    }
    ensure(worst <= 1e-10, || format!("velocity energy bound exceeded by {worst:.3e}"))?;
    Ok(format!("energy bound margin {:.1e}", -worst))
}

fn driver_suite(_: FaultInjection) -> SuiteResult {
    let params = Params { epsilon: 0.25, alpha: 3.0, potential_strength: 2.0, t_final: 0.01, ..Params::default() };
    let pr = check_problem(BcMode::Periodic, params)?;
    let psi = ConfigurationField::constant(&pr.grid, &pr.orient, 0.4);
    let mut sim = Simulation::new(pr.clone(), &psi, &FaceField::zeros(&pr.grid)).map_err(fail)?;
    sim.run(2, |_, _| Ok(())).map_err(fail)?;
    ensure(sim.state.flow.u.max_abs() <= 1e-10, || "equilibrium developed a flow".into())?;
    let dev = sim.state.psi.data.iter().fold(0.0f64, |a, v| a.max((v - 0.4).abs()));
    ensure(dev <= 1e-10, || format!("equilibrium drifted by {dev:.3e}"))?;

    let params = Params { epsilon: 0.25, t_final: 0.025, ..Params::default() };
    let pr = check_problem(BcMode::NoSlipNoFlux, params)?;
    let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 8, ..InitialData::default() };
    let psi0 = initial_density(&pr.grid, &pr.orient, &init).map_err(fail)?;
    let u0 = curl_of_stream(&pr.grid, |x, y| 0.2 * (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
    let mut sim = Simulation::new(pr.clone(), &psi0, &u0).map_err(fail)?;
    sim.run(5, |_, _| Ok(())).map_err(fail)?;
    let rise = sim
        .ledger
        .windows(2)
        .map(|w| w[1].total_energy - w[0].total_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    ensure(rise <= 0.0, || format!("source-free energy rose by {rise:.3e}"))?;
    let neg = sim.ledger.iter().map(LedgerRow::dissipation).fold(f64::INFINITY, f64::min);
    ensure(neg >= -1e-13, || format!("negative dissipation {neg:.3e}"))?;
    Ok(format!("largest energy change {rise:.1e}"))
}

fn divergence_suite(_: FaultInjection) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
        let g = DomainGrid::new(12, 10, 1.2, 1.0, bc).map_err(fail)?;
        let u = curl_of_stream(&g, |x, y| (x * 3.0).sin() * (PI * y / 1.0).sin().powi(2) * (PI * x / 1.2).sin().powi(2));
        worst = worst.max(divergence_residual(&g, &u));
    }
    ensure(worst <= 1e-12, || format!("discrete curl has divergence {worst:.3e}"))?;
    Ok(format!("max divergence {worst:.1e}"))
}

const SUITES: &[(&str, fn(FaultInjection) -> SuiteResult)] = &[
    ("sphere", sphere_suite),
    ("regularization", regularization_suite),
    ("mollifier", mollifier_suite),
    ("potential", potential_suite),
    ("grid", divergence_suite),
    ("flow", flow_suite),
    ("smoluchowski", smoluchowski_suite),
    ("initialization", initialization_suite),
    ("driver", driver_suite),
];

/// Names of every suite, in execution order.
pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs the selected suites sequentially.
pub fn run_checks(opts: &CheckOptions) -> Vec<SuiteOutcome> {
    SUITES
        .iter()
        .filter(|(name, _)| opts.filter.as_deref().is_none_or(|f| name.contains(f)))
        .map(|(name, suite)| {
            let start = Instant::now();
            let result = suite(opts.fault);
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SuiteOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Fixed-width pass/fail table.
pub fn format_table(outcomes: &[SuiteOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&format!(
            "{:<16} {:<4} {:>7.2}s  {}\n",
            o.name,
            if o.passed { "ok" } else { "FAIL" },
            o.seconds,
            o.detail
        ));
    }
    out
}
