//! The perturbed-nematic benchmark with extensile activity: order parameter,
//! kinetic energy and fixed-point iterations over time.
//!
//! `cargo run --release --example active_nematic -- [n] [steps]`

use active_doi::config::RunConfig;
use active_doi::diagnostics::order_parameters;
use active_doi::driver::Simulation;
use active_doi::init::{initial_density, initial_velocity};
use active_doi::sphere::moments;

fn main() -> active_doi::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(16, |s| s.parse().expect("grid size"));
    let steps: usize = args.next().map_or(20, |s| s.parse().expect("step count"));
    let mut cfg = RunConfig::benchmark(n, 16, 1e-2, steps);
    cfg.model.alpha = -4.0;
    let pr = cfg.problem()?;
    let init = cfg.initial_data();
    let psi0 = initial_density(&pr.grid, &pr.orient, &init)?;
    let mut sim = Simulation::new(pr.clone(), &psi0, &initial_velocity(&pr.grid, &init))?;
    println!("{:>5} {:>8} {:>12} {:>10} {:>7}", "step", "t", "kinetic", "mean S", "picard");
    sim.run(steps, |state, row| {
        let (omega, s) = moments(&pr.grid, &pr.orient, &state.psi);
        let (order, _) = order_parameters(&omega, &s);
        let mean = order.data.iter().sum::<f64>() / order.data.len() as f64;
        println!("{:>5} {:>8.3} {:>12.4e} {:>10.5} {:>7}", row.step, row.t, row.kinetic, mean, row.picard_iters);
        Ok(())
    })?;
    Ok(())
}
