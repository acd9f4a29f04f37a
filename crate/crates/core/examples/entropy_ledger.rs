//! Energy ledger of a source-free run: total energy, dissipation and the
//! per-step balance, printed as CSV.

use active_doi::config::RunConfig;
use active_doi::driver::Simulation;
use active_doi::init::{initial_density, initial_velocity};

fn main() -> active_doi::Result<()> {
    let mut cfg = RunConfig::benchmark(16, 16, 5e-3, 10);
    cfg.model.alpha = 0.0;
    cfg.model.potential_strength = 0.0;
    let pr = cfg.problem()?;
    let init = cfg.initial_data();
    let psi0 = initial_density(&pr.grid, &pr.orient, &init)?;
    let mut sim = Simulation::new(pr.clone(), &psi0, &initial_velocity(&pr.grid, &init))?;
    sim.run(10, |_, _| Ok(()))?;
    println!("step,total_energy,delta_e,dissipation,delta_e_plus_dissipation");
    for w in sim.ledger.windows(2) {
        let de = w[1].total_energy - w[0].total_energy;
        let d = w[1].dissipation();
        println!("{},{:.10e},{de:.4e},{d:.4e},{:.4e}", w[1].step, w[1].total_energy, de + d);
    }
    Ok(())
}
