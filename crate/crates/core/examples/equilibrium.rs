//! The isotropic state on the torus is stationary for any activity and
//! interaction strength.

use active_doi::driver::Simulation;
use active_doi::field::{ConfigurationField, FaceField};
use active_doi::grid::{BcMode, DomainGrid};
use active_doi::params::{Params, Problem};

fn main() -> active_doi::Result<()> {
    let c = 0.4;
    for (alpha, u0) in [(0.0, 0.0), (5.0, 0.0), (-5.0, 8.0)] {
        let params = Params { epsilon: 0.25, alpha, potential_strength: u0, ..Params::default() };
        let pr = Problem::new(params, DomainGrid::unit(8, BcMode::Periodic)?, 8)?;
        let psi = ConfigurationField::constant(&pr.grid, &pr.orient, c);
        let mut sim = Simulation::new(pr.clone(), &psi, &FaceField::zeros(&pr.grid))?;
        sim.run(10, |_, _| Ok(()))?;
        let dev = sim.state.psi.data.iter().fold(0.0f64, |a, v| a.max((v - c).abs()));
        println!(
            "alpha {alpha:+.1}, U0 {u0:.1}: max |u| = {:.1e}, max |psi - c| = {dev:.1e}",
            sim.state.flow.u.max_abs()
        );
    }
    Ok(())
}
