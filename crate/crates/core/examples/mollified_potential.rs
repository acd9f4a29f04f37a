//! Mollified Maier-Saupe potential of a nematic patch and its gradients.

use active_doi::grid::{BcMode, DomainGrid};
use active_doi::init::{initial_density, DensityPreset, InitialData};
use active_doi::params::{Params, Problem};
use active_doi::potential::{build_potential, grad_g_potential, grad_x_potential};

fn main() -> active_doi::Result<()> {
    let params = Params { epsilon: 0.15, potential_strength: 2.0, ..Params::default() };
    let pr = Problem::new(params, DomainGrid::unit(24, BcMode::NoSlipNoFlux)?, 16)?;
    let init = InitialData { preset: DensityPreset::Nematic, sharpness: 3.0, amplitude: 0.4, seed: 7, ..InitialData::default() };
    let psi = initial_density(&pr.grid, &pr.orient, &init)?;
    let pot = build_potential(&pr.kernel, &pr.grid, &pr.orient, &psi, params.potential_strength);

    let values = pot.values(&pr.orient);
    let umax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gg = grad_g_potential(&pot, &pr.orient);
    let gx = grad_x_potential(&pot, &pr.grid, &pr.orient);
    let norm = |v: &[f64; 2]| v[0].hypot(v[1]);
    println!("kernel radius {:?} cells, mass {:.15}", pr.kernel.radius(), pr.kernel.discrete_mass(&pr.grid));
    println!("max |U| = {umax:.4}");
    println!("max |grad_g U| = {:.4}", gg.iter().map(norm).fold(0.0, f64::max));
    println!("max |grad_x U| = {:.4}", gx.iter().map(norm).fold(0.0, f64::max));
    let l1 = psi.norm_l1(&pr.grid, &pr.orient);
    println!("bound 2 U0 max(zeta) |psi|_1 = {:.4}", 2.0 * params.potential_strength * pr.kernel.max_weight() * l1);
    Ok(())
}
