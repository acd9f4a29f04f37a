//! One linearized momentum solve driven by the active stress of a nematic.

use active_doi::field::FaceField;
use active_doi::flow::{assemble_flow, solve_flow, FlowTolerances};
use active_doi::grid::{BcMode, DomainGrid};
use active_doi::init::{initial_density, DensityPreset, InitialData};
use active_doi::params::{Params, Problem};
use active_doi::potential::build_half_potential;

fn main() -> active_doi::Result<()> {
    let params = Params { epsilon: 0.125, alpha: -4.0, potential_strength: 1.0, tau: 1e-2, ..Params::default() };
    let pr = Problem::new(params, DomainGrid::unit(32, BcMode::NoSlipNoFlux)?, 16)?;
    let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 1, ..InitialData::default() };
    let psi = initial_density(&pr.grid, &pr.orient, &init)?;
    let pot = build_half_potential(&pr.kernel, &pr.grid, &pr.orient, &psi, &psi, params.potential_strength);

    let sys = assemble_flow(&pr, &psi, &FaceField::zeros(&pr.grid), &pot)?;
    println!("velocity block: {} unknowns, {} nonzeros", sys.matrix.rows(), sys.matrix.nnz());
    let st = solve_flow(&pr.grid, &sys, FlowTolerances { linear: 1e-10, div: 1e-10 }, None)?;
    println!("outer iterations {}", st.outer_iterations);
    println!("max |u| = {:.4e}, |u|_2 = {:.4e}", st.u.max_abs(), st.u.norm_l2(&pr.grid));
    println!("max |div u| = {:.2e}, energy residual {:.2e}", st.div_residual, st.energy_residual);
    Ok(())
}
