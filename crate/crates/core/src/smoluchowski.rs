//! Linear configuration-space problem `b(u)(ψ, θ) = l(u, ψ̄)(θ)` on the
//! product grid, assembled variationally: row `i` is the test function
//! `θ = e_i`, column `j` the trial function `ψ = e_j`, and every node carries
//! the quadrature weight `|cell|·w`.
//!
//! Spatial fluxes live on interior faces only (zero normal flux on walls).
//! Advection uses centred face averages, so each column of the advection and
//! diffusion parts sums to zero and the mass matrix alone fixes the column
//! sums: total mass is conserved by construction.

use crate::error::{Error, Result};
use crate::field::{ConfigurationField, FaceField};
use crate::krylov::{bicgstab, KrylovOptions};
use crate::ops::{divergence_residual, interior_faces, t_grad_m, velocity_gradient};
use crate::params::Problem;
use crate::potential::PotentialField;
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Debug, Clone)]
pub struct ConfigSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `max_j |Σ_i b_ij − |cell|·w|`; zero up to rounding when the operator
    /// conserves mass.
    pub certificate: f64,
    pub prev_mass: f64,
    pub prev_l1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSolve {
    pub psi: ConfigurationField,
    pub iterations: usize,
    /// `|mass(ψ) − mass(ψ_prev)|`.
    pub mass_drift: f64,
    pub min_psi: f64,
}

/// Implicit operator `b(u)`.
pub fn config_operator(problem: &Problem, u: &FaceField) -> CsrMatrix {
    let grid = &problem.grid;
    let orient = &problem.orient;
    let prm = &problem.params;
    let m = orient.len();
    let n = problem.config_len();
    let node = problem.node_weight();
    let faces = interior_faces(grid);
    let mut b = TripletBuilder::with_capacity(n, n, n * (m + 9));
    let d2 = problem.circle.d2();
    let ang = prm.tau / prm.de * node;
    for c in 0..grid.cells() {
        for r in 0..m {
            let row = c * m + r;
            b.add(row, row, node);
            for q in 0..m {
                b.add(row, c * m + q, -ang * d2[r * m + q]);
            }
        }
    }
    let diff = prm.tau * prm.epsilon * prm.epsilon / prm.de;
    for f in &faces {
        let uf = u.data[f.face];
        let adv = 0.5 * prm.tau * uf / f.spacing * node;
        let dif = diff / (f.spacing * f.spacing) * node;
        for k in 0..m {
            let (l, r) = (f.left * m + k, f.right * m + k);
            // −τ ∫ ψ u·∇θ with ψ averaged to the face
            b.add(r, l, -adv);
            b.add(r, r, -adv);
            b.add(l, l, adv);
            b.add(l, r, adv);
            b.add(r, r, dif);
            b.add(l, l, dif);
            b.add(r, l, -dif);
            b.add(l, r, -dif);
        }
    }
    b.build()
}

/// Right-hand side `l(u, ψ̄)` with `pot = ½U[ψ̄ + ψ_prev]`.
pub fn config_rhs(
    problem: &Problem,
    u: &FaceField,
    psi_bar: &ConfigurationField,
    psi_prev: &ConfigurationField,
    pot: &PotentialField,
) -> Vec<f64> {
    let grid = &problem.grid;
    let orient = &problem.orient;
    let prm = &problem.params;
    let cutoff = problem.cutoff;
    let m = orient.len();
    let node = problem.node_weight();
    let mut rhs: Vec<f64> = psi_prev.data.iter().map(|v| node * v).collect();

    let drift = prm.tau * prm.epsilon * prm.epsilon / prm.de * node;
    if drift != 0.0 && pot.a.data.iter().chain(pot.b.data.iter().flatten()).any(|v| *v != 0.0) {
        for f in interior_faces(grid) {
            let (l, r) = (psi_bar.cell(f.left), psi_bar.cell(f.right));
            for k in 0..m {
                let q = 0.5 * (cutoff.q0(l[k]) + cutoff.q0(r[k]));
                let flux = drift * q * pot.face_difference(&f, orient.m(k)) / f.spacing;
                rhs[f.right * m + k] -= flux;
                rhs[f.left * m + k] += flux;
            }
        }
    }

    let grads = velocity_gradient(grid, u);
    let ang = prm.tau / prm.de * node;
    let rot = prm.tau * node;
    let mut g = vec![0.0; m];
    let mut adj = vec![0.0; m];
    for c in 0..grid.cells() {
        let cell = psi_bar.cell(c);
        for k in 0..m {
            let (mk, tk) = (orient.m(k), orient.t(k));
            let q0 = cutoff.q0(cell[k]);
            g[k] = q0 * (rot * t_grad_m(&grads[c], tk, mk) - ang * pot.tangential_derivative(c, mk, tk));
        }
        problem.circle.derivative_transpose_into(&g, &mut adj);
        for k in 0..m {
            rhs[c * m + k] += adj[k];
        }
    }
    rhs
}

pub fn assemble_config(
    problem: &Problem,
    u: &FaceField,
    psi_bar: &ConfigurationField,
    psi_prev: &ConfigurationField,
    pot: &PotentialField,
) -> Result<ConfigSystem> {
    for (what, f) in [("lagged density", psi_bar), ("previous density", psi_prev)] {
        if !f.matches(&problem.grid, &problem.orient) {
            return Err(Error::Shape(format!("{what} does not match the grid")));
        }
    }
    let div = divergence_residual(&problem.grid, u);
    if div > problem.params.tol_div {
        return Err(Error::Precondition(format!(
            "transport velocity has divergence {div:.3e} above {:.3e}",
            problem.params.tol_div
        )));
    }
    let matrix = config_operator(problem, u);
    let node = problem.node_weight();
    let certificate = matrix
        .column_sums()
        .iter()
        .fold(0.0, |acc: f64, s| acc.max((s - node).abs()));
    Ok(ConfigSystem {
        rhs: config_rhs(problem, u, psi_bar, psi_prev, pot),
        matrix,
        certificate,
        prev_mass: psi_prev.mass(&problem.grid, &problem.orient),
        prev_l1: psi_prev.norm_l1(&problem.grid, &problem.orient),
    })
}

/// Jacobi-preconditioned BiCGStab solve with a coarse correction on the
/// constant mode, followed by the mass audit
/// `|Δ mass| ≤ 10·tol_linear·‖ψ_prev‖₁`.
pub fn solve_config(
    problem: &Problem,
    sys: &ConfigSystem,
    guess: &ConfigurationField,
) -> Result<ConfigSolve> {
    let tol = problem.params.tol_linear;
    let inv_diag: Vec<f64> = sys.matrix.diagonal().iter().map(|d| 1.0 / d).collect();
    let op = |v: &[f64], out: &mut [f64]| sys.matrix.mul_into(v, out);
    let pc = |v: &[f64], out: &mut [f64]| {
        for ((o, vi), d) in out.iter_mut().zip(v).zip(&inv_diag) {
            *o = vi * d;
        }
    };
    let mut x = guess.data.clone();
    let stats = bicgstab(&op, &pc, &sys.rhs, &mut x, KrylovOptions::relative(tol))
        .map_err(Error::SolverFailure)?;
    // Galerkin correction on the constant mode: every column of the operator
    // sums to the node weight, so a uniform shift removes the residual's mass.
    let mut ax = vec![0.0; x.len()];
    sys.matrix.mul_into(&x, &mut ax);
    let excess: f64 = sys.rhs.iter().zip(&ax).map(|(b, a)| b - a).sum();
    let shift = excess / (x.len() as f64 * problem.node_weight());
    x.iter_mut().for_each(|v| *v += shift);
    let psi = ConfigurationField::from_vec(&problem.grid, &problem.orient, x);
    if !psi.is_finite() {
        return Err(Error::SolverFailure(crate::error::SolverReport {
            solver: "bicgstab",
            iterations: stats.iterations,
            residual: f64::NAN,
            target: tol,
        }));
    }
    let mass_drift = (psi.mass(&problem.grid, &problem.orient) - sys.prev_mass).abs();
    let tolerance = 10.0 * tol * sys.prev_l1;
    if mass_drift > tolerance {
        return Err(Error::ConservationViolation {
            drift: mass_drift,
            tolerance,
        });
    }
    Ok(ConfigSolve {
        min_psi: psi.min(),
        psi,
        iterations: stats.iterations,
        mass_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BcMode, DomainGrid};
    use crate::ops::curl_of_stream;
    use crate::params::Params;
    use crate::potential::build_half_potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn problem(bc: BcMode, params: Params) -> Problem {
        Problem::new(params, DomainGrid::unit(8, bc).unwrap(), 8).unwrap()
    }

    #[test]
    fn constants_are_reproduced_without_forcing() {
        let pr = problem(BcMode::NoSlipNoFlux, Params { epsilon: 0.25, ..Params::default() });
        let psi = ConfigurationField::constant(&pr.grid, &pr.orient, 0.7);
        let u = FaceField::zeros(&pr.grid);
        let sys = assemble_config(&pr, &u, &psi, &psi, &PotentialField::zeros(&pr.grid)).unwrap();
        let out = solve_config(&pr, &sys, &psi).unwrap();
        assert!(out.psi.data.iter().all(|v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn columns_sum_to_node_weight_and_mass_is_conserved() {
        let params = Params {
            epsilon: 0.25,
            potential_strength: 3.0,
            ..Params::default()
        };
        for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
            let pr = problem(bc, params);
            let u = curl_of_stream(&pr.grid, |x, y| 0.3 * (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let prev = ConfigurationField::from_fn(&pr.grid, &pr.orient, |_, _, _| rng.random_range(0.1..1.0));
            let bar = ConfigurationField::from_fn(&pr.grid, &pr.orient, |_, _, _| rng.random_range(0.1..1.0));
            let pot = build_half_potential(&pr.kernel, &pr.grid, &pr.orient, &bar, &prev, 3.0);
            let sys = assemble_config(&pr, &u, &bar, &prev, &pot).unwrap();
            assert!(sys.certificate < 1e-15);
            let rhs_total: f64 = sys.rhs.iter().sum();
            assert!((rhs_total - sys.prev_mass).abs() < 1e-13);
            let out = solve_config(&pr, &sys, &prev).unwrap();
            assert!(out.mass_drift < 1e-12, "{}", out.mass_drift);
        }
    }

    #[test]
    fn angular_relaxation_of_cos2_mode() {
        let params = Params { epsilon: 0.25, ..Params::default() };
        let pr = problem(BcMode::Periodic, params);
        let prev = ConfigurationField::from_fn(&pr.grid, &pr.orient, |_, _, phi| 1.0 + (2.0 * phi).cos());
        let sys = assemble_config(&pr, &FaceField::zeros(&pr.grid), &prev, &prev, &PotentialField::zeros(&pr.grid)).unwrap();
        let out = solve_config(&pr, &sys, &prev).unwrap();
        let factor = 1.0 / (1.0 + 4.0 * params.tau / params.de);
        for c in 0..pr.grid.cells() {
            for k in 0..8 {
                let phi = pr.orient.angle(k);
                let expect = 1.0 + factor * (2.0 * phi).cos();
                assert!((out.psi.cell(c)[k] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn advection_is_skew() {
        let params = Params { epsilon: 0.0, ..Params::default() };
        let g = DomainGrid::unit(8, BcMode::NoSlipNoFlux).unwrap();
        let pr = Problem {
            params,
            ..problem(BcMode::NoSlipNoFlux, Params { epsilon: 0.25, ..Params::default() })
        };
        let u = curl_of_stream(&g, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        let with_flow = config_operator(&pr, &u);
        let without = config_operator(&pr, &FaceField::zeros(&g));
        let adv = CsrMatrix::combine(1.0, &with_flow, -1.0, &without);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi: Vec<f64> = (0..pr.config_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(adv.quadratic_form(&psi).abs() < 1e-14);
    }

    #[test]
    fn rejects_compressible_transport() {
        let pr = problem(BcMode::Periodic, Params { epsilon: 0.25, ..Params::default() });
        let mut u = FaceField::zeros(&pr.grid);
        u.data[3] = 1.0;
        let psi = ConfigurationField::constant(&pr.grid, &pr.orient, 1.0);
        assert!(matches!(
            assemble_config(&pr, &u, &psi, &psi, &PotentialField::zeros(&pr.grid)),
            Err(Error::Precondition(_))
        ));
    }
}
