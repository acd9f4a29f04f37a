//! Energy functionals, chemical potential, nematic order readout, and the
//! per-step entropy ledger.

use crate::field::{ConfigurationField, FaceField, ScalarField, TensorField2};
use crate::grid::OrientationGrid;
use crate::ops::{dirichlet_energy, grad_mm, interior_faces, velocity_gradient};
use crate::params::Problem;
use crate::potential::{build_potential, PotentialField};
use crate::regularization::entropy_unchecked;

/// Nodes with `ω` below this are masked in the order-parameter readout.
pub const OMEGA_FLOOR: f64 = 1e-12;
/// The director is reported only where the scalar order exceeds this.
pub const S_FLOOR: f64 = 1e-8;

/// Exact header of the ledger CSV.
pub const LEDGER_HEADER: [&str; 15] = [
    "step",
    "t",
    "mass",
    "kinetic",
    "entropy",
    "potential",
    "visc_inc",
    "poly_inc",
    "fisher_x_inc",
    "fisher_g_inc",
    "active_budget",
    "total_energy",
    "picard_iters",
    "min_psi",
    "div_residual",
];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LedgerRow {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub entropy: f64,
    pub potential: f64,
    pub visc_inc: f64,
    pub poly_inc: f64,
    pub fisher_x_inc: f64,
    pub fisher_g_inc: f64,
    pub active_budget: f64,
    pub total_energy: f64,
    pub picard_iters: usize,
    pub min_psi: f64,
    pub div_residual: f64,
}

impl LedgerRow {
    /// Sum of the dissipation increments of the step.
    pub fn dissipation(&self) -> f64 {
        self.visc_inc + self.poly_inc + self.fisher_x_inc + self.fisher_g_inc
    }
}

/// `μ = log ψ + U` at every node with `ψ > 0`; other nodes are `None`.
pub fn chemical_potential(
    psi: &ConfigurationField,
    pot: &PotentialField,
    orient: &OrientationGrid,
) -> Vec<Option<f64>> {
    let m = orient.len();
    psi.data
        .iter()
        .enumerate()
        .map(|(idx, &v)| (v > 0.0).then(|| v.ln() + pot.value(idx / m, orient.m(idx % m))))
        .collect()
}

/// Scalar order `s = 2 λ_max(S/ω − I/2)` and director angle in `[0, π)`.
/// Masked nodes get `s = 0` and a NaN director.
pub fn order_parameters(omega: &ScalarField, s: &TensorField2) -> (ScalarField, ScalarField) {
    let mut order = omega.clone();
    let mut director = omega.clone();
    for (c, &w) in omega.data.iter().enumerate() {
        if !(w > OMEGA_FLOOR) {
            order.data[c] = 0.0;
            director.data[c] = f64::NAN;
            continue;
        }
        let [sxx, sxy, syy] = s.data[c];
        let q = 0.5 * (sxx - syy) / w;
        let r = sxy / w;
        let lambda = q.hypot(r);
        order.data[c] = 2.0 * lambda;
        director.data[c] = if 2.0 * lambda > S_FLOOR {
            let a = 0.5 * r.atan2(q);
            if a < 0.0 {
                a + std::f64::consts::PI
            } else {
                a
            }
        } else {
            f64::NAN
        };
    }
    (order, director)
}

/// `∫∫ F(max(ψ, 0))` and the number of clamped nodes.
pub fn entropy_integral(problem: &Problem, psi: &ConfigurationField) -> (f64, usize) {
    let mut clamped = 0;
    let mut acc = 0.0;
    for &v in &psi.data {
        if v < 0.0 {
            clamped += 1;
        }
        acc += entropy_unchecked(v.max(0.0));
    }
    (acc * problem.node_weight(), clamped)
}

/// `∫∫ ψ U[ψ]`.
pub fn interaction_energy(problem: &Problem, psi: &ConfigurationField) -> f64 {
    if problem.params.potential_strength == 0.0 {
        return 0.0;
    }
    let pot = build_potential(
        &problem.kernel,
        &problem.grid,
        &problem.orient,
        psi,
        problem.params.potential_strength,
    );
    let m = problem.orient.len();
    psi.data
        .iter()
        .enumerate()
        .map(|(idx, v)| v * pot.value(idx / m, problem.orient.m(idx % m)))
        .sum::<f64>()
        * problem.node_weight()
}

/// `∫∫ Q^L(ψ) (∇u : m⊗m)²`.
pub fn polymer_dissipation(problem: &Problem, psi: &ConfigurationField, u: &FaceField) -> f64 {
    let grads = velocity_gradient(&problem.grid, u);
    let mut acc = 0.0;
    for (c, g) in grads.iter().enumerate() {
        for (k, &v) in psi.cell(c).iter().enumerate() {
            let e = grad_mm(g, problem.orient.m(k));
            acc += problem.cutoff.q(v) * e * e;
        }
    }
    acc * problem.node_weight()
}

/// `∫∫ |∇_x √ψ|²` from face differences of `√max(ψ,0)`.
pub fn spatial_fisher(problem: &Problem, psi: &ConfigurationField) -> f64 {
    let m = problem.orient.len();
    let mut acc = 0.0;
    for f in interior_faces(&problem.grid) {
        let (l, r) = (psi.cell(f.left), psi.cell(f.right));
        for k in 0..m {
            let d = (r[k].max(0.0).sqrt() - l[k].max(0.0).sqrt()) / f.spacing;
            acc += d * d;
        }
    }
    acc * problem.node_weight()
}

/// `∫∫ |∇_g √ψ|²` as the quadratic form of the spectral second derivative.
pub fn angular_fisher(problem: &Problem, psi: &ConfigurationField) -> f64 {
    let m = problem.orient.len();
    let mut acc = 0.0;
    let mut root = vec![0.0; m];
    for c in 0..problem.grid.cells() {
        for (r, v) in root.iter_mut().zip(psi.cell(c)) {
            *r = v.max(0.0).sqrt();
        }
        let d2 = problem.circle.second_derivative(&root);
        acc -= root.iter().zip(&d2).map(|(a, b)| a * b).sum::<f64>();
    }
    acc * problem.node_weight()
}

/// Quantities of one step that are not functions of the state alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub picard_iters: usize,
    pub div_residual: f64,
    /// `‖ψ⁰‖_{L¹}` of the initial density.
    pub initial_l1: f64,
    /// Whether to evaluate the dissipation increments (false for step 0).
    pub increments: bool,
}

/// Every ledger column for the state `(ψ, u)` reached at `info.step`.
pub fn entropy_ledger_row(
    problem: &Problem,
    psi: &ConfigurationField,
    u: &FaceField,
    info: StepInfo,
) -> LedgerRow {
    let prm = &problem.params;
    let grid = &problem.grid;
    let t = info.step as f64 * prm.tau;
    let kinetic = 0.5 * prm.re * prm.de * u.dot(u, grid);
    let (f_int, _) = entropy_integral(problem, psi);
    let entropy = (1.0 - prm.gamma) * f_int;
    let potential = 0.5 * (1.0 - prm.gamma) * interaction_energy(problem, psi);
    let (visc_inc, poly_inc, fisher_x_inc, fisher_g_inc) = if info.increments {
        (
            prm.tau * prm.gamma * prm.de * dirichlet_energy(grid, u),
            prm.tau * (1.0 - prm.gamma) * prm.de / 2.0 * polymer_dissipation(problem, psi, u),
            prm.tau * (1.0 - prm.gamma) * prm.epsilon * prm.epsilon / prm.de
                * 4.0
                * spatial_fisher(problem, psi),
            prm.tau * (1.0 - prm.gamma) / prm.de * 4.0 * angular_fisher(problem, psi),
        )
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };
    LedgerRow {
        step: info.step,
        t,
        mass: psi.mass(grid, &problem.orient),
        kinetic,
        entropy,
        potential,
        visc_inc,
        poly_inc,
        fisher_x_inc,
        fisher_g_inc,
        active_budget: prm.alpha * prm.alpha * (1.0 - prm.gamma) * t / prm.de * info.initial_l1,
        total_energy: kinetic + entropy + potential,
        picard_iters: info.picard_iters,
        min_psi: psi.min(),
        div_residual: info.div_residual,
    }
}
