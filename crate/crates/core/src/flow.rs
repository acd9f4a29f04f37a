//! Linearized momentum balance of one fixed-point iteration and its
//! velocity–pressure saddle-point solve.
//!
//! The velocity block collects mass, skew-symmetrized convection by the
//! previous velocity, solvent viscosity, and the polymer viscosity weighted by
//! `Q₀^L(ψ̄)`. The right-hand side carries the previous velocity, the potential
//! body force, the elastic and `(2m⊗m − I)` stresses, and the active stress.
//!
//! The saddle point `A u − Bᵀp = f, B u = 0` (with `B = |cell|·div_h`) is
//! solved by Uzawa iteration on the pressure Schur complement: flexible GMRES
//! outside, BiCGStab for the velocity block inside, and a Cahouet–Chabard
//! preconditioner built from a pressure Poisson solve.

use crate::error::{Error, Result};
use crate::field::{dot, ConfigurationField, FaceField, ScalarField};
use crate::grid::DomainGrid;
use crate::krylov::{bicgstab, cg, fgmres, project_mean, KrylovOptions};
use crate::ops::{
    divergence_matrix, divergence_residual, interior_faces, stiffness_matrix,
    velocity_gradient_rows, SparseRow,
};
use crate::params::Problem;
use crate::potential::PotentialField;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Assembled velocity block, constraint, and load of one flow solve.
#[derive(Debug, Clone)]
pub struct OseenSystem {
    /// Velocity block `A` over all stored face slots.
    pub matrix: CsrMatrix,
    /// `B = |cell| · div_h`.
    pub constraint: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Mass and viscosity scales of `A` per unit cell volume, used by the
    /// pressure preconditioner.
    pub mass_scale: f64,
    pub viscous_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub u: FaceField,
    pub p: ScalarField,
    /// `max_cell |div_h u|`.
    pub div_residual: f64,
    /// `|a(u,u) − k(u)| / max(|a(u,u)|, |k(u)|)`.
    pub energy_residual: f64,
    pub outer_iterations: usize,
}

impl FlowState {
    pub fn at_rest(grid: &DomainGrid) -> Self {
        FlowState {
            u: FaceField::zeros(grid),
            p: ScalarField::zeros(grid),
            div_residual: 0.0,
            energy_residual: 0.0,
            outer_iterations: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTolerances {
    pub linear: f64,
    pub div: f64,
}

/// Whether face slot `k` carries an unknown.
pub fn face_slot_active(grid: &DomainGrid, k: usize) -> bool {
    let cells = grid.cells();
    if k < cells {
        grid.x_face_active(k % grid.nx)
    } else {
        grid.y_face_active((k - cells) / grid.nx)
    }
}

/// Centred advective derivative `(v·∇_h) u` at faces as a matrix in `u`,
/// with odd reflection across walls.
pub fn convection_matrix(grid: &DomainGrid, v: &FaceField) -> CsrMatrix {
    let n = grid.face_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, 4 * n);
    let periodic = grid.is_periodic();
    let (nx, ny) = (grid.nx, grid.ny);
    let (cx, cy) = (0.5 / grid.hx, 0.5 / grid.hy);
    for j in 0..ny {
        for i in 0..nx {
            let (ii, jj) = (i as isize, j as isize);
            if let Some(k) = grid.xface(ii, j) {
                let ax = v.data[k];
                let l = grid.shift(i, -1, nx).unwrap_or(0);
                let ay = 0.25
                    * (v.get(grid.yface(l, jj))
                        + v.get(grid.yface(i, jj))
                        + v.get(grid.yface(l, jj + 1))
                        + v.get(grid.yface(i, jj + 1)));
                if let Some(r) = grid.xface(ii + 1, j) {
                    b.add(k, r, ax * cx);
                }
                if let Some(r) = grid.xface(ii - 1, j) {
                    b.add(k, r, -ax * cx);
                }
                match grid.shift(j, 1, ny) {
                    Some(up) => b.add(k, grid.xface(ii, up).unwrap(), ay * cy),
                    None => b.add(k, k, -ay * cy),
                }
                match grid.shift(j, -1, ny) {
                    Some(dn) => b.add(k, grid.xface(ii, dn).unwrap(), -ay * cy),
                    None => b.add(k, k, ay * cy),
                }
            }
            if let Some(k) = grid.yface(i, jj) {
                let ay = v.data[k];
                let d = if periodic { (j + ny - 1) % ny } else { j.saturating_sub(1) };
                let ax = 0.25
                    * (v.get(grid.xface(ii, d))
                        + v.get(grid.xface(ii + 1, d))
                        + v.get(grid.xface(ii, j))
                        + v.get(grid.xface(ii + 1, j)));
                if let Some(r) = grid.yface(i, jj + 1) {
                    b.add(k, r, ay * cy);
                }
                if let Some(r) = grid.yface(i, jj - 1) {
                    b.add(k, r, -ay * cy);
                }
                match grid.shift(i, 1, nx) {
                    Some(rt) => b.add(k, grid.yface(rt, jj).unwrap(), ax * cx),
                    None => b.add(k, k, -ax * cx),
                }
                match grid.shift(i, -1, nx) {
                    Some(lt) => b.add(k, grid.yface(lt, jj).unwrap(), -ax * cx),
                    None => b.add(k, k, ax * cx),
                }
            }
        }
    }
    b.build()
}

/// Skew-symmetric part of the volume-weighted convection operator.
pub fn skew_convection(grid: &DomainGrid, v: &FaceField) -> CsrMatrix {
    let c = convection_matrix(grid, v);
    let ct = c.transpose();
    let vol = grid.cell_volume();
    CsrMatrix::combine(0.5 * vol, &c, -0.5 * vol, &ct)
}

/// Rows of `e(u) = (∂x u_x, ∂y u_x + ∂x u_y, ∂y u_y)` at cell `(i, j)`, so that
/// `∇u : m⊗m = e · (m_x², m_x m_y, m_y²)`.
fn strain_rows(grid: &DomainGrid, i: usize, j: usize) -> [SparseRow; 3] {
    let [dxu, dyu, dxv, dyv] = velocity_gradient_rows(grid, i, j);
    let mut shear = dyu;
    shear.extend(dxv);
    [dxu, shear, dyv]
}

/// `Σ_cells |cell| Σ_j w c_j (∇u:m_j⊗m_j)(∇w:m_j⊗m_j)` as a matrix, where
/// `c_j` is `weight(ψ̄)` at the node.
pub fn polymer_viscosity_matrix(
    problem: &Problem,
    psi_bar: &ConfigurationField,
    weight: impl Fn(f64) -> f64,
) -> CsrMatrix {
    let grid = &problem.grid;
    let orient = &problem.orient;
    let n = grid.face_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, 64 * grid.cells());
    let vol = grid.cell_volume();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.cell(i, j);
            let mut c3 = [[0.0; 3]; 3];
            for (k, &psi) in psi_bar.cell(c).iter().enumerate() {
                let q = weight(psi);
                if q == 0.0 {
                    continue;
                }
                let m = orient.m(k);
                let nk = [m[0] * m[0], m[0] * m[1], m[1] * m[1]];
                for p in 0..3 {
                    for r in 0..3 {
                        c3[p][r] += orient.weight() * q * nk[p] * nk[r];
                    }
                }
            }
            let rows = strain_rows(grid, i, j);
            for p in 0..3 {
                for r in 0..3 {
                    let coef = vol * c3[p][r];
                    if coef == 0.0 {
                        continue;
                    }
                    for &(a, va) in &rows[p] {
                        for &(bb, vb) in &rows[r] {
                            b.add(a, bb, coef * va * vb);
                        }
                    }
                }
            }
        }
    }
    b.build()
}

/// Cell stress `T` (entries `[xx, xy, yx, yy]`, acting as `T : ∇w`) collecting
/// the elastic, `(2m⊗m − I)` and active terms, including the factor
/// `τ(1−γ)`.
pub fn stress_tensor(
    problem: &Problem,
    psi_bar: &ConfigurationField,
    pot: &PotentialField,
) -> Vec<[f64; 4]> {
    let prm = &problem.params;
    let orient = &problem.orient;
    let w = orient.weight();
    let scale = prm.tau * (1.0 - prm.gamma);
    (0..problem.grid.cells())
        .map(|c| {
            let mut t = [0.0; 4];
            for (k, &psi) in psi_bar.cell(c).iter().enumerate() {
                let (m, tg) = (orient.m(k), orient.t(k));
                let q0 = problem.cutoff.q0(psi);
                let g = pot.tangential_derivative(c, m, tg);
                let elastic = w * q0 * g;
                let active = w * prm.alpha * q0;
                let isotropic = w * psi;
                t[0] += elastic * tg[0] * m[0] + active * m[0] * m[0] + isotropic * (2.0 * m[0] * m[0] - 1.0);
                t[1] += elastic * tg[0] * m[1] + active * m[0] * m[1] + isotropic * 2.0 * m[0] * m[1];
                t[2] += elastic * tg[1] * m[0] + active * m[1] * m[0] + isotropic * 2.0 * m[1] * m[0];
                t[3] += elastic * tg[1] * m[1] + active * m[1] * m[1] + isotropic * (2.0 * m[1] * m[1] - 1.0);
            }
            t.map(|v| v * scale)
        })
        .collect()
}

/// Face load `τ(1−γ) ∫ ψ̄ ∇_x P · w` with arithmetic face averages of `ψ̄`.
pub fn body_force(problem: &Problem, psi_bar: &ConfigurationField, pot: &PotentialField) -> Vec<f64> {
    let prm = &problem.params;
    let grid = &problem.grid;
    let orient = &problem.orient;
    let mut out = vec![0.0; grid.face_dofs()];
    let scale = prm.tau * (1.0 - prm.gamma) * grid.cell_volume() * orient.weight();
    if pot.a.data.iter().all(|v| *v == 0.0) && pot.b.data.iter().all(|t| *t == [0.0; 3]) {
        return out;
    }
    for f in interior_faces(grid) {
        let (l, r) = (psi_bar.cell(f.left), psi_bar.cell(f.right));
        let mut acc = 0.0;
        for k in 0..orient.len() {
            acc += 0.5 * (l[k] + r[k]) * pot.face_difference(&f, orient.m(k));
        }
        out[f.face] = scale * acc;
    }
    out
}

fn check_shapes(problem: &Problem, psi: &ConfigurationField, what: &str) -> Result<()> {
    if psi.matches(&problem.grid, &problem.orient) {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{what} is {}x{}x{}, expected {}x{}x{}",
            psi.nx,
            psi.ny,
            psi.m,
            problem.grid.nx,
            problem.grid.ny,
            problem.orient.len()
        )))
    }
}

/// Builds `a(ψ̄)(·,·)` and `k(ψ̄)(·)` for one iteration. `pot` must be the
/// time-averaged potential `½U[ψ̄ + ψ_prev]`.
pub fn assemble_flow(
    problem: &Problem,
    psi_bar: &ConfigurationField,
    u_prev: &FaceField,
    pot: &PotentialField,
) -> Result<OseenSystem> {
    check_shapes(problem, psi_bar, "lagged density")?;
    let grid = &problem.grid;
    if u_prev.data.len() != grid.face_dofs() {
        return Err(Error::Shape(format!(
            "previous velocity has {} samples, expected {}",
            u_prev.data.len(),
            grid.face_dofs()
        )));
    }
    let prm = &problem.params;
    let vol = grid.cell_volume();
    let n = grid.face_dofs();
    let rede = prm.re * prm.de;

    let mut mass = TripletBuilder::with_capacity(n, n, n);
    for k in 0..n {
        let d = if face_slot_active(grid, k) { rede } else { rede.max(1.0) };
        mass.add(k, k, d * vol);
    }
    let mut a = mass.build();
    if rede != 0.0 && u_prev.max_abs() > 0.0 {
        a = CsrMatrix::combine(1.0, &a, prm.tau * rede, &skew_convection(grid, u_prev));
    }
    a = CsrMatrix::combine(1.0, &a, prm.tau * prm.gamma * prm.de, &stiffness_matrix(grid));
    let poly_coef = prm.tau * (1.0 - prm.gamma) * prm.de / 2.0;
    let cutoff = problem.cutoff;
    let poly = polymer_viscosity_matrix(problem, psi_bar, |s| cutoff.q0(s));
    if poly.nnz() > 0 {
        a = CsrMatrix::combine(1.0, &a, poly_coef, &poly);
    }

    let mut rhs: Vec<f64> = u_prev.data.iter().map(|v| rede * vol * v).collect();
    for (r, bf) in rhs.iter_mut().zip(body_force(problem, psi_bar, pot)) {
        *r -= bf;
    }
    let stress = stress_tensor(problem, psi_bar, pot);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let t = stress[grid.cell(i, j)];
            if t == [0.0; 4] {
                continue;
            }
            for (row, tp) in velocity_gradient_rows(grid, i, j).iter().zip(t) {
                for &(k, v) in row {
                    rhs[k] -= vol * tp * v;
                }
            }
        }
    }
    for (k, r) in rhs.iter_mut().enumerate() {
        if !face_slot_active(grid, k) {
            *r = 0.0;
        }
    }

    let constraint = divergence_matrix(grid).scaled(vol);
    let omega_q: f64 = psi_bar.data.iter().map(|&s| cutoff.q0(s)).sum::<f64>()
        * problem.orient.weight()
        / grid.cells() as f64;
    Ok(OseenSystem {
        matrix: a,
        constraint,
        rhs,
        mass_scale: rede,
        viscous_scale: prm.tau * prm.de * (prm.gamma + (1.0 - prm.gamma) * omega_q / 8.0),
    })
}

/// Solves the saddle point of an assembled system.
pub fn solve_flow(
    grid: &DomainGrid,
    sys: &OseenSystem,
    tol: FlowTolerances,
    guess: Option<&FlowState>,
) -> Result<FlowState> {
    solve_saddle(
        grid,
        &sys.matrix,
        &sys.constraint,
        &sys.rhs,
        sys.mass_scale,
        sys.viscous_scale,
        tol,
        guess,
    )
}

struct VelocityBlock<'a> {
    a: &'a CsrMatrix,
    inv_diag: Vec<f64>,
    opts: KrylovOptions,
}

impl VelocityBlock<'_> {
    fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<usize> {
        let op = |v: &[f64], out: &mut [f64]| self.a.mul_into(v, out);
        let pc = |v: &[f64], out: &mut [f64]| {
            for ((o, vi), d) in out.iter_mut().zip(v).zip(&self.inv_diag) {
                *o = vi * d;
            }
        };
        bicgstab(&op, &pc, b, x, self.opts)
            .map(|s| s.iterations)
            .map_err(Error::SolverFailure)
    }
}

/// Uzawa solve of `A u − Bᵀp = f`, `B u = 0` for a general velocity block.
/// `mass_scale` and `viscous_scale` describe `A ≈ |cell|(c_m I − c_k Δ_h)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_saddle(
    grid: &DomainGrid,
    a: &CsrMatrix,
    constraint: &CsrMatrix,
    f: &[f64],
    mass_scale: f64,
    viscous_scale: f64,
    tol: FlowTolerances,
    guess: Option<&FlowState>,
) -> Result<FlowState> {
    let n = grid.face_dofs();
    let cells = grid.cells();
    let vol = grid.cell_volume();
    if f.iter().all(|v| *v == 0.0) {
        return Ok(FlowState::at_rest(grid));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let inner = VelocityBlock {
        a,
        inv_diag,
        opts: KrylovOptions {
            rel_tol: (tol.linear * 1e-2).max(1e-13),
            abs_tol: 0.0,
            max_iter: 5000,
            restart: 0,
        },
    };
    let inner_err = std::cell::RefCell::new(None::<Error>);
    let bt = constraint.transpose();

    // g = B A⁻¹ f
    let mut af = guess.map_or_else(|| vec![0.0; n], |s| s.u.data.clone());
    inner.solve(f, &mut af)?;
    let mut g = constraint.mul(&af);
    g.iter_mut().for_each(|v| *v = -*v);
    project_mean(&mut g);

    let d = divergence_matrix(grid);
    let laplace = d.matmul(&d.transpose());
    let lap_diag: Vec<f64> = laplace.diagonal().iter().map(|d| 1.0 / d.max(1e-300)).collect();

    let schur = |p: &[f64], out: &mut [f64]| {
        let rhs = bt.mul(p);
        let mut x = vec![0.0; n];
        if let Err(e) = inner.solve(&rhs, &mut x) {
            inner_err.borrow_mut().get_or_insert(e);
        }
        constraint.mul_into(&x, out);
        project_mean(out);
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        let mut rr = r.to_vec();
        project_mean(&mut rr);
        let mut y = vec![0.0; cells];
        if mass_scale != 0.0 {
            let op = |v: &[f64], out: &mut [f64]| laplace.mul_into(v, out);
            let pc = |v: &[f64], out: &mut [f64]| {
                for ((o, vi), d) in out.iter_mut().zip(v).zip(&lap_diag) {
                    *o = vi * d;
                }
            };
            let _ = cg(&op, &pc, &rr, &mut y, KrylovOptions::relative(1e-8), true);
        }
        for ((zi, yi), ri) in z.iter_mut().zip(&y).zip(&rr) {
            *zi = (mass_scale * yi + viscous_scale * ri) / vol;
        }
        project_mean(z);
    };

    let gnorm = dot(&g, &g).sqrt();
    let mut p = guess.map_or_else(|| vec![0.0; cells], |s| s.p.data.clone());
    project_mean(&mut p);
    let outer_opts = KrylovOptions {
        rel_tol: 0.0,
        abs_tol: (tol.linear * gnorm).min(0.1 * tol.div * vol).max(f64::MIN_POSITIVE),
        max_iter: 500,
        restart: 60,
    };
    let stats = if gnorm > 0.0 {
        fgmres(&schur, &precond, &g, &mut p, outer_opts).map_err(Error::SolverFailure)?
    } else {
        p.iter_mut().for_each(|v| *v = 0.0);
        crate::krylov::KrylovStats {
            iterations: 0,
            residual: 0.0,
            rhs_norm: 0.0,
        }
    };
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    project_mean(&mut p);

    let mut rhs = bt.mul(&p);
    rhs.iter_mut().zip(f).for_each(|(r, fi)| *r += fi);
    let mut u = af;
    inner.solve(&rhs, &mut u)?;
    for (k, v) in u.iter_mut().enumerate() {
        if !face_slot_active(grid, k) {
            *v = 0.0;
        }
    }
    let u = FaceField::from_vec(grid, u);
    let div_residual = divergence_residual(grid, &u);
    if !(div_residual <= tol.div) {
        return Err(Error::SolverFailure(crate::error::SolverReport {
            solver: "uzawa",
            iterations: stats.iterations,
            residual: div_residual,
            target: tol.div,
        }));
    }
    let auu = a.quadratic_form(&u.data);
    let ku = dot(f, &u.data);
    let norm_u = dot(&u.data, &u.data);
    if norm_u > 0.0 && auu <= 0.0 {
        return Err(Error::Indefinite(format!(
            "a(u,u) = {auu:.3e} for |u|^2 = {norm_u:.3e}"
        )));
    }
    let scale = auu.abs().max(ku.abs());
    let energy_residual = if scale > 0.0 { (auu - ku).abs() / scale } else { 0.0 };
    Ok(FlowState {
        u,
        p: ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data: p,
        },
        div_residual,
        energy_residual,
        outer_iterations: stats.iterations,
    })
}
