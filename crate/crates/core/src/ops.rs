//! Second-order MAC calculus on the rectangle.
//!
//! Scalars live at cell centres, normal velocities on faces. The face gradient
//! and the cell divergence are negative adjoints of each other under the
//! cell-volume inner product in both boundary modes, so `div ∘ grad` is the
//! five-point Laplacian with periodic or homogeneous Neumann closure.
//!
//! The full velocity gradient is reconstructed at cell centres: the diagonal
//! entries are one-cell differences (their trace is exactly the discrete
//! divergence) and the off-diagonal entries are centred differences of the
//! face-to-centre averages, with odd reflection across no-slip walls.

use crate::field::{FaceField, ScalarField};
use crate::grid::DomainGrid;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Sparse combination of velocity unknowns.
pub type SparseRow = Vec<(usize, f64)>;

/// An interior face between two cells: `(left, right, spacing, face)`; `face`
/// is the global velocity index of the face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFace {
    pub left: usize,
    pub right: usize,
    pub spacing: f64,
    pub face: usize,
}

/// All faces that carry a flux, x-family first.
pub fn interior_faces(grid: &DomainGrid) -> Vec<CellFace> {
    let mut out = Vec::with_capacity(grid.face_dofs());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if let (Some(face), Some(l)) = (grid.xface(i as isize, j), grid.shift(i, -1, grid.nx)) {
                out.push(CellFace {
                    left: grid.cell(l, j),
                    right: grid.cell(i, j),
                    spacing: grid.hx,
                    face,
                });
            }
        }
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if let (Some(face), Some(l)) = (grid.yface(i, j as isize), grid.shift(j, -1, grid.ny)) {
                out.push(CellFace {
                    left: grid.cell(i, l),
                    right: grid.cell(i, j),
                    spacing: grid.hy,
                    face,
                });
            }
        }
    }
    out
}

/// Face gradient of a cell scalar; zero on walls.
pub fn gradient(grid: &DomainGrid, p: &ScalarField) -> FaceField {
    let mut g = FaceField::zeros(grid);
    for f in interior_faces(grid) {
        g.data[f.face] = (p.data[f.right] - p.data[f.left]) / f.spacing;
    }
    g
}

/// Cell divergence of a face field.
pub fn divergence(grid: &DomainGrid, u: &FaceField) -> ScalarField {
    let mut d = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (ii, jj) = (i as isize, j as isize);
            d.data[grid.cell(i, j)] = (u.get(grid.xface(ii + 1, j)) - u.get(grid.xface(ii, j)))
                / grid.hx
                + (u.get(grid.yface(i, jj + 1)) - u.get(grid.yface(i, jj))) / grid.hy;
        }
    }
    d
}

/// Five-point Laplacian `div ∘ grad`.
pub fn laplacian(grid: &DomainGrid, p: &ScalarField) -> ScalarField {
    divergence(grid, &gradient(grid, p))
}

/// Divergence as a `cells × faces` matrix.
pub fn divergence_matrix(grid: &DomainGrid) -> CsrMatrix {
    let mut b = TripletBuilder::with_capacity(grid.cells(), grid.face_dofs(), 4 * grid.cells());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.cell(i, j);
            let (ii, jj) = (i as isize, j as isize);
            if let Some(k) = grid.xface(ii + 1, j) {
                b.add(c, k, 1.0 / grid.hx);
            }
            if let Some(k) = grid.xface(ii, j) {
                b.add(c, k, -1.0 / grid.hx);
            }
            if let Some(k) = grid.yface(i, jj + 1) {
                b.add(c, k, 1.0 / grid.hy);
            }
            if let Some(k) = grid.yface(i, jj) {
                b.add(c, k, -1.0 / grid.hy);
            }
        }
    }
    b.build()
}

/// Max-norm of the discrete divergence.
pub fn divergence_residual(grid: &DomainGrid, u: &FaceField) -> f64 {
    divergence(grid, u).max_abs()
}

fn push(row: &mut SparseRow, idx: Option<usize>, v: f64) {
    if let Some(k) = idx {
        row.push((k, v));
    }
}

/// Centre average of the x-velocity in column `i`, row `j` (rows outside a
/// walled domain reflect oddly).
fn ux_center(grid: &DomainGrid, i: usize, j: isize, scale: f64, row: &mut SparseRow) {
    let ny = grid.ny as isize;
    let (jj, sign) = if grid.is_periodic() {
        (j.rem_euclid(ny), 1.0)
    } else if j < 0 {
        (0, -1.0)
    } else if j >= ny {
        (ny - 1, -1.0)
    } else {
        (j, 1.0)
    };
    let jj = jj as usize;
    push(row, grid.xface(i as isize, jj), 0.5 * sign * scale);
    push(row, grid.xface(i as isize + 1, jj), 0.5 * sign * scale);
}

fn uy_center(grid: &DomainGrid, i: isize, j: usize, scale: f64, row: &mut SparseRow) {
    let nx = grid.nx as isize;
    let (ii, sign) = if grid.is_periodic() {
        (i.rem_euclid(nx), 1.0)
    } else if i < 0 {
        (0, -1.0)
    } else if i >= nx {
        (nx - 1, -1.0)
    } else {
        (i, 1.0)
    };
    let ii = ii as usize;
    push(row, grid.yface(ii, j as isize), 0.5 * sign * scale);
    push(row, grid.yface(ii, j as isize + 1), 0.5 * sign * scale);
}

/// Rows of the centred velocity gradient at cell `(i, j)`, ordered
/// `[∂x u_x, ∂y u_x, ∂x u_y, ∂y u_y]` (i.e. `(∇u)_{ab} = ∂_b u_a`).
pub fn velocity_gradient_rows(grid: &DomainGrid, i: usize, j: usize) -> [SparseRow; 4] {
    let (ii, jj) = (i as isize, j as isize);
    let mut dxu = SparseRow::new();
    push(&mut dxu, grid.xface(ii + 1, j), 1.0 / grid.hx);
    push(&mut dxu, grid.xface(ii, j), -1.0 / grid.hx);
    let mut dyv = SparseRow::new();
    push(&mut dyv, grid.yface(i, jj + 1), 1.0 / grid.hy);
    push(&mut dyv, grid.yface(i, jj), -1.0 / grid.hy);
    let mut dyu = SparseRow::new();
    ux_center(grid, i, jj + 1, 0.5 / grid.hy, &mut dyu);
    ux_center(grid, i, jj - 1, -0.5 / grid.hy, &mut dyu);
    let mut dxv = SparseRow::new();
    uy_center(grid, ii + 1, j, 0.5 / grid.hx, &mut dxv);
    uy_center(grid, ii - 1, j, -0.5 / grid.hx, &mut dxv);
    [dxu, dyu, dxv, dyv]
}

/// Velocity gradient at every cell centre.
pub fn velocity_gradient(grid: &DomainGrid, u: &FaceField) -> Vec<[f64; 4]> {
    let mut out = Vec::with_capacity(grid.cells());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let rows = velocity_gradient_rows(grid, i, j);
            let mut g = [0.0; 4];
            for (gk, row) in g.iter_mut().zip(rows.iter()) {
                *gk = row.iter().map(|&(k, v)| v * u.data[k]).sum();
            }
            out.push(g);
        }
    }
    out
}

/// `∇u : m⊗m` for a gradient stored as `[∂x u_x, ∂y u_x, ∂x u_y, ∂y u_y]`.
#[inline]
pub fn grad_mm(g: &[f64; 4], m: [f64; 2]) -> f64 {
    g[0] * m[0] * m[0] + (g[1] + g[2]) * m[0] * m[1] + g[3] * m[1] * m[1]
}

/// `t · (∇u) m`.
#[inline]
pub fn t_grad_m(g: &[f64; 4], t: [f64; 2], m: [f64; 2]) -> f64 {
    let gm = [g[0] * m[0] + g[1] * m[1], g[2] * m[0] + g[3] * m[1]];
    t[0] * gm[0] + t[1] * gm[1]
}

/// Quadratic terms `(weight, row)` whose sum `Σ weight (row·u)²` is the
/// discrete Dirichlet energy `‖∇u‖²` of a face field. Wall corners in
/// no-slip mode use the odd ghost value and half the dual-cell weight.
pub fn dirichlet_terms(grid: &DomainGrid) -> Vec<(f64, SparseRow)> {
    let vol = grid.cell_volume();
    let mut out = Vec::new();
    let periodic = grid.is_periodic();
    // u_x: x-differences at centres, y-differences at corners
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let mut r = SparseRow::new();
            push(&mut r, grid.xface(i as isize + 1, j), 1.0 / grid.hx);
            push(&mut r, grid.xface(i as isize, j), -1.0 / grid.hx);
            if !r.is_empty() {
                out.push((vol, r));
            }
        }
    }
    for i in 0..grid.nx {
        if !grid.x_face_active(i) {
            continue;
        }
        let rows = if periodic { 0..grid.ny } else { 0..grid.ny + 1 };
        for j in rows {
            let mut r = SparseRow::new();
            let mut weight = vol;
            if periodic {
                push(&mut r, grid.xface(i as isize, j), 1.0 / grid.hy);
                push(&mut r, grid.xface(i as isize, (j + grid.ny - 1) % grid.ny), -1.0 / grid.hy);
            } else if j == 0 {
                push(&mut r, grid.xface(i as isize, 0), 2.0 / grid.hy);
                weight = 0.5 * vol;
            } else if j == grid.ny {
                push(&mut r, grid.xface(i as isize, grid.ny - 1), -2.0 / grid.hy);
                weight = 0.5 * vol;
            } else {
                push(&mut r, grid.xface(i as isize, j), 1.0 / grid.hy);
                push(&mut r, grid.xface(i as isize, j - 1), -1.0 / grid.hy);
            }
            out.push((weight, r));
        }
    }
    // u_y: y-differences at centres, x-differences at corners
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let mut r = SparseRow::new();
            push(&mut r, grid.yface(i, j as isize + 1), 1.0 / grid.hy);
            push(&mut r, grid.yface(i, j as isize), -1.0 / grid.hy);
            if !r.is_empty() {
                out.push((vol, r));
            }
        }
    }
    for j in 0..grid.ny {
        if !grid.y_face_active(j) {
            continue;
        }
        let cols = if periodic { 0..grid.nx } else { 0..grid.nx + 1 };
        for i in cols {
            let mut r = SparseRow::new();
            let mut weight = vol;
            if periodic {
                push(&mut r, grid.yface(i, j as isize), 1.0 / grid.hx);
                push(&mut r, grid.yface((i + grid.nx - 1) % grid.nx, j as isize), -1.0 / grid.hx);
            } else if i == 0 {
                push(&mut r, grid.yface(0, j as isize), 2.0 / grid.hx);
                weight = 0.5 * vol;
            } else if i == grid.nx {
                push(&mut r, grid.yface(grid.nx - 1, j as isize), -2.0 / grid.hx);
                weight = 0.5 * vol;
            } else {
                push(&mut r, grid.yface(i, j as isize), 1.0 / grid.hx);
                push(&mut r, grid.yface(i - 1, j as isize), -1.0 / grid.hx);
            }
            out.push((weight, r));
        }
    }
    out
}

/// Stiffness matrix of the Dirichlet energy (the negative vector Laplacian
/// scaled by the cell volume).
pub fn stiffness_matrix(grid: &DomainGrid) -> CsrMatrix {
    let mut b = TripletBuilder::new(grid.face_dofs(), grid.face_dofs());
    for (w, r) in dirichlet_terms(grid) {
        b.add_outer(w, &r);
    }
    b.build()
}

/// `‖∇u‖²` in the discrete Dirichlet norm.
pub fn dirichlet_energy(grid: &DomainGrid, u: &FaceField) -> f64 {
    dirichlet_terms(grid)
        .iter()
        .map(|(w, r)| {
            let d: f64 = r.iter().map(|&(k, v)| v * u.data[k]).sum();
            w * d * d
        })
        .sum()
}

/// Discretely divergence-free field from a streamfunction sampled at grid
/// nodes: `u_x = ∂_y s`, `u_y = −∂_x s`. In walled mode `s` must be constant
/// along the boundary.
pub fn curl_of_stream(grid: &DomainGrid, s: impl Fn(f64, f64) -> f64) -> FaceField {
    let mut u = FaceField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (i as f64 * grid.hx, j as f64 * grid.hy);
            if let Some(k) = grid.xface(i as isize, j) {
                u.data[k] = (s(x, y + grid.hy) - s(x, y)) / grid.hy;
            }
            if let Some(k) = grid.yface(i, j as isize) {
                u.data[k] = -(s(x + grid.hx, y) - s(x, y)) / grid.hx;
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BcMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_faces(grid: &DomainGrid, rng: &mut ChaCha8Rng) -> FaceField {
        let mut u = FaceField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if let Some(k) = grid.xface(i as isize, j) {
                    u.data[k] = rng.random_range(-1.0..1.0);
                }
                if let Some(k) = grid.yface(i, j as isize) {
                    u.data[k] = rng.random_range(-1.0..1.0);
                }
            }
        }
        u
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
            let g = DomainGrid::unit(6, bc).unwrap();
            let grad = gradient(&g, &ScalarField::constant(&g, 2.5));
            assert_eq!(grad.max_abs(), 0.0);
        }
    }

    #[test]
    fn gradient_and_divergence_are_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
            let g = DomainGrid::new(6, 5, 1.2, 0.8, bc).unwrap();
            let p = ScalarField {
                nx: 6,
                ny: 5,
                data: (0..30).map(|_| rng.random_range(-1.0..1.0)).collect(),
            };
            let u = random_faces(&g, &mut rng);
            let lhs = gradient(&g, &p).dot(&u, &g) + p.dot(&divergence(&g, &u), &g);
            assert!(lhs.abs() < 1e-13, "{bc:?}: {lhs}");
        }
    }

    #[test]
    fn laplacian_of_linear_periodic_profile_vanishes_in_interior_direction() {
        let g = DomainGrid::unit(8, BcMode::Periodic).unwrap();
        // x-linear in the y direction only: constant along x makes wrap exact
        let p = ScalarField::from_fn(&g, |_, y| (2.0 * std::f64::consts::PI * y).sin());
        let lap = laplacian(&g, &p);
        let h = g.hy;
        let factor = -4.0 / (h * h) * (std::f64::consts::PI * h).sin().powi(2);
        for c in 0..g.cells() {
            assert!((lap.data[c] - factor * p.data[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_matrix_matches_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = DomainGrid::unit(5, BcMode::NoSlipNoFlux).unwrap();
        let u = random_faces(&g, &mut rng);
        let d = divergence_matrix(&g).mul(&u.data);
        let e = divergence(&g, &u);
        for c in 0..g.cells() {
            assert!((d[c] - e.data[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_trace_is_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
            let g = DomainGrid::unit(6, bc).unwrap();
            let u = random_faces(&g, &mut rng);
            let grads = velocity_gradient(&g, &u);
            let div = divergence(&g, &u);
            for c in 0..g.cells() {
                assert!((grads[c][0] + grads[c][3] - div.data[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stream_function_fields_are_divergence_free() {
        use std::f64::consts::PI;
        let g = DomainGrid::unit(12, BcMode::NoSlipNoFlux).unwrap();
        let u = curl_of_stream(&g, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        assert!(divergence_residual(&g, &u) < 1e-12);
        let p = DomainGrid::unit(12, BcMode::Periodic).unwrap();
        let u = curl_of_stream(&p, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).cos());
        assert!(divergence_residual(&p, &u) < 1e-12);
    }

    #[test]
    fn stiffness_is_positive_semidefinite_and_matches_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
            let g = DomainGrid::unit(6, bc).unwrap();
            let k = stiffness_matrix(&g);
            for _ in 0..10 {
                let u = random_faces(&g, &mut rng);
                let q = k.quadratic_form(&u.data);
                assert!(q >= 0.0);
                assert!((q - dirichlet_energy(&g, &u)).abs() < 1e-10 * q.max(1.0));
            }
        }
    }

    #[test]
    fn walled_stiffness_is_the_ghost_cell_laplacian() {
        // near-wall tangential velocity: (u_{j+1} - 3 u_j) / h^2 stencil
        let g = DomainGrid::unit(6, BcMode::NoSlipNoFlux).unwrap();
        let k = stiffness_matrix(&g);
        let vol = g.cell_volume();
        let row = g.xface(2, 0).unwrap();
        let diag = k.get(row, row) / vol;
        let h2 = g.hx * g.hx;
        assert!((diag - (2.0 / h2 + 3.0 / h2)).abs() < 1e-9);
    }
}
