//! Mollified Maier–Saupe potential in moment form.
//!
//! `U[ψ](x, m) = U₀ ∫ J_ε[ψ(·, m̃)](x) (1 − (m·m̃)²) dm̃ = a(x) − B(x) : m⊗m`
//! with `a = U₀ J_ε[ω]` and `B = U₀ J_ε[S]`. Only `(a, B)` are stored.

use crate::field::{ConfigurationField, ScalarField, TensorField2};
use crate::grid::{DomainGrid, OrientationGrid};
use crate::mollifier::MollifierKernel;
use crate::ops::CellFace;
use crate::sphere::moments;

/// Maier–Saupe kernel `K(m, m̃) = 1 − (m·m̃)²`.
pub fn interaction_kernel(m: [f64; 2], mt: [f64; 2]) -> f64 {
    let d = m[0] * mt[0] + m[1] * mt[1];
    1.0 - d * d
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub a: ScalarField,
    pub b: TensorField2,
}

impl PotentialField {
    pub fn zeros(grid: &DomainGrid) -> Self {
        PotentialField {
            a: ScalarField::zeros(grid),
            b: TensorField2::zeros(grid),
        }
    }

    /// `U(x_c, m)`.
    #[inline]
    pub fn value(&self, c: usize, m: [f64; 2]) -> f64 {
        self.a.data[c] - self.b.contract_mm(c, m)
    }

    /// Tangential component of `∇_g U` at `(x_c, m)`: `−2 t·B m`.
    #[inline]
    pub fn tangential_derivative(&self, c: usize, m: [f64; 2], t: [f64; 2]) -> f64 {
        let bm = self.b.apply(c, m);
        -2.0 * (t[0] * bm[0] + t[1] * bm[1])
    }

    /// Difference quotient `(U(x_R, m) − U(x_L, m)) / h` across a face.
    #[inline]
    pub fn face_difference(&self, f: &CellFace, m: [f64; 2]) -> f64 {
        (self.value(f.right, m) - self.value(f.left, m)) / f.spacing
    }

    /// `U` at every node, angle fastest.
    pub fn values(&self, orient: &OrientationGrid) -> Vec<f64> {
        let cells = self.a.data.len();
        let mut out = Vec::with_capacity(cells * orient.len());
        for c in 0..cells {
            for k in 0..orient.len() {
                out.push(self.value(c, orient.m(k)));
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.a.data.iter_mut().for_each(|v| *v *= s);
        out.b.data.iter_mut().for_each(|t| t.iter_mut().for_each(|v| *v *= s));
        out
    }

    pub fn add(&self, other: &PotentialField) -> Self {
        let mut out = self.clone();
        out.a.data.iter_mut().zip(&other.a.data).for_each(|(x, y)| *x += y);
        for (t, o) in out.b.data.iter_mut().zip(&other.b.data) {
            for k in 0..3 {
                t[k] += o[k];
            }
        }
        out
    }
}

/// `U[ψ]` with strength `u0`.
pub fn build_potential(
    kernel: &MollifierKernel,
    grid: &DomainGrid,
    orient: &OrientationGrid,
    psi: &ConfigurationField,
    u0: f64,
) -> PotentialField {
    if u0 == 0.0 {
        return PotentialField::zeros(grid);
    }
    let (omega, s) = moments(grid, orient, psi);
    let mut a = kernel.mollify_scalar(grid, &omega);
    a.data.iter_mut().for_each(|v| *v *= u0);
    let mut b = kernel.mollify_tensor(grid, &s);
    b.data.iter_mut().for_each(|t| t.iter_mut().for_each(|v| *v *= u0));
    PotentialField { a, b }
}

/// Time-averaged potential `½ U[ψ̄ + ψ_prev]` used inside a time step.
pub fn build_half_potential(
    kernel: &MollifierKernel,
    grid: &DomainGrid,
    orient: &OrientationGrid,
    psi_bar: &ConfigurationField,
    psi_prev: &ConfigurationField,
    u0: f64,
) -> PotentialField {
    build_potential(kernel, grid, orient, &psi_bar.add(psi_prev), 0.5 * u0)
}

/// `∇_g U` at every node as vectors, angle fastest.
pub fn grad_g_potential(p: &PotentialField, orient: &OrientationGrid) -> Vec<[f64; 2]> {
    let cells = p.a.data.len();
    let mut out = Vec::with_capacity(cells * orient.len());
    for c in 0..cells {
        for k in 0..orient.len() {
            let (m, t) = (orient.m(k), orient.t(k));
            let g = p.tangential_derivative(c, m, t);
            out.push([g * t[0], g * t[1]]);
        }
    }
    out
}

/// Centred difference of a cell field along one axis; one-sided next to
/// walls.
fn centred_difference(grid: &DomainGrid, f: &[f64], i: usize, j: usize, axis: usize) -> f64 {
    let (n, h, idx) = if axis == 0 {
        (grid.nx, grid.hx, i)
    } else {
        (grid.ny, grid.hy, j)
    };
    let at = |k: usize| {
        if axis == 0 {
            f[grid.cell(k, j)]
        } else {
            f[grid.cell(i, k)]
        }
    };
    match (grid.shift(idx, -1, n), grid.shift(idx, 1, n)) {
        (Some(l), Some(r)) => (at(r) - at(l)) / (2.0 * h),
        (None, Some(r)) => (at(r) - at(idx)) / h,
        (Some(l), None) => (at(idx) - at(l)) / h,
        (None, None) => 0.0,
    }
}

/// `∇_x U(x, m_j) = ∇_h a − ∇_h B : m_j⊗m_j` at cell centres, angle fastest.
pub fn grad_x_potential(
    p: &PotentialField,
    grid: &DomainGrid,
    orient: &OrientationGrid,
) -> Vec<[f64; 2]> {
    let bxx = p.b.component(0);
    let bxy = p.b.component(1);
    let byy = p.b.component(2);
    let mut out = Vec::with_capacity(grid.cells() * orient.len());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let mut grad = [[0.0; 4]; 2];
            for (axis, g) in grad.iter_mut().enumerate() {
                *g = [
                    centred_difference(grid, &p.a.data, i, j, axis),
                    centred_difference(grid, &bxx, i, j, axis),
                    centred_difference(grid, &bxy, i, j, axis),
                    centred_difference(grid, &byy, i, j, axis),
                ];
            }
            for k in 0..orient.len() {
                let m = orient.m(k);
                let v = |g: &[f64; 4]| {
                    g[0] - (g[1] * m[0] * m[0] + 2.0 * g[2] * m[0] * m[1] + g[3] * m[1] * m[1])
                };
                out.push([v(&grad[0]), v(&grad[1])]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BcMode;
    use crate::sphere::{surface_gradient, SpectralCircle};
    use std::f64::consts::PI;

    fn setup(bc: BcMode) -> (DomainGrid, OrientationGrid, MollifierKernel) {
        let g = DomainGrid::unit(12, bc).unwrap();
        let o = OrientationGrid::new(16).unwrap();
        let k = MollifierKernel::new(&g, 0.2).unwrap();
        (g, o, k)
    }

    #[test]
    fn kernel_values() {
        assert_eq!(interaction_kernel([1.0, 0.0], [1.0, 0.0]), 0.0);
        assert_eq!(interaction_kernel([1.0, 0.0], [0.0, 1.0]), 1.0);
    }

    #[test]
    fn isotropic_density_gives_flat_potential() {
        let (g, o, k) = setup(BcMode::Periodic);
        let (c, u0) = (0.4, 2.0);
        let psi = ConfigurationField::constant(&g, &o, c);
        let p = build_potential(&k, &g, &o, &psi, u0);
        for cell in 0..g.cells() {
            for j in 0..o.len() {
                assert!((p.value(cell, o.m(j)) - PI * c * u0).abs() < 1e-12);
            }
        }
        assert!(grad_g_potential(&p, &o).iter().all(|v| v[0].abs() < 1e-12 && v[1].abs() < 1e-12));
        assert!(grad_x_potential(&p, &g, &o).iter().all(|v| v[0].abs() < 1e-10 && v[1].abs() < 1e-10));
    }

    #[test]
    fn cos2_density_potential() {
        let (g, o, k) = setup(BcMode::Periodic);
        let (c, u0) = (0.3, 1.5);
        let psi = ConfigurationField::from_fn(&g, &o, |_, _, phi| c * (1.0 + (2.0 * phi).cos()));
        let p = build_potential(&k, &g, &o, &psi, u0);
        for j in 0..o.len() {
            let phi = o.angle(j);
            let expect = 2.0 * PI * c * u0 - PI * c * u0 * (1.0 + 0.5 * (2.0 * phi).cos());
            assert!((p.value(7, o.m(j)) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_gradient_matches_spectral_derivative() {
        let (g, o, _) = setup(BcMode::Periodic);
        let circle = SpectralCircle::new(&o);
        let mut p = PotentialField::zeros(&g);
        p.a.data[3] = 0.7;
        p.b.data[3] = [1.3, -0.4, 0.2];
        let u: Vec<f64> = (0..o.len()).map(|j| p.value(3, o.m(j))).collect();
        let spectral = surface_gradient(&o, &circle, &u);
        let formula = grad_g_potential(&p, &o);
        for j in 0..o.len() {
            let v = formula[3 * o.len() + j];
            assert!((v[0] - spectral[j][0]).abs() < 1e-12);
            assert!((v[1] - spectral[j][1]).abs() < 1e-12);
            let m = o.m(j);
            assert!((v[0] * m[0] + v[1] * m[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_in_density() {
        let (g, o, k) = setup(BcMode::NoSlipNoFlux);
        let p1 = ConfigurationField::from_fn(&g, &o, |x, y, phi| 1.0 + x * y * phi.cos().powi(2));
        let p2 = ConfigurationField::from_fn(&g, &o, |x, _, phi| x + phi.sin().abs());
        let lhs = build_potential(&k, &g, &o, &p1.add(&p2), 1.0);
        let rhs = build_potential(&k, &g, &o, &p1, 1.0).add(&build_potential(&k, &g, &o, &p2, 1.0));
        for c in 0..g.cells() {
            assert!((lhs.a.data[c] - rhs.a.data[c]).abs() < 1e-12);
            for t in 0..3 {
                assert!((lhs.b.data[c][t] - rhs.b.data[c][t]).abs() < 1e-12);
            }
        }
    }
}
