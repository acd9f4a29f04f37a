//! Calculus on the orientation circle S¹.
//!
//! Angular derivatives are Fourier collocation derivatives on the equispaced
//! nodes, stored as dense `M × M` matrices (M is small). For even `M` the
//! first-derivative matrix annihilates the Nyquist mode; the second-derivative
//! matrix does not, so its kernel is exactly the constants.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{ConfigurationField, ScalarField, TensorField2};
use crate::grid::{DomainGrid, OrientationGrid};

/// Tolerance on `|v·m|` above which a field is not considered tangential.
pub const TANGENTIAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectralCircle {
    m: usize,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl SpectralCircle {
    pub fn new(orient: &OrientationGrid) -> Self {
        let m = orient.len();
        let h = 2.0 * PI / m as f64;
        let mut d1 = vec![0.0; m * m];
        let mut d2 = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                if r == c {
                    d2[r * m + c] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
                } else {
                    let sign = if (r + m - c) % 2 == 0 { 1.0 } else { -1.0 };
                    let half = (r as f64 - c as f64) * h / 2.0;
                    d1[r * m + c] = 0.5 * sign / half.tan();
                    d2[r * m + c] = -0.5 * sign / (half.sin() * half.sin());
                }
            }
        }
        SpectralCircle { m, d1, d2 }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Row-major first-derivative matrix.
    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    /// Row-major second-derivative matrix (symmetric, negative semidefinite).
    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    /// `∂_φ f` at the nodes.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        matvec(&self.d1, f, self.m)
    }

    /// `∂²_φ f` at the nodes.
    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        matvec(&self.d2, f, self.m)
    }

    /// `D₁ᵀ g`, the adjoint of differentiation under the plain sum.
    pub fn derivative_transpose_into(&self, g: &[f64], out: &mut [f64]) {
        let m = self.m;
        out.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..m {
            let gr = g[r];
            if gr == 0.0 {
                continue;
            }
            let row = &self.d1[r * m..(r + 1) * m];
            for c in 0..m {
                out[c] += row[c] * gr;
            }
        }
    }
}

fn matvec(a: &[f64], x: &[f64], m: usize) -> Vec<f64> {
    assert_eq!(x.len(), m, "expected {m} orientation samples");
    (0..m)
        .map(|r| a[r * m..(r + 1) * m].iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// `∫_{S¹} f dH` by the rectangle rule.
pub fn sphere_integrate(orient: &OrientationGrid, f: &[f64]) -> f64 {
    assert_eq!(f.len(), orient.len());
    orient.weight() * f.iter().sum::<f64>()
}

/// Surface gradient `∇_g f = (∂_φ f) t`.
pub fn surface_gradient(
    orient: &OrientationGrid,
    circle: &SpectralCircle,
    f: &[f64],
) -> Vec<[f64; 2]> {
    circle
        .derivative(f)
        .into_iter()
        .enumerate()
        .map(|(j, d)| {
            let t = orient.t(j);
            [d * t[0], d * t[1]]
        })
        .collect()
}

/// Surface divergence of a tangential field, `∂_φ (v·t)`.
pub fn surface_divergence(
    orient: &OrientationGrid,
    circle: &SpectralCircle,
    v: &[[f64; 2]],
) -> Result<Vec<f64>> {
    if v.len() != orient.len() {
        return Err(Error::Shape(format!(
            "expected {} tangential samples, got {}",
            orient.len(),
            v.len()
        )));
    }
    let mut tangential = Vec::with_capacity(v.len());
    for (j, vj) in v.iter().enumerate() {
        let m = orient.m(j);
        let normal = vj[0] * m[0] + vj[1] * m[1];
        if normal.abs() > TANGENTIAL_TOL {
            return Err(Error::Precondition(format!(
                "field is not tangential at node {j}: v·m = {normal:.3e}"
            )));
        }
        let t = orient.t(j);
        tangential.push(vj[0] * t[0] + vj[1] * t[1]);
    }
    Ok(circle.derivative(&tangential))
}

/// Laplace–Beltrami operator `Δ_g f = ∂²_φ f`.
pub fn laplace_beltrami(circle: &SpectralCircle, f: &[f64]) -> Vec<f64> {
    circle.second_derivative(f)
}

/// Zeroth and second orientation moments `ω = ∫ψ dH`, `S = ∫ψ m⊗m dH`.
pub fn moments(
    grid: &DomainGrid,
    orient: &OrientationGrid,
    psi: &ConfigurationField,
) -> (ScalarField, TensorField2) {
    let mut omega = ScalarField::zeros(grid);
    let mut s = TensorField2::zeros(grid);
    let w = orient.weight();
    for c in 0..grid.cells() {
        let cell = psi.cell(c);
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for (k, &p) in cell.iter().enumerate() {
            let m = orient.m(k);
            total += p;
            acc[0] += p * m[0] * m[0];
            acc[1] += p * m[0] * m[1];
            acc[2] += p * m[1] * m[1];
        }
        omega.data[c] = w * total;
        s.data[c] = [w * acc[0], w * acc[1], w * acc[2]];
    }
    (omega, s)
}
