//! Value-semantic containers for the discrete unknowns.

use crate::grid::{DomainGrid, OrientationGrid};

/// Cell-centred scalar samples, `i + nx * j` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &DomainGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &DomainGrid, c: f64) -> Self {
        ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![c; grid.cells()],
        }
    }

    pub fn from_fn(grid: &DomainGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                data.push(f(x, y));
            }
        }
        ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.nx * j]
    }

    /// `Σ f · h_x h_y`.
    pub fn integral(&self, grid: &DomainGrid) -> f64 {
        self.data.iter().sum::<f64>() * grid.cell_volume()
    }

    pub fn dot(&self, other: &ScalarField, grid: &DomainGrid) -> f64 {
        dot(&self.data, &other.data) * grid.cell_volume()
    }

    pub fn norm_l2(&self, grid: &DomainGrid) -> f64 {
        self.dot(self, grid).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// MAC-staggered velocity: normal components on x-faces followed by y-faces.
///
/// Both families are stored with `nx * ny` slots; in walled mode the slot of
/// face index 0 is a wall and stays zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: &DomainGrid) -> Self {
        FaceField {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![0.0; grid.face_dofs()],
        }
    }

    pub fn from_vec(grid: &DomainGrid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.face_dofs());
        FaceField {
            nx: grid.nx,
            ny: grid.ny,
            data,
        }
    }

    pub fn ux(&self) -> &[f64] {
        &self.data[..self.nx * self.ny]
    }

    pub fn uy(&self) -> &[f64] {
        &self.data[self.nx * self.ny..]
    }

    /// Face-sample value, zero on walls.
    #[inline]
    pub fn get(&self, idx: Option<usize>) -> f64 {
        idx.map_or(0.0, |k| self.data[k])
    }

    /// `Σ u·w h_x h_y` over both families.
    pub fn dot(&self, other: &FaceField, grid: &DomainGrid) -> f64 {
        dot(&self.data, &other.data) * grid.cell_volume()
    }

    pub fn norm_l2(&self, grid: &DomainGrid) -> f64 {
        self.dot(self, grid).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Velocity interpolated to cell centres (second-order averaging).
    pub fn centered(&self, grid: &DomainGrid) -> (ScalarField, ScalarField) {
        let mut cx = ScalarField::zeros(grid);
        let mut cy = ScalarField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let c = grid.cell(i, j);
                cx.data[c] = 0.5
                    * (self.get(grid.xface(i as isize, j))
                        + self.get(grid.xface(i as isize + 1, j)));
                cy.data[c] = 0.5
                    * (self.get(grid.yface(i, j as isize))
                        + self.get(grid.yface(i, j as isize + 1)));
            }
        }
        (cx, cy)
    }
}

/// Symmetric 2×2 tensor per cell, stored as `[xx, xy, yy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField2 {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<[f64; 3]>,
}

impl TensorField2 {
    pub fn zeros(grid: &DomainGrid) -> Self {
        TensorField2 {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![[0.0; 3]; grid.cells()],
        }
    }

    /// `T : m⊗m` at cell `c`.
    #[inline]
    pub fn contract_mm(&self, c: usize, m: [f64; 2]) -> f64 {
        let t = self.data[c];
        t[0] * m[0] * m[0] + 2.0 * t[1] * m[0] * m[1] + t[2] * m[1] * m[1]
    }

    #[inline]
    pub fn apply(&self, c: usize, v: [f64; 2]) -> [f64; 2] {
        let t = self.data[c];
        [t[0] * v[0] + t[1] * v[1], t[1] * v[0] + t[2] * v[1]]
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.data.iter().map(|t| t[k]).collect()
    }
}

/// Samples `ψ(x_i, y_j, φ_k)` at cell centres × orientations, angle fastest:
/// index `(i + nx * j) * M + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationField {
    pub nx: usize,
    pub ny: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl ConfigurationField {
    pub fn zeros(grid: &DomainGrid, orient: &OrientationGrid) -> Self {
        Self::constant(grid, orient, 0.0)
    }

    pub fn constant(grid: &DomainGrid, orient: &OrientationGrid, c: f64) -> Self {
        ConfigurationField {
            nx: grid.nx,
            ny: grid.ny,
            m: orient.len(),
            data: vec![c; grid.cells() * orient.len()],
        }
    }

    /// Fills from `f(x, y, φ)`.
    pub fn from_fn(
        grid: &DomainGrid,
        orient: &OrientationGrid,
        mut f: impl FnMut(f64, f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid, orient);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                let c = grid.cell(i, j);
                for k in 0..orient.len() {
                    out.data[c * orient.len() + k] = f(x, y, orient.angle(k));
                }
            }
        }
        out
    }

    pub fn from_vec(grid: &DomainGrid, orient: &OrientationGrid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.cells() * orient.len());
        ConfigurationField {
            nx: grid.nx,
            ny: grid.ny,
            m: orient.len(),
            data,
        }
    }

    #[inline]
    pub fn cell(&self, c: usize) -> &[f64] {
        &self.data[c * self.m..(c + 1) * self.m]
    }

    #[inline]
    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.m..(c + 1) * self.m]
    }

    pub fn same_shape(&self, other: &ConfigurationField) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.m == other.m
    }

    pub fn matches(&self, grid: &DomainGrid, orient: &OrientationGrid) -> bool {
        self.nx == grid.nx && self.ny == grid.ny && self.m == orient.len()
    }

    /// `∫∫ ψ dH dx` by cell × rectangle-rule quadrature.
    pub fn mass(&self, grid: &DomainGrid, orient: &OrientationGrid) -> f64 {
        self.data.iter().sum::<f64>() * grid.cell_volume() * orient.weight()
    }

    pub fn norm_l1(&self, grid: &DomainGrid, orient: &OrientationGrid) -> f64 {
        self.data.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume() * orient.weight()
    }

    pub fn norm_l2(&self, grid: &DomainGrid, orient: &OrientationGrid) -> f64 {
        (dot(&self.data, &self.data) * grid.cell_volume() * orient.weight()).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &ConfigurationField) -> ConfigurationField {
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b);
        out
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
