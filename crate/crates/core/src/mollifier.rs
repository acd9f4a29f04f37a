//! Isotropic bump-function mollifier `J_ε` sampled on the cell grid.
//!
//! The stencil holds `ζ(x/ε)` with `ζ(x) = exp(−1/(1 − |x|²))` on the
//! `(2r+1)²` patch of cell offsets, scaled so that its discrete mass is one.
//! Walled domains truncate the sum to Ω; periodic domains wrap.

use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField2};
use crate::grid::DomainGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct MollifierKernel {
    eps: f64,
    rx: usize,
    ry: usize,
    /// Row-major over offsets `(di, dj)`, `di` fastest.
    stencil: Vec<f64>,
    normalization: f64,
}

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

impl MollifierKernel {
    pub fn new(grid: &DomainGrid, eps: f64) -> Result<Self> {
        let h = grid.hx.max(grid.hy);
        if !(eps.is_finite() && eps >= h) {
            return Err(Error::Config(format!(
                "mollifier radius {eps} is below one cell width {h}"
            )));
        }
        let rx = (eps / grid.hx).ceil() as usize;
        let ry = (eps / grid.hy).ceil() as usize;
        let mut stencil = Vec::with_capacity((2 * rx + 1) * (2 * ry + 1));
        for dj in -(ry as isize)..=ry as isize {
            for di in -(rx as isize)..=rx as isize {
                let x = di as f64 * grid.hx / eps;
                let y = dj as f64 * grid.hy / eps;
                stencil.push(bump(x * x + y * y));
            }
        }
        let raw: f64 = stencil.iter().sum::<f64>() * grid.cell_volume();
        let normalization = 1.0 / raw;
        stencil.iter_mut().for_each(|v| *v *= normalization);
        Ok(MollifierKernel {
            eps,
            rx,
            ry,
            stencil,
            normalization,
        })
    }

    /// Copy with every weight multiplied by `factor`; used by the self-check
    /// to confirm that a broken normalization is detected.
    pub fn rescaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.stencil.iter_mut().for_each(|v| *v *= factor);
        out.normalization *= factor;
        out
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// Half-widths of the stencil in cells.
    pub fn radius(&self) -> (usize, usize) {
        (self.rx, self.ry)
    }

    /// Constant `c` in `ζ_ε = c·ζ(·/ε)` (discrete, in inverse area units).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Weight at cell offset `(di, dj)`.
    pub fn weight(&self, di: isize, dj: isize) -> f64 {
        if di.unsigned_abs() > self.rx || dj.unsigned_abs() > self.ry {
            return 0.0;
        }
        let w = 2 * self.rx + 1;
        self.stencil[(di + self.rx as isize) as usize + w * (dj + self.ry as isize) as usize]
    }

    /// `Σ stencil · hx · hy`.
    pub fn discrete_mass(&self, grid: &DomainGrid) -> f64 {
        self.stencil.iter().sum::<f64>() * grid.cell_volume()
    }

    /// Largest weight; `|J_ε f| ≤ max_weight · ‖f‖_{L¹}`.
    pub fn max_weight(&self) -> f64 {
        self.stencil.iter().copied().fold(0.0, f64::max)
    }

    /// Constant in `|δ_h J_ε f| ≤ C ‖f‖_{L¹}` for the centred difference
    /// quotient `δ_h` in either direction.
    pub fn difference_bound(&self, grid: &DomainGrid) -> f64 {
        let (rx, ry) = (self.rx as isize, self.ry as isize);
        let mut best: f64 = 0.0;
        for dj in -ry - 1..=ry + 1 {
            for di in -rx - 1..=rx + 1 {
                let gx = (self.weight(di + 1, dj) - self.weight(di - 1, dj)).abs() / (2.0 * grid.hx);
                let gy = (self.weight(di, dj + 1) - self.weight(di, dj - 1)).abs() / (2.0 * grid.hy);
                best = best.max(gx).max(gy);
            }
        }
        best
    }

    fn convolve(&self, grid: &DomainGrid, f: &[f64], out: &mut [f64]) {
        let (rx, ry) = (self.rx as isize, self.ry as isize);
        let vol = grid.cell_volume();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let mut acc = 0.0;
                for dj in -ry..=ry {
                    let Some(jj) = grid.shift(j, dj, grid.ny) else {
                        continue;
                    };
                    for di in -rx..=rx {
                        let Some(ii) = grid.shift(i, di, grid.nx) else {
                            continue;
                        };
                        let w = self.weight(di, dj);
                        if w != 0.0 {
                            acc += w * f[grid.cell(ii, jj)];
                        }
                    }
                }
                out[grid.cell(i, j)] = acc * vol;
            }
        }
    }

    /// `J_ε f`.
    pub fn mollify_scalar(&self, grid: &DomainGrid, f: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(grid);
        self.convolve(grid, &f.data, &mut out.data);
        out
    }

    /// Componentwise `J_ε` of a symmetric tensor field.
    pub fn mollify_tensor(&self, grid: &DomainGrid, t: &TensorField2) -> TensorField2 {
        let mut out = TensorField2::zeros(grid);
        let mut buf = vec![0.0; grid.cells()];
        for k in 0..3 {
            self.convolve(grid, &t.component(k), &mut buf);
            for (dst, v) in out.data.iter_mut().zip(&buf) {
                dst[k] = *v;
            }
        }
        out
    }
}
