//! Cartesian cell grid on the rectangle and the equispaced orientation grid on S¹.
//!
//! Cells are indexed `i + nx * j` (x fastest). Face `i` of the x-family sits at
//! `x = i * hx` and separates cells `i - 1` and `i`; likewise for y-faces. In
//! no-slip mode faces `0` of both families lie on the wall and carry no unknown,
//! and the opposite wall face (`nx` resp. `ny`) is not stored at all.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    /// Velocity vanishes on the walls, zero normal flux for scalars.
    #[serde(rename = "no_slip_noflux")]
    NoSlipNoFlux,
    /// Doubly periodic torus.
    Periodic,
}

impl BcMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BcMode::NoSlipNoFlux => "no_slip_noflux",
            BcMode::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "no_slip_noflux" => Some(BcMode::NoSlipNoFlux),
            "periodic" => Some(BcMode::Periodic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
    pub bc: BcMode,
}

impl DomainGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, bc: BcMode) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::Config(format!(
                "grid needs at least 4 cells per direction, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::Config(format!(
                "domain extents must be positive, got {lx} x {ly}"
            )));
        }
        Ok(DomainGrid {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
            bc,
        })
    }

    /// Unit square with `n x n` cells.
    pub fn unit(n: usize, bc: BcMode) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0, bc)
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn is_periodic(&self) -> bool {
        self.bc == BcMode::Periodic
    }

    /// Cell centre coordinates.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx, (j as f64 + 0.5) * self.hy)
    }

    /// Neighbouring index `i + d` along an axis with `n` cells, or `None` when
    /// it falls outside a walled domain.
    #[inline]
    pub fn shift(&self, i: usize, d: isize, n: usize) -> Option<usize> {
        let k = i as isize + d;
        if self.is_periodic() {
            Some(k.rem_euclid(n as isize) as usize)
        } else if k < 0 || k >= n as isize {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Whether x-face `i` (any row) carries an unknown.
    #[inline]
    pub fn x_face_active(&self, i: usize) -> bool {
        self.is_periodic() || i != 0
    }

    #[inline]
    pub fn y_face_active(&self, j: usize) -> bool {
        self.is_periodic() || j != 0
    }

    /// Number of stored velocity samples (both families).
    pub fn face_dofs(&self) -> usize {
        2 * self.cells()
    }

    /// Global velocity index of x-face `(i, j)`; `i` may equal `nx` in walled
    /// mode, in which case the face is a wall and `None` is returned.
    #[inline]
    pub fn xface(&self, i: isize, j: usize) -> Option<usize> {
        let nx = self.nx as isize;
        if self.is_periodic() {
            Some(self.cell(i.rem_euclid(nx) as usize, j))
        } else if i <= 0 || i >= nx {
            None
        } else {
            Some(self.cell(i as usize, j))
        }
    }

    #[inline]
    pub fn yface(&self, i: usize, j: isize) -> Option<usize> {
        let ny = self.ny as isize;
        if self.is_periodic() {
            Some(self.cells() + self.cell(i, j.rem_euclid(ny) as usize))
        } else if j <= 0 || j >= ny {
            None
        } else {
            Some(self.cells() + self.cell(i, j as usize))
        }
    }
}

/// Equispaced nodes `φ_j = 2πj/M` on the unit circle with the rectangle rule.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationGrid {
    m: usize,
    weight: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl OrientationGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::Config(format!(
                "orientation grid needs an even number of angles >= 4, got {m}"
            )));
        }
        let step = 2.0 * PI / m as f64;
        let (cos, sin) = (0..m)
            .map(|j| {
                let phi = step * j as f64;
                (phi.cos(), phi.sin())
            })
            .unzip();
        Ok(OrientationGrid {
            m,
            weight: step,
            cos,
            sin,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Quadrature weight `2π/M`.
    #[inline]
    pub fn weight(&self) -> f64 {
        self.weight
    }

    #[inline]
    pub fn angle(&self, j: usize) -> f64 {
        self.weight * j as f64
    }

    /// Unit orientation `m_j`.
    #[inline]
    pub fn m(&self, j: usize) -> [f64; 2] {
        [self.cos[j], self.sin[j]]
    }

    /// Unit tangent `t_j = (-sin φ_j, cos φ_j)`.
    #[inline]
    pub fn t(&self, j: usize) -> [f64; 2] {
        [-self.sin[j], self.cos[j]]
    }
}
