//! Nondimensional model constants, solver tolerances, and the bundle of
//! precomputed discretization objects shared by every solve.

use crate::error::{Error, Result};
use crate::grid::{DomainGrid, OrientationGrid};
use crate::mollifier::MollifierKernel;
use crate::regularization::Cutoff;
use crate::sphere::SpectralCircle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Reynolds number.
    pub re: f64,
    /// Deborah number.
    pub de: f64,
    /// Solvent viscosity fraction, `0 < γ < 1`.
    pub gamma: f64,
    /// Activity; contractile for `α > 0`.
    pub alpha: f64,
    /// Mollifier radius.
    pub epsilon: f64,
    /// Interaction strength `U₀`.
    pub potential_strength: f64,
    /// Cut-off level `L > 1`.
    pub cutoff: f64,
    pub tau: f64,
    pub t_final: f64,
    pub tol_fp: f64,
    pub tol_linear: f64,
    pub tol_div: f64,
    pub max_picard: usize,
    /// Picard relaxation `θ_d ∈ (0, 1]`.
    pub damping: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            re: 1.0,
            de: 1.0,
            gamma: 0.5,
            alpha: 0.0,
            epsilon: 0.1,
            potential_strength: 0.0,
            cutoff: 10.0,
            tau: 5e-3,
            t_final: 0.05,
            tol_fp: 1e-8,
            tol_linear: 1e-10,
            tol_div: 1e-10,
            max_picard: 50,
            damping: 1.0,
        }
    }
}

impl Params {
    /// Checks every hard invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, rule: &str, v: f64| {
            Err(Error::Config(format!("{key} = {v} violates {rule}")))
        };
        let nonneg = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(key, &format!("{key} >= 0"), v)
            }
        };
        nonneg("re", self.re)?;
        nonneg("de", self.de)?;
        nonneg("epsilon", self.epsilon)?;
        nonneg("potential_strength", self.potential_strength)?;
        if !(self.de > 0.0) {
            return bad("de", "de > 0 (it divides the diffusion terms)", self.de);
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", "0 < γ < 1", self.gamma);
        }
        if !self.alpha.is_finite() {
            return bad("alpha", "a finite activity", self.alpha);
        }
        if !(self.cutoff > 1.0 && self.cutoff.is_finite()) {
            return bad("cutoff", "L > 1", self.cutoff);
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau", "τ > 0", self.tau);
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad("t_final", "T >= 0", self.t_final);
        }
        self.steps()?;
        for (key, v) in [
            ("tol_fp", self.tol_fp),
            ("tol_linear", self.tol_linear),
            ("tol_div", self.tol_div),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(key, "0 < tol < 1", v);
            }
        }
        if self.max_picard == 0 {
            return Err(Error::Config("max_picard must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", "0 < θ_d <= 1", self.damping);
        }
        Ok(())
    }

    /// Number of steps `N = T/τ`; errors unless the ratio is integral.
    pub fn steps(&self) -> Result<usize> {
        let ratio = self.t_final / self.tau;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "t_final / tau = {ratio} is not an integer step count"
            )));
        }
        Ok(n as usize)
    }

    /// Advisory messages for parameter combinations outside the regime in
    /// which the discrete scheme is known to be well behaved. `mass_l1` is
    /// `‖ψ₀‖_{L¹}`.
    pub fn warnings(&self, mass_l1: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.tau * self.cutoff > 0.1 {
            out.push(format!(
                "tau * cutoff = {:.3e} exceeds 0.1; the time step may be too coarse for this cut-off level",
                self.tau * self.cutoff
            ));
        }
        if self.tau * mass_l1 * mass_l1 > 1.0 {
            out.push(format!(
                "tau * |psi0|_1^2 = {:.3e} exceeds 1; the fixed-point iteration may fail to converge",
                self.tau * mass_l1 * mass_l1
            ));
        }
        out
    }
}

/// Grids, angular calculus, mollifier and cut-off for one run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: Params,
    pub grid: DomainGrid,
    pub orient: OrientationGrid,
    pub circle: SpectralCircle,
    pub kernel: MollifierKernel,
    pub cutoff: Cutoff,
}

impl Problem {
    /// Validates `params` and requires `ε ≥ 2h`.
    pub fn new(params: Params, grid: DomainGrid, angles: usize) -> Result<Self> {
        params.validate()?;
        let h = grid.hx.max(grid.hy);
        if params.epsilon < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "epsilon = {} must be at least two cell widths (2h = {})",
                params.epsilon,
                2.0 * h
            )));
        }
        Self::with_kernel_radius(params, grid, angles)
    }

    /// As [`Problem::new`] but only requires the mollifier to span one cell.
    pub fn with_kernel_radius(params: Params, grid: DomainGrid, angles: usize) -> Result<Self> {
        params.validate()?;
        if params.re == 0.0 && grid.is_periodic() {
            return Err(Error::Config(
                "re = 0 leaves the mean velocity undetermined on a periodic domain".into(),
            ));
        }
        let orient = OrientationGrid::new(angles)?;
        let circle = SpectralCircle::new(&orient);
        let kernel = MollifierKernel::new(&grid, params.epsilon)?;
        let cutoff = Cutoff::new(params.cutoff)?;
        Ok(Problem {
            params,
            grid,
            orient,
            circle,
            kernel,
            cutoff,
        })
    }

    /// `hx · hy · w`, the quadrature weight of one configuration node.
    #[inline]
    pub fn node_weight(&self) -> f64 {
        self.grid.cell_volume() * self.orient.weight()
    }

    pub fn config_len(&self) -> usize {
        self.grid.cells() * self.orient.len()
    }
}
