//! Initial data: reproducible presets and the two regularizing
//! initialization problems (screened projection of the velocity, cut-off of
//! the density).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ConfigurationField, FaceField};
use crate::flow::{face_slot_active, solve_saddle, FlowState, FlowTolerances};
use crate::grid::{DomainGrid, OrientationGrid};
use crate::ops::{curl_of_stream, divergence_matrix, stiffness_matrix};
use crate::regularization::Cutoff;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Orientation profile of the initial density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityPreset {
    Isotropic,
    /// `∝ exp(κ cos 2(φ − axis))`, normalized to the isotropic mass.
    Nematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityPreset {
    Zero,
    /// Single cell-filling vortex from `s = A sin²(πx/Lx) sin²(πy/Ly)`.
    Vortex,
}

/// Full description of reproducible initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub preset: DensityPreset,
    /// Density `c`; the isotropic state is `ψ ≡ c`, `ω = 2πc`.
    pub density: f64,
    pub axis: f64,
    pub sharpness: f64,
    /// Relative amplitude of the smooth random perturbation (0 disables it).
    pub amplitude: f64,
    pub seed: u64,
    pub velocity: VelocityPreset,
    pub velocity_amplitude: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            preset: DensityPreset::Isotropic,
            density: 1.0 / (2.0 * PI),
            axis: 0.0,
            sharpness: 2.0,
            amplitude: 0.0,
            seed: 0,
            velocity: VelocityPreset::Zero,
            velocity_amplitude: 0.0,
        }
    }
}

/// A smooth random field on the domain, `|ξ| ≤ 1`, built from a handful of
/// low Fourier modes with ChaCha8-drawn coefficients and phases.
struct SmoothNoise {
    modes: Vec<(f64, f64, f64, f64, f64)>,
    total: f64,
}

impl SmoothNoise {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut modes = Vec::new();
        for kx in 0..=2 {
            for ky in 0..=2 {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let a: f64 = rng.random_range(-1.0..1.0);
                let px: f64 = rng.random_range(0.0..2.0 * PI);
                let py: f64 = rng.random_range(0.0..2.0 * PI);
                modes.push((a, kx as f64, ky as f64, px, py));
            }
        }
        let total = modes.iter().map(|m| m.0.abs()).sum::<f64>().max(1e-300);
        SmoothNoise { modes, total }
    }

    fn eval(&self, grid: &DomainGrid, x: f64, y: f64) -> f64 {
        let (sx, sy) = (2.0 * PI / grid.lx, 2.0 * PI / grid.ly);
        self.modes
            .iter()
            .map(|&(a, kx, ky, px, py)| a * (sx * kx * x + px).cos() * (sy * ky * y + py).cos())
            .sum::<f64>()
            / self.total
    }
}

/// Initial density `ψ₀` of a preset. The perturbation modulates the local
/// density by `1 + amplitude·ξ₁(x)` and, for the nematic preset, rotates the
/// local axis by `amplitude·(π/4)·ξ₂(x)`.
pub fn initial_density(
    grid: &DomainGrid,
    orient: &OrientationGrid,
    init: &InitialData,
) -> Result<ConfigurationField> {
    if !(init.density >= 0.0 && init.density.is_finite()) {
        return Err(Error::Config(format!("initial density {} must be >= 0", init.density)));
    }
    if !(init.amplitude >= 0.0 && init.amplitude < 1.0) {
        return Err(Error::Config(format!(
            "perturbation amplitude {} must lie in [0, 1)",
            init.amplitude
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
    let density_noise = SmoothNoise::new(&mut rng);
    let axis_noise = SmoothNoise::new(&mut rng);
    let w = orient.weight();
    let profile = |axis: f64| -> Vec<f64> {
        match init.preset {
            DensityPreset::Isotropic => vec![1.0; orient.len()],
            DensityPreset::Nematic => {
                let raw: Vec<f64> = (0..orient.len())
                    .map(|k| (init.sharpness * (2.0 * (orient.angle(k) - axis)).cos()).exp())
                    .collect();
                let norm = w * raw.iter().sum::<f64>() / (2.0 * PI);
                raw.into_iter().map(|v| v / norm).collect()
            }
        }
    };
    let mut psi = ConfigurationField::zeros(grid, orient);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.center(i, j);
            let (scale, axis) = if init.amplitude > 0.0 {
                (
                    1.0 + init.amplitude * density_noise.eval(grid, x, y),
                    init.axis + init.amplitude * 0.25 * PI * axis_noise.eval(grid, x, y),
                )
            } else {
                (1.0, init.axis)
            };
            let prof = profile(axis);
            let c = grid.cell(i, j);
            for (dst, p) in psi.cell_mut(c).iter_mut().zip(prof) {
                *dst = init.density * scale * p;
            }
        }
    }
    Ok(psi)
}

/// Initial velocity `u₀` of a preset (discretely divergence-free).
pub fn initial_velocity(grid: &DomainGrid, init: &InitialData) -> FaceField {
    match init.velocity {
        VelocityPreset::Zero => FaceField::zeros(grid),
        VelocityPreset::Vortex => {
            let a = init.velocity_amplitude * grid.lx.min(grid.ly) / PI;
            let (lx, ly) = (grid.lx, grid.ly);
            curl_of_stream(grid, |x, y| {
                a * (PI * x / lx).sin().powi(2) * (PI * y / ly).sin().powi(2)
            })
        }
    }
}

/// Solves `⟨u⁰, w⟩ + L⁻¹⟨∇u⁰, ∇w⟩ = ⟨u₀, w⟩` over discretely
/// divergence-free `w`.
pub fn initialize_velocity(
    grid: &DomainGrid,
    u0: &FaceField,
    cutoff: &Cutoff,
    tol: FlowTolerances,
) -> Result<FlowState> {
    let vol = grid.cell_volume();
    let n = grid.face_dofs();
    let mut mass = TripletBuilder::new(n, n);
    for k in 0..n {
        mass.add(k, k, vol);
    }
    let a = CsrMatrix::combine(1.0, &mass.build(), 1.0 / cutoff.level(), &stiffness_matrix(grid));
    let f: Vec<f64> = u0
        .data
        .iter()
        .enumerate()
        .map(|(k, v)| if face_slot_active(grid, k) { vol * v } else { 0.0 })
        .collect();
    let b = divergence_matrix(grid).scaled(vol);
    solve_saddle(grid, &a, &b, &f, 1.0, 1.0 / cutoff.level(), tol, None)
}

/// `ψ⁰ = Q^L(ψ₀)`; rejects negative input.
pub fn initialize_config(psi0: &ConfigurationField, cutoff: &Cutoff) -> Result<ConfigurationField> {
    if let Some(v) = psi0.data.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Precondition(format!(
            "initial density must be nonnegative, found {v}"
        )));
    }
    let mut out = psi0.clone();
    out.data.iter_mut().for_each(|v| *v = cutoff.q(*v));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BcMode;
    use crate::ops::{dirichlet_energy, divergence_residual};
    use crate::sphere::moments;

    fn tol() -> FlowTolerances {
        FlowTolerances { linear: 1e-10, div: 1e-10 }
    }

    #[test]
    fn presets_have_isotropic_mass() {
        let g = DomainGrid::unit(8, BcMode::Periodic).unwrap();
        let o = OrientationGrid::new(16).unwrap();
        let init = InitialData { preset: DensityPreset::Nematic, density: 0.3, sharpness: 3.0, ..InitialData::default() };
        let psi = initial_density(&g, &o, &init).unwrap();
        let (omega, s) = moments(&g, &o, &psi);
        assert!(omega.data.iter().all(|w| (w - 2.0 * PI * 0.3).abs() < 1e-12));
        assert!(s.data[0][0] > s.data[0][2]);
    }

    #[test]
    fn perturbations_are_seeded() {
        let g = DomainGrid::unit(8, BcMode::NoSlipNoFlux).unwrap();
        let o = OrientationGrid::new(8).unwrap();
        let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 42, ..InitialData::default() };
        let a = initial_density(&g, &o, &init).unwrap();
        let b = initial_density(&g, &o, &init).unwrap();
        assert_eq!(a, b);
        assert!(a.min() > 0.0);
        let c = initial_density(&g, &o, &InitialData { seed: 43, ..init }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn vortex_is_solenoidal() {
        for bc in [BcMode::Periodic, BcMode::NoSlipNoFlux] {
            let g = DomainGrid::unit(10, bc).unwrap();
            let init = InitialData { velocity: VelocityPreset::Vortex, velocity_amplitude: 1.0, ..InitialData::default() };
            let u = initial_velocity(&g, &init);
            assert!(divergence_residual(&g, &u) < 1e-12);
            assert!(u.max_abs() > 0.1);
        }
    }

    #[test]
    fn screened_projection_bounds() {
        let g = DomainGrid::unit(10, BcMode::NoSlipNoFlux).unwrap();
        let init = InitialData { velocity: VelocityPreset::Vortex, velocity_amplitude: 1.0, ..InitialData::default() };
        let u0 = initial_velocity(&g, &init);
        let mut last = f64::INFINITY;
        for l in [10.0, 100.0, 1000.0] {
            let cut = Cutoff::new(l).unwrap();
            let st = initialize_velocity(&g, &u0, &cut, tol()).unwrap();
            let lhs = st.u.dot(&st.u, &g) + dirichlet_energy(&g, &st.u) / l;
            assert!(lhs <= u0.dot(&u0, &g) + 1e-10);
            let mut diff = st.u.clone();
            diff.data.iter_mut().zip(&u0.data).for_each(|(a, b)| *a -= b);
            let err = diff.norm_l2(&g);
            assert!(err < last);
            last = err;
        }
        let zero = initialize_velocity(&g, &FaceField::zeros(&g), &Cutoff::new(10.0).unwrap(), tol()).unwrap();
        assert_eq!(zero.u.max_abs(), 0.0);
    }

    #[test]
    fn density_cutoff() {
        let g = DomainGrid::unit(4, BcMode::Periodic).unwrap();
        let o = OrientationGrid::new(4).unwrap();
        let cut = Cutoff::new(5.0).unwrap();
        let mut psi = ConfigurationField::constant(&g, &o, 1.0);
        assert_eq!(initialize_config(&psi, &cut).unwrap(), psi);
        psi.data[7] = 15.0;
        let out = initialize_config(&psi, &cut).unwrap();
        assert_eq!(out.data[7], 5.0);
        assert!(out.mass(&g, &o) <= psi.mass(&g, &o));
        psi.data[2] = -1.0;
        assert!(initialize_config(&psi, &cut).is_err());
    }
}
