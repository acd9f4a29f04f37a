//! Run configuration files (TOML). Every key maps one-to-one onto a field of
//! [`Params`], the grid, the initial data, or the output settings.
//!
//! Required keys: `time.tau`, `time.t_final`, `grid.nx`, `grid.ny`.
//! Everything else has a default:
//!
//! | key | default |
//! |---|---|
//! | `model.re`, `model.de` | 1, 1 |
//! | `model.gamma` | 0.5 |
//! | `model.alpha`, `model.potential_strength` | 0, 0 |
//! | `model.epsilon` | 0.1 |
//! | `model.cutoff` | 10 |
//! | `grid.lx`, `grid.ly` | 1, 1 |
//! | `grid.angles` | 32 |
//! | `grid.bc_mode` | `"no_slip_noflux"` (or `"periodic"`) |
//! | `solver.tol_fp` | 1e-8 |
//! | `solver.tol_linear`, `solver.tol_div` | 1e-10, 1e-10 |
//! | `solver.max_picard` | 50 |
//! | `solver.damping` | 1 |
//! | `initial.preset` | `"isotropic"` (or `"nematic"`) |
//! | `initial.density` | 1/(2π) |
//! | `initial.axis`, `initial.sharpness` | 0, 2 |
//! | `initial.amplitude`, `initial.seed` | 0, 0 |
//! | `initial.velocity`, `initial.velocity_amplitude` | `"zero"` (or `"vortex"`), 0 |
//! | `output.out_dir` | `"out"` |
//! | `output.snapshot_every` | 0 (no snapshots) |
//! | `output.store_full_psi` | false |

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BcMode, DomainGrid};
use crate::init::{initial_density, DensityPreset, InitialData, VelocityPreset};
use crate::params::{Params, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub re: f64,
    pub de: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub potential_strength: f64,
    pub cutoff: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = Params::default();
        ModelSection {
            re: p.re,
            de: p.de,
            gamma: p.gamma,
            alpha: p.alpha,
            epsilon: p.epsilon,
            potential_strength: p.potential_strength,
            cutoff: p.cutoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub tau: f64,
    pub t_final: f64,
}

fn one() -> f64 {
    1.0
}

fn default_angles() -> usize {
    32
}

fn default_bc() -> BcMode {
    BcMode::NoSlipNoFlux
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_bc")]
    pub bc_mode: BcMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol_fp: f64,
    pub tol_linear: f64,
    pub tol_div: f64,
    pub max_picard: usize,
    pub damping: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let p = Params::default();
        SolverSection {
            tol_fp: p.tol_fp,
            tol_linear: p.tol_linear,
            tol_div: p.tol_div,
            max_picard: p.max_picard,
            damping: p.damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub preset: DensityPreset,
    pub density: f64,
    pub axis: f64,
    pub sharpness: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub velocity: VelocityPreset,
    pub velocity_amplitude: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialData::default().into()
    }
}

impl From<InitialData> for InitialSection {
    fn from(d: InitialData) -> Self {
        InitialSection {
            preset: d.preset,
            density: d.density,
            axis: d.axis,
            sharpness: d.sharpness,
            amplitude: d.amplitude,
            seed: d.seed,
            velocity: d.velocity,
            velocity_amplitude: d.velocity_amplitude,
        }
    }
}

impl From<&InitialSection> for InitialData {
    fn from(s: &InitialSection) -> Self {
        InitialData {
            preset: s.preset,
            density: s.density,
            axis: s.axis,
            sharpness: s.sharpness,
            amplitude: s.amplitude,
            seed: s.seed,
            velocity: s.velocity,
            velocity_amplitude: s.velocity_amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub out_dir: PathBuf,
    /// Snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub store_full_psi: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            out_dir: PathBuf::from("out"),
            snapshot_every: 0,
            store_full_psi: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    pub time: TimeSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line assigning `key`, or 0.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(0, |n| n + 1)
}

impl RunConfig {
    /// A config with every optional key at its default.
    pub fn minimal(nx: usize, ny: usize, tau: f64, t_final: f64) -> Self {
        RunConfig {
            model: ModelSection::default(),
            time: TimeSection { tau, t_final },
            grid: GridSection {
                nx,
                ny,
                lx: 1.0,
                ly: 1.0,
                angles: default_angles(),
                bc_mode: default_bc(),
            },
            solver: SolverSection::default(),
            initial: InitialSection::default(),
            output: OutputSection::default(),
        }
    }

    /// The standard perturbed-nematic benchmark on an `n × n` walled unit
    /// square: extensile activity `α = −1`, `U₀ = 1`, `ε = 1/8`, a nematic
    /// along x with a 30% smooth perturbation (seed 1) and a vortex of
    /// amplitude 0.5. Needs `n ≥ 16` so that `ε ≥ 2h`.
    pub fn benchmark(n: usize, angles: usize, tau: f64, steps: usize) -> Self {
        let mut cfg = Self::minimal(n, n, tau, tau * steps as f64);
        cfg.grid.angles = angles;
        cfg.model.alpha = -1.0;
        cfg.model.potential_strength = 1.0;
        cfg.model.epsilon = 0.125;
        cfg.initial = InitialSection {
            preset: DensityPreset::Nematic,
            amplitude: 0.3,
            seed: 1,
            velocity: VelocityPreset::Vortex,
            velocity_amplitude: 0.5,
            ..InitialSection::default()
        };
        cfg
    }

    pub fn params(&self) -> Params {
        let (m, s) = (&self.model, &self.solver);
        Params {
            re: m.re,
            de: m.de,
            gamma: m.gamma,
            alpha: m.alpha,
            epsilon: m.epsilon,
            potential_strength: m.potential_strength,
            cutoff: m.cutoff,
            tau: self.time.tau,
            t_final: self.time.t_final,
            tol_fp: s.tol_fp,
            tol_linear: s.tol_linear,
            tol_div: s.tol_div,
            max_picard: s.max_picard,
            damping: s.damping,
        }
    }

    pub fn initial_data(&self) -> InitialData {
        (&self.initial).into()
    }

    pub fn grid(&self) -> Result<DomainGrid> {
        let g = &self.grid;
        DomainGrid::new(g.nx, g.ny, g.lx, g.ly, g.bc_mode)
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.params(), self.grid()?, self.grid.angles)
    }

    /// Every invariant of the parameters, grid and initial data.
    pub fn validate(&self) -> Result<()> {
        let pr = self.problem()?;
        initial_density(&pr.grid, &pr.orient, &self.initial_data())?;
        Ok(())
    }

    /// Parses and validates; errors carry the line of the offending key.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate().map_err(|e| {
            let message = match e {
                Error::Config(m) | Error::Domain(m) => m,
                other => other.to_string(),
            };
            let key = message.split([' ', '=']).next().unwrap_or("");
            Error::Parse {
                path: path.to_path_buf(),
                line: line_of_key(text, key),
                message,
            }
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config is always representable in TOML")
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml(&text, path)
}
