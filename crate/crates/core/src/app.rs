//! `run` and `check` commands with stable exit codes.
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 2 | invalid configuration or usage |
//! | 3 | I/O failure |
//! | 4 | fixed-point iteration did not converge |
//! | 5 | linear solver failure (including an indefinite velocity block) |
//! | 6 | mass conservation violated |
//! | 7 | a self-check suite failed |
//! | 8 | any other numerical error |

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;

use crate::check::{format_table, run_checks, CheckOptions};
use crate::config::{parse_config, RunConfig};
use crate::driver::Simulation;
use crate::error::{Error, Result};
use crate::init::{initial_density, initial_velocity};
use crate::output::{write_snapshot, LedgerWriter, Manifest, LEDGER_FILE, MANIFEST_FILE, SNAPSHOT_DIR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;
pub const EXIT_CONSERVATION: i32 = 6;
pub const EXIT_CHECK: i32 = 7;
pub const EXIT_NUMERICAL: i32 = 8;

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) | Error::Parse { .. } => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::SolverFailure(_) | Error::Indefinite(_) => EXIT_SOLVER,
        Error::ConservationViolation { .. } => EXIT_CONSERVATION,
        _ => EXIT_NUMERICAL,
    }
}

fn status_label(e: &Error) -> &'static str {
    match e.root() {
        Error::Config(_) | Error::Parse { .. } => "config_error",
        Error::Io { .. } => "io_error",
        Error::NonConvergence { .. } => "non_convergence",
        Error::SolverFailure(_) | Error::Indefinite(_) => "solver_failure",
        Error::ConservationViolation { .. } => "conservation_violation",
        _ => "numerical_error",
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out_dir: Option<PathBuf>,
    /// Stop after this many steps instead of `T/τ`.
    pub steps: Option<usize>,
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub steps: usize,
    pub final_mass: f64,
    pub final_energy: f64,
}

fn base_manifest(cfg: &RunConfig, steps: usize) -> Manifest {
    let mut m = Manifest::default();
    m.set("program", concat!("active-doi ", env!("CARGO_PKG_VERSION")));
    m.set("rng", "ChaCha8");
    m.set("steps_requested", steps);
    for line in cfg.to_toml().lines() {
        if let Some((k, v)) = line.split_once('=') {
            m.set(&format!("config.{}", k.trim()), v.trim());
        }
    }
    m
}

/// Executes a validated config, writing ledger, snapshots and manifest.
pub fn execute_run(cfg: &RunConfig, overrides: &RunOverrides) -> Result<RunSummary> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let steps = match overrides.steps {
        Some(n) => n,
        None => problem.params.steps()?,
    };
    let out_dir = overrides.out_dir.clone().unwrap_or_else(|| cfg.output.out_dir.clone());
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut manifest = base_manifest(cfg, steps);
    manifest.set("status", "running");
    manifest.write(&manifest_path)?;

    let init = cfg.initial_data();
    let psi0 = initial_density(&problem.grid, &problem.orient, &init)?;
    let u0 = initial_velocity(&problem.grid, &init);
    let start = Instant::now();
    let outcome = (|| -> Result<Simulation> {
        let mut sim = Simulation::new(problem.clone(), &psi0, &u0)?;
        let mut ledger = LedgerWriter::create(out_dir.join(LEDGER_FILE))?;
        ledger.write(&sim.ledger[0])?;
        let every = cfg.output.snapshot_every;
        let snap_dir = out_dir.join(SNAPSHOT_DIR);
        if every > 0 {
            write_snapshot(&snap_dir, &problem, &sim.state, cfg.output.store_full_psi)?;
        }
        sim.run(steps, |state, row| {
            ledger.write(row)?;
            info!("step {} t = {:.4} E = {:.6e} picard = {}", row.step, row.t, row.total_energy, row.picard_iters);
            if every > 0 && (state.step % every == 0 || state.step == steps) {
                write_snapshot(&snap_dir, &problem, state, cfg.output.store_full_psi)?;
            }
            Ok(())
        })?;
        Ok(sim)
    })();
    manifest.set("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64()));
    match outcome {
        Ok(sim) => {
            let last = sim.ledger.last().expect("ledger is never empty");
            manifest.set("status", "ok");
            manifest.set("steps_completed", sim.state.step);
            manifest.write(&manifest_path)?;
            Ok(RunSummary {
                out_dir,
                steps: sim.state.step,
                final_mass: last.mass,
                final_energy: last.total_energy,
            })
        }
        Err(e) => {
            manifest.set("status", status_label(&e));
            manifest.set("error", e.to_string().replace('\n', " "));
            if let Error::Step { step, .. } = &e {
                manifest.set("steps_completed", step - 1);
            }
            manifest.write(&manifest_path)?;
            Err(e)
        }
    }
}

/// `run <config> [--out-dir D] [--steps N]`.
pub fn cmd_run(config: &Path, overrides: &RunOverrides) -> i32 {
    let result = parse_config(config).and_then(|cfg| execute_run(&cfg, overrides));
    match result {
        Ok(s) => {
            println!(
                "completed {} steps into {} (mass {:.12e}, energy {:.12e})",
                s.steps,
                s.out_dir.display(),
                s.final_mass,
                s.final_energy
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NonConvergence { history, .. } = e.root() {
                let h: Vec<String> = history.iter().map(|v| format!("{v:.3e}")).collect();
                eprintln!("fixed-point changes: {}", h.join(" "));
            }
            exit_code(&e)
        }
    }
}

/// `check [--filter name]`; prints the suite table.
pub fn cmd_check(opts: &CheckOptions) -> i32 {
    let outcomes = run_checks(opts);
    if outcomes.is_empty() {
        eprintln!("no suite matches {:?}", opts.filter.as_deref().unwrap_or(""));
        return EXIT_CONFIG;
    }
    print!("{}", format_table(&outcomes));
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        EXIT_OK
    } else {
        eprintln!("failed suites: {}", failed.join(", "));
        EXIT_CHECK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::FaultInjection;
    use crate::grid::BcMode;
    use crate::output::read_ledger;

    fn equilibrium_config(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig::minimal(8, 8, 5e-3, 0.05);
        cfg.model.epsilon = 0.25;
        cfg.model.alpha = 1.0;
        cfg.grid.angles = 8;
        cfg.grid.bc_mode = BcMode::Periodic;
        cfg.output.out_dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn equilibrium_run_writes_constant_ledger() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = equilibrium_config(dir.path());
        let path = dir.path().join("run.toml");
        fs::write(&path, cfg.to_toml()).unwrap();
        assert_eq!(cmd_run(&path, &RunOverrides::default()), EXIT_OK);
        let rows = read_ledger(dir.path().join(LEDGER_FILE)).unwrap();
        assert_eq!(rows.len(), 11);
        for r in &rows {
            assert!((r.total_energy - rows[0].total_energy).abs() <= 1e-10);
            assert!((r.mass - rows[0].mass).abs() <= 1e-10);
        }
        let m = Manifest::read(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(m.get("status"), Some("ok"));
        assert_eq!(m.get("steps_completed"), Some("10"));
    }

    #[test]
    fn overrides_and_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = equilibrium_config(&dir.path().join("ignored"));
        cfg.output.snapshot_every = 2;
        let out = dir.path().join("chosen");
        let s = execute_run(&cfg, &RunOverrides { out_dir: Some(out.clone()), steps: Some(3) }).unwrap();
        assert_eq!(s.steps, 3);
        let snaps = fs::read_dir(out.join(SNAPSHOT_DIR)).unwrap().count();
        assert_eq!(snaps, 3 * 5);
        assert!(!dir.path().join("ignored").exists());
    }

    #[test]
    fn error_classes_map_to_codes() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.toml");
        assert_eq!(cmd_run(&missing, &RunOverrides::default()), EXIT_IO);
        let bad = dir.path().join("bad.toml");
        fs::write(&bad, "[time]\ntau = 0.1\nt_final = 1.0\n[grid]\nnx = 20\nny = 20\n[model]\ngamma = 1.2\n").unwrap();
        assert_eq!(cmd_run(&bad, &RunOverrides::default()), EXIT_CONFIG);

        let mut cfg = equilibrium_config(dir.path());
        cfg.grid.bc_mode = BcMode::NoSlipNoFlux;
        cfg.model.alpha = 4.0;
        cfg.solver.max_picard = 1;
        cfg.initial.preset = crate::init::DensityPreset::Nematic;
        cfg.initial.amplitude = 0.3;
        let err = execute_run(&cfg, &RunOverrides::default()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_NONCONVERGENCE);
        let m = Manifest::read(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(m.get("status"), Some("non_convergence"));
    }

    #[test]
    fn unwritable_output_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let cfg = equilibrium_config(&blocker.join("sub"));
        let err = execute_run(&cfg, &RunOverrides::default()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_IO);
    }

    #[test]
    fn check_exit_codes() {
        let opts = CheckOptions { filter: Some("mollifier".into()), fault: FaultInjection::default() };
        assert_eq!(cmd_check(&opts), EXIT_OK);
        let opts = CheckOptions { fault: FaultInjection { kernel_scale: Some(1.01) }, ..opts };
        assert_eq!(cmd_check(&opts), EXIT_CHECK);
        let opts = CheckOptions { filter: Some("nothing".into()), ..CheckOptions::default() };
        assert_eq!(cmd_check(&opts), EXIT_CONFIG);
    }
}
