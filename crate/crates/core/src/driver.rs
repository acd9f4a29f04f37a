//! Time loop: the Picard iteration for one step and the sequence of steps
//! with ledger bookkeeping.

use log::{debug, warn};

use crate::diagnostics::{entropy_ledger_row, LedgerRow, StepInfo};
use crate::error::{Error, Result};
use crate::field::{ConfigurationField, FaceField};
use crate::flow::{assemble_flow, solve_flow, FlowState, FlowTolerances};
use crate::init::{initialize_config, initialize_velocity};
use crate::params::Problem;
use crate::potential::build_half_potential;
use crate::smoluchowski::{assemble_config, solve_config, ConfigSolve};

/// Nodes below `-POSITIVITY_TOL·‖ψ‖_∞` trigger a warning.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Solution after `step` steps.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub step: usize,
    pub t: f64,
    pub psi: ConfigurationField,
    pub flow: FlowState,
}

/// Result of one converged Picard loop.
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub flow: FlowState,
    pub psi: ConfigurationField,
    pub iterations: usize,
    /// Relative change of `ψ̄` after each iteration.
    pub history: Vec<f64>,
    pub mass_drift: f64,
}

fn tolerances(problem: &Problem) -> FlowTolerances {
    FlowTolerances {
        linear: problem.params.tol_linear,
        div: problem.params.tol_div,
    }
}

fn weighted_l2(problem: &Problem, v: impl Iterator<Item = f64>) -> f64 {
    (v.map(|x| x * x).sum::<f64>() * problem.node_weight()).sqrt()
}

/// One application of the fixed-point map: flow solve with lagged `ψ̄`, then
/// the transport solve with the new velocity.
pub fn picard_map(
    problem: &Problem,
    state: &SimulationState,
    psi_bar: &ConfigurationField,
    flow_guess: Option<&FlowState>,
) -> Result<(FlowState, ConfigSolve)> {
    let pot = build_half_potential(
        &problem.kernel,
        &problem.grid,
        &problem.orient,
        psi_bar,
        &state.psi,
        problem.params.potential_strength,
    );
    let sys = assemble_flow(problem, psi_bar, &state.flow.u, &pot)?;
    let flow = solve_flow(&problem.grid, &sys, tolerances(problem), flow_guess)?;
    let csys = assemble_config(problem, &flow.u, psi_bar, &state.psi, &pot)?;
    let conf = solve_config(problem, &csys, psi_bar)?;
    Ok((flow, conf))
}

/// Iterates the fixed-point map from `ψ̄⁰ = ψ^{n-1}` until the relative
/// weighted L² change of `ψ̄` drops below `tol_fp`.
pub fn picard_step(problem: &Problem, state: &SimulationState) -> Result<PicardOutcome> {
    let prm = &problem.params;
    let mut psi_bar = state.psi.clone();
    let mut guess = state.flow.clone();
    let mut history = Vec::new();
    for it in 1..=prm.max_picard {
        let (flow, conf) = picard_map(problem, state, &psi_bar, Some(&guess))?;
        let change = weighted_l2(
            problem,
            conf.psi.data.iter().zip(&psi_bar.data).map(|(a, b)| a - b),
        ) * prm.damping;
        let scale = weighted_l2(problem, psi_bar.data.iter().copied()).max(1.0);
        let rel = change / scale;
        history.push(rel);
        debug!("picard {it}: change {rel:.3e}");
        if rel <= prm.tol_fp {
            return Ok(PicardOutcome {
                flow,
                psi: conf.psi,
                iterations: it,
                history,
                mass_drift: conf.mass_drift,
            });
        }
        if prm.damping == 1.0 {
            psi_bar = conf.psi;
        } else {
            for (b, n) in psi_bar.data.iter_mut().zip(&conf.psi.data) {
                *b += prm.damping * (n - *b);
            }
        }
        guess = flow;
    }
    Err(Error::NonConvergence {
        iterations: prm.max_picard,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// A run in progress: problem, current state and the ledger so far.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub problem: Problem,
    pub state: SimulationState,
    pub ledger: Vec<LedgerRow>,
    initial_l1: f64,
}

impl Simulation {
    /// Regularizes the initial data and records the step-0 ledger row.
    pub fn new(problem: Problem, psi0: &ConfigurationField, u0: &FaceField) -> Result<Self> {
        if !psi0.matches(&problem.grid, &problem.orient) {
            return Err(Error::Shape("initial density does not match the grid".into()));
        }
        if u0.data.len() != problem.grid.face_dofs() {
            return Err(Error::Shape("initial velocity does not match the grid".into()));
        }
        let psi = initialize_config(psi0, &problem.cutoff)?;
        let flow = initialize_velocity(&problem.grid, u0, &problem.cutoff, tolerances(&problem))?;
        let initial_l1 = psi.norm_l1(&problem.grid, &problem.orient);
        for w in problem.params.warnings(initial_l1) {
            warn!("{w}");
        }
        let row = entropy_ledger_row(
            &problem,
            &psi,
            &flow.u,
            StepInfo {
                step: 0,
                picard_iters: 0,
                div_residual: flow.div_residual,
                initial_l1,
                increments: false,
            },
        );
        Ok(Simulation {
            state: SimulationState { step: 0, t: 0.0, psi, flow },
            ledger: vec![row],
            initial_l1,
            problem,
        })
    }

    /// `‖ψ⁰‖_{L¹}` after the cut-off.
    pub fn initial_l1(&self) -> f64 {
        self.initial_l1
    }

    /// Advances one step; failures are tagged with the step index.
    pub fn step(&mut self) -> Result<&LedgerRow> {
        let n = self.state.step + 1;
        let out = picard_step(&self.problem, &self.state).map_err(|e| Error::Step {
            step: n,
            source: Box::new(e),
        })?;
        let floor = -POSITIVITY_TOL * out.psi.max_abs();
        if out.psi.min() < floor {
            warn!("step {n}: min psi = {:.3e} below {floor:.3e}", out.psi.min());
        }
        let row = entropy_ledger_row(
            &self.problem,
            &out.psi,
            &out.flow.u,
            StepInfo {
                step: n,
                picard_iters: out.iterations,
                div_residual: out.flow.div_residual,
                initial_l1: self.initial_l1,
                increments: true,
            },
        );
        self.state = SimulationState {
            step: n,
            t: n as f64 * self.problem.params.tau,
            psi: out.psi,
            flow: out.flow,
        };
        self.ledger.push(row);
        Ok(self.ledger.last().expect("ledger is never empty"))
    }

    /// Runs `steps` steps, calling `observer` after each one.
    pub fn run<F>(&mut self, steps: usize, mut observer: F) -> Result<()>
    where
        F: FnMut(&SimulationState, &LedgerRow) -> Result<()>,
    {
        for _ in 0..steps {
            self.step()?;
            observer(&self.state, self.ledger.last().expect("ledger is never empty"))?;
        }
        Ok(())
    }
}

/// Runs the full `T/τ` steps and returns the finished simulation.
pub fn run_simulation(
    problem: Problem,
    psi0: &ConfigurationField,
    u0: &FaceField,
) -> Result<Simulation> {
    let steps = problem.params.steps()?;
    let mut sim = Simulation::new(problem, psi0, u0)?;
    sim.run(steps, |_, _| Ok(()))?;
    Ok(sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BcMode, DomainGrid};
    use crate::init::{initial_density, DensityPreset, InitialData};
    use crate::params::Params;

    fn problem(bc: BcMode, params: Params) -> Problem {
        Problem::new(params, DomainGrid::unit(8, bc).unwrap(), 8).unwrap()
    }

    #[test]
    fn equilibrium_converges_in_one_iteration() {
        let params = Params { epsilon: 0.25, alpha: 2.0, potential_strength: 3.0, ..Params::default() };
        let pr = problem(BcMode::Periodic, params);
        let psi = ConfigurationField::constant(&pr.grid, &pr.orient, 0.5);
        let mut sim = Simulation::new(pr.clone(), &psi, &FaceField::zeros(&pr.grid)).unwrap();
        let row = *sim.step().unwrap();
        assert_eq!(row.picard_iters, 1);
        assert!(sim.state.flow.u.max_abs() <= 1e-10);
        assert!(sim.state.psi.data.iter().all(|v| (v - 0.5).abs() <= 1e-10));
    }

    #[test]
    fn fixed_point_reproduces_itself() {
        let params = Params { epsilon: 0.25, alpha: 1.0, potential_strength: 2.0, ..Params::default() };
        let pr = problem(BcMode::NoSlipNoFlux, params);
        let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 7, ..InitialData::default() };
        let psi0 = initial_density(&pr.grid, &pr.orient, &init).unwrap();
        let sim = Simulation::new(pr.clone(), &psi0, &FaceField::zeros(&pr.grid)).unwrap();
        let out = picard_step(&pr, &sim.state).unwrap();
        assert!(out.iterations > 1);
        assert!(out.history.windows(2).all(|w| w[1] < w[0]));
        let (_, again) = picard_map(&pr, &sim.state, &out.psi, Some(&out.flow)).unwrap();
        let diff = weighted_l2(&pr, again.psi.data.iter().zip(&out.psi.data).map(|(a, b)| a - b));
        let scale = weighted_l2(&pr, out.psi.data.iter().copied()).max(1.0);
        assert!(diff / scale <= 10.0 * pr.params.tol_fp, "{}", diff / scale);
    }

    #[test]
    fn single_iteration_budget_is_reported() {
        let params = Params { epsilon: 0.25, alpha: 4.0, max_picard: 1, ..Params::default() };
        let pr = problem(BcMode::NoSlipNoFlux, params);
        let init = InitialData { preset: DensityPreset::Nematic, amplitude: 0.3, seed: 1, ..InitialData::default() };
        let psi0 = initial_density(&pr.grid, &pr.orient, &init).unwrap();
        let mut sim = Simulation::new(pr.clone(), &psi0, &FaceField::zeros(&pr.grid)).unwrap();
        let err = sim.step().unwrap_err();
        assert!(matches!(err, Error::Step { step: 1, .. }));
        match err.root() {
            Error::NonConvergence { iterations, history, .. } => {
                assert_eq!(*iterations, 1);
                assert_eq!(history.len(), 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn run_records_every_step() {
        let params = Params { epsilon: 0.25, t_final: 0.015, ..Params::default() };
        let pr = problem(BcMode::Periodic, params);
        let psi = ConfigurationField::constant(&pr.grid, &pr.orient, 0.2);
        let sim = run_simulation(pr.clone(), &psi, &FaceField::zeros(&pr.grid)).unwrap();
        assert_eq!(sim.ledger.len(), 4);
        assert_eq!(sim.state.step, 3);
        assert!((sim.state.t - 0.015).abs() < 1e-15);
    }
}
