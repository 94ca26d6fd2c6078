//! Building solvers from scenario descriptions and running them.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::init::{init_from_scenario, ObjectInit};
use crate::reference::{soliton_profile, PeriodicSolutionSpec, Side, SolitonProfile};
use crate::scheme::{ExternalForce, FarBoundary, GSeries, Motion, SchemeConfig, Solver, TrajectoryFn};
use crate::setup::{DepthProfile, PhysicalSetup};
use crate::state::{volume, State, Theta};

use super::config::{Forcing, MeshRule, ScenarioKind, ScenarioSpec};
use super::output::write_fields_csv;

/// Diagnostics after one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRow {
    pub t: f64,
    pub delta: f64,
    pub delta_dot: f64,
    pub qi_avg: f64,
    pub zu_plus: f64,
    pub zu_minus: f64,
    pub volume: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub n: usize,
    pub grid: Grid<f64>,
    pub dt: f64,
    pub steps: usize,
    pub state: State<f64>,
    pub theta: Theta<f64>,
    pub diagnostics: Vec<DiagRow>,
    pub runtime_s: f64,
}

pub fn physical_setup(spec: &ScenarioSpec) -> Result<PhysicalSetup<f64>> {
    PhysicalSetup::from_mu(spec.epsilon, spec.mu, spec.ell, DepthProfile::Constant(spec.h_eq))
}

/// Grid for mesh parameter N.
pub fn scenario_grid(spec: &ScenarioSpec, n: usize) -> Result<Grid<f64>> {
    match spec.mesh {
        MeshRule::Cells => Grid::build(spec.l_outer, spec.ell, n),
        MeshRule::Spacing { length } => {
            let dx = length / n as f64;
            let cells = (spec.l_outer - spec.ell) / dx;
            let whole = cells.round();
            if (cells - whole).abs() > 1e-9 * cells || whole < 5.0 {
                return Err(Error::Config(format!(
                    "half-line length {} is not a whole number of cells of width {dx}",
                    spec.l_outer - spec.ell
                )));
            }
            Grid::with_dx(spec.ell, dx, whole as usize - 1)
        }
    }
}

/// Δt = ratio·Δx and the number of steps not passing t_final.
pub fn time_step(spec: &ScenarioSpec, dx: f64) -> (f64, usize) {
    let dt = spec.dt_ratio * dx;
    (dt, (spec.t_final / dt + 1e-9).floor() as usize)
}

pub fn soliton_of(spec: &ScenarioSpec) -> Result<Option<SolitonProfile>> {
    match spec.forcing {
        Forcing::Soliton { zeta_max, .. } => Ok(Some(soliton_profile(zeta_max, spec.epsilon, spec.kappa())?)),
        _ => Ok(None),
    }
}

pub fn periodic_of(spec: &ScenarioSpec, setup: &PhysicalSetup<f64>) -> Result<Option<PeriodicSolutionSpec>> {
    match spec.forcing {
        Forcing::Periodic { k, zeta_c_plus, zeta_c_minus, q_s_plus, q_s_minus } => {
            Ok(Some(PeriodicSolutionSpec::new(setup, k, zeta_c_plus, zeta_c_minus, q_s_plus, q_s_minus)?))
        }
        _ => Ok(None),
    }
}

/// Solver at t = 0 and the number of steps to run.
pub fn build_solver(spec: &ScenarioSpec, n: usize) -> Result<(Solver<f64>, usize)> {
    spec.validate()?;
    let setup = physical_setup(spec)?;
    let grid = scenario_grid(spec, n)?;
    let (dt, steps) = time_step(spec, grid.dx);
    let mut cfg = SchemeConfig::new(spec.order, spec.dt_ratio);
    cfg.viscosity = spec.viscosity;
    cfg.viscosity_nu = spec.viscosity_nu;
    cfg.viscosity_cells = spec.viscosity_cells;
    cfg.trace_stepping = spec.trace_stepping;
    let fixed: TrajectoryFn<f64> = Arc::new(|_| [0.0, 0.0, 0.0]);
    let soliton = soliton_of(spec)?;
    let periodic = periodic_of(spec, &setup)?;
    let zero = |_: f64| 0.0;
    let mut far = FarBoundary::Open;

    let (state, theta, motion) = match (spec.kind, spec.forcing) {
        (ScenarioKind::WaveGeneration, forcing) => {
            cfg.generation_mode = true;
            let ell = spec.ell;
            let g_plus = match (forcing, &soliton) {
                (Forcing::Soliton { crest, .. }, Some(p)) => {
                    let p = p.clone();
                    GSeries::sample(move |t| p.c * p.eval(ell - crest - p.c * t), 0.0, dt, -1, steps as i64 + 2)
                }
                _ => GSeries::zeros(-1, steps as i64 + 2),
            };
            let (zi, qi): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match (forcing, &soliton) {
                (Forcing::Soliton { crest, .. }, Some(p)) => {
                    let (a, b) = (p.clone(), p.clone());
                    (
                        Box::new(move |x| if x > 0.0 { a.eval(x - crest) } else { 0.0 }),
                        Box::new(move |x| if x > 0.0 { b.c * b.eval(x - crest) } else { 0.0 }),
                    )
                }
                _ => (Box::new(zero), Box::new(zero)),
            };
            let (state, theta) = init_from_scenario(&setup, &grid, &zi, &qi, ObjectInit::Displaced { delta: 0.0 })?;
            let motion = Motion::Generation { plus: g_plus, minus: GSeries::zeros(-1, steps as i64 + 2) };
            (state, theta, motion)
        }
        (ScenarioKind::DecayLinear | ScenarioKind::DecayNonlinear, Forcing::Release { delta0 }) => {
            let (s, t) = init_from_scenario(&setup, &grid, &zero, &zero, ObjectInit::Displaced { delta: delta0 })?;
            (s, t, Motion::Symmetric { force: ExternalForce::Zero })
        }
        (ScenarioKind::FixedLinear, Forcing::Periodic { .. }) => {
            let p = periodic.ok_or_else(|| Error::Config("missing periodic spec".into()))?;
            let ell = spec.ell;
            let l = spec.l_outer;
            let zi = move |x: f64| {
                if x > 0.0 {
                    p.fields_at_offset(Side::Plus, x - ell, 0.0).0
                } else {
                    p.fields_at_offset(Side::Minus, x + ell, 0.0).0
                }
            };
            let qi = move |x: f64| {
                if x > 0.0 {
                    p.fields_at_offset(Side::Plus, x - ell, 0.0).1
                } else {
                    p.fields_at_offset(Side::Minus, x + ell, 0.0).1
                }
            };
            far = FarBoundary::Discharge {
                plus: GSeries::sample(move |t| p.fields_at_offset(Side::Plus, l - ell, t).1, 0.0, dt, -1, steps as i64 + 2),
                minus: GSeries::sample(move |t| p.fields_at_offset(Side::Minus, ell - l, t).1, 0.0, dt, -1, steps as i64 + 2),
            };
            let (s, t) = init_from_scenario(&setup, &grid, &zi, &qi, ObjectInit::Displaced { delta: 0.0 })?;
            (s, t, Motion::Forced { trajectory: fixed })
        }
        (kind @ (ScenarioKind::FixedNonlinear | ScenarioKind::FreeFloating), forcing) => {
            let (zi, qi): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match (forcing, &soliton) {
                (Forcing::Soliton { crest, .. }, Some(p)) => {
                    let (a, b) = (p.clone(), p.clone());
                    (Box::new(move |x| a.eval(x - crest)), Box::new(move |x| b.c * b.eval(x - crest)))
                }
                (Forcing::None, _) => (Box::new(zero), Box::new(zero)),
                _ => return Err(Error::Config(format!("{} needs a soliton or no forcing", kind.name()))),
            };
            let (s, t) = init_from_scenario(&setup, &grid, &zi, &qi, ObjectInit::Displaced { delta: 0.0 })?;
            let motion = if kind == ScenarioKind::FixedNonlinear {
                Motion::Forced { trajectory: fixed }
            } else {
                Motion::Free { force: ExternalForce::Zero }
            };
            (s, t, motion)
        }
        (kind, _) => return Err(Error::Config(format!("forcing does not fit {}", kind.name()))),
    };
    let solver = Solver::new(setup, grid, cfg, motion, far, state, theta, dt)?;
    Ok((solver, steps))
}

pub fn diag_row(s: &Solver<f64>) -> DiagRow {
    let th = &s.theta;
    let generation = matches!(s.motion, Motion::Generation { .. });
    DiagRow {
        t: s.time(),
        delta: th.delta,
        delta_dot: th.delta_dot,
        qi_avg: th.qi_avg,
        zu_plus: if generation { s.state.plus.zeta[0] } else { th.zu_plus },
        zu_minus: if generation { s.state.minus.zeta[0] } else { th.zu_minus },
        volume: volume(&s.state, th, &s.grid),
    }
}

/// Runs the scenario at mesh parameter N. On a solver abort the current
/// fields are written to `snapshot_dir` (if given) and the path is appended
/// to the abort reason.
pub fn run_scenario(spec: &ScenarioSpec, n: usize, snapshot_dir: Option<&Path>) -> Result<RunResult> {
    Ok(run_with_snapshots(spec, n, snapshot_dir, &[])?.0)
}

/// Like [`run_scenario`], also returning the state after each listed step.
/// The run is extended if a listed step lies beyond the final time.
pub fn run_with_snapshots(
    spec: &ScenarioSpec,
    n: usize,
    snapshot_dir: Option<&Path>,
    snapshot_steps: &[usize],
) -> Result<(RunResult, Vec<State<f64>>)> {
    let start = Instant::now();
    let (mut solver, steps) = build_solver(spec, n)?;
    let total = snapshot_steps.iter().copied().fold(steps, usize::max);
    let mut snaps = vec![None; snapshot_steps.len()];
    let mut diagnostics = Vec::with_capacity(steps + 1);
    let mut final_state = None;
    diagnostics.push(diag_row(&solver));
    for k in 0..=total {
        for (i, &s) in snapshot_steps.iter().enumerate() {
            if s == k {
                snaps[i] = Some(solver.state.clone());
            }
        }
        if k == steps {
            final_state = Some((solver.state.clone(), solver.theta));
        }
        if k == total {
            break;
        }
        if let Err(e) = solver.step() {
            return Err(attach_snapshot(e, &solver, spec, n, snapshot_dir));
        }
        if k < steps {
            diagnostics.push(diag_row(&solver));
        }
    }
    let (state, theta) = final_state.expect("final step reached");
    let result = RunResult {
        n,
        dt: solver.dt,
        steps,
        grid: solver.grid.clone(),
        state,
        theta,
        diagnostics,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    Ok((result, snaps.into_iter().map(|s| s.expect("snapshot step reached")).collect()))
}

fn attach_snapshot(e: Error, solver: &Solver<f64>, spec: &ScenarioSpec, n: usize, dir: Option<&Path>) -> Error {
    let (Error::Abort { step, t, reason }, Some(dir)) = (&e, dir) else {
        return e;
    };
    let path = dir.join(format!("abort_{}_N{n}.csv", spec.kind.name()));
    let note = match std::fs::create_dir_all(dir)
        .map_err(Error::from)
        .and_then(|_| std::fs::File::create(&path).map_err(Error::from))
        .and_then(|f| write_fields_csv(f, &solver.state, &solver.grid))
    {
        Ok(()) => format!("snapshot: {}", path.display()),
        Err(w) => format!("snapshot failed: {w}"),
    };
    Error::Abort { step: *step, t: *t, reason: format!("{reason}; {note}") }
}
