//! Closed-loop check of the control force: a free object driven by the force
//! computed along a prescribed motion should follow that motion.

use std::sync::Arc;

use crate::coupling::control_force;
use crate::error::Result;
use crate::grid::Grid;
use crate::harness::study::{fit_order, OrderFit};
use crate::init::{init_from_scenario, ObjectInit};
use crate::scheme::{ExternalForce, FarBoundary, Motion, Order, SchemeConfig, Solver, TrajectoryFn};
use crate::setup::{DepthProfile, PhysicalSetup};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlSpec {
    pub epsilon: f64,
    pub mu: f64,
    pub ell: f64,
    pub h_eq: f64,
    pub l_outer: f64,
    pub order: Order,
    pub dt_ratio: f64,
    /// Target motion δ(t) = amplitude · sin t.
    pub amplitude: f64,
    /// Start time; at t₀ = π/2 the target velocity vanishes, which matches a
    /// fluid at rest.
    pub t0: f64,
    pub duration: f64,
}

impl Default for ControlSpec {
    fn default() -> Self {
        ControlSpec {
            epsilon: 0.3,
            mu: 0.3,
            ell: 4.0,
            h_eq: 0.7,
            l_outer: 30.0,
            order: Order::Second,
            dt_ratio: 0.7,
            amplitude: 0.05,
            t0: std::f64::consts::FRAC_PI_2,
            duration: 10.0,
        }
    }
}

/// max over steps of |δ − δ_target| for the free run at mesh N.
pub fn control_tracking_error(spec: &ControlSpec, n: usize) -> Result<f64> {
    let setup = PhysicalSetup::from_mu(spec.epsilon, spec.mu, spec.ell, DepthProfile::Constant(spec.h_eq))?;
    let grid = Grid::build(spec.l_outer, spec.ell, n)?;
    let steps = (spec.duration / (spec.dt_ratio * grid.dx)).ceil() as usize;
    let dt = spec.duration / steps as f64;
    let a = spec.amplitude;
    let target = move |t: f64| [a * t.sin(), a * t.cos(), -a * t.sin()];
    let traj: TrajectoryFn<f64> = Arc::new(target);
    let zero = |_: f64| 0.0;
    let (state, theta) =
        init_from_scenario(&setup, &grid, &zero, &zero, ObjectInit::Displaced { delta: target(spec.t0)[0] })?;
    let cfg = SchemeConfig::new(spec.order, spec.dt_ratio);

    let mut forced = Solver::new(
        setup.clone(),
        grid.clone(),
        cfg.clone(),
        Motion::Forced { trajectory: traj },
        FarBoundary::Open,
        state.clone(),
        theta,
        dt,
    )?
    .with_start_time(spec.t0)?;
    let mut force = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let (rp, rm) = forced.current_traces()?;
        let th = &forced.theta;
        let t5 = [th.qi_avg, th.zu_plus_dot, th.zu_minus_dot, th.zu_plus, th.zu_minus];
        force.push(control_force(&setup, &t5, rp, rm, &target(forced.time()))?);
        if n < steps {
            forced.step()?;
        }
    }

    let mut free = Solver::new(
        setup,
        grid,
        cfg,
        Motion::Free { force: ExternalForce::Series(force) },
        FarBoundary::Open,
        state,
        theta,
        dt,
    )?
    .with_start_time(spec.t0)?;
    let mut err = 0.0f64;
    for _ in 0..steps {
        free.step()?;
        err = err.max((free.theta.delta - target(free.time())[0]).abs());
    }
    Ok(err)
}

/// Meshes of the closed-loop study. Below N ≈ 300 the observed order is
/// still above 2.3.
pub const CONTROL_MESHES: [usize; 5] = [199, 299, 399, 599, 799];

/// Tracking errors on each mesh and the fitted order against Δx.
pub fn control_study(spec: &ControlSpec, meshes: &[usize]) -> Result<(Vec<f64>, Option<OrderFit>)> {
    let errs = meshes.iter().map(|&n| control_tracking_error(spec, n)).collect::<Result<Vec<_>>>()?;
    let dx: Vec<f64> = meshes.iter().map(|&n| (spec.l_outer - spec.ell) / (n as f64 + 1.0)).collect();
    let fit = fit_order(&dx, &errs);
    Ok((errs, fit))
}
