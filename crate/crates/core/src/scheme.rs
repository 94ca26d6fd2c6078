//! Lax-Friedrichs/explicit Euler and MacCormack/Heun time stepping of the
//! coupled wave field and coupling ODE.
//!
//! Both exterior components run through the same code in distance order. The
//! left component is handled in the mirrored frame q̃ = −q, where its
//! equations take exactly the right-component form, so the discretization is
//! symmetric about x = 0 by construction.

use std::sync::Arc;

use crate::coupling::{geometry_coeffs, rhs_g, rhs_g_forced, rhs_g_symmetric, source_from_g, Trajectory};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::helmholtz::{far_trace_r1, trace_r1, HelmholtzWorkspace};
use crate::scalar::{lit, Real};
use crate::setup::PhysicalSetup;
use crate::state::{State, Theta};

pub const DEFAULT_VISCOSITY_NU: f64 = 2.136;
/// Viscous cells next to each generating boundary. Below ~10 the boundary
/// oscillations left behind by an entering soliton dominate the ζ error.
pub const DEFAULT_VISCOSITY_CELLS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_number(k: u32) -> Result<Self> {
        match k {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::Config(format!("scheme order must be 1 or 2, got {k}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig<T: Real> {
    pub order: Order,
    pub dt_over_dx: T,
    pub viscosity_nu: T,
    pub viscosity_cells: usize,
    /// Boundary discharge is prescribed instead of solved for.
    pub generation_mode: bool,
    /// Artificial viscosity switch; `None` means on only for second-order
    /// generation runs.
    pub viscosity: Option<bool>,
    pub trace_stepping: TraceStepping,
}

/// Time stepping of the contact-point elevations ζ̲± and their rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStepping {
    /// Same explicit Euler / Heun update as the other components.
    Explicit,
    /// The linear part ζ̲̈ = −ζ̲/κ² is integrated exactly (integrating
    /// factor), the remainder explicitly. Same order, no growth of the
    /// 1/κ oscillation.
    Exponential,
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(order: Order, dt_over_dx: T) -> Self {
        SchemeConfig {
            order,
            dt_over_dx,
            viscosity_nu: lit(DEFAULT_VISCOSITY_NU),
            viscosity_cells: DEFAULT_VISCOSITY_CELLS,
            generation_mode: false,
            viscosity: None,
            trace_stepping: TraceStepping::Exponential,
        }
    }

    pub fn viscosity_active(&self) -> bool {
        self.order == Order::Second && self.viscosity.unwrap_or(self.generation_mode)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.dt_over_dx > T::zero() && self.dt_over_dx <= T::one()) {
            return Err(Error::Config(format!("dt/dx must lie in (0, 1], got {}", self.dt_over_dx)));
        }
        if self.viscosity_active() && self.viscosity_cells >= n {
            return Err(Error::Config(format!("viscosity cells {} must be < N = {n}", self.viscosity_cells)));
        }
        if !(self.viscosity_nu >= T::zero()) {
            return Err(Error::Config("viscosity coefficient must be >= 0".into()));
        }
        Ok(())
    }
}

/// Momentum flux εq²/h + (h² − 1)/(2ε), with the second term written as
/// ζ + εζ²/2 so that ε = 0 needs no special case.
#[inline]
pub fn shallow_flux<T: Real>(zeta: T, q: T, epsilon: T) -> T {
    let h = T::one() + epsilon * zeta;
    epsilon * q * q / h + zeta + lit::<T>(0.5) * epsilon * zeta * zeta
}

/// Checked version of [`shallow_flux`].
pub fn shallow_flux_checked<T: Real>(zeta: T, q: T, epsilon: T) -> Result<T> {
    let h = T::one() + epsilon * zeta;
    if !(h > T::zero()) {
        return Err(Error::Physical(format!("vacuum state, h = {h}")));
    }
    Ok(shallow_flux(zeta, q, epsilon))
}

/// Boundary-layer profile exp(−|x|/κ) of the momentum source.
#[inline]
pub fn source_shape<T: Real>(x_offset: T, kappa: T) -> T {
    (-x_offset.abs() / kappa).exp()
}

/// Boundary discharge samples gⁿ = g(t₀ + nΔt) for a contiguous index range.
#[derive(Clone, Debug, PartialEq)]
pub struct GSeries<T: Real> {
    pub first: i64,
    pub values: Vec<T>,
}

impl<T: Real> GSeries<T> {
    pub fn sample(f: impl Fn(T) -> T, t0: T, dt: T, first: i64, last: i64) -> Self {
        let values = (first..=last)
            .map(|n| f(t0 + T::from_i64(n).expect("index") * dt))
            .collect();
        GSeries { first, values }
    }

    pub fn zeros(first: i64, last: i64) -> Self {
        GSeries { first, values: vec![T::zero(); (last - first + 1).max(0) as usize] }
    }

    pub fn get(&self, n: i64) -> Result<T> {
        let j = n - self.first;
        if j < 0 || j as usize >= self.values.len() {
            return Err(Error::MissingSample(n));
        }
        Ok(self.values[j as usize])
    }
}

/// Source coefficients (𝒮ⁿ, 𝒮ⁿ'*) of a prescribed boundary discharge. For
/// the first-order scheme both entries are (gⁿ⁺¹ − gⁿ)/Δt.
pub fn generation_source<T: Real>(g: &GSeries<T>, n: i64, order: Order, dt: T) -> Result<(T, T)> {
    match order {
        Order::First => {
            let s = (g.get(n + 1)? - g.get(n)?) / dt;
            Ok((s, s))
        }
        Order::Second => {
            let two_dt = lit::<T>(2.0) * dt;
            let now = (g.get(n + 1)? - g.get(n - 1)?) / two_dt;
            let star = (g.get(n + 2)? - g.get(n)?) / two_dt;
            Ok((now, star))
        }
    }
}

/// External force on the object.
#[derive(Clone)]
pub enum ExternalForce<T: Real> {
    Zero,
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
    /// Value at step n (time t₀ + nΔt).
    Series(Vec<T>),
}

impl<T: Real> ExternalForce<T> {
    pub fn value(&self, n: usize, t: T) -> Result<T> {
        match self {
            ExternalForce::Zero => Ok(T::zero()),
            ExternalForce::Function(f) => Ok(f(t)),
            ExternalForce::Series(v) => v.get(n).copied().ok_or(Error::MissingSample(n as i64)),
        }
    }
}

/// Prescribed motion δ(t) with its first two derivatives.
pub type TrajectoryFn<T> = Arc<dyn Fn(T) -> Trajectory<T> + Send + Sync>;

/// How the object moves, which selects the coupling ODE.
#[derive(Clone)]
pub enum Motion<T: Real> {
    /// Full 7-component system.
    Free { force: ExternalForce<T> },
    /// Symmetric flows (even ζ, odd q); 4-component system.
    Symmetric { force: ExternalForce<T> },
    /// δ prescribed; 5-component system. δ ≡ 0 is a fixed object.
    Forced { trajectory: TrajectoryFn<T> },
    /// Discharge prescribed at both contact points; no ODE.
    Generation { plus: GSeries<T>, minus: GSeries<T> },
}

/// Condition at the outer ends ±L.
#[derive(Clone, Debug, PartialEq)]
pub enum FarBoundary<T: Real> {
    /// Ghost cell copies the last cell.
    Open,
    /// Physical discharge prescribed at +L and −L.
    Discharge { plus: GSeries<T>, minus: GSeries<T> },
}

#[derive(Clone, Debug)]
struct SideBuf<T: Real> {
    sgn: T,
    /// Indices 0..=N+1: boundary node, cells, outer ghost.
    z: Vec<T>,
    q: Vec<T>,
    v: Vec<T>,
    zs: Vec<T>,
    qs: Vec<T>,
    vs: Vec<T>,
    zn: Vec<T>,
    qn: Vec<T>,
    f: Vec<T>,
}

impl<T: Real> SideBuf<T> {
    fn new(n: usize, sgn: T) -> Self {
        let z = vec![T::zero(); n + 2];
        SideBuf {
            sgn,
            z: z.clone(),
            q: z.clone(),
            v: z.clone(),
            zs: z.clone(),
            qs: z.clone(),
            vs: z.clone(),
            zn: z.clone(),
            qn: z,
            f: vec![T::zero(); n],
        }
    }
}

/// Computes R₁f_sw for cells 1..=N of (z, q) into v[1..=N] and returns the
/// traces at the object and at the outer end.
fn nonlocal_flux<T: Real>(ws: &HelmholtzWorkspace<T>, eps: T, z: &[T], q: &[T], f: &mut [T], v: &mut [T]) -> Result<(T, T)> {
    let n = f.len();
    for k in 0..n {
        f[k] = shallow_flux(z[k + 1], q[k + 1], eps);
    }
    ws.solve_into(f, &mut v[1..=n])?;
    Ok((trace_r1(&v[1..=n]), far_trace_r1(&v[1..=n])))
}

/// Coupled solver state and scratch space.
pub struct Solver<T: Real> {
    pub setup: PhysicalSetup<T>,
    pub grid: Grid<T>,
    pub config: SchemeConfig<T>,
    pub motion: Motion<T>,
    pub far: FarBoundary<T>,
    pub dt: T,
    pub t0: T,
    pub step_index: usize,
    pub state: State<T>,
    pub theta: Theta<T>,
    ws: HelmholtzWorkspace<T>,
    sides: [SideBuf<T>; 2],
    b: Vec<T>,
    bf: Vec<T>,
    /// Traces (R₁f_sw)± at the current time level.
    pub last_traces: (T, T),
}

impl<T: Real> Solver<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        setup: PhysicalSetup<T>,
        grid: Grid<T>,
        config: SchemeConfig<T>,
        motion: Motion<T>,
        far: FarBoundary<T>,
        state: State<T>,
        theta: Theta<T>,
        dt: T,
    ) -> Result<Self> {
        let n = grid.n;
        config.validate(n)?;
        if state.n() != n {
            return Err(Error::Size { expected: n, got: state.n() });
        }
        if !(dt > T::zero()) || dt > grid.dx * config.dt_over_dx * (T::one() + lit(1e-9)) {
            return Err(Error::Config(format!("dt = {dt} outside (0, {}·dx]", config.dt_over_dx)));
        }
        if matches!(motion, Motion::Generation { .. }) != config.generation_mode {
            return Err(Error::Config("generation_mode must match the motion kind".into()));
        }
        if !config.generation_mode {
            geometry_coeffs(&setup, setup.epsilon * theta.delta)?;
        }
        let ws = HelmholtzWorkspace::new(setup.kappa, grid.dx, n)?;
        let b = (0..=n + 1).map(|k| (-T::from_usize_lossy(k) * grid.dx / setup.kappa).exp()).collect();
        let bf = (0..=n + 1).map(|k| (-T::from_usize_lossy(n + 1 - k) * grid.dx / setup.kappa).exp()).collect();
        let mut solver = Solver {
            setup,
            grid,
            config,
            motion,
            far,
            dt,
            t0: T::zero(),
            step_index: 0,
            state,
            theta,
            ws,
            sides: [SideBuf::new(n, T::one()), SideBuf::new(n, -T::one())],
            b,
            bf,
            last_traces: (T::zero(), T::zero()),
        };
        solver.project(T::zero())?;
        solver.sync_boundary_nodes(0)?;
        solver.last_traces = solver.current_traces()?;
        Ok(solver)
    }

    /// Shifts the time origin; call before the first step.
    pub fn with_start_time(mut self, t0: T) -> Result<Self> {
        self.t0 = t0;
        self.project(t0)?;
        self.sync_boundary_nodes(0)?;
        Ok(self)
    }

    #[inline]
    pub fn time_at(&self, n: usize) -> T {
        self.t0 + T::from_usize_lossy(n) * self.dt
    }

    pub fn time(&self) -> T {
        self.time_at(self.step_index)
    }

    pub fn workspace(&self) -> &HelmholtzWorkspace<T> {
        &self.ws
    }

    /// (R₁f_sw)± of the stored state.
    pub fn current_traces(&mut self) -> Result<(T, T)> {
        let eps = self.setup.epsilon;
        let mut out = [T::zero(); 2];
        for (i, side) in self.sides.iter_mut().enumerate() {
            let src = if i == 0 { &self.state.plus } else { &self.state.minus };
            for k in 0..src.zeta.len() {
                side.z[k] = src.zeta[k];
                side.q[k] = side.sgn * src.q[k];
            }
            out[i] = nonlocal_flux(&self.ws, eps, &side.z, &side.q, &mut side.f, &mut side.v)?.0;
        }
        Ok((out[0], out[1]))
    }

    /// Enforces the constraints of the reduced systems on Θ at time t.
    fn project(&mut self, t: T) -> Result<()> {
        match &self.motion {
            Motion::Symmetric { .. } => {
                self.theta.qi_avg = T::zero();
                self.theta.zu_minus = self.theta.zu_plus;
                self.theta.zu_minus_dot = self.theta.zu_plus_dot;
            }
            Motion::Forced { trajectory } => {
                let [d, dd, _] = trajectory(t);
                self.theta.delta = d;
                self.theta.delta_dot = dd;
            }
            _ => {}
        }
        Ok(())
    }

    /// Writes the boundary-node values (index 0) of the stored state at step n.
    fn sync_boundary_nodes(&mut self, n: usize) -> Result<()> {
        match &self.motion {
            Motion::Generation { plus, minus } => {
                self.state.plus.q[0] = plus.get(n as i64)?;
                self.state.minus.q[0] = minus.get(n as i64)?;
                for side in [&mut self.state.plus, &mut self.state.minus] {
                    side.zeta[0] = extrapolate(&side.zeta);
                }
            }
            _ => {
                let (qp, qm) = self.theta.boundary_discharge(self.setup.ell);
                self.state.plus.q[0] = qp;
                self.state.minus.q[0] = qm;
                self.state.plus.zeta[0] = self.theta.zu_plus;
                self.state.minus.zeta[0] = self.theta.zu_minus;
            }
        }
        Ok(())
    }

    /// dΘ/dt at step index n (time t) with traces (R₊, R₋).
    fn eval_g(&self, theta: &Theta<T>, traces: (T, T), n: usize, t: T) -> Result<[T; 7]> {
        let (rp, rm) = traces;
        match &self.motion {
            Motion::Free { force } => rhs_g(&self.setup, theta, rp, rm, force.value(n, t)?),
            Motion::Symmetric { force } => {
                let g = rhs_g_symmetric(
                    &self.setup,
                    &[theta.delta_dot, theta.zu_plus_dot, theta.delta, theta.zu_plus],
                    rp,
                    force.value(n, t)?,
                )?;
                Ok([T::zero(), g[0], g[1], g[1], g[2], g[3], g[3]])
            }
            Motion::Forced { trajectory } => {
                let tr = trajectory(t);
                let g = rhs_g_forced(
                    &self.setup,
                    &[theta.qi_avg, theta.zu_plus_dot, theta.zu_minus_dot, theta.zu_plus, theta.zu_minus],
                    rp,
                    rm,
                    &tr,
                )?;
                Ok([g[0], tr[2], g[1], g[2], tr[1], g[3], g[4]])
            }
            Motion::Generation { .. } => Ok([T::zero(); 7]),
        }
    }

    /// Boundary discharge (q₊, q₋) and source (S₊, S₋) for the stage at step n.
    fn boundary_data(&self, theta: &Theta<T>, g: &[T; 7], n: usize, star: bool) -> Result<((T, T), (T, T))> {
        match &self.motion {
            Motion::Generation { plus, minus } => {
                let m = n as i64;
                let q = (plus.get(m)?, minus.get(m)?);
                let (sp, sps) = generation_source(plus, if star { m - 1 } else { m }, self.config.order, self.dt)?;
                let (sm, sms) = generation_source(minus, if star { m - 1 } else { m }, self.config.order, self.dt)?;
                Ok((q, if star { (sps, sms) } else { (sp, sm) }))
            }
            _ => Ok((theta.boundary_discharge(self.setup.ell), source_from_g(g, self.setup.ell))),
        }
    }

    /// Outer ghost discharge and source per side at step n.
    fn far_data(&self, n: usize, star: bool) -> Result<Option<[(T, T); 2]>> {
        match &self.far {
            FarBoundary::Open => Ok(None),
            FarBoundary::Discharge { plus, minus } => {
                let m = n as i64;
                let mut out = [(T::zero(), T::zero()); 2];
                for (i, g) in [plus, minus].into_iter().enumerate() {
                    let (s, ss) = generation_source(g, if star { m - 1 } else { m }, self.config.order, self.dt)?;
                    out[i] = (g.get(m)?, if star { ss } else { s });
                }
                Ok(Some(out))
            }
        }
    }

    fn abort(&self, e: Error) -> Error {
        match e {
            Error::Abort { .. } => e,
            other => Error::Abort { step: self.step_index, t: self.time().as_f64(), reason: other.to_string() },
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let r = match self.config.order {
            Order::First => self.step_lax_friedrichs(),
            Order::Second => self.step_maccormack(),
        };
        r.map_err(|e| self.abort(e))
    }

    /// Loads the stored state into the mirrored buffers, fills the boundary
    /// and ghost entries and computes the nonlocal fluxes.
    fn load(&mut self, q0: (T, T), far: Option<[(T, T); 2]>) -> Result<(T, T)> {
        let eps = self.setup.epsilon;
        let n = self.grid.n;
        let mut traces = [T::zero(); 2];
        for (i, side) in self.sides.iter_mut().enumerate() {
            let src = if i == 0 { &self.state.plus } else { &self.state.minus };
            for k in 0..=n {
                side.z[k] = src.zeta[k];
                side.q[k] = side.sgn * src.q[k];
            }
            side.q[0] = side.sgn * if i == 0 { q0.0 } else { q0.1 };
            let (tr, far_tr) = nonlocal_flux(&self.ws, eps, &side.z, &side.q, &mut side.f, &mut side.v)?;
            side.v[0] = tr;
            side.z[n + 1] = side.z[n];
            match far {
                None => {
                    side.q[n + 1] = side.q[n];
                    side.v[n + 1] = side.v[n];
                }
                Some(fd) => {
                    side.q[n + 1] = side.sgn * fd[i].0;
                    side.v[n + 1] = far_tr;
                }
            }
            traces[i] = tr;
        }
        Ok((traces[0], traces[1]))
    }

    /// One Lax-Friedrichs step for the field and explicit Euler for Θ.
    pub fn step_lax_friedrichs(&mut self) -> Result<()> {
        let n_idx = self.step_index;
        let t = self.time_at(n_idx);
        let t1 = self.time_at(n_idx + 1);
        let dt = self.dt;
        let dx = self.grid.dx;
        let lam = dt / dx;
        let diff = dx / (lit::<T>(2.0) * dt);
        let half = lit::<T>(0.5);
        let n = self.grid.n;

        let theta = self.theta;
        let q0 = self.boundary_data(&theta, &[T::zero(); 7], n_idx, false)?.0;
        let far = self.far_data(n_idx, false)?;
        let traces = self.load(q0, far)?;
        let g = self.eval_g(&theta, traces, n_idx, t)?;
        let (_, src) = self.boundary_data(&theta, &g, n_idx, false)?;

        for (i, side) in self.sides.iter_mut().enumerate() {
            let s = side.sgn * if i == 0 { src.0 } else { src.1 };
            let sf = far.map_or(T::zero(), |fd| side.sgn * fd[i].1);
            let (z, q, v) = (&side.z, &side.q, &side.v);
            let face = |k: usize| {
                // face between k − 1 and k
                (
                    half * (q[k] + q[k - 1]) - diff * (z[k] - z[k - 1]),
                    half * (v[k] + v[k - 1]) - diff * (q[k] - q[k - 1]),
                )
            };
            let mut left = face(1);
            for k in 1..=n {
                let right = face(k + 1);
                side.zn[k] = z[k] - lam * (right.0 - left.0);
                side.qn[k] = q[k] - lam * (right.1 - left.1) + dt * (s * self.b[k] + sf * self.bf[k]);
                left = right;
            }
        }
        self.theta = self.advance(&theta, &g, None);
        self.finish(n_idx, t1, traces)
    }

    /// One MacCormack step for the field and Heun for Θ.
    pub fn step_maccormack(&mut self) -> Result<()> {
        let n_idx = self.step_index;
        let t = self.time_at(n_idx);
        let t1 = self.time_at(n_idx + 1);
        let dt = self.dt;
        let dx = self.grid.dx;
        let lam = dt / dx;
        let half = lit::<T>(0.5);
        let n = self.grid.n;
        let eps = self.setup.epsilon;

        let theta = self.theta;
        let q0 = self.boundary_data(&theta, &[T::zero(); 7], n_idx, false)?.0;
        let far = self.far_data(n_idx, false)?;
        let traces = self.load(q0, far)?;
        let g = self.eval_g(&theta, traces, n_idx, t)?;
        let (_, src) = self.boundary_data(&theta, &g, n_idx, false)?;

        // predictor, backward differences in distance order
        for (i, side) in self.sides.iter_mut().enumerate() {
            let s = side.sgn * if i == 0 { src.0 } else { src.1 };
            let sf = far.map_or(T::zero(), |fd| side.sgn * fd[i].1);
            for k in 1..=n {
                side.zs[k] = side.z[k] - lam * (side.q[k] - side.q[k - 1]);
                side.qs[k] = side.q[k] - lam * (side.v[k] - side.v[k - 1]) + dt * (s * self.b[k] + sf * self.bf[k]);
            }
        }
        let theta_star = {
            let saved = self.theta;
            self.theta = self.advance(&theta, &g, None);
            self.project(t1)?;
            let ts = self.theta;
            self.theta = saved;
            ts
        };
        for z in [theta_star.zu_plus, theta_star.zu_minus] {
            if !(T::one() + eps * z > T::zero()) {
                return Err(Error::Physical(format!("dry contact point in predictor, zeta = {z}")));
            }
        }

        let far_star = self.far_data(n_idx + 1, true)?;
        let mut traces_star = [T::zero(); 2];
        for (i, side) in self.sides.iter_mut().enumerate() {
            let (tr, far_tr) = nonlocal_flux(&self.ws, eps, &side.zs, &side.qs, &mut side.f, &mut side.vs)?;
            traces_star[i] = tr;
            match far_star {
                None => {
                    side.qs[n + 1] = side.qs[n];
                    side.vs[n + 1] = side.vs[n];
                }
                Some(fd) => {
                    side.qs[n + 1] = side.sgn * fd[i].0;
                    side.vs[n + 1] = far_tr;
                }
            }
        }
        let traces_star = (traces_star[0], traces_star[1]);
        let g_star = self.eval_g(&theta_star, traces_star, n_idx + 1, t1)?;
        let (_, src_star) = self.boundary_data(&theta_star, &g_star, n_idx + 1, true)?;

        // corrector, forward differences of the predicted flux
        let visc = if self.config.viscosity_active() { self.config.viscosity_cells } else { 0 };
        let nu_dx = self.config.viscosity_nu * dx;
        for (i, side) in self.sides.iter_mut().enumerate() {
            let s = side.sgn * if i == 0 { src.0 + src_star.0 } else { src.1 + src_star.1 };
            let sf = match (far, far_star) {
                (Some(a), Some(b)) => side.sgn * (a[i].1 + b[i].1),
                _ => T::zero(),
            };
            for k in 1..=n {
                side.zn[k] = side.z[k] - half * lam * (side.q[k] - side.q[k - 1] + side.qs[k + 1] - side.qs[k]);
                side.qn[k] = side.q[k] - half * lam * (side.v[k] - side.v[k - 1] + side.vs[k + 1] - side.vs[k])
                    + half * dt * (s * self.b[k] + sf * self.bf[k]);
            }
            for k in 1..=visc {
                side.zn[k] += nu_dx * (side.z[k + 1] - lit::<T>(2.0) * side.z[k] + side.z[k - 1]);
            }
        }
        self.theta = self.advance(&theta, &g, Some((&theta_star, &g_star)));
        self.finish(n_idx, t1, traces)
    }

    /// Euler step (`star` = None) or Heun corrector from Θ with rates g.
    fn advance(&self, theta: &Theta<T>, g: &[T; 7], star: Option<(&Theta<T>, &[T; 7])>) -> Theta<T> {
        let dt = self.dt;
        let half = lit::<T>(0.5);
        let mut rate = *g;
        if let Some((_, gs)) = star {
            for j in 0..7 {
                rate[j] = half * (g[j] + gs[j]);
            }
        }
        let mut next = theta.axpy(dt, &rate);
        if self.config.trace_stepping == TraceStepping::Explicit {
            return next;
        }
        let w = T::one() / self.setup.kappa;
        let (sn, cs) = (w * dt).sin_cos();
        let rotate = |z: T, zd: T| (cs * z + sn / w * zd, -w * sn * z + cs * zd);
        let a = theta.to_array();
        let mut out = next.to_array();
        // (ζ̲, ζ̲̇) pairs; the non-oscillatory part of the rate is ζ̲̈ + ζ̲/κ²
        for (iz, id) in [(5, 2), (6, 3)] {
            let nl = g[id] + w * w * a[iz];
            let (z, zd) = match star {
                None => rotate(a[iz], a[id] + dt * nl),
                Some((ts, gs)) => {
                    let nl_star = gs[id] + w * w * ts.to_array()[iz];
                    let (rz, rd) = rotate(a[iz], a[id]);
                    let (fz, fd) = rotate(T::zero(), nl);
                    (rz + half * dt * fz, rd + half * dt * (fd + nl_star))
                }
            };
            out[iz] = z;
            out[id] = zd;
        }
        next = Theta::from_array(out);
        next
    }

    fn finish(&mut self, n_idx: usize, t1: T, traces: (T, T)) -> Result<()> {
        let n = self.grid.n;
        for (i, side) in self.sides.iter().enumerate() {
            let dst = if i == 0 { &mut self.state.plus } else { &mut self.state.minus };
            for k in 1..=n {
                dst.zeta[k] = side.zn[k];
                dst.q[k] = side.sgn * side.qn[k];
            }
        }
        self.project(t1)?;
        self.step_index = n_idx + 1;
        self.sync_boundary_nodes(n_idx + 1)?;
        self.last_traces = traces;
        let eps = self.setup.epsilon;
        if !(self.state.min_depth(eps) > T::zero()) {
            return Err(Error::Physical("water depth became non-positive".into()));
        }
        if !(T::one() + eps * self.theta.zu_plus > T::zero()) || !(T::one() + eps * self.theta.zu_minus > T::zero()) {
            return Err(Error::Physical("dry contact point".into()));
        }
        if self.theta.to_array().iter().any(|x| !x.is_finite()) {
            return Err(Error::Physical("non-finite coupling state".into()));
        }
        Ok(())
    }
}

/// Quadratic extrapolation of cells 1..3 to the boundary node.
#[inline]
fn extrapolate<T: Real>(z: &[T]) -> T {
    lit::<T>(3.0) * z[1] - lit::<T>(3.0) * z[2] + z[3]
}

/// Boundary elevation extrapolated from the first three cells.
pub fn extrapolated_trace<T: Real>(z: &[T]) -> T {
    extrapolate(z)
}
