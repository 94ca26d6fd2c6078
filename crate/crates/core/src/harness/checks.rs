//! Self-checks that need no reference data. Used by the CLI `--seed-check`
//! flag and by the acceptance test.

use std::sync::Arc;

use crate::coupling::{assemble_and_invert_m, geometry_coeffs, rhs_g};
use crate::error::{Error, Result};
use crate::harness::config::{Forcing, ScenarioKind, ScenarioSpec};
use crate::harness::scenario::{build_solver, run_scenario};
use crate::helmholtz::HelmholtzWorkspace;
use crate::reference::trace::{trace_ode_residual, TraceSample};
use crate::scheme::{extrapolated_trace, ExternalForce, Motion, Order};
use crate::setup::{DepthProfile, PhysicalSetup};

/// Outcome of one property.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// Mesh pair used for the volume drift ratio.
pub const DRIFT_MESHES: (usize, usize) = (399, 799);
/// Meshes for the trace checks.
pub const TRACE_MESHES: [usize; 3] = [99, 199, 399];
const PROPERTY_T_FINAL: f64 = 5.0;

fn smooth_rhs(n: usize, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (7.0 * x + phase).sin() + 0.3 * (31.0 * x * x - phase).cos() + 0.1 * ((i * 37 + 11) % 17) as f64
        })
        .collect()
}

/// max |(1 − κ²D²)R₁f − f| / max |f| over a few sizes and parameters.
pub fn r1_round_trip() -> Result<f64> {
    let mut worst = 0.0f64;
    for (j, &(n, kappa, dx)) in [(16, 0.3, 0.1), (200, 0.316, 0.03), (1000, 0.05, 0.004), (64, 1.0, 0.5)].iter().enumerate() {
        let ws = HelmholtzWorkspace::new(kappa, dx, n)?;
        let f = smooth_rhs(n, j as f64);
        let back = ws.apply_helmholtz(&ws.solve_r1(&f)?)?;
        let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in back.iter().zip(&f) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Ok(worst)
}

/// (H·1 == 1 bitwise, max |R₁c − c| / |c|).
pub fn r1_constants() -> Result<(bool, f64)> {
    let ws = HelmholtzWorkspace::new(0.316, 0.03, 200)?;
    let exact = ws.apply_helmholtz(&vec![1.0; 200])? == vec![1.0; 200];
    let c = 2.5f64;
    let v = ws.solve_r1(&vec![c; 200])?;
    Ok((exact, v.iter().fold(0.0f64, |m, x| m.max((x - c).abs() / c))))
}

/// max |M̃·M̃⁻¹ − I| over a spread of object and trace states.
pub fn coupling_identity() -> Result<f64> {
    let mut worst = 0.0f64;
    for (eps, k2) in [(0.0, 0.1), (0.3, 0.1), (0.3, 0.3)] {
        let setup = PhysicalSetup::new(eps, f64::sqrt(k2 / 3.0), 4.0, DepthProfile::Constant(0.7))?;
        for (d, zp, zm) in [(0.0, 0.0, 0.0), (0.4, 0.2, -0.1), (-0.5, -0.3, 0.25)] {
            let coeffs = geometry_coeffs(&setup, eps * d)?;
            let cm = assemble_and_invert_m(&setup, &coeffs, zp, zm)?;
            for i in 0..4 {
                for j in 0..4 {
                    let s: f64 = (0..4).map(|k| cm.m[i][k] * cm.inv[k][j]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((s - id).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn short(kind: ScenarioKind, order: Order) -> ScenarioSpec {
    let mut spec = ScenarioSpec::preset(kind, 0.3, order);
    spec.t_final = PROPERTY_T_FINAL;
    spec
}

/// True if 200 steps from rest leave every field value and Θ at exactly zero.
pub fn rest_is_fixed(order: Order) -> Result<bool> {
    let mut spec = short(ScenarioKind::DecayNonlinear, order);
    spec.forcing = Forcing::Release { delta0: 0.0 };
    let (mut s, _) = build_solver(&spec, 80)?;
    for _ in 0..200 {
        s.step()?;
    }
    let zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
    Ok(zero(&s.state.plus.zeta)
        && zero(&s.state.plus.q)
        && zero(&s.state.minus.zeta)
        && zero(&s.state.minus.q)
        && zero(&s.theta.to_array()))
}

/// Release with an even-in-time pull, stepped with the full 7-component
/// system: (max |⟨q_i⟩|, max |ζ(x) − ζ(−x)| + max |q(x) + q(−x)|) over the run.
pub fn symmetric_run(order: Order) -> Result<(f64, f64)> {
    let spec = short(ScenarioKind::DecayNonlinear, order);
    let (mut s, steps) = build_solver(&spec, 120)?;
    s.motion = Motion::Free { force: ExternalForce::Function(Arc::new(|t: f64| 0.2 * t.cos())) };
    let (mut qi, mut asym) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        s.step()?;
        qi = qi.max(s.theta.qi_avg.abs());
        let (p, m) = (&s.state.plus, &s.state.minus);
        for k in 0..p.zeta.len() {
            asym = asym.max((p.zeta[k] - m.zeta[k]).abs() + (p.q[k] + m.q[k]).abs());
        }
    }
    Ok((qi, asym))
}

/// Largest |V(t) − V(0)| of the discrete volume over a run.
pub fn volume_drift(spec: &ScenarioSpec, n: usize) -> Result<f64> {
    let r = run_scenario(spec, n, None)?;
    let v0 = r.diagnostics[0].volume;
    Ok(r.diagnostics.iter().fold(0.0f64, |m, d| m.max((d.volume - v0).abs())))
}

/// Drift ratio when Δx and Δt are both halved at fixed Courant number.
pub fn volume_drift_ratio(order: Order) -> Result<f64> {
    let spec = short(ScenarioKind::DecayNonlinear, order);
    Ok(volume_drift(&spec, DRIFT_MESHES.0)? / volume_drift(&spec, DRIFT_MESHES.1)?)
}

/// For each mesh: (max |extrapolated ζ trace − ζ̲₊|, max |trace-ODE residual|)
/// over a nonlinear release run.
pub fn trace_errors(order: Order, meshes: &[usize]) -> Result<Vec<(f64, f64)>> {
    let spec = short(ScenarioKind::DecayNonlinear, order);
    meshes.iter().map(|&n| trace_errors_at(&spec, n)).collect()
}

fn trace_errors_at(spec: &ScenarioSpec, n: usize) -> Result<(f64, f64)> {
    let (mut s, steps) = build_solver(spec, n)?;
    let ell = s.setup.ell;
    let mut consistency = 0.0f64;
    let mut series = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let th = s.theta;
        consistency = consistency.max((extrapolated_trace(&s.state.plus.zeta) - th.zu_plus).abs());
        let (rp, rm) = s.current_traces()?;
        let g = rhs_g(&s.setup, &th, rp, rm, 0.0)?;
        series.push(TraceSample {
            zeta: th.zu_plus,
            f: th.qi_avg,
            g: -ell * th.delta_dot,
            f_dot: g[0],
            g_dot: -ell * g[1],
            r1f: rp,
        });
        if k < steps {
            s.step()?;
        }
    }
    let res = trace_ode_residual(&series, 1.0, s.setup.epsilon, s.setup.kappa, s.dt)?;
    let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !worst.is_finite() {
        return Err(Error::Physical("non-finite trace residual".into()));
    }
    Ok((consistency, worst))
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Runs the whole suite.
pub fn property_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |name: &str, detail: String, pass: bool| out.push(Check { name: name.into(), detail, pass });

    let rt = r1_round_trip()?;
    push("R1 round trip", format!("{rt:.2e} <= 1e-12"), rt <= 1e-12);
    let (exact, rel) = r1_constants()?;
    push("R1 constants", format!("forward exact = {exact}, solve rel err {rel:.1e}"), exact && rel <= 1e-14);
    let mi = coupling_identity()?;
    push("M M^-1 identity", format!("{mi:.2e} <= 1e-12"), mi <= 1e-12);
    for (order, tag, lo, hi) in [(Order::First, "LF", 1.4, 2.6), (Order::Second, "MC", 2.8, 5.2)] {
        let fixed = rest_is_fixed(order)?;
        push(&format!("rest fixed point ({tag})"), format!("exact = {fixed}"), fixed);
        let (qi, asym) = symmetric_run(order)?;
        push(
            &format!("symmetric run ({tag})"),
            format!("max|qi| {qi:.1e}, field asymmetry {asym:.1e}"),
            qi <= 1e-10 && asym <= 1e-10,
        );
        let ratio = volume_drift_ratio(order)?;
        push(&format!("volume drift ratio ({tag})"), format!("{ratio:.2} in [{lo}, {hi}]"), ratio >= lo && ratio <= hi);
        let te = trace_errors(order, &TRACE_MESHES)?;
        let cons: Vec<f64> = te.iter().map(|t| t.0).collect();
        let res: Vec<f64> = te.iter().map(|t| t.1).collect();
        push(&format!("trace consistency ({tag})"), sci(&cons), decreasing(&cons));
        push(&format!("trace ODE residual ({tag})"), sci(&res), decreasing(&res));
    }
    Ok(out)
}
