//! Grid-convergence studies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reference::{fixed_object_exact, linear_decay_exact, Side};
use crate::grid::Grid;
use crate::state::State;

use super::config::{Forcing, Observable, Reference, ScenarioKind, ScenarioSpec};
use super::scenario::{periodic_of, physical_setup, run_scenario, run_with_snapshots, soliton_of, DiagRow, RunResult};

/// Least-squares fit of log(err) against log(Δx).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderFit {
    pub order: f64,
    /// RMS deviation of log(err) from the fitted line.
    pub residual: f64,
}

/// None when fewer than two errors are positive and finite.
pub fn fit_order(dx: &[f64], err: &[f64]) -> Option<OrderFit> {
    let pts: Vec<(f64, f64)> = dx
        .iter()
        .zip(err)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(d, e)| (d.ln(), e.ln()))
        .collect();
    if pts.len() < 2 || pts.len() != dx.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let res = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Some(OrderFit { order: slope, residual: res })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub dx: f64,
    /// Same order as [`ConvergenceReport::observables`].
    pub errors: Vec<f64>,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub kind: ScenarioKind,
    pub observables: Vec<Observable>,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<Option<OrderFit>>,
    /// Largest Euler/Talbot disagreement when the Laplace oracle is used.
    pub oracle_disagreement: Option<f64>,
}

impl ConvergenceReport {
    pub fn fit(&self, obs: Observable) -> Option<OrderFit> {
        let i = self.observables.iter().position(|o| *o == obs)?;
        self.fits[i]
    }

    pub fn errors(&self, obs: Observable) -> Vec<f64> {
        match self.observables.iter().position(|o| *o == obs) {
            Some(i) => self.rows.iter().map(|r| r.errors[i]).collect(),
            None => vec![],
        }
    }
}

fn series(d: &[DiagRow], obs: Observable) -> Vec<f64> {
    d.iter()
        .map(|r| match obs {
            Observable::Delta => r.delta,
            Observable::QiAvg => r.qi_avg,
            Observable::ZuPlus => r.zu_plus,
            Observable::Zeta | Observable::Q => unreachable!("field observable"),
        })
        .collect()
}

/// Max over coarse steps of |coarse − reference|, pairing coarse step n with
/// reference step ratio·n and checking that their times agree.
fn series_restriction_error(coarse: &[DiagRow], fine: &[DiagRow], ratio: usize, obs: Observable) -> Result<f64> {
    let (a, b) = (series(coarse, obs), series(fine, obs));
    let mut e = 0.0f64;
    for (n, row) in coarse.iter().enumerate() {
        let j = n * ratio;
        let other = fine.get(j).ok_or(Error::Size { expected: j + 1, got: fine.len() })?;
        if (row.t - other.t).abs() > 1e-9 * row.t.max(1.0) {
            return Err(Error::Config(format!("time mismatch: {} vs {}", row.t, other.t)));
        }
        e = e.max((a[n] - b[j]).abs());
    }
    Ok(e)
}

fn max_diff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Size { expected: a.len(), got: b.len() });
    }
    Ok(a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Max over coarse cells of |coarse − reference| at coinciding centers on
/// both half-lines. Each pairing is checked by coordinate equality.
pub fn restriction_error(coarse: &RunResult, fine: &State<f64>, fine_grid: &Grid<f64>, obs: Observable) -> Result<f64> {
    let (nc, nf) = (coarse.grid.n, fine_grid.n);
    if (nf + 1) % (nc + 1) != 0 {
        return Err(Error::Config(format!("meshes N = {nc} and N = {nf} do not nest")));
    }
    let ratio = (nf + 1) / (nc + 1);
    let pick = |s: &State<f64>, plus: bool, k: usize| {
        let h = if plus { &s.plus } else { &s.minus };
        if obs == Observable::Zeta { h.zeta[k] } else { h.q[k] }
    };
    let mut e = 0.0f64;
    for k in 1..=nc {
        let j = k * ratio;
        let (xc, xf) = (coarse.grid.x_right(k), fine_grid.x_right(j));
        if (xc - xf).abs() > 1e-12 * xc.abs().max(1.0) {
            return Err(Error::Config(format!("restriction mismatch: {xc} vs {xf}")));
        }
        for plus in [true, false] {
            e = e.max((pick(&coarse.state, plus, k) - pick(fine, plus, j)).abs());
        }
    }
    Ok(e)
}

/// Runs every mesh of the spec (in parallel) and fits the order of each
/// observable.
pub fn convergence_study(spec: &ScenarioSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    if spec.n_list.len() < 3 {
        return Err(Error::Config("a convergence study needs at least 3 meshes".into()));
    }
    let runs: Vec<RunResult> = spec.n_list.par_iter().map(|&n| run_scenario(spec, n, None)).collect::<Result<_>>()?;
    let mut observables = spec.kind.observables().to_vec();
    let mut oracle_disagreement = None;
    let mut rows = Vec::new();
    match spec.reference {
        Reference::SelfConvergence { n_ref } => {
            observables.extend([Observable::Zeta, Observable::Q]);
            let ratios: Vec<usize> = runs.iter().map(|r| (n_ref + 1) / (r.n + 1)).collect();
            let snap_steps: Vec<usize> = runs.iter().zip(&ratios).map(|(r, m)| r.steps * m).collect();
            let (reference, snaps) = run_with_snapshots(spec, n_ref, None, &snap_steps)?;
            for (i, run) in runs.iter().enumerate() {
                let errors = observables
                    .iter()
                    .map(|&o| {
                        if o.is_field() {
                            restriction_error(run, &snaps[i], &reference.grid, o)
                        } else {
                            series_restriction_error(&run.diagnostics, &reference.diagnostics, ratios[i], o)
                        }
                    })
                    .collect::<Result<_>>()?;
                rows.push(ReportRow { n: run.n, dx: run.grid.dx, errors, runtime_s: run.runtime_s });
            }
        }
        Reference::Oracle => {
            for run in &runs {
                let times: Vec<f64> = run.diagnostics.iter().map(|r| r.t).collect();
                let exact = oracle_series(spec, &times, &mut oracle_disagreement)?;
                let errors = observables
                    .iter()
                    .map(|&o| oracle_error(spec, run, o, &exact))
                    .collect::<Result<_>>()?;
                rows.push(ReportRow { n: run.n, dx: run.grid.dx, errors, runtime_s: run.runtime_s });
            }
        }
    }
    let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let fits = (0..observables.len())
        .map(|i| fit_order(&dx, &rows.iter().map(|r| r.errors[i]).collect::<Vec<_>>()))
        .collect();
    Ok(ConvergenceReport { kind: spec.kind, observables, rows, fits, oracle_disagreement })
}

/// Exact scalar series at the sample times, when the observable is a series.
fn oracle_series(spec: &ScenarioSpec, times: &[f64], disagreement: &mut Option<f64>) -> Result<Vec<f64>> {
    let setup = physical_setup(spec)?;
    match (spec.kind, spec.forcing) {
        (ScenarioKind::DecayLinear, Forcing::Release { delta0 }) => {
            let check = linear_decay_exact(times, delta0, &setup)?;
            *disagreement = Some(disagreement.unwrap_or(0.0).max(check.max_disagreement));
            Ok(check.euler)
        }
        (ScenarioKind::FixedLinear, _) => {
            let p = periodic_of(spec, &setup)?.ok_or_else(|| Error::Config("missing periodic spec".into()))?;
            times.iter().map(|&t| Ok(fixed_object_exact(&p, &setup, t, spec.ell, Side::Plus)?.2)).collect()
        }
        _ => Ok(vec![]),
    }
}

fn oracle_error(spec: &ScenarioSpec, run: &RunResult, obs: Observable, exact: &[f64]) -> Result<f64> {
    if !obs.is_field() {
        return max_diff(&series(&run.diagnostics, obs), exact);
    }
    // soliton fields on the right half-line at the final time
    let t = run.diagnostics.last().map_or(0.0, |r| r.t);
    let (crest, profile) = match (spec.forcing, soliton_of(spec)?) {
        (Forcing::Soliton { crest, .. }, Some(p)) => (crest, Some(p)),
        _ => (0.0, None),
    };
    let mut e = 0.0f64;
    for k in 1..=run.grid.n {
        let x = run.grid.x_right(k);
        let (z, q) = match &profile {
            Some(p) => {
                let z = p.eval(x - crest - p.c * t);
                (z, p.c * z)
            }
            None => (0.0, 0.0),
        };
        let got = if obs == Observable::Zeta { run.state.plus.zeta[k] } else { run.state.plus.q[k] };
        e = e.max((got - if obs == Observable::Zeta { z } else { q }).abs());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_power_law() {
        let dx = [0.1, 0.05, 0.025, 0.02];
        let err: Vec<f64> = dx.iter().map(|d: &f64| 3.0 * d.powi(2)).collect();
        let f = fit_order(&dx, &err).unwrap();
        assert!((f.order - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(fit_order(&dx, &[0.0, 0.0, 0.0, 0.0]).is_none());
        assert!(fit_order(&[0.1], &[0.1]).is_none());
    }
}
