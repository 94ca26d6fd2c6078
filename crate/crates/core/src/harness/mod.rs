//! Scenario runs, convergence studies and their CSV output.

pub mod checks;
pub mod config;
pub mod control;
pub mod output;
pub mod scenario;
pub mod study;

pub use config::{Forcing, MeshRule, Observable, Reference, ScenarioKind, ScenarioSpec};
pub use scenario::{build_solver, run_scenario, DiagRow, RunResult};
pub use study::{convergence_study, fit_order, ConvergenceReport, OrderFit, ReportRow};
