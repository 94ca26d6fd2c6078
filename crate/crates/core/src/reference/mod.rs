//! Exact and semi-exact solutions used to measure the solver's error.
//!
//! These work in `f64` only.

pub mod laplace;
pub mod periodic;
pub mod soliton;
pub mod trace;

pub use laplace::{linear_decay_exact, LaplaceCheck};
pub use periodic::{fixed_object_exact, PeriodicSolutionSpec, Side};
pub use soliton::{soliton_profile, soliton_speed_sq, SolitonProfile};
pub use trace::{trace_ode_residual, TraceSample};

use std::io::Write;

use crate::error::Result;

/// Writes `(t|x, value)` pairs as a two-column CSV.
pub fn write_samples_csv<W: Write>(out: W, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([format!("{a:.17e}"), format!("{b:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}
