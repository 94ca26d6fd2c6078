//! CSV output and the plot script.

use std::io::Write;

use crate::error::Result;
use crate::grid::Grid;
use crate::state::State;

use super::scenario::DiagRow;
use super::study::ConvergenceReport;

fn f(x: f64) -> String {
    format!("{x:.17e}")
}

/// Columns t, delta, delta_dot, qi_avg, zu_plus, zu_minus, volume.
pub fn write_diagnostics_csv<W: Write>(out: W, rows: &[DiagRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "delta", "delta_dot", "qi_avg", "zu_plus", "zu_minus", "volume"])?;
    for r in rows {
        w.write_record([f(r.t), f(r.delta), f(r.delta_dot), f(r.qi_avg), f(r.zu_plus), f(r.zu_minus), f(r.volume)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns x, zeta, q in increasing x.
pub fn write_fields_csv<W: Write>(out: W, state: &State<f64>, grid: &Grid<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "zeta", "q"])?;
    for (x, z, q) in state.physical_rows(grid) {
        w.write_record([f(x), f(z), f(q)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns N, dx, err_<obs>…, order_<obs>…, runtime_s. The fitted order is
/// repeated on every row; an undefined order is written as `nan`.
pub fn write_report_csv<W: Write>(out: W, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["N".to_string(), "dx".to_string()];
    head.extend(report.observables.iter().map(|o| format!("err_{}", o.name())));
    head.extend(report.observables.iter().map(|o| format!("order_{}", o.name())));
    head.push("runtime_s".into());
    w.write_record(&head)?;
    for row in &report.rows {
        let mut rec = vec![row.n.to_string(), f(row.dx)];
        rec.extend(row.errors.iter().map(|e| f(*e)));
        rec.extend(report.fits.iter().map(|fit| fit.map_or("nan".into(), |v| format!("{:.4}", v.order))));
        rec.push(format!("{:.3}", row.runtime_s));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Python/matplotlib script plotting a report CSV on log-log axes.
pub fn plot_script(report_csv: &str, title: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{report_csv}")))
dx = [float(r["dx"]) for r in rows]
fig, ax = plt.subplots()
for key in rows[0]:
    if key.startswith("err_"):
        ax.loglog(dx, [float(r[key]) for r in rows], "o-",
                  label="{{}} (order {{}})".format(key[4:], rows[0]["order_" + key[4:]]))
ax.set_xlabel("dx")
ax.set_ylabel("max error")
ax.set_title("{title}")
ax.legend()
fig.savefig("{report_csv}".replace(".csv", ".png"), dpi=150)
"#
    )
}
