use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use floatwave::error::Error;
use floatwave::harness::checks::property_suite;
use floatwave::harness::output::{plot_script, write_diagnostics_csv, write_fields_csv, write_report_csv};
use floatwave::harness::{build_solver, convergence_study, run_scenario, Reference, ScenarioSpec};
use floatwave::scheme::Order;

const EXIT_SPEC: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "floatwave", version, about = "Boussinesq waves interacting with a floating object")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Run the property suite first; a failing property exits with 1.
    #[arg(long, global = true)]
    seed_check: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Single run: writes diagnostics.csv and fields.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// Mesh parameter N; defaults to the first entry of n_list.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Convergence study over n_list: writes report.csv and plot.py.
    Converge {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config's scheme.
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Lf,
    Mc,
}

impl From<Scheme> for Order {
    fn from(s: Scheme) -> Order {
        match s {
            Scheme::Lf => Order::First,
            Scheme::Mc => Order::Second,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Size { .. } | Error::MissingSample(_) => EXIT_SPEC,
        Error::Physical(_) | Error::Singular(_) | Error::Abort { .. } => EXIT_ABORT,
        Error::OracleInvalid(_) => EXIT_ORACLE,
        Error::Io(_) => 1,
    }
}

struct Failure {
    code: u8,
    err: Error,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure { code: exit_code(&err), err }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

/// Builds the initial solver for every mesh so that a bad setup (dry
/// initial state, too few viscous cells, ...) is reported as a spec error
/// rather than a solver abort.
fn check_setup(spec: &ScenarioSpec, meshes: &[usize]) -> Result<(), Failure> {
    for &n in meshes {
        build_solver(spec, n).map_err(|err| match err {
            Error::Io(_) => Failure::from(err),
            _ => Failure { code: EXIT_SPEC, err },
        })?;
    }
    Ok(())
}

fn load(common: &Common) -> Result<ScenarioSpec, Error> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", common.config.display())))?;
    ScenarioSpec::parse_with_scheme(&text, common.scheme.map(Order::from))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn run(common: &Common, n: Option<usize>) -> Result<(), Failure> {
    let spec = load(common)?;
    let n = n.unwrap_or(spec.n_list[0]);
    check_setup(&spec, &[n])?;
    fs::create_dir_all(&common.out)?;
    let r = run_scenario(&spec, n, Some(&common.out))?;
    write_diagnostics_csv(create(&common.out, "diagnostics.csv")?, &r.diagnostics)?;
    write_fields_csv(create(&common.out, "fields.csv")?, &r.state, &r.grid)?;
    fs::write(common.out.join("scenario.cfg"), spec.to_config_string())?;
    let last = r.diagnostics.last().expect("initial row");
    println!(
        "{} N={n} dx={:.4e} dt={:.4e} steps={} t={:.4} delta={:.6e} qi_avg={:.6e} ({:.2}s)",
        spec.kind.name(),
        r.grid.dx,
        r.dt,
        r.steps,
        last.t,
        last.delta,
        last.qi_avg,
        r.runtime_s
    );
    Ok(())
}

fn converge(common: &Common) -> Result<(), Failure> {
    let spec = load(common)?;
    let mut meshes = spec.n_list.clone();
    if let Reference::SelfConvergence { n_ref } = spec.reference {
        meshes.push(n_ref);
    }
    check_setup(&spec, &meshes)?;
    fs::create_dir_all(&common.out)?;
    let report = convergence_study(&spec)?;
    write_report_csv(create(&common.out, "report.csv")?, &report)?;
    fs::write(common.out.join("plot.py"), plot_script("report.csv", spec.kind.name()))?;
    fs::write(common.out.join("scenario.cfg"), spec.to_config_string())?;
    for row in &report.rows {
        let errs: Vec<String> = row.errors.iter().map(|e| format!("{e:.3e}")).collect();
        println!("N={:<5} dx={:.4e}  {}  ({:.2}s)", row.n, row.dx, errs.join("  "), row.runtime_s);
    }
    for (o, fit) in report.observables.iter().zip(&report.fits) {
        match fit {
            Some(f) => println!("order {:<8} {:.3} (fit residual {:.2e})", o.name(), f.order, f.residual),
            None => println!("order {:<8} undefined", o.name()),
        }
    }
    if let Some(d) = report.oracle_disagreement {
        println!("oracle disagreement {d:.2e}");
    }
    Ok(())
}

fn seed_check() -> Result<bool, Error> {
    let mut ok = true;
    for c in property_suite()? {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.pass;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seed_check {
        match seed_check() {
            Ok(true) => {}
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
        }
    }
    let result = match &cli.command {
        None => Ok(()),
        Some(Command::Run { common, n }) => run(common, *n),
        Some(Command::Converge { common }) => converge(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.err);
            ExitCode::from(f.code)
        }
    }
}
