//! `exflow`: CSV datasets and oracle checks for the excitation-flow network.

mod datasets;
mod table;
mod verify;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use excitation_flow::{DynClass, Error as LibError, NetworkParams64, Theta};

#[derive(Debug, Parser)]
#[command(name = "exflow", version, about = "Reduced dynamics of an all-to-all qubit network with one excitation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Same-site and cross-site amplitudes of the global unitary.
    Amplitudes {
        #[command(flatten)]
        common: Common,
    },
    /// Flow amplitude of `Phi(t, t + dt)` for each subsystem size and class.
    Flow {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Selection,
        /// Window length in periods.
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
    },
    /// Axial Bloch components under the single-qubit map `Lambda(t1, t)`.
    BlochTraj {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
    },
    /// Axial positivity band of `Lambda(t, t + dt)`.
    BlochDomain {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
    },
    /// Entanglement entropy (nats) of each subsystem.
    Entropy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Selection,
    },
    /// Classical and quantum Fisher information for the coupling and size.
    Fisher {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Selection,
    },
    /// Process, state and cross terms of the single-qubit Fisher information
    /// against the end of the window `[t1, t2]`.
    FisherDecomp {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long, value_enum, default_value_t = ThetaArg::J)]
        theta: ThetaArg,
        /// Divide by `p(t2)(1 - p(t2))` instead of reporting the rescaled terms.
        #[arg(long)]
        raw: bool,
    },
    /// Network size and coupling recovered from single-qubit flows over
    /// `[t, t + dt]`.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
    },
    /// Compare closed forms with the brute-force oracle; exit 2 on failure.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Number of qubits.
    #[arg(long)]
    n: usize,
    /// Coupling strength.
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Grid start, in periods.
    #[arg(long)]
    t1: Option<f64>,
    /// Grid end, in periods.
    #[arg(long)]
    t2: Option<f64>,
    /// Grid intervals; the grid has `steps + 1` rows.
    #[arg(long, default_value_t = 400)]
    steps: usize,
    /// Output path, `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Clone, Args)]
struct Selection {
    /// Subsystem size, a single value or an inclusive range `a..b`.
    #[arg(long)]
    k: Option<KRange>,
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

impl From<ClassArg> for DynClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Zero => DynClass::Class0,
            ClassArg::One => DynClass::Class1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThetaArg {
    J,
    N,
}

impl From<ThetaArg> for Theta {
    fn from(t: ThetaArg) -> Self {
        match t {
            ThetaArg::J => Theta::CouplingJ,
            ThetaArg::N => Theta::SizeN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct KRange(RangeInclusive<usize>);

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected a positive integer or a range a..b, got {s:?}"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let k = parse(s)?;
                (k, k)
            }
        };
        if lo == 0 || lo > hi {
            return Err(format!("empty or zero-based range {s:?}"));
        }
        Ok(KRange(lo..=hi))
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Singular(f64),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Singular(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Singular(t1) => write!(
                f,
                "singular propagator: no map starts at t1 = {t1} (period units); the dynamical map is not invertible there"
            ),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Maps a library error raised for a single requested point. `period`
/// converts a singular start time back to period units.
pub fn lib_error(e: LibError, period: f64) -> CliError {
    match e {
        LibError::Singular { t1 } => CliError::Singular(t1 / period),
        other => CliError::Usage(other.to_string()),
    }
}

fn open_out(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(PathBuf::from(path))
            .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn params(n: usize, j: f64) -> Result<NetworkParams64, CliError> {
    NetworkParams64::new(n, j).map_err(|e| CliError::Usage(e.to_string()))
}

fn grid(common: &Common, default_lo: f64, default_hi: Option<f64>) -> Result<datasets::Grid, CliError> {
    if common.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", common.steps)));
    }
    let lo = common.t1.unwrap_or(default_lo);
    let hi = common.t2.unwrap_or(default_hi.unwrap_or(lo + 1.0));
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(CliError::Usage(format!("need finite t1 < t2, got [{lo}, {hi}]")));
    }
    Ok(datasets::Grid { lo, hi, steps: common.steps })
}

fn check_dt(dt: f64) -> Result<(), CliError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--dt must be positive, got {dt}")))
    }
}

fn classes(class: Option<ClassArg>) -> Vec<DynClass> {
    match class {
        Some(c) => vec![c.into()],
        None => vec![DynClass::Class1, DynClass::Class0],
    }
}

fn k_values(sel: &Selection, n: usize, default_hi: usize) -> Result<Vec<usize>, CliError> {
    let range = sel.k.clone().map(|k| k.0).unwrap_or(1..=default_hi);
    if *range.end() > n {
        return Err(CliError::Usage(format!("subsystem size {} exceeds network size {n}", range.end())));
    }
    Ok(range.collect())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (table, out) = match cli.command {
        Command::Amplitudes { common } => {
            let p = params(common.n, common.j)?;
            (datasets::amplitudes(&p, &grid(&common, 0.0, Some(1.0))?), common.out)
        }
        Command::Flow { common, sel, dt } => {
            check_dt(dt)?;
            let p = params(common.n, common.j)?;
            let ks = k_values(&sel, common.n, common.n - 1)?;
            (datasets::flow(&p, &grid(&common, 0.0, Some(1.0))?, &ks, &classes(sel.class), dt), common.out)
        }
        Command::BlochTraj { common, class } => {
            let p = params(common.n, common.j)?;
            (datasets::bloch_traj(&p, &grid(&common, 0.0, None)?, &classes(class))?, common.out)
        }
        Command::BlochDomain { common, class, dt } => {
            check_dt(dt)?;
            let p = params(common.n, common.j)?;
            (datasets::bloch_domain(&p, &grid(&common, 0.0, Some(1.0))?, &classes(class), dt), common.out)
        }
        Command::Entropy { common, sel } => {
            let p = params(common.n, common.j)?;
            let class: DynClass = sel.class.unwrap_or(ClassArg::One).into();
            let hi = if class == DynClass::Class1 { common.n } else { common.n - 1 };
            let ks = k_values(&sel, common.n, hi)?;
            (datasets::entropy(&p, &grid(&common, 0.0, Some(1.0))?, &ks, class)?, common.out)
        }
        Command::Fisher { common, sel } => {
            let p = params(common.n, common.j)?;
            let ks = k_values(&sel, common.n, common.n)?;
            (datasets::fisher(&p, &grid(&common, 0.0, Some(1.0))?, &ks, &classes(sel.class)), common.out)
        }
        Command::FisherDecomp { common, class, theta, raw } => {
            let p = params(common.n, common.j)?;
            let class: DynClass = class.unwrap_or(ClassArg::One).into();
            let g = grid(&common, 0.25, None)?;
            (datasets::fisher_decomp(&p, &g, class, theta.into(), !raw)?, common.out)
        }
        Command::Infer { common, dt } => {
            check_dt(dt)?;
            let p = params(common.n, common.j)?;
            (datasets::infer(&p, &grid(&common, 0.0, Some(1.0))?, dt), common.out)
        }
        Command::Verify { n, j, out } => {
            let p = params(n, j)?;
            let report = verify::run(&p)?;
            let mut w = open_out(&out)?;
            report.write(&mut w)?;
            w.flush()?;
            return match report.failures() {
                0 => Ok(()),
                f => Err(CliError::Verification(format!("{f} suite(s) exceeded tolerance"))),
            };
        }
    };
    for note in &table.notes {
        eprintln!("warning: {note}");
    }
    let mut w = open_out(&out)?;
    table.write(&mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("exflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
