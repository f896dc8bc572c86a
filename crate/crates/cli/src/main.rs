use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hubbard_bounds::bounds::{minimal_fock_cap, FockInstance};
use hubbard_bounds::fock::{
    assemble_hubbard_hamiltonian, substituted_hamiltonian, FockSpace, ModeOrder, SparseOperator, HARD_FOCK_CAP,
};
use hubbard_bounds::hartree_fock::{write_projector, HartreeFockSolution, ProjectorHeader};
use hubbard_bounds::report::{
    run_gap, run_sweep, run_verify, OutputFormat, ReportDocument, RunConfig, Verification, DEFAULT_EPSILON,
    DEFAULT_GAP_TOL, DEFAULT_IDENTITY_TOL,
};
use hubbard_bounds::Error;

#[derive(Parser, Debug)]
#[command(name = "hubbard-bounds", version, about = "Hartree-Fock and exact Fock-space checks for the half-filled Hubbard model")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Lattice dimension d.
    #[arg(long = "dim", global = true, default_value_t = 1)]
    dim: usize,
    /// Side length L, a multiple of 4.
    #[arg(long = "length", global = true, default_value_t = 4)]
    length: usize,
    /// Comma-separated side lengths for `sweep`.
    #[arg(long = "lengths", global = true, value_delimiter = ',', num_args = 0..)]
    lengths: Option<Vec<usize>>,
    /// Coupling g > 0.
    #[arg(long = "coupling", global = true, default_value_t = 2.0, allow_negative_numbers = true)]
    coupling: f64,
    /// Gap-equation tolerance.
    #[arg(long = "tol", global = true, default_value_t = DEFAULT_GAP_TOL)]
    tol: f64,
    /// Trial-vector weight in (0, 1/2].
    #[arg(long = "epsilon", global = true, default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
    epsilon: f64,
    /// Largest admitted Fock mode count (hard limit 24).
    #[arg(long = "fock-cap", global = true, default_value_t = 16)]
    fock_cap: usize,
    #[arg(long = "format", global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized property checks.
    #[arg(long = "seed", global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report or export here instead of stdout.
    #[arg(long = "out", global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timings (reports are then no longer reproducible
    /// byte for byte).
    #[arg(long = "timings", global = true)]
    timings: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Which {
    Wick,
    Thm1,
    Thm2,
    Thm3,
    Car,
    All,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OperatorName {
    /// Hubbard Hamiltonian in the position mode order.
    Hubbard,
    /// The Hamiltonian after the particle-hole substitution.
    Substituted,
    THf,
    N,
    NH,
    NL,
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Q6,
    Q7,
    /// `Re[Q₁ + Q₂ − 2Q₃ + 2Q₄ + 4Q₅ + 4Q₆ + 2Q₇]`.
    Q,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the gap equation and print the derived constants.
    Gap,
    /// Run Fock-space and closed-form verifications.
    Verify {
        #[arg(value_enum)]
        which: Which,
    },
    /// Closed-form extensivity table over `--lengths`.
    Sweep,
    /// Write P_HF in the binary projector format (requires --out).
    ExportProjector,
    /// Write an operator as `row col re im` lines.
    ExportOperator {
        #[arg(value_enum)]
        operator: OperatorName,
    },
}

/// 2 invalid input, 3 numerical failure, 4 Fock cap.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::LengthNotMultipleOfFour(_)
        | Error::InvalidLattice(_)
        | Error::NonPositiveCoupling(_)
        | Error::InvalidArgument(_)
        | Error::Io(_)
        | Error::Format(_) => 2,
        Error::FockCapExceeded { .. } => 4,
        _ => 3,
    }
}

fn cap_hint(config: &RunConfig) -> String {
    match config.lattice().ok().as_ref().and_then(minimal_fock_cap) {
        Some(cap) => format!("hint: rerun with --fock-cap {cap}"),
        None => format!(
            "hint: this lattice needs more than the hard limit of {HARD_FOCK_CAP} modes; `verify thm3` and `sweep` have no cap"
        ),
    }
}

fn config_from(c: &Common, command: &Command) -> RunConfig {
    // a sweep without --lengths is the single row at --length
    let lengths = match (command, &c.lengths) {
        (_, Some(list)) => list.clone(),
        (Command::Sweep, None) => vec![c.length],
        _ => Vec::new(),
    };
    RunConfig {
        dim: c.dim,
        length: c.length,
        lengths,
        coupling: c.coupling,
        gap_tol: c.tol,
        identity_tol: DEFAULT_IDENTITY_TOL,
        epsilon: c.epsilon,
        fock_cap: c.fock_cap,
        format: match c.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        },
        seed: c.seed,
    }
}

fn emit(bytes: &[u8], out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(bytes)?;
            f.flush()?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn finish(doc: &ReportDocument, config: &RunConfig, out: &Option<PathBuf>) -> Result<ExitCode, Error> {
    emit(doc.render(config.format)?.as_bytes(), out)?;
    for (check, r) in doc.records() {
        if let Some(why) = &r.skipped {
            eprintln!("{check}: {} skipped: {why}", r.name);
        }
    }
    if doc.passed {
        return Ok(ExitCode::SUCCESS);
    }
    for name in doc.failures() {
        eprintln!("FAIL: {name}");
    }
    Ok(ExitCode::from(1))
}

fn named_operator(config: &RunConfig, name: OperatorName) -> Result<SparseOperator, Error> {
    let lat = config.lattice()?;
    let g = config.coupling;
    if let OperatorName::Hubbard = name {
        let space = FockSpace::with_cap(2 * lat.num_sites(), ModeOrder::Position, config.fock_cap)?;
        return assemble_hubbard_hamiltonian(&space, &lat, g);
    }
    let inst = FockInstance::build(&lat, g, config.gap_tol, config.fock_cap)?;
    let s = &inst.suite;
    Ok(match name {
        OperatorName::Hubbard => unreachable!(),
        OperatorName::Substituted => substituted_hamiltonian(&inst.frame, &lat, g)?,
        OperatorName::THf => s.t_hf.clone(),
        OperatorName::N => s.n.clone(),
        OperatorName::NH => s.n_h.clone(),
        OperatorName::NL => s.n_l.clone(),
        OperatorName::Q1 => s.q(1).clone(),
        OperatorName::Q2 => s.q(2).clone(),
        OperatorName::Q3 => s.q(3).clone(),
        OperatorName::Q4 => s.q(4).clone(),
        OperatorName::Q5 => s.q(5).clone(),
        OperatorName::Q6 => s.q(6).clone(),
        OperatorName::Q7 => s.q(7).clone(),
        OperatorName::Q => s.q_total(),
    })
}

fn run(cli: &Cli, config: &RunConfig) -> Result<ExitCode, Error> {
    let out = &cli.common.out;
    let timings = cli.common.timings;
    match &cli.command {
        Command::Gap => finish(&run_gap(config, timings)?, config, out),
        Command::Verify { which } => {
            let which = match which {
                Which::Wick => Verification::Wick,
                Which::Thm1 => Verification::Thm1,
                Which::Thm2 => Verification::Thm2,
                Which::Thm3 => Verification::Thm3,
                Which::Car => Verification::Car,
                Which::All => Verification::All,
            };
            finish(&run_verify(config, which, timings)?, config, out)
        }
        Command::Sweep => finish(&run_sweep(config, timings)?, config, out),
        Command::ExportProjector => {
            config.validate()?;
            let Some(path) = out else {
                return Err(Error::InvalidArgument("export-projector needs --out FILE".into()));
            };
            let lat = config.lattice()?;
            let hf = HartreeFockSolution::solve(&lat, config.coupling, config.gap_tol)?;
            let header = ProjectorHeader {
                dim: lat.dim() as u64,
                length: lat.length() as u64,
                g: config.coupling,
                delta: hf.delta,
            };
            let mut f = BufWriter::new(File::create(path)?);
            write_projector(&mut f, header, &hf.projector)?;
            f.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportOperator { operator } => {
            config.validate()?;
            let op = named_operator(config, *operator)?;
            let mut buf = Vec::new();
            op.write_coo(&mut buf)?;
            emit(&buf, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = config_from(&cli.common, &cli.command);
    if let Some(w) = config.coupling_warning() {
        eprintln!("{w}");
    }
    match run(&cli, &config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::FockCapExceeded { .. } = e {
                eprintln!("{}", cap_hint(&config));
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
