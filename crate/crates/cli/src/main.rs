use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jetcalc_cli::{check, derive, integrate_cmd, parse_init, verify_identities, CliError, IntegrateArgs, Problem, ProblemSpec, Report, Which};

#[derive(Parser)]
#[command(name = "jetcalc", version, about = "Geometry of higher order Lagrangians, semisprays and Finsler functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// RNG seed for sample points [default: 0, or the problem file's].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample points [default: 100, or the problem file's].
    #[arg(long)]
    samples: Option<usize>,
    /// Relative tolerance [default: 1e-9, or the problem file's].
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the output to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Regular,
    Zermelo,
    Finsler,
    Homogeneous,
    Spray,
    Projective,
    Metrizable,
    PcIdentities,
}

impl From<CheckKind> for Which {
    fn from(k: CheckKind) -> Self {
        match k {
            CheckKind::Regular => Which::Regular,
            CheckKind::Zermelo => Which::Zermelo,
            CheckKind::Finsler => Which::Finsler,
            CheckKind::Homogeneous => Which::Homogeneous,
            CheckKind::Spray => Which::Spray,
            CheckKind::Projective => Which::Projective,
            CheckKind::Metrizable => Which::Metrizable,
            CheckKind::PcIdentities => Which::PcIdentities,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Derive the Euler-Lagrange semispray of a regular Lagrangian.
    Derive(Common),
    /// Run one geometric check.
    Check {
        which: CheckKind,
        #[command(flatten)]
        common: Common,
    },
    /// Verify the bracket identities on T^rM with random polynomial data.
    VerifyIdentities(Common),
    /// Integrate a semispray and write the trajectory as CSV (to --out).
    Integrate {
        #[command(flatten)]
        common: Common,
        /// Initial state: JSON array of coordinates, or {"coords": [...]}.
        #[arg(long)]
        init: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(c: &Common) -> Result<(Problem, Vec<u8>), CliError> {
    let bytes = read(&c.spec)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Input("problem file is not UTF-8".into()))?;
    let spec = ProblemSpec::from_json(&text)?;
    Ok((Problem::new(spec, c.seed, c.samples, c.tol)?, bytes))
}

fn emit(report: &Report, out: Option<&Path>) -> Result<bool, CliError> {
    let json = report.to_json();
    // a closed pipe downstream is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{json}");
    if let Some(p) = out {
        write(p, &(json + "\n"))?;
    }
    Ok(report.passed)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Derive(c) => {
            let (p, bytes) = load(&c)?;
            emit(&derive(&p, &bytes)?, c.out.as_deref())
        }
        Command::Check { which, common } => {
            let (p, bytes) = load(&common)?;
            emit(&check(&p, which.into(), &bytes)?, common.out.as_deref())
        }
        Command::VerifyIdentities(c) => {
            let (p, bytes) = load(&c)?;
            emit(&verify_identities(&p, &bytes)?, c.out.as_deref())
        }
        Command::Integrate {
            common,
            init,
            t0,
            t1,
            steps,
        } => {
            let (p, bytes) = load(&common)?;
            let init_text = String::from_utf8(read(&init)?)
                .map_err(|_| CliError::Input("initial state file is not UTF-8".into()))?;
            let args = IntegrateArgs {
                init: parse_init(&init_text)?,
                t0,
                t1,
                steps,
            };
            let (report, tr) = integrate_cmd(&p, &args, &bytes)?;
            if let Some(out) = &common.out {
                write(out, &tr.to_csv())?;
            }
            emit(&report, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
