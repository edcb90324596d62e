use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wallfan::basis::BasisChange;
use wallfan::certificates::{all_bends, certifiers, Certificate, CertifyRequest};
use wallfan::fan_io::{
    builtin, parse_basis, parse_fan, parse_log, parse_support, serialize_bends, serialize_certificate,
    serialize_fan, serialize_log,
};
use wallfan::fan_model::validate_fan;
use wallfan::pipeline::{projectivize, ProjectivizeOptions};
use wallfan::sign_adapt::{trackers, DEFAULT_TRACKER};
use wallfan::wall_normals::ordered_normals;
use wallfan::{Error, FVector, Fan};

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_FARKAS: u8 = 3;

#[derive(Parser)]
#[command(name = "wallfan", version, about = "Projectivize smooth complete fans by wall adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check smoothness, completeness and the fan axiom.
    Validate { fan: String },
    /// Print the ordered primitive wall normals.
    Normals { fan: String },
    /// Adapt the fan to all of its wall normals.
    Projectivize {
        fan: String,
        /// Directory for fan.json, log.json, counts.tsv and summary.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integer matrix file whose columns are the ordered basis.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Stop once an intermediate fan is already projective.
        #[arg(long)]
        early_stop: bool,
        #[arg(long, default_value = DEFAULT_TRACKER)]
        tracker: String,
    },
    /// Compute the bend of a support function on every wall.
    Bends {
        fan: String,
        support: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Produce an ample or a Farkas certificate.
    Certify {
        fan: String,
        #[arg(long, default_value = "lp")]
        method: String,
        /// Input fan of the blow-up sequence (sandwich method).
        #[arg(long)]
        sigma: Option<String>,
        /// Blow-up log from sigma to FAN (sandwich method).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the f-vector.
    Fvector { fan: String },
    /// Emit a builtin fan as a fan file.
    Builtin {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::CertificateFailed(_) | Error::HNotConvex(_) => EXIT_FAILED,
            _ => EXIT_INPUT,
        };
        Failure { code, message: err.to_string() }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: EXIT_INPUT, message }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// `builtin:NAME` or a path to a fan file.
fn load_fan(arg: &str) -> Result<Fan, Failure> {
    match arg.strip_prefix("builtin:") {
        Some(name) => Ok(builtin(name)?),
        None => parse_fan(&read(Path::new(arg))?).map_err(|e| input_error(format!("{arg}: {e}"))),
    }
}

/// Writes to `out` when given, otherwise prints.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fmt_fvector(f: &FVector) -> String {
    let parts: Vec<String> = f.0.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Validate { fan } => {
            let rep = validate_fan(&load_fan(&fan)?);
            println!("smooth {}", rep.smooth);
            println!("complete {}", rep.complete);
            println!("is_fan {}", rep.is_fan);
            for d in &rep.diagnostics {
                eprintln!("{d}");
            }
            Ok(if rep.all_pass() { 0 } else { EXIT_FAILED })
        }
        Command::Normals { fan } => {
            for m in &ordered_normals(&load_fan(&fan)?)? {
                println!("{m}");
            }
            Ok(0)
        }
        Command::Projectivize { fan, out, basis, early_stop, tracker } => {
            let fan = load_fan(&fan)?;
            trackers().get(&tracker)?;
            let basis = match basis {
                Some(path) => Some(BasisChange::new(parse_basis(&read(&path)?)?)?),
                None => None,
            };
            let opts = ProjectivizeOptions { tracker: &tracker, early_stop, basis: basis.as_ref() };
            let run = projectivize(&fan, &opts)?;
            let summary = run.summary();
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
                write(&dir.join("fan.json"), &serialize_fan(&run.fan))?;
                write(&dir.join("log.json"), &serialize_log(&run.log))?;
                write(&dir.join("counts.tsv"), &run.count_table())?;
                write(&dir.join("summary.txt"), &summary)?;
            }
            print!("{summary}");
            Ok(0)
        }
        Command::Bends { fan, support, out } => {
            let fan = load_fan(&fan)?;
            let h = parse_support(&read(&support)?)?;
            let rep = all_bends(&fan, &h)?;
            emit(out.as_deref(), &serialize_bends(&rep))?;
            eprintln!("walls {} min {} all_positive {}", rep.per_wall.len(), rep.min_bend, rep.all_positive);
            Ok(if rep.all_positive { 0 } else { EXIT_FAILED })
        }
        Command::Certify { fan, method, sigma, log, out } => {
            let fan = load_fan(&fan)?;
            let sigma = sigma.as_deref().map(load_fan).transpose()?;
            let log = match log {
                Some(path) => Some(parse_log(&read(&path)?)?),
                None => None,
            };
            let registry = certifiers();
            let certifier = registry.get(&method)?;
            let req = CertifyRequest { fan: &fan, sigma: sigma.as_ref(), log: log.as_ref() };
            let cert = certifier.certify(&req)?;
            emit(out.as_deref(), &serialize_certificate(&cert))?;
            match cert {
                Certificate::Ample(_) => {
                    eprintln!("ample");
                    Ok(0)
                }
                Certificate::Farkas(_) => {
                    eprintln!("not projective: farkas certificate");
                    Ok(EXIT_FARKAS)
                }
            }
        }
        Command::Fvector { fan } => {
            println!("{}", fmt_fvector(&load_fan(&fan)?.f_vector()));
            Ok(0)
        }
        Command::Builtin { name, out } => {
            emit(out.as_deref(), &serialize_fan(&builtin(&name)?))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
