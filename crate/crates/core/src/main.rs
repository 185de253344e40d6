use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frobkit::cli::{self, Command, Flags};

/// Construct and verify Frobenius, Saito and tt* structures described by manifest files.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on input errors.
#[derive(Parser, Debug)]
#[command(name = "frobkit", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Manifest file.
    manifest: PathBuf,
    /// Number of sample points.
    #[arg(long)]
    points: Option<usize>,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Write the constructed structure as a manifest.
    #[arg(long, value_name = "PATH")]
    emit: Option<PathBuf>,
}

fn write(path: &PathBuf, text: &str) -> bool {
    match std::fs::write(path, text) {
        Ok(()) => true,
        Err(e) => {
            eprintln!("frobkit: cannot write {}: {e}", path.display());
            false
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let flags = Flags { points: args.points, seed: args.seed, tol: args.tol };
    let out = cli::run(args.command, &args.manifest, &flags);
    let doc = out.document.to_string();
    let mut code = out.document.exit_code();
    match &args.report {
        Some(p) => {
            if !write(p, &doc) {
                code = 2;
            }
        }
        None => print!("{doc}"),
    }
    if let Some(e) = &out.document.error {
        eprintln!("frobkit: {e}");
    }
    match (&args.emit, &out.emitted) {
        (Some(p), Some(m)) => {
            if !write(p, &m.to_string()) {
                code = 2;
            }
        }
        (Some(_), None) if code == 0 => eprintln!("frobkit: {} constructs nothing to emit", args.command.name()),
        _ => {}
    }
    ExitCode::from(code as u8)
}
