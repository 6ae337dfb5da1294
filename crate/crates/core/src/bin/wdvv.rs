use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wdvv::config::{RunConfig, SuiteName, CONFIG_ENV};
use wdvv::report::{emit, Format};

#[derive(Parser)]
#[command(name = "wdvv", about = "Batch checks of WDVV, Painleve VI and Schlesinger identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and write a report.
    Check {
        /// JSON configuration; falls back to $WDVV_CONFIG, then to built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Suites to run, overriding the configuration. Repeatable.
        #[arg(long = "suite")]
        suites: Vec<SuiteName>,
    },
    /// Integrate the Euler top along an arc of imaginary omega and write CSV.
    DumpTrajectory {
        /// Imaginary part of omega at the start of the arc.
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long)]
        out: PathBuf,
        /// Length of the arc in Im(omega).
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        span: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
    },
    /// Print the version.
    Version,
}

fn load_config(path: Option<PathBuf>, suites: Vec<SuiteName>) -> Result<RunConfig, String> {
    let path = path.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let cfg = match path {
        Some(p) => RunConfig::from_path(&p).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if suites.is_empty() {
        Ok(cfg)
    } else {
        cfg.with_suites(suites).map_err(|e| e.to_string())
    }
}

fn write_output(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check {
            config,
            out,
            format,
            suites,
        } => load_config(config, suites).and_then(|cfg| {
            let report = wdvv::suites::run(&cfg);
            write_output(out.as_ref(), &emit(&report, format))?;
            Ok(report.pass)
        }),
        Command::DumpTrajectory { omega, out, span, rtol } => wdvv::n3::imaginary_arc(omega, span, rtol)
            .map_err(|e| e.to_string())
            .and_then(|top| {
                let file = std::fs::File::create(&out).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
                top.write_csv(file).map_err(|e| e.to_string())?;
                eprintln!("{} rows, casimir drift {:.3e}", top.len(), top.casimir_drift);
                Ok(true)
            }),
        Command::Version => {
            println!("wdvv {}", env!("CARGO_PKG_VERSION"));
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
