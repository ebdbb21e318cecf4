use clap::Parser;
use curved_kepler::harness::{run, Mode, Overrides, Real, RunConfig, THREADS_ENV};
use curved_kepler::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Kepler problem on constant-curvature spherical surfaces of revolution.
#[derive(Parser, Debug)]
#[command(name = "curved-kepler", version)]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<String>,
    /// Integrator tolerance (overrides `integrator.tol`).
    #[arg(long, value_parser = parse_real)]
    tol: Option<Real>,
    /// Surface β as a decimal or `p/q` (replaces `surface.L`/`surface.beta`).
    #[arg(long, value_parser = parse_real)]
    beta: Option<Real>,
    /// Energy level for block computations (overrides `block.h`).
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    energy: Option<Real>,
}

fn parse_real(s: &str) -> Result<Real, String> {
    Real::parse(s).map_err(|e| e.to_string())
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() { 1 } else { 2 })
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Validation {
            field: THREADS_ENV.into(),
            reason: format!("{raw:?} is not a thread count"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numerical(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: invalid config: {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match RunConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    cfg.apply(&Overrides {
        mode: Some(cli.mode),
        out: cli.out,
        tol: cli.tol,
        beta: cli.beta,
        energy: cli.energy,
    });
    match run(&cfg) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.exit_code != 0 {
                eprintln!("error: {} finished with failed checks", cli.mode.name());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => fail(&e),
    }
}
