use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use torsion_cli::config::{ExperimentConfig, Recipe, Violation};
use torsion_cli::{execute, CliError};

/// Spectra, heat traces and zeta determinants of radial metrics on O(m) → P¹.
#[derive(Parser, Debug)]
#[command(name = "torsion", version)]
struct Args {
    #[arg(value_enum)]
    recipe: Recipe,
    /// JSON config; missing keys take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid nodes (the dense window for `bounds`)
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Largest |k| of the angular modes (the dense window for `bounds`)
    #[arg(long, value_name = "K")]
    kmax: Option<u32>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    emit_config: bool,
}

fn resolve(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Invalid(vec![Violation { path: "config".into(), message: format!("{}: {e}", path.display()) }])
            })?;
            ExperimentConfig::from_json(&text).map_err(|v| CliError::Invalid(vec![v]))?
        }
        None => ExperimentConfig::default(),
    };
    cfg.recipe = args.recipe;
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let grid = if args.recipe == Recipe::Bounds { &mut cfg.bounds.grid } else { &mut cfg.grid };
    if let Some(n) = args.grid {
        grid.n = n;
    }
    if let Some(k) = args.kmax {
        grid.k_max = Some(k);
    }
    cfg.validate().map_err(CliError::Invalid)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = resolve(&args).and_then(|cfg| {
        if args.emit_config {
            print!("{}", cfg.to_canonical_json());
            return Ok(true);
        }
        let outcome = execute(&cfg)?;
        for a in &outcome.assertions {
            println!("[{}] {}: {}", if a.pass { "ok" } else { "FAILED" }, a.name, a.detail);
        }
        println!("wrote {} files to {}", outcome.files.len() + 1, cfg.out);
        Ok(outcome.passed())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
