//! Batch runner: validated JSON configs in, CSV and JSON artifacts out.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod recipes;

use config::{ExperimentConfig, Violation};
use recipes::Outcome;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<Violation>),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(torsion::Error),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<torsion::Error> for CliError {
    fn from(e: torsion::Error) -> Self {
        match e {
            // argument errors from the library are configuration errors too
            torsion::Error::Invalid { what, why } => {
                CliError::Invalid(vec![Violation { path: what.into(), message: why }])
            }
            other => CliError::Numerical(other),
        }
    }
}

/// Runs the recipe and writes every artifact plus the resolved config into `cfg.out`.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let dir = Path::new(&cfg.out);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let outcome = recipes::run(cfg)?;
    let files = std::iter::once(("config.json".to_string(), cfg.to_canonical_json())).chain(outcome.files.iter().cloned());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(io(&path))?;
    }
    Ok(outcome)
}
