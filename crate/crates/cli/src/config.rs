use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dosim::model::ParamsFile;
use dosim::{Params, Tols};
use serde::Deserialize;

use crate::CliError;

pub const OUT_DIR_VAR: &str = "DOSIM_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Optional TOML file; every entry can also be given as a flag, and flags
/// take precedence.
///
/// ```toml
/// omega = 1.0
/// delta = 1.0
/// rtol = 1e-11
/// output_dir = "out"
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub params: ParamsFile,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    /// Flag value, else the config file, else `$DOSIM_OUT_DIR`, else `.`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Common value of both couplings
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Coupling between states 1 and 2
    #[arg(long, allow_hyphen_values = true)]
    pub omega12: Option<f64>,
    /// Coupling between states 2 and 3
    #[arg(long, allow_hyphen_values = true)]
    pub omega23: Option<f64>,
    /// Separation of the parallel levels from the middle one
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Slope of the tilted level (default 1)
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TolArgs {
    /// Relative tolerance of the integrator
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Absolute tolerance of the integrator
    #[arg(long)]
    pub atol: Option<f64>,
}

impl ParamArgs {
    fn as_file(&self) -> ParamsFile {
        ParamsFile {
            omega: self.omega,
            omega12: self.omega12,
            omega23: self.omega23,
            delta: self.delta,
            beta: self.beta,
            t_start: None,
            t_end: None,
        }
    }

    pub fn resolve(&self, file: &ConfigFile) -> Result<Params, CliError> {
        let merged = file.params.overridden_by(&self.as_file());
        merged.resolve().map_err(|e| match e {
            dosim::Error::Config(msg) if msg.starts_with("missing parameter") => {
                let name = msg.trim_start_matches("missing parameter ");
                let hint = if name.starts_with("omega") {
                    format!("--{name} or --omega")
                } else {
                    format!("--{name}")
                };
                CliError::usage(format!("{msg}: pass {hint} or set it in the config file"))
            }
            other => CliError::from(other),
        })
    }
}

impl TolArgs {
    pub fn resolve(&self, file: &ConfigFile, base: Tols) -> Result<Tols, CliError> {
        let rtol = self.rtol.or(file.rtol).unwrap_or(base.rtol);
        let atol = self.atol.or(file.atol).unwrap_or(base.atol);
        Ok(Tols::new(rtol, atol)?)
    }
}
