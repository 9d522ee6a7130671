//! Method names accepted on the command line and the spec each one runs on.

use std::path::{Path, PathBuf};

use serde::Serialize;
use specsim::spectra::builtin::{self, NoiseForm};
use specsim::{specfile, Method, SpectralDensitySpec};

/// Where the spectral density comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSource {
    Builtin(String),
    File(PathBuf),
}

impl SpecSource {
    /// Name of the builtin example this source refers to, without a noise suffix.
    pub fn example(&self) -> Option<&str> {
        match self {
            SpecSource::Builtin(name) => Some(name.strip_suffix("-kernel").unwrap_or(name)),
            SpecSource::File(_) => None,
        }
    }
}

/// A method as named by the user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodChoice {
    /// Name written to CSV output.
    pub label: String,
    pub method: Method,
    /// Requested representation of the innovation covariance, if any.
    pub noise: Option<NoiseForm>,
}

impl MethodChoice {
    pub fn plain(method: Method) -> Self {
        Self {
            label: method.tag().to_string(),
            method,
            noise: None,
        }
    }

    pub fn parse(name: &str) -> Result<Self, String> {
        let (method, noise) = match name {
            "spectral" => (Method::FarfimaSpectral, None),
            "hybrid" => (Method::FarfimaHybrid, None),
            "spectral-bm" | "spectral-lr" => (Method::FarfimaSpectral, Some(NoiseForm::Mercer)),
            "hybrid-bm" | "hybrid-lr" => (Method::FarfimaHybrid, Some(NoiseForm::Mercer)),
            "spectral-svd" => (Method::FarfimaSpectral, Some(NoiseForm::Kernel)),
            "hybrid-svd" => (Method::FarfimaHybrid, Some(NoiseForm::Kernel)),
            other => (
                other.parse::<Method>().map_err(|_| {
                    format!(
                        "unknown method {other:?}; expected one of ckl, filter, farfima-spectral, farfima-hybrid, \
                         temporal, spectral-bm, hybrid-bm, spectral-lr, hybrid-lr, spectral-svd, hybrid-svd"
                    )
                })?,
                None,
            ),
        };
        Ok(Self {
            label: name.to_string(),
            method,
            noise,
        })
    }
}

fn load_file(path: &Path) -> Result<SpectralDensitySpec, String> {
    specfile::load_spec(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// The spec `choice` runs on, checked for compatibility.
pub fn resolve_spec(source: &SpecSource, choice: &MethodChoice) -> Result<SpectralDensitySpec, String> {
    let spec = match (source, choice.noise) {
        (SpecSource::Builtin(name), None) => {
            builtin::by_name(name).ok_or_else(|| format!("unknown spec {name:?}; builtin specs: {}", builtin::NAMES.join(", ")))?
        }
        (SpecSource::Builtin(_), Some(form)) => {
            let base = source.example().unwrap_or_default();
            if base != "example2" && base != "example3" {
                return Err(format!("method {} only applies to example2 and example3", choice.label));
            }
            let name = match form {
                NoiseForm::Mercer => base.to_string(),
                NoiseForm::Kernel => format!("{base}-kernel"),
            };
            builtin::by_name(&name).expect("builtin example")
        }
        (SpecSource::File(path), None) => load_file(path)?,
        (SpecSource::File(_), Some(_)) => {
            return Err(format!("method {} only applies to builtin examples", choice.label));
        }
    };
    choice.method.check_compatible(&spec).map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Methods compared by the demo of a builtin example.
pub fn demo_methods(example: &str) -> Option<Vec<MethodChoice>> {
    let names: &[&str] = match example {
        "example1" => &["ckl"],
        "example2" => &["spectral-bm", "hybrid-bm", "spectral-svd", "hybrid-svd", "temporal"],
        "example3" => &["spectral-lr", "hybrid-lr", "spectral-svd", "hybrid-svd", "temporal"],
        _ => return None,
    };
    Some(names.iter().map(|n| MethodChoice::parse(n).expect("demo method")).collect())
}
