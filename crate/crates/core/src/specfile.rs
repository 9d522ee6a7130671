//! JSON spec files.
//!
//! A spec file is one JSON object with a `"kind"` of `eigen`, `filter`,
//! `farfima` or `kernel`. Functions are expression strings (see [`crate::expr`]).
//!
//! ```json
//! {
//!   "kind": "farfima",
//!   "d": 0.2,
//!   "ar": [{ "rank_one": { "scale": 0.34, "factor": "exp(x^2/2)" } }],
//!   "ma": [],
//!   "noise": { "type": "kernel", "kernel": "min(x, y)" }
//! }
//! ```

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Var, Vars};
use crate::spectra::{
    ArOperator, ComplexFn, CovarianceSpec, EigenSpec, FarfimaSpec, FilterSpec, FrequencyResponse, RealFn, RealKernelFn,
    SpectralDensitySpec, SpectralKernelFn,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpecFile {
    Eigen {
        #[serde(default)]
        max_rank: Option<usize>,
        /// In `n` and `w`.
        eigenvalue: String,
        /// In `n`, `w` and `x`.
        eigenfunction: String,
    },
    Kernel {
        /// In `w`, `x` and `y`.
        re: String,
        #[serde(default)]
        im: Option<String>,
    },
    Filter {
        response: ResponseFile,
        noise: NoiseFile,
    },
    Farfima {
        #[serde(default)]
        d: f64,
        #[serde(default)]
        ar: Vec<ArFile>,
        /// Kernels in `x` and `y`.
        #[serde(default)]
        ma: Vec<String>,
        noise: NoiseFile,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ResponseFile {
    Identity,
    /// `s(w) Id`.
    Scalar {
        re: String,
        #[serde(default)]
        im: Option<String>,
    },
    /// `Id + s(w) g ⊗ g`.
    RankOne {
        scale_re: String,
        #[serde(default)]
        scale_im: Option<String>,
        factor: String,
    },
    /// Kernel `θ_w(x, y)`.
    Kernel {
        re: String,
        #[serde(default)]
        im: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseFile {
    BrownianMotion,
    Kernel {
        kernel: String,
    },
    Mercer {
        /// In `n`.
        eigenvalue: String,
        /// In `n` and `x`.
        eigenfunction: String,
        #[serde(default)]
        max_terms: Option<usize>,
    },
    LowRank {
        terms: Vec<LowRankTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowRankTerm {
    pub sigma: f64,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ArFile {
    Kernel(String),
    RankOne { scale: f64, factor: String },
}

fn parse(s: &str, vars: &[Var]) -> Result<Arc<Expr>> {
    Expr::parse(s, vars).map(Arc::new)
}

fn fn_x(s: &str) -> Result<RealFn> {
    let e = parse(s, &[Var::X])?;
    Ok(Arc::new(move |x| e.eval(&Vars { x, ..Vars::default() })))
}

fn fn_xy(s: &str) -> Result<RealKernelFn> {
    let e = parse(s, &[Var::X, Var::Y])?;
    Ok(Arc::new(move |x, y| e.eval(&Vars { x, y, ..Vars::default() })))
}

fn fn_w_complex(re: &str, im: Option<&str>) -> Result<ComplexFn> {
    let re = parse(re, &[Var::W])?;
    let im = im.map(|s| parse(s, &[Var::W])).transpose()?;
    Ok(Arc::new(move |w| {
        let v = Vars { w, ..Vars::default() };
        Complex64::new(re.eval(&v), im.as_ref().map_or(0.0, |e| e.eval(&v)))
    }))
}

fn fn_wxy_complex(
    re: &str,
    im: Option<&str>,
) -> Result<SpectralKernelFn> {
    let vars = [Var::W, Var::X, Var::Y];
    let re = parse(re, &vars)?;
    let im = im.map(|s| parse(s, &vars)).transpose()?;
    Ok(Arc::new(move |w, x, y| {
        let v = Vars { x, y, w, n: 0.0 };
        Complex64::new(re.eval(&v), im.as_ref().map_or(0.0, |e| e.eval(&v)))
    }))
}

impl NoiseFile {
    fn build(&self) -> Result<CovarianceSpec> {
        Ok(match self {
            NoiseFile::BrownianMotion => CovarianceSpec::brownian_motion_mercer(),
            NoiseFile::Kernel { kernel } => CovarianceSpec::ClosedFormKernel(fn_xy(kernel)?),
            NoiseFile::Mercer {
                eigenvalue,
                eigenfunction,
                max_terms,
            } => {
                let ev = parse(eigenvalue, &[Var::N])?;
                let ef = parse(eigenfunction, &[Var::N, Var::X])?;
                CovarianceSpec::MercerSeries {
                    eigenvalue: Arc::new(move |n| ev.eval(&Vars { n: n as f64, ..Vars::default() })),
                    eigenfunction: Arc::new(move |n, x| ef.eval(&Vars { n: n as f64, x, ..Vars::default() })),
                    max_terms: *max_terms,
                }
            }
            NoiseFile::LowRank { terms } => CovarianceSpec::LowRankSum(
                terms
                    .iter()
                    .map(|t| Ok((t.sigma, fn_x(&t.f)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::SpecFile(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Compile the expressions into a spec.
    pub fn build(&self) -> Result<SpectralDensitySpec> {
        Ok(match self {
            SpecFile::Eigen {
                max_rank,
                eigenvalue,
                eigenfunction,
            } => {
                let ev = parse(eigenvalue, &[Var::N, Var::W])?;
                let ef = parse(eigenfunction, &[Var::N, Var::W, Var::X])?;
                SpectralDensitySpec::Eigen(EigenSpec::new(
                    *max_rank,
                    move |n, w| ev.eval(&Vars { n: n as f64, w, ..Vars::default() }),
                    move |n, w, x| ef.eval(&Vars { n: n as f64, w, x, y: 0.0 }),
                ))
            }
            SpecFile::Kernel { re, im } => {
                let f = fn_wxy_complex(re, im.as_deref())?;
                SpectralDensitySpec::Kernel(crate::spectra::KernelSpec(f))
            }
            SpecFile::Filter { response, noise } => {
                let response = match response {
                    ResponseFile::Identity => FrequencyResponse::Identity,
                    ResponseFile::Scalar { re, im } => FrequencyResponse::Scalar(fn_w_complex(re, im.as_deref())?),
                    ResponseFile::RankOne {
                        scale_re,
                        scale_im,
                        factor,
                    } => FrequencyResponse::RankOneUpdate {
                        scale: fn_w_complex(scale_re, scale_im.as_deref())?,
                        factor: fn_x(factor)?,
                    },
                    ResponseFile::Kernel { re, im } => FrequencyResponse::Kernel(fn_wxy_complex(re, im.as_deref())?),
                };
                SpectralDensitySpec::Filter(FilterSpec {
                    response,
                    noise: noise.build()?,
                })
            }
            SpecFile::Farfima { d, ar, ma, noise } => {
                let ar = ar
                    .iter()
                    .map(|a| {
                        Ok(match a {
                            ArFile::Kernel(k) => ArOperator {
                                kernel: fn_xy(k)?,
                                rank_one: None,
                            },
                            ArFile::RankOne { scale, factor } => {
                                let g = fn_x(factor)?;
                                ArOperator::rank_one(*scale, move |x| g(x))
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let ma = ma.iter().map(|k| fn_xy(k)).collect::<Result<Vec<_>>>()?;
                SpectralDensitySpec::Farfima(FarfimaSpec::new(*d, ar, ma, noise.build()?)?)
            }
        })
    }
}

/// Load and compile a spec file.
pub fn load_spec(path: &Path) -> Result<SpectralDensitySpec> {
    SpecFile::load(path)?.build()
}
