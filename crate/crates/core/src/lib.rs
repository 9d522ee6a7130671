//! Simulation of stationary, mean-zero Gaussian functional time series on
//! `[0, 1]` from a spectral density operator.
//!
//! The pipeline has two stages. First an ensemble of independent complex
//! Gaussian frequency atoms `Z_1, ..., Z_T` is drawn, one per canonical
//! frequency `ω_k = 2πk/T`, with covariance given by the spectral density
//! operator `F_ω` discretized on a [`Grid`]. Second the ensemble is
//! conjugate-symmetrized and synthesized into a real sample by one inverse
//! FFT per grid point.
//!
//! Frequency atoms can be drawn from
//!
//! - an explicit harmonic eigendecomposition ([`EigenSpec`], CKL method),
//! - filtered white noise ([`FilterSpec`]),
//! - a FARFIMA(p, d, q) specification ([`FarfimaSpec`]), either fully in the
//!   spectral domain or with the autoregressive part applied in time
//!   ([`temporal::hybrid_farfima`]),
//! - any pointwise kernel `f_ω(x, y)`, decomposed numerically per frequency.
//!
//! A time-domain reference simulator for FARFIMA processes and the tools to
//! compare empirical autocovariances with exact targets live in
//! [`temporal`] and [`validate`].

pub mod error;
pub mod expr;
pub mod grid;
pub mod rng;
pub mod spectra;
pub mod spectral;
pub mod specfile;
pub mod temporal;
pub mod validate;

pub use error::{Error, Result};
pub use grid::{
    discretize_kernel, make_grid, operator_norms, sherman_morrison_inverse_apply,
    solve_linear_system, truncated_eigendecomposition, ComplexOperatorMatrix, EigenPairs, Grid,
    OperatorForm, OperatorNorms, RealKernelMatrix,
};
pub use num_complex::Complex64;
pub use rng::GaussianStream;
pub use spectra::{
    builtin, CovarianceSpec, EigenSpec, FarfimaSpec, FilterSpec, FrequencyResponse,
    SpectralDensitySpec,
};
pub use spectral::{simulate, FrequencyEnsemble, FtsSample, Method, SimConfig};
pub use temporal::{BurnInPolicy, FracCoeffs};
pub use validate::{AutocovSet, BenchRecord};
