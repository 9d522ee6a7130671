//! Spectral density operator specifications and their evaluation on a grid.
//!
//! A [`SpectralDensitySpec`] describes `{F_ω}` in one of four ways: an explicit
//! harmonic eigendecomposition, filtered white noise, a FARFIMA(p, d, q) model,
//! or a pointwise kernel `f_ω(x, y)`. Every variant can be evaluated at a
//! frequency as a kernel-form matrix, which is what the autocovariance targets
//! integrate.
//!
//! User-supplied functions must be safe to call concurrently; frequencies are
//! evaluated in parallel.

pub mod builtin;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{
    discretize_kernel, kernel_action, truncated_eigendecomposition, ComplexOperatorMatrix, Grid,
    LinearSolver, OperatorForm, RealKernelMatrix, RESONANCE_TOL,
};
use crate::rng::GaussianStream;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type RealKernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
/// `(ω, x, y) ↦ f_ω(x, y)`.
pub type SpectralKernelFn = Arc<dyn Fn(f64, f64, f64) -> Complex64 + Send + Sync>;
/// `(n, ω) ↦ λ_n(ω)`, modes numbered from 1.
pub type EigenvalueFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;
/// `(n, ω, x) ↦ φ_n(ω)(x)`, modes numbered from 1.
pub type EigenfunctionFn = Arc<dyn Fn(usize, f64, f64) -> f64 + Send + Sync>;
/// Action-form matrix of `Θ(ω)` on a grid.
pub type ResponseMatrixFn = Arc<dyn Fn(f64, &Grid) -> Result<DMatrix<Complex64>> + Send + Sync>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Harmonic eigendecomposition `F_ω = Σ_n λ_n(ω) φ_n(ω) ⊗ φ_n(ω)`.
///
/// The eigenfunctions need not be orthonormal; the simulated atoms have the
/// covariance of the sum regardless.
#[derive(Clone)]
pub struct EigenSpec {
    pub max_rank: Option<usize>,
    pub eigenvalue: EigenvalueFn,
    pub eigenfunction: EigenfunctionFn,
}

impl EigenSpec {
    pub fn new(
        max_rank: Option<usize>,
        eigenvalue: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
        eigenfunction: impl Fn(usize, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            max_rank,
            eigenvalue: Arc::new(eigenvalue),
            eigenfunction: Arc::new(eigenfunction),
        }
    }

    pub fn rank(&self, truncation: usize) -> usize {
        self.max_rank.map_or(truncation, |r| r.min(truncation))
    }

    /// Eigenvalues and eigenfunction samples (one row per mode) at `omega`.
    pub fn modes(&self, omega: f64, grid: &Grid, truncation: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let rank = self.rank(truncation);
        let m = grid.len();
        let mut lambdas = Vec::with_capacity(rank);
        let mut phis = DMatrix::zeros(rank, m);
        for n in 1..=rank {
            let lambda = (self.eigenvalue)(n, omega);
            if !lambda.is_finite() || lambda < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "eigenvalue {n} at omega = {omega} is {lambda}; must be finite and nonnegative"
                )));
            }
            lambdas.push(lambda);
            for (i, &x) in grid.points().iter().enumerate() {
                phis[(n - 1, i)] = (self.eigenfunction)(n, omega, x);
            }
        }
        Ok((lambdas, phis))
    }
}

impl fmt::Debug for EigenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenSpec").field("max_rank", &self.max_rank).finish_non_exhaustive()
    }
}

/// Covariance operator `S` of a white-noise innovation sequence.
#[derive(Clone)]
pub enum CovarianceSpec {
    /// `S(x, y)` in closed form; decomposed numerically on the grid.
    ClosedFormKernel(RealKernelFn),
    /// `S = Σ_n η_n e_n ⊗ e_n` with modes numbered from 1.
    MercerSeries {
        eigenvalue: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        eigenfunction: Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>,
        max_terms: Option<usize>,
    },
    /// `S = Σ_r σ_r f_r ⊗ f_r` with arbitrary (not necessarily orthogonal) `f_r`.
    LowRankSum(Vec<(f64, RealFn)>),
}

impl CovarianceSpec {
    pub fn kernel(k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::ClosedFormKernel(Arc::new(k))
    }

    pub fn mercer(
        max_terms: Option<usize>,
        eigenvalue: impl Fn(usize) -> f64 + Send + Sync + 'static,
        eigenfunction: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::MercerSeries {
            eigenvalue: Arc::new(eigenvalue),
            eigenfunction: Arc::new(eigenfunction),
            max_terms,
        }
    }

    /// Brownian-motion covariance `min(x, y)` through its Mercer series.
    pub fn brownian_motion_mercer() -> Self {
        Self::mercer(
            None,
            |n| 1.0 / ((n as f64 - 0.5) * PI).powi(2),
            |n, x| 2f64.sqrt() * ((n as f64 - 0.5) * PI * x).sin(),
        )
    }

    /// Brownian-motion covariance `min(x, y)` in closed form.
    pub fn brownian_motion_kernel() -> Self {
        Self::kernel(f64::min)
    }

    /// Kernel value `S(x, y)`; series forms are summed to `terms` modes.
    pub fn evaluate(&self, x: f64, y: f64, terms: usize) -> f64 {
        match self {
            CovarianceSpec::ClosedFormKernel(k) => k(x, y),
            CovarianceSpec::MercerSeries {
                eigenvalue,
                eigenfunction,
                max_terms,
            } => {
                let n_max = max_terms.map_or(terms, |t| t.min(terms));
                (1..=n_max)
                    .map(|n| eigenvalue(n) * eigenfunction(n, x) * eigenfunction(n, y))
                    .sum()
            }
            CovarianceSpec::LowRankSum(terms_) => terms_.iter().map(|(s, f)| s * f(x) * f(y)).sum(),
        }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        let pts = grid.points();
        let step = (pts.len() / 8).max(1);
        match self {
            CovarianceSpec::ClosedFormKernel(k) => {
                for &x in pts.iter().step_by(step) {
                    for &y in pts.iter().step_by(step) {
                        let (a, b) = (k(x, y), k(y, x));
                        if !a.is_finite() || (a - b).abs() > 1e-10 * a.abs().max(1.0) {
                            return Err(Error::InvalidSpec(format!(
                                "covariance kernel is not symmetric at ({x}, {y})"
                            )));
                        }
                    }
                }
            }
            CovarianceSpec::MercerSeries {
                eigenvalue, max_terms, ..
            } => {
                let n_max = max_terms.unwrap_or(64).min(64);
                for n in 1..=n_max {
                    let eta = eigenvalue(n);
                    if !eta.is_finite() || eta < 0.0 {
                        return Err(Error::InvalidSpec(format!("Mercer eigenvalue {n} is {eta}")));
                    }
                }
            }
            CovarianceSpec::LowRankSum(terms) => {
                if let Some((s, _)) = terms.iter().find(|(s, _)| !s.is_finite() || *s < 0.0) {
                    return Err(Error::InvalidSpec(format!("low-rank coefficient {s} is negative")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CovarianceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovarianceSpec::ClosedFormKernel(_) => f.write_str("ClosedFormKernel"),
            CovarianceSpec::MercerSeries { max_terms, .. } => {
                f.debug_struct("MercerSeries").field("max_terms", max_terms).finish_non_exhaustive()
            }
            CovarianceSpec::LowRankSum(t) => f.debug_struct("LowRankSum").field("rank", &t.len()).finish(),
        }
    }
}

/// `N`-term factorization of a noise covariance on the grid: row `n` holds
/// `√η_n e_n`, so `S_N = Bᵀ B` and `Σ_n ξ_n B_n` has covariance `S_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBasis {
    pub modes: DMatrix<f64>,
}

impl NoiseBasis {
    pub fn new(cov: &CovarianceSpec, grid: &Grid, truncation: usize) -> Result<Self> {
        let m = grid.len();
        let modes = match cov {
            CovarianceSpec::ClosedFormKernel(k) => {
                if truncation > m {
                    return invalid(format!(
                        "numerical noise decomposition keeps at most {m} modes, asked for {truncation}"
                    ));
                }
                let kmat = discretize_kernel(|x, y| k(x, y), grid)?;
                let eig = truncated_eigendecomposition(&kmat, truncation)?;
                let mut modes = DMatrix::zeros(truncation, m);
                for n in 0..truncation {
                    let s = eig.eigenvalues[n].sqrt();
                    for i in 0..m {
                        modes[(n, i)] = s * eig.eigenfunctions[(n, i)].re;
                    }
                }
                modes
            }
            CovarianceSpec::MercerSeries {
                eigenvalue,
                eigenfunction,
                max_terms,
            } => {
                let rank = max_terms.map_or(truncation, |t| t.min(truncation));
                let mut modes = DMatrix::zeros(rank, m);
                for n in 1..=rank {
                    let eta = eigenvalue(n);
                    if !eta.is_finite() || eta < 0.0 {
                        return Err(Error::InvalidSpec(format!("Mercer eigenvalue {n} is {eta}")));
                    }
                    let s = eta.sqrt();
                    for (i, &x) in grid.points().iter().enumerate() {
                        modes[(n - 1, i)] = s * eigenfunction(n, x);
                    }
                }
                modes
            }
            CovarianceSpec::LowRankSum(terms) => {
                let rank = terms.len().min(truncation);
                let mut modes = DMatrix::zeros(rank, m);
                for (r, (sigma, f)) in terms.iter().take(rank).enumerate() {
                    if !sigma.is_finite() || *sigma < 0.0 {
                        return Err(Error::InvalidSpec(format!("low-rank coefficient {sigma} is negative")));
                    }
                    let s = sigma.sqrt();
                    for (i, &x) in grid.points().iter().enumerate() {
                        modes[(r, i)] = s * f(x);
                    }
                }
                modes
            }
        };
        if modes.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("noise basis has non-finite samples".into()));
        }
        Ok(Self { modes })
    }

    pub fn rank(&self) -> usize {
        self.modes.nrows()
    }

    /// Kernel-form matrix of `S_N`.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.modes.transpose() * &self.modes
    }

    /// One draw `Σ_n ξ_n √η_n e_n`.
    pub fn draw(&self, stream: &mut GaussianStream) -> Vec<f64> {
        let m = self.modes.ncols();
        let mut out = vec![0.0; m];
        for n in 0..self.rank() {
            let xi = stream.next();
            for (i, o) in out.iter_mut().enumerate() {
                *o += xi * self.modes[(n, i)];
            }
        }
        out
    }
}

/// Frequency response `Θ(ω)` of a linear filter.
#[derive(Clone)]
pub enum FrequencyResponse {
    Identity,
    /// `Θ(ω) = s(ω) Id`.
    Scalar(ComplexFn),
    /// `Θ(ω) = Id + s(ω) g ⊗ g`.
    RankOneUpdate { scale: ComplexFn, factor: RealFn },
    /// Integral operator with kernel `θ_ω(x, y)`.
    Kernel(SpectralKernelFn),
    /// Any action-form matrix.
    Matrix(ResponseMatrixFn),
}

impl fmt::Debug for FrequencyResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrequencyResponse::Identity => "Identity",
            FrequencyResponse::Scalar(_) => "Scalar",
            FrequencyResponse::RankOneUpdate { .. } => "RankOneUpdate",
            FrequencyResponse::Kernel(_) => "Kernel",
            FrequencyResponse::Matrix(_) => "Matrix",
        })
    }
}

/// White noise with covariance `S` passed through the filter `Θ`:
/// `F_ω = (2π)⁻¹ Θ(ω) S Θ(ω)*`.
#[derive(Debug, Clone)]
pub struct FilterSpec {
    pub response: FrequencyResponse,
    pub noise: CovarianceSpec,
}

/// `Θ(ω)` prepared for application to sampled functions.
#[derive(Debug, Clone)]
pub(crate) enum ResponseAt {
    Identity,
    Scalar(Complex64),
    RankOne { scale: Complex64, factor: Vec<f64> },
    Matrix(DMatrix<Complex64>),
}

impl ResponseAt {
    fn evaluate(response: &FrequencyResponse, omega: f64, grid: &Grid) -> Result<Self> {
        Ok(match response {
            FrequencyResponse::Identity => ResponseAt::Identity,
            FrequencyResponse::Scalar(s) => ResponseAt::Scalar(s(omega)),
            FrequencyResponse::RankOneUpdate { scale, factor } => ResponseAt::RankOne {
                scale: scale(omega),
                factor: grid.sample(|x| factor(x)),
            },
            FrequencyResponse::Kernel(k) => {
                let m = grid.len();
                let pts = grid.points();
                let w = grid.weights();
                ResponseAt::Matrix(DMatrix::from_fn(m, m, |i, j| k(omega, pts[i], pts[j]) * w[j]))
            }
            FrequencyResponse::Matrix(f) => {
                let mat = f(omega, grid)?;
                if mat.nrows() != grid.len() || mat.ncols() != grid.len() {
                    return invalid("frequency response matrix does not match the grid");
                }
                ResponseAt::Matrix(mat)
            }
        })
    }

    fn apply(&self, v: &[Complex64], grid: &Grid) -> Vec<Complex64> {
        match self {
            ResponseAt::Identity => v.to_vec(),
            ResponseAt::Scalar(s) => v.iter().map(|x| x * s).collect(),
            ResponseAt::RankOne { scale, factor } => {
                let c = scale * grid.inner_real(v, factor);
                v.iter().zip(factor).map(|(x, g)| x + c * g).collect()
            }
            ResponseAt::Matrix(a) => (a * DVector::from_column_slice(v)).as_slice().to_vec(),
        }
    }

    fn to_matrix(&self, grid: &Grid) -> DMatrix<Complex64> {
        let m = grid.len();
        match self {
            ResponseAt::Identity => DMatrix::identity(m, m),
            ResponseAt::Scalar(s) => DMatrix::from_diagonal_element(m, m, *s),
            ResponseAt::RankOne { scale, factor } => {
                let w = grid.weights();
                DMatrix::from_fn(m, m, |i, j| {
                    let id = if i == j { ONE } else { Complex64::new(0.0, 0.0) };
                    id + scale * factor[i] * factor[j] * w[j]
                })
            }
            ResponseAt::Matrix(a) => a.clone(),
        }
    }
}

impl FilterSpec {
    /// Action-form matrix of `Θ(ω)`.
    pub fn response_matrix(&self, omega: f64, grid: &Grid) -> Result<DMatrix<Complex64>> {
        Ok(ResponseAt::evaluate(&self.response, omega, grid)?.to_matrix(grid))
    }

    /// Verify `Θ(2π - ω) = conj(Θ(ω))` on a few sampled frequencies.
    pub fn check_symmetry(&self, grid: &Grid) -> Result<()> {
        for j in 1..8 {
            let omega = PI * j as f64 / 8.0 + 0.013;
            let a = self.response_matrix(omega, grid)?;
            let b = self.response_matrix(TAU - omega, grid)?;
            let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let defect = a.zip_map(&b, |x, y| (x.conj() - y).norm()).max();
            if defect > 1e-10 * scale {
                return Err(Error::InvalidSpec(format!(
                    "frequency response is not conjugate-symmetric at omega = {omega} (defect {defect:e})"
                )));
            }
        }
        Ok(())
    }
}

/// Autoregressive coefficient `A_j` of a FARFIMA model.
#[derive(Clone)]
pub struct ArOperator {
    pub kernel: RealKernelFn,
    /// Set when `A_j(x, y) = c g(x) g(y)`; enables the Sherman–Morrison fast path.
    pub rank_one: Option<RankOneFactor>,
}

#[derive(Clone)]
pub struct RankOneFactor {
    pub scale: f64,
    pub factor: RealFn,
}

impl ArOperator {
    pub fn kernel(k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kernel: Arc::new(k),
            rank_one: None,
        }
    }

    /// `A(x, y) = scale · g(x) g(y)`, tagged for the rank-one fast path.
    pub fn rank_one(scale: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let g: RealFn = Arc::new(g);
        let gk = g.clone();
        Self {
            kernel: Arc::new(move |x, y| scale * gk(x) * gk(y)),
            rank_one: Some(RankOneFactor { scale, factor: g }),
        }
    }
}

impl fmt::Debug for ArOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArOperator")
            .field("rank_one", &self.rank_one.as_ref().map(|r| r.scale))
            .finish_non_exhaustive()
    }
}

/// FARFIMA(p, d, q): `(Id - Δ)^d X̃_t = X_t` with `X` the FARMA(p, q) process
/// `X_t = Σ A_j X_{t-j} + ε_t + Σ B_j ε_{t-j}`, `Cov(ε_t) = S`.
///
/// Stationarity (`‖Ã^{j₀}‖ < 1` for the companion operator) is the caller's
/// responsibility; [`FarfimaSpec::companion_spectral_radius`] gives a grid-based
/// diagnostic.
#[derive(Clone)]
pub struct FarfimaSpec {
    pub d: f64,
    pub ar: Vec<ArOperator>,
    pub ma: Vec<RealKernelFn>,
    pub noise: CovarianceSpec,
}

impl fmt::Debug for FarfimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FarfimaSpec")
            .field("p", &self.p())
            .field("d", &self.d)
            .field("q", &self.q())
            .field("noise", &self.noise)
            .finish()
    }
}

impl FarfimaSpec {
    pub fn new(d: f64, ar: Vec<ArOperator>, ma: Vec<RealKernelFn>, noise: CovarianceSpec) -> Result<Self> {
        let spec = Self { d, ar, ma, noise };
        spec.check_order()?;
        Ok(spec)
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }

    fn check_order(&self) -> Result<()> {
        if !(self.d > -0.5 && self.d < 0.5) {
            return Err(Error::InvalidSpec(format!(
                "fractional order d = {} is outside (-1/2, 1/2)",
                self.d
            )));
        }
        Ok(())
    }

    /// Same model with the autoregressive part removed.
    pub fn without_ar(&self) -> Self {
        Self {
            ar: Vec::new(),
            ..self.clone()
        }
    }

    /// Spectral radius of the discretized companion matrix
    /// `[[A_1 W, …, A_p W], [Id, 0, …], …]`.
    ///
    /// A radius below one is necessary for stationarity on the grid; it does not
    /// verify the operator-norm condition exactly.
    pub fn companion_spectral_radius(&self, grid: &Grid) -> Result<f64> {
        let p = self.p();
        if p == 0 {
            return Ok(0.0);
        }
        let m = grid.len();
        let mut companion = DMatrix::<f64>::zeros(p * m, p * m);
        for (j, a) in self.ar.iter().enumerate() {
            let k = discretize_kernel(|x, y| (a.kernel)(x, y), grid)?;
            companion.view_mut((0, j * m), (m, m)).copy_from(&kernel_action(&k.values, grid));
        }
        for j in 1..p {
            companion
                .view_mut((j * m, (j - 1) * m), (m, m))
                .fill_with_identity();
        }
        Ok(companion
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Discretize the model on `grid` with an `truncation`-term noise basis.
    pub fn discretize(&self, grid: &Grid, truncation: usize) -> Result<DiscreteFarfima> {
        self.check_order()?;
        let ar = self
            .ar
            .iter()
            .map(|a| Ok(kernel_action(&discretize_kernel(|x, y| (a.kernel)(x, y), grid)?.values, grid)))
            .collect::<Result<Vec<_>>>()?;
        let ma = self
            .ma
            .iter()
            .map(|b| Ok(kernel_action(&discretize_kernel(|x, y| b(x, y), grid)?.values, grid)))
            .collect::<Result<Vec<_>>>()?;
        let rank_one = match self.ar.as_slice() {
            [ArOperator {
                rank_one: Some(r), ..
            }] => {
                let g = grid.sample(|x| (r.factor)(x));
                let gram = grid.inner(&g, &g);
                Some(RankOneAr {
                    scale: r.scale,
                    factor: g,
                    gram,
                })
            }
            _ => None,
        };
        Ok(DiscreteFarfima {
            grid: grid.clone(),
            d: self.d,
            ar,
            ma,
            rank_one,
            noise: NoiseBasis::new(&self.noise, grid, truncation)?,
        })
    }
}

#[derive(Debug, Clone)]
struct RankOneAr {
    scale: f64,
    factor: Vec<f64>,
    gram: f64,
}

/// A FARFIMA model discretized on a grid: action-form coefficient matrices and
/// the noise basis.
#[derive(Debug, Clone)]
pub struct DiscreteFarfima {
    pub grid: Grid,
    pub d: f64,
    /// `A_j W`.
    pub ar: Vec<DMatrix<f64>>,
    /// `B_j W`.
    pub ma: Vec<DMatrix<f64>>,
    rank_one: Option<RankOneAr>,
    pub noise: NoiseBasis,
}

enum ArInverse {
    Identity,
    RankOne(Complex64),
    Dense(LinearSolver),
}

/// `Θ(ω) = [2 sin(ω/2)]^{-d} 𝒜(e^{-iω})^{-1} ℬ(e^{-iω})` at one frequency.
pub struct FarfimaResponse<'a> {
    model: &'a DiscreteFarfima,
    amplitude: f64,
    z: Complex64,
    ar_inverse: ArInverse,
}

impl DiscreteFarfima {
    pub fn has_rank_one_ar(&self) -> bool {
        self.rank_one.is_some()
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    /// The FARFIMA(0, d, q) part of the model.
    pub fn without_ar(&self) -> Self {
        Self {
            ar: Vec::new(),
            rank_one: None,
            ..self.clone()
        }
    }

    /// Prepare the frequency response at `omega`. With `force_dense` the AR part is
    /// always inverted by LU, even when the rank-one fast path is available.
    pub fn response(&self, omega: f64, force_dense: bool) -> Result<FarfimaResponse<'_>> {
        let amplitude = fractional_factor(omega, self.d)?.sqrt();
        let z = Complex64::from_polar(1.0, -omega);
        let ar_inverse = if self.ar.is_empty() {
            ArInverse::Identity
        } else if let (Some(r), false) = (&self.rank_one, force_dense) {
            let scale = z * r.scale;
            let denom = ONE - scale * r.gram;
            if denom.norm() < RESONANCE_TOL {
                return Err(Error::Numeric(format!("AR operator is not invertible at omega = {omega}")));
            }
            ArInverse::RankOne(scale)
        } else {
            let m = self.grid.len();
            let mut a = DMatrix::<Complex64>::identity(m, m);
            let mut zj = ONE;
            for aj in &self.ar {
                zj *= z;
                a.zip_apply(aj, |x, y| *x -= zj * y);
            }
            ArInverse::Dense(LinearSolver::new(&a)?)
        };
        Ok(FarfimaResponse {
            model: self,
            amplitude,
            z,
            ar_inverse,
        })
    }

    /// `𝒜(e^{-iω})` in action form.
    pub fn ar_polynomial(&self, omega: f64) -> ComplexOperatorMatrix {
        let m = self.grid.len();
        let z = Complex64::from_polar(1.0, -omega);
        let mut a = DMatrix::<Complex64>::identity(m, m);
        let mut zj = ONE;
        for aj in &self.ar {
            zj *= z;
            a.zip_apply(aj, |x, y| *x -= zj * y);
        }
        ComplexOperatorMatrix {
            grid: self.grid.clone(),
            values: a,
            form: OperatorForm::Action,
        }
    }

    /// Kernel-form `F_ω`.
    pub fn density(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        let m = self.grid.len();
        if self.d != 0.0 && is_zero_frequency(omega) {
            if self.d > 0.0 {
                return Err(Error::SingularFrequency { omega });
            }
            return Ok(DMatrix::zeros(m, m));
        }
        let resp = self.response(omega, false)?;
        let rank = self.noise.rank();
        let mut g = DMatrix::<Complex64>::zeros(m, rank);
        for n in 0..rank {
            let col: Vec<Complex64> = self.noise.modes.row(n).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let out = resp.apply(&col)?;
            g.column_mut(n).copy_from_slice(&out);
        }
        Ok(&g * g.adjoint() / Complex64::new(TAU, 0.0))
    }
}

impl FarfimaResponse<'_> {
    /// Apply `Θ(ω)` to a sampled function.
    pub fn apply(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let model = self.model;
        let grid = &model.grid;
        if rhs.len() != grid.len() {
            return invalid("right-hand side is not sampled on the grid");
        }
        let mut v: Vec<Complex64> = rhs.to_vec();
        let mut zj = ONE;
        for bj in &model.ma {
            zj *= self.z;
            for (i, vi) in v.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, r) in rhs.iter().enumerate() {
                    acc += r * bj[(i, k)];
                }
                *vi += zj * acc;
            }
        }
        let v = match &self.ar_inverse {
            ArInverse::Identity => v,
            ArInverse::RankOne(scale) => {
                let r = model.rank_one.as_ref().expect("rank-one path without factor");
                crate::grid::sherman_morrison_inverse_apply(*scale, &r.factor, r.gram, &v, grid)?
            }
            ArInverse::Dense(solver) => solver.solve(&DVector::from_vec(v))?.as_slice().to_vec(),
        };
        Ok(v.into_iter().map(|x| x * self.amplitude).collect())
    }
}

/// Pointwise spectral kernel `f_ω(x, y)`.
#[derive(Clone)]
pub struct KernelSpec(pub SpectralKernelFn);

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("KernelSpec")
    }
}

/// Specification of a spectral density operator `{F_ω}`.
#[derive(Debug, Clone)]
pub enum SpectralDensitySpec {
    Eigen(EigenSpec),
    Filter(FilterSpec),
    Farfima(FarfimaSpec),
    Kernel(KernelSpec),
}

impl SpectralDensitySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SpectralDensitySpec::Eigen(_) => "eigen",
            SpectralDensitySpec::Filter(_) => "filter",
            SpectralDensitySpec::Farfima(_) => "farfima",
            SpectralDensitySpec::Kernel(_) => "kernel",
        }
    }

    pub fn kernel(f: impl Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        SpectralDensitySpec::Kernel(KernelSpec(Arc::new(f)))
    }

    /// Fractional order `d` when the spec is a FARFIMA model, else 0.
    pub fn fractional_order(&self) -> f64 {
        match self {
            SpectralDensitySpec::Farfima(f) => f.d,
            _ => 0.0,
        }
    }

    /// Spot-check the invariants of the spec on `grid`.
    pub fn check(&self, grid: &Grid) -> Result<()> {
        match self {
            SpectralDensitySpec::Eigen(e) => {
                let n_max = e.rank(32);
                for j in 0..16 {
                    let omega = TAU * (j as f64 + 0.5) / 16.0;
                    let mut partial = 0.0;
                    for n in 1..=n_max {
                        let lambda = (e.eigenvalue)(n, omega);
                        if !lambda.is_finite() || lambda < 0.0 {
                            return Err(Error::InvalidSpec(format!(
                                "eigenvalue {n} at omega = {omega} is {lambda}"
                            )));
                        }
                        partial += lambda;
                    }
                    if !partial.is_finite() {
                        return Err(Error::InvalidSpec("eigenvalue partial sums diverge".into()));
                    }
                }
                Ok(())
            }
            SpectralDensitySpec::Filter(f) => {
                f.noise.check(grid)?;
                f.check_symmetry(grid)
            }
            SpectralDensitySpec::Farfima(f) => {
                f.check_order()?;
                f.noise.check(grid)
            }
            SpectralDensitySpec::Kernel(_) => Ok(()),
        }
    }

    /// Discretize the spec once for repeated evaluation on `grid`.
    pub fn prepare(&self, grid: &Grid, truncation: usize) -> Result<PreparedSpec<'_>> {
        if truncation == 0 {
            return invalid("truncation rank must be at least 1");
        }
        Ok(match self {
            SpectralDensitySpec::Eigen(e) => PreparedSpec::Eigen {
                spec: e,
                grid: grid.clone(),
                truncation,
            },
            SpectralDensitySpec::Filter(f) => PreparedSpec::Filter {
                spec: f,
                grid: grid.clone(),
                noise: NoiseBasis::new(&f.noise, grid, truncation)?,
            },
            SpectralDensitySpec::Farfima(f) => PreparedSpec::Farfima(f.discretize(grid, truncation)?),
            SpectralDensitySpec::Kernel(k) => PreparedSpec::Kernel {
                spec: k,
                grid: grid.clone(),
            },
        })
    }
}

/// A spec bound to a grid and truncation rank.
#[derive(Debug)]
pub enum PreparedSpec<'a> {
    Eigen {
        spec: &'a EigenSpec,
        grid: Grid,
        truncation: usize,
    },
    Filter {
        spec: &'a FilterSpec,
        grid: Grid,
        noise: NoiseBasis,
    },
    Farfima(DiscreteFarfima),
    Kernel {
        spec: &'a KernelSpec,
        grid: Grid,
    },
}

impl PreparedSpec<'_> {
    pub fn grid(&self) -> &Grid {
        match self {
            PreparedSpec::Eigen { grid, .. }
            | PreparedSpec::Filter { grid, .. }
            | PreparedSpec::Kernel { grid, .. } => grid,
            PreparedSpec::Farfima(f) => &f.grid,
        }
    }

    pub fn fractional_order(&self) -> f64 {
        match self {
            PreparedSpec::Farfima(f) => f.d,
            _ => 0.0,
        }
    }

    /// Kernel-form `F_ω` on the grid.
    pub fn density(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        match self {
            PreparedSpec::Eigen { spec, grid, truncation } => {
                let (lambdas, phis) = spec.modes(omega, grid, *truncation)?;
                let m = grid.len();
                let mut scaled = phis.clone();
                for (n, l) in lambdas.iter().enumerate() {
                    scaled.row_mut(n).scale_mut(*l);
                }
                let f = phis.transpose() * scaled;
                debug_assert_eq!(f.nrows(), m);
                Ok(f.map(|v| Complex64::new(v, 0.0)))
            }
            PreparedSpec::Filter { spec, grid, noise } => {
                let resp = ResponseAt::evaluate(&spec.response, omega, grid)?;
                let m = grid.len();
                let mut g = DMatrix::<Complex64>::zeros(m, noise.rank());
                for n in 0..noise.rank() {
                    let col: Vec<Complex64> = noise.modes.row(n).iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    g.column_mut(n).copy_from_slice(&resp.apply(&col, grid));
                }
                Ok(&g * g.adjoint() / Complex64::new(TAU, 0.0))
            }
            PreparedSpec::Farfima(f) => f.density(omega),
            PreparedSpec::Kernel { spec, grid } => {
                let m = grid.len();
                let pts = grid.points();
                let mut out = DMatrix::zeros(m, m);
                for j in 0..m {
                    for i in 0..m {
                        let v = (spec.0)(omega, pts[i], pts[j]);
                        if !(v.re.is_finite() && v.im.is_finite()) {
                            return Err(Error::Numeric(format!(
                                "spectral kernel is not finite at omega = {omega}, (x, y) = ({}, {})",
                                pts[i], pts[j]
                            )));
                        }
                        out[(i, j)] = v;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Apply the filter (without the `(2π)^{-1/2}` factor) to a noise draw.
    pub(crate) fn filter_response(&self, omega: f64) -> Result<Option<ResponseAt>> {
        match self {
            PreparedSpec::Filter { spec, grid, .. } => Ok(Some(ResponseAt::evaluate(&spec.response, omega, grid)?)),
            _ => Ok(None),
        }
    }
}

impl ResponseAt {
    pub(crate) fn apply_on(&self, v: &[Complex64], grid: &Grid) -> Vec<Complex64> {
        self.apply(v, grid)
    }
}

pub(crate) fn is_zero_frequency(omega: f64) -> bool {
    omega == 0.0 || omega == TAU
}

/// `F_ω` of `spec` on `grid` in kernel form.
pub fn eval_spectral_density(
    spec: &SpectralDensitySpec,
    omega: f64,
    grid: &Grid,
    truncation: usize,
) -> Result<ComplexOperatorMatrix> {
    if !(0.0..=TAU).contains(&omega) {
        return invalid(format!("frequency {omega} is outside [0, 2π]"));
    }
    let values = spec.prepare(grid, truncation)?.density(omega)?;
    ComplexOperatorMatrix::new(grid.clone(), values, OperatorForm::Kernel)
}

/// `[2 sin(ω/2)]^{-2d}`, the squared modulus of `(1 - e^{-iω})^{-d}`.
pub fn fractional_factor(omega: f64, d: f64) -> Result<f64> {
    if d == 0.0 {
        return Ok(1.0);
    }
    if omega <= 0.0 || omega >= TAU {
        return Err(Error::SingularFrequency { omega });
    }
    Ok((2.0 * (0.5 * omega).sin()).powf(-2.0 * d))
}

/// `[2 sin(ω/2)]^{-d} 𝒜(e^{-iω})^{-1} ℬ(e^{-iω}) rhs`.
pub fn farfima_frequency_response(
    spec: &FarfimaSpec,
    omega: f64,
    grid: &Grid,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let model = spec.discretize(grid, 1)?;
    model.response(omega, false)?.apply(rhs)
}

/// Frequencies processed per parallel task when integrating over `ω`. Fixed so
/// the floating-point summation order does not depend on the thread count.
const FREQ_CHUNK: usize = 32;

fn integrate_frequencies(
    prepared: &PreparedSpec<'_>,
    freqs: &[(f64, f64)],
    h: i64,
) -> Result<(DMatrix<Complex64>, f64)> {
    let m = prepared.grid().len();
    let partials = freqs
        .par_chunks(FREQ_CHUNK)
        .map(|chunk| {
            let mut acc = DMatrix::<Complex64>::zeros(m, m);
            let mut scale = 0.0;
            for &(omega, weight) in chunk {
                if weight == 0.0 {
                    continue;
                }
                let f = prepared.density(omega)?;
                scale += weight * f.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let phase = Complex64::from_polar(weight, h as f64 * omega);
                acc.zip_apply(&f, |a, b| *a += b * phase);
            }
            Ok((acc, scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = DMatrix::<Complex64>::zeros(m, m);
    let mut scale = 0.0;
    for (p, s) in partials {
        total += p;
        scale += s;
    }
    Ok((total, scale))
}

/// Drop the imaginary part of an integrated covariance after checking it is
/// negligible against `scale = ∫ max|F_ω| dω`.
fn real_covariance((values, scale): (DMatrix<Complex64>, f64), grid: &Grid) -> Result<RealKernelMatrix> {
    let im_max = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if im_max > 1e-8 * scale {
        return Err(Error::Numeric(format!(
            "autocovariance has imaginary part {im_max:e} against density scale {scale:e}"
        )));
    }
    RealKernelMatrix::new(grid.clone(), values.map(|v| v.re))
}

/// `R_h = ∫₀^{2π} F_ω e^{ihω} dω` by the midpoint rule on `n_freq` nodes.
pub fn true_autocovariance(
    spec: &SpectralDensitySpec,
    h: i64,
    grid: &Grid,
    n_freq: usize,
    truncation: usize,
) -> Result<RealKernelMatrix> {
    if n_freq < 64 {
        return invalid(format!("at least 64 frequency nodes are required, got {n_freq}"));
    }
    let d = spec.fractional_order();
    if d >= 0.5 || d <= -0.5 {
        return invalid(format!("spectral density is not integrable for d = {d}"));
    }
    let prepared = spec.prepare(grid, truncation)?;
    let step = TAU / n_freq as f64;
    let freqs: Vec<(f64, f64)> = (0..n_freq).map(|j| ((j as f64 + 0.5) * step, step)).collect();
    real_covariance(integrate_frequencies(&prepared, &freqs, h)?, grid)
}

/// Exact lag-`h` covariance of the length-`T` spectral simulation:
/// `(2π/T) Σ_{k=1}^{T} F_{ω_k} e^{ihω_k}`, with the `k = T` term dropped when `d ≠ 0`.
pub fn finite_t_target_covariance(
    spec: &SpectralDensitySpec,
    h: i64,
    grid: &Grid,
    t: usize,
    truncation: usize,
) -> Result<RealKernelMatrix> {
    let prepared = spec.prepare(grid, truncation)?;
    finite_t_target_prepared(&prepared, h, t)
}

pub(crate) fn finite_t_target_prepared(prepared: &PreparedSpec<'_>, h: i64, t: usize) -> Result<RealKernelMatrix> {
    if t == 0 || t % 2 == 1 {
        return invalid(format!("time horizon must be even and positive, got {t}"));
    }
    let step = TAU / t as f64;
    let zero_at_origin = prepared.fractional_order() != 0.0;
    let freqs: Vec<(f64, f64)> = (1..=t)
        .map(|k| {
            let omega = canonical_frequency(k, t);
            let weight = if k == t && zero_at_origin { 0.0 } else { step };
            (omega, weight)
        })
        .collect();
    real_covariance(integrate_frequencies(prepared, &freqs, h)?, prepared.grid())
}

/// `ω_k = 2πk/T`, exact at `k = T/2` and `k = T`.
pub fn canonical_frequency(k: usize, t: usize) -> f64 {
    if 2 * k == t {
        PI
    } else if k == t {
        TAU
    } else {
        TAU * k as f64 / t as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, operator_norms, solve_linear_system};

    fn white_noise_kernel_spec() -> SpectralDensitySpec {
        SpectralDensitySpec::Farfima(FarfimaSpec::new(0.0, vec![], vec![], CovarianceSpec::brownian_motion_kernel()).unwrap())
    }

    #[test]
    fn fractional_factor_values() {
        for omega in [0.1, 1.0, PI, 5.0] {
            assert_eq!(fractional_factor(omega, 0.0).unwrap(), 1.0);
        }
        let v = fractional_factor(PI, 0.2).unwrap();
        assert!((v - 2f64.powf(-0.4)).abs() < 1e-15);
        assert!((v - 0.757858).abs() < 1e-6);
        for omega in [0.3, 1.1, 2.9] {
            let a = fractional_factor(omega, 0.35).unwrap();
            let b = fractional_factor(TAU - omega, 0.35).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
        assert!(matches!(fractional_factor(0.0, 0.2), Err(Error::SingularFrequency { .. })));
        assert!(matches!(fractional_factor(TAU, -0.2), Err(Error::SingularFrequency { .. })));
    }

    #[test]
    fn white_noise_density_is_scaled_covariance() {
        let grid = make_grid(21).unwrap();
        let spec = white_noise_kernel_spec();
        let s = discretize_kernel(f64::min, &grid).unwrap().values;
        for omega in [0.0, 0.7, PI, 4.0, TAU] {
            let f = eval_spectral_density(&spec, omega, &grid, 21).unwrap();
            let diff = f.values.zip_map(&s, |a, b| (a - b / TAU).norm()).max();
            assert!(diff < 1e-12, "{omega}: {diff}");
        }
    }

    #[test]
    fn farfima_endpoint_is_singular() {
        let grid = make_grid(5).unwrap();
        let spec = SpectralDensitySpec::Farfima(
            FarfimaSpec::new(0.2, vec![], vec![], CovarianceSpec::brownian_motion_mercer()).unwrap(),
        );
        assert!(matches!(
            eval_spectral_density(&spec, 0.0, &grid, 3),
            Err(Error::SingularFrequency { .. })
        ));
        assert!(eval_spectral_density(&spec, 0.5, &grid, 3).is_ok());
        assert!(FarfimaSpec::new(0.5, vec![], vec![], CovarianceSpec::brownian_motion_mercer()).is_err());
    }

    #[test]
    fn frequency_response_degenerate_cases() {
        let grid = make_grid(9).unwrap();
        let rhs: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64 * 0.1, 1.0 - i as f64)).collect();
        let white = FarfimaSpec::new(0.0, vec![], vec![], CovarianceSpec::brownian_motion_mercer()).unwrap();
        assert_eq!(farfima_frequency_response(&white, 1.3, &grid, &rhs).unwrap(), rhs);

        let ar = || vec![ArOperator::kernel(|x, y| 0.3 * (x - y).sin())];
        let p_only = FarfimaSpec::new(0.0, ar(), vec![], CovarianceSpec::brownian_motion_mercer()).unwrap();
        let with_zero_ma = FarfimaSpec::new(0.0, ar(), vec![Arc::new(|_, _| 0.0)], CovarianceSpec::brownian_motion_mercer()).unwrap();
        let a = farfima_frequency_response(&p_only, 1.3, &grid, &rhs).unwrap();
        let b = farfima_frequency_response(&with_zero_ma, 1.3, &grid, &rhs).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_one_path_matches_dense_solve() {
        let grid = make_grid(51).unwrap();
        let spec = builtin::example2_farfima(builtin::NoiseForm::Mercer);
        let SpectralDensitySpec::Farfima(f) = &spec else { unreachable!() };
        let model = f.discretize(&grid, 10).unwrap();
        assert!(model.has_rank_one_ar());
        let rhs: Vec<Complex64> = grid.points().iter().map(|x| Complex64::new(x.sin(), x * x)).collect();
        let fast = model.response(1.0, false).unwrap().apply(&rhs).unwrap();
        let dense = model.response(1.0, true).unwrap().apply(&rhs).unwrap();
        let diff = fast.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");

        // And against an explicit solve of 𝒜 x = rhs.
        let a = model.ar_polynomial(1.0);
        let x = solve_linear_system(&a, &DVector::from_vec(rhs.clone())).unwrap();
        let scale = fractional_factor(1.0, 0.2).unwrap().sqrt();
        let diff = x.iter().zip(&fast).map(|(a, b)| (a * scale - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn densities_are_hermitian_psd_and_conjugate_symmetric() {
        let grid = make_grid(15).unwrap();
        let specs = [
            builtin::example1_ckl(),
            builtin::example1_kernel(),
            builtin::example2_farfima(builtin::NoiseForm::Mercer),
            builtin::example2_farfima(builtin::NoiseForm::Kernel),
            builtin::example3_farma(),
        ];
        for spec in &specs {
            for omega in [0.2, 1.0, 2.5, PI - 0.01] {
                let f = eval_spectral_density(spec, omega, &grid, 10).unwrap();
                let g = eval_spectral_density(spec, TAU - omega, &grid, 10).unwrap();
                let scale = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(f.hermitian_defect() <= 1e-10 * scale, "{spec:?} at {omega}");
                let conj = f.values.zip_map(&g.values, |a, b| (a.conj() - b).norm()).max();
                assert!(conj <= 1e-10 * scale, "{spec:?} at {omega}: {conj}");
                let eig = truncated_eigendecomposition(&f, 15).unwrap();
                assert_eq!(eig.clamped, 0, "{spec:?} at {omega}");
            }
        }
    }

    #[test]
    fn farfima_with_zero_d_is_farma() {
        let grid = make_grid(11).unwrap();
        let spec = builtin::example2_farfima(builtin::NoiseForm::Mercer);
        let SpectralDensitySpec::Farfima(f) = &spec else { unreachable!() };
        let farma = SpectralDensitySpec::Farfima(FarfimaSpec { d: 0.0, ..f.clone() });
        for omega in [0.4, 2.0] {
            let a = eval_spectral_density(&spec, omega, &grid, 20).unwrap();
            let b = eval_spectral_density(&farma, omega, &grid, 20).unwrap();
            let ratio = fractional_factor(omega, 0.2).unwrap();
            let diff = a.values.zip_map(&b.values, |x, y| (x - y * ratio).norm()).max();
            assert!(diff < 1e-14, "{diff}");
        }
    }

    #[test]
    fn white_noise_autocovariances() {
        let grid = make_grid(9).unwrap();
        let spec = white_noise_kernel_spec();
        let s = discretize_kernel(f64::min, &grid).unwrap().values;
        let r0 = true_autocovariance(&spec, 0, &grid, 64, 9).unwrap();
        assert!((&r0.values - &s).amax() < 1e-10);
        let r1 = true_autocovariance(&spec, 1, &grid, 64, 9).unwrap();
        assert!(r1.values.amax() < 1e-10);

        let t0 = finite_t_target_covariance(&spec, 0, &grid, 128, 9).unwrap();
        assert!((&t0.values - &s).amax() < 1e-12);
        let t1 = finite_t_target_covariance(&spec, 1, &grid, 128, 9).unwrap();
        assert!(t1.values.amax() < 1e-12);
        assert!(finite_t_target_covariance(&spec, 0, &grid, 127, 9).is_err());
        assert!(true_autocovariance(&spec, 0, &grid, 32, 9).is_err());
    }

    #[test]
    fn negative_lag_is_transpose() {
        let grid = make_grid(9).unwrap();
        let spec = builtin::example3_farma();
        for h in [1, 3] {
            let a = true_autocovariance(&spec, h, &grid, 128, 9).unwrap();
            let b = true_autocovariance(&spec, -h, &grid, 128, 9).unwrap();
            assert!((&a.values - b.values.transpose()).amax() < 1e-10);
            assert!(a.values.amax() > 1e-3, "lag {h} covariance should not vanish");
        }
    }

    #[test]
    fn finite_target_lag_zero_is_psd() {
        let grid = make_grid(13).unwrap();
        for spec in [builtin::example1_ckl(), builtin::example3_farma(), builtin::example2_farfima(builtin::NoiseForm::Mercer)] {
            let r = finite_t_target_covariance(&spec, 0, &grid, 32, 10).unwrap();
            assert!(r.is_symmetric(1e-10));
            let eig = truncated_eigendecomposition(&r, 13).unwrap();
            assert_eq!(eig.clamped, 0);
            assert!(operator_norms(&r).unwrap().trace_norm > 0.0);
        }
    }

    #[test]
    fn spec_checks() {
        let grid = make_grid(9).unwrap();
        for spec in [builtin::example1_ckl(), builtin::example2_farfima(builtin::NoiseForm::Kernel), builtin::example3_farma()] {
            spec.check(&grid).unwrap();
        }
        let bad = SpectralDensitySpec::Eigen(EigenSpec::new(Some(3), |n, _| 1.0 - n as f64, |_, _, _| 1.0));
        assert!(matches!(bad.check(&grid), Err(Error::InvalidSpec(_))));
        let bad_filter = SpectralDensitySpec::Filter(FilterSpec {
            response: FrequencyResponse::Scalar(Arc::new(|w| Complex64::from_polar(1.0, w))),
            noise: CovarianceSpec::brownian_motion_mercer(),
        });
        assert!(bad_filter.check(&grid).is_ok());
        let asym = SpectralDensitySpec::Filter(FilterSpec {
            response: FrequencyResponse::Scalar(Arc::new(|w| Complex64::new(1.0, w))),
            noise: CovarianceSpec::brownian_motion_mercer(),
        });
        assert!(matches!(asym.check(&grid), Err(Error::InvalidSpec(_))));
        let asym_cov = SpectralDensitySpec::Filter(FilterSpec {
            response: FrequencyResponse::Identity,
            noise: CovarianceSpec::kernel(|x, y| x * y * y),
        });
        assert!(matches!(asym_cov.check(&grid), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn companion_radius() {
        let grid = make_grid(21).unwrap();
        let SpectralDensitySpec::Farfima(f2) = builtin::example2_farfima(builtin::NoiseForm::Mercer) else { unreachable!() };
        // Rank one: the only nonzero eigenvalue is 0.34 ‖g‖² ≈ 0.497.
        let r = f2.companion_spectral_radius(&grid).unwrap();
        assert!((r - 0.34 * 1.46265).abs() < 2e-3, "{r}");
        let SpectralDensitySpec::Farfima(f3) = builtin::example3_farma() else { unreachable!() };
        let r = f3.companion_spectral_radius(&grid).unwrap();
        assert!(r < 1.0, "{r}");
    }
}
