//! Frequency-atom ensembles and their synthesis into real samples.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{truncated_eigendecomposition, ComplexOperatorMatrix, Grid, OperatorForm, RealKernelMatrix};
use crate::rng::{Domain, GaussianStream};
use crate::spectra::{
    canonical_frequency, is_zero_frequency, EigenSpec, FarfimaSpec, FilterSpec, NoiseBasis, PreparedSpec,
    SpectralDensitySpec,
};
use crate::temporal::{self, BurnInPolicy};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Simulation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Harmonic (Cramér–Karhunen–Loève) atoms. Analytic for [`EigenSpec`];
    /// any other spec is decomposed numerically at every frequency.
    Ckl,
    /// Filtered white noise.
    Filter,
    /// FARFIMA atoms with the AR operator inverted per frequency.
    FarfimaSpectral,
    /// FARFIMA(0, d, q) in the spectral domain, AR recursion in time.
    FarfimaHybrid,
    /// Time-domain FMA(∞) reference simulator.
    Temporal,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ckl,
        Method::Filter,
        Method::FarfimaSpectral,
        Method::FarfimaHybrid,
        Method::Temporal,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Ckl => "ckl",
            Method::Filter => "filter",
            Method::FarfimaSpectral => "farfima-spectral",
            Method::FarfimaHybrid => "farfima-hybrid",
            Method::Temporal => "temporal",
        }
    }

    /// Natural method for a spec.
    pub fn default_for(spec: &SpectralDensitySpec) -> Method {
        match spec {
            SpectralDensitySpec::Eigen(_) | SpectralDensitySpec::Kernel(_) => Method::Ckl,
            SpectralDensitySpec::Filter(_) => Method::Filter,
            SpectralDensitySpec::Farfima(_) => Method::FarfimaSpectral,
        }
    }

    /// Reject methods that cannot simulate `spec`.
    pub fn check_compatible(self, spec: &SpectralDensitySpec) -> Result<()> {
        let ok = match self {
            Method::Ckl => true,
            Method::Filter => matches!(spec, SpectralDensitySpec::Filter(_)),
            Method::FarfimaSpectral | Method::FarfimaHybrid | Method::Temporal => {
                matches!(spec, SpectralDensitySpec::Farfima(_))
            }
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("method {} cannot simulate a spec of kind {}", self.tag(), spec.kind()))
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Parameters of one simulation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Time horizon; must be even.
    pub t: usize,
    /// Grid resolution.
    pub m: usize,
    /// Truncation rank.
    pub n: usize,
    pub seed: u64,
    /// Simulate `oversample · T` values and keep a random contiguous block of `T`.
    pub oversample: usize,
    pub method: Method,
    /// Burn-in for the time-domain methods; `None` uses [`BurnInPolicy::default_for`].
    pub burnin: Option<usize>,
}

impl SimConfig {
    pub fn new(t: usize, m: usize, n: usize, seed: u64, method: Method) -> Self {
        Self {
            t,
            m,
            n,
            seed,
            oversample: 1,
            method,
            burnin: None,
        }
    }

    pub fn with_oversample(mut self, k: usize) -> Self {
        self.oversample = k;
        self
    }

    pub fn with_burnin(mut self, burnin: usize) -> Self {
        self.burnin = Some(burnin);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.t % 2 == 1 {
            return invalid(format!("T must be even and positive, got {}", self.t));
        }
        if self.n == 0 {
            return invalid("truncation rank N must be at least 1");
        }
        if self.m < 2 {
            return invalid(format!("grid resolution M must be at least 2, got {}", self.m));
        }
        if self.oversample == 0 {
            return invalid("oversample factor must be at least 1");
        }
        Ok(())
    }

    fn burnin_policy(&self, p: usize) -> BurnInPolicy {
        self.burnin.map_or_else(|| BurnInPolicy::default_for(p), BurnInPolicy::new)
    }
}

/// Atoms `Z_1, …, Z_T`; row `k - 1` holds `Z_k` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEnsemble {
    pub t: usize,
    pub atoms: DMatrix<Complex64>,
}

impl FrequencyEnsemble {
    pub fn zeros(t: usize, m: usize) -> Self {
        Self {
            t,
            atoms: DMatrix::zeros(t, m),
        }
    }

    /// `Z_k` for `k` in `1..=T`.
    pub fn atom(&self, k: usize) -> Vec<Complex64> {
        self.atoms.row(k - 1).iter().copied().collect()
    }

    pub fn set_atom(&mut self, k: usize, values: &[Complex64]) {
        for (j, v) in values.iter().enumerate() {
            self.atoms[(k - 1, j)] = *v;
        }
    }

    /// Largest violation of `Z_{T-k} = conj(Z_k)` and of realness at `k ∈ {T/2, T}`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.t;
        let m = self.atoms.ncols();
        let mut defect: f64 = 0.0;
        for k in 1..t / 2 {
            for j in 0..m {
                defect = defect.max((self.atoms[(t - k - 1, j)] - self.atoms[(k - 1, j)].conj()).norm());
            }
        }
        for k in [t / 2, t] {
            for j in 0..m {
                defect = defect.max(self.atoms[(k - 1, j)].im.abs());
            }
        }
        defect
    }
}

/// A simulated functional time series; row `t - 1` holds `X_t` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FtsSample {
    pub values: DMatrix<f64>,
    pub grid: Grid,
    pub config: SimConfig,
    /// `max |Im| / max |Re|` of the synthesized values before the imaginary part
    /// was dropped; zero for time-domain methods.
    pub imag_residual: f64,
}

impl FtsSample {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// `X_t` for `t` in `1..=T`.
    pub fn row(&self, t: usize) -> Vec<f64> {
        self.values.row(t - 1).iter().copied().collect()
    }
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn sum_modes(lambdas: &[f64], phis: &DMatrix<f64>, stream: &mut GaussianStream) -> Vec<Complex64> {
    let m = phis.ncols();
    let mut out = vec![0.0; m];
    for (n, &lambda) in lambdas.iter().enumerate() {
        let c = lambda.sqrt() * stream.next();
        for (o, p) in out.iter_mut().zip(phis.row(n).iter()) {
            *o += c * p;
        }
    }
    to_complex(&out)
}

/// `Σ_{n ≤ N} √λ_n(ω) φ_n(ω) ξ_n`.
pub fn draw_atom_ckl(
    spec: &EigenSpec,
    omega: f64,
    grid: &Grid,
    truncation: usize,
    stream: &mut GaussianStream,
) -> Result<Vec<Complex64>> {
    let (lambdas, phis) = spec.modes(omega, grid, truncation)?;
    Ok(sum_modes(&lambdas, &phis, stream))
}

/// `(2π)^{-1/2} Θ(ω) Σ_{n ≤ N} √η_n e_n ξ_n`.
pub fn draw_atom_filter(
    spec: &FilterSpec,
    omega: f64,
    grid: &Grid,
    truncation: usize,
    stream: &mut GaussianStream,
) -> Result<Vec<Complex64>> {
    let noise = NoiseBasis::new(&spec.noise, grid, truncation)?;
    let prepared = PreparedSpec::Filter {
        spec,
        grid: grid.clone(),
        noise,
    };
    draw_atom_prepared(&prepared, Method::Filter, omega, false, stream)
}

/// `(2π)^{-1/2} [2 sin(ω/2)]^{-d} 𝒜(e^{-iω})^{-1} ℬ(e^{-iω}) Y`.
pub fn draw_atom_farfima(
    spec: &FarfimaSpec,
    omega: f64,
    grid: &Grid,
    truncation: usize,
    stream: &mut GaussianStream,
) -> Result<Vec<Complex64>> {
    let prepared = PreparedSpec::Farfima(spec.discretize(grid, truncation)?);
    draw_atom_prepared(&prepared, Method::FarfimaSpectral, omega, false, stream)
}

/// One pre-symmetrization draw `Z'` at `omega`. With `real` set, the density is
/// known to be real at `omega` and numerical decompositions use its real part.
pub(crate) fn draw_atom_prepared(
    prepared: &PreparedSpec<'_>,
    method: Method,
    omega: f64,
    real: bool,
    stream: &mut GaussianStream,
) -> Result<Vec<Complex64>> {
    let inv_sqrt_2pi = 1.0 / TAU.sqrt();
    match (prepared, method) {
        (PreparedSpec::Eigen { spec, grid, truncation }, Method::Ckl) => {
            draw_atom_ckl(spec, omega, grid, *truncation, stream)
        }
        (_, Method::Ckl) => draw_atom_numeric(prepared, omega, real, stream),
        (PreparedSpec::Filter { grid, noise, .. }, Method::Filter) => {
            let y = to_complex(&noise.draw(stream));
            let resp = prepared.filter_response(omega)?.expect("filter spec");
            Ok(resp.apply_on(&y, grid).into_iter().map(|v| v * inv_sqrt_2pi).collect())
        }
        (PreparedSpec::Farfima(model), Method::FarfimaSpectral) => {
            if model.d != 0.0 && is_zero_frequency(omega) {
                return Ok(vec![ZERO; model.grid.len()]);
            }
            let y = to_complex(&model.noise.draw(stream));
            let z = model.response(omega, false)?.apply(&y)?;
            Ok(z.into_iter().map(|v| v * inv_sqrt_2pi).collect())
        }
        _ => invalid(format!("method {} does not match the {:?} spec", method.tag(), prepared)),
    }
}

fn draw_atom_numeric(
    prepared: &PreparedSpec<'_>,
    omega: f64,
    real: bool,
    stream: &mut GaussianStream,
) -> Result<Vec<Complex64>> {
    let grid = prepared.grid();
    let m = grid.len();
    let truncation = match prepared {
        PreparedSpec::Filter { noise, .. } => noise.rank(),
        PreparedSpec::Farfima(f) => f.noise.rank(),
        _ => m,
    }
    .min(m);
    if prepared.fractional_order() != 0.0 && is_zero_frequency(omega) {
        return Ok(vec![ZERO; m]);
    }
    let density = prepared.density(omega)?;
    let eig = if real {
        truncated_eigendecomposition(&RealKernelMatrix::new(grid.clone(), density.map(|v| v.re))?, truncation)?
    } else {
        truncated_eigendecomposition(
            &ComplexOperatorMatrix::new(grid.clone(), density, OperatorForm::Kernel)?,
            truncation,
        )?
    };
    let mut out = vec![ZERO; m];
    for (n, &mu) in eig.eigenvalues.iter().enumerate() {
        let c = mu.sqrt() * stream.next();
        for (o, v) in out.iter_mut().zip(eig.eigenfunctions.row(n).iter()) {
            *o += v * c;
        }
    }
    Ok(out)
}

/// Build the symmetrized ensemble `Z_1, …, Z_T` for `prepared` with seed `seed`.
pub(crate) fn assemble_prepared(
    prepared: &PreparedSpec<'_>,
    method: Method,
    t: usize,
    seed: u64,
) -> Result<FrequencyEnsemble> {
    if t == 0 || t % 2 == 1 {
        return invalid(format!("T must be even and positive, got {t}"));
    }
    let m = prepared.grid().len();
    let half = t / 2;
    let sqrt2 = 2f64.sqrt();
    let draws = (1..=half)
        .into_par_iter()
        .map(|k| -> Result<Vec<(usize, Vec<Complex64>)>> {
            let omega = canonical_frequency(k, t);
            let mut re_stream = GaussianStream::for_domain(seed, Domain::AtomReal, k as u64);
            if k == half {
                let z = draw_atom_prepared(prepared, method, omega, true, &mut re_stream)?;
                let mut out = vec![(k, z.iter().map(|v| Complex64::new(sqrt2 * v.re, 0.0)).collect())];
                let mut top = GaussianStream::for_domain(seed, Domain::AtomReal, t as u64);
                let omega_t = canonical_frequency(t, t);
                let zt = draw_atom_prepared(prepared, method, omega_t, true, &mut top)?;
                out.push((t, zt.iter().map(|v| Complex64::new(sqrt2 * v.re, 0.0)).collect()));
                return Ok(out);
            }
            let mut im_stream = GaussianStream::for_domain(seed, Domain::AtomImag, k as u64);
            let z1 = draw_atom_prepared(prepared, method, omega, false, &mut re_stream)?;
            let z2 = draw_atom_prepared(prepared, method, omega, false, &mut im_stream)?;
            let z: Vec<Complex64> = z1
                .iter()
                .zip(&z2)
                .map(|(a, b)| a + Complex64::i() * b)
                .collect();
            let mirror = z.iter().map(|v| v.conj()).collect();
            Ok(vec![(k, z), (t - k, mirror)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ensemble = FrequencyEnsemble::zeros(t, m);
    for (k, z) in draws.into_iter().flatten() {
        ensemble.set_atom(k, &z);
    }
    Ok(ensemble)
}

/// Draw the frequency-atom ensemble for `spec` using `config.method`,
/// `config.t`, `config.n` and `config.seed`.
pub fn assemble_ensemble(spec: &SpectralDensitySpec, config: &SimConfig, grid: &Grid) -> Result<FrequencyEnsemble> {
    config.validate()?;
    let method = spectral_method(config.method)?;
    method.check_compatible(spec)?;
    let prepared = spec.prepare(grid, config.n)?;
    assemble_prepared(&prepared, method, config.t, config.seed)
}

fn spectral_method(method: Method) -> Result<Method> {
    match method {
        Method::Ckl | Method::Filter | Method::FarfimaSpectral => Ok(method),
        _ => invalid(format!("method {} does not build a frequency ensemble", method.tag())),
    }
}

/// Tolerance on ensemble symmetry, relative to the largest atom entry.
const SYMMETRY_TOL: f64 = 1e-8;

/// Synthesized values together with the relative imaginary residual.
pub(crate) fn synthesize_values(ensemble: &FrequencyEnsemble) -> Result<(DMatrix<f64>, f64)> {
    let t = ensemble.t;
    if t == 0 || t % 2 == 1 || ensemble.atoms.nrows() != t {
        return invalid("ensemble length must be even and match its atom count");
    }
    let scale = ensemble.atoms.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let defect = ensemble.symmetry_defect();
    if defect > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidEnsemble(format!(
            "conjugate symmetry violated by {defect:e} (atom scale {scale:e})"
        )));
    }
    let m = ensemble.atoms.ncols();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(t);
    let norm = (PI / t as f64).sqrt();
    let columns: Vec<(Vec<f64>, f64, f64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            // a_0 = Z_T, a_k = Z_k; X_t = √(π/T) y_{t mod T}.
            let mut buf: Vec<Complex64> = (0..t)
                .map(|s| if s == 0 { ensemble.atoms[(t - 1, j)] } else { ensemble.atoms[(s - 1, j)] })
                .collect();
            fft.process(&mut buf);
            let mut re = vec![0.0; t];
            let (mut re_max, mut im_max) = (0.0f64, 0.0f64);
            for row in 0..t {
                let y = buf[(row + 1) % t] * norm;
                re[row] = y.re;
                re_max = re_max.max(y.re.abs());
                im_max = im_max.max(y.im.abs());
            }
            (re, re_max, im_max)
        })
        .collect();
    let mut values = DMatrix::zeros(t, m);
    let (mut re_max, mut im_max) = (0.0f64, 0.0f64);
    for (j, (col, r, i)) in columns.into_iter().enumerate() {
        values.column_mut(j).copy_from_slice(&col);
        re_max = re_max.max(r);
        im_max = im_max.max(i);
    }
    let residual = if re_max > 0.0 { im_max / re_max } else { im_max };
    Ok((values, residual))
}

/// Inverse-FFT synthesis `X_t = √(π/T) Σ_k Z_k e^{itω_k}`, one transform per
/// grid point. `grid` and `config` are recorded in the returned sample.
pub fn synthesize(ensemble: &FrequencyEnsemble, grid: &Grid, config: &SimConfig) -> Result<FtsSample> {
    if ensemble.atoms.ncols() != grid.len() {
        return invalid("ensemble does not match the grid");
    }
    let (values, imag_residual) = synthesize_values(ensemble)?;
    if imag_residual > 1e-9 {
        log::warn!("synthesized sample has relative imaginary residual {imag_residual:e}");
    }
    Ok(FtsSample {
        values,
        grid: grid.clone(),
        config: config.clone(),
        imag_residual,
    })
}

/// A spec discretized for one configuration; draws any number of samples.
pub struct Simulator<'a> {
    prepared: PreparedSpec<'a>,
    /// AR operators `A_j W` applied in time by the hybrid method.
    ar: Vec<DMatrix<f64>>,
    config: SimConfig,
}

impl<'a> Simulator<'a> {
    pub fn new(spec: &'a SpectralDensitySpec, config: &SimConfig, grid: &Grid) -> Result<Self> {
        config.validate()?;
        if grid.len() != config.m {
            return invalid(format!("grid has {} points but M = {}", grid.len(), config.m));
        }
        config.method.check_compatible(spec)?;
        spec.check(grid)?;
        let mut prepared = spec.prepare(grid, config.n)?;
        let mut ar = Vec::new();
        if config.method == Method::FarfimaHybrid {
            if let PreparedSpec::Farfima(model) = &prepared {
                ar = model.ar.clone();
                prepared = PreparedSpec::Farfima(model.without_ar());
            }
        }
        Ok(Self {
            prepared,
            ar,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        self.prepared.grid()
    }

    /// Simulate with the configured seed.
    pub fn run(&self) -> Result<FtsSample> {
        self.run_seed(self.config.seed)
    }

    /// Simulate with `seed` in place of the configured seed.
    pub fn run_seed(&self, seed: u64) -> Result<FtsSample> {
        let config = SimConfig {
            seed,
            ..self.config.clone()
        };
        let (values, imag_residual) = match config.method {
            Method::Ckl | Method::Filter | Method::FarfimaSpectral => {
                self.spectral_values(config.method, config.t, seed)?
            }
            Method::FarfimaHybrid => {
                let burnin = config.burnin_policy(self.ar.len()).length;
                let (pre, residual) = self.spectral_values(Method::FarfimaSpectral, (config.t + burnin).next_multiple_of(2), seed)?;
                (temporal::hybrid_recursion(&pre, &self.ar, config.t), residual)
            }
            Method::Temporal => {
                let PreparedSpec::Farfima(model) = &self.prepared else {
                    return invalid("temporal method needs a FARFIMA spec");
                };
                let burnin = config.burnin_policy(model.p());
                (temporal::temporal_values(model, config.t, burnin, seed)?, 0.0)
            }
        };
        Ok(FtsSample {
            values,
            grid: self.grid().clone(),
            config,
            imag_residual,
        })
    }

    /// Spectral simulation of length `t`, oversampled as configured.
    fn spectral_values(&self, method: Method, t: usize, seed: u64) -> Result<(DMatrix<f64>, f64)> {
        let k = self.config.oversample;
        let total = k * t;
        let ensemble = assemble_prepared(&self.prepared, method, total, seed)?;
        let (values, residual) = synthesize_values(&ensemble)?;
        if residual > 1e-9 {
            log::warn!("synthesized sample has relative imaginary residual {residual:e}");
        }
        if k == 1 {
            return Ok((values, residual));
        }
        let offset = GaussianStream::for_domain(seed, Domain::Offset, 0).uniform_index(total - t + 1);
        Ok((values.rows(offset, t).into_owned(), residual))
    }
}

/// Simulate one sample of `spec` on `grid`.
pub fn simulate(spec: &SpectralDensitySpec, config: &SimConfig, grid: &Grid) -> Result<FtsSample> {
    Simulator::new(spec, config, grid)?.run()
}
