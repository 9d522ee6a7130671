//! Time-domain simulation: white noise, moving-average filtering, fractional
//! integration through its FMA(∞) expansion, and autoregressive recursion.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::rng::{Domain, GaussianStream};
use crate::spectra::{CovarianceSpec, DiscreteFarfima, FarfimaSpec, NoiseBasis, SpectralDensitySpec};
use crate::spectral::{FtsSample, Method, SimConfig, Simulator};

/// Coefficients of `(1 - z)^{-d} = Σ_k c_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracCoeffs {
    pub d: f64,
    pub coefficients: Vec<f64>,
}

/// `c_0, …, c_K` with `c_0 = 1`, `c_k = c_{k-1} (k - 1 + d) / k`.
pub fn frac_coeffs(d: f64, k: usize) -> Result<FracCoeffs> {
    if d.is_nan() || d.abs() >= 0.5 {
        return invalid(format!("fractional order d = {d} must satisfy |d| < 1/2"));
    }
    if k == 0 {
        return invalid("number of fractional coefficients must be positive");
    }
    let mut coefficients = Vec::with_capacity(k + 1);
    let mut c = 1.0;
    coefficients.push(c);
    for j in 1..=k {
        c *= (j as f64 - 1.0 + d) / j as f64;
        coefficients.push(c);
    }
    Ok(FracCoeffs { d, coefficients })
}

/// Number of leading time steps discarded after a recursion started from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnInPolicy {
    pub length: usize,
}

impl BurnInPolicy {
    pub fn new(length: usize) -> Self {
        Self { length }
    }

    /// `4 · max(p, 50)`.
    pub fn default_for(p: usize) -> Self {
        Self::new(4 * p.max(50))
    }
}

/// `count` i.i.d. rows `Σ_{n ≤ N} √η_n e_n ξ_n`.
pub fn simulate_noise(
    cov: &CovarianceSpec,
    count: usize,
    grid: &Grid,
    truncation: usize,
    stream: &mut GaussianStream,
) -> Result<DMatrix<f64>> {
    let basis = NoiseBasis::new(cov, grid, truncation)?;
    Ok(noise_rows(&basis, count, stream))
}

fn noise_rows(basis: &NoiseBasis, count: usize, stream: &mut GaussianStream) -> DMatrix<f64> {
    let rank = basis.rank();
    // Row-major fill so draw order is (t, n).
    let mut xi = DMatrix::zeros(count, rank);
    for t in 0..count {
        for n in 0..rank {
            xi[(t, n)] = stream.next();
        }
    }
    xi * &basis.modes
}

/// `X_t = Σ_j A_j X_{t-j} + innov_t` with `X_1 = … = X_p = 0`; `ar` holds `A_j W`.
pub fn ar_recursion(innovations: &DMatrix<f64>, ar: &[DMatrix<f64>]) -> DMatrix<f64> {
    let (len, m) = innovations.shape();
    let p = ar.len();
    if p == 0 {
        return innovations.clone();
    }
    let mut out = DMatrix::zeros(len, m);
    let mut rows: Vec<DVector<f64>> = vec![DVector::zeros(m); len];
    for t in p..len {
        let mut x: DVector<f64> = innovations.row(t).transpose();
        for (j, a) in ar.iter().enumerate() {
            x.gemv(1.0, a, &rows[t - j - 1], 1.0);
        }
        out.row_mut(t).copy_from(&x.transpose());
        rows[t] = x;
    }
    out
}

/// AR recursion over a pre-simulated FARFIMA(0, d, q) path, keeping the last `t` values.
pub(crate) fn hybrid_recursion(pre: &DMatrix<f64>, ar: &[DMatrix<f64>], t: usize) -> DMatrix<f64> {
    let full = ar_recursion(pre, ar);
    let start = full.nrows() - t;
    full.rows(start, t).into_owned()
}

/// `X'_t = Σ_{k < K} c_k η_{t-k}` for `t = 1..=len`, given `η` at times `2 - K..=len`.
/// `eta` is row-major with `m` columns.
fn fractional_integration(eta: &[f64], m: usize, coeffs: &[f64], len: usize) -> DMatrix<f64> {
    let k_ma = coeffs.len();
    let mut out = vec![0.0; len * m];
    for t in 0..len {
        let acc = &mut out[t * m..(t + 1) * m];
        for (k, &c) in coeffs.iter().enumerate() {
            let i = t + k_ma - 1 - k;
            for (a, e) in acc.iter_mut().zip(&eta[i * m..(i + 1) * m]) {
                *a += c * e;
            }
        }
    }
    DMatrix::from_row_slice(len, m, &out)
}

fn temporal_core(
    model: &DiscreteFarfima,
    t: usize,
    k_ma: usize,
    burnin: BurnInPolicy,
    stream: &mut GaussianStream,
) -> Result<DMatrix<f64>> {
    let len = t + burnin.length;
    if k_ma < len {
        return invalid(format!("FMA truncation {k_ma} is shorter than T + burn-in = {len}"));
    }
    let m = model.grid.len();
    let q = model.ma.len();
    let mut coeffs = frac_coeffs(model.d, k_ma - 1)?.coefficients;
    if model.d == 0.0 {
        coeffs.truncate(1);
    }
    let k_eff = coeffs.len();
    // ε at times 2 - K - q ..= len.
    let eps = noise_rows(&model.noise, len + k_eff - 1 + q, stream);
    let count = len + k_eff - 1;
    let mut eta = vec![0.0; count * m];
    for i in 0..count {
        let row = &mut eta[i * m..(i + 1) * m];
        for (r, e) in row.iter_mut().zip(eps.row(i + q).iter()) {
            *r = *e;
        }
        for (j, b) in model.ma.iter().enumerate() {
            let lagged = eps.row(i + q - j - 1).transpose();
            let v = b * lagged;
            for (r, x) in row.iter_mut().zip(v.iter()) {
                *r += x;
            }
        }
    }
    let x_frac = fractional_integration(&eta, m, &coeffs, len);
    Ok(hybrid_recursion(&x_frac, &model.ar, t))
}

pub(crate) fn temporal_values(
    model: &DiscreteFarfima,
    t: usize,
    burnin: BurnInPolicy,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let mut stream = GaussianStream::for_domain(seed, Domain::Noise, 0);
    temporal_core(model, t, t + burnin.length, burnin, &mut stream)
}

/// Time-domain FARFIMA simulation with an FMA(∞) expansion truncated at `k_ma` terms.
pub fn temporal_farfima(
    spec: &FarfimaSpec,
    t: usize,
    grid: &Grid,
    truncation: usize,
    k_ma: usize,
    burnin: BurnInPolicy,
    stream: &mut GaussianStream,
) -> Result<FtsSample> {
    if t == 0 {
        return invalid("T must be positive");
    }
    let model = spec.discretize(grid, truncation)?;
    let values = temporal_core(&model, t, k_ma, burnin, stream)?;
    let mut config = SimConfig::new(t, grid.len(), truncation, stream.seed(), Method::Temporal);
    config.burnin = Some(burnin.length);
    Ok(FtsSample {
        values,
        grid: grid.clone(),
        config,
        imag_residual: 0.0,
    })
}

/// FARFIMA(0, d, q) simulated spectrally at length `T + T̃`, then the AR
/// recursion from zero initial values, keeping the last `T` values.
pub fn hybrid_farfima(spec: &FarfimaSpec, config: &SimConfig, grid: &Grid, burnin: BurnInPolicy) -> Result<FtsSample> {
    let spec = SpectralDensitySpec::Farfima(spec.clone());
    let config = SimConfig {
        method: Method::FarfimaHybrid,
        burnin: Some(burnin.length),
        ..config.clone()
    };
    Simulator::new(&spec, &config, grid)?.run()
}
