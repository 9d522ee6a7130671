//! Empirical autocovariances, the relative trace-norm error, and timing.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{trace_norm, Grid};
use crate::rng::derive_seed;
use crate::spectra::{finite_t_target_prepared, true_autocovariance, SpectralDensitySpec};
use crate::spectral::{FtsSample, Method, SimConfig, Simulator};

/// Lag-`h` autocovariance kernels on a grid, lags ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovSet {
    pub lags: Vec<usize>,
    pub matrices: Vec<DMatrix<f64>>,
    pub grid: Grid,
}

impl AutocovSet {
    pub fn new(lags: Vec<usize>, matrices: Vec<DMatrix<f64>>, grid: Grid) -> Result<Self> {
        if lags.len() != matrices.len() {
            return invalid("one matrix per lag is required");
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("lags must be strictly ascending");
        }
        let m = grid.len();
        if matrices.iter().any(|a| a.shape() != (m, m)) {
            return invalid("autocovariance matrices must match the grid");
        }
        Ok(Self { lags, matrices, grid })
    }

    pub fn get(&self, lag: usize) -> Option<&DMatrix<f64>> {
        self.lags.iter().position(|&l| l == lag).map(|i| &self.matrices[i])
    }
}

fn normalized_lags(lags: &[usize]) -> Vec<usize> {
    let mut lags = lags.to_vec();
    lags.sort_unstable();
    lags.dedup();
    lags
}

/// `R̂_h = T⁻¹ Σ_{t=1}^{T-h} X_{t+h} ⊗ X_t`, without mean subtraction.
pub fn empirical_autocov(sample: &FtsSample, lags: &[usize]) -> Result<AutocovSet> {
    let t = sample.len();
    let lags = normalized_lags(lags);
    if let Some(&h) = lags.iter().find(|&&h| h >= t) {
        return invalid(format!("lag {h} is not smaller than T = {t}"));
    }
    let x = &sample.values;
    let matrices = lags
        .iter()
        .map(|&h| {
            let n = t - h;
            let mut r = x.rows(h, n).transpose() * x.rows(0, n);
            r /= t as f64;
            r
        })
        .collect();
    AutocovSet::new(lags, matrices, sample.grid.clone())
}

/// Entrywise mean of replicate autocovariances.
pub fn average_autocov(replicates: &[AutocovSet]) -> Result<AutocovSet> {
    let Some(first) = replicates.first() else {
        return invalid("no replicates to average");
    };
    if replicates
        .iter()
        .any(|r| r.lags != first.lags || r.grid != first.grid)
    {
        return invalid("replicates have mismatched lags or grids");
    }
    let count = replicates.len() as f64;
    let matrices = (0..first.lags.len())
        .map(|i| {
            let mut acc = first.matrices[i].clone();
            for r in &replicates[1..] {
                acc += &r.matrices[i];
            }
            acc / count
        })
        .collect();
    AutocovSet::new(first.lags.clone(), matrices, first.grid.clone())
}

/// `‖R̄_h - R_h‖₁ / ‖R_0‖₁` for every lag of `avg`; `truth` must contain lag 0
/// and every lag of `avg`.
pub fn relative_error(avg: &AutocovSet, truth: &AutocovSet) -> Result<Vec<f64>> {
    if avg.grid != truth.grid {
        return invalid("autocovariances live on different grids");
    }
    let Some(r0) = truth.get(0) else {
        return invalid("truth must contain lag 0");
    };
    let denom = trace_norm(r0, &truth.grid)?;
    if denom <= 0.0 {
        return invalid("lag-0 covariance has zero trace norm");
    }
    avg.lags
        .iter()
        .zip(&avg.matrices)
        .map(|(&h, a)| {
            let Some(r) = truth.get(h) else {
                return invalid(format!("truth has no lag {h}"));
            };
            Ok(trace_norm(&(a - r), &avg.grid)? / denom)
        })
        .collect()
}

/// Which exact autocovariance to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The covariance the length-`T` spectral construction actually has.
    FiniteT { t: usize },
    /// `∫ F_ω e^{ihω} dω` by the midpoint rule on `n_freq` nodes.
    Stationary { n_freq: usize },
}

/// Exact autocovariances of `spec` at `lags`.
pub fn target_autocov(
    spec: &SpectralDensitySpec,
    grid: &Grid,
    lags: &[usize],
    target: Target,
    truncation: usize,
) -> Result<AutocovSet> {
    let lags = normalized_lags(lags);
    let matrices = match target {
        Target::FiniteT { t } => {
            let prepared = spec.prepare(grid, truncation)?;
            lags.iter()
                .map(|&h| Ok(finite_t_target_prepared(&prepared, h as i64, t)?.values))
                .collect::<Result<Vec<_>>>()?
        }
        Target::Stationary { n_freq } => lags
            .iter()
            .map(|&h| Ok(true_autocovariance(spec, h as i64, grid, n_freq, truncation)?.values))
            .collect::<Result<Vec<_>>>()?,
    };
    AutocovSet::new(lags, matrices, grid.clone())
}

/// Average empirical autocovariance over `replicates` independent samples.
/// Replicate `i` uses seed `derive_seed(config.seed, i)`.
pub fn monte_carlo_autocov(
    spec: &SpectralDensitySpec,
    config: &SimConfig,
    grid: &Grid,
    replicates: usize,
    lags: &[usize],
) -> Result<AutocovSet> {
    if replicates == 0 {
        return invalid("at least one replicate is required");
    }
    let sim = Simulator::new(spec, config, grid)?;
    let sets = (0..replicates as u64)
        .into_par_iter()
        .map(|i| empirical_autocov(&sim.run_seed(derive_seed(config.seed, i))?, lags))
        .collect::<Result<Vec<_>>>()?;
    average_autocov(&sets)
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: Method,
    pub t: usize,
    pub m: usize,
    pub n: usize,
    /// Median wall time of one full simulation.
    pub seconds: f64,
    pub replicates: usize,
}

/// Median wall time of `simulate` for every `(method, T, M)` cell, after one
/// untimed warm-up run.
///
/// Runs are serialized; parallelism inside a run follows the ambient rayon pool.
pub fn run_benchmark(
    spec: &SpectralDensitySpec,
    methods: &[Method],
    ts: &[usize],
    ms: &[usize],
    truncation: usize,
    replicates: usize,
) -> Result<Vec<BenchRecord>> {
    if replicates == 0 {
        return invalid("at least one benchmark repeat is required");
    }
    for (name, list) in [("T", ts), ("M", ms)] {
        if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("{name} values must be nonempty and strictly ascending"));
        }
    }
    let mut records = Vec::new();
    for &method in methods {
        for &m in ms {
            let grid = crate::grid::make_grid(m)?;
            for &t in ts {
                let config = SimConfig::new(t, m, truncation, 0, method);
                // Untimed warm-up; also rejects incompatible combinations.
                std::hint::black_box(Simulator::new(spec, &config, &grid)?.run()?);
                let mut times: Vec<f64> = (0..replicates as u64)
                    .map(|rep| {
                        let start = Instant::now();
                        let sample = Simulator::new(spec, &config, &grid)?.run_seed(derive_seed(rep, t as u64))?;
                        let elapsed = start.elapsed().as_secs_f64();
                        std::hint::black_box(sample);
                        Ok(elapsed.max(f64::MIN_POSITIVE))
                    })
                    .collect::<Result<_>>()?;
                records.push(BenchRecord {
                    method,
                    t,
                    m,
                    n: truncation,
                    seconds: median(&mut times),
                    replicates,
                });
            }
        }
    }
    Ok(records)
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::spectra::builtin;

    fn sample_from(values: DMatrix<f64>) -> FtsSample {
        let m = values.ncols();
        FtsSample {
            grid: make_grid(m).unwrap(),
            config: SimConfig::new(values.nrows(), m, 1, 0, Method::Ckl),
            values,
            imag_residual: 0.0,
        }
    }

    #[test]
    fn constant_sample_autocov() {
        let v = [1.0, -2.0, 0.5];
        let t = 8;
        let sample = sample_from(DMatrix::from_fn(t, 3, |_, j| v[j]));
        let set = empirical_autocov(&sample, &[3, 0]).unwrap();
        assert_eq!(set.lags, vec![0, 3]);
        for (k, &h) in set.lags.iter().enumerate() {
            let factor = (t - h) as f64 / t as f64;
            for i in 0..3 {
                for j in 0..3 {
                    assert!((set.matrices[k][(i, j)] - factor * v[i] * v[j]).abs() < 1e-15);
                }
            }
        }
        assert!(empirical_autocov(&sample, &[8]).is_err());
    }

    #[test]
    fn zero_sample_and_averaging() {
        let zero = empirical_autocov(&sample_from(DMatrix::zeros(5, 2)), &[0, 1]).unwrap();
        assert!(zero.matrices.iter().all(|m| m.amax() == 0.0));
        let a = empirical_autocov(&sample_from(DMatrix::from_fn(6, 2, |t, j| (t + j) as f64)), &[0, 2]).unwrap();
        assert_eq!(average_autocov(std::slice::from_ref(&a)).unwrap(), a);
        let mut neg = a.clone();
        for m in &mut neg.matrices {
            *m *= -1.0;
        }
        let avg = average_autocov(&[a.clone(), neg]).unwrap();
        assert!(avg.matrices.iter().all(|m| m.amax() == 0.0));
        let other = empirical_autocov(&sample_from(DMatrix::zeros(6, 2)), &[0]).unwrap();
        assert!(average_autocov(&[a, other]).is_err());
        assert!(average_autocov(&[]).is_err());
    }

    #[test]
    fn relative_error_scaling() {
        let grid = make_grid(5).unwrap();
        let r0 = DMatrix::from_fn(5, 5, |i, j| (1 + i.min(j)) as f64);
        let r1 = DMatrix::from_fn(5, 5, |i, j| 0.1 * (i + j) as f64);
        let truth = AutocovSet::new(vec![0, 1], vec![r0.clone(), r1.clone()], grid.clone()).unwrap();
        assert_eq!(relative_error(&truth, &truth).unwrap(), vec![0.0, 0.0]);
        let doubled = AutocovSet::new(vec![0], vec![r0 * 2.0], grid.clone()).unwrap();
        assert!((relative_error(&doubled, &truth).unwrap()[0] - 1.0).abs() < 1e-12);
        let zero = AutocovSet::new(vec![0], vec![DMatrix::zeros(5, 5)], grid).unwrap();
        assert!(relative_error(&zero, &zero).is_err());
    }

    #[test]
    fn white_noise_lag_one_is_small() {
        let grid = make_grid(11).unwrap();
        let spec = builtin::white_noise();
        let config = SimConfig::new(10_000, 11, 30, 8, Method::FarfimaSpectral);
        let sample = crate::spectral::simulate(&spec, &config, &grid).unwrap();
        let set = empirical_autocov(&sample, &[0, 1]).unwrap();
        let ratio = trace_norm(&set.matrices[1], &grid).unwrap() / trace_norm(&set.matrices[0], &grid).unwrap();
        assert!(ratio < 0.05, "{ratio}");
    }

    #[test]
    fn benchmark_single_cell() {
        let spec = builtin::example1_ckl();
        let records = run_benchmark(&spec, &[Method::Ckl], &[16], &[5], 4, 3).unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].seconds > 0.0);
        assert!(run_benchmark(&spec, &[Method::Temporal], &[16], &[5], 4, 1).is_err());
        assert!(run_benchmark(&spec, &[Method::Ckl], &[32, 16], &[5], 4, 1).is_err());
    }

    #[test]
    fn median_of_values() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
