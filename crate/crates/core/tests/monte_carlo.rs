use nalgebra::DMatrix;
use rayon::prelude::*;
use specsim::grid::real_operator_norms;
use specsim::rng::{derive_seed, Domain, GaussianStream};
use specsim::spectra::builtin;
use specsim::spectra::{ArOperator, CovarianceSpec, FarfimaSpec};
use specsim::spectral::Simulator;
use specsim::temporal::simulate_noise;
use specsim::validate::{
    average_autocov, empirical_autocov, monte_carlo_autocov, relative_error, target_autocov, AutocovSet, Target,
};
use specsim::{make_grid, FtsSample, Grid, Method, SimConfig, SpectralDensitySpec};

fn hs(values: &DMatrix<f64>, grid: &Grid) -> f64 {
    real_operator_norms(values, grid).unwrap().hs_norm
}

#[test]
fn noise_rows_have_brownian_covariance() {
    let grid = make_grid(31).unwrap();
    let mut stream = GaussianStream::for_domain(5, Domain::Noise, 0);
    let rows = simulate_noise(&CovarianceSpec::brownian_motion_mercer(), 10_000, &grid, 100, &mut stream).unwrap();
    let emp = rows.transpose() * &rows / 10_000.0;
    let pts = grid.points();
    let exact = DMatrix::from_fn(31, 31, |i, j| pts[i].min(pts[j]));
    let rel = hs(&(emp - &exact), &grid) / hs(&exact, &grid);
    assert!(rel < 0.05, "{rel}");
}

#[test]
fn example1_accuracy_at_desk_scale() {
    let grid = make_grid(21).unwrap();
    let spec = builtin::example1_ckl();
    let config = SimConfig::new(128, 21, 50, 17, Method::Ckl);
    let lags = [0, 1, 2, 3, 5, 10];
    let avg = monte_carlo_autocov(&spec, &config, &grid, 200, &lags).unwrap();
    let truth = target_autocov(&spec, &grid, &lags, Target::FiniteT { t: 128 }, 50).unwrap();
    for (h, e) in lags.iter().zip(relative_error(&avg, &truth).unwrap()) {
        assert!(e <= 0.1, "lag {h}: {e}");
    }
}

/// Mean lag-0 error over several independent batches of `reps` replicates.
fn mean_error(spec: &SpectralDensitySpec, grid: &Grid, truth: &AutocovSet, reps: usize, batches: u64) -> f64 {
    (0..batches)
        .map(|b| {
            let config = SimConfig::new(32, grid.len(), 20, derive_seed(99, b), Method::Ckl);
            let avg = monte_carlo_autocov(spec, &config, grid, reps, &[0]).unwrap();
            relative_error(&avg, truth).unwrap()[0]
        })
        .sum::<f64>()
        / batches as f64
}

#[test]
fn averaging_error_scales_like_inverse_root() {
    let grid = make_grid(15).unwrap();
    let spec = builtin::example1_ckl();
    let truth = target_autocov(&spec, &grid, &[0], Target::FiniteT { t: 32 }, 20).unwrap();
    let errors: Vec<f64> = [10, 40, 160].iter().map(|&i| mean_error(&spec, &grid, &truth, i, 12)).collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.6..=2.6).contains(&ratio), "{errors:?}");
    }
}

fn window(sample: &FtsSample, start: usize, len: usize) -> FtsSample {
    FtsSample {
        values: sample.values.rows(start, len).into_owned(),
        ..sample.clone()
    }
}

#[test]
fn oversampled_halves_are_stationary() {
    let grid = make_grid(15).unwrap();
    let spec = builtin::example1_ckl();
    let config = SimConfig::new(64, 15, 20, 3, Method::Ckl).with_oversample(2);
    let sim = Simulator::new(&spec, &config, &grid).unwrap();
    let (first, second): (Vec<_>, Vec<_>) = (0..400u64)
        .into_par_iter()
        .map(|i| {
            let s = sim.run_seed(derive_seed(3, i)).unwrap();
            assert_eq!(s.len(), 64);
            (
                empirical_autocov(&window(&s, 0, 32), &[0]).unwrap(),
                empirical_autocov(&window(&s, 32, 32), &[0]).unwrap(),
            )
        })
        .unzip();
    let a = average_autocov(&first).unwrap();
    let b = average_autocov(&second).unwrap();
    let truth = target_autocov(&spec, &grid, &[0], Target::FiniteT { t: 128 }, 20).unwrap();
    let band = relative_error(&a, &truth).unwrap()[0].max(relative_error(&b, &truth).unwrap()[0]);
    let diff = relative_error(&a, &b).unwrap()[0] * real_operator_norms(&b.matrices[0], &grid).unwrap().trace_norm
        / real_operator_norms(&truth.matrices[0], &grid).unwrap().trace_norm;
    assert!(diff <= 2.0 * band, "diff {diff}, band {band}");
}

#[test]
fn burnin_reduces_start_up_bias() {
    let grid = make_grid(11).unwrap();
    let spec = SpectralDensitySpec::Farfima(
        FarfimaSpec::new(
            0.0,
            vec![ArOperator::kernel(|_, _| 0.95)],
            vec![],
            CovarianceSpec::brownian_motion_mercer(),
        )
        .unwrap(),
    );
    // The recursion targets the stationary covariance, not the periodic one.
    let truth = target_autocov(&spec, &grid, &[0], Target::Stationary { n_freq: 1 << 14 }, 10).unwrap();
    let errors: Vec<f64> = [0, 50, 200]
        .iter()
        .map(|&b| {
            let config = SimConfig::new(32, 11, 10, 8, Method::FarfimaHybrid).with_burnin(b);
            let avg = monte_carlo_autocov(&spec, &config, &grid, 2000, &[0]).unwrap();
            relative_error(&avg, &truth).unwrap()[0]
        })
        .collect();
    assert!(errors[0] > 2.0 * errors[1], "{errors:?}");
    assert!(errors[2] <= errors[1] + 0.02, "{errors:?}");
}

#[test]
fn cross_method_lag_one_agreement() {
    let grid = make_grid(21).unwrap();
    let spec = builtin::example3_farma();
    let run = |method| {
        let config = SimConfig::new(64, 21, 10, 21, method);
        monte_carlo_autocov(&spec, &config, &grid, 300, &[0, 1]).unwrap()
    };
    let spectral = run(Method::FarfimaSpectral);
    let temporal = run(Method::Temporal);
    let errors = relative_error(&temporal, &spectral).unwrap();
    assert!(errors.iter().all(|&e| e < 0.1), "{errors:?}");
}
