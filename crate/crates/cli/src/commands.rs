//! Execution of a resolved manifest.

use std::fs::{self, File};
use std::path::Path;

use log::info;
use specsim::validate::{monte_carlo_autocov, relative_error, run_benchmark, target_autocov, Target};
use specsim::spectra::builtin;
use specsim::{make_grid, simulate, CovarianceSpec, FtsSample, Method, SimConfig, SpectralDensitySpec};

use crate::manifest::{CommandKind, RunManifest, TargetChoice};
use crate::methods::{resolve_spec, MethodChoice};

pub type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

/// Frequency nodes used for the stationary target.
const STATIONARY_NODES: usize = 4096;

/// Series terms kept when a stationary target is built from a Mercer or
/// eigen series.
const TRUTH_MODES: usize = 200;

/// Numbers are written with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn config_for(manifest: &RunManifest, choice: &MethodChoice, t: usize, m: usize, n: usize) -> SimConfig {
    let config = SimConfig::new(t, m, n, manifest.seed, choice.method).with_oversample(manifest.oversample);
    match manifest.burnin {
        Some(b) => config.with_burnin(b),
        None => config,
    }
}

pub fn run(manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(&manifest.out)?;
    match manifest.command {
        CommandKind::Simulate => run_simulate(manifest)?,
        CommandKind::Validate => run_validate(manifest, None)?,
        CommandKind::Bench => run_bench(manifest, manifest.replicates)?,
        CommandKind::Demo => {
            let sweep = (manifest.spec.example() == Some("example1")).then_some(&[1usize, 3, 10, 50][..]);
            run_validate(manifest, sweep)?;
            run_bench(manifest, manifest.repeats)?;
        }
    }
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    fs::write(manifest.out.join("manifest.json"), json)?;
    Ok(())
}

pub fn write_sample(sample: &FtsSample, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(sample.grid.points().iter().map(|&x| fmt_f64(x)))?;
    for row in sample.values.row_iter() {
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

fn run_simulate(manifest: &RunManifest) -> Result<()> {
    let choice = &manifest.methods[0];
    let spec = resolve_spec(&manifest.spec, choice)?;
    let (t, m) = (manifest.t[0], manifest.m[0]);
    let grid = make_grid(m)?;
    let sample = simulate(&spec, &config_for(manifest, choice, t, m, manifest.n), &grid)?;
    info!("simulated T={t} M={m} with {} (imaginary residual {:.1e})", choice.label, sample.imag_residual);
    write_sample(&sample, &manifest.out.join("sample.csv"))
}

/// Spec and truncation for the exact target. The finite-T target uses the
/// simulated truncation; the stationary one is made independent of `N`.
fn truth_spec(
    manifest: &RunManifest,
    spec: SpectralDensitySpec,
    target: Target,
    n: usize,
    m: usize,
) -> (SpectralDensitySpec, usize) {
    if let Target::FiniteT { .. } = target {
        return (spec, n);
    }
    if manifest.spec.example() == Some("example1") {
        return (builtin::example1_kernel(), 1);
    }
    let closed_form = |c: &CovarianceSpec| matches!(c, CovarianceSpec::ClosedFormKernel(_));
    let numeric = match &spec {
        SpectralDensitySpec::Eigen(_) => false,
        SpectralDensitySpec::Kernel(_) => true,
        SpectralDensitySpec::Filter(f) => closed_form(&f.noise),
        SpectralDensitySpec::Farfima(f) => closed_form(&f.noise),
    };
    (spec, if numeric { m } else { TRUTH_MODES.max(n) })
}

fn target_for(choice: TargetChoice, method: Method, t: usize) -> Target {
    let time_domain = matches!(method, Method::FarfimaHybrid | Method::Temporal);
    match choice {
        TargetChoice::Finite => Target::FiniteT { t },
        TargetChoice::Stationary => Target::Stationary { n_freq: STATIONARY_NODES },
        TargetChoice::Auto if time_domain => Target::Stationary { n_freq: STATIONARY_NODES },
        TargetChoice::Auto => Target::FiniteT { t },
    }
}

/// Writes accuracy.csv. With `truncations`, every method is run at each of them
/// and labelled `<method>-N<n>`.
fn run_validate(manifest: &RunManifest, truncations: Option<&[usize]>) -> Result<()> {
    let (t, m) = (manifest.t[0], manifest.m[0]);
    let grid = make_grid(m)?;
    let mut w = writer(&manifest.out, "accuracy.csv")?;
    w.write_record(["h", "rel_error", "method"])?;
    let truncations = truncations.map_or_else(|| vec![(manifest.n, None)], |ns| ns.iter().map(|&n| (n, Some(n))).collect());
    for choice in &manifest.methods {
        let spec = resolve_spec(&manifest.spec, choice)?;
        for &(n, tag) in &truncations {
            let label = tag.map_or_else(|| choice.label.clone(), |n| format!("{}-N{n}", choice.label));
            let config = config_for(manifest, choice, t, m, n);
            let avg = monte_carlo_autocov(&spec, &config, &grid, manifest.replicates, &manifest.lags)?;
            let target = target_for(manifest.target, choice.method, t * manifest.oversample);
            let (truth_spec, truth_n) = truth_spec(manifest, spec.clone(), target, n, m);
            let truth = target_autocov(&truth_spec, &grid, &manifest.lags, target, truth_n)?;
            let errors = relative_error(&avg, &truth)?;
            info!("{label}: rel.error(0) = {:.4}", errors[0]);
            for (h, e) in manifest.lags.iter().zip(errors) {
                w.write_record([h.to_string(), fmt_f64(e), label.clone()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn run_bench(manifest: &RunManifest, repeats: usize) -> Result<()> {
    let mut w = writer(&manifest.out, "bench.csv")?;
    w.write_record(["method", "T", "M", "N", "seconds"])?;
    for choice in &manifest.methods {
        let spec = resolve_spec(&manifest.spec, choice)?;
        let records = run_benchmark(&spec, &[choice.method], &manifest.t, &manifest.m, manifest.n, repeats)?;
        for r in records {
            info!("{} T={} M={}: {:.4}s", choice.label, r.t, r.m, r.seconds);
            w.write_record([
                choice.label.clone(),
                r.t.to_string(),
                r.m.to_string(),
                r.n.to_string(),
                fmt_f64(r.seconds),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
