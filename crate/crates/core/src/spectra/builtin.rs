//! Ready-made specifications used by the examples, tests and the command line.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use super::{ArOperator, CovarianceSpec, EigenSpec, FarfimaSpec, RealFn, RealKernelFn, SpectralDensitySpec};

/// How an innovation covariance is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseForm {
    /// Known decomposition (Mercer series or low-rank sum).
    Mercer,
    /// Closed-form kernel decomposed numerically on the grid.
    Kernel,
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "example1",
    "example1-kernel",
    "example2",
    "example2-kernel",
    "example3",
    "example3-kernel",
    "white-noise",
];

pub fn by_name(name: &str) -> Option<SpectralDensitySpec> {
    Some(match name {
        "example1" => example1_ckl(),
        "example1-kernel" => example1_kernel(),
        "example2" => example2_farfima(NoiseForm::Mercer),
        "example2-kernel" => example2_farfima(NoiseForm::Kernel),
        "example3" => example3_farma(),
        "example3-kernel" => example3_farma_with(NoiseForm::Kernel),
        "white-noise" => white_noise(),
        _ => return None,
    })
}

fn example1_shift(omega: f64) -> f64 {
    if omega <= PI {
        omega / PI
    } else {
        -omega / PI
    }
}

/// `δ_a(x) = (x - a) mod 1`.
fn wrap_shift(x: f64, a: f64) -> f64 {
    (x - a).rem_euclid(1.0)
}

fn example1_scale(omega: f64) -> f64 {
    1.0 / (1.0 - 0.9 * omega.cos())
}

/// Shifted Brownian bridge with an AR(1)-type spectral profile:
/// `λ_n(ω) = [(1 - 0.9 cos ω) π² n²]⁻¹`, `φ_n(ω)(x) = √2 sin(nπ δ_{a(ω)}(x))`.
pub fn example1_ckl() -> SpectralDensitySpec {
    SpectralDensitySpec::Eigen(EigenSpec::new(
        None,
        |n, omega| example1_scale(omega) / (PI * PI * (n * n) as f64),
        |n, omega, x| 2f64.sqrt() * (n as f64 * PI * wrap_shift(x, example1_shift(omega))).sin(),
    ))
}

/// The kernel `[min(u, v) - uv] / (1 - 0.9 cos ω)` with `u = δ_a(x)`, `v = δ_a(y)`;
/// the closed form of [`example1_ckl`].
pub fn example1_kernel() -> SpectralDensitySpec {
    SpectralDensitySpec::kernel(|omega, x, y| {
        let a = example1_shift(omega);
        let (u, v) = (wrap_shift(x, a), wrap_shift(y, a));
        Complex64::new((u.min(v) - u * v) * example1_scale(omega), 0.0)
    })
}

/// Autoregressive factor of [`example2_farfima`]: `A₁ = 0.34 g ⊗ g`, `g(x) = exp(x²/2)`.
pub const EXAMPLE2_AR_SCALE: f64 = 0.34;

pub fn example2_factor(x: f64) -> f64 {
    (0.5 * x * x).exp()
}

fn brownian(noise: NoiseForm) -> CovarianceSpec {
    match noise {
        NoiseForm::Mercer => CovarianceSpec::brownian_motion_mercer(),
        NoiseForm::Kernel => CovarianceSpec::brownian_motion_kernel(),
    }
}

/// FARFIMA(1, 0.2, 0) with rank-one AR operator and Brownian-motion innovations.
pub fn example2_farfima(noise: NoiseForm) -> SpectralDensitySpec {
    SpectralDensitySpec::Farfima(FarfimaSpec {
        d: 0.2,
        ar: vec![ArOperator::rank_one(EXAMPLE2_AR_SCALE, example2_factor)],
        ma: vec![],
        noise: brownian(noise),
    })
}

/// FARMA(4, 3) with trigonometric AR kernels, polynomial MA kernels and a
/// ten-term Fourier innovation covariance.
pub fn example3_farma() -> SpectralDensitySpec {
    example3_farma_with(NoiseForm::Mercer)
}

pub fn example3_farma_with(noise: NoiseForm) -> SpectralDensitySpec {
    let ar = vec![
        ArOperator::kernel(|x, y| 0.3 * (x - y).sin()),
        ArOperator::kernel(|x, y| 0.3 * (x - y).cos()),
        ArOperator::kernel(|x, _| 0.3 * (2.0 * x).sin()),
        ArOperator::kernel(|_, y| 0.3 * y.cos()),
    ];
    let ma: Vec<RealKernelFn> = vec![
        Arc::new(|x, y| x + y),
        Arc::new(|x, _| x),
        Arc::new(|_, y| y),
    ];
    SpectralDensitySpec::Farfima(FarfimaSpec {
        d: 0.0,
        ar,
        ma,
        noise: match noise {
            NoiseForm::Mercer => example3_noise(),
            NoiseForm::Kernel => {
                let low_rank = example3_noise();
                CovarianceSpec::kernel(move |x, y| low_rank.evaluate(x, y, 10))
            }
        },
    })
}

/// `Σ_r σ_r f_r ⊗ f_r` over `sin(2πjx)`, `cos(2πjx)`, `j = 1..5`.
pub fn example3_noise() -> CovarianceSpec {
    const SIGMA: [f64; 10] = [1.0, 0.6, 0.3, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05];
    let terms = SIGMA
        .iter()
        .enumerate()
        .map(|(r, &s)| {
            let freq = TAU * (r / 2 + 1) as f64;
            let f: RealFn = if r % 2 == 0 {
                Arc::new(move |x: f64| (freq * x).sin())
            } else {
                Arc::new(move |x: f64| (freq * x).cos())
            };
            (s, f)
        })
        .collect();
    CovarianceSpec::LowRankSum(terms)
}

/// Brownian-motion white noise: `F_ω = S / 2π` with `S = min(x, y)`.
pub fn white_noise() -> SpectralDensitySpec {
    SpectralDensitySpec::Farfima(FarfimaSpec {
        d: 0.0,
        ar: vec![],
        ma: vec![],
        noise: CovarianceSpec::brownian_motion_mercer(),
    })
}
