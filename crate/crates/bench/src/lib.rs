//! Benchmark fixtures shared by the criterion suites.

use specsim::spectra::builtin::{self, NoiseForm};
use specsim::{Method, SpectralDensitySpec};

/// A named spec/method pair.
pub struct Case {
    pub name: &'static str,
    pub spec: SpectralDensitySpec,
    pub method: Method,
}

pub fn cases() -> Vec<Case> {
    vec![
        Case {
            name: "ckl/example1",
            spec: builtin::example1_ckl(),
            method: Method::Ckl,
        },
        Case {
            name: "farfima-spectral/example2",
            spec: builtin::example2_farfima(NoiseForm::Mercer),
            method: Method::FarfimaSpectral,
        },
        Case {
            name: "farfima-hybrid/example2",
            spec: builtin::example2_farfima(NoiseForm::Mercer),
            method: Method::FarfimaHybrid,
        },
        Case {
            name: "temporal/example2",
            spec: builtin::example2_farfima(NoiseForm::Mercer),
            method: Method::Temporal,
        },
        Case {
            name: "farfima-spectral/example3",
            spec: builtin::example3_farma(),
            method: Method::FarfimaSpectral,
        },
    ]
}
