use statrs::function::gamma::gamma;

/// `Γ(k + d) / (Γ(d) k!)` from the gamma function for small `k` and a Stirling
/// expansion of `ln Γ(k + d) - ln Γ(k + 1)` for large `k`.
pub fn gamma_ratio_coefficient(d: f64, k: usize) -> f64 {
    if k <= 150 {
        return gamma(k as f64 + d) / (gamma(d) * gamma(k as f64 + 1.0));
    }
    let z1 = k as f64 + d;
    let z2 = k as f64 + 1.0;
    let delta = d - 1.0;
    let series = |z: f64| {
        let z2i = 1.0 / (z * z);
        (1.0 / 12.0 - z2i * (1.0 / 360.0 - z2i * (1.0 / 1260.0 - z2i / 1680.0))) / z
    };
    let log_ratio = (z2 - 0.5) * (delta / z2).ln_1p() + delta * z1.ln() - delta + series(z1) - series(z2);
    log_ratio.exp() / gamma(d)
}
