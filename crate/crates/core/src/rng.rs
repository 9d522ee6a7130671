//! Keyed Gaussian streams.
//!
//! Every stream is addressed by `(seed, stream id)`: the seed keys a ChaCha8
//! cipher and the stream id selects the cipher's stream. Variate `n` of a
//! stream therefore never depends on how many variates other streams drew or
//! on which thread drew them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DOMAIN_SHIFT: u32 = 56;

/// Purpose of a stream; keeps unrelated draws on disjoint stream ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    /// Real part `Z'_k` of a frequency atom.
    AtomReal = 1,
    /// Independent copy `Z''_k`.
    AtomImag = 2,
    /// Time-domain innovations `ε_t`.
    Noise = 3,
    /// Subsample offset after oversampling.
    Offset = 4,
    /// Free-form test and benchmark streams.
    Aux = 5,
}

/// Stream id for `(domain, index)`.
pub fn stream_id(domain: Domain, index: u64) -> u64 {
    debug_assert!(index < 1 << DOMAIN_SHIFT);
    ((domain as u64) << DOMAIN_SHIFT) | index
}

/// Sequence of standard normal variates keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, seed, stream }
    }

    pub fn for_domain(seed: u64, domain: Domain, index: u64) -> Self {
        Self::new(seed, stream_id(domain, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Next standard normal variate.
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next();
        }
    }

    /// Uniform integer in `0..bound`.
    pub fn uniform_index(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        self.rng.random_range(0..bound)
    }
}

/// Independent seed for replicate `index` of a Monte-Carlo study.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_variates() {
        let mut a = GaussianStream::for_domain(7, Domain::AtomReal, 3);
        let mut b = GaussianStream::for_domain(7, Domain::AtomReal, 3);
        for _ in 0..100 {
            assert_eq!(a.next().to_bits(), b.next().to_bits());
        }
    }

    #[test]
    fn streams_do_not_interact() {
        let mut a = GaussianStream::new(11, 42);
        let draws: Vec<f64> = (0..50).map(|_| a.next()).collect();
        let mut other = GaussianStream::new(11, 43);
        let mut b = GaussianStream::new(11, 42);
        for d in draws {
            other.next();
            assert_eq!(b.next().to_bits(), d.to_bits());
        }
    }

    #[test]
    fn streams_and_seeds_differ() {
        let a = GaussianStream::for_domain(1, Domain::AtomReal, 0).next();
        let b = GaussianStream::for_domain(1, Domain::AtomImag, 0).next();
        let c = GaussianStream::for_domain(2, Domain::AtomReal, 0).next();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn moments_are_standard_normal() {
        let mut s = GaussianStream::new(2024, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.next()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let kurt = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64 / var.powi(2);
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.015, "{var}");
        assert!((kurt - 3.0).abs() < 0.06, "{kurt}");
    }

    #[test]
    fn uniform_index_in_range() {
        let mut s = GaussianStream::new(3, 9);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[s.uniform_index(5)] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }
}
