//! Seeded random streams.
//!
//! A stream is identified by `(master_seed, stream_index)`. The generator is
//! ChaCha8 keyed by the master seed with the stream index as the ChaCha
//! stream id, so distinct indices give non-overlapping sequences and any
//! worker can open its stream without coordinating with the others.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Fills `out` with i.i.d. N(0, std^2) draws.
    pub fn fill_gaussian(&mut self, out: &mut [f64], std: f64) {
        for v in out.iter_mut() {
            *v = std * self.standard_normal();
        }
    }

    /// Draw from Gamma(shape, rate), i.e. density proportional to x^(shape-1) e^(-rate x).
    pub fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::param(format!(
                "gamma parameters must be positive and finite, got shape={shape}, rate={rate}"
            )));
        }
        let dist = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::param(format!("gamma distribution: {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `n` i.i.d. draws from N(0, std^2).
pub fn gaussian_vector(stream: &mut RngStream, n: usize, std: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("gaussian vector length must be positive"));
    }
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::param(format!(
            "gaussian std must be positive, got {std}"
        )));
    }
    let mut out = vec![0.0; n];
    stream.fill_gaussian(&mut out, std);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

    #[test]
    fn deterministic_per_stream() {
        let a = gaussian_vector(&mut RngStream::new(42, 0), 5, 1.0).unwrap();
        let b = gaussian_vector(&mut RngStream::new(42, 0), 5, 1.0).unwrap();
        let c = gaussian_vector(&mut RngStream::new(42, 1), 5, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = RngStream::new(1, 0);
        assert!(gaussian_vector(&mut s, 0, 1.0).is_err());
        assert!(gaussian_vector(&mut s, 3, 0.0).is_err());
        assert!(gaussian_vector(&mut s, 3, -1.0).is_err());
        assert!(s.gamma(0.0, 1.0).is_err());
    }

    #[test]
    fn moments_over_a_million_draws() {
        let n = 1_000_000;
        let std = 2.0;
        let v = gaussian_vector(&mut RngStream::new(7, 3), n, std).unwrap();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 5.0 * std / 1e3, "mean {mean}");
        assert!((var - 4.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn chi_square_goodness_of_fit() {
        let n = 100_000;
        let bins = 20;
        let v = gaussian_vector(&mut RngStream::new(11, 0), n, 1.0).unwrap();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut counts = vec![0usize; bins];
        for x in v {
            let b = ((normal.cdf(x) * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let expected = n as f64 / bins as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let critical = ChiSquared::new((bins - 1) as f64)
            .unwrap()
            .inverse_cdf(1.0 - 0.001);
        assert!(stat < critical, "chi2 {stat} >= {critical}");
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 100_000;
        let a = gaussian_vector(&mut RngStream::new(5, 0), n, 1.0).unwrap();
        let b = gaussian_vector(&mut RngStream::new(5, 1), n, 1.0).unwrap();
        let corr = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / n as f64;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt());
    }
}
