//! Sample autocorrelation of scalar projections of a chain.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::chain::SampleChain;
use crate::error::{Error, Result};

/// Two-sided 99% standard-normal quantile.
pub const Z_99: f64 = 2.576;

#[derive(Debug, Clone, PartialEq)]
pub struct AcfCurve {
    pub label: String,
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    /// Half-width of the 99% white-noise band, `2.576 / sqrt(N)`.
    pub band: f64,
}

impl AcfCurve {
    pub fn value_at(&self, lag: usize) -> f64 {
        self.values[lag]
    }

    /// Lags in `from..=to` where `|acf| > band`.
    pub fn excursions(&self, from: usize, to: usize) -> Vec<usize> {
        (from..=to.min(self.values.len() - 1))
            .filter(|&k| self.values[k].abs() > self.band)
            .collect()
    }
}

/// Biased-normalized sample ACF `c_k / c_0` for lags `0..=max_lag`.
///
/// A constant series has no defined correlation; it is reported as white
/// (1 at lag 0, 0 elsewhere).
pub fn acf_series(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 10 * max_lag.max(1) {
        return Err(Error::param(format!(
            "ACF up to lag {max_lag} needs at least {} samples, got {n}",
            10 * max_lag.max(1)
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    let mut out = vec![0.0; max_lag + 1];
    out[0] = 1.0;
    if c0 == 0.0 {
        return Ok(out);
    }
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let ck: f64 = centered[..n - k]
            .iter()
            .zip(&centered[k..])
            .map(|(a, b)| a * b)
            .sum();
        *slot = ck / c0;
    }
    Ok(out)
}

pub fn acf_curve(label: impl Into<String>, series: &[f64], max_lag: usize) -> Result<AcfCurve> {
    let values = acf_series(series, max_lag)?;
    Ok(AcfCurve {
        label: label.into(),
        lags: (0..=max_lag).collect(),
        values,
        band: Z_99 / (series.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Fourier,
    Pixel,
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fourier" => Ok(Basis::Fourier),
            "pixel" => Ok(Basis::Pixel),
            other => Err(Error::Config(format!("unknown ACF basis '{other}'"))),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Fourier => "fourier",
            Basis::Pixel => "pixel",
        })
    }
}

#[derive(Debug, Clone)]
enum Direction {
    Pixel(usize),
    Weights(Vec<f64>),
}

/// A set of labeled linear functionals applied to every chain state.
#[derive(Debug, Clone)]
pub struct Projector {
    labels: Vec<String>,
    directions: Vec<Direction>,
    dim: usize,
}

impl Projector {
    /// Real and imaginary parts of the DC mode plus the `count` nonzero
    /// modes with the smallest `|eigenvalue|` (one per conjugate pair).
    ///
    /// Without eigenvalues the lowest spatial frequencies are used instead.
    pub fn fourier(
        height: usize,
        width: usize,
        eigenvalues: Option<&[Complex64]>,
        count: usize,
    ) -> Result<Self> {
        let d = height * width;
        if let Some(e) = eigenvalues {
            crate::error::check_dim("Fourier eigenvalues", d, e.len())?;
        }
        let lap = crate::regularizers::GradientOperator::new(height, width).laplacian_symbol();
        let key = |i: usize| match eigenvalues {
            Some(e) => e[i].norm(),
            None => lap[i],
        };
        let max_key = (0..d).map(key).fold(0.0, f64::max);
        let conj = |i: usize| {
            let (r, c) = (i / width, i % width);
            ((height - r) % height) * width + (width - c) % width
        };
        let mut modes: Vec<usize> = (1..d)
            .filter(|&i| i <= conj(i))
            .filter(|&i| eigenvalues.is_none() || key(i) > 1e-12 * max_key)
            .collect();
        modes.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        modes.truncate(count);

        let mut labels = Vec::new();
        let mut directions = Vec::new();
        for i in std::iter::once(0).chain(modes) {
            let (kr, kc) = (i / width, i % width);
            let phase = |r: usize, c: usize| {
                2.0 * PI * ((kr * r) as f64 / height as f64 + (kc * c) as f64 / width as f64)
            };
            let mut re = vec![0.0; d];
            let mut im = vec![0.0; d];
            for r in 0..height {
                for c in 0..width {
                    let p = phase(r, c);
                    re[r * width + c] = p.cos();
                    im[r * width + c] = -p.sin();
                }
            }
            labels.push(format!("fourier({kr},{kc}).re"));
            directions.push(Direction::Weights(re));
            if conj(i) != i {
                labels.push(format!("fourier({kr},{kc}).im"));
                directions.push(Direction::Weights(im));
            }
        }
        Ok(Self {
            labels,
            directions,
            dim: d,
        })
    }

    /// `count` pixels, spread evenly over the unobserved pixels first and
    /// then over the observed ones.
    pub fn pixel(height: usize, width: usize, unobserved: &[usize], count: usize) -> Result<Self> {
        let d = height * width;
        if let Some(&bad) = unobserved.iter().find(|&&i| i >= d) {
            return Err(Error::param(format!("pixel index {bad} outside a {height}x{width} image")));
        }
        let mut hidden = vec![false; d];
        unobserved.iter().for_each(|&i| hidden[i] = true);
        let observed: Vec<usize> = (0..d).filter(|&i| !hidden[i]).collect();
        let spread = |pool: &[usize], k: usize| -> Vec<usize> {
            let k = k.min(pool.len());
            (0..k).map(|j| pool[(2 * j + 1) * pool.len() / (2 * k)]).collect()
        };
        let mut hidden_sorted: Vec<usize> = unobserved.to_vec();
        hidden_sorted.sort_unstable();
        hidden_sorted.dedup();
        let mut picks = spread(&hidden_sorted, count);
        picks.extend(spread(&observed, count - picks.len()));
        Ok(Self {
            labels: picks
                .iter()
                .map(|&i| format!("pixel({},{})", i / width, i % width))
                .collect(),
            directions: picks.into_iter().map(Direction::Pixel).collect(),
            dim: d,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "projector dimension mismatch");
        self.directions
            .iter()
            .map(|dir| match dir {
                Direction::Pixel(i) => x[*i],
                Direction::Weights(w) => w.iter().zip(x).map(|(a, b)| a * b).sum(),
            })
            .collect()
    }
}

/// Accumulates projections of a stream of states, e.g. every MYULA
/// iteration, and turns them into ACF curves at the end.
#[derive(Debug, Clone)]
pub struct AcfRecorder {
    projector: Projector,
    series: Vec<Vec<f64>>,
}

impl AcfRecorder {
    pub fn new(projector: Projector) -> Self {
        let series = vec![Vec::new(); projector.len()];
        Self { projector, series }
    }

    pub fn record(&mut self, x: &[f64]) {
        for (s, v) in self.series.iter_mut().zip(self.projector.project(x)) {
            s.push(v);
        }
    }

    pub fn series(&self) -> &[Vec<f64>] {
        &self.series
    }

    pub fn curves(&self, max_lag: usize) -> Result<Vec<AcfCurve>> {
        self.projector
            .labels()
            .iter()
            .zip(&self.series)
            .map(|(l, s)| acf_curve(l.clone(), s, max_lag))
            .collect()
    }
}

/// ACF curves of every projector direction over the stored chain.
pub fn acf(chain: &SampleChain, projector: &Projector, max_lag: usize) -> Result<Vec<AcfCurve>> {
    if chain.len() < 10 * max_lag.max(1) {
        return Err(Error::param(format!(
            "chain of {} samples is too short for ACF up to lag {max_lag}",
            chain.len()
        )));
    }
    let mut rec = AcfRecorder::new(projector.clone());
    for s in chain.samples() {
        rec.record(s.data());
    }
    rec.curves(max_lag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainMeta;
    use crate::image::Image;
    use crate::rng::RngStream;

    #[test]
    fn lag_zero_is_one_and_white_noise_is_calibrated() {
        let mut s = RngStream::new(1, 0);
        let x: Vec<f64> = (0..20_000).map(|_| s.standard_normal()).collect();
        let c = acf_curve("w", &x, 100).unwrap();
        assert_eq!(c.value_at(0), 1.0);
        let out = c.excursions(1, 100).len();
        assert!(out <= 5, "{out} excursions of 100");
    }

    #[test]
    fn ar1_lag_one() {
        let mut s = RngStream::new(2, 0);
        let mut x = vec![0.0; 100_000];
        for t in 1..x.len() {
            x[t] = 0.9 * x[t - 1] + s.standard_normal();
        }
        let a = acf_series(&x, 10).unwrap();
        assert!((a[1] - 0.9).abs() < 0.02, "{}", a[1]);
    }

    #[test]
    fn order_sensitive_and_length_checked() {
        let mut x: Vec<f64> = (0..200).map(|i| (i as f64 / 10.0).sin()).collect();
        let before = acf_series(&x, 5).unwrap();
        x.sort_by(f64::total_cmp);
        let after = acf_series(&x, 5).unwrap();
        assert_ne!(before, after);
        assert!(acf_series(&x, 21).is_err());
        assert_eq!(acf_series(&vec![3.0; 50], 5).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fourier_selection_prefers_small_eigenvalues() {
        let op =
            crate::ops::BlurOperator::new(crate::ops::Kernel::uniform(3).unwrap(), 6, 6).unwrap();
        let eigs = crate::ops::LinearOperator::fourier_eigenvalues(&op).unwrap();
        let p = Projector::fourier(6, 6, Some(eigs), 3).unwrap();
        assert_eq!(p.labels()[0], "fourier(0,0).re");
        // DC projection is the pixel sum
        let x = crate::image::phantom(6, 6);
        let proj = p.project(x.data());
        assert!((proj[0] - x.data().iter().sum::<f64>()).abs() < 1e-12);
        let max_pick = p
            .labels()
            .iter()
            .skip(1)
            .map(|l| {
                let inner = &l["fourier(".len()..l.find(')').unwrap()];
                let mut it = inner.split(',').map(|v| v.parse::<usize>().unwrap());
                let (r, c) = (it.next().unwrap(), it.next().unwrap());
                eigs[r * 6 + c].norm()
            })
            .fold(0.0, f64::max);
        let nonzero_rank = eigs.iter().filter(|e| e.norm() > 1e-12 && e.norm() < max_pick).count();
        assert!(nonzero_rank <= 6, "picked modes are not among the smallest");
    }

    #[test]
    fn pixel_selection_starts_with_unobserved() {
        let p = Projector::pixel(4, 4, &[3, 9, 12], 5).unwrap();
        assert_eq!(&p.labels()[..3], &["pixel(0,3)", "pixel(2,1)", "pixel(3,0)"]);
        assert_eq!(p.len(), 5);
        assert!(Projector::pixel(2, 2, &[4], 1).is_err());
    }

    #[test]
    fn chain_acf_requires_length() {
        let mut chain = SampleChain::new(2, 2, ChainMeta::new("test", 0));
        let mut s = RngStream::new(4, 0);
        for _ in 0..60 {
            chain.push(Image::new(2, 2, (0..4).map(|_| s.standard_normal()).collect()).unwrap(), &[]).unwrap();
        }
        let p = Projector::pixel(2, 2, &[], 4).unwrap();
        assert_eq!(acf(&chain, &p, 5).unwrap().len(), 4);
        assert!(acf(&chain, &p, 7).is_err());
    }
}
