//! One-dimensional interval model `y = x + n`, `n ~ N(0, sigma^2)`,
//! `x` uniform on `[a, b]`: the exact truncated Gaussian posterior, its
//! Moreau-Yosida smoothed surrogate, and the RTO law, which puts point
//! masses on both endpoints.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::ops::{IdentityOperator, Observation};
use crate::regularizers::{Constraint, PriorSpec};
use crate::samplers::{rto_sample, RtoSettings};
use crate::solvers::AdmmSettings;

pub const QUADRATURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalModel {
    pub a: f64,
    pub b: f64,
    pub y: f64,
    pub sigma: f64,
}

impl Default for IntervalModel {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            y: 0.8,
            sigma: 1.0,
        }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

pub fn phi(z: f64) -> f64 {
    std_normal().pdf(z)
}

pub fn big_phi(z: f64) -> f64 {
    std_normal().cdf(z)
}

impl IntervalModel {
    pub fn new(a: f64, b: f64, y: f64, sigma: f64) -> Result<Self> {
        let m = Self { a, b, y, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::param(format!("need a < b, got [{}, {}]", self.a, self.b)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) || !self.y.is_finite() {
            return Err(Error::param("need finite y and positive sigma"));
        }
        Ok(())
    }

    /// Integration range `[a - 8 sigma, b + 8 sigma]`.
    pub fn support(&self) -> (f64, f64) {
        (self.a - 8.0 * self.sigma, self.b + 8.0 * self.sigma)
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.y) / self.sigma
    }

    fn dist_sq(&self, x: f64) -> f64 {
        let d = if x < self.a {
            self.a - x
        } else if x > self.b {
            x - self.b
        } else {
            0.0
        };
        d * d
    }
}

pub fn truncated_posterior_pdf(m: &IntervalModel, x: f64) -> f64 {
    if x < m.a || x > m.b {
        return 0.0;
    }
    let mass = big_phi(m.z(m.b)) - big_phi(m.z(m.a));
    phi(m.z(x)) / (m.sigma * mass)
}

/// Normalized surrogate `exp(-(x-y)^2/(2 sigma^2) - dist(x,[a,b])^2/(2 alpha))`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedPosterior {
    pub model: IntervalModel,
    pub alpha: f64,
    normalizer: f64,
}

impl SmoothedPosterior {
    pub fn new(model: IntervalModel, alpha: f64) -> Result<Self> {
        model.validate()?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be positive, got {alpha}")));
        }
        let mut s = Self {
            model,
            alpha,
            normalizer: 1.0,
        };
        let (lo, hi) = model.support();
        s.normalizer = integrate_split(|x| s.unnormalized(x), lo, hi, &[model.a, model.b]);
        Ok(s)
    }

    fn unnormalized(&self, x: f64) -> f64 {
        let z = self.model.z(x);
        (-0.5 * z * z - self.model.dist_sq(x) / (2.0 * self.alpha)).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.unnormalized(x) / self.normalizer
    }
}

pub fn smoothed_posterior_pdf(m: &IntervalModel, alpha: f64, x: f64) -> Result<f64> {
    Ok(SmoothedPosterior::new(*m, alpha)?.pdf(x))
}

/// Law of `clamp(y + z, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtoIntervalDensity {
    pub model: IntervalModel,
    pub atom_a: f64,
    pub atom_b: f64,
}

impl RtoIntervalDensity {
    /// Density of the absolutely continuous part on the open interval.
    pub fn continuous_pdf(&self, x: f64) -> f64 {
        let m = &self.model;
        if x <= m.a || x >= m.b {
            return 0.0;
        }
        phi(m.z(x)) / m.sigma
    }

    pub fn continuous_mass(&self) -> f64 {
        integrate_split(|x| self.continuous_pdf(x), self.model.a, self.model.b, &[])
    }

    /// Inverse-CDF draw from the continuous part given `u` in `(0, 1)`.
    pub fn continuous_quantile(&self, u: f64) -> f64 {
        let m = &self.model;
        let (lo, hi) = (big_phi(m.z(m.a)), big_phi(m.z(m.b)));
        m.y + m.sigma * std_normal().inverse_cdf(lo + u * (hi - lo))
    }
}

pub fn rto_interval_density(m: &IntervalModel) -> Result<RtoIntervalDensity> {
    m.validate()?;
    Ok(RtoIntervalDensity {
        model: *m,
        atom_a: big_phi(m.z(m.a)),
        atom_b: 1.0 - big_phi(m.z(m.b)),
    })
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    // split once up front so a narrow feature cannot hide between three nodes
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (fa, fm, fb, flm, frm) = (f(a), f(m), f(b), f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    rec(&f, a, m, fa, flm, fm, left, tol / 2.0, 50) + rec(&f, m, b, fm, frm, fb, right, tol / 2.0, 50)
}

fn integrate_split(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64]) -> f64 {
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
    pts.push(hi);
    pts.windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], QUADRATURE_TOL / (pts.len() - 1) as f64))
        .sum()
}

/// One row of the density table: `x` and the three densities at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub x: f64,
    pub truncated: f64,
    pub smoothed: f64,
    pub rto_continuous: f64,
}

pub fn density_grid(m: &IntervalModel, alpha: f64, points: usize) -> Result<Vec<DensityRow>> {
    if points < 2 {
        return Err(Error::param("density grid needs at least 2 points"));
    }
    let smooth = SmoothedPosterior::new(*m, alpha)?;
    let rto = rto_interval_density(m)?;
    let width = m.b - m.a;
    let (lo, hi) = (m.a - 0.5 * width, m.b + 0.5 * width);
    Ok((0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            DensityRow {
                x,
                truncated: truncated_posterior_pdf(m, x),
                smoothed: smooth.pdf(x),
                rto_continuous: rto.continuous_pdf(x),
            }
        })
        .collect())
}

/// RTO draws for the interval model through the image-space sampler, on the
/// equivalent single-pixel problem rescaled to the unit box.
pub fn rto_interval_draws(m: &IntervalModel, n: usize, seed: u64, workers: usize) -> Result<Vec<f64>> {
    m.validate()?;
    let width = m.b - m.a;
    let op = IdentityOperator::new(1, 1);
    let obs = Observation::new(vec![(m.y - m.a) / width], m.sigma / width, &op)?;
    let prior = PriorSpec::new(0.0, Constraint::Box, 0.0)?;
    let mut settings = RtoSettings::new(n, seed);
    settings.worker_count = workers;
    settings.admm = AdmmSettings::default().with_tol(1e-10).with_max_iter(10_000);
    let chain = rto_sample(&obs, &op, &prior, &settings)?;
    Ok(chain
        .samples()
        .iter()
        .map(|s: &Image| m.a + width * s.data()[0])
        .collect())
}
