//! Linear forward operators `A : R^d -> R^m` acting on row-major images.

mod basic;
mod blur;
pub mod fft;
mod mask;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basic::{DenseOperator, IdentityOperator, StackedOperator};
pub use blur::{BlurOperator, Kernel};
pub use mask::MaskOperator;

use crate::error::{check_dim, Error, Result};
use crate::image::Image;
use crate::rng::{gaussian_vector, RngStream};

/// A known linear map from image space to data space.
///
/// Implementations that are diagonalized by the 2-D DFT expose their
/// eigenvalues; those with a diagonal Gram matrix `A^T A` expose its
/// diagonal. Solvers pick closed-form paths from these capabilities.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    /// `(height, width)` of the images the operator acts on.
    fn image_shape(&self) -> (usize, usize);

    fn output_dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn adjoint_into(&self, u: &[f64], out: &mut [f64]);

    /// `out = A^T A x`.
    fn gram_into(&self, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.output_dim()];
        self.apply_into(x, &mut tmp);
        self.adjoint_into(&tmp, out);
    }

    /// Eigenvalues of `A` in the 2-D DFT basis (row-major frequency order),
    /// when `A` is a circulant operator with `m == d`.
    fn fourier_eigenvalues(&self) -> Option<&[Complex64]> {
        None
    }

    /// Diagonal of `A^T A` when it is diagonal.
    fn gram_diagonal(&self) -> Option<Vec<f64>> {
        None
    }

    /// Short textual identifier recorded alongside observations.
    fn id(&self) -> String;

    fn input_dim(&self) -> usize {
        let (h, w) = self.image_shape();
        h * w
    }
}

pub type SharedOperator = Arc<dyn LinearOperator>;

pub fn apply(op: &dyn LinearOperator, x: &Image) -> Result<Vec<f64>> {
    check_dim("operator input", op.input_dim(), x.len())?;
    let mut out = vec![0.0; op.output_dim()];
    op.apply_into(x.data(), &mut out);
    Ok(out)
}

pub fn apply_adjoint(op: &dyn LinearOperator, u: &[f64]) -> Result<Image> {
    check_dim("operator adjoint input", op.output_dim(), u.len())?;
    let (h, w) = op.image_shape();
    let mut out = vec![0.0; h * w];
    op.adjoint_into(u, &mut out);
    Image::new(h, w, out)
}

pub const POWER_ITERATION_CAP: usize = 10_000;

/// Largest eigenvalue of `A^T A`, to relative tolerance `tol`.
///
/// Uses the DFT eigenvalues or the Gram diagonal when available, and a
/// deterministically seeded power iteration otherwise.
pub fn operator_norm_sq(op: &dyn LinearOperator, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param("operator norm tolerance must be positive"));
    }
    if let Some(eigs) = op.fourier_eigenvalues() {
        return Ok(eigs.iter().map(|e| e.norm_sqr()).fold(0.0, f64::max));
    }
    if let Some(diag) = op.gram_diagonal() {
        return Ok(diag.into_iter().fold(0.0, f64::max));
    }
    power_iteration(op, tol, POWER_ITERATION_CAP)
}

pub(crate) fn power_iteration(op: &dyn LinearOperator, tol: f64, cap: usize) -> Result<f64> {
    let d = op.input_dim();
    let mut v = gaussian_vector(&mut RngStream::new(0x5eed_0f_a7a, 0), d, 1.0)?;
    let mut w = vec![0.0; d];
    normalize(&mut v);
    let mut estimate = 0.0;
    for it in 1..=cap {
        op.gram_into(&v, &mut w);
        let next = dot(&v, &w);
        let nrm = norm(&w);
        if nrm == 0.0 {
            return Ok(0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nrm;
        }
        if it > 1 && (next - estimate).abs() <= tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence {
        method: "power iteration",
        iterations: cap,
        last_estimate: estimate,
    })
}

/// A noisy measurement `y = A x + n`, `n ~ N(0, noise_std^2 I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: Vec<f64>,
    pub noise_std: f64,
    pub operator_id: String,
}

impl Observation {
    pub fn new(values: Vec<f64>, noise_std: f64, op: &dyn LinearOperator) -> Result<Self> {
        check_dim("observation length", op.output_dim(), values.len())?;
        if !(noise_std > 0.0) {
            return Err(Error::param(format!(
                "noise std must be positive, got {noise_std}"
            )));
        }
        Ok(Self {
            values,
            noise_std,
            operator_id: op.id(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Noise precision `1 / sigma^2`.
    pub fn precision(&self) -> f64 {
        1.0 / (self.noise_std * self.noise_std)
    }

    pub fn check_operator(&self, op: &dyn LinearOperator) -> Result<()> {
        check_dim("observation length", op.output_dim(), self.values.len())
    }
}

/// Simulates `y = A x + n` with noise drawn from `stream`.
pub fn degrade(
    op: &dyn LinearOperator,
    x: &Image,
    noise_std: f64,
    stream: &mut RngStream,
) -> Result<Observation> {
    let mut values = apply(op, x)?;
    let noise = gaussian_vector(stream, values.len(), noise_std)?;
    for (v, n) in values.iter_mut().zip(noise) {
        *v += n;
    }
    Observation::new(values, noise_std, op)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}
