//! First-order primal-dual (Chambolle-Pock) solver for the TV proximal map
//!
//! ```text
//! prox(x) = argmin_u  gamma ||grad u||_{1,1} + 1/(2 alpha) ||u - x||^2
//! ```
//!
//! solved in the equivalent form `w ||grad u||_1 + 1/2 ||u - x||^2` with
//! `w = gamma * alpha`, whose dual variable lives in the box `[-w, w]^{2d}`.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::regularizers::{GradientOperator, GRADIENT_NORM_SQ_BOUND};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdSettings {
    pub n_iters: usize,
    pub tau: f64,
    pub sigma: f64,
}

impl PdSettings {
    /// `tau = sigma = 1/sqrt(8)`, so that `tau * sigma * ||grad||^2 <= 1`.
    pub fn new(n_iters: usize) -> Self {
        let step = 1.0 / GRADIENT_NORM_SQ_BOUND.sqrt();
        Self {
            n_iters,
            tau: step,
            sigma: step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iters == 0 {
            return Err(Error::param("primal-dual iteration count must be positive"));
        }
        if !(self.tau > 0.0 && self.sigma > 0.0) {
            return Err(Error::param("primal-dual steps must be positive"));
        }
        if self.tau * self.sigma * GRADIENT_NORM_SQ_BOUND > 1.0 + 1e-12 {
            return Err(Error::param(format!(
                "primal-dual steps violate tau*sigma*8 <= 1 (tau={}, sigma={})",
                self.tau, self.sigma
            )));
        }
        Ok(())
    }
}

impl Default for PdSettings {
    fn default() -> Self {
        Self::new(50)
    }
}

#[derive(Debug, Clone)]
pub struct TvProxResult {
    pub image: Image,
    /// Primal-dual gap of the final iterate, in units of the original
    /// objective `gamma TV(u) + ||u - x||^2 / (2 alpha)`.
    pub gap: f64,
    pub iterations: usize,
}

/// Reusable buffers for repeated TV prox evaluations on one image size.
#[derive(Debug, Clone)]
pub struct TvProxWorkspace {
    grad: GradientOperator,
    dual: Vec<f64>,
    primal: Vec<f64>,
    extrapolated: Vec<f64>,
    grad_buf: Vec<f64>,
    div_buf: Vec<f64>,
}

impl TvProxWorkspace {
    pub fn new(height: usize, width: usize) -> Self {
        let d = height * width;
        Self {
            grad: GradientOperator::new(height, width),
            dual: vec![0.0; 2 * d],
            primal: vec![0.0; d],
            extrapolated: vec![0.0; d],
            grad_buf: vec![0.0; 2 * d],
            div_buf: vec![0.0; d],
        }
    }

    /// Runs exactly `settings.n_iters` iterations from `u = x`, `p = 0`,
    /// writes the primal iterate into `out` and returns the scaled gap.
    pub fn solve(
        &mut self,
        x: &[f64],
        gamma: f64,
        alpha: f64,
        settings: &PdSettings,
        out: &mut [f64],
    ) -> f64 {
        let w = gamma * alpha;
        if w == 0.0 {
            out.copy_from_slice(x);
            return 0.0;
        }
        let (tau, sigma) = (settings.tau, settings.sigma);
        self.dual.iter_mut().for_each(|v| *v = 0.0);
        self.primal.copy_from_slice(x);
        self.extrapolated.copy_from_slice(x);
        for _ in 0..settings.n_iters {
            self.grad.apply_into(&self.extrapolated, &mut self.grad_buf);
            for (p, g) in self.dual.iter_mut().zip(&self.grad_buf) {
                *p = (*p + sigma * g).clamp(-w, w);
            }
            self.grad.adjoint_into(&self.dual, &mut self.div_buf);
            for i in 0..x.len() {
                let old = self.primal[i];
                let new = (old - tau * self.div_buf[i] + tau * x[i]) / (1.0 + tau);
                self.primal[i] = new;
                self.extrapolated[i] = 2.0 * new - old;
            }
        }
        out.copy_from_slice(&self.primal);
        self.gap(x, w) / alpha
    }

    fn gap(&mut self, x: &[f64], w: f64) -> f64 {
        self.grad.apply_into(&self.primal, &mut self.grad_buf);
        let tv: f64 = self.grad_buf.iter().map(|v| v.abs()).sum();
        let fid: f64 = self
            .primal
            .iter()
            .zip(x)
            .map(|(u, x)| 0.5 * (u - x).powi(2))
            .sum();
        self.grad.adjoint_into(&self.dual, &mut self.div_buf);
        let dual: f64 = x
            .iter()
            .zip(&self.div_buf)
            .map(|(x, g)| 0.5 * x * x - 0.5 * (x - g).powi(2))
            .sum();
        (w * tv + fid - dual).max(0.0)
    }
}

/// Approximate `prox_{gamma TV}^{alpha}(x)` after a fixed iteration budget.
pub fn tv_prox(x: &Image, gamma: f64, alpha: f64, settings: &PdSettings) -> Result<TvProxResult> {
    settings.validate()?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("TV weight must be nonnegative, got {gamma}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("prox parameter must be positive, got {alpha}")));
    }
    let mut ws = TvProxWorkspace::new(x.height(), x.width());
    let mut out = vec![0.0; x.len()];
    let gap = ws.solve(x.data(), gamma, alpha, settings, &mut out);
    Ok(TvProxResult {
        image: x.with_data(out)?,
        gap,
        iterations: settings.n_iters,
    })
}
