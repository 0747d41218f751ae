//! Moreau-Yosida regularized unadjusted Langevin algorithm.
//!
//! Both nonsmooth prior terms are replaced by their Moreau-Yosida envelopes,
//! the TV term with parameter `alpha1` and the constraint indicator with
//! `alpha2`, and the resulting smooth potential is sampled with an
//! Euler-Maruyama step.

use super::initial_guess;
use crate::chain::{ChainMeta, SampleChain};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::ops::{operator_norm_sq, LinearOperator, Observation};
use crate::regularizers::{tv_norm_raw, GradientOperator, PriorSpec};
use crate::rng::RngStream;
use crate::solvers::{PdSettings, TvProxWorkspace};

#[derive(Debug, Clone)]
pub struct MyulaSettings {
    pub total_iters: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub delta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub n_pd: usize,
    pub seed: u64,
    /// `None` starts from [`initial_guess`].
    pub init: Option<Image>,
    /// Multiplies the injected Langevin noise; `0.0` turns the chain into
    /// gradient descent on the smoothed potential.
    pub noise_scale: f64,
}

/// Parameter choice tied to the likelihood curvature `L / sigma^2`,
/// `L = ||A^T A||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MyulaDefaults {
    pub alpha1: f64,
    pub alpha2: f64,
    pub delta: f64,
    pub lipschitz: f64,
}

impl MyulaDefaults {
    /// `alpha1 = alpha2 = sigma^2 / L` and
    /// `delta = 1 / (2/alpha1 + 2/alpha2 + 2 L / sigma^2)`.
    pub fn from_norm(op_norm_sq: f64, noise_std: f64) -> Result<Self> {
        if !(op_norm_sq > 0.0 && noise_std > 0.0) {
            return Err(Error::param("MYULA defaults need positive ||A^T A|| and sigma"));
        }
        let lik = op_norm_sq / (noise_std * noise_std);
        let alpha = 1.0 / lik;
        Ok(Self {
            alpha1: alpha,
            alpha2: alpha,
            delta: 1.0 / (2.0 / alpha + 2.0 / alpha + 2.0 * lik),
            lipschitz: lik,
        })
    }

    pub fn for_problem(op: &dyn LinearOperator, noise_std: f64) -> Result<Self> {
        Self::from_norm(operator_norm_sq(op, 1e-8)?, noise_std)
    }
}

impl MyulaSettings {
    pub fn new(total_iters: usize, burn_in: usize, thinning: usize, defaults: MyulaDefaults) -> Self {
        Self {
            total_iters,
            burn_in,
            thinning,
            delta: defaults.delta,
            alpha1: defaults.alpha1,
            alpha2: defaults.alpha2,
            n_pd: 50,
            seed: 0,
            init: None,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_iters == 0 || self.thinning == 0 {
            return Err(Error::param("MYULA needs positive total_iters and thinning"));
        }
        if self.burn_in >= self.total_iters {
            return Err(Error::param(format!(
                "burn-in {} must be below total_iters {}",
                self.burn_in, self.total_iters
            )));
        }
        for (name, v) in [("delta", self.delta), ("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("MYULA {name} must be positive, got {v}")));
            }
        }
        if self.n_pd == 0 {
            return Err(Error::param("MYULA n_pd must be positive"));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::param("noise scale must be nonnegative"));
        }
        Ok(())
    }

    /// Number of stored states.
    pub fn kept(&self) -> usize {
        (self.total_iters - self.burn_in) / self.thinning
    }

    /// `1 / (1/alpha1 + 1/alpha2 + lik)`: step sizes above this are unstable.
    pub fn stability_bound(&self, lik: f64) -> f64 {
        1.0 / (1.0 / self.alpha1 + 1.0 / self.alpha2 + lik)
    }
}

struct Drift<'a> {
    op: &'a dyn LinearOperator,
    y: &'a [f64],
    precision: f64,
    prior: PriorSpec,
    alpha1: f64,
    alpha2: f64,
    pd: PdSettings,
    ws: TvProxWorkspace,
    ax: Vec<f64>,
    at_r: Vec<f64>,
    prox: Vec<f64>,
}

impl<'a> Drift<'a> {
    fn new(op: &'a dyn LinearOperator, obs: &'a Observation, prior: PriorSpec, s: &MyulaSettings) -> Self {
        let (h, w) = op.image_shape();
        Self {
            op,
            y: &obs.values,
            precision: obs.precision(),
            prior,
            alpha1: s.alpha1,
            alpha2: s.alpha2,
            pd: PdSettings::new(s.n_pd),
            ws: TvProxWorkspace::new(h, w),
            ax: vec![0.0; op.output_dim()],
            at_r: vec![0.0; h * w],
            prox: vec![0.0; h * w],
        }
    }

    /// Gradient of the smoothed potential at `x`, written to `out`.
    fn gradient(&mut self, x: &[f64], out: &mut [f64]) {
        self.op.apply_into(x, &mut self.ax);
        for (a, y) in self.ax.iter_mut().zip(self.y) {
            *a -= y;
        }
        self.op.adjoint_into(&self.ax, &mut self.at_r);
        self.ws
            .solve(x, self.prior.gamma, self.alpha1, &self.pd, &mut self.prox);
        let c = self.prior.constraint;
        for i in 0..x.len() {
            out[i] = self.precision * self.at_r[i]
                + (x[i] - self.prox[i]) / self.alpha1
                + (x[i] - c.project_value(x[i])) / self.alpha2;
        }
    }
}

/// Smoothed potential `||Ax - y||^2 / (2 sigma^2) + [gamma TV]_{alpha1}(x) + [i_C]_{alpha2}(x)`.
pub fn myula_potential(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    settings: &MyulaSettings,
    x: &Image,
) -> Result<f64> {
    obs.check_operator(op)?;
    let mut ax = vec![0.0; op.output_dim()];
    op.apply_into(x.data(), &mut ax);
    let misfit: f64 = ax.iter().zip(&obs.values).map(|(a, y)| (a - y).powi(2)).sum();
    let mut prox = vec![0.0; x.len()];
    TvProxWorkspace::new(x.height(), x.width()).solve(
        x.data(),
        prior.gamma,
        settings.alpha1,
        &PdSettings::new(settings.n_pd),
        &mut prox,
    );
    let grad = GradientOperator::for_image(x);
    let dist_tv: f64 = x.data().iter().zip(&prox).map(|(a, b)| (a - b).powi(2)).sum();
    let tv_env = prior.gamma * tv_norm_raw(&grad, &prox) + dist_tv / (2.0 * settings.alpha1);
    let ind_env = prior.constraint.dist_sq(x.data()) / (2.0 * settings.alpha2);
    Ok(0.5 * obs.precision() * misfit + tv_env + ind_env)
}

pub fn myula_sample(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    settings: &MyulaSettings,
) -> Result<SampleChain> {
    myula_sample_observed(obs, op, prior, settings, |_, _| {})
}

/// Like [`myula_sample`], but calls `observer(k, x_k)` on every post-burn-in
/// state, thinned or not, so full-chain statistics can be collected without
/// storing every state.
pub fn myula_sample_observed(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    settings: &MyulaSettings,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<SampleChain> {
    settings.validate()?;
    prior.validate()?;
    obs.check_operator(op)?;
    let lik = operator_norm_sq(op, 1e-8)? * obs.precision();
    let bound = settings.stability_bound(lik);
    if settings.delta > bound {
        log::warn!(
            "MYULA step {} exceeds the stability bound {bound}; the chain may diverge",
            settings.delta
        );
    }
    let (h, w) = op.image_shape();
    let d = h * w;
    let mut x = match &settings.init {
        Some(img) => {
            crate::error::check_dim("MYULA init", d, img.len())?;
            img.data().to_vec()
        }
        None => initial_guess(obs, op)?.into_data(),
    };
    let mut drift = Drift::new(op, obs, *prior, settings);
    let mut grad = vec![0.0; d];
    let mut stream = RngStream::new(settings.seed, 0);
    let noise = (2.0 * settings.delta).sqrt() * settings.noise_scale;

    let mut meta = ChainMeta::new("myula", settings.seed);
    meta.burn_in = settings.burn_in as u64;
    meta.thinning = settings.thinning as u64;
    for (k, v) in [
        ("delta", settings.delta),
        ("alpha1", settings.alpha1),
        ("alpha2", settings.alpha2),
        ("stability_bound", bound),
    ] {
        meta.notes.insert(k.into(), format!("{v:e}"));
    }
    meta.notes.insert("n_pd".into(), settings.n_pd.to_string());
    meta.notes.insert("total_iters".into(), settings.total_iters.to_string());
    let mut chain = SampleChain::new(h, w, meta);

    for k in 1..=settings.total_iters {
        drift.gradient(&x, &mut grad);
        for i in 0..d {
            x[i] -= settings.delta * grad[i];
            if noise > 0.0 {
                x[i] += noise * stream.standard_normal();
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("MYULA diverged at step {k}")));
        }
        if k > settings.burn_in {
            observer(k, &x);
            if (k - settings.burn_in) % settings.thinning == 0 {
                chain.push(Image::new(h, w, x.clone())?, &[])?;
            }
        }
    }
    Ok(chain)
}
