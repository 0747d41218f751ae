//! Hierarchical Gibbs sampler over the image, the noise precision `lambda`
//! and the TV weight `gamma`, with one RTO draw per sweep.

use super::initial_guess;
use crate::chain::{ChainMeta, SampleChain};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::ops::{LinearOperator, Observation};
use crate::regularizers::{tv_norm_raw, Constraint, GradientOperator, PriorSpec};
use crate::rng::RngStream;
use crate::solvers::{admm_solve_from, AdmmSettings, AdmmState, MapObjective};

/// Gamma hyperpriors as (shape, rate) pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperpriors {
    pub a_lambda: f64,
    pub b_lambda: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
}

impl Default for Hyperpriors {
    fn default() -> Self {
        Self {
            a_lambda: 1.0,
            b_lambda: 1e-4,
            a_gamma: 1.0,
            b_gamma: 1e-4,
        }
    }
}

impl Hyperpriors {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_lambda", self.a_lambda),
            ("b_lambda", self.b_lambda),
            ("a_gamma", self.a_gamma),
            ("b_gamma", self.b_gamma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("hyperprior {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GibbsSettings {
    pub n_samples: usize,
    pub admm: AdmmSettings,
    pub hyper: Hyperpriors,
    pub init: Option<Image>,
    pub seed: u64,
}

impl GibbsSettings {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            admm: AdmmSettings::default(),
            hyper: Hyperpriors::default(),
            init: None,
            seed,
        }
    }
}

/// Shape increment of the `gamma` conditional for `d` pixels.
///
/// Periodic anisotropic TV is 1-homogeneous but vanishes on constant images,
/// so `exp(-gamma TV(x))` integrated over the remaining `d - 1` directions
/// scales as `gamma^{-(d-1)}`.
pub fn gamma_shape_increment(d: usize) -> f64 {
    d.saturating_sub(1) as f64
}

/// Step 1 of a sweep: `(lambda, gamma)` given the current residual and TV.
pub fn draw_hyperparameters(
    stream: &mut RngStream,
    hyper: &Hyperpriors,
    residual_sq: f64,
    m: usize,
    tv: f64,
    d: usize,
) -> Result<(f64, f64)> {
    let lambda = stream.gamma(
        hyper.a_lambda + m as f64 / 2.0,
        hyper.b_lambda + residual_sq / 2.0,
    )?;
    let gamma = stream.gamma(hyper.a_gamma + gamma_shape_increment(d), hyper.b_gamma + tv)?;
    Ok((lambda, gamma))
}

/// Runs `n_samples` sweeps. Traces: `lambda`, `gamma`, `admm_iterations`.
///
/// The constraint of `prior` must be nonnegativity or none; its `gamma` is
/// ignored since `gamma` is sampled.
pub fn gibbs_sample(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    settings: &GibbsSettings,
) -> Result<SampleChain> {
    settings.hyper.validate()?;
    settings.admm.validate()?;
    obs.check_operator(op)?;
    if settings.n_samples == 0 {
        return Err(Error::param("Gibbs needs at least one sweep"));
    }
    if prior.constraint == Constraint::Box {
        return Err(Error::param(
            "hierarchical Gibbs supports the nonnegativity constraint or none, not the box",
        ));
    }
    if !(prior.alpha > 0.0) {
        return Err(Error::param("hierarchical Gibbs needs a positive Tikhonov weight alpha"));
    }
    let (h, w) = op.image_shape();
    let d = h * w;
    let m = op.output_dim();
    let grad = GradientOperator::new(h, w);
    let x0 = match &settings.init {
        Some(img) => {
            crate::error::check_dim("Gibbs init", d, img.len())?;
            img.clone()
        }
        None => initial_guess(obs, op)?,
    };
    let mut state = AdmmState::cold(&x0, prior.constraint, settings.admm.rho);
    let mut x = x0.into_data();
    let mut ax = vec![0.0; m];

    let mut meta = ChainMeta::new("gibbs", settings.seed);
    meta.notes.insert("a_lambda".into(), settings.hyper.a_lambda.to_string());
    meta.notes.insert("b_lambda".into(), settings.hyper.b_lambda.to_string());
    meta.notes.insert("a_gamma".into(), settings.hyper.a_gamma.to_string());
    meta.notes.insert("b_gamma".into(), settings.hyper.b_gamma.to_string());
    let mut chain = SampleChain::new(h, w, meta)
        .with_trace("lambda")
        .with_trace("gamma")
        .with_trace("admm_iterations");

    for k in 1..=settings.n_samples {
        let mut stream = RngStream::new(settings.seed, k as u64);
        op.apply_into(&x, &mut ax);
        let residual_sq: f64 = ax.iter().zip(&obs.values).map(|(a, y)| (a - y).powi(2)).sum();
        let tv = tv_norm_raw(&grad, &x);
        let (lambda, gamma) =
            draw_hyperparameters(&mut stream, &settings.hyper, residual_sq, m, tv, d)?;

        let conditional = prior.with_gamma(gamma);
        let draw = |stream: &mut RngStream| {
            let std = 1.0 / lambda.sqrt();
            let data: Vec<f64> = obs.values.iter().map(|v| v + std * stream.standard_normal()).collect();
            let obj = MapObjective::new(op, &data, lambda, conditional)?;
            admm_solve_from(&obj, &settings.admm, state.clone())
        };
        let (img, stats, next) = match draw(&mut stream) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("Gibbs sweep {k}: RTO step failed ({e}); retrying");
                let mut retry = RngStream::new(settings.seed, super::RETRY_STREAM_OFFSET + k as u64);
                draw(&mut retry)
                    .map_err(|e| Error::Numerical(format!("Gibbs sweep {k} failed twice: {e}")))?
            }
        };
        state = next;
        x.copy_from_slice(img.data());
        chain.push(img, &[lambda, gamma, stats.iterations as f64])?;
    }
    Ok(chain)
}
