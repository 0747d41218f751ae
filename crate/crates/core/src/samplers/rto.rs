//! Randomize-then-optimize: perturb the data with fresh noise and solve the
//! MAP problem for each sample.

use rayon::prelude::*;

use super::map_with_state;
use crate::chain::{ChainMeta, SampleChain};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::ops::{LinearOperator, Observation};
use crate::regularizers::PriorSpec;
use crate::rng::RngStream;
use crate::solvers::{admm_solve_from, AdmmSettings, AdmmState, MapObjective, SolveStats};

/// Stream offset used for the single retry of a failed sample.
pub const RETRY_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone)]
pub struct RtoSettings {
    pub n_samples: usize,
    pub admm: AdmmSettings,
    pub worker_count: usize,
    pub seed: u64,
    /// Multiplies the injected data noise. `1.0` is RTO; `0.0` reproduces
    /// the MAP estimate in every sample.
    pub perturbation_scale: f64,
}

impl RtoSettings {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            admm: AdmmSettings::default(),
            worker_count: 1,
            seed,
            perturbation_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::param("RTO needs at least one sample"));
        }
        if self.worker_count == 0 {
            return Err(Error::param("worker count must be at least 1"));
        }
        if !(self.perturbation_scale >= 0.0 && self.perturbation_scale.is_finite()) {
            return Err(Error::param("perturbation scale must be finite and nonnegative"));
        }
        self.admm.validate()
    }
}

struct Draw {
    image: Image,
    stats: SolveStats,
}

fn perturbed_solve(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    settings: &RtoSettings,
    warm: &AdmmState,
    stream_index: u64,
) -> Result<Draw> {
    let mut stream = RngStream::new(settings.seed, stream_index);
    let std = obs.noise_std * settings.perturbation_scale;
    let mut data = obs.values.clone();
    if std > 0.0 {
        for v in data.iter_mut() {
            *v += std * stream.standard_normal();
        }
    }
    let obj = MapObjective::new(op, &data, obs.precision(), *prior)?;
    let (image, stats, _) = admm_solve_from(&obj, &settings.admm, warm.clone())?;
    Ok(Draw { image, stats })
}

/// Draws `n_samples` independent RTO samples.
///
/// Every sample is warm-started from the MAP solver state, so the chain does
/// not depend on the worker count. The chain carries per-sample solver
/// traces `admm_iterations`, `admm_converged` and `primal_residual`.
pub fn rto_sample(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    settings: &RtoSettings,
) -> Result<SampleChain> {
    settings.validate()?;
    if prior.alpha == 0.0 && op.output_dim() < op.input_dim() {
        return Err(Error::param(
            "RTO on an underdetermined operator needs a positive Tikhonov weight alpha",
        ));
    }
    let (_, map_stats, warm) = map_with_state(obs, op, prior, &settings.admm)?;

    let run = |i: usize| -> Result<Draw> {
        match perturbed_solve(obs, op, prior, settings, &warm, i as u64) {
            Ok(d) => Ok(d),
            Err(first) => {
                log::warn!("RTO sample {i} failed ({first}); retrying with a fresh perturbation");
                perturbed_solve(obs, op, prior, settings, &warm, RETRY_STREAM_OFFSET + i as u64)
                    .map_err(|e| Error::Numerical(format!("RTO sample {i} failed twice: {e}")))
            }
        }
    };

    let draws: Vec<Result<Draw>> = if settings.worker_count == 1 {
        (0..settings.n_samples).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.worker_count)
            .build()
            .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))?;
        pool.install(|| (0..settings.n_samples).into_par_iter().map(run).collect())
    };

    let (h, w) = op.image_shape();
    let mut meta = ChainMeta::new("rto", settings.seed);
    meta.notes.insert("map_iterations".into(), map_stats.iterations.to_string());
    let mut chain = SampleChain::new(h, w, meta)
        .with_trace("admm_iterations")
        .with_trace("admm_converged")
        .with_trace("primal_residual");
    for draw in draws {
        let d = draw?;
        let traces = [
            d.stats.iterations as f64,
            if d.stats.converged { 1.0 } else { 0.0 },
            d.stats.primal_residual,
        ];
        chain.push(d.image, &traces)?;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{DenseOperator, IdentityOperator};
    use crate::regularizers::Constraint;
    use crate::samplers::map_estimate;

    #[test]
    fn zero_perturbation_reproduces_map() {
        let op = crate::ops::BlurOperator::new(crate::ops::Kernel::uniform(3).unwrap(), 8, 8)
            .unwrap();
        let obs = crate::ops::degrade(
            &op,
            &crate::image::phantom(8, 8),
            0.03,
            &mut RngStream::new(9, 0),
        )
        .unwrap();
        let prior = PriorSpec::new(1.0, Constraint::Box, 1e-8).unwrap();
        let mut settings = RtoSettings::new(4, 1);
        settings.perturbation_scale = 0.0;
        settings.admm = AdmmSettings::default().with_tol(1e-10).with_max_iter(50_000);
        let chain = rto_sample(&obs, &op, &prior, &settings).unwrap();
        let (map, _) = map_estimate(&obs, &op, &prior, &settings.admm).unwrap();
        for s in chain.samples() {
            for (a, b) in s.data().iter().zip(map.data()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_chain() {
        let op = crate::ops::BlurOperator::new(crate::ops::Kernel::uniform(3).unwrap(), 8, 8)
            .unwrap();
        let obs = crate::ops::degrade(
            &op,
            &crate::image::phantom(8, 8),
            0.03,
            &mut RngStream::new(9, 0),
        )
        .unwrap();
        let prior = PriorSpec::new(1.0, Constraint::Box, 1e-8).unwrap();
        let mut one = RtoSettings::new(16, 5);
        one.worker_count = 1;
        let mut eight = one.clone();
        eight.worker_count = 8;
        let a = rto_sample(&obs, &op, &prior, &one).unwrap();
        let b = rto_sample(&obs, &op, &prior, &eight).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_eq!(a.trace("admm_iterations"), b.trace("admm_iterations"));
    }

    #[test]
    fn samples_are_feasible() {
        let op = IdentityOperator::new(6, 6);
        let y = vec![0.95; 36];
        let obs = Observation::new(y, 0.3, &op).unwrap();
        let prior = PriorSpec::new(0.5, Constraint::Box, 1e-8).unwrap();
        let chain = rto_sample(&obs, &op, &prior, &RtoSettings::new(20, 3)).unwrap();
        for s in chain.samples() {
            assert!(Constraint::Box.contains(s.data(), 1e-6));
        }
        // mass on the upper face
        let at_one = chain
            .samples()
            .iter()
            .flat_map(|s| s.data())
            .filter(|v| (**v - 1.0).abs() < 1e-9)
            .count();
        assert!(at_one > 0);
    }

    #[test]
    fn gaussian_case_matches_closed_form_mean() {
        // gamma = 0, alpha = 0, square invertible A: samples ~ N(A^{-1} y, sigma^2 (A^T A)^{-1})
        let a = vec![2.0, 0.3, 0.0, 0.1, 0.5, 1.5, 0.2, 0.0, 0.0, 0.4, 1.8, 0.3, 0.2, 0.0, 0.1, 1.2];
        let op = DenseOperator::new(4, 1, 4, a).unwrap();
        let obs = Observation::new(vec![1.0, -0.5, 0.2, 0.7], 0.1, &op).unwrap();
        let prior = PriorSpec::new(0.0, Constraint::None, 0.0).unwrap();
        let mut settings = RtoSettings::new(2000, 11);
        settings.admm = AdmmSettings {
            cg_tol: 1e-12,
            ..AdmmSettings::default().with_tol(1e-10).with_max_iter(20_000)
        };
        settings.worker_count = 4;
        let chain = rto_sample(&obs, &op, &prior, &settings).unwrap();
        let (map, _) = map_estimate(&obs, &op, &prior, &settings.admm).unwrap();
        let n = chain.len() as f64;
        for j in 0..4 {
            let mean: f64 = chain.samples().iter().map(|s| s.data()[j]).sum::<f64>() / n;
            assert!((mean - map.data()[j]).abs() < 0.02, "coord {j}: {mean} vs {}", map.data()[j]);
        }
    }

    #[test]
    fn rejects_underdetermined_without_tikhonov() {
        let op = crate::ops::MaskOperator::new(3, 3, vec![0, 4, 8]).unwrap();
        let obs = Observation::new(vec![0.1, 0.2, 0.3], 0.1, &op).unwrap();
        let prior = PriorSpec::new(1.0, Constraint::Box, 0.0).unwrap();
        assert!(rto_sample(&obs, &op, &prior, &RtoSettings::new(2, 0)).is_err());
    }
}
