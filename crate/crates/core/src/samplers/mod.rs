//! Posterior samplers producing [`SampleChain`](crate::chain::SampleChain)s.

mod gibbs;
mod myula;
mod rto;

pub use gibbs::{draw_hyperparameters, gamma_shape_increment, gibbs_sample, GibbsSettings, Hyperpriors};
pub use myula::{
    myula_potential, myula_sample, myula_sample_observed, MyulaDefaults, MyulaSettings,
};
pub use rto::{rto_sample, RtoSettings, RETRY_STREAM_OFFSET};

use crate::error::Result;
use crate::image::Image;
use crate::ops::{apply_adjoint, LinearOperator, Observation};
use crate::regularizers::PriorSpec;
use crate::solvers::{admm_solve_from, AdmmSettings, AdmmState, MapObjective, SolveStats};

/// Starting image: the data itself when it lives in image space, `A^T y`
/// otherwise (zeros at unobserved pixels for a mask).
pub fn initial_guess(obs: &Observation, op: &dyn LinearOperator) -> Result<Image> {
    obs.check_operator(op)?;
    let (h, w) = op.image_shape();
    if op.output_dim() == h * w && op.fourier_eigenvalues().is_some() {
        Image::new(h, w, obs.values.clone())
    } else {
        apply_adjoint(op, &obs.values)
    }
}

/// MAP point estimate: ADMM on the unperturbed data.
pub fn map_estimate(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    admm: &AdmmSettings,
) -> Result<(Image, SolveStats)> {
    let (img, stats, _) = map_with_state(obs, op, prior, admm)?;
    Ok((img, stats))
}

pub(crate) fn map_with_state(
    obs: &Observation,
    op: &dyn LinearOperator,
    prior: &PriorSpec,
    admm: &AdmmSettings,
) -> Result<(Image, SolveStats, AdmmState)> {
    let x0 = initial_guess(obs, op)?;
    let obj = MapObjective::new(op, &obs.values, obs.precision(), *prior)?;
    admm_solve_from(&obj, admm, AdmmState::cold(&x0, prior.constraint, admm.rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::IdentityOperator;
    use crate::regularizers::Constraint;
    use crate::rng::{gaussian_vector, RngStream};

    #[test]
    fn map_of_identity_problem_with_tiny_noise_is_data() {
        let op = IdentityOperator::new(4, 4);
        let y: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
        let obs = Observation::new(y.clone(), 1e-4, &op).unwrap();
        let prior = PriorSpec::new(1.0, Constraint::Box, 1e-8).unwrap();
        let admm = AdmmSettings::default().with_tol(1e-10).with_max_iter(50_000);
        let (x, _) = map_estimate(&obs, &op, &prior, &admm).unwrap();
        for (a, b) in x.data().iter().zip(&y) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn map_beats_random_feasible_probes() {
        let op = crate::ops::BlurOperator::new(crate::ops::Kernel::uniform(3).unwrap(), 8, 8)
            .unwrap();
        let truth = crate::image::phantom(8, 8);
        let obs =
            crate::ops::degrade(&op, &truth, 0.05, &mut RngStream::new(2, 0)).unwrap();
        let prior = PriorSpec::new(2.0, Constraint::Box, 1e-8).unwrap();
        let admm = AdmmSettings::default().with_tol(1e-8).with_max_iter(20_000);
        let (x, _) = map_estimate(&obs, &op, &prior, &admm).unwrap();
        let obj = MapObjective::new(&op, &obs.values, obs.precision(), prior).unwrap();
        let at_map = obj.value(x.data());
        let mut stream = RngStream::new(3, 0);
        for k in 0..100 {
            let mut probe = x.data().to_vec();
            let scale = if k % 2 == 0 { 0.01 } else { 0.3 };
            let noise = gaussian_vector(&mut stream, 64, scale).unwrap();
            for (p, n) in probe.iter_mut().zip(noise) {
                *p = (*p + n).clamp(0.0, 1.0);
            }
            assert!(at_map <= obj.value(&probe) + 1e-6 * at_map.abs());
        }
    }
}
