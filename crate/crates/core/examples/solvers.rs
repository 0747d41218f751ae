//! The two convex solvers on their own: the primal-dual TV proximal map and
//! ADMM for the constrained MAP problem, with Fourier and CG x-updates.

use imaging_uq::image::phantom;
use imaging_uq::ops::{degrade, BlurOperator, Kernel};
use imaging_uq::regularizers::{tv_norm, Constraint, PriorSpec};
use imaging_uq::rng::RngStream;
use imaging_uq::samplers::initial_guess;
use imaging_uq::solvers::{admm_solve, tv_prox, AdmmSettings, MapObjective, PdSettings, XUpdateMode};

fn main() -> imaging_uq::Result<()> {
    let x = phantom(32, 32);
    for iters in [10, 50, 500] {
        let r = tv_prox(&x, 2.0, 0.01, &PdSettings::new(iters))?;
        println!("tv_prox n_iters={iters:<4} gap {:.3e}  TV {:.3}", r.gap, tv_norm(&r.image));
    }

    let op = BlurOperator::new(Kernel::uniform(5)?, 32, 32)?;
    let obs = degrade(&op, &x, 0.03, &mut RngStream::new(2, 0))?;
    let obj = MapObjective::new(&op, &obs.values, obs.precision(), PriorSpec::new(5.0, Constraint::Box, 1e-8)?)?;
    for mode in [XUpdateMode::Fourier, XUpdateMode::ConjugateGradient] {
        let settings = AdmmSettings {
            x_update: mode,
            rho: 100.0,
            ..AdmmSettings::default()
        };
        let (_, stats) = admm_solve(&obj, &settings, &initial_guess(&obs, &op)?)?;
        println!(
            "ADMM {mode:?}: {} iterations, converged {}, objective {:.6}",
            stats.iterations, stats.converged, stats.objective
        );
    }
    Ok(())
}
