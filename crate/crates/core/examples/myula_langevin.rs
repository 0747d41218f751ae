//! Proximal Langevin sampling (MYULA) on the same deblurring problem.
//!
//! Shows the automatic step-size rule, the potential along the chain, and
//! how strongly correlated successive states are along the slowest Fourier
//! direction compared with a fast one.

use imaging_uq::diagnostics::{psnr, summarize, AcfRecorder, Projector};
use imaging_uq::image::phantom;
use imaging_uq::ops::{degrade, BlurOperator, Kernel, LinearOperator};
use imaging_uq::regularizers::{Constraint, PriorSpec};
use imaging_uq::rng::RngStream;
use imaging_uq::samplers::{myula_potential, myula_sample_observed, MyulaDefaults, MyulaSettings};

fn main() -> imaging_uq::Result<()> {
    let truth = phantom(32, 32);
    let op = BlurOperator::new(Kernel::uniform(9)?, 32, 32)?;
    let sigma = 1e-3_f64.sqrt();
    let obs = degrade(&op, &truth, sigma, &mut RngStream::new(3, 1 << 50))?;
    let prior = PriorSpec::new(10.0, Constraint::Box, 0.0)?;

    let defaults = MyulaDefaults::for_problem(&op, sigma)?;
    println!(
        "alpha1 = alpha2 = {:.3e}, delta = {:.3e}",
        defaults.alpha1, defaults.delta
    );
    let settings = MyulaSettings::new(20_000, 2_000, 20, defaults);

    let (h, w) = op.image_shape();
    let mut recorder = AcfRecorder::new(Projector::fourier(h, w, op.fourier_eigenvalues(), 2)?);
    let chain = myula_sample_observed(&obs, &op, &prior, &settings, |_, x| recorder.record(x))?;
    for curve in recorder.curves(10)? {
        println!("{:<22} lag-1 {:.3}  lag-10 {:.3}", curve.label, curve.value_at(1), curve.value_at(10));
    }

    let first = &chain.samples()[0];
    let last = chain.samples().last().unwrap();
    println!(
        "potential: first kept {:.1}, last kept {:.1}",
        myula_potential(&obs, &op, &prior, &settings, first)?,
        myula_potential(&obs, &op, &prior, &settings, last)?
    );
    let outside = chain
        .samples()
        .iter()
        .filter(|s| s.data().iter().any(|v| !(0.0..=1.0).contains(v)))
        .count();
    println!("{outside} of {} kept samples leave [0,1]^d", chain.len());
    println!("MMSE PSNR {:.2} dB", psnr(&summarize(&chain)?.mmse, &truth)?);
    Ok(())
}
