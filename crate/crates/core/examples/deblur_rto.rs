//! Deblurring with randomize-then-optimize on a 64x64 phantom.
//!
//! Blurs the image with a 9x9 uniform kernel, adds noise of variance 1e-3,
//! then draws independent box-constrained samples by perturbing the data and
//! solving a TV-regularized MAP problem per draw.
//!
//! ```text
//! cargo run --release --example deblur_rto [n_samples]
//! ```

use std::sync::Arc;

use imaging_uq::diagnostics::{acf, psnr, ssim, summarize, Projector};
use imaging_uq::image::phantom;
use imaging_uq::ops::{degrade, BlurOperator, Kernel, LinearOperator};
use imaging_uq::regularizers::{Constraint, PriorSpec};
use imaging_uq::rng::RngStream;
use imaging_uq::samplers::{map_estimate, rto_sample, RtoSettings};

fn main() -> imaging_uq::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let truth = phantom(64, 64);
    let op = Arc::new(BlurOperator::new(Kernel::uniform(9)?, 64, 64)?);
    let obs = degrade(op.as_ref(), &truth, 1e-3_f64.sqrt(), &mut RngStream::new(7, 1 << 50))?;
    let prior = PriorSpec::new(5.0, Constraint::Box, 1e-8)?;

    let mut settings = RtoSettings::new(n, 1);
    // the data term is weighted by 1/sigma^2 = 1000; rho = 1 would need thousands of iterations
    settings.admm.rho = 100.0;
    let (map, stats) = map_estimate(&obs, op.as_ref(), &prior, &settings.admm)?;
    println!("MAP: {} ADMM iterations, PSNR {:.2} dB", stats.iterations, psnr(&map, &truth)?);

    settings.worker_count = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chain = rto_sample(&obs, op.as_ref(), &prior, &settings)?;
    let summary = summarize(&chain)?;
    println!(
        "RTO: {} samples, MMSE PSNR {:.2} dB, SSIM {:.3}",
        chain.len(),
        psnr(&summary.mmse, &truth)?,
        ssim(&summary.mmse, &truth)?
    );
    let iters = chain.trace("admm_iterations").unwrap();
    println!("mean ADMM iterations per sample: {:.1}", iters.iter().sum::<f64>() / iters.len() as f64);

    let (h, w) = op.image_shape();
    let projector = Projector::fourier(h, w, op.fourier_eigenvalues(), 4)?;
    for curve in acf(&chain, &projector, (n / 10).min(20))? {
        println!("{:<22} lag-1 ACF {:+.3}  (band {:.3})", curve.label, curve.value_at(1), curve.band);
    }

    let dir = std::env::temp_dir().join("imaging-uq-deblur-rto");
    std::fs::create_dir_all(&dir).ok();
    summary.mmse.write_pgm(dir.join("mmse.pgm"), 255)?;
    map.write_pgm(dir.join("map.pgm"), 255)?;
    println!("images in {}", dir.display());
    Ok(())
}
