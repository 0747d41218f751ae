//! Image quality and chain summaries: PSNR, SSIM, pixel-wise mean and
//! standard deviation, and the running relative error of the mean.

use imaging_uq::diagnostics::{mse, psnr, ssim, summarize_images};
use imaging_uq::image::phantom;
use imaging_uq::rng::{gaussian_vector, RngStream};
use imaging_uq::Image;

fn main() -> imaging_uq::Result<()> {
    let truth = phantom(64, 64);
    let shifted = truth.with_data(truth.data().iter().map(|v| v + 0.1).collect())?;
    println!("uniform +0.1 error: MSE {:.4}, PSNR {:.2} dB", mse(&shifted, &truth)?, psnr(&shifted, &truth)?);
    println!("identical images: PSNR {}, SSIM {}", psnr(&truth, &truth)?, ssim(&truth, &truth)?);

    let mut rng = RngStream::new(9, 0);
    let noisy: Vec<Image> = (0..50)
        .map(|_| {
            let n = gaussian_vector(&mut rng, truth.len(), 0.05).unwrap();
            truth.with_data(truth.data().iter().zip(n).map(|(a, b)| a + b).collect()).unwrap()
        })
        .collect();
    println!("single noisy copy: PSNR {:.2} dB, SSIM {:.3}", psnr(&noisy[0], &truth)?, ssim(&noisy[0], &truth)?);
    let s = summarize_images(&noisy)?;
    let mean_std = s.std.data().iter().sum::<f64>() / s.std.len() as f64;
    println!("mean of 50: PSNR {:.2} dB, average pixel std {mean_std:.4}", psnr(&s.mmse, &truth)?);
    println!("relative change of the running mean at 10/25/50: {:.4} {:.4} {:.4}", s.rel_err[9], s.rel_err[24], s.rel_err[49]);
    Ok(())
}
