//! Image quality metrics, posterior summaries and autocorrelation
//! diagnostics.

mod acf;
mod metrics;
mod summary;

pub use acf::{acf, acf_curve, acf_series, AcfCurve, AcfRecorder, Basis, Projector, Z_99};
pub use metrics::{mse, psnr, ssim, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use summary::{summarize, summarize_images, SummaryImages};
