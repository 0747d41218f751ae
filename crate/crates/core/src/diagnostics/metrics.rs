use crate::error::{Error, Result};
use crate::image::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

pub fn mse(x: &Image, reference: &Image) -> Result<f64> {
    x.same_shape(reference)?;
    let s: f64 = x
        .data()
        .iter()
        .zip(reference.data())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(s / x.len() as f64)
}

/// Peak signal-to-noise ratio in dB for dynamic range 1. Identical images
/// give `f64::INFINITY`.
pub fn psnr(x: &Image, reference: &Image) -> Result<f64> {
    let m = mse(x, reference)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / m).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        *v = (-(i as f64 - c).powi(2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable "valid" filtering: output is `(h - 10) x (w - 10)`.
fn filter_valid(data: &[f64], h: usize, w: usize, win: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            let src = &data[r * w + c..r * w + c + SSIM_WINDOW];
            rows[r * ow + c] = src.iter().zip(win).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..SSIM_WINDOW).map(|k| win[k] * rows[(r + k) * ow + c]).sum();
        }
    }
    out
}

/// Mean structural similarity over all fully contained 11x11 Gaussian
/// windows (std 1.5), `K1 = 0.01`, `K2 = 0.03`, dynamic range 1.
pub fn ssim(x: &Image, reference: &Image) -> Result<f64> {
    x.same_shape(reference)?;
    let (h, w) = x.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::param(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let win = gaussian_window();
    let (a, b) = (x.data(), reference.data());
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| p * q).collect();
    let mu_a = filter_valid(a, h, w, &win);
    let mu_b = filter_valid(b, h, w, &win);
    let e_aa = filter_valid(&aa, h, w, &win);
    let e_bb = filter_valid(&bb, h, w, &win);
    let e_ab = filter_valid(&ab, h, w, &win);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let n = mu_a.len();
    let mut total = 0.0;
    for i in 0..n {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / n as f64)
}
