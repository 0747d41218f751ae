use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Row-major 2-D DFT built from 1-D rustfft plans. Plans are shared, scratch
/// is per call, so one instance can be used from many threads.
#[derive(Clone)]
pub struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fft2({}x{})", self.height, self.width)
    }
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform scaled by `1 / (height * width)`, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inv, &self.col_inv);
        let s = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Computes `Re(IDFT(multiplier * DFT(x)))` into `out`.
    pub fn filter(&self, x: &[f64], multiplier: impl Fn(usize) -> Complex64, out: &mut [f64]) {
        let mut buf = self.forward_real(x);
        for (i, v) in buf.iter_mut().enumerate() {
            *v *= multiplier(i);
        }
        self.inverse(&mut buf);
        for (o, v) in out.iter_mut().zip(&buf) {
            *o = v.re;
        }
    }

    fn run(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "FFT buffer length");
        let (h, w) = (self.height, self.width);
        if w > 1 {
            row.process(data);
        }
        if h > 1 {
            let mut t = vec![Complex64::default(); h * w];
            for r in 0..h {
                for c in 0..w {
                    t[c * h + r] = data[r * w + c];
                }
            }
            col.process(&mut t);
            for r in 0..h {
                for c in 0..w {
                    data[r * w + c] = t[c * h + r];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_dft() {
        let (h, w) = (3, 4);
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let fast = Fft2::new(h, w).forward_real(&x);
        for ky in 0..h {
            for kx in 0..w {
                let mut acc = Complex64::default();
                for r in 0..h {
                    for c in 0..w {
                        let ph = -2.0
                            * std::f64::consts::PI
                            * ((ky * r) as f64 / h as f64 + (kx * c) as f64 / w as f64);
                        acc += x[r * w + c] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - fast[ky * w + kx]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let f = Fft2::new(5, 8);
        let x: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let mut buf = f.forward_real(&x);
        f.inverse(&mut buf);
        for (a, b) in x.iter().zip(&buf) {
            assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }
}
