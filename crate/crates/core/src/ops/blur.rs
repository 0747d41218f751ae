use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::fft::Fft2;
use super::LinearOperator;
use crate::error::{check_dim, Error, Result};

/// Square convolution stencil with odd side length.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
    label: String,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::param(format!("kernel size must be odd, got {size}")));
        }
        check_dim("kernel weights", size * size, weights.len())?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("kernel weights must be finite"));
        }
        Ok(Self {
            size,
            weights,
            label: format!("custom{size}"),
        })
    }

    /// `k x k` box filter with weights `1 / k^2`.
    pub fn uniform(size: usize) -> Result<Self> {
        let mut k = Self::new(size, vec![1.0 / (size * size) as f64; size * size])?;
        k.label = format!("uniform{size}");
        Ok(k)
    }

    /// Parses the text format: first line `k`, then `k` rows of `k` reals.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let size: usize = lines
            .next()
            .ok_or_else(|| Error::Format("empty kernel file".into()))?
            .parse()
            .map_err(|_| Error::Format("kernel size line is not an integer".into()))?;
        let mut weights = Vec::with_capacity(size * size);
        for row in 0..size {
            let line = lines
                .next()
                .ok_or_else(|| Error::Truncated(format!("kernel file ends at row {row}")))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("bad number in kernel row {row}")))?;
            if vals.len() != size {
                return Err(Error::Format(format!(
                    "kernel row {row} has {} entries, expected {size}",
                    vals.len()
                )));
            }
            weights.extend(vals);
        }
        Self::new(size, weights)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut k = Self::parse(&text)?;
        k.label = format!(
            "file:{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("kernel")
        );
        Ok(k)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.size);
        for row in self.weights.chunks(self.size) {
            let cells: Vec<String> = row.iter().map(|w| format!("{w:e}")).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Periodic-boundary convolution, diagonalized by the 2-D DFT.
#[derive(Debug, Clone)]
pub struct BlurOperator {
    kernel: Kernel,
    height: usize,
    width: usize,
    fft: Fft2,
    eigenvalues: Vec<Complex64>,
}

impl BlurOperator {
    pub fn new(kernel: Kernel, height: usize, width: usize) -> Result<Self> {
        if kernel.size > height || kernel.size > width {
            return Err(Error::param(format!(
                "kernel {0}x{0} larger than image {height}x{width}",
                kernel.size
            )));
        }
        let psf = centered_psf(&kernel, height, width);
        let fft = Fft2::new(height, width);
        let eigenvalues = fft.forward_real(&psf);
        Ok(Self {
            kernel,
            height,
            width,
            fft,
            eigenvalues,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }
}

/// Kernel zero-padded to the image and circularly shifted so its center sits
/// at pixel (0, 0).
pub(crate) fn centered_psf(kernel: &Kernel, height: usize, width: usize) -> Vec<f64> {
    let k = kernel.size;
    let half = k / 2;
    let mut psf = vec![0.0; height * width];
    for i in 0..k {
        for j in 0..k {
            let r = (i + height - half) % height;
            let c = (j + width - half) % width;
            psf[r * width + c] += kernel.weights[i * k + j];
        }
    }
    psf
}

impl LinearOperator for BlurOperator {
    fn image_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn output_dim(&self) -> usize {
        self.height * self.width
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.fft.filter(x, |i| self.eigenvalues[i], out);
    }

    fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        self.fft.filter(u, |i| self.eigenvalues[i].conj(), out);
    }

    fn gram_into(&self, x: &[f64], out: &mut [f64]) {
        self.fft
            .filter(x, |i| Complex64::new(self.eigenvalues[i].norm_sqr(), 0.0), out);
    }

    fn fourier_eigenvalues(&self) -> Option<&[Complex64]> {
        Some(&self.eigenvalues)
    }

    fn id(&self) -> String {
        format!("blur:{}@{}x{}", self.kernel.label, self.height, self.width)
    }
}
