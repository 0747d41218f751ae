use crate::error::{check_dim, Result};
use crate::image::Image;

/// Periodic forward differences. The output stacks the horizontal
/// differences (`x[r, c+1] - x[r, c]`) followed by the vertical ones
/// (`x[r+1, c] - x[r, c]`), each row-major, for a total length of `2d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradientOperator {
    height: usize,
    width: usize,
}

/// `||grad||^2 <= 8` for 2-D periodic forward differences.
pub const GRADIENT_NORM_SQ_BOUND: f64 = 8.0;

impl GradientOperator {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub fn for_image(x: &Image) -> Self {
        Self::new(x.height(), x.width())
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let (h, w) = (self.height, self.width);
        let d = h * w;
        let (gx, gy) = out.split_at_mut(d);
        for r in 0..h {
            let row = r * w;
            let next_row = ((r + 1) % h) * w;
            for c in 0..w {
                let i = row + c;
                let right = row + (c + 1) % w;
                gx[i] = x[right] - x[i];
                gy[i] = x[next_row + c] - x[i];
            }
        }
    }

    /// Adjoint (negative divergence).
    pub fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        let (h, w) = (self.height, self.width);
        let d = h * w;
        let (px, py) = p.split_at(d);
        for r in 0..h {
            let row = r * w;
            let prev_row = ((r + h - 1) % h) * w;
            for c in 0..w {
                let i = row + c;
                let left = row + (c + w - 1) % w;
                out[i] = px[left] - px[i] + py[prev_row + c] - py[i];
            }
        }
    }

    pub fn apply(&self, x: &Image) -> Result<Vec<f64>> {
        check_dim("gradient input", self.pixels(), x.len())?;
        let mut out = vec![0.0; 2 * self.pixels()];
        self.apply_into(x.data(), &mut out);
        Ok(out)
    }

    pub fn adjoint(&self, p: &[f64]) -> Result<Image> {
        check_dim("gradient adjoint input", 2 * self.pixels(), p.len())?;
        let mut out = vec![0.0; self.pixels()];
        self.adjoint_into(p, &mut out);
        Image::new(self.height, self.width, out)
    }

    /// DFT eigenvalues of `grad^T grad` (the periodic 5-point Laplacian, negated).
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut s = Vec::with_capacity(h * w);
        for ky in 0..h {
            let sy = (std::f64::consts::PI * ky as f64 / h as f64).sin();
            for kx in 0..w {
                let sx = (std::f64::consts::PI * kx as f64 / w as f64).sin();
                s.push(4.0 * (sx * sx + sy * sy));
            }
        }
        s
    }
}

/// Anisotropic total variation `||grad x||_{1,1}` of a raw pixel vector.
pub fn tv_norm_raw(grad: &GradientOperator, x: &[f64]) -> f64 {
    let mut g = vec![0.0; 2 * grad.pixels()];
    grad.apply_into(x, &mut g);
    g.iter().map(|v| v.abs()).sum()
}
