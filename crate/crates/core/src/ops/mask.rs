use super::LinearOperator;
use crate::error::{Error, Result};
use crate::image::Image;

/// Pixel-selection operator for inpainting: keeps the listed pixels.
#[derive(Debug, Clone)]
pub struct MaskOperator {
    height: usize,
    width: usize,
    keep: Vec<usize>,
}

impl MaskOperator {
    /// `keep` must be strictly increasing and inside the image.
    pub fn new(height: usize, width: usize, keep: Vec<usize>) -> Result<Self> {
        let d = height * width;
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("mask indices must be strictly increasing"));
        }
        if keep.last().is_some_and(|&i| i >= d) {
            return Err(Error::param(format!("mask index out of range for {d} pixels")));
        }
        Ok(Self {
            height,
            width,
            keep,
        })
    }

    /// Observed pixels are those with intensity above 0.5.
    pub fn from_mask_image(mask: &Image) -> Result<Self> {
        let keep = mask
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.5)
            .map(|(i, _)| i)
            .collect();
        Self::new(mask.height(), mask.width(), keep)
    }

    pub fn keep_indices(&self) -> &[usize] {
        &self.keep
    }

    /// Binary image, 1 on observed pixels.
    pub fn to_image(&self) -> Image {
        let mut data = vec![0.0; self.height * self.width];
        for &i in &self.keep {
            data[i] = 1.0;
        }
        Image::new(self.height, self.width, data).expect("mask image is well formed")
    }
}

impl LinearOperator for MaskOperator {
    fn image_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn output_dim(&self) -> usize {
        self.keep.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(&self.keep) {
            *o = x[i];
        }
    }

    fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&v, &i) in u.iter().zip(&self.keep) {
            out[i] = v;
        }
    }

    fn gram_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &i in &self.keep {
            out[i] = x[i];
        }
    }

    fn gram_diagonal(&self) -> Option<Vec<f64>> {
        let mut diag = vec![0.0; self.height * self.width];
        for &i in &self.keep {
            diag[i] = 1.0;
        }
        Some(diag)
    }

    fn id(&self) -> String {
        format!(
            "mask:{}of{}@{}x{}",
            self.keep.len(),
            self.height * self.width,
            self.height,
            self.width
        )
    }
}
