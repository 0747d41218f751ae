use num_complex::Complex64;

use super::{LinearOperator, SharedOperator};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone)]
pub struct IdentityOperator {
    height: usize,
    width: usize,
    ones: Vec<Complex64>,
}

impl IdentityOperator {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            ones: vec![Complex64::new(1.0, 0.0); height * width],
        }
    }
}

impl LinearOperator for IdentityOperator {
    fn image_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn output_dim(&self) -> usize {
        self.height * self.width
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }

    fn gram_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn fourier_eigenvalues(&self) -> Option<&[Complex64]> {
        Some(&self.ones)
    }

    fn gram_diagonal(&self) -> Option<Vec<f64>> {
        Some(vec![1.0; self.height * self.width])
    }

    fn id(&self) -> String {
        format!("identity@{}x{}", self.height, self.width)
    }
}

/// Explicit `m x d` matrix, row-major. Intended for small problems.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    height: usize,
    width: usize,
    rows: usize,
    matrix: Vec<f64>,
}

impl DenseOperator {
    pub fn new(rows: usize, height: usize, width: usize, matrix: Vec<f64>) -> Result<Self> {
        check_dim("dense matrix entries", rows * height * width, matrix.len())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("dense operator entries must be finite"));
        }
        Ok(Self {
            height,
            width,
            rows,
            matrix,
        })
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn image_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn output_dim(&self) -> usize {
        self.rows
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        for (o, row) in out.iter_mut().zip(self.matrix.chunks(d)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        let d = out.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&ui, row) in u.iter().zip(self.matrix.chunks(d)) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * ui;
            }
        }
    }

    fn id(&self) -> String {
        format!("dense:{}x{}", self.rows, self.height * self.width)
    }
}

/// Vertical concatenation `[A_1; A_2; ...]` of operators on the same image space.
#[derive(Debug, Clone)]
pub struct StackedOperator {
    parts: Vec<SharedOperator>,
}

impl StackedOperator {
    pub fn new(parts: Vec<SharedOperator>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::param("stacked operator needs at least one block"))?
            .image_shape();
        if parts.iter().any(|p| p.image_shape() != first) {
            return Err(Error::param("stacked operator blocks act on different image shapes"));
        }
        Ok(Self { parts })
    }
}

impl LinearOperator for StackedOperator {
    fn image_shape(&self) -> (usize, usize) {
        self.parts[0].image_shape()
    }

    fn output_dim(&self) -> usize {
        self.parts.iter().map(|p| p.output_dim()).sum()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let mut offset = 0;
        for p in &self.parts {
            let m = p.output_dim();
            p.apply_into(x, &mut out[offset..offset + m]);
            offset += m;
        }
    }

    fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = vec![0.0; out.len()];
        let mut offset = 0;
        for p in &self.parts {
            let m = p.output_dim();
            p.adjoint_into(&u[offset..offset + m], &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t;
            }
            offset += m;
        }
    }

    fn gram_diagonal(&self) -> Option<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for p in &self.parts {
            let diag = p.gram_diagonal()?;
            acc = Some(match acc {
                None => diag,
                Some(mut a) => {
                    a.iter_mut().zip(&diag).for_each(|(x, y)| *x += y);
                    a
                }
            });
        }
        acc
    }

    fn id(&self) -> String {
        let ids: Vec<String> = self.parts.iter().map(|p| p.id()).collect();
        format!("stack[{}]", ids.join(";"))
    }
}
