//! The prior `g(x) = gamma ||grad x||_{1,1} + i_C(x) + alpha/2 ||x||^2`, its
//! building blocks, proximal maps and Moreau-Yosida envelopes.

mod envelope;
mod gradient;

use std::fmt;
use std::str::FromStr;

pub use envelope::{moreau_envelope_grad, moreau_envelope_value, EnvelopeTerm};
pub use gradient::{tv_norm_raw, GradientOperator, GRADIENT_NORM_SQ_BOUND};

use crate::error::{Error, Result};
use crate::image::Image;

/// Convex constraint set `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `[0, 1]^d`
    Box,
    /// `R_+^d`
    Nonnegative,
    None,
}

impl Constraint {
    #[inline]
    pub fn project_value(self, v: f64) -> f64 {
        match self {
            Constraint::Box => v.clamp(0.0, 1.0),
            Constraint::Nonnegative => v.max(0.0),
            Constraint::None => v,
        }
    }

    pub fn project_in_place(self, x: &mut [f64]) {
        if self != Constraint::None {
            x.iter_mut().for_each(|v| *v = self.project_value(*v));
        }
    }

    pub fn contains(self, x: &[f64], tol: f64) -> bool {
        x.iter().all(|&v| (v - self.project_value(v)).abs() <= tol)
    }

    /// Squared Euclidean distance to the set.
    pub fn dist_sq(self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&v| (v - self.project_value(v)).powi(2))
            .sum()
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Box => "box",
            Constraint::Nonnegative => "nonnegative",
            Constraint::None => "none",
        })
    }
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "box" => Ok(Constraint::Box),
            "nonnegative" | "nonneg" | "positive" => Ok(Constraint::Nonnegative),
            "none" => Ok(Constraint::None),
            other => Err(Error::Config(format!("unknown constraint {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    /// TV weight. Zero disables the TV term (used for Gaussian test cases).
    pub gamma: f64,
    pub constraint: Constraint,
    /// Tikhonov weight, the rank-deficiency fix.
    pub alpha: f64,
}

impl PriorSpec {
    pub fn new(gamma: f64, constraint: Constraint, alpha: f64) -> Result<Self> {
        let p = Self {
            gamma,
            constraint,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!(
                "TV weight must be nonnegative, got {}",
                self.gamma
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::param(format!(
                "Tikhonov weight must be nonnegative, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `g(x)`; infinite outside the constraint set (beyond `tol`).
    pub fn value(&self, grad: &GradientOperator, x: &[f64], tol: f64) -> f64 {
        if !self.constraint.contains(x, tol) {
            return f64::INFINITY;
        }
        let tik: f64 = x.iter().map(|v| v * v).sum();
        self.gamma * tv_norm_raw(grad, x) + 0.5 * self.alpha * tik
    }
}

pub fn tv_norm(x: &Image) -> f64 {
    tv_norm_raw(&GradientOperator::for_image(x), x.data())
}

pub fn project_constraint(x: &Image, constraint: Constraint) -> Image {
    let mut data = x.data().to_vec();
    constraint.project_in_place(&mut data);
    x.with_data(data).expect("projection keeps shape and finiteness")
}
