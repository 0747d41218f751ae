//! ADMM for the MAP / perturbed-MAP problem
//!
//! ```text
//! min_x  lambda/2 ||A x - y||^2 + gamma ||grad x||_{1,1} + i_C(x) + alpha/2 ||x||^2
//! ```
//!
//! split as `z_grad = grad x` (soft-thresholding prox) and `z_con = x`
//! (projection prox). The x-update solves
//! `(lambda A^T A + alpha I + rho grad^T grad + rho I) x = rhs`, in closed form
//! through the DFT when `A` is circulant and by preconditioned CG otherwise.
//! Stopping uses absolute + relative primal/dual residual tolerances.

use num_complex::Complex64;

use super::cg::pcg;
use crate::error::{check_dim, Error, Result};
use crate::image::Image;
use crate::ops::fft::Fft2;
use crate::ops::{dot, LinearOperator};
use crate::regularizers::{tv_norm_raw, Constraint, GradientOperator, PriorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XUpdateMode {
    /// Fourier when the operator is circulant, CG otherwise.
    Auto,
    Fourier,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSettings {
    pub rho: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    pub x_update: XUpdateMode,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Stop on the primal residual alone.
    pub primal_only: bool,
    /// Doubles/halves rho when one residual exceeds the other tenfold.
    pub residual_balancing: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            rho: 1.0,
            tol_primal: 1e-4,
            tol_dual: 1e-4,
            max_iter: 2000,
            x_update: XUpdateMode::Auto,
            cg_tol: 1e-8,
            cg_max_iter: 1000,
            primal_only: false,
            residual_balancing: false,
        }
    }
}

impl AdmmSettings {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_primal = tol;
        self.tol_dual = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param(format!("ADMM rho must be positive, got {}", self.rho)));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return Err(Error::param("ADMM tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("ADMM max_iter must be at least 1"));
        }
        if !(self.cg_tol > 0.0) || self.cg_max_iter == 0 {
            return Err(Error::param("CG tolerance and iteration cap must be positive"));
        }
        Ok(())
    }
}

/// `lambda/2 ||A x - data||^2 + g(x)`.
#[derive(Debug, Clone, Copy)]
pub struct MapObjective<'a> {
    pub op: &'a dyn LinearOperator,
    pub data: &'a [f64],
    /// Noise precision `lambda = 1/sigma^2`.
    pub precision: f64,
    pub prior: PriorSpec,
}

impl<'a> MapObjective<'a> {
    pub fn new(
        op: &'a dyn LinearOperator,
        data: &'a [f64],
        precision: f64,
        prior: PriorSpec,
    ) -> Result<Self> {
        check_dim("MAP data length", op.output_dim(), data.len())?;
        if !(precision > 0.0 && precision.is_finite()) {
            return Err(Error::param(format!(
                "noise precision must be positive, got {precision}"
            )));
        }
        prior.validate()?;
        Ok(Self {
            op,
            data,
            precision,
            prior,
        })
    }

    /// Objective value; `+inf` outside the constraint set (beyond `1e-12`).
    pub fn value(&self, x: &[f64]) -> f64 {
        let (h, w) = self.op.image_shape();
        let grad = GradientOperator::new(h, w);
        self.data_misfit(x) + self.prior.value(&grad, x, 1e-12)
    }

    pub fn data_misfit(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.op.output_dim()];
        self.op.apply_into(x, &mut ax);
        let r: f64 = ax.iter().zip(self.data).map(|(a, y)| (a - y).powi(2)).sum();
        0.5 * self.precision * r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub objective: f64,
    pub cg_iterations: usize,
    pub final_rho: f64,
}

/// Full ADMM iterate, for warm starts.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: Vec<f64>,
    pub z_grad: Vec<f64>,
    pub z_con: Vec<f64>,
    /// Scaled duals (`y / rho`).
    pub u_grad: Vec<f64>,
    pub u_con: Vec<f64>,
    pub rho: f64,
}

impl AdmmState {
    /// Primal variables from `x0`, duals at zero.
    pub fn cold(x0: &Image, constraint: Constraint, rho: f64) -> Self {
        let grad = GradientOperator::for_image(x0);
        let d = x0.len();
        let mut z_grad = vec![0.0; 2 * d];
        grad.apply_into(x0.data(), &mut z_grad);
        let mut z_con = x0.data().to_vec();
        constraint.project_in_place(&mut z_con);
        Self {
            x: x0.data().to_vec(),
            z_grad,
            z_con,
            u_grad: vec![0.0; 2 * d],
            u_con: vec![0.0; d],
            rho,
        }
    }
}

pub fn admm_solve(
    obj: &MapObjective<'_>,
    settings: &AdmmSettings,
    x0: &Image,
) -> Result<(Image, SolveStats)> {
    let state = AdmmState::cold(x0, obj.prior.constraint, settings.rho);
    let (img, stats, _) = admm_solve_from(obj, settings, state)?;
    Ok((img, stats))
}

enum XSolver {
    Fourier {
        fft: Fft2,
        gram_symbol: Vec<f64>,
        lap: Vec<f64>,
        symbol: Vec<f64>,
    },
    Cg {
        fft: Fft2,
        gram_mean: f64,
        lap: Vec<f64>,
        precond: Vec<f64>,
    },
}

impl XSolver {
    fn new(obj: &MapObjective<'_>, mode: XUpdateMode, rho: f64) -> Result<Self> {
        let (h, w) = obj.op.image_shape();
        let fft = Fft2::new(h, w);
        let lap = GradientOperator::new(h, w).laplacian_symbol();
        let eigs = obj.op.fourier_eigenvalues();
        let use_fourier = match mode {
            XUpdateMode::Auto => eigs.is_some(),
            XUpdateMode::Fourier => {
                if eigs.is_none() {
                    return Err(Error::param(format!(
                        "operator {} has no Fourier diagonalization",
                        obj.op.id()
                    )));
                }
                true
            }
            XUpdateMode::ConjugateGradient => false,
        };
        let mut solver = if use_fourier {
            let gram_symbol = eigs.unwrap().iter().map(|e| e.norm_sqr()).collect();
            XSolver::Fourier {
                fft,
                gram_symbol,
                lap,
                symbol: Vec::new(),
            }
        } else {
            let gram_mean = if let Some(diag) = obj.op.gram_diagonal() {
                diag.iter().sum::<f64>() / diag.len() as f64
            } else if let Some(e) = eigs {
                e.iter().map(|v| v.norm_sqr()).sum::<f64>() / e.len() as f64
            } else {
                0.0
            };
            XSolver::Cg {
                fft,
                gram_mean,
                lap,
                precond: Vec::new(),
            }
        };
        solver.set_rho(obj, rho);
        Ok(solver)
    }

    fn set_rho(&mut self, obj: &MapObjective<'_>, rho: f64) {
        let lam = obj.precision;
        let alpha = obj.prior.alpha;
        match self {
            XSolver::Fourier {
                gram_symbol,
                lap,
                symbol,
                ..
            } => {
                *symbol = gram_symbol
                    .iter()
                    .zip(lap.iter())
                    .map(|(g, l)| lam * g + alpha + rho + rho * l)
                    .collect();
            }
            XSolver::Cg {
                gram_mean,
                lap,
                precond,
                ..
            } => {
                *precond = lap
                    .iter()
                    .map(|l| lam * *gram_mean + alpha + rho + rho * l)
                    .collect();
            }
        }
    }

    /// Solves the x-update in place (x holds the warm start). Returns CG iterations.
    fn solve(
        &self,
        obj: &MapObjective<'_>,
        grad: &GradientOperator,
        rho: f64,
        rhs: &[f64],
        x: &mut [f64],
        settings: &AdmmSettings,
    ) -> Result<usize> {
        match self {
            XSolver::Fourier { fft, symbol, .. } => {
                fft.filter(rhs, |i| Complex64::new(1.0 / symbol[i], 0.0), x);
                Ok(0)
            }
            XSolver::Cg { fft, precond, .. } => {
                let lam = obj.precision;
                let shift = obj.prior.alpha + rho;
                let d = x.len();
                let matvec = |v: &[f64], out: &mut [f64]| {
                    let mut g = vec![0.0; 2 * d];
                    let mut lap = vec![0.0; d];
                    obj.op.gram_into(v, out);
                    grad.apply_into(v, &mut g);
                    grad.adjoint_into(&g, &mut lap);
                    for i in 0..d {
                        out[i] = lam * out[i] + shift * v[i] + rho * lap[i];
                    }
                };
                let prec = |r: &[f64], z: &mut [f64]| {
                    fft.filter(r, |i| Complex64::new(1.0 / precond[i], 0.0), z);
                };
                let out = pcg(matvec, prec, rhs, x, settings.cg_tol, settings.cg_max_iter)?;
                if out.relative_residual > settings.cg_tol {
                    log::debug!(
                        "CG stopped at relative residual {:e} after {} iterations",
                        out.relative_residual,
                        out.iterations
                    );
                }
                Ok(out.iterations)
            }
        }
    }
}

/// Runs ADMM from an explicit state and returns the final state as well.
///
/// With a constraint, the returned image is the projected split variable and
/// is therefore exactly feasible.
pub fn admm_solve_from(
    obj: &MapObjective<'_>,
    settings: &AdmmSettings,
    mut state: AdmmState,
) -> Result<(Image, SolveStats, AdmmState)> {
    settings.validate()?;
    let (h, w) = obj.op.image_shape();
    let d = h * w;
    check_dim("ADMM state", d, state.x.len())?;
    check_dim("ADMM gradient split", 2 * d, state.z_grad.len())?;
    let grad = GradientOperator::new(h, w);
    let constraint = obj.prior.constraint;
    let gamma = obj.prior.gamma;

    let mut rho = if settings.residual_balancing && state.rho > 0.0 {
        state.rho
    } else {
        settings.rho
    };
    if state.rho > 0.0 && state.rho != rho {
        let s = state.rho / rho;
        state.u_grad.iter_mut().for_each(|v| *v *= s);
        state.u_con.iter_mut().for_each(|v| *v *= s);
    }

    let mut xsolver = XSolver::new(obj, settings.x_update, rho)?;

    let mut at_y = vec![0.0; d];
    obj.op.adjoint_into(obj.data, &mut at_y);
    at_y.iter_mut().for_each(|v| *v *= obj.precision);

    let AdmmState {
        mut x,
        mut z_grad,
        mut z_con,
        mut u_grad,
        mut u_con,
        ..
    } = state;
    let mut rhs = vec![0.0; d];
    let mut tmp2 = vec![0.0; 2 * d];
    let mut tmp = vec![0.0; d];
    let mut gx = vec![0.0; 2 * d];
    let mut z_grad_old = vec![0.0; 2 * d];
    let mut z_con_old = vec![0.0; d];

    let sqrt_p = ((3 * d) as f64).sqrt();
    let sqrt_n = (d as f64).sqrt();
    let mut stats = SolveStats {
        iterations: 0,
        converged: false,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        eps_primal: 0.0,
        eps_dual: 0.0,
        objective: f64::NAN,
        cg_iterations: 0,
        final_rho: rho,
    };

    for it in 1..=settings.max_iter {
        for i in 0..2 * d {
            tmp2[i] = z_grad[i] - u_grad[i];
        }
        grad.adjoint_into(&tmp2, &mut tmp);
        for i in 0..d {
            rhs[i] = at_y[i] + rho * (tmp[i] + z_con[i] - u_con[i]);
        }
        stats.cg_iterations += xsolver.solve(obj, &grad, rho, &rhs, &mut x, settings)?;

        grad.apply_into(&x, &mut gx);
        std::mem::swap(&mut z_grad, &mut z_grad_old);
        std::mem::swap(&mut z_con, &mut z_con_old);
        let thresh = gamma / rho;
        for i in 0..2 * d {
            let v = gx[i] + u_grad[i];
            z_grad[i] = soft_threshold(v, thresh);
        }
        for i in 0..d {
            z_con[i] = constraint.project_value(x[i] + u_con[i]);
        }

        let mut r_sq = 0.0;
        for i in 0..2 * d {
            let r = gx[i] - z_grad[i];
            u_grad[i] += r;
            r_sq += r * r;
        }
        for i in 0..d {
            let r = x[i] - z_con[i];
            u_con[i] += r;
            r_sq += r * r;
        }

        for i in 0..2 * d {
            tmp2[i] = z_grad[i] - z_grad_old[i];
        }
        grad.adjoint_into(&tmp2, &mut tmp);
        let mut s_sq = 0.0;
        for i in 0..d {
            let s = rho * (tmp[i] + z_con[i] - z_con_old[i]);
            s_sq += s * s;
        }

        grad.adjoint_into(&u_grad, &mut tmp);
        let mut aty_sq = 0.0;
        for i in 0..d {
            let v = rho * (tmp[i] + u_con[i]);
            aty_sq += v * v;
        }
        let ax_norm = (dot(&gx, &gx) + dot(&x, &x)).sqrt();
        let bz_norm = (dot(&z_grad, &z_grad) + dot(&z_con, &z_con)).sqrt();

        let r_norm = r_sq.sqrt();
        let s_norm = s_sq.sqrt();
        if !r_norm.is_finite() || !s_norm.is_finite() {
            return Err(Error::Numerical(format!(
                "ADMM iterates became non-finite at iteration {it}"
            )));
        }
        stats.iterations = it;
        stats.primal_residual = r_norm;
        stats.dual_residual = s_norm;
        stats.eps_primal = sqrt_p * settings.tol_primal + settings.tol_primal * ax_norm.max(bz_norm);
        stats.eps_dual = sqrt_n * settings.tol_dual + settings.tol_dual * aty_sq.sqrt();

        if r_norm <= stats.eps_primal && (settings.primal_only || s_norm <= stats.eps_dual) {
            stats.converged = true;
            break;
        }

        if settings.residual_balancing {
            let factor = if r_norm > 10.0 * s_norm {
                2.0
            } else if s_norm > 10.0 * r_norm {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u_grad.iter_mut().for_each(|v| *v /= factor);
                u_con.iter_mut().for_each(|v| *v /= factor);
                xsolver.set_rho(obj, rho);
            }
        }
    }
    stats.final_rho = rho;

    let result = if constraint == Constraint::None {
        x.clone()
    } else {
        z_con.clone()
    };
    stats.objective = obj.data_misfit(&result)
        + gamma * tv_norm_raw(&grad, &result)
        + 0.5 * obj.prior.alpha * dot(&result, &result);
    let image = Image::new(h, w, result)?;
    Ok((
        image,
        stats,
        AdmmState {
            x,
            z_grad,
            z_con,
            u_grad,
            u_con,
            rho,
        },
    ))
}

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}
