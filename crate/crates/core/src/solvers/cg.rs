use crate::error::{Error, Result};
use crate::ops::dot;

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for an SPD system, warm-started from `x`.
pub(crate) fn pcg(
    matvec: impl Fn(&[f64], &mut [f64]),
    precondition: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    matvec(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut it = 0;
    while res > tol && it < max_iter {
        matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numerical(format!(
                "conjugate gradient breakdown at iteration {it} (p'Ap = {pap:e})"
            )));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        it += 1;
        if res <= tol {
            break;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgOutcome {
        iterations: it,
        relative_residual: res,
    })
}
