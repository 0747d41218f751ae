use super::{tv_norm_raw, Constraint, GradientOperator};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::solvers::{PdSettings, TvProxWorkspace};

/// A nonsmooth term whose Moreau-Yosida envelope is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeTerm {
    /// `gamma ||grad x||_{1,1}`; prox via the primal-dual inner solver.
    Tv { gamma: f64 },
    /// `i_C(x)`; prox is the exact projection.
    Indicator(Constraint),
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!(
            "envelope parameter must be positive, got {alpha}"
        )));
    }
    Ok(())
}

fn prox(x: &Image, term: EnvelopeTerm, alpha: f64, inner_iters: usize) -> Result<Vec<f64>> {
    match term {
        EnvelopeTerm::Tv { gamma } => {
            let settings = PdSettings::new(inner_iters);
            settings.validate()?;
            let mut ws = TvProxWorkspace::new(x.height(), x.width());
            let mut out = vec![0.0; x.len()];
            ws.solve(x.data(), gamma, alpha, &settings, &mut out);
            Ok(out)
        }
        EnvelopeTerm::Indicator(c) => {
            let mut out = x.data().to_vec();
            c.project_in_place(&mut out);
            Ok(out)
        }
    }
}

/// `grad g_alpha(x) = (x - prox_g^alpha(x)) / alpha`.
pub fn moreau_envelope_grad(
    x: &Image,
    term: EnvelopeTerm,
    alpha: f64,
    inner_iters: usize,
) -> Result<Image> {
    check_alpha(alpha)?;
    let p = prox(x, term, alpha, inner_iters)?;
    let g = x
        .data()
        .iter()
        .zip(&p)
        .map(|(xi, pi)| (xi - pi) / alpha)
        .collect();
    x.with_data(g)
}

/// `g_alpha(x) = g(prox(x)) + ||x - prox(x)||^2 / (2 alpha)`.
pub fn moreau_envelope_value(
    x: &Image,
    term: EnvelopeTerm,
    alpha: f64,
    inner_iters: usize,
) -> Result<f64> {
    check_alpha(alpha)?;
    let p = prox(x, term, alpha, inner_iters)?;
    let dist_sq: f64 = x.data().iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum();
    let g = match term {
        EnvelopeTerm::Tv { gamma } => gamma * tv_norm_raw(&GradientOperator::for_image(x), &p),
        EnvelopeTerm::Indicator(_) => 0.0,
    };
    Ok(g + dist_sq / (2.0 * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vector, RngStream};

    fn random_image(seed: u64, h: usize, w: usize, std: f64) -> Image {
        Image::new(h, w, gaussian_vector(&mut RngStream::new(seed, 0), h * w, std).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_gradient_cases() {
        let inside = Image::from_fn(4, 4, |r, c| (r * 4 + c) as f64 / 15.0);
        let g = moreau_envelope_grad(&inside, EnvelopeTerm::Indicator(Constraint::Box), 0.1, 1)
            .unwrap();
        assert!(g.data().iter().all(|v| *v == 0.0));

        let flat = Image::filled(4, 4, 0.7);
        let g = moreau_envelope_grad(&flat, EnvelopeTerm::Tv { gamma: 3.0 }, 0.1, 50).unwrap();
        assert!(g.data().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn indicator_envelope_is_half_squared_distance() {
        let x = Image::new(1, 3, vec![-0.5, 0.3, 1.7]).unwrap();
        let v = moreau_envelope_value(&x, EnvelopeTerm::Indicator(Constraint::Box), 0.5, 1)
            .unwrap();
        assert!((v - (0.25 + 0.49) / 1.0).abs() < 1e-14);
    }

    #[test]
    fn value_nonincreasing_in_alpha() {
        let x = random_image(4, 6, 6, 1.0);
        for term in [
            EnvelopeTerm::Tv { gamma: 0.8 },
            EnvelopeTerm::Indicator(Constraint::Box),
        ] {
            let mut last = f64::INFINITY;
            for alpha in [0.01, 0.03, 0.1, 0.3, 1.0, 3.0] {
                let v = moreau_envelope_value(&x, term, alpha, 5000).unwrap();
                assert!(v <= last + 1e-9, "{term:?} alpha={alpha}: {v} > {last}");
                last = v;
            }
        }
    }

    #[test]
    fn gradient_is_inverse_alpha_lipschitz() {
        let alpha = 0.2;
        for term in [
            EnvelopeTerm::Tv { gamma: 1.3 },
            EnvelopeTerm::Indicator(Constraint::Nonnegative),
        ] {
            for seed in 0..8 {
                let a = random_image(seed, 5, 5, 1.0);
                let b = random_image(seed + 30, 5, 5, 1.0);
                let ga = moreau_envelope_grad(&a, term, alpha, 3000).unwrap();
                let gb = moreau_envelope_grad(&b, term, alpha, 3000).unwrap();
                let dg: f64 = ga.data().iter().zip(gb.data()).map(|(x, y)| (x - y).powi(2)).sum();
                let dx: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum();
                assert!(dg.sqrt() <= dx.sqrt() / alpha + 1e-6);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let x = Image::filled(2, 2, 0.0);
        assert!(moreau_envelope_grad(&x, EnvelopeTerm::Tv { gamma: 1.0 }, 0.0, 5).is_err());
    }
}
