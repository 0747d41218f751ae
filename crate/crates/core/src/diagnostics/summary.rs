use crate::chain::SampleChain;
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryImages {
    /// Sample mean.
    pub mmse: Image,
    /// Per-pixel sample standard deviation (denominator `N - 1`, zero for
    /// a single sample).
    pub std: Image,
    /// `||x_i - mmse|| / ||mmse||` per sample.
    pub rel_err: Vec<f64>,
}

pub fn summarize(chain: &SampleChain) -> Result<SummaryImages> {
    summarize_images(chain.samples())
}

pub fn summarize_images(samples: &[Image]) -> Result<SummaryImages> {
    let first = samples
        .first()
        .ok_or_else(|| Error::param("cannot summarize an empty chain"))?;
    let (h, w) = first.shape();
    let d = h * w;
    let n = samples.len();
    // accumulate around the first sample: exact for repeated samples
    let base = first.data();
    let mut shift = vec![0.0; d];
    for s in samples {
        s.same_shape(first)?;
        for ((m, v), b) in shift.iter_mut().zip(s.data()).zip(base) {
            *m += v - b;
        }
    }
    shift.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    if n > 1 {
        for s in samples {
            for (i, acc) in var.iter_mut().enumerate() {
                *acc += (s.data()[i] - base[i] - shift[i]).powi(2);
            }
        }
        var.iter_mut().for_each(|v| *v /= (n - 1) as f64);
    }
    let mean: Vec<f64> = base.iter().zip(&shift).map(|(b, m)| b + m).collect();
    let mean_norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rel_err = samples
        .iter()
        .map(|s| {
            let diff = s
                .data()
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            if mean_norm == 0.0 {
                if diff == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                diff / mean_norm
            }
        })
        .collect();
    Ok(SummaryImages {
        mmse: Image::new(h, w, mean)?,
        std: Image::new(h, w, var.into_iter().map(f64::sqrt).collect())?,
        rel_err,
    })
}
