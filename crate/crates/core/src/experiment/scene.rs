//! Turning a config into a ground-truth image, a forward operator and an
//! observation.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Problem};
use crate::error::{Error, Result};
use crate::image::{phantom, Image};
use crate::ops::{degrade, BlurOperator, Kernel, LinearOperator, MaskOperator, Observation, SharedOperator};
use crate::rng::RngStream;

/// RNG stream reserved for the observation noise, far away from the
/// per-sample streams used by the samplers.
pub const DEGRADE_STREAM: u64 = 1 << 50;

/// Side length of `synthetic:phantom` when no crop is given.
pub const PHANTOM_SIZE: usize = 256;

pub struct Scene {
    pub truth: Image,
    pub op: SharedOperator,
    /// Pixels the operator does not see (empty for blur).
    pub unobserved: Vec<usize>,
}

/// `synthetic:phantom` renders the built-in scene at `crop x crop` (or
/// 256x256); anything else is a PGM path, center-cropped when `crop > 0`.
pub fn load_image(spec: &str, crop: usize) -> Result<Image> {
    if spec == "synthetic:phantom" {
        let n = if crop > 0 { crop } else { PHANTOM_SIZE };
        return Ok(phantom(n, n));
    }
    let img = Image::read_pgm(spec)?;
    if crop > 0 {
        img.center_crop(crop, crop)
    } else {
        Ok(img)
    }
}

pub fn load_kernel(spec: &str) -> Result<Kernel> {
    match spec.strip_prefix("uniform:") {
        Some(k) => Kernel::uniform(
            k.parse()
                .map_err(|_| Error::Config(format!("bad uniform kernel size '{k}'")))?,
        ),
        None => Kernel::read(spec),
    }
}

/// Deterministic pattern of rectangular holes covering about 10.5% of the
/// image.
pub fn synthetic_blocks_mask(height: usize, width: usize) -> Image {
    const HOLES: [(f64, f64, f64, f64); 5] = [
        (0.10, 0.20, 0.60, 0.80),
        (0.55, 0.70, 0.15, 0.30),
        (0.40, 0.45, 0.30, 0.90),
        (0.80, 0.90, 0.45, 0.60),
        (0.10, 0.70, 0.88, 0.91),
    ];
    Image::from_fn(height, width, |r, c| {
        let (y, x) = (r as f64 / height as f64, c as f64 / width as f64);
        let hole = HOLES
            .iter()
            .any(|&(y0, y1, x0, x1)| (y0..y1).contains(&y) && (x0..x1).contains(&x));
        if hole { 0.0 } else { 1.0 }
    })
}

pub fn load_mask(spec: &str, height: usize, width: usize) -> Result<MaskOperator> {
    let img = if spec == "synthetic:blocks" {
        synthetic_blocks_mask(height, width)
    } else {
        let m = Image::read_pgm(spec)?;
        if m.shape() == (height, width) {
            m
        } else {
            m.center_crop(height, width)?
        }
    };
    MaskOperator::from_mask_image(&img)
}

pub fn build_operator(cfg: &ExperimentConfig, height: usize, width: usize) -> Result<(SharedOperator, Vec<usize>)> {
    match cfg.problem {
        Problem::Deblur => {
            let op = BlurOperator::new(load_kernel(&cfg.kernel)?, height, width)?;
            Ok((Arc::new(op), Vec::new()))
        }
        Problem::Inpaint => {
            let op = load_mask(&cfg.mask, height, width)?;
            let mut seen = vec![false; height * width];
            op.keep_indices().iter().for_each(|&i| seen[i] = true);
            let hidden = (0..height * width).filter(|&i| !seen[i]).collect();
            Ok((Arc::new(op), hidden))
        }
    }
}

pub fn build_scene(cfg: &ExperimentConfig) -> Result<Scene> {
    let truth = load_image(&cfg.image, cfg.crop)?;
    let (op, unobserved) = build_operator(cfg, truth.height(), truth.width())?;
    Ok(Scene {
        truth,
        op,
        unobserved,
    })
}

pub fn observe(cfg: &ExperimentConfig, scene: &Scene) -> Result<Observation> {
    degrade(
        scene.op.as_ref(),
        &scene.truth,
        cfg.sigma,
        &mut RngStream::new(cfg.seed, DEGRADE_STREAM),
    )
}

/// Image-space view of the data: `y` itself for blur, `A^T y` for a mask.
pub fn observation_image(obs: &Observation, op: &dyn LinearOperator) -> Result<Image> {
    crate::samplers::initial_guess(obs, op)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationFile {
    pub height: usize,
    pub width: usize,
    pub noise_std: f64,
    pub operator_id: String,
    pub values: Vec<f64>,
}

pub fn save_observation(path: impl AsRef<Path>, obs: &Observation, op: &dyn LinearOperator) -> Result<()> {
    let path = path.as_ref();
    let (height, width) = op.image_shape();
    let file = ObservationFile {
        height,
        width,
        noise_std: obs.noise_std,
        operator_id: obs.operator_id.clone(),
        values: obs.values.clone(),
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_observation(path: impl AsRef<Path>) -> Result<ObservationFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

impl ObservationFile {
    /// Checks the file against `op` and returns the observation.
    pub fn bind(&self, op: &dyn LinearOperator) -> Result<Observation> {
        if op.image_shape() != (self.height, self.width) {
            return Err(Error::Config(format!(
                "observation is for a {}x{} image, config gives {:?}",
                self.height,
                self.width,
                op.image_shape()
            )));
        }
        if op.id() != self.operator_id {
            return Err(Error::Config(format!(
                "observation was made with operator '{}', config builds '{}'",
                self.operator_id,
                op.id()
            )));
        }
        Observation::new(self.values.clone(), self.noise_std, op)
    }
}
