//! Flat `key = value` experiment configuration with named presets.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::diagnostics::Basis;
use crate::error::{Error, Result};
use crate::regularizers::{Constraint, PriorSpec};
use crate::samplers::Hyperpriors;
use crate::solvers::{AdmmSettings, XUpdateMode};

pub const ENV_SEED: &str = "BISC_SEED";
pub const ENV_WORKERS: &str = "BISC_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Deblur,
    Inpaint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Rto,
    Myula,
    Gibbs,
}

/// A fully resolved experiment. Every field has a value; [`Self::to_conf`]
/// writes all of them so the echo re-parses to the same configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// Image path (PGM) or `synthetic:phantom`.
    pub image: String,
    /// Center crop to `crop x crop`; 0 keeps the full image.
    pub crop: usize,
    /// `uniform:K` or a kernel text file.
    pub kernel: String,
    /// Mask PGM (pixel > 0.5 observed) or `synthetic:blocks`.
    pub mask: String,
    pub sigma: f64,
    pub seed: u64,
    pub workers: usize,
    pub sampler: SamplerKind,
    pub prior: PriorSpec,
    pub admm: AdmmSettings,
    pub pd_n_iters: usize,
    pub rto_n_samples: usize,
    pub myula_total_iters: usize,
    pub myula_burn_in: usize,
    pub myula_thinning: usize,
    /// `None` derives the value from `||A^T A||` and sigma.
    pub myula_delta: Option<f64>,
    pub myula_alpha1: Option<f64>,
    pub myula_alpha2: Option<f64>,
    pub gibbs_n_samples: usize,
    pub hyper: Hyperpriors,
    pub diag_basis: Basis,
    pub diag_directions: usize,
    pub diag_max_lag: usize,
    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Deblur,
            image: "synthetic:phantom".into(),
            crop: 0,
            kernel: "uniform:9".into(),
            mask: "synthetic:blocks".into(),
            sigma: 0.001f64.sqrt(),
            seed: 1,
            workers: 1,
            sampler: SamplerKind::Rto,
            prior: PriorSpec {
                gamma: 5.0,
                constraint: Constraint::Box,
                alpha: 1e-8,
            },
            admm: AdmmSettings {
                rho: 100.0,
                ..AdmmSettings::default()
            },
            pd_n_iters: 50,
            rto_n_samples: 1000,
            myula_total_iters: 1_000_000,
            myula_burn_in: 25_000,
            myula_thinning: 250,
            myula_delta: None,
            myula_alpha1: None,
            myula_alpha2: None,
            gibbs_n_samples: 1000,
            hyper: Hyperpriors::default(),
            diag_basis: Basis::Fourier,
            diag_directions: 8,
            diag_max_lag: 50,
            out: "out".into(),
        }
    }
}

const PRESETS: &[(&str, &str)] = &[
    ("deblur-rto", include_str!("../../presets/deblur-rto.conf")),
    ("deblur-myula", include_str!("../../presets/deblur-myula.conf")),
    ("inpaint-rto", include_str!("../../presets/inpaint-rto.conf")),
    ("inpaint-myula", include_str!("../../presets/inpaint-myula.conf")),
    ("gibbs", include_str!("../../presets/gibbs.conf")),
    ("deblur-rto-64", include_str!("../../presets/deblur-rto-64.conf")),
    ("deblur-myula-64", include_str!("../../presets/deblur-myula-64.conf")),
    ("inpaint-rto-64", include_str!("../../presets/inpaint-rto-64.conf")),
    ("inpaint-myula-64", include_str!("../../presets/inpaint-myula-64.conf")),
    ("gibbs-64", include_str!("../../presets/gibbs-64.conf")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}' (available: {})",
                preset_names().collect::<Vec<_>>().join(", ")
            ))
        })
}

/// `key = value` pairs in file order. Blank lines and `#` comments are
/// skipped; a repeated key is an error.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", no + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", no + 1)));
        }
        if seen.insert(k.clone(), no + 1).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{k}'", no + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true/false, got '{v}'"))),
    }
}

fn auto_num(key: &str, v: &str) -> Result<Option<f64>> {
    if v == "auto" {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

fn show_auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deblur" => Ok(Problem::Deblur),
            "inpaint" => Ok(Problem::Inpaint),
            _ => Err(Error::Config(format!("unknown problem '{s}' (deblur|inpaint)"))),
        }
    }
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Deblur => "deblur",
            Problem::Inpaint => "inpaint",
        }
    }
}

impl FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rto" => Ok(SamplerKind::Rto),
            "myula" => Ok(SamplerKind::Myula),
            "gibbs" => Ok(SamplerKind::Gibbs),
            _ => Err(Error::Config(format!("unknown sampler '{s}' (rto|myula|gibbs)"))),
        }
    }
}

impl SamplerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Rto => "rto",
            SamplerKind::Myula => "myula",
            SamplerKind::Gibbs => "gibbs",
        }
    }
}

fn parse_x_update(v: &str) -> Result<XUpdateMode> {
    match v {
        "auto" => Ok(XUpdateMode::Auto),
        "fourier" => Ok(XUpdateMode::Fourier),
        "cg" => Ok(XUpdateMode::ConjugateGradient),
        _ => Err(Error::Config(format!("admm.x_update: expected auto|fourier|cg, got '{v}'"))),
    }
}

fn show_x_update(m: XUpdateMode) -> &'static str {
    match m {
        XUpdateMode::Auto => "auto",
        XUpdateMode::Fourier => "fourier",
        XUpdateMode::ConjugateGradient => "cg",
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        Self::parse(preset_text(name)?)
    }

    /// Parses a config text. A `preset = NAME` line (anywhere) supplies the
    /// base values; every other key overrides it.
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let mut cfg = match pairs.iter().find(|(k, _)| k == "preset") {
            Some((_, name)) => Self::preset(name)?,
            None => Self::default(),
        };
        for (k, v) in pairs.iter().filter(|(k, _)| k != "preset") {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "problem" => self.problem = v.parse()?,
            "image" => self.image = v.to_string(),
            "crop" => self.crop = num(key, v)?,
            "kernel" => self.kernel = v.to_string(),
            "mask" => self.mask = v.to_string(),
            "sigma" => self.sigma = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "workers" => self.workers = num(key, v)?,
            "sampler" => self.sampler = v.parse()?,
            "prior.gamma" => self.prior.gamma = num(key, v)?,
            "prior.constraint" => self.prior.constraint = v.parse()?,
            "prior.alpha" => self.prior.alpha = num(key, v)?,
            "admm.rho" => self.admm.rho = num(key, v)?,
            "admm.tol" => {
                let t = num(key, v)?;
                self.admm.tol_primal = t;
                self.admm.tol_dual = t;
            }
            "admm.maxiter" => self.admm.max_iter = num(key, v)?,
            "admm.primal_only" => self.admm.primal_only = flag(key, v)?,
            "admm.x_update" => self.admm.x_update = parse_x_update(v)?,
            "admm.cg_tol" => self.admm.cg_tol = num(key, v)?,
            "admm.cg_maxiter" => self.admm.cg_max_iter = num(key, v)?,
            "admm.residual_balancing" => self.admm.residual_balancing = flag(key, v)?,
            "pd.n_iters" => self.pd_n_iters = num(key, v)?,
            "rto.n_samples" => self.rto_n_samples = num(key, v)?,
            "myula.total_iters" => self.myula_total_iters = num(key, v)?,
            "myula.burn_in" => self.myula_burn_in = num(key, v)?,
            "myula.thinning" => self.myula_thinning = num(key, v)?,
            "myula.delta" => self.myula_delta = auto_num(key, v)?,
            "myula.alpha1" => self.myula_alpha1 = auto_num(key, v)?,
            "myula.alpha2" => self.myula_alpha2 = auto_num(key, v)?,
            "gibbs.n_samples" => self.gibbs_n_samples = num(key, v)?,
            "gibbs.a_lambda" => self.hyper.a_lambda = num(key, v)?,
            "gibbs.b_lambda" => self.hyper.b_lambda = num(key, v)?,
            "gibbs.a_gamma" => self.hyper.a_gamma = num(key, v)?,
            "gibbs.b_gamma" => self.hyper.b_gamma = num(key, v)?,
            "diag.basis" => self.diag_basis = v.parse()?,
            "diag.directions" => self.diag_directions = num(key, v)?,
            "diag.max_lag" => self.diag_max_lag = num(key, v)?,
            "out" => self.out = v.to_string(),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `BISC_SEED` / `BISC_WORKERS` from the environment.
    pub fn apply_env(&mut self) -> Result<()> {
        self.apply_overrides(
            std::env::var(ENV_SEED).ok().as_deref(),
            std::env::var(ENV_WORKERS).ok().as_deref(),
        )
    }

    pub fn apply_overrides(&mut self, seed: Option<&str>, workers: Option<&str>) -> Result<()> {
        if let Some(s) = seed {
            self.seed = num(ENV_SEED, s.trim())?;
        }
        if let Some(w) = workers {
            self.workers = num(ENV_WORKERS, w.trim())?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        self.admm.validate()?;
        self.hyper.validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.pd_n_iters == 0 || self.rto_n_samples == 0 || self.gibbs_n_samples == 0 {
            return Err(Error::Config("iteration and sample counts must be positive".into()));
        }
        if self.myula_thinning == 0 || self.myula_burn_in >= self.myula_total_iters {
            return Err(Error::Config(
                "myula needs thinning >= 1 and burn_in < total_iters".into(),
            ));
        }
        if self.diag_max_lag == 0 {
            return Err(Error::Config("diag.max_lag must be positive".into()));
        }
        Ok(())
    }

    /// Every key with its resolved value.
    pub fn to_conf(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("problem", self.problem.as_str().into());
        put("image", self.image.clone());
        put("crop", self.crop.to_string());
        put("kernel", self.kernel.clone());
        put("mask", self.mask.clone());
        put("sigma", self.sigma.to_string());
        put("seed", self.seed.to_string());
        put("workers", self.workers.to_string());
        put("sampler", self.sampler.as_str().into());
        put("prior.gamma", self.prior.gamma.to_string());
        put("prior.constraint", self.prior.constraint.to_string());
        put("prior.alpha", self.prior.alpha.to_string());
        put("admm.rho", self.admm.rho.to_string());
        put("admm.tol", self.admm.tol_primal.to_string());
        put("admm.maxiter", self.admm.max_iter.to_string());
        put("admm.primal_only", self.admm.primal_only.to_string());
        put("admm.x_update", show_x_update(self.admm.x_update).into());
        put("admm.cg_tol", self.admm.cg_tol.to_string());
        put("admm.cg_maxiter", self.admm.cg_max_iter.to_string());
        put("admm.residual_balancing", self.admm.residual_balancing.to_string());
        put("pd.n_iters", self.pd_n_iters.to_string());
        put("rto.n_samples", self.rto_n_samples.to_string());
        put("myula.total_iters", self.myula_total_iters.to_string());
        put("myula.burn_in", self.myula_burn_in.to_string());
        put("myula.thinning", self.myula_thinning.to_string());
        put("myula.delta", show_auto(self.myula_delta));
        put("myula.alpha1", show_auto(self.myula_alpha1));
        put("myula.alpha2", show_auto(self.myula_alpha2));
        put("gibbs.n_samples", self.gibbs_n_samples.to_string());
        put("gibbs.a_lambda", self.hyper.a_lambda.to_string());
        put("gibbs.b_lambda", self.hyper.b_lambda.to_string());
        put("gibbs.a_gamma", self.hyper.a_gamma.to_string());
        put("gibbs.b_gamma", self.hyper.b_gamma.to_string());
        put("diag.basis", self.diag_basis.to_string());
        put("diag.directions", self.diag_directions.to_string());
        put("diag.max_lag", self.diag_max_lag.to_string());
        put("out", self.out.clone());
        s
    }
}
