use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use imaging_uq::diagnostics::Basis;
use imaging_uq::experiment::{
    build_operator, build_scene, compare_runs, diagnose, image_chain, observation_image, observe,
    projector_for, run_experiment, run_sampler, save_observation, write_demo1d, ExperimentConfig,
    SamplerKind,
};
use imaging_uq::samplers::map_estimate;
use imaging_uq::scalar_demo::IntervalModel;
use imaging_uq::{chain::SampleChain, Error, Image, Result};

#[derive(Parser)]
#[command(name = "imaging-uq", version, about = "Posterior sampling for TV-regularized imaging problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Built-in preset (see `--list-presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    list_presets: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the test image and write the noisy observation.
    Degrade(ConfigArgs),
    /// Degrade, then compute the MAP estimate.
    Map(ConfigArgs),
    /// Draw an RTO chain.
    Rto(ConfigArgs),
    /// Draw a MYULA chain.
    Myula(ConfigArgs),
    /// Run the hierarchical Gibbs sampler.
    Gibbs(ConfigArgs),
    /// Full pipeline: degrade, MAP, sampler, diagnostics.
    Run(ConfigArgs),
    /// Summaries, ACF and metrics for an existing chain file.
    Diagnose(DiagnoseArgs),
    /// Scalar interval example: densities and RTO atom masses as CSV.
    Demo1d(Demo1dArgs),
    /// PSNR/SSIM of MAP and both MMSE estimates from two run directories.
    Compare(CompareArgs),
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    chain: PathBuf,
    /// Reference image (PGM) for metrics.csv.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Config used to rebuild the operator for Fourier or pixel directions.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "fourier")]
    basis: Basis,
    #[arg(long, default_value_t = 8)]
    directions: usize,
    #[arg(long, default_value_t = 50)]
    max_lag: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Demo1dArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    y: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1e-2)]
    alpha: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directory whose map.bisc is reported.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Reference image; defaults to truth.pgm in the first directory.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn resolve(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(p), _) => ExperimentConfig::preset(p)?,
        (None, Some(path)) => ExperimentConfig::load(path)?,
        (None, None) => ExperimentConfig::default(),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {kv:?} is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.apply_env()?;
    cfg.apply_overrides(args.seed.as_deref(), args.workers.as_deref())?;
    if let Some(out) = &args.out {
        cfg.out = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn prepare_out(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.out);
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    write_text(&dir.join("resolved.conf"), &cfg.to_conf())?;
    Ok(dir)
}

fn staged(cmd: Command) -> Result<()> {
    match cmd {
        Command::Degrade(a) | Command::Map(a) | Command::Rto(a) | Command::Myula(a) | Command::Gibbs(a)
        | Command::Run(a)
            if a.list_presets =>
        {
            for name in imaging_uq::experiment::preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run(a) => {
            let cfg = resolve(&a)?;
            let report = run_experiment(&cfg)?;
            for m in &report.metrics {
                println!("{:<12} psnr {:>8.3} dB  ssim {:.4}", m.artifact, m.psnr, m.ssim);
            }
            println!("wrote {}", report.out_dir.display());
            Ok(())
        }
        Command::Degrade(a) => {
            let cfg = resolve(&a)?;
            let dir = prepare_out(&cfg)?;
            let scene = build_scene(&cfg).map_err(|e| e.within("forward-ops"))?;
            let obs = observe(&cfg, &scene).map_err(|e| e.within("forward-ops"))?;
            save_observation(dir.join("observation.json"), &obs, scene.op.as_ref())?;
            scene.truth.write_pgm(dir.join("truth.pgm"), 65535)?;
            observation_image(&obs, scene.op.as_ref())?.write_pgm(dir.join("observed.pgm"), 65535)?;
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Map(a) => {
            let cfg = resolve(&a)?;
            let dir = prepare_out(&cfg)?;
            let scene = build_scene(&cfg).map_err(|e| e.within("forward-ops"))?;
            let obs = observe(&cfg, &scene).map_err(|e| e.within("forward-ops"))?;
            let (map, stats) = map_estimate(&obs, scene.op.as_ref(), &cfg.prior, &cfg.admm)
                .map_err(|e| e.within("solvers"))?;
            map.write_pgm(dir.join("map.pgm"), 65535)?;
            image_chain(&map, "map", cfg.seed)?.save(dir.join("map.bisc"))?;
            println!(
                "ADMM: {} iterations, converged {}, objective {:.6e}",
                stats.iterations, stats.converged, stats.objective
            );
            Ok(())
        }
        Command::Rto(a) => sample(a, SamplerKind::Rto),
        Command::Myula(a) => sample(a, SamplerKind::Myula),
        Command::Gibbs(a) => sample(a, SamplerKind::Gibbs),
        Command::Diagnose(a) => {
            let chain = SampleChain::load(&a.chain)?;
            let reference = a.reference.as_ref().map(Image::read_pgm).transpose()?;
            let (h, w) = (chain.height(), chain.width());
            let (op, unobserved) = match &a.config {
                Some(path) => {
                    let cfg = ExperimentConfig::load(path)?;
                    let (op, un) = build_operator(&cfg, h, w).map_err(|e| e.within("forward-ops"))?;
                    (Some(op), un)
                }
                None => (None, Vec::new()),
            };
            let projector = match &op {
                Some(op) => projector_for(a.basis, op.as_ref(), &unobserved, a.directions),
                None if a.basis == Basis::Fourier => {
                    imaging_uq::diagnostics::Projector::fourier(h, w, None, a.directions)
                }
                None => imaging_uq::diagnostics::Projector::pixel(h, w, &[], a.directions),
            }
            .map_err(|e| e.within("diagnostics"))?;
            diagnose(&chain, reference.as_ref(), Vec::new(), &projector, a.max_lag, &a.out)
                .map_err(|e| e.within("diagnostics"))?;
            println!("wrote {}", a.out.display());
            Ok(())
        }
        Command::Demo1d(a) => {
            let model = IntervalModel::new(a.a, a.b, a.y, a.sigma).map_err(|e| e.within("scalar-demo"))?;
            write_demo1d(&model, a.alpha, a.points, &a.out).map_err(|e| e.within("scalar-demo"))?;
            println!("wrote {}", a.out.display());
            Ok(())
        }
        Command::Compare(a) => {
            let reference = Image::read_pgm(a.reference.unwrap_or_else(|| a.a.join("truth.pgm")))?;
            let rows = compare_runs(&a.a, &a.b, &reference, &a.out).map_err(|e| e.within("cli"))?;
            for m in rows {
                println!("{:<14} psnr {:>8.3} dB  ssim {:.4}", m.artifact, m.psnr, m.ssim);
            }
            Ok(())
        }
    }
}

fn sample(args: ConfigArgs, kind: SamplerKind) -> Result<()> {
    let mut cfg = resolve(&args)?;
    cfg.sampler = kind;
    cfg.validate()?;
    let dir = prepare_out(&cfg)?;
    let scene = build_scene(&cfg).map_err(|e| e.within("forward-ops"))?;
    let obs = observe(&cfg, &scene).map_err(|e| e.within("forward-ops"))?;
    let (chain, _) = run_sampler(&cfg, &obs, scene.op.as_ref(), None).map_err(|e| e.within("samplers"))?;
    chain.save(dir.join("chain.bisc"))?;
    println!("{} samples written to {}", chain.len(), dir.join("chain.bisc").display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match staged(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let e = match e {
                Error::Context { .. } => e,
                other => other.within("cli"),
            };
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
