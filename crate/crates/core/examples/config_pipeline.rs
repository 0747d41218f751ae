//! Config-driven runs: start from a built-in preset, override a few keys and
//! run the whole degrade, MAP, sample, diagnose pipeline into a directory.

use imaging_uq::experiment::{preset_names, run_experiment, ExperimentConfig};

fn main() -> imaging_uq::Result<()> {
    println!("presets: {}", preset_names().collect::<Vec<_>>().join(", "));
    let mut cfg = ExperimentConfig::preset("deblur-rto-64")?;
    for (k, v) in [("crop", "32"), ("rto.n_samples", "60"), ("diag.max_lag", "5")] {
        cfg.set(k, v)?;
    }
    cfg.apply_env()?;
    cfg.out = std::env::temp_dir().join("imaging-uq-pipeline").to_string_lossy().into_owned();

    let report = run_experiment(&cfg)?;
    for m in &report.metrics {
        println!("{:<12} PSNR {:6.2} dB  SSIM {:.3}", m.artifact, m.psnr, m.ssim);
    }
    for (stage, secs) in &report.timings {
        println!("{stage:<12} {secs:.2} s");
    }
    println!("outputs in {}", report.out_dir.display());
    Ok(())
}
