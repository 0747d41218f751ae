//! Hierarchical model: the noise precision and the TV weight get Gamma
//! hyperpriors and are sampled together with the image.

use imaging_uq::diagnostics::acf_series;
use imaging_uq::image::phantom;
use imaging_uq::ops::{degrade, BlurOperator, Kernel};
use imaging_uq::regularizers::{Constraint, PriorSpec};
use imaging_uq::rng::RngStream;
use imaging_uq::samplers::{gibbs_sample, GibbsSettings};

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

fn main() -> imaging_uq::Result<()> {
    let truth = phantom(32, 32);
    let op = BlurOperator::new(Kernel::uniform(5)?, 32, 32)?;
    // true precision 1000
    let obs = degrade(&op, &truth, 1000f64.sqrt().recip(), &mut RngStream::new(11, 1 << 50))?;
    // the weight given here only seeds the chain
    let prior = PriorSpec::new(1.0, Constraint::Nonnegative, 1e-8)?;

    let mut settings = GibbsSettings::new(300, 1);
    settings.admm.rho = 100.0;
    let chain = gibbs_sample(&obs, &op, &prior, &settings)?;
    let burn = 50;
    let lambda = &chain.trace("lambda").unwrap()[burn..];
    let gamma = &chain.trace("gamma").unwrap()[burn..];
    let (lm, ls) = mean_std(lambda);
    let (gm, gs) = mean_std(gamma);
    println!("lambda: {lm:.1} ({ls:.1})   true value 1000");
    println!("gamma:  {gm:.3} ({gs:.3})");
    println!("gamma trace lag-10 ACF {:.3}", acf_series(gamma, 10)?[10]);
    Ok(())
}
