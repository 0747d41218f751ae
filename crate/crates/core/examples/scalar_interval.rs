//! One-dimensional example: a Gaussian likelihood restricted to an interval.
//!
//! The truncated posterior, its Moreau-Yosida smoothed surrogate and the
//! density implied by RTO (which puts point masses on both ends) are
//! compared, and the atoms are checked against RTO draws.

use imaging_uq::scalar_demo::{density_grid, rto_interval_density, rto_interval_draws, IntervalModel};

fn main() -> imaging_uq::Result<()> {
    let model = IntervalModel::default();
    let rto = rto_interval_density(&model)?;
    println!(
        "a={} b={} y={} sigma={}: atoms P(x=a) = {:.5}, P(x=b) = {:.5}",
        model.a, model.b, model.y, model.sigma, rto.atom_a, rto.atom_b
    );

    let n = 100_000;
    let draws = rto_interval_draws(&model, n, 1, 4)?;
    let at = |v: f64| draws.iter().filter(|x| **x == v).count() as f64 / n as f64;
    println!("empirical from {n} draws: {:.5}, {:.5}", at(model.a), at(model.b));

    println!("{:>6} {:>10} {:>10} {:>10}", "x", "truncated", "smoothed", "rto");
    for row in density_grid(&model, 1e-2, 13)? {
        println!("{:>6.3} {:>10.4} {:>10.4} {:>10.4}", row.x, row.truncated, row.smoothed, row.rto_continuous);
    }
    Ok(())
}
