//! A reduced frequency-importance sweep: for each homophily level, train
//! under every band filter of a coarse amplitude grid and average the
//! amplitudes of the best filters per band.
//!
//! Run with `cargo run --release --example frequency_importance`.

use newtonnet::experiments::{frequency_importance_sweep, ImportanceSweepConfig};

fn main() -> newtonnet::Result<()> {
    let cfg = ImportanceSweepConfig {
        h_grid: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
        amplitudes: vec![0.0, 1.0, 2.0],
        top_fraction: 0.15,
        n: 200,
        f: 100,
        split: [0.05, 0.05, 0.9],
        epochs: 100,
        ..ImportanceSweepConfig::default()
    };
    let report = frequency_importance_sweep(&cfg)?;
    print!("{}", report.to_csv());
    println!(
        "spearman(I_low, h) = {:?}, spearman(I_high, h) = {:?}, crossover at h = {:?}",
        report.spearman_low, report.spearman_high, report.crossover
    );
    Ok(())
}
