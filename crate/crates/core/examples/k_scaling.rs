//! Times training epochs for several filter orders on one graph.
//!
//! Run with `cargo run --release --example k_scaling`.

use newtonnet::csbm::{generate, CsbmConfig};
use newtonnet::experiments::{bench_k_scaling, BenchKConfig};
use newtonnet::graph::random_split;

fn main() -> newtonnet::Result<()> {
    let g = generate(&CsbmConfig::new(1000, 100, 0.8, 5))?;
    let split = random_split(g.num_nodes(), (0.6, 0.2, 0.2), 0)?;
    let cfg = BenchKConfig { ks: vec![1, 2, 5, 10, 16], epochs: 10, ..BenchKConfig::default() };
    let report = bench_k_scaling(&g, &split, &cfg)?;
    let base = report.rows.iter().find(|r| r.k == 5).map(|r| r.median_epoch_seconds);
    for row in &report.rows {
        let ratio = base.map_or(String::new(), |b| format!(" ({:.2}x K=5)", row.median_epoch_seconds / b));
        println!("K = {:2}: {:.2} ms/epoch{ratio}", row.k, 1e3 * row.median_epoch_seconds);
    }
    Ok(())
}
