//! Trains NewtonNet on a homophilous and a heterophilous CSBM graph and
//! prints the learned filter next to a plain-MLP baseline.
//!
//! Run with `cargo run --release --example train_newtonnet`.

use newtonnet::csbm::{generate, CsbmConfig};
use newtonnet::filter::{equal_spaced_nodes, FilterExport};
use newtonnet::graph::random_split;
use newtonnet::model::{train, TrainConfig};

fn main() -> newtonnet::Result<()> {
    for h in [0.9, 0.1] {
        let g = generate(&CsbmConfig::new(300, 200, h, 11))?;
        let split = random_split(g.num_nodes(), (0.6, 0.2, 0.2), 0)?;

        let cfg = TrainConfig { max_epochs: 500, patience: 100, ..TrainConfig::default() };
        let (params, report) = train(&g, &split, &cfg)?;
        let (_, baseline) = train(&g, &split, &cfg.clone().mlp_baseline())?;

        println!("h = {h}: graph homophily {:.3}", g.homophily()?);
        println!(
            "  NewtonNet test {:.3} (best epoch {}, learned h {:.3}), MLP test {:.3}",
            report.test_accuracy,
            report.best_epoch,
            report.learned_h[report.best_epoch],
            baseline.test_accuracy
        );
        let filter = FilterExport::new(&equal_spaced_nodes(cfg.k)?, &params.t)?;
        let curve: Vec<String> =
            filter.sample_curve(5)?.iter().map(|(l, v)| format!("g({l:.1})={v:.2}")).collect();
        println!("  learned filter: {}", curve.join(" "));
    }
    Ok(())
}
