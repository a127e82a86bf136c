//! Samples CSBM graphs across the homophily range and reports how close
//! the realized edge homophily lands to the target.
//!
//! Run with `cargo run --example csbm_homophily`.

use newtonnet::csbm::{generate, CsbmConfig};

fn main() -> newtonnet::Result<()> {
    println!("{:>5} {:>9} {:>7} {:>7}", "h", "realized", "edges", "p_in/p_out");
    for i in 1..=9 {
        let h = i as f64 / 10.0;
        let cfg = CsbmConfig::new(500, 16, h, i);
        let g = generate(&cfg)?;
        let (p_in, p_out) = cfg.edge_probabilities();
        println!("{h:5.1} {:9.4} {:7} {:7.3}", g.homophily()?, g.num_edges(), p_in / p_out);
    }
    Ok(())
}
