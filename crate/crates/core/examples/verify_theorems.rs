//! Monte Carlo checks: random graphs have homophily near 1/C, a high-pass
//! filter raises smoothness energy relative to an equal-norm low-pass one,
//! and which of the two separates classes better flips with homophily.
//!
//! Run with `cargo run --release --example verify_theorems`.

use newtonnet::experiments::{
    run_delta_s_study, run_homophily_study, verify_transition_phase, DeltaSStudyConfig, HomophilyStudyConfig,
    TheoremFilterSpec, TransitionConfig,
};

fn main() -> newtonnet::Result<()> {
    for r in run_homophily_study(&HomophilyStudyConfig { trials: 30, ..Default::default() })? {
        println!(
            "C = {}: mean homophily {:.4} ± {:.4} (1/C = {:.4})",
            r.num_classes,
            r.summary.mean,
            r.summary.stderr,
            1.0 / r.num_classes as f64
        );
    }

    let ds = run_delta_s_study(&DeltaSStudyConfig { graphs: 2, trials: 200, ..Default::default() })?;
    for (i, r) in ds.iter().enumerate() {
        println!("graph {i}: mean Δs {:.4} ± {:.4}", r.delta_s_stats.mean, r.delta_s_stats.stderr);
    }

    let cfg = TransitionConfig { trials: 40, num_nodes: 200, ..Default::default() };
    for r in verify_transition_phase(&cfg, TheoremFilterSpec::default_pair)? {
        let d = r.difference_stats.expect("trials ran");
        println!(
            "h = {:?}: mean Δd̄(high-pass) − Δd̄(low-pass) = {:.2e} ± {:.2e}",
            r.h.unwrap_or_default(),
            d.mean,
            d.stderr
        );
    }
    Ok(())
}
