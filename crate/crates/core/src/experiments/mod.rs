//! Experiment harness: the band-filter frequency-importance sweep, Monte
//! Carlo checks of the homophily/frequency relations, and a benchmark of
//! epoch time against filter order.
//!
//! Every experiment is a pure function of its configuration (seed
//! included) and returns a serializable report.

mod bench;
mod importance;
mod stats;
mod theory;

pub use bench::{bench_k_scaling, BenchKConfig, BenchKReport, BenchKRow};
pub use importance::{
    frequency_importance_sweep, importance_scores, select_top_filters, AmplitudeTriple, CellResult,
    ImportanceReport, ImportanceRow, ImportanceSweepConfig,
};
pub use stats::{spearman, SampleSummary};
pub use theory::{
    delta_distances, delta_s, label_biased_graph, pair_counts, random_edge_graph, run_delta_s_study,
    run_homophily_study, verify_delta_s, verify_random_homophily, verify_transition_phase, DeltaSStudyConfig,
    HomophilyStudyConfig, HomophilyTrialReport, TheoremFilterSpec, TheoremTrialReport, TransitionConfig,
};

/// Worker count: `NEWTON_THREADS` when set to a positive integer, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("NEWTON_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Independent seed for the `stream`-th sub-task of a run seeded with `seed`.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
