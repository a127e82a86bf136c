use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, LabeledSplit};
use crate::model::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchKConfig {
    pub ks: Vec<usize>,
    /// Epochs per timed run; early stopping is disabled.
    pub epochs: usize,
    pub repeats: usize,
    /// Shared by every run except for `k`. The shape penalty is dropped so
    /// that orders below 3 are admissible.
    pub train: TrainConfig,
}

impl Default for BenchKConfig {
    fn default() -> Self {
        BenchKConfig {
            ks: vec![1, 5, 10],
            epochs: 20,
            repeats: 3,
            train: TrainConfig::default().with_gammas([0.0; 3]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchKRow {
    pub k: usize,
    /// Mean epoch time of each repeat, in seconds.
    pub epoch_seconds: Vec<f64>,
    pub median_epoch_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchKReport {
    pub config: BenchKConfig,
    pub rows: Vec<BenchKRow>,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times full training runs that differ only in the filter order.
pub fn bench_k_scaling(g: &Graph, split: &LabeledSplit, cfg: &BenchKConfig) -> Result<BenchKReport> {
    if cfg.ks.is_empty() || cfg.epochs == 0 || cfg.repeats == 0 {
        return Err(Error::config("bench needs at least one order, epoch and repeat"));
    }
    let mut rows = Vec::with_capacity(cfg.ks.len());
    for &k in &cfg.ks {
        let run_cfg = TrainConfig {
            k,
            max_epochs: cfg.epochs,
            patience: cfg.epochs,
            ..cfg.train.clone().with_gammas([0.0; 3])
        };
        let mut epoch_seconds = Vec::with_capacity(cfg.repeats);
        for _ in 0..cfg.repeats {
            let start = Instant::now();
            let (_, report) = train(g, split, &run_cfg)?;
            epoch_seconds.push(start.elapsed().as_secs_f64() / report.epochs_run as f64);
        }
        rows.push(BenchKRow { k, median_epoch_seconds: median(&epoch_seconds), epoch_seconds });
    }
    Ok(BenchKReport { config: cfg.clone(), rows })
}
