//! Two-class contextual stochastic block model with a target homophily.
//!
//! Nodes `0..n` form class 0 and `n..2n` class 1. Every unordered pair is
//! an independent Bernoulli trial, so generation costs `O(n^2)`; that is
//! fine up to a few thousand nodes per class.

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsbmConfig {
    /// Nodes per class.
    pub n: usize,
    /// Feature dimension.
    pub f: usize,
    #[serde(default = "default_d")]
    pub d: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Target homophily in `[0, 1]`.
    pub h: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_d() -> f64 {
    5.0
}

fn default_mu() -> f64 {
    1.0
}

impl CsbmConfig {
    pub fn new(n: usize, f: usize, h: f64, seed: u64) -> Self {
        CsbmConfig { n, f, d: default_d(), mu: default_mu(), h, seed }
    }

    pub fn sigma(&self) -> f64 {
        sigma_from_h(self.h, self.d)
    }

    /// `(p_in, p_out) = ((d + σ√d)/n, (d − σ√d)/n)`.
    pub fn edge_probabilities(&self) -> (f64, f64) {
        let shift = self.sigma() * self.d.sqrt();
        let n = self.n as f64;
        ((self.d + shift) / n, (self.d - shift) / n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("csbm: n must be at least 2"));
        }
        if self.f == 0 {
            return Err(Error::config("csbm: feature dimension must be at least 1"));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::config("csbm: d must be positive"));
        }
        if !(0.0..=1.0).contains(&self.h) {
            return Err(Error::config(format!("csbm: h = {} outside [0, 1]", self.h)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::config("csbm: mu must be nonnegative"));
        }
        let (p_in, p_out) = self.edge_probabilities();
        for (name, p) in [("intra-class", p_in), ("inter-class", p_out)] {
            if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::config(format!("csbm: {name} edge probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// `σ = √d (2h − 1)`.
pub fn sigma_from_h(h: f64, d: f64) -> f64 {
    d.sqrt() * (2.0 * h - 1.0)
}

/// Samples a graph. The output depends only on `cfg` (seed included).
pub fn generate(cfg: &CsbmConfig) -> Result<Graph> {
    cfg.validate()?;
    let n = cfg.n;
    let total = 2 * n;
    let (p_in, p_out) = cfg.edge_probabilities();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let labels: Vec<usize> = (0..total).map(|i| usize::from(i >= n)).collect();
    let mut edges = Vec::new();
    for s in 0..total {
        for t in s + 1..total {
            let p = if labels[s] == labels[t] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((s, t));
            }
        }
    }

    let f = cfg.f;
    let scale = 1.0 / (f as f64).sqrt();
    let u: Array1<f64> = (0..f)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();
    let signal = (cfg.mu / n as f64).sqrt();
    let mut features = Array2::zeros((total, f));
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        let v = if labels[i] == 0 { 1.0 } else { -1.0 };
        for (x, uk) in row.iter_mut().zip(&u) {
            let w: f64 = StandardNormal.sample(&mut rng);
            *x = signal * v * uk + scale * w;
        }
    }

    Graph::new(total, &edges, labels, 2, features)
}
