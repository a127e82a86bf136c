use std::collections::HashSet;

use ndarray::{Array1, Array2};
use rand::seq::index;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{derive_seed, SampleSummary};
use crate::csbm::{self, CsbmConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{sym_eig, EigenDecomposition, SparseMatrix};

fn balanced_labels(num_nodes: usize, num_classes: usize) -> Result<Vec<usize>> {
    if num_classes == 0 || !num_nodes.is_multiple_of(num_classes) {
        return Err(Error::config(format!(
            "{num_nodes} nodes cannot be split evenly into {num_classes} classes"
        )));
    }
    let per_class = num_nodes / num_classes;
    Ok((0..num_nodes).map(|i| i / per_class).collect())
}

/// Pair `k` of the row-major enumeration of `{(s, t) : s < t < n}`.
fn decode_pair(k: usize, n: usize) -> (usize, usize) {
    // Row s starts at s*n - s*(s+1)/2.
    let start = |s: usize| s * n - s * (s + 1) / 2;
    let (mut lo, mut hi) = (0, n - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if start(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = lo;
    (s, s + 1 + (k - start(s)))
}

/// A graph with `num_edges` distinct edges drawn uniformly from all pairs
/// and balanced block labels (`i / (N/C)`). Features are a single zero
/// column.
pub fn random_edge_graph<R: Rng + ?Sized>(
    rng: &mut R,
    num_nodes: usize,
    num_classes: usize,
    num_edges: usize,
) -> Result<Graph> {
    let labels = balanced_labels(num_nodes, num_classes)?;
    let pairs = num_nodes * num_nodes.saturating_sub(1) / 2;
    if num_edges > pairs {
        return Err(Error::config(format!("{num_edges} edges requested but only {pairs} node pairs exist")));
    }
    let edges: Vec<(usize, usize)> =
        index::sample(rng, pairs, num_edges).into_iter().map(|k| decode_pair(k, num_nodes)).collect();
    Graph::new(num_nodes, &edges, labels, num_classes, Array2::zeros((num_nodes, 1)))
}

/// A random graph with balanced block labels in which each edge is
/// intra-class with probability `h` and otherwise inter-class, uniform
/// within either kind. Duplicates are redrawn.
pub fn label_biased_graph<R: Rng + ?Sized>(
    rng: &mut R,
    num_nodes: usize,
    num_classes: usize,
    h: f64,
    num_edges: usize,
) -> Result<Graph> {
    let labels = balanced_labels(num_nodes, num_classes)?;
    if num_classes < 2 || !(0.0..=1.0).contains(&h) {
        return Err(Error::config("label-biased graphs need C ≥ 2 and h in [0, 1]"));
    }
    let (p_in, p_out) = pair_count_formula(num_nodes, num_classes);
    if num_edges as f64 > 0.5 * (p_in.min(p_out)) as f64 {
        return Err(Error::config("too many edges for rejection sampling"));
    }
    let per_class = num_nodes / num_classes;
    let mut seen = HashSet::with_capacity(num_edges);
    let mut edges = Vec::with_capacity(num_edges);
    while edges.len() < num_edges {
        let s = rng.random_range(0..num_nodes);
        let t = if rng.random::<f64>() < h {
            let base = labels[s] * per_class;
            let r = rng.random_range(0..per_class - 1);
            let t = base + r;
            if t >= s {
                t + 1
            } else {
                t
            }
        } else {
            let r = rng.random_range(0..num_nodes - per_class);
            let start = labels[s] * per_class;
            if r >= start {
                r + per_class
            } else {
                r
            }
        };
        let key = (s.min(t), s.max(t));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Graph::new(num_nodes, &edges, labels, num_classes, Array2::zeros((num_nodes, 1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyTrialReport {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub num_edges: usize,
    pub trials: usize,
    pub seed: u64,
    pub samples: Vec<f64>,
    pub summary: SampleSummary,
}

/// Homophily of uniformly random graphs with balanced labels, over
/// `trials` independent graphs.
pub fn verify_random_homophily(
    num_nodes: usize,
    num_classes: usize,
    num_edges: usize,
    trials: usize,
    seed: u64,
) -> Result<HomophilyTrialReport> {
    if trials == 0 {
        return Err(Error::config("at least one trial is required"));
    }
    if num_edges == 0 {
        return Err(Error::NoEdges);
    }
    let samples = (0..trials)
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            random_edge_graph(&mut rng, num_nodes, num_classes, num_edges)?.homophily()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomophilyTrialReport {
        num_nodes,
        num_classes,
        num_edges,
        trials,
        seed,
        summary: SampleSummary::of(&samples),
        samples,
    })
}

/// Two filters given by their responses on an ascending spectrum, with
/// `g1 ≤ g2` on the first `m` eigenvalues, `g1 ≥ g2` on the rest, and equal
/// squared norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremFilterSpec {
    pub m: usize,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

impl TheoremFilterSpec {
    pub fn new(m: usize, g1: Vec<f64>, g2: Vec<f64>) -> Result<Self> {
        let spec = TheoremFilterSpec { m, g1, g2 };
        spec.validate()?;
        Ok(spec)
    }

    /// `g2 = √2` below 1 and 0 above; `g1 = 0` below 1 and `c` above, with
    /// `c = √(2m / (N − m))` so the squared norms agree.
    pub fn default_pair(eigenvalues: &[f64]) -> Result<Self> {
        let n = eigenvalues.len();
        let m = eigenvalues.iter().filter(|&&l| l < 1.0).count();
        if m == 0 || m == n {
            return Err(Error::config("spectrum lies entirely on one side of 1"));
        }
        let c = (2.0 * m as f64 / (n - m) as f64).sqrt();
        let g1 = (0..n).map(|i| if i < m { 0.0 } else { c }).collect();
        let g2 = (0..n).map(|i| if i < m { 2f64.sqrt() } else { 0.0 }).collect();
        Self::new(m, g1, g2)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.g1.len();
        if self.g2.len() != n {
            return Err(Error::DimensionMismatch {
                what: "filter responses",
                expected: n,
                got: self.g2.len(),
            });
        }
        if self.m > n {
            return Err(Error::config("crossover index exceeds spectrum size"));
        }
        for i in 0..n {
            let ordered = if i < self.m { self.g1[i] <= self.g2[i] } else { self.g1[i] >= self.g2[i] };
            if !ordered {
                return Err(Error::config(format!("filter pair out of order at index {i}")));
            }
        }
        let n1: f64 = self.g1.iter().map(|v| v * v).sum();
        let n2: f64 = self.g2.iter().map(|v| v * v).sum();
        if (n1 - n2).abs() > 1e-10 * n1.max(n2).max(1.0) {
            return Err(Error::config(format!("filter norms differ: {n1} vs {n2}")));
        }
        Ok(())
    }

    pub fn swapped(&self) -> (Vec<f64>, Vec<f64>) {
        (self.g2.clone(), self.g1.clone())
    }
}

/// `x1ᵀ L x1 − x2ᵀ L x2` with `xk = U gk(Λ) Uᵀ x`.
pub fn delta_s(
    laplacian: &SparseMatrix,
    eig: &EigenDecomposition,
    g1: &[f64],
    g2: &[f64],
    x: &[f64],
) -> Result<f64> {
    let (x1, x2) = filtered_pair(eig, g1, g2, x)?;
    Ok(laplacian.quadratic_form(x1.as_slice().expect("contiguous"))?
        - laplacian.quadratic_form(x2.as_slice().expect("contiguous"))?)
}

fn filtered_pair(
    eig: &EigenDecomposition,
    g1: &[f64],
    g2: &[f64],
    x: &[f64],
) -> Result<(Array1<f64>, Array1<f64>)> {
    let n = eig.order();
    for (what, len) in [("signal", x.len()), ("g1", g1.len()), ("g2", g2.len())] {
        if len != n {
            return Err(Error::DimensionMismatch { what, expected: n, got: len });
        }
    }
    let c = eig.transform(ndarray::aview1(x));
    let back = |g: &[f64]| eig.eigenvectors.dot(&(&c * &ndarray::aview1(g)));
    Ok((back(g1), back(g2)))
}

/// `(|P_in|, |P_out|)` counted by enumerating every node pair.
pub fn pair_counts(labels: &[usize]) -> (usize, usize) {
    let mut same = 0;
    let mut diff = 0;
    for s in 0..labels.len() {
        for t in s + 1..labels.len() {
            if labels[s] == labels[t] {
                same += 1;
            } else {
                diff += 1;
            }
        }
    }
    (same, diff)
}

/// Pair counts of a balanced graph: `C·(N/C)(N/C − 1)/2` and
/// `N²(C − 1)/(2C)`.
fn pair_count_formula(num_nodes: usize, num_classes: usize) -> (usize, usize) {
    let k = num_nodes / num_classes;
    (num_classes * k * k.saturating_sub(1) / 2, num_nodes * num_nodes * (num_classes - 1) / (2 * num_classes))
}

/// Mean squared inter-class distance minus mean squared intra-class
/// distance of a signal, summed over every node pair.
pub fn delta_distances(x: &[f64], labels: &[usize]) -> Result<f64> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch { what: "signal", expected: labels.len(), got: x.len() });
    }
    let (mut d_in, mut d_out) = (0.0, 0.0);
    let (mut n_in, mut n_out) = (0usize, 0usize);
    for s in 0..x.len() {
        for t in s + 1..x.len() {
            let d = (x[s] - x[t]).powi(2);
            if labels[s] == labels[t] {
                d_in += d;
                n_in += 1;
            } else {
                d_out += d;
                n_out += 1;
            }
        }
    }
    if n_in == 0 || n_out == 0 {
        return Err(Error::config("distance difference needs intra- and inter-class pairs"));
    }
    Ok(d_out / n_out as f64 - d_in / n_in as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremTrialReport {
    /// Target homophily, for transition-phase runs.
    pub h: Option<f64>,
    pub trials: usize,
    pub delta_s: Vec<f64>,
    pub delta_d1: Vec<f64>,
    pub delta_d2: Vec<f64>,
    pub delta_s_stats: SampleSummary,
    pub delta_d1_stats: Option<SampleSummary>,
    pub delta_d2_stats: Option<SampleSummary>,
    /// Paired per-trial `Δd̄⁽¹⁾ − Δd̄⁽²⁾`.
    pub difference_stats: Option<SampleSummary>,
    /// Mean homophily of the sampled graphs.
    pub realized_h: Option<f64>,
}

impl TheoremTrialReport {
    fn from_samples(
        h: Option<f64>,
        delta_s: Vec<f64>,
        delta_d1: Vec<f64>,
        delta_d2: Vec<f64>,
        realized_h: Option<f64>,
    ) -> Self {
        let stats = |v: &[f64]| (!v.is_empty()).then(|| SampleSummary::of(v));
        let diff: Vec<f64> = delta_d1.iter().zip(&delta_d2).map(|(a, b)| a - b).collect();
        TheoremTrialReport {
            h,
            trials: delta_s.len(),
            delta_s_stats: SampleSummary::of(&delta_s),
            delta_d1_stats: stats(&delta_d1),
            delta_d2_stats: stats(&delta_d2),
            difference_stats: stats(&diff),
            delta_s,
            delta_d1,
            delta_d2,
            realized_h,
        }
    }
}

fn unit_signal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    x
}

fn laplacian_eig(g: &Graph) -> Result<(SparseMatrix, EigenDecomposition)> {
    let laplacian = g.normalized_laplacian();
    let eig = sym_eig(laplacian.to_dense().view())?;
    Ok((laplacian, eig))
}

/// `Δs` for `trials` random unit Gaussian signals on a fixed graph.
pub fn verify_delta_s(
    g: &Graph,
    spec: &TheoremFilterSpec,
    trials: usize,
    seed: u64,
) -> Result<TheoremTrialReport> {
    if trials == 0 {
        return Err(Error::config("at least one trial is required"));
    }
    spec.validate()?;
    if spec.g1.len() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "filter responses",
            expected: g.num_nodes(),
            got: spec.g1.len(),
        });
    }
    let (laplacian, eig) = laplacian_eig(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..trials)
        .map(|_| delta_s(&laplacian, &eig, &spec.g1, &spec.g2, &unit_signal(&mut rng, g.num_nodes())))
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoremTrialReport::from_samples(None, samples, Vec::new(), Vec::new(), g.homophily().ok()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionConfig {
    pub h_grid: Vec<f64>,
    pub num_classes: usize,
    pub num_nodes: usize,
    /// Expected degree; `N·d/2` edges for label-biased graphs.
    pub d: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            h_grid: vec![0.1, 0.9],
            num_classes: 2,
            num_nodes: 400,
            d: 5.0,
            trials: 200,
            seed: 0,
        }
    }
}

/// For each `h`, samples `trials` balanced graphs (CSBM when `C = 2`,
/// label-biased random graphs otherwise), draws one unit signal per graph,
/// filters it with the pair built by `pair` from the graph's spectrum and
/// records `Δs`, `Δd̄⁽¹⁾` and `Δd̄⁽²⁾`.
pub fn verify_transition_phase<F>(cfg: &TransitionConfig, pair: F) -> Result<Vec<TheoremTrialReport>>
where
    F: Fn(&[f64]) -> Result<TheoremFilterSpec>,
{
    if cfg.trials == 0 {
        return Err(Error::config("at least one trial is required"));
    }
    balanced_labels(cfg.num_nodes, cfg.num_classes)?;
    if cfg.num_classes < 2 {
        return Err(Error::config("transition phase needs at least two classes"));
    }
    let mut reports = Vec::with_capacity(cfg.h_grid.len());
    for (hi, &h) in cfg.h_grid.iter().enumerate() {
        let stream = derive_seed(cfg.seed, hi as u64);
        let (mut ds, mut d1, mut d2, mut hs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for trial in 0..cfg.trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream, trial as u64));
            let g = if cfg.num_classes == 2 {
                let csbm_cfg =
                    CsbmConfig { n: cfg.num_nodes / 2, f: 1, d: cfg.d, mu: 0.0, h, seed: rng.random() };
                csbm::generate(&csbm_cfg)?
            } else {
                let edges = (cfg.num_nodes as f64 * cfg.d / 2.0).round() as usize;
                label_biased_graph(&mut rng, cfg.num_nodes, cfg.num_classes, h, edges)?
            };
            let (laplacian, eig) = laplacian_eig(&g)?;
            let spec = pair(&eig.eigenvalues)?;
            let x = unit_signal(&mut rng, g.num_nodes());
            let (x1, x2) = filtered_pair(&eig, &spec.g1, &spec.g2, &x)?;
            let x1 = x1.as_slice().expect("contiguous");
            let x2 = x2.as_slice().expect("contiguous");
            ds.push(laplacian.quadratic_form(x1)? - laplacian.quadratic_form(x2)?);
            d1.push(delta_distances(x1, g.labels())?);
            d2.push(delta_distances(x2, g.labels())?);
            if let Ok(v) = g.homophily() {
                hs.push(v);
            }
        }
        let realized = (!hs.is_empty()).then(|| SampleSummary::of(&hs).mean);
        reports.push(TheoremTrialReport::from_samples(Some(h), ds, d1, d2, realized));
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomophilyStudyConfig {
    pub num_nodes: usize,
    pub class_counts: Vec<usize>,
    pub num_edges: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for HomophilyStudyConfig {
    fn default() -> Self {
        HomophilyStudyConfig {
            num_nodes: 1000,
            class_counts: vec![2, 5],
            num_edges: 2500,
            trials: 100,
            seed: 0,
        }
    }
}

/// [`verify_random_homophily`] once per class count.
pub fn run_homophily_study(cfg: &HomophilyStudyConfig) -> Result<Vec<HomophilyTrialReport>> {
    cfg.class_counts
        .iter()
        .map(|&c| {
            verify_random_homophily(
                cfg.num_nodes,
                c,
                cfg.num_edges,
                cfg.trials,
                derive_seed(cfg.seed, c as u64),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaSStudyConfig {
    pub graphs: usize,
    pub num_nodes: usize,
    pub num_edges: usize,
    /// Signals per graph.
    pub trials: usize,
    pub seed: u64,
}

impl Default for DeltaSStudyConfig {
    fn default() -> Self {
        DeltaSStudyConfig { graphs: 5, num_nodes: 300, num_edges: 750, trials: 500, seed: 0 }
    }
}

/// [`verify_delta_s`] with the default filter pair on independent uniform
/// random graphs.
pub fn run_delta_s_study(cfg: &DeltaSStudyConfig) -> Result<Vec<TheoremTrialReport>> {
    (0..cfg.graphs)
        .map(|gi| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2 * gi as u64));
            let g = random_edge_graph(&mut rng, cfg.num_nodes, 1, cfg.num_edges)?;
            let eig = sym_eig(g.normalized_laplacian().to_dense().view())?;
            let spec = TheoremFilterSpec::default_pair(&eig.eigenvalues)?;
            verify_delta_s(&g, &spec, cfg.trials, derive_seed(cfg.seed, 2 * gi as u64 + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_decoding_covers_every_pair_once() {
        let n = 7;
        let mut k = 0;
        for s in 0..n {
            for t in s + 1..n {
                assert_eq!(decode_pair(k, n), (s, t));
                k += 1;
            }
        }
    }

    #[test]
    fn pair_counts_match_formula() {
        let labels = balanced_labels(20, 4).unwrap();
        assert_eq!(pair_counts(&labels), (40, 150));
        assert_eq!(pair_count_formula(20, 4), (40, 150));
    }

    #[test]
    fn one_class_is_fully_homophilous() {
        let r = verify_random_homophily(30, 1, 40, 3, 0).unwrap();
        assert!(r.samples.iter().all(|&h| h == 1.0));
    }

    #[test]
    fn too_many_edges_rejected() {
        assert!(verify_random_homophily(4, 2, 7, 1, 0).is_err());
        assert!(verify_random_homophily(4, 2, 6, 1, 0).is_ok());
        assert!(verify_random_homophily(5, 2, 3, 1, 0).is_err());
    }

    #[test]
    fn label_biased_graph_hits_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = label_biased_graph(&mut rng, 600, 3, 0.8, 3000).unwrap();
        assert_eq!(g.num_edges(), 3000);
        assert!((g.homophily().unwrap() - 0.8).abs() < 0.03);
    }

    #[test]
    fn default_pair_satisfies_conditions() {
        let eigs = [0.0, 0.3, 0.9, 1.0, 1.5, 2.0];
        let spec = TheoremFilterSpec::default_pair(&eigs).unwrap();
        assert_eq!(spec.m, 3);
        assert!((spec.g1[5] - 2f64.sqrt()).abs() < 1e-15);
        let (a, b) = spec.swapped();
        assert!(TheoremFilterSpec::new(3, a, b).is_err());
        assert!(TheoremFilterSpec::new(3, vec![0.0; 6], vec![1.0; 6]).is_err());
    }

    #[test]
    fn identical_filters_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_edge_graph(&mut rng, 40, 2, 100).unwrap();
        let g1 = vec![0.7; 40];
        let spec = TheoremFilterSpec::new(10, g1.clone(), g1).unwrap();
        let r = verify_delta_s(&g, &spec, 20, 5).unwrap();
        assert!(r.delta_s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eigenvector_signal_has_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_edge_graph(&mut rng, 50, 2, 150).unwrap();
        let (laplacian, eig) = laplacian_eig(&g).unwrap();
        let spec = TheoremFilterSpec::default_pair(&eig.eigenvalues).unwrap();
        for i in [spec.m, 49] {
            let u = eig.eigenvectors.column(i).to_vec();
            let got = delta_s(&laplacian, &eig, &spec.g1, &spec.g2, &u).unwrap();
            let l = eig.eigenvalues[i];
            let want = l * (spec.g1[i].powi(2) - spec.g2[i].powi(2));
            assert!(want > 0.0);
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn identical_filters_give_equal_distances() {
        let cfg = TransitionConfig { h_grid: vec![0.8], num_nodes: 40, trials: 3, ..Default::default() };
        let same = |eigs: &[f64]| TheoremFilterSpec::new(0, vec![1.0; eigs.len()], vec![1.0; eigs.len()]);
        let r = verify_transition_phase(&cfg, same).unwrap();
        assert_eq!(r[0].delta_d1, r[0].delta_d2);
    }

    #[test]
    fn distances_by_hand() {
        // Pairs: (0,1) in, (2,3) in, others out.
        let x = [0.0, 1.0, 3.0, 3.0];
        let labels = [0, 0, 1, 1];
        // in: 1, 0 -> mean 0.5; out: 9, 9, 4, 4 -> mean 6.5
        assert_eq!(delta_distances(&x, &labels).unwrap(), 6.0);
    }
}
