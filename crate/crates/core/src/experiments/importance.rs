use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, spearman, worker_count};
use crate::csbm::{self, CsbmConfig};
use crate::error::{Error, Result};
use crate::filter::band_of;
use crate::graph::{random_split, LabeledSplit};
use crate::linalg::{sym_eig, EigenDecomposition};
use crate::model::{accuracy, cross_entropy_with_grad, predict, Adam, MlpParams, ParamSlot};

/// Amplitudes of a step filter on the low, mid and high bands.
pub type AmplitudeTriple = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceSweepConfig {
    pub h_grid: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Fraction of the filter grid kept as top performers.
    pub top_fraction: f64,
    /// Nodes per class.
    pub n: usize,
    pub f: usize,
    pub d: f64,
    pub mu: f64,
    /// Train, validation and test fractions.
    pub split: [f64; 3],
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for ImportanceSweepConfig {
    fn default() -> Self {
        ImportanceSweepConfig {
            h_grid: (0..=20).map(|i| i as f64 / 20.0).collect(),
            amplitudes: vec![0.0, 0.4, 0.8, 1.2, 1.6, 2.0],
            top_fraction: 0.05,
            n: 500,
            f: 500,
            d: 5.0,
            mu: 1.0,
            split: [0.025, 0.025, 0.95],
            epochs: 200,
            lr: 0.01,
            weight_decay: 5e-4,
            hidden: 64,
            seed: 0,
        }
    }
}

impl ImportanceSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h_grid.is_empty() || self.amplitudes.is_empty() {
            return Err(Error::config("h grid and amplitude grid must be non-empty"));
        }
        if self.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("amplitudes must be finite"));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(Error::config("top fraction must lie in (0, 1]"));
        }
        if self.epochs == 0 || self.hidden == 0 {
            return Err(Error::config("epochs and hidden width must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("weight decay must be nonnegative"));
        }
        for &h in &self.h_grid {
            self.csbm(h, 0).validate()?;
        }
        Ok(())
    }

    fn csbm(&self, h: f64, seed: u64) -> CsbmConfig {
        CsbmConfig { n: self.n, f: self.f, d: self.d, mu: self.mu, h, seed }
    }

    /// Every amplitude triple, in lexicographic order of the grid.
    pub fn filter_grid(&self) -> Vec<AmplitudeTriple> {
        let a = &self.amplitudes;
        let mut grid = Vec::with_capacity(a.len().pow(3));
        for &low in a {
            for &mid in a {
                for &high in a {
                    grid.push([low, mid, high]);
                }
            }
        }
        grid
    }

    /// `ceil(top_fraction × grid size)`.
    pub fn top_count(&self) -> usize {
        let size = self.amplitudes.len().pow(3);
        ((self.top_fraction * size as f64 - 1e-9).ceil() as usize).clamp(1, size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub amplitudes: AmplitudeTriple,
    pub best_val_accuracy: f64,
    /// Test accuracy at the best validation epoch.
    pub test_accuracy: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub h: f64,
    /// Homophily of the sampled graph; `None` if it has no edges.
    pub realized_h: Option<f64>,
    pub i_low: f64,
    pub i_mid: f64,
    pub i_high: f64,
    pub top_filters: Vec<AmplitudeTriple>,
    pub cells: Vec<CellResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub config: ImportanceSweepConfig,
    pub rows: Vec<ImportanceRow>,
    /// Rank correlations with `h`; `None` when a column is constant.
    pub spearman_low: Option<f64>,
    pub spearman_mid: Option<f64>,
    pub spearman_high: Option<f64>,
    /// Smallest `h` with `I_low ≥ I_high`.
    pub crossover: Option<f64>,
}

impl ImportanceReport {
    /// One line per `h`: `h,realized_h,i_low,i_mid,i_high`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,realized_h,i_low,i_mid,i_high\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.h,
                r.realized_h.map_or(String::new(), |v| v.to_string()),
                r.i_low,
                r.i_mid,
                r.i_high
            ));
        }
        out
    }
}

/// The `count` best cells by test accuracy; ties go to the lexicographically
/// smaller amplitude triple.
pub fn select_top_filters(cells: &[CellResult], count: usize) -> Vec<AmplitudeTriple> {
    let mut ranked: Vec<&CellResult> = cells.iter().collect();
    ranked.sort_by(|a, b| {
        b.test_accuracy.total_cmp(&a.test_accuracy).then_with(|| lex_cmp(&a.amplitudes, &b.amplitudes))
    });
    ranked.iter().take(count).map(|c| c.amplitudes).collect()
}

fn lex_cmp(a: &AmplitudeTriple, b: &AmplitudeTriple) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Per-band mean amplitude over the selected filters.
pub fn importance_scores(top: &[AmplitudeTriple]) -> AmplitudeTriple {
    let n = top.len() as f64;
    let mut sums = [0.0; 3];
    for t in top {
        for (s, v) in sums.iter_mut().zip(t) {
            *s += v;
        }
    }
    sums.map(|s| s / n)
}

/// Column ranges of the eigenvector matrix falling in each band.
/// Eigenvalues are ascending, so each band is contiguous.
fn band_ranges(eigenvalues: &[f64]) -> [Range<usize>; 3] {
    let first_in =
        |band: usize| eigenvalues.iter().position(|&l| band_of(l) >= band).unwrap_or(eigenvalues.len());
    let (mid, high) = (first_in(1), first_in(2));
    [0..mid, mid..high, high..eigenvalues.len()]
}

struct BandFilter<'a> {
    eig: &'a EigenDecomposition,
    ranges: &'a [Range<usize>; 3],
    amplitudes: AmplitudeTriple,
}

impl BandFilter<'_> {
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros(x.raw_dim());
        for (range, &amp) in self.ranges.iter().zip(&self.amplitudes) {
            if amp == 0.0 || range.is_empty() {
                continue;
            }
            let u = self.eig.eigenvectors.slice(s![.., range.clone()]);
            let coeffs = u.t().dot(&x);
            ndarray::linalg::general_mat_mul(amp, &u, &coeffs, 1.0, &mut out);
        }
        out
    }
}

struct Cell<'a> {
    features: ArrayView2<'a, f64>,
    labels: &'a [usize],
    split: &'a LabeledSplit,
    init: &'a MlpParams,
    cfg: &'a ImportanceSweepConfig,
}

impl Cell<'_> {
    /// Trains the feature transform under a fixed band filter.
    fn run(&self, filter: &BandFilter<'_>) -> Result<CellResult> {
        let mut mlp = self.init.clone();
        let mut adam = Adam::new(self.cfg.lr, self.cfg.weight_decay);
        let mut result = CellResult {
            amplitudes: filter.amplitudes,
            best_val_accuracy: f64::NEG_INFINITY,
            test_accuracy: 0.0,
            best_epoch: 0,
        };
        for epoch in 0..self.cfg.epochs {
            let (transformed, cache) = mlp.forward_cached(self.features, None)?;
            let logits = filter.apply(transformed.view());
            let (ce, d_logits) = cross_entropy_with_grad(logits.view(), self.labels, &self.split.train)?;
            if !ce.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, ce, sr: 0.0 });
            }
            let predictions = predict(logits.view());
            let val = accuracy(&predictions, self.labels, &self.split.val);
            if val > result.best_val_accuracy {
                result.best_val_accuracy = val;
                result.best_epoch = epoch;
                result.test_accuracy = accuracy(&predictions, self.labels, &self.split.test);
            }

            let d_transformed = filter.apply(d_logits.view());
            let grads = mlp.backward(self.features, &cache, &d_transformed, None);
            adam.step(vec![
                slot(&mut mlp.w1, &grads.w1, true),
                slot(&mut mlp.b1, &grads.b1, false),
                slot(&mut mlp.w2, &grads.w2, true),
                slot(&mut mlp.b2, &grads.b2, false),
            ]);
        }
        Ok(result)
    }
}

fn slot<'a, D: ndarray::Dimension>(
    value: &'a mut ndarray::Array<f64, D>,
    grad: &'a ndarray::Array<f64, D>,
    decay: bool,
) -> ParamSlot<'a> {
    ParamSlot {
        value: value.as_slice_mut().expect("standard layout"),
        grad: grad.as_slice().expect("standard layout"),
        decay,
    }
}

/// For each `h`: sample a CSBM graph, eigendecompose its Laplacian, train
/// the feature transform under every band filter of the amplitude grid,
/// keep the best `top_count` filters by test accuracy and average their
/// amplitudes per band.
///
/// The split and the initial transform are shared by every cell. Cells run
/// on up to [`worker_count`] threads; the report does not depend on the
/// thread count.
pub fn frequency_importance_sweep(cfg: &ImportanceSweepConfig) -> Result<ImportanceReport> {
    cfg.validate()?;
    let num_nodes = 2 * cfg.n;
    let split =
        random_split(num_nodes, (cfg.split[0], cfg.split[1], cfg.split[2]), derive_seed(cfg.seed, 0))?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
    let init = MlpParams::init(&mut init_rng, cfg.f, cfg.hidden, 2);
    let grid = cfg.filter_grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;

    let mut rows = Vec::with_capacity(cfg.h_grid.len());
    for (hi, &h) in cfg.h_grid.iter().enumerate() {
        let g = csbm::generate(&cfg.csbm(h, derive_seed(cfg.seed, 2 + hi as u64)))?;
        let realized_h = g.homophily().ok();
        let eig = sym_eig(g.normalized_laplacian().to_dense().view())?;
        let ranges = band_ranges(&eig.eigenvalues);
        let cell =
            Cell { features: g.features().view(), labels: g.labels(), split: &split, init: &init, cfg };
        let cells = pool.install(|| {
            grid.par_iter()
                .map(|&amplitudes| cell.run(&BandFilter { eig: &eig, ranges: &ranges, amplitudes }))
                .collect::<Result<Vec<_>>>()
        })?;
        let top_filters = select_top_filters(&cells, cfg.top_count());
        let [i_low, i_mid, i_high] = importance_scores(&top_filters);
        rows.push(ImportanceRow { h, realized_h, i_low, i_mid, i_high, top_filters, cells });
    }

    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let correlation = |f: fn(&ImportanceRow) -> f64| {
        let rho = spearman(&hs, &rows.iter().map(f).collect::<Vec<_>>());
        rho.is_finite().then_some(rho)
    };
    let mut by_h: Vec<&ImportanceRow> = rows.iter().collect();
    by_h.sort_by(|a, b| a.h.total_cmp(&b.h));
    let crossover = by_h.iter().find(|r| r.i_low >= r.i_high).map(|r| r.h);
    Ok(ImportanceReport {
        spearman_low: correlation(|r| r.i_low),
        spearman_mid: correlation(|r| r.i_mid),
        spearman_high: correlation(|r| r.i_high),
        crossover,
        rows,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(amplitudes: AmplitudeTriple, test_accuracy: f64) -> CellResult {
        CellResult { amplitudes, best_val_accuracy: 0.0, test_accuracy, best_epoch: 0 }
    }

    #[test]
    fn scores_are_plain_means() {
        assert_eq!(importance_scores(&[[1.0, 0.0, 0.0], [0.5, 0.0, 0.0]]), [0.75, 0.0, 0.0]);
    }

    #[test]
    fn top_selection_breaks_ties_lexicographically() {
        let cells = vec![
            cell([2.0, 0.0, 0.0], 0.9),
            cell([0.4, 1.2, 0.0], 0.9),
            cell([0.4, 0.8, 2.0], 0.9),
            cell([0.0, 0.0, 0.0], 0.5),
            cell([1.6, 1.6, 1.6], 0.95),
        ];
        assert_eq!(select_top_filters(&cells, 3), vec![[1.6, 1.6, 1.6], [0.4, 0.8, 2.0], [0.4, 1.2, 0.0]]);
    }

    #[test]
    fn default_grid_sizes() {
        let cfg = ImportanceSweepConfig::default();
        assert_eq!(cfg.filter_grid().len(), 216);
        assert_eq!(cfg.top_count(), 11);
        assert_eq!(cfg.h_grid.len(), 21);
        assert_eq!(cfg.filter_grid()[1], [0.0, 0.0, 0.4]);
    }

    #[test]
    fn band_ranges_are_contiguous() {
        let r = band_ranges(&[0.0, 0.5, 2.0 / 3.0, 1.0, 4.0 / 3.0, 2.0]);
        assert_eq!(r, [0..2, 2..4, 4..6]);
        assert_eq!(band_ranges(&[0.0, 0.1]), [0..2, 2..2, 2..2]);
    }

    #[test]
    fn band_filter_matches_dense_reconstruction() {
        let g = csbm::generate(&CsbmConfig::new(20, 3, 0.7, 4)).unwrap();
        let eig = sym_eig(g.normalized_laplacian().to_dense().view()).unwrap();
        let ranges = band_ranges(&eig.eigenvalues);
        let amps = [1.2, 0.0, 0.4];
        let dense = crate::filter::band_filter_matrix(&eig, (amps[0], amps[1], amps[2]));
        let fast = BandFilter { eig: &eig, ranges: &ranges, amplitudes: amps }.apply(g.features().view());
        let want = dense.dot(g.features());
        let err = (&fast - &want).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn tiny_sweep_is_deterministic() {
        let cfg = ImportanceSweepConfig {
            h_grid: vec![0.2, 0.8],
            amplitudes: vec![0.0, 1.0],
            top_fraction: 0.25,
            n: 30,
            f: 8,
            split: [0.2, 0.2, 0.6],
            epochs: 5,
            hidden: 4,
            ..Default::default()
        };
        let a = frequency_importance_sweep(&cfg).unwrap();
        let b = frequency_importance_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows[0].cells.len(), 8);
        assert_eq!(a.rows[0].top_filters.len(), 2);
        for r in &a.rows {
            for v in [r.i_low, r.i_mid, r.i_high] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
