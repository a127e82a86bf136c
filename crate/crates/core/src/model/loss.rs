use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterValues;

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

fn log_softmax_at(row: ArrayView1<'_, f64>, class: usize) -> f64 {
    let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    row[class] - lse
}

/// Mean of `−log softmax(logits)_y` over the masked nodes.
pub fn cross_entropy(logits: ArrayView2<'_, f64>, labels: &[usize], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let total: f64 = mask.iter().map(|&i| -log_softmax_at(logits.row(i), labels[i])).sum();
    Ok(total / mask.len() as f64)
}

/// Cross-entropy and its gradient with respect to every logit (zero on
/// unmasked rows).
pub(crate) fn cross_entropy_with_grad(
    logits: ArrayView2<'_, f64>,
    labels: &[usize],
    mask: &[usize],
) -> Result<(f64, Array2<f64>)> {
    let loss = cross_entropy(logits, labels, mask)?;
    let scale = 1.0 / mask.len() as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    for &i in mask {
        let row = logits.row(i);
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        for (c, &v) in row.iter().enumerate() {
            let p = (v - max).exp() / sum;
            let target = if c == labels[i] { 1.0 } else { 0.0 };
            grad[[i, c]] = scale * (p - target);
        }
    }
    Ok((loss, grad))
}

/// Weights and band boundaries of the shape-aware penalty.
///
/// The values `t` are cut into `t[..i]` (low), `t[i..j]` (mid) and `t[j..]`
/// (high) with `0 < i < j < K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeRegularization {
    pub gammas: [f64; 3],
    pub i: usize,
    pub j: usize,
}

impl ShapeRegularization {
    pub fn validate(&self, order: usize) -> Result<()> {
        if !(0 < self.i && self.i < self.j && self.j < order) {
            return Err(Error::config(format!(
                "slice indices must satisfy 0 < i < j < K (got i = {}, j = {}, K = {order})",
                self.i, self.j
            )));
        }
        if self.gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::config("gamma weights must be nonnegative"));
        }
        Ok(())
    }

    /// Signed weight of each band's squared norm at homophily `h`:
    /// `[γ1(1/C − h), γ2|h − 1/C|, γ3(h − 1/C)]`.
    pub fn band_weights(&self, h: f64, num_classes: usize) -> [f64; 3] {
        let transition = 1.0 / num_classes as f64;
        [
            self.gammas[0] * (transition - h),
            self.gammas[1] * (h - transition).abs(),
            self.gammas[2] * (h - transition),
        ]
    }

    fn band(&self, k: usize) -> usize {
        if k < self.i {
            0
        } else if k < self.j {
            1
        } else {
            2
        }
    }

    pub fn value(&self, t: &FilterValues, h: f64, num_classes: usize) -> Result<f64> {
        self.validate(t.0.len().saturating_sub(1))?;
        let w = self.band_weights(h, num_classes);
        Ok(t.0.iter().enumerate().map(|(k, v)| w[self.band(k)] * v * v).sum())
    }

    /// `∂/∂t_k = 2 w_band(k) t_k`.
    pub fn gradient(&self, t: &FilterValues, h: f64, num_classes: usize) -> Result<Vec<f64>> {
        self.validate(t.0.len().saturating_sub(1))?;
        let w = self.band_weights(h, num_classes);
        Ok(t.0.iter().enumerate().map(|(k, v)| 2.0 * w[self.band(k)] * v).collect())
    }
}

/// `γ1(1/C − h)‖t_low‖² + γ2|h − 1/C|‖t_mid‖² + γ3(h − 1/C)‖t_high‖²`.
pub fn shape_regularization(
    t: &FilterValues,
    h: f64,
    num_classes: usize,
    gammas: [f64; 3],
    i: usize,
    j: usize,
) -> Result<f64> {
    ShapeRegularization { gammas, i, j }.value(t, h, num_classes)
}
