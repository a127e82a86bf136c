use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-layer ReLU perceptron `W2ᵀ relu(W1ᵀ x + b1) + b2`, stored with
/// `w1: F×H` and `w2: H×C` so a batch is `relu(X W1 + b1) W2 + b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Activations kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct MlpCache {
    /// `X W1 + b1`, before the nonlinearity.
    pre: Array2<f64>,
    /// Hidden activations after ReLU and dropout.
    hidden: Array2<f64>,
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(rng: &mut R, inputs: usize, hidden: usize, outputs: usize) -> Self {
        MlpParams {
            w1: glorot(rng, inputs, hidden),
            b1: Array1::zeros(hidden),
            w2: glorot(rng, hidden, outputs),
            b2: Array1::zeros(outputs),
        }
    }

    pub fn zeros_like(&self) -> Self {
        MlpParams {
            w1: Array2::zeros(self.w1.raw_dim()),
            b1: Array1::zeros(self.b1.raw_dim()),
            w2: Array2::zeros(self.w2.raw_dim()),
            b2: Array1::zeros(self.b2.raw_dim()),
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w2.ncols()
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x, None)?.0)
    }

    /// `dropout` holds per-activation multipliers (0 or `1/(1-p)`).
    pub(crate) fn forward_cached(
        &self,
        x: ArrayView2<'_, f64>,
        dropout: Option<&Array2<f64>>,
    ) -> Result<(Array2<f64>, MlpCache)> {
        if x.ncols() != self.inputs() {
            return Err(Error::DimensionMismatch {
                what: "feature columns",
                expected: self.inputs(),
                got: x.ncols(),
            });
        }
        let pre = x.dot(&self.w1) + &self.b1;
        let mut hidden = pre.mapv(|v| v.max(0.0));
        if let Some(mask) = dropout {
            if mask.dim() != hidden.dim() {
                return Err(Error::DimensionMismatch {
                    what: "dropout mask rows",
                    expected: hidden.nrows(),
                    got: mask.nrows(),
                });
            }
            hidden *= mask;
        }
        let out = hidden.dot(&self.w2) + &self.b2;
        Ok((out, MlpCache { pre, hidden }))
    }

    /// Parameter gradients given `d_out = ∂loss/∂output`.
    pub(crate) fn backward(
        &self,
        x: ArrayView2<'_, f64>,
        cache: &MlpCache,
        d_out: &Array2<f64>,
        dropout: Option<&Array2<f64>>,
    ) -> MlpParams {
        let w2 = cache.hidden.t().dot(d_out);
        let b2 = d_out.sum_axis(Axis(0));
        let mut d_hidden = d_out.dot(&self.w2.t());
        if let Some(mask) = dropout {
            d_hidden *= mask;
        }
        ndarray::Zip::from(&mut d_hidden).and(&cache.pre).for_each(|d, &p| {
            if p <= 0.0 {
                *d = 0.0;
            }
        });
        let w1 = x.t().dot(&d_hidden);
        let b1 = d_hidden.sum_axis(Axis(0));
        MlpParams { w1, b1, w2, b2 }
    }
}

fn glorot<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_shapes_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = MlpParams::init(&mut rng, 10, 4, 3);
        assert_eq!(p.w1.dim(), (10, 4));
        assert_eq!(p.w2.dim(), (4, 3));
        assert!(p.b1.iter().all(|&b| b == 0.0));
        let bound = (6.0f64 / 14.0).sqrt();
        assert!(p.w1.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn forward_by_hand() {
        let p = MlpParams {
            w1: array![[1.0, -1.0], [0.5, 2.0]],
            b1: array![0.0, 1.0],
            w2: array![[1.0], [1.0]],
            b2: array![0.25],
        };
        // pre = [1+1, -1+4+1] = [2, 4]; out = 6.25
        // pre = [-1, 1+1] -> relu [0, 2]; out = 2.25
        let out = p.forward(array![[1.0, 2.0], [-1.0, 0.0]].view()).unwrap();
        assert_eq!(out, array![[6.25], [2.25]]);
        assert!(p.forward(array![[1.0]].view()).is_err());
    }
}
