use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::loss::{cross_entropy, cross_entropy_with_grad, ShapeRegularization};
use super::mlp::MlpParams;
use crate::error::{Error, Result};
use crate::filter::{
    apply_filter, apply_filter_with_terms, coefficient_map, divided_differences, FilterValues,
    InterpolationNodes,
};
use crate::linalg::SparseMatrix;

/// Learnable state: the feature transform and the filter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonNetParams {
    pub mlp: MlpParams,
    pub t: FilterValues,
}

impl NewtonNetParams {
    pub fn zeros_like(&self) -> Self {
        NewtonNetParams { mlp: self.mlp.zeros_like(), t: FilterValues(vec![0.0; self.t.0.len()]) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub ce: f64,
    pub sr: f64,
}

impl LossParts {
    pub fn total(&self) -> f64 {
        self.ce + self.sr
    }
}

/// Everything about a training objective that stays fixed while the
/// parameters move.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub laplacian: &'a SparseMatrix,
    pub features: ArrayView2<'a, f64>,
    pub labels: &'a [usize],
    pub train: &'a [usize],
    pub num_classes: usize,
    pub nodes: &'a InterpolationNodes,
    /// `None` trains on cross-entropy alone.
    pub regularization: Option<ShapeRegularization>,
    coefficient_map: Array2<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(
        laplacian: &'a SparseMatrix,
        features: ArrayView2<'a, f64>,
        labels: &'a [usize],
        train: &'a [usize],
        num_classes: usize,
        nodes: &'a InterpolationNodes,
        regularization: Option<ShapeRegularization>,
    ) -> Result<Self> {
        if let Some(reg) = &regularization {
            reg.validate(nodes.order())?;
        }
        if features.nrows() != laplacian.nrows() || labels.len() != laplacian.nrows() {
            return Err(Error::DimensionMismatch {
                what: "problem rows",
                expected: laplacian.nrows(),
                got: features.nrows().min(labels.len()),
            });
        }
        Ok(Problem {
            laplacian,
            features,
            labels,
            train,
            num_classes,
            nodes,
            regularization,
            coefficient_map: coefficient_map(nodes),
        })
    }
}

fn check_values(p: &NewtonNetParams, nodes: &InterpolationNodes) -> Result<()> {
    if p.t.0.len() != nodes.as_slice().len() {
        return Err(Error::DimensionMismatch {
            what: "filter values",
            expected: nodes.as_slice().len(),
            got: p.t.0.len(),
        });
    }
    Ok(())
}

/// `Z = g(L) f_θ(X)` with the Newton coefficients recomputed from `t`.
pub fn forward(
    p: &NewtonNetParams,
    nodes: &InterpolationNodes,
    laplacian: &SparseMatrix,
    features: ArrayView2<'_, f64>,
    dropout: Option<&Array2<f64>>,
) -> Result<Array2<f64>> {
    check_values(p, nodes)?;
    let (transformed, _) = p.mlp.forward_cached(features, dropout)?;
    let a = divided_differences(nodes, &p.t)?;
    apply_filter(&a, nodes, laplacian, transformed.view())
}

/// Cross-entropy on the training nodes plus the shape penalty at `h`.
pub fn total_loss(p: &NewtonNetParams, problem: &Problem<'_>, h: f64) -> Result<LossParts> {
    let logits = forward(p, problem.nodes, problem.laplacian, problem.features, None)?;
    let ce = cross_entropy(logits.view(), problem.labels, problem.train)?;
    let sr = match &problem.regularization {
        Some(reg) => reg.value(&p.t, h, problem.num_classes)?,
        None => 0.0,
    };
    Ok(LossParts { ce, sr })
}

/// Exact gradients of [`total_loss`]; `h` is held constant.
pub fn gradients(p: &NewtonNetParams, problem: &Problem<'_>, h: f64) -> Result<(LossParts, NewtonNetParams)> {
    let mut out = backprop_ce(p, problem, None)?;
    let sr = add_shape_gradient(&mut out.grads, p, problem, h)?;
    Ok((LossParts { ce: out.ce, sr }, out.grads))
}

pub(crate) struct Backprop {
    pub ce: f64,
    pub grads: NewtonNetParams,
    pub logits: Array2<f64>,
}

/// Cross-entropy, its gradients and the logits. The shape penalty is left
/// out because `h` is usually derived from these logits.
pub(crate) fn backprop_ce(
    p: &NewtonNetParams,
    problem: &Problem<'_>,
    dropout: Option<&Array2<f64>>,
) -> Result<Backprop> {
    check_values(p, problem.nodes)?;
    let (transformed, cache) = p.mlp.forward_cached(problem.features, dropout)?;
    let a = divided_differences(problem.nodes, &p.t)?;
    let (logits, terms) = apply_filter_with_terms(&a, problem.nodes, problem.laplacian, transformed.view())?;
    let (ce, d_logits) = cross_entropy_with_grad(logits.view(), problem.labels, problem.train)?;

    // g(L) is a polynomial in a symmetric L, hence symmetric itself.
    let d_transformed = apply_filter(&a, problem.nodes, problem.laplacian, d_logits.view())?;
    // a = D t is linear, so dt = Dᵀ da.
    let d_a: Array1<f64> = terms.iter().map(|term| (term * &d_logits).sum()).collect();
    let d_t = problem.coefficient_map.t().dot(&d_a);

    let mlp = p.mlp.backward(problem.features, &cache, &d_transformed, dropout);
    Ok(Backprop { ce, grads: NewtonNetParams { mlp, t: FilterValues(d_t.to_vec()) }, logits })
}

/// Adds the shape-penalty gradient at `h` to `grads` and returns the
/// penalty value.
pub(crate) fn add_shape_gradient(
    grads: &mut NewtonNetParams,
    p: &NewtonNetParams,
    problem: &Problem<'_>,
    h: f64,
) -> Result<f64> {
    let Some(reg) = &problem.regularization else {
        return Ok(0.0);
    };
    let sr = reg.value(&p.t, h, problem.num_classes)?;
    for (g, d) in grads.t.0.iter_mut().zip(reg.gradient(&p.t, h, problem.num_classes)?) {
        *g += d;
    }
    Ok(sr)
}

/// Row-wise argmax; ties go to the lower class id.
pub fn predict(logits: ArrayView2<'_, f64>) -> Vec<usize> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Fraction of `idx` whose prediction matches the label; 0 for an empty set.
pub fn accuracy(predictions: &[usize], labels: &[usize], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let hits = idx.iter().filter(|&&i| predictions[i] == labels[i]).count();
    hits as f64 / idx.len() as f64
}
