//! Polynomial spectral filters in Newton form.
//!
//! A filter is pinned by its values `t_k` at fixed nodes `q_k ∈ [0, 2]`.
//! Divided differences turn those values into Newton coefficients `a_k`,
//! and the filter is applied to graph signals as
//!
//! ```text
//! g(L) X = Σ_k a_k P_k X,   P_0 = I,   P_k = (L − q_{k−1} I) P_{k−1}
//! ```
//!
//! using only sparse-times-dense products, so `g(L)` is never formed.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EigenDecomposition, SparseMatrix};

/// Highest polynomial degree accepted. Equispaced divided differences lose
/// accuracy quickly past this point.
pub const MAX_ORDER: usize = 16;

/// Lower edge of the middle band.
pub const MID_BAND_START: f64 = 2.0 / 3.0;
/// Lower edge of the high band.
pub const HIGH_BAND_START: f64 = 4.0 / 3.0;

/// Strictly increasing interpolation nodes inside `[0, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InterpolationNodes(Vec<f64>);

impl InterpolationNodes {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::config("at least two interpolation nodes are required"));
        }
        if q.len() > MAX_ORDER + 1 {
            return Err(Error::config(format!(
                "{} nodes requested; polynomial degree is capped at {MAX_ORDER}",
                q.len()
            )));
        }
        for (i, w) in q.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::DistinctNodesRequired(i, i + 1));
            }
            if w[0] > w[1] {
                return Err(Error::config("interpolation nodes must be increasing"));
            }
        }
        if !(q[0] >= 0.0 && q[q.len() - 1] <= 2.0) {
            return Err(Error::config("interpolation nodes must lie in [0, 2]"));
        }
        Ok(InterpolationNodes(q))
    }

    /// Polynomial degree `K` (one less than the node count).
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for InterpolationNodes {
    type Error = Error;

    fn try_from(q: Vec<f64>) -> Result<Self> {
        Self::new(q)
    }
}

impl From<InterpolationNodes> for Vec<f64> {
    fn from(q: InterpolationNodes) -> Self {
        q.0
    }
}

/// Filter values `t_k`, one per interpolation node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterValues(pub Vec<f64>);

/// Newton coefficients `a_k = g[q_0, …, q_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NewtonCoefficients(pub Vec<f64>);

/// `q_i = 2i / K` for `i = 0..=K`.
pub fn equal_spaced_nodes(order: usize) -> Result<InterpolationNodes> {
    if order == 0 {
        return Err(Error::config("filter order K must be at least 1"));
    }
    InterpolationNodes::new((0..=order).map(|i| 2.0 * i as f64 / order as f64).collect())
}

/// Divided-difference table, keeping only the top diagonal.
pub fn divided_differences(q: &InterpolationNodes, t: &FilterValues) -> Result<NewtonCoefficients> {
    let q = q.as_slice();
    if t.0.len() != q.len() {
        return Err(Error::DimensionMismatch { what: "filter values", expected: q.len(), got: t.0.len() });
    }
    let mut a = t.0.clone();
    for span in 1..q.len() {
        for i in (span..q.len()).rev() {
            a[i] = (a[i] - a[i - 1]) / (q[i] - q[i - span]);
        }
    }
    Ok(NewtonCoefficients(a))
}

/// The constant lower-triangular matrix `D` with `a = D t`.
///
/// Divided differences are linear in the values, so column `j` is the
/// coefficient vector of the `j`-th unit vector.
pub fn coefficient_map(q: &InterpolationNodes) -> Array2<f64> {
    let n = q.as_slice().len();
    let mut map = Array2::zeros((n, n));
    for j in 0..n {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        let a = divided_differences(q, &FilterValues(unit)).expect("lengths match");
        for (i, v) in a.0.into_iter().enumerate() {
            map[[i, j]] = v;
        }
    }
    map
}

/// `Σ_k a_k Π_{i<k} (x − q_i)` by nested multiplication.
pub fn newton_eval(a: &NewtonCoefficients, q: &InterpolationNodes, x: f64) -> f64 {
    let q = q.as_slice();
    let a = &a.0;
    let mut acc = a[a.len() - 1];
    for k in (0..a.len() - 1).rev() {
        acc = a[k] + (x - q[k]) * acc;
    }
    acc
}

fn check_filter_dims(
    a: &NewtonCoefficients,
    q: &InterpolationNodes,
    l: &SparseMatrix,
    x: ArrayView2<'_, f64>,
) -> Result<()> {
    if a.0.len() != q.as_slice().len() {
        return Err(Error::DimensionMismatch {
            what: "newton coefficients",
            expected: q.as_slice().len(),
            got: a.0.len(),
        });
    }
    if l.nrows() != l.ncols() {
        return Err(Error::DimensionMismatch {
            what: "laplacian must be square",
            expected: l.nrows(),
            got: l.ncols(),
        });
    }
    if x.nrows() != l.nrows() {
        return Err(Error::DimensionMismatch { what: "signal rows", expected: l.nrows(), got: x.nrows() });
    }
    Ok(())
}

/// `g(L) X` with `K` sparse products and `O(N·H)` extra memory.
pub fn apply_filter(
    a: &NewtonCoefficients,
    q: &InterpolationNodes,
    l: &SparseMatrix,
    x: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_filter_dims(a, q, l, x)?;
    let mut basis = x.to_owned();
    let mut out = &basis * a.0[0];
    for (k, &ak) in a.0.iter().enumerate().skip(1) {
        basis = shifted_product(l, &basis, q.as_slice()[k - 1])?;
        out.scaled_add(ak, &basis);
    }
    Ok(out)
}

/// Like [`apply_filter`] but also returns every basis term `P_k X`.
pub(crate) fn apply_filter_with_terms(
    a: &NewtonCoefficients,
    q: &InterpolationNodes,
    l: &SparseMatrix,
    x: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, Vec<Array2<f64>>)> {
    check_filter_dims(a, q, l, x)?;
    let mut terms = Vec::with_capacity(a.0.len());
    terms.push(x.to_owned());
    let mut out = &terms[0] * a.0[0];
    for (k, &ak) in a.0.iter().enumerate().skip(1) {
        let next = shifted_product(l, &terms[k - 1], q.as_slice()[k - 1])?;
        out.scaled_add(ak, &next);
        terms.push(next);
    }
    Ok((out, terms))
}

// (L − shift·I) P
fn shifted_product(l: &SparseMatrix, p: &Array2<f64>, shift: f64) -> Result<Array2<f64>> {
    let mut next = l.mul_dense(p.view())?;
    next.scaled_add(-shift, p);
    Ok(next)
}

/// Spectral band of an eigenvalue: 0 = low `[0, 2/3)`, 1 = mid
/// `[2/3, 4/3)`, 2 = high `[4/3, 2]`.
pub fn band_of(lambda: f64) -> usize {
    if lambda < MID_BAND_START {
        0
    } else if lambda < HIGH_BAND_START {
        1
    } else {
        2
    }
}

/// Per-eigenvalue response of a three-band step filter.
pub fn band_response(eigenvalues: &[f64], amps: (f64, f64, f64)) -> Vec<f64> {
    let amps = [amps.0, amps.1, amps.2];
    eigenvalues.iter().map(|&l| amps[band_of(l)]).collect()
}

/// Dense `U diag(g(λ_i)) U^T` for a three-band step filter.
pub fn band_filter_matrix(eig: &EigenDecomposition, amps: (f64, f64, f64)) -> Array2<f64> {
    eig.reconstruct(&band_response(&eig.eigenvalues, amps))
}

/// Serialized form of a learned filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterExport {
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    pub a: Vec<f64>,
}

impl FilterExport {
    pub fn new(q: &InterpolationNodes, t: &FilterValues) -> Result<Self> {
        let a = divided_differences(q, t)?;
        Ok(FilterExport { q: q.as_slice().to_vec(), t: t.0.clone(), a: a.0 })
    }

    /// `(λ, g(λ))` at `points` equally spaced locations covering `[0, 2]`.
    pub fn sample_curve(&self, points: usize) -> Result<Vec<(f64, f64)>> {
        let q = InterpolationNodes::new(self.q.clone())?;
        let a = NewtonCoefficients(self.a.clone());
        if a.0.len() != self.q.len() {
            return Err(Error::DimensionMismatch {
                what: "exported coefficients",
                expected: self.q.len(),
                got: a.0.len(),
            });
        }
        let last = points.saturating_sub(1).max(1) as f64;
        Ok((0..points)
            .map(|i| {
                let lambda = 2.0 * i as f64 / last;
                (lambda, newton_eval(&a, &q, lambda))
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(q: &[f64]) -> InterpolationNodes {
        InterpolationNodes::new(q.to_vec()).unwrap()
    }

    #[test]
    fn equal_spacing() {
        assert_eq!(equal_spaced_nodes(5).unwrap().as_slice(), &[0.0, 0.4, 0.8, 1.2, 1.6, 2.0]);
        assert_eq!(equal_spaced_nodes(1).unwrap().as_slice(), &[0.0, 2.0]);
        assert_eq!(equal_spaced_nodes(2).unwrap().as_slice(), &[0.0, 1.0, 2.0]);
        assert!(equal_spaced_nodes(0).is_err());
        assert!(equal_spaced_nodes(MAX_ORDER).is_ok());
        assert!(equal_spaced_nodes(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn constant_values_give_constant_coefficients() {
        let a = divided_differences(&nodes(&[0.0, 1.0, 2.0]), &FilterValues(vec![3.5; 3])).unwrap();
        assert_eq!(a.0, vec![3.5, 0.0, 0.0]);
    }

    #[test]
    fn square_function() {
        // g(q) = q²: g[0,1] = 1, g[1,2] = 3, g[0,1,2] = (3 − 1)/2 = 1.
        let q = nodes(&[0.0, 1.0, 2.0]);
        let a = divided_differences(&q, &FilterValues(vec![0.0, 1.0, 4.0])).unwrap();
        assert_eq!(a.0, vec![0.0, 1.0, 1.0]);
        assert_eq!(newton_eval(&a, &q, 3.0), 9.0);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let err = InterpolationNodes::new(vec![0.0, 1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DistinctNodesRequired(1, 2)));
        assert!(err.to_string().contains("distinct nodes required"));
    }

    #[test]
    fn bad_nodes_rejected() {
        assert!(InterpolationNodes::new(vec![0.0]).is_err());
        assert!(InterpolationNodes::new(vec![1.0, 0.5]).is_err());
        assert!(InterpolationNodes::new(vec![-0.1, 1.0]).is_err());
        assert!(InterpolationNodes::new(vec![0.0, 2.1]).is_err());
    }

    #[test]
    fn length_mismatch() {
        let q = equal_spaced_nodes(3).unwrap();
        assert!(divided_differences(&q, &FilterValues(vec![1.0; 3])).is_err());
    }

    #[test]
    fn constant_coefficients_evaluate_to_constant() {
        let q = equal_spaced_nodes(4).unwrap();
        let a = NewtonCoefficients(vec![-1.25, 0.0, 0.0, 0.0, 0.0]);
        for x in [0.0, 0.3, 1.7, 2.0] {
            assert_eq!(newton_eval(&a, &q, x), -1.25);
        }
    }

    #[test]
    fn coefficient_map_matches_direct_computation() {
        let q = equal_spaced_nodes(5).unwrap();
        let t = FilterValues(vec![0.3, -1.0, 2.0, 0.5, 0.0, 1.5]);
        let map = coefficient_map(&q);
        let via_map = map.dot(&ndarray::Array1::from(t.0.clone()));
        let direct = divided_differences(&q, &t).unwrap();
        for (x, y) in via_map.iter().zip(&direct.0) {
            assert!((x - y).abs() < 1e-14);
        }
        for i in 0..6 {
            for j in i + 1..6 {
                assert_eq!(map[[i, j]], 0.0);
            }
        }
    }

    #[test]
    fn band_boundaries_go_up() {
        assert_eq!(band_of(0.0), 0);
        assert_eq!(band_of(MID_BAND_START), 1);
        assert_eq!(band_of(1.0), 1);
        assert_eq!(band_of(HIGH_BAND_START), 2);
        assert_eq!(band_of(2.0), 2);
    }

    #[test]
    fn export_curve() {
        let q = equal_spaced_nodes(2).unwrap();
        let export = FilterExport::new(&q, &FilterValues(vec![0.0, 1.0, 4.0])).unwrap();
        assert_eq!(export.a, vec![0.0, 1.0, 1.0]);
        let curve = export.sample_curve(200).unwrap();
        assert_eq!(curve.len(), 200);
        assert_eq!(curve[0], (0.0, 0.0));
        assert_eq!(curve[199].0, 2.0);
        for (l, g) in curve {
            assert!((g - l * l).abs() < 1e-12);
        }
    }
}
