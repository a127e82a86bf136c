// Householder tridiagonalization followed by the implicit-shift QL method.
// The two routines follow the classic EISPACK tred2/tql2 pair.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Largest order accepted by [`sym_eig`].
pub const DEFAULT_EIG_CAP: usize = 4000;

const SYMMETRY_TOL: f64 = 1e-10;

/// `M = U diag(eigenvalues) U^T` with eigenvalues ascending and the
/// eigenvectors stored as the columns of `U`.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<f64>,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectral coefficients `c = U^T x`.
    pub fn transform(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.eigenvectors.t().dot(&x)
    }

    /// `U diag(response) U^T x` for a per-eigenvalue response vector.
    pub fn filter_signal(&self, response: &[f64], x: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut c = self.transform(x);
        c.iter_mut().zip(response).for_each(|(ci, g)| *ci *= g);
        self.eigenvectors.dot(&c)
    }

    /// `U diag(response) U^T X` for a block of signals.
    pub fn filter_signals(&self, response: &[f64], x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut c = self.eigenvectors.t().dot(&x);
        for (mut row, g) in c.rows_mut().into_iter().zip(response) {
            row *= *g;
        }
        self.eigenvectors.dot(&c)
    }

    /// Dense `U diag(response) U^T`.
    pub fn reconstruct(&self, response: &[f64]) -> Array2<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, g) in scaled.columns_mut().into_iter().zip(response) {
            col *= *g;
        }
        scaled.dot(&self.eigenvectors.t())
    }
}

/// Eigendecomposition of a dense symmetric matrix, capped at
/// [`DEFAULT_EIG_CAP`].
pub fn sym_eig(m: ArrayView2<'_, f64>) -> Result<EigenDecomposition> {
    sym_eig_with_cap(m, DEFAULT_EIG_CAP)
}

pub fn sym_eig_with_cap(m: ArrayView2<'_, f64>, cap: usize) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "eigendecomposition needs a square matrix",
            expected: n,
            got: m.ncols(),
        });
    }
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let asym = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (m[[i, j]] - m[[j, i]]).abs())
        .fold(0.0, f64::max);
    if asym >= SYMMETRY_TOL || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Asymmetric(asym));
    }
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: Vec::new(), eigenvectors: Array2::zeros((0, 0)) });
    }

    // Row-major working copy; symmetrize exactly so tiny asymmetries cannot
    // leak into the tridiagonal form.
    let mut v: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            0.5 * (m[[i, j]] + m[[j, i]])
        })
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);

    // tql2 rotates pairs of columns of V; transpose so those are contiguous.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            vt[j * n + i] = v[i * n + j];
        }
    }
    drop(v);
    tql2(n, &mut vt, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let vec = &vt[src * n..(src + 1) * n];
        let mut pivot = 0;
        for (k, x) in vec.iter().enumerate() {
            if x.abs() > vec[pivot].abs() {
                pivot = k;
            }
        }
        let sign = if vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (k, x) in vec.iter().enumerate() {
            eigenvectors[[k, col]] = sign * x;
        }
    }
    Ok(EigenDecomposition { eigenvalues: order.iter().map(|&i| d[i]).collect(), eigenvectors })
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the Householder reflections.
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// `vt` holds eigenvector k in vt[k*n..(k+1)*n].
fn tql2(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(1);
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_next = &mut hi[..n];
                    for (a, b) in col_i.iter_mut().zip(col_next.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn diagonal_matrix() {
        let eig = sym_eig(array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]].view()).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0, 3.0]);
        let want = array![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(max_abs(&(&eig.eigenvectors - &want)) < 1e-15);
    }

    #[test]
    fn two_node_laplacian() {
        let eig = sym_eig(array![[1.0, -1.0], [-1.0, 1.0]].view()).unwrap();
        assert!((eig.eigenvalues[0]).abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_by_one_and_empty() {
        let eig = sym_eig(array![[4.5]].view()).unwrap();
        assert_eq!(eig.eigenvalues, vec![4.5]);
        assert_eq!(eig.eigenvectors, array![[1.0]]);
        assert_eq!(sym_eig(Array2::zeros((0, 0)).view()).unwrap().order(), 0);
    }

    #[test]
    fn sign_convention() {
        let m = array![[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let eig = sym_eig(m.view()).unwrap();
        for col in eig.eigenvectors.columns() {
            let pivot = col.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        assert!(matches!(sym_eig(array![[1.0, 2.0], [0.0, 1.0]].view()), Err(Error::Asymmetric(_))));
        assert!(matches!(sym_eig_with_cap(Array2::eye(5).view(), 4), Err(Error::TooLarge { n: 5, cap: 4 })));
        assert!(sym_eig(Array2::zeros((2, 3)).view()).is_err());
    }

    #[test]
    fn repeated_eigenvalues() {
        let eig = sym_eig(Array2::<f64>::eye(6).view()).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        let utu = eig.eigenvectors.t().dot(&eig.eigenvectors);
        assert!(max_abs(&(utu - Array2::<f64>::eye(6))) < 1e-14);
    }
}
