//! Undirected attributed graphs, the normalized Laplacian, homophily and
//! train/validation/test splits.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// An undirected, unweighted graph with node labels and dense features.
///
/// Edges are stored as a symmetric CSR adjacency: every undirected edge
/// `{s, t}` appears in both `neighbors(s)` and `neighbors(t)`. Neighbor lists
/// are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    labels: Vec<usize>,
    num_classes: usize,
    features: Array2<f64>,
}

impl Graph {
    /// Builds a graph from an edge list in which each undirected edge is
    /// listed once, in either orientation.
    pub fn new(
        num_nodes: usize,
        edges: &[(usize, usize)],
        labels: Vec<usize>,
        num_classes: usize,
        features: Array2<f64>,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::config("num_classes must be at least 1"));
        }
        if labels.len() != num_nodes {
            return Err(Error::DimensionMismatch { what: "labels", expected: num_nodes, got: labels.len() });
        }
        if features.nrows() != num_nodes {
            return Err(Error::RowCountMismatch { expected: num_nodes, found: features.nrows() });
        }
        if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::LabelOutOfRange { node, label, num_classes });
        }

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(s, t) in edges {
            for node in [s, t] {
                if node >= num_nodes {
                    return Err(Error::NodeOutOfRange { node, num_nodes });
                }
            }
            if s == t {
                return Err(Error::SelfLoop(s));
            }
            adjacency[s].push(t);
            adjacency[t].push(s);
        }

        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut neighbors = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for (s, row) in adjacency.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(s.min(w[0]), s.max(w[0])));
            }
            neighbors.extend_from_slice(row);
            offsets.push(neighbors.len());
        }

        Ok(Graph { offsets, neighbors, labels, num_classes, features })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Iterates over undirected edges once each, as `(s, t)` with `s < t`, in
    /// lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes())
            .flat_map(move |s| self.neighbors(s).iter().copied().filter(move |&t| t > s).map(move |t| (s, t)))
    }

    /// `L = I - D^{-1/2} A D^{-1/2}`.
    ///
    /// Degree-0 nodes get an identity row and column, which keeps the
    /// spectrum inside `[0, 2]`.
    pub fn normalized_laplacian(&self) -> SparseMatrix {
        let n = self.num_nodes();
        let inv_sqrt: Vec<f64> = (0..n)
            .map(|i| match self.degree(i) {
                0 => 0.0,
                d => 1.0 / (d as f64).sqrt(),
            })
            .collect();

        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(self.neighbors.len() + n);
        let mut vals = Vec::with_capacity(self.neighbors.len() + n);
        offsets.push(0);
        for i in 0..n {
            let mut diagonal_done = false;
            for &j in self.neighbors(i) {
                if !diagonal_done && j > i {
                    cols.push(i);
                    vals.push(1.0);
                    diagonal_done = true;
                }
                cols.push(j);
                vals.push(-inv_sqrt[i] * inv_sqrt[j]);
            }
            if !diagonal_done {
                cols.push(i);
                vals.push(1.0);
            }
            offsets.push(cols.len());
        }
        SparseMatrix::from_csr(n, n, offsets, cols, vals)
            .expect("laplacian CSR is well-formed by construction")
    }

    /// Homophily of this graph under its own labels.
    pub fn homophily(&self) -> Result<f64> {
        homophily_ratio(self, &self.labels)
    }
}

/// Fraction of undirected edges whose endpoints share a label.
pub fn homophily_ratio(g: &Graph, labels: &[usize]) -> Result<f64> {
    if labels.len() != g.num_nodes() {
        return Err(Error::DimensionMismatch { what: "labels", expected: g.num_nodes(), got: labels.len() });
    }
    let edges = g.num_edges();
    if edges == 0 {
        return Err(Error::NoEdges);
    }
    let same = g.edges().filter(|&(s, t)| labels[s] == labels[t]).count();
    Ok(same as f64 / edges as f64)
}

/// Disjoint node index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl LabeledSplit {
    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::config("train split is empty"));
        }
        let mut seen = vec![false; num_nodes];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= num_nodes {
                return Err(Error::NodeOutOfRange { node: i, num_nodes });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::config(format!("node {i} appears in more than one split")));
            }
        }
        Ok(())
    }
}

// Guards against products like 0.29 * 100 = 28.999999999999996.
fn split_size(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Shuffles the nodes with `seed` and cuts them into train/val/test.
///
/// Sizes are `floor(fraction * n)`. When the fractions sum to one, the
/// flooring remainder goes to the test set.
pub fn random_split(num_nodes: usize, fractions: (f64, f64, f64), seed: u64) -> Result<LabeledSplit> {
    let (ftrain, fval, ftest) = fractions;
    if [ftrain, fval, ftest].iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::config("split fractions must be nonnegative"));
    }
    let total = ftrain + fval + ftest;
    if total > 1.0 + 1e-9 {
        return Err(Error::config(format!("split fractions sum to {total} > 1")));
    }
    let n_train = split_size(ftrain, num_nodes);
    if n_train == 0 {
        return Err(Error::config(format!("train fraction {ftrain} of {num_nodes} nodes selects no nodes")));
    }
    let n_val = split_size(fval, num_nodes);
    let n_test =
        if (total - 1.0).abs() < 1e-9 { num_nodes - n_train - n_val } else { split_size(ftest, num_nodes) };

    let mut order: Vec<usize> = (0..num_nodes).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let take = |range: std::ops::Range<usize>| {
        let mut v = order[range].to_vec();
        v.sort_unstable();
        v
    };
    Ok(LabeledSplit {
        train: take(0..n_train),
        val: take(n_train..n_train + n_val),
        test: take(n_train + n_val..n_train + n_val + n_test),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(n: usize, edges: &[(usize, usize)], labels: Vec<usize>, c: usize) -> Graph {
        Graph::new(n, edges, labels, c, Array2::zeros((n, 1))).unwrap()
    }

    #[test]
    fn two_node_laplacian() {
        let g = bare(2, &[(0, 1)], vec![0, 1], 2);
        let l = g.normalized_laplacian().to_dense();
        assert_eq!(l, ndarray::array![[1.0, -1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn triangle_laplacian() {
        let g = bare(3, &[(0, 1), (1, 2), (0, 2)], vec![0; 3], 1);
        let l = g.normalized_laplacian().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { -0.5 };
                assert!((l[[i, j]] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn isolated_node_gets_identity_row() {
        let g = bare(3, &[(0, 1)], vec![0, 0, 1], 2);
        let l = g.normalized_laplacian().to_dense();
        assert_eq!(l.row(2).to_vec(), vec![0.0, 0.0, 1.0]);
        assert_eq!(l.column(2).to_vec(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn path_homophily() {
        let g = bare(3, &[(0, 1), (1, 2)], vec![0, 0, 1], 2);
        assert_eq!(g.homophily().unwrap(), 0.5);
        assert_eq!(homophily_ratio(&g, &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn homophily_without_edges_is_an_error() {
        let g = bare(3, &[], vec![0, 0, 1], 2);
        assert!(matches!(g.homophily(), Err(Error::NoEdges)));
    }

    #[test]
    fn construction_rejects_bad_edges() {
        let feats = || Array2::zeros((3, 1));
        assert!(matches!(Graph::new(3, &[(1, 1)], vec![0; 3], 1, feats()), Err(Error::SelfLoop(1))));
        assert!(matches!(
            Graph::new(3, &[(0, 1), (1, 0)], vec![0; 3], 1, feats()),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::new(3, &[(0, 5)], vec![0; 3], 1, feats()),
            Err(Error::NodeOutOfRange { node: 5, .. })
        ));
        assert!(matches!(
            Graph::new(3, &[], vec![0, 2, 0], 2, feats()),
            Err(Error::LabelOutOfRange { node: 1, label: 2, .. })
        ));
        assert!(matches!(
            Graph::new(3, &[], vec![0; 3], 1, Array2::zeros((2, 1))),
            Err(Error::RowCountMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn split_sizes() {
        let s = random_split(100, (0.6, 0.2, 0.2), 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (60, 20, 20));
        let s = random_split(1000, (0.025, 0.025, 0.95), 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (25, 25, 950));
        s.validate(1000).unwrap();
    }

    #[test]
    fn split_remainder_goes_to_test() {
        let s = random_split(101, (0.6, 0.2, 0.2), 0).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (60, 20, 21));
        let s = random_split(100, (0.5, 0.1, 0.1), 0).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (50, 10, 10));
    }

    #[test]
    fn split_is_deterministic() {
        let a = random_split(500, (0.3, 0.3, 0.4), 42).unwrap();
        let b = random_split(500, (0.3, 0.3, 0.4), 42).unwrap();
        let c = random_split(500, (0.3, 0.3, 0.4), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn split_errors() {
        assert!(random_split(10, (0.05, 0.5, 0.45), 0).is_err());
        assert!(random_split(10, (0.6, 0.6, 0.0), 0).is_err());
        assert!(random_split(10, (-0.1, 0.5, 0.0), 0).is_err());
    }
}
