#![allow(dead_code)]

use ndarray::Array2;
use newtonnet::Graph;
use rand::{Rng, RngExt};

/// Erdős–Rényi style graph with uniform features in [-1, 1].
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, classes: usize, features: usize) -> Graph {
    let mut edges = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            if rng.random::<f64>() < p {
                edges.push((s, t));
            }
        }
    }
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    let x = Array2::from_shape_simple_fn((n, features), || rng.random_range(-1.0..1.0));
    Graph::new(n, &edges, labels, classes, x).unwrap()
}

/// `I − D^{-1/2} A D^{-1/2}` from explicit dense products; isolated nodes
/// get identity rows.
pub fn dense_laplacian(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let mut a = Array2::<f64>::zeros((n, n));
    for (s, t) in g.edges() {
        a[[s, t]] = 1.0;
        a[[t, s]] = 1.0;
    }
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let deg: f64 = a.row(i).sum();
        d[[i, i]] = if deg > 0.0 { 1.0 / deg.sqrt() } else { 0.0 };
    }
    Array2::eye(n) - d.dot(&a).dot(&d)
}

/// Lagrange form of the interpolant through `(q_k, t_k)`.
pub fn lagrange(q: &[f64], t: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for (k, (&qk, &tk)) in q.iter().zip(t).enumerate() {
        let mut w = tk;
        for (i, &qi) in q.iter().enumerate() {
            if i != k {
                w *= (x - qi) / (qk - qi);
            }
        }
        sum += w;
    }
    sum
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

use newtonnet::filter::{equal_spaced_nodes, FilterValues};
use newtonnet::model::{gradients, total_loss, MlpParams, NewtonNetParams, Problem, ShapeRegularization};

/// Analytic gradients against central differences (step 1e-5) for every
/// parameter of one random 30-node instance.
pub struct GradientCheck {
    /// Worst `|a - n| / max(|a|, |n|)` over entries with `max(|a|, |n|) > 1e-6`.
    pub max_relative: f64,
    pub max_absolute: f64,
    pub entries: usize,
}

pub fn gradient_check(seed: u64) -> GradientCheck {
    let mut r = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let classes = r.random_range(2..5);
    let g = random_graph(&mut r, 30, 0.15, classes, 5);
    let k = r.random_range(3..9);
    let i = r.random_range(1..k - 1);
    let j = r.random_range(i + 1..k);
    let grid = [0.0, 1.0, 3.0, 5.0];
    let gammas = [0, 1, 2].map(|_| grid[r.random_range(0..4)]);
    let reg = ShapeRegularization { gammas: if gammas == [0.0; 3] { [1.0; 3] } else { gammas }, i, j };
    let h = r.random::<f64>();

    let nodes = equal_spaced_nodes(k).unwrap();
    let laplacian = g.normalized_laplacian();
    let train: Vec<usize> = (0..30).filter(|_| r.random::<f64>() < 0.5).collect();
    let train = if train.is_empty() { vec![0] } else { train };
    let problem =
        Problem::new(&laplacian, g.features().view(), g.labels(), &train, classes, &nodes, Some(reg))
            .unwrap();
    let mut p = NewtonNetParams {
        mlp: MlpParams::init(&mut r, 5, 6, classes),
        t: FilterValues((0..=k).map(|_| r.random_range(-1.0..1.0)).collect()),
    };
    // Nonzero biases so their gradients are exercised away from symmetry.
    p.mlp.b1.mapv_inplace(|_| 0.1);
    p.mlp.b2.mapv_inplace(|_| -0.05);

    let (_, grads) = gradients(&p, &problem, h).unwrap();
    let loss = |q: &NewtonNetParams| total_loss(q, &problem, h).unwrap().total();
    let step = 1e-5;
    let mut res = GradientCheck { max_relative: 0.0, max_absolute: 0.0, entries: 0 };
    let mut check = |analytic: f64, numeric: f64| {
        let diff = (analytic - numeric).abs();
        let scale = analytic.abs().max(numeric.abs());
        res.max_absolute = res.max_absolute.max(diff);
        if scale > 1e-6 {
            res.max_relative = res.max_relative.max(diff / scale);
        }
        res.entries += 1;
    };

    macro_rules! sweep {
        ($field:ident) => {
            for idx in 0..p.mlp.$field.len() {
                let mut plus = p.clone();
                let mut minus = p.clone();
                plus.mlp.$field.as_slice_mut().unwrap()[idx] += step;
                minus.mlp.$field.as_slice_mut().unwrap()[idx] -= step;
                let numeric = (loss(&plus) - loss(&minus)) / (2.0 * step);
                check(grads.mlp.$field.as_slice().unwrap()[idx], numeric);
            }
        };
    }
    sweep!(w1);
    sweep!(b1);
    sweep!(w2);
    sweep!(b2);
    for idx in 0..p.t.0.len() {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus.t.0[idx] += step;
        minus.t.0[idx] -= step;
        check(grads.t.0[idx], (loss(&plus) - loss(&minus)) / (2.0 * step));
    }
    res
}

/// Runs the `newtonnet` binary and returns its exit code and stderr.
pub fn newtonnet(args: &[&str]) -> (i32, String) {
    let out =
        std::process::Command::new(env!("CARGO_BIN_EXE_newtonnet")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}
