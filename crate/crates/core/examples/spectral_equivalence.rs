//! Applies a Newton filter with sparse products and compares the result
//! with the eigendecomposition route `U g(Λ) Uᵀ X`.
//!
//! Run with `cargo run --example spectral_equivalence`.

use newtonnet::csbm::{generate, CsbmConfig};
use newtonnet::filter::{apply_filter, divided_differences, equal_spaced_nodes, newton_eval, FilterValues};
use newtonnet::linalg::sym_eig;

fn main() -> newtonnet::Result<()> {
    let g = generate(&CsbmConfig::new(60, 8, 0.3, 7))?;
    let laplacian = g.normalized_laplacian();
    let eig = sym_eig(laplacian.to_dense().view())?;
    println!(
        "{} nodes, {} edges, spectrum [{:.3}, {:.3}]",
        g.num_nodes(),
        g.num_edges(),
        eig.eigenvalues[0],
        eig.eigenvalues[g.num_nodes() - 1]
    );

    let q = equal_spaced_nodes(5)?;
    // High-pass values: suppress smooth components, keep oscillating ones.
    let t = FilterValues(vec![0.0, 0.1, 0.4, 0.8, 1.0, 1.0]);
    let a = divided_differences(&q, &t)?;

    let fast = apply_filter(&a, &q, &laplacian, g.features().view())?;
    let response: Vec<f64> = eig.eigenvalues.iter().map(|&l| newton_eval(&a, &q, l)).collect();
    let oracle = eig.filter_signals(&response, g.features().view());

    let err = (&fast - &oracle).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("max |sparse - spectral| = {err:.2e}");
    Ok(())
}
