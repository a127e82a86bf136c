//! Interpolates a spectral response in Newton form and checks the fit.
//!
//! Run with `cargo run --example newton_interpolation`.

use newtonnet::filter::{divided_differences, equal_spaced_nodes, newton_eval, FilterValues};

fn main() -> newtonnet::Result<()> {
    // A band-pass bump centered at λ = 1.
    let target = |x: f64| (-4.0 * (x - 1.0).powi(2)).exp();

    for k in [2, 5, 10] {
        let q = equal_spaced_nodes(k)?;
        let t = FilterValues(q.as_slice().iter().map(|&x| target(x)).collect());
        let a = divided_differences(&q, &t)?;

        let node_err = q
            .as_slice()
            .iter()
            .zip(&t.0)
            .map(|(&x, &v)| (newton_eval(&a, &q, x) - v).abs())
            .fold(0.0, f64::max);
        let curve_err = (0..=200)
            .map(|i| {
                let x = 2.0 * i as f64 / 200.0;
                (newton_eval(&a, &q, x) - target(x)).abs()
            })
            .fold(0.0, f64::max);
        println!("K = {k:2}: max error at nodes {node_err:.1e}, on [0, 2] {curve_err:.3}");
    }

    // A degree-3 polynomial is reproduced exactly once K >= 3.
    let cubic = |x: f64| 0.5 - x + 0.75 * x * x - 0.125 * x.powi(3);
    let q = equal_spaced_nodes(3)?;
    let a = divided_differences(&q, &FilterValues(q.as_slice().iter().map(|&x| cubic(x)).collect()))?;
    println!("cubic coefficients in Newton form: {:?}", a.0);
    println!("g(1.7) = {} (exact {})", newton_eval(&a, &q, 1.7), cubic(1.7));
    Ok(())
}
