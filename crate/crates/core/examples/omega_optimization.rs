//! Minimize entropy times length over edge lengths of fixed total.
//!
//!     cargo run --example omega_optimization

use volent::entropy::minimize_omega_lengths;
use volent::MetricGraph;

fn main() -> volent::Result<()> {
    for (name, g) in [
        ("figure-8", MetricGraph::figure_eight()),
        ("theta", MetricGraph::theta(&[1.0, 2.0, 3.0])),
        ("three petals", MetricGraph::bouquet(&[0.3, 1.0, 2.0])),
    ] {
        let (lengths, omega) = minimize_omega_lengths(&g, 1.0, 42)?;
        let shown: Vec<String> = lengths.iter().map(|l| format!("{l:.4}")).collect();
        println!("{name:>12}: omega {omega:.9} at lengths [{}]", shown.join(", "));
    }
    println!("2 ln 3 = {:.9}, 3 ln 2 = {:.9}", 2.0 * 3f64.ln(), 3.0 * 2f64.ln());
    Ok(())
}
