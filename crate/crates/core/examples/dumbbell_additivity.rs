//! Entropy of two factors joined by a long bar approaches the larger factor entropy.
//!
//!     cargo run --example dumbbell_additivity

use volent::freeproduct::{additivity_report, dumbbell_entropy_exact, exact_ball_count, DumbbellModel, FactorModel};
use volent::{CoverSpec, MetricGraph};

fn main() -> volent::Result<()> {
    // Z/3 * Z/3 has entropy ln 2 / (1 + 2d)
    for d in [1.0, 2.0, 4.0] {
        let m = DumbbellModel::new(FactorModel::cyclic(3), FactorModel::cyclic(3), d)?;
        let h = dumbbell_entropy_exact(&m)?;
        let balls: Vec<f64> = [3.0, 6.0, 9.0].iter().map(|&t| exact_ball_count(&m, t)).collect::<Result<_, _>>()?;
        println!("Z3*Z3 d={d}: h = {h:.12} (closed form {:.12}), balls {balls:?}", 2f64.ln() / (1.0 + 2.0 * d));
    }

    let f8 = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial)?;
    let w3 = FactorModel::new(MetricGraph::bouquet(&[1.0; 3]), CoverSpec::Trivial)?;
    let rep = additivity_report(&f8, &w3, &[0.5, 1.0, 2.0, 4.0, 8.0, 16.0])?;
    println!("\nfigure-8 and three petals, balanced with lambda = ({:.4}, {:.4})", rep.lambda1, rep.lambda2);
    println!("alpha = {:.9}", rep.alpha);
    for r in &rep.rows {
        println!("  d = {:>4}: h = {:.9}, gap {:.3e}", r.d, r.h_d, r.gap);
    }
    println!("lower bound holds: {}, non-increasing: {}", rep.lower_ok, rep.monotone);
    Ok(())
}
