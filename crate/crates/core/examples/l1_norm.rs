//! Least l1 norm of homology classes, fractional and integral, with a dual certificate.
//!
//!     cargo run --example l1_norm

use volent::complex::fixtures;
use volent::l1norm::{dual_certificate_check, kappa_of_cycle, l1_ilp, l1_lp, NormProblem, Ring};
use volent::linalg::q;

fn main() -> volent::Result<()> {
    let surfaces = [
        ("torus", fixtures::torus()),
        ("pillow", fixtures::pillow()),
        ("genus 2", fixtures::genus_surface(2)),
        ("genus 3", fixtures::genus_surface(3)),
    ];
    for (name, x) in surfaces {
        let z = x.check_pseudomanifold().fundamental_cycle.expect("closed orientable surface");
        let p = NormProblem::new(x.clone(), z.clone(), Ring::Rationals)?;
        let lp = l1_lp(&p)?;
        let ilp = l1_ilp(&NormProblem::new(x.clone(), z, Ring::Integers)?)?;
        println!(
            "{name:>8}: lp {} ilp {} kappa {} certificate ok: {}",
            lp.value,
            ilp.value,
            kappa_of_cycle(&x)?,
            dual_certificate_check(&lp, &p)
        );
    }

    let t = fixtures::torus();
    let (_, h1) = t.homology_rank(1);
    let z = h1[0].scale(&q(2)).add(&h1[1].scale(&q(3)));
    let r = l1_lp(&NormProblem::new(t, z, Ring::Rationals)?)?;
    println!("torus class 2a + 3b: {} ({:?})", r.value, r.proof);
    Ok(())
}
