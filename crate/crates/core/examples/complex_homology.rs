//! Betti numbers, pseudomanifold checks and barycentric subdivision.
//!
//!     cargo run --example complex_homology

use volent::complex::fixtures;
use volent::DeltaComplex;

fn betti(x: &DeltaComplex) -> Vec<usize> {
    (0..=x.dim()).map(|k| x.homology_rank(k).0).collect()
}

fn main() -> volent::Result<()> {
    let cases = [
        ("circle", fixtures::circle()),
        ("torus", fixtures::torus()),
        ("projective plane", fixtures::projective_plane()),
        ("genus 2", fixtures::genus_surface(2)),
        ("3-simplex", fixtures::simplex(3)),
        ("torus v pillow", fixtures::torus().wedge(0, &fixtures::pillow(), 0)?),
    ];
    for (name, x) in &cases {
        let pm = x.check_pseudomanifold();
        let sd = x.barycentric_subdivide().complex;
        println!(
            "{name:>16}: betti {:?} chi {} pseudomanifold {} orientable {} top {} -> {} after subdivision",
            betti(x),
            x.euler_characteristic(),
            pm.is_pseudomanifold,
            pm.orientable,
            x.top_count(),
            sd.top_count()
        );
        for f in &pm.failures {
            println!("{:>18}{:?} at {:?}", "", f.condition, f.witnesses);
        }
    }
    print!("\ntorus file format:\n{}", fixtures::torus().to_text());
    Ok(())
}
