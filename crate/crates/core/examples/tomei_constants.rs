//! Permutahedra, the Tomei tiling and the constants built from them.
//!
//!     cargo run --example tomei_constants

use volent::permutahedron::{build_permutahedron, build_tomei, constants_report, permutahedron_volume, theta_map};

fn main() -> volent::Result<()> {
    for m in 1..=4 {
        let p = build_permutahedron(m)?;
        println!("m={m}: f-vector {:?}, volume {:.9}", p.lattice.f_vector(), permutahedron_volume(m)?);
    }
    for m in 1..=3 {
        let t = build_tomei(m)?;
        println!("M0 for m={m}: cells {:?}, chi {}, dual degree {}", t.cell_counts, t.euler_characteristic(), t.dual_degrees()[0]);
    }
    println!("\ntheta of the hexagon barycenter: {:?}", theta_map(2, &[2.0, 2.0, 2.0])?);
    println!();
    print!("{}", constants_report(2, 30.0)?.to_text());
    Ok(())
}
