//! Relative entropy for quotients of the universal cover, read from files in `data/`.
//!
//!     cargo run --example cover_entropy

use std::path::Path;

use volent::entropy::{entropy_perron, entropy_relative, omega_value};
use volent::group::Perm;
use volent::{CoverSpec, MetricGraph};

fn read(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    std::fs::read_to_string(p).expect("data file")
}

fn main() -> volent::Result<()> {
    let g = MetricGraph::parse(&read("fig8.graph"))?;
    let full = entropy_perron(&g)?.value;
    println!("universal cover: {full:.12}");

    for file in ["fig8_s3.cover", "fig8_kill_a.cover"] {
        let spec = CoverSpec::parse(&read(file), &g)?;
        let e = entropy_relative(&g, &spec)?;
        println!("{file}: {:.6} in [{:.6}, {:.6}] via {}", e.value, e.lower, e.upper, e.method.label());
    }

    // a 3-sheeted cover is a new graph with the same entropy and three times the length
    let cover = g.covering_graph(&[Perm::from_images(vec![1, 2, 0]), Perm::from_images(vec![1, 0, 2])])?;
    println!(
        "3-sheeted cover: entropy {:.12}, length {}, omega {:.6} (base {:.6})",
        entropy_perron(&cover)?.value,
        cover.total_length(),
        omega_value(&cover, &CoverSpec::Trivial)?,
        omega_value(&g, &CoverSpec::Trivial)?
    );
    Ok(())
}
