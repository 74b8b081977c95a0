//! Volume entropy of a few metric graphs, exact and by counting orbit points.
//!
//!     cargo run --example graph_entropy

use volent::entropy::{entropy_perron, orbit_count_scan, DEFAULT_BUDGET};
use volent::{CoverSpec, MetricGraph};

fn main() -> volent::Result<()> {
    let graphs = [
        ("figure-8", MetricGraph::figure_eight()),
        ("theta", MetricGraph::theta(&[1.0, 1.0, 1.0])),
        ("three petals", MetricGraph::bouquet(&[1.0, 1.0, 1.0])),
        ("uneven figure-8", MetricGraph::bouquet(&[1.0, 2.0])),
    ];
    for (name, g) in &graphs {
        let exact = entropy_perron(g)?;
        let scan = orbit_count_scan(g, &CoverSpec::Trivial, 20.0, DEFAULT_BUDGET)?;
        let e = &scan.estimate;
        println!("{name:>16}: {:.12}  counted {:.4} in [{:.4}, {:.4}]", exact.value, e.value, e.lower, e.upper);
    }

    // a pendant edge changes nothing
    let g = MetricGraph::from_edges(2, &[(0, 0, 1.0), (0, 0, 1.0), (0, 1, 5.0)], 1)?;
    println!("figure-8 with a whisker: {:.12}", entropy_perron(&g)?.value);
    Ok(())
}
