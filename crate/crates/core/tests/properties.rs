use proptest::prelude::*;

use volent::complex::fixtures;
use volent::entropy::{entropy_perron, omega_value};
use volent::group::Perm;
use volent::l1norm::{l1_lp, NormProblem, Ring};
use volent::linalg::q;
use volent::permutahedron::theta_map;
use volent::{CoverSpec, MetricGraph};

fn graph() -> impl Strategy<Value = MetricGraph> {
    (1usize..=3, proptest::collection::vec((0usize..3, 0usize..3, 0.5f64..2.0), 2..6)).prop_map(|(n, extra)| {
        let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
        edges.extend(extra.into_iter().map(|(u, v, l)| (u % n, v % n, l)));
        MetricGraph::from_edges(n, &edges, 0).unwrap()
    })
}

fn perm3() -> impl Strategy<Value = Perm> {
    Just(vec![0usize, 1, 2]).prop_shuffle().prop_map(Perm::from_images)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_scales_inversely(g in graph(), lambda in 0.2f64..5.0) {
        let h = entropy_perron(&g).unwrap().value;
        let hs = entropy_perron(&g.scaled(lambda)).unwrap().value;
        prop_assert!((hs - h / lambda).abs() <= 1e-9);
        let o = omega_value(&g, &CoverSpec::Trivial).unwrap();
        let os = omega_value(&g.scaled(lambda), &CoverSpec::Trivial).unwrap();
        prop_assert!((o - os).abs() <= 1e-9);
    }

    #[test]
    fn connected_covers_keep_entropy(g in graph(), perms in proptest::collection::vec(perm3(), 8)) {
        let perms: Vec<Perm> = perms.into_iter().cycle().take(g.edge_count()).collect();
        let cover = g.covering_graph(&perms);
        prop_assume!(cover.is_ok());
        let cover = cover.unwrap();
        let h = entropy_perron(&g).unwrap().value;
        let hc = entropy_perron(&cover).unwrap().value;
        prop_assert!((h - hc).abs() <= 1e-9);
        prop_assert!((cover.total_length() - 3.0 * g.total_length()).abs() <= 1e-9);
    }

    #[test]
    fn longer_edge_never_raises_entropy(g in graph(), which in 0usize..8, factor in 1.0f64..3.0) {
        let mut ls = g.lengths();
        let i = which % ls.len();
        ls[i] *= factor;
        let h = entropy_perron(&g).unwrap().value;
        let h2 = entropy_perron(&g.with_lengths(&ls).unwrap()).unwrap().value;
        prop_assert!(h2 <= h + 1e-10);
    }

    #[test]
    fn genus_two_norm_is_homogeneous(k in 1i64..6) {
        let x = fixtures::genus_surface(2);
        let z = x.check_pseudomanifold().fundamental_cycle.unwrap();
        let v = l1_lp(&NormProblem::new(x.clone(), z.scale(&q(k)), Ring::Rationals).unwrap()).unwrap().value;
        prop_assert_eq!(v, q(6 * k));
    }

    #[test]
    fn theta_lands_in_the_simplex(w in proptest::collection::vec(0.05f64..1.0, 6)) {
        let verts = volent::permutahedron::permutations(3);
        let s: f64 = w.iter().sum();
        let x: Vec<f64> = (0..3)
            .map(|i| verts.iter().zip(&w).map(|(p, wi)| wi * (p[i] + 1) as f64).sum::<f64>() / s)
            .collect();
        let y = theta_map(2, &x).unwrap();
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(y.iter().all(|&v| v >= -1e-12));
    }
}
