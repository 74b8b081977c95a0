//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed even on success.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use volent::complex::fixtures;
use volent::entropy::{entropy_orbit_count, entropy_perron, omega_value};
use volent::freeproduct::{self as fp, DumbbellModel, FactorModel};
use volent::group::Perm;
use volent::l1norm::{self, NormProblem, Ring};
use volent::linalg::{q, qf};
use volent::permutahedron as perm;
use volent::systole::{self, GrowthProfile, MarkedGroup, SubgroupSpec};
use volent::{Chain, CoverSpec, DeltaComplex, MetricGraph};

const SEED: u64 = 20261016;

const TOL_PERRON: f64 = 1e-9;
const TOL_SCALING: f64 = 1e-9;
const TOL_DUMBBELL: f64 = 1e-9;
const TOL_BRACKET: f64 = 1e-9;
const TOL_VOLUME: f64 = 1e-9;
const TOL_SEMINORM: f64 = 1e-12;
const ORBIT_T_MAX: f64 = 25.0;
const BALANCED_GAP_FRACTION: f64 = 0.1;
const ALPHA1_PAD: f64 = 0.05;
const RATIO_FACTOR: f64 = 3.0;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_graphs(rng: &mut ChaCha8Rng, n: usize) -> Vec<MetricGraph> {
    (0..n)
        .map(|_| {
            let rank = rng.gen_range(2..=4);
            MetricGraph::random(rng, rank, 0.5, 2.0)
        })
        .collect()
}

fn c1_graph_entropy() -> Verdict {
    let cases = [
        ("figure-8", MetricGraph::figure_eight(), 3f64.ln()),
        ("theta", MetricGraph::theta(&[1.0; 3]), 2f64.ln()),
        ("wedge of 3 circles", MetricGraph::bouquet(&[1.0; 3]), 5f64.ln()),
    ];
    let mut worst: f64 = 0.0;
    for (name, g, want) in cases {
        let start = Instant::now();
        let h = entropy_perron(&g).map_err(e2s)?.value;
        ensure(start.elapsed() < Duration::from_secs(1), format!("{name} took {:?}", start.elapsed()))?;
        ensure((h - want).abs() <= TOL_PERRON, format!("{name}: {h} vs {want}"))?;
        worst = worst.max((h - want).abs());
    }
    Ok(format!("max error {worst:.1e}"))
}

fn c2_oracle_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut widest: f64 = 0.0;
    for (i, g) in random_graphs(&mut rng, 50).into_iter().enumerate() {
        let h = entropy_perron(&g).map_err(e2s)?.value;
        let e = entropy_orbit_count(&g, &CoverSpec::Trivial, ORBIT_T_MAX).map_err(e2s)?;
        ensure(e.contains(h), format!("graph {i}: [{}, {}] misses {h}", e.lower, e.upper))?;
        ensure((e.value - h).abs() <= e.width(), format!("graph {i}: estimate {} too far from {h}", e.value))?;
        widest = widest.max(e.width());
    }
    Ok(format!("50 graphs, widest bracket {widest:.3}"))
}

fn c3_scaling_and_covers() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    for g in random_graphs(&mut rng, 20) {
        let lambda: f64 = rng.gen_range(0.25..4.0);
        let h = entropy_perron(&g).map_err(e2s)?.value;
        let hs = entropy_perron(&g.scaled(lambda)).map_err(e2s)?.value;
        ensure((hs - h / lambda).abs() <= TOL_SCALING, format!("scaling by {lambda}: {hs} vs {}", h / lambda))?;
        let o = omega_value(&g, &CoverSpec::Trivial).map_err(e2s)?;
        let os = omega_value(&g.scaled(lambda), &CoverSpec::Trivial).map_err(e2s)?;
        ensure((o - os).abs() <= TOL_SCALING, format!("omega {o} vs {os}"))?;
    }
    let g = MetricGraph::figure_eight();
    let cover = g
        .covering_graph(&[Perm::from_images(vec![1, 2, 0]), Perm::from_images(vec![1, 0, 2])])
        .map_err(e2s)?;
    let h = entropy_perron(&g).map_err(e2s)?.value;
    let hc = entropy_perron(&cover).map_err(e2s)?.value;
    ensure((h - hc).abs() <= TOL_SCALING, format!("cover entropy {hc} vs {h}"))?;
    ensure((cover.total_length() - 3.0 * g.total_length()).abs() <= TOL_SCALING, "cover length is not 3x")?;
    Ok("20 scalings, 3-sheeted cover".into())
}

fn c4_dumbbell() -> Verdict {
    for d in [1.0, 2.0, 4.0, 8.0] {
        let m = DumbbellModel::new(FactorModel::cyclic(3), FactorModel::cyclic(3), d).map_err(e2s)?;
        let h = fp::dumbbell_entropy_exact(&m).map_err(e2s)?;
        let want = 2f64.ln() / (1.0 + 2.0 * d);
        ensure((h - want).abs() <= TOL_DUMBBELL, format!("Z3*Z3 d={d}: {h} vs {want}"))?;
        let e = fp::ball_count_slope(&m, 60.0 * (1.0 + 2.0 * d), fp::DEFAULT_BUDGET).map_err(e2s)?;
        ensure(
            e.lower - TOL_BRACKET <= h && h <= e.upper + TOL_BRACKET,
            format!("Z3*Z3 d={d}: slope bracket [{}, {}] misses {h}", e.lower, e.upper),
        )?;
    }
    let f8 = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial).map_err(e2s)?;
    let ds = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mut prev = f64::INFINITY;
    let mut alpha = 0.0;
    let mut h16 = 0.0;
    for &d in &ds {
        let m = DumbbellModel::balanced(&f8, &f8, d).map_err(e2s)?;
        alpha = m.alpha;
        let h = fp::dumbbell_entropy_exact(&m).map_err(e2s)?;
        ensure(alpha <= h + TOL_DUMBBELL, format!("d={d}: h {h} below alpha {alpha}"))?;
        ensure(h <= prev + TOL_DUMBBELL, format!("d={d}: h {h} increased from {prev}"))?;
        prev = h;
        h16 = h;
    }
    ensure(h16 - alpha < BALANCED_GAP_FRACTION * alpha, format!("h(16) - alpha = {}", h16 - alpha))?;
    let mut pairs = 0;
    for d in [0.6, 1.0, 2.0, 3.0] {
        let m = DumbbellModel::balanced(&f8, &f8, d).map_err(e2s)?;
        let a1 = m.alpha + ALPHA1_PAD;
        for t in [1.0, 2.5, 4.0, 6.0, 8.0] {
            let t0 = fp::choose_t0(&m, a1, t).map_err(e2s)?;
            let c = m.f1.ball_count(t0).map_err(e2s)?.max(m.f2.ball_count(t0).map_err(e2s)?);
            let v = fp::exact_ball_count(&m, t).map_err(e2s)?;
            let log_bound = fp::analytic_ball_log_bound(&m, t, a1, c, t0).map_err(e2s)?;
            ensure(v.ln() <= log_bound, format!("(t={t}, d={d}): ln v = {} > {log_bound}", v.ln()))?;
            pairs += 1;
        }
    }
    Ok(format!("alpha {alpha:.6}, h(16) - alpha {:.1e}, {pairs} bound pairs", h16 - alpha))
}

fn random_simplicial(rng: &mut ChaCha8Rng) -> DeltaComplex {
    let n = rng.gen_range(4..8);
    let tops: Vec<Vec<usize>> = (0..rng.gen_range(1..6))
        .map(|_| {
            let k = rng.gen_range(2..=4);
            let mut s = index::sample(rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    DeltaComplex::from_simplicial(n, &tops).expect("simplicial complex")
}

fn c5_l1() -> Verdict {
    let top = |x: DeltaComplex, ring: Ring| {
        let z = x.check_pseudomanifold().fundamental_cycle.expect("fundamental cycle");
        NormProblem::new(x, z, ring).expect("problem")
    };
    for (name, x, want) in [
        ("torus", fixtures::torus(), 2),
        ("genus-2", fixtures::genus_surface(2), 6),
        ("pillow", fixtures::pillow(), 2),
    ] {
        let p = top(x.clone(), Ring::Rationals);
        let r = l1norm::l1_lp(&p).map_err(e2s)?;
        ensure(r.value == q(want), format!("{name} LP {}", r.value))?;
        ensure(l1norm::dual_certificate_check(&r, &p), format!("{name} dual certificate"))?;
        let ilp = l1norm::l1_ilp(&top(x, Ring::Integers)).map_err(e2s)?;
        ensure(ilp.value == q(want), format!("{name} ILP {}", ilp.value))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut tested = 0;
    while tested < 1000 {
        let x = random_simplicial(&mut rng);
        for k in 1..=x.dim() {
            let z = Chain::from_pairs(k, (0..x.count(k)).map(|i| (i, qf(rng.gen_range(-6..=6), rng.gen_range(1..=5)))));
            let bz = x.boundary(&z).map_err(e2s)?;
            ensure(bz.l1_norm() <= z.l1_norm() * q(k as i64 + 1), format!("norm bound fails in degree {k}"))?;
            tested += 1;
        }
    }
    let t = fixtures::torus();
    let (_, h1) = t.homology_rank(1);
    let val = |z: &Chain| l1norm::l1_lp(&NormProblem::new(t.clone(), z.clone(), Ring::Rationals).unwrap()).unwrap().value;
    for _ in 0..25 {
        let (a, b, k) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4), rng.gen_range(1..=5));
        let z1 = h1[0].scale(&q(a)).add(&h1[1].scale(&q(b)));
        let z2 = h1[0].scale(&q(rng.gen_range(-3..=3))).add(&h1[1].scale(&q(rng.gen_range(-3..=3))));
        ensure(val(&z1.scale(&q(k))) == val(&z1) * q(k), "homogeneity")?;
        ensure(val(&z1.add(&z2)) <= val(&z1) + val(&z2), "triangle inequality")?;
    }
    Ok(format!("values 2/6/2, {tested} random chains"))
}

fn c6_permutahedron() -> Verdict {
    for m in 1..=4usize {
        let p = perm::build_permutahedron(m).map_err(e2s)?;
        let fact: usize = (1..=m + 1).product();
        ensure(p.vertex_count() == fact, format!("m={m}: {} vertices", p.vertex_count()))?;
        ensure(p.facet_count() == (1 << (m + 1)) - 2, format!("m={m}: {} facets", p.facet_count()))?;
    }
    for (m, want) in [(1, 2f64.sqrt()), (2, 3.0 * 3f64.sqrt()), (3, 32.0)] {
        let v = perm::permutahedron_volume(m).map_err(e2s)?;
        ensure((v - want).abs() <= TOL_VOLUME, format!("v{m} = {v}"))?;
    }
    for (m, want) in [(1, 0), (2, -2), (3, 0)] {
        let t = perm::build_tomei(m).map_err(e2s)?;
        ensure(t.euler_characteristic() == want, format!("chi(M0) for m={m}: {}", t.euler_characteristic()))?;
        let deg = (1 << (m + 1)) - 2;
        let degrees = t.dual_degrees();
        ensure(degrees.len() == 1 << m && degrees.iter().all(|&d| d == deg), format!("m={m}: dual degrees {degrees:?}"))?;
    }
    let v = perm::tomei_volume(2).map_err(e2s)?;
    ensure((v - 12.0 * 3f64.sqrt()).abs() <= TOL_VOLUME, format!("tomei volume {v}"))?;
    Ok("counts, volumes, chi, dual graphs".into())
}

fn c7_constants() -> Verdict {
    let a = perm::constants_report(2, 30.0).map_err(e2s)?;
    let b = perm::constants_report(2, 30.0).map_err(e2s)?;
    ensure(a.to_text() == b.to_text(), "reports differ between runs")?;
    ensure(a.c_prime > 0.0 && a.c_prime.is_finite(), format!("C'_2 = {}", a.c_prime))?;
    ensure(a.factor_ratio == qf(1, 27), format!("factor ratio {}", a.factor_ratio))?;
    Ok(format!("C'_2 = {:.6}, ratio {}", a.c_prime, a.factor_ratio))
}

fn c8_systoles() -> Verdict {
    let fam: Vec<SubgroupSpec> = [3, 5, 7, 11, 13].iter().map(|&p| SubgroupSpec::sl2_congruence(p)).collect();
    let scan = systole::sigma_scan_multiples(&MarkedGroup::free(2), &fam, 1).map_err(e2s)?;
    ensure(scan.rows[0].sys == 3, format!("sys(mod 3) = {}", scan.rows[0].sys))?;
    ensure(scan.sys_nondecreasing(), "sys decreases along the family")?;
    ensure(scan.fit_c > 0.0, format!("fit c = {}", scan.fit_c))?;
    let factor = scan.worst_ratio_factor();
    ensure(factor <= RATIO_FACTOR, format!("ratio column off by {factor}"))?;
    let sys: Vec<usize> = scan.rows.iter().map(|r| r.sys).collect();
    Ok(format!("sys {sys:?}, c {:.4}, worst factor {factor:.3}", scan.fit_c))
}

fn c9_estimators() -> Verdict {
    let samples: Vec<(u64, f64)> = (1..=64).map(|n| (n, 1.0)).collect();
    let mut prev = f64::INFINITY;
    for n in [4usize, 8, 16, 32, 64] {
        let e = l1norm::fekete_estimate(&samples[..n]).map_err(e2s)?;
        ensure(e.estimate == 1.0 / n as f64, format!("estimate {} at n={n}", e.estimate))?;
        ensure(e.estimate < prev, "estimate did not decrease")?;
        prev = e.estimate;
    }
    let rho: Vec<(u64, f64)> = (2..200).map(|k| (k, k as f64 / (k as f64).ln().powi(2))).collect();
    let s = systole::stabilized_seminorm(&rho, GrowthProfile::KOverLogPow(2)).map_err(e2s)?;
    ensure((s - 1.0).abs() <= TOL_SEMINORM, format!("seminorm {s}"))?;
    Ok(format!("fekete {prev}, seminorm {s}"))
}

fn c10_determinism() -> Verdict {
    let base = std::env::temp_dir().join(format!("volent-acceptance-{}", std::process::id()));
    let run = |dir: &PathBuf| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_volent"))
            .args(["verify", "all", "--seed", "7", "--out"])
            .arg(dir)
            .output()
            .map_err(e2s)?;
        ensure(out.status.code() == Some(0), format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stdout)))?;
        std::fs::read(dir.join("verify.csv")).map_err(e2s)
    };
    let a = run(&base.join("a"))?;
    let b = run(&base.join("b"))?;
    let _ = std::fs::remove_dir_all(&base);
    ensure(a == b, "verify.csv differs between runs")?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict, u64); 10] = [
        ("1 graph entropy exactness", c1_graph_entropy, 3),
        ("2 orbit-count oracle agreement", c2_oracle_agreement, 120),
        ("3 scaling and covering laws", c3_scaling_and_covers, 10),
        ("4 dumbbell additivity", c4_dumbbell, 300),
        ("5 l1 and kappa suite", c5_l1, 60),
        ("6 permutahedron and Tomei complex", c6_permutahedron, 30),
        ("7 constant pipeline", c7_constants, 120),
        ("8 systolic growth", c8_systoles, 180),
        ("9 stabilization estimators", c9_estimators, 1),
        ("10 determinism of verify all", c10_determinism, 600),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let verdict = match verdict {
            Ok(msg) if took > Duration::from_secs(limit) => Err(format!("{msg}; over the {limit}s limit")),
            v => v,
        };
        match verdict {
            Ok(msg) => println!("PASS criterion {name} ({:.2}s): {msg}", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({:.2}s): {msg}", took.as_secs_f64());
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
