//! Self-check suites behind `volent verify`.
//!
//! Every check is deterministic given the seed, and the detail strings carry
//! no timings, so two runs produce identical tables.

use num_traits::Zero;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::Chain;
use crate::complex::{fixtures, DeltaComplex};
use crate::entropy::{self, entropy_orbit_count, entropy_perron, entropy_relative, omega_value};
use crate::error::{Error, Result};
use crate::freeproduct::{self as fp, DumbbellModel, FactorModel};
use crate::graph::{CoverSpec, MetricGraph, Voltage};
use crate::group::{FreeWord, Perm};
use crate::l1norm::{self, NormProblem, Ring};
use crate::linalg::{q, qf, Q};
use crate::permutahedron as perm;
use crate::systole::{self, GrowthProfile, MarkedGroup, SubgroupSpec};
use crate::table::{format_float, Table};

pub const SUITES: [&str; 5] = ["entropy", "dumbbell", "l1", "tomei", "systole"];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub budget: usize,
    /// Negative control: tamper with one l1 dual certificate before checking it.
    pub corrupt_dual: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 1, budget: entropy::DEFAULT_BUDGET, corrupt_dual: false }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["suite", "check", "passed", "detail"]);
        for c in &self.checks {
            t.push(vec![c.suite.into(), c.name.into(), c.passed.into(), c.detail.clone().into()]);
        }
        t
    }
}

type Outcome = Result<(bool, String)>;

struct Runner {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Runner {
    fn check(&mut self, name: &'static str, f: impl FnOnce() -> Outcome) {
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(Check { suite: self.suite, name, passed, detail });
    }
}

fn f(x: f64) -> String {
    format_float(x)
}

pub fn run_verify_suite(name: &str, opts: &VerifyOptions) -> Result<VerifyReport> {
    let names: Vec<&str> = match name {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(Error::Domain(format!("unknown suite {other:?}"))),
    };
    let mut report = VerifyReport::default();
    for s in names {
        let mut r = Runner { suite: SUITES.iter().find(|x| **x == s).unwrap(), checks: Vec::new() };
        match s {
            "entropy" => entropy_suite(&mut r, opts),
            "dumbbell" => dumbbell_suite(&mut r, opts),
            "l1" => l1_suite(&mut r, opts),
            "tomei" => tomei_suite(&mut r, opts),
            _ => systole_suite(&mut r, opts),
        }
        report.checks.extend(r.checks);
    }
    Ok(report)
}

fn rng_for(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}

fn random_graphs(rng: &mut ChaCha8Rng, n: usize) -> Vec<MetricGraph> {
    (0..n)
        .map(|_| {
            let rank = rng.gen_range(2..=4);
            MetricGraph::random(rng, rank, 0.5, 2.0)
        })
        .collect()
}

fn entropy_suite(r: &mut Runner, opts: &VerifyOptions) {
    let ln = f64::ln;
    r.check("reference_values", || {
        let cases = [
            (MetricGraph::figure_eight(), ln(3.0)),
            (MetricGraph::theta(&[1.0; 3]), ln(2.0)),
            (MetricGraph::bouquet(&[1.0; 3]), ln(5.0)),
        ];
        let mut worst: f64 = 0.0;
        for (g, want) in &cases {
            worst = worst.max((entropy_perron(g)?.value - want).abs());
        }
        Ok((worst <= 1e-9, format!("max error {}", f(worst))))
    });

    r.check("scaling_and_omega", || {
        let mut rng = rng_for(opts, 1);
        let mut worst: f64 = 0.0;
        for g in random_graphs(&mut rng, 20) {
            let lambda = rng.gen_range(0.3..3.0);
            let h = entropy_perron(&g)?.value;
            let hs = entropy_perron(&g.scaled(lambda))?.value;
            worst = worst.max((hs - h / lambda).abs());
            let o = omega_value(&g, &CoverSpec::Trivial)?;
            let os = omega_value(&g.scaled(lambda), &CoverSpec::Trivial)?;
            worst = worst.max((o - os).abs());
        }
        Ok((worst <= 1e-9, format!("20 graphs, max deviation {}", f(worst))))
    });

    r.check("finite_cover", || {
        let g = MetricGraph::figure_eight();
        let a = Perm::parse_cycles("(0 1 2)", 3).map_err(Error::Domain)?;
        let b = Perm::parse_cycles("(0 1)", 3).map_err(Error::Domain)?;
        let cover = g.covering_graph(&[a, b])?;
        let h = entropy_perron(&g)?.value;
        let hc = entropy_perron(&cover)?.value;
        let o = omega_value(&g, &CoverSpec::Trivial)?;
        let oc = omega_value(&cover, &CoverSpec::Trivial)?;
        let ok = (h - hc).abs() <= 1e-9
            && (cover.total_length() - 3.0 * g.total_length()).abs() <= 1e-9
            && (oc - 3.0 * o).abs() <= 1e-9;
        Ok((ok, format!("ent {} vs {}, length {}, omega {}", f(h), f(hc), f(cover.total_length()), f(oc))))
    });

    r.check("orbit_count_oracle", || {
        let mut rng = rng_for(opts, 2);
        let mut misses = 0;
        let mut widest: f64 = 0.0;
        for g in random_graphs(&mut rng, 50) {
            let h = entropy_perron(&g)?.value;
            let e = entropy::orbit_count_scan(&g, &CoverSpec::Trivial, 25.0, opts.budget)?.estimate;
            widest = widest.max(e.width());
            if !e.contains(h) || (e.value - h).abs() > e.width() {
                misses += 1;
            }
        }
        Ok((misses == 0, format!("50 graphs at t_max 25, {misses} misses, widest bracket {}", f(widest))))
    });

    r.check("relative_below_full", || {
        let mut rng = rng_for(opts, 3);
        let mut worst = f64::NEG_INFINITY;
        let mut count = 0;
        for g in random_graphs(&mut rng, 6) {
            let h = entropy_perron(&g)?.value;
            let m = g.edge_count();
            let perms: Vec<Perm> = (0..m)
                .map(|_| {
                    let mut p: Vec<usize> = (0..3).collect();
                    p.shuffle(&mut rng);
                    Perm::from_images(p)
                })
                .collect();
            let specs = [CoverSpec::FiniteQuotient { degree: 3, images: perms }, CoverSpec::identity_free(&g)];
            for s in &specs {
                let e = entropy_relative(&g, s)?;
                worst = worst.max(e.value - h);
                count += 1;
            }
        }
        // a quotient killing one loop of the figure-8, and a non-injective map onto F2
        let f8 = MetricGraph::figure_eight();
        let kill_a = CoverSpec::free(&f8, 1, &[("b", FreeWord::generator(1))])?;
        worst = worst.max(entropy_orbit_count(&f8, &kill_a, 20.0)?.value - entropy_perron(&f8)?.value);
        let w3 = MetricGraph::bouquet(&[1.0; 3]);
        let onto = CoverSpec::free(
            &w3,
            2,
            &[("e0", FreeWord::generator(1)), ("e1", FreeWord::generator(2)), ("e2", FreeWord::from_letters(vec![1, 2]))],
        )?;
        worst = worst.max(entropy_orbit_count(&w3, &onto, 10.0)?.value - entropy_perron(&w3)?.value);
        count += 2;
        Ok((worst <= 1e-9, format!("{count} covers, max excess {}", f(worst.max(0.0)))))
    });

    r.check("edge_monotonicity", || {
        let mut rng = rng_for(opts, 4);
        let mut worst = f64::NEG_INFINITY;
        for g in random_graphs(&mut rng, 20) {
            let h = entropy_perron(&g)?.value;
            let i = rng.gen_range(0..g.edge_count());
            let mut ls = g.lengths();
            ls[i] *= rng.gen_range(1.1..2.0);
            let h2 = entropy_perron(&g.with_lengths(&ls)?)?.value;
            worst = worst.max(h2 - h);
        }
        Ok((worst <= 1e-10, format!("20 graphs, max increase {}", f(worst.max(0.0)))))
    });

    r.check("basepoint_independence", || {
        let g = MetricGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.8), (2, 0, 1.3), (1, 1, 0.6)], 0)?;
        let h = entropy_perron(&g)?.value;
        let mut ok = true;
        for p in 0..3 {
            ok &= entropy_orbit_count(&g.with_basepoint(p)?, &CoverSpec::Trivial, 20.0)?.contains(h);
        }
        Ok((ok, format!("perron {}", f(h))))
    });

    r.check("omega_minimum", || {
        let (_, om) = entropy::minimize_omega_lengths(&MetricGraph::figure_eight(), 1.0, opts.seed)?;
        let want = 2.0 * ln(3.0);
        Ok(((om - want).abs() <= 1e-6, format!("omega {} vs {}", f(om), f(want))))
    });
}

fn rot(n: usize, k: usize) -> Voltage {
    Voltage::Perm(Perm::from_images((0..n).map(|i| (i + k) % n).collect()))
}

/// Multiply in Z_p ∗ Z_q by cancelling adjacent letters until stable.
fn brute_reduce(word: &[(usize, usize)], orders: [usize; 2]) -> Vec<(usize, usize)> {
    let mut w: Vec<(usize, usize)> = word.iter().copied().filter(|&(f, k)| k % orders[f - 1] != 0).collect();
    let mut i = 0;
    while i + 1 < w.len() {
        if w[i].0 == w[i + 1].0 {
            let fac = w[i].0;
            let k = (w[i].1 + w[i + 1].1) % orders[fac - 1];
            w.remove(i + 1);
            if k == 0 {
                w.remove(i);
                i = i.saturating_sub(1);
            } else {
                w[i].1 = k;
            }
        } else {
            i += 1;
        }
    }
    w
}

fn z3z3(d: f64) -> Result<DumbbellModel> {
    DumbbellModel::new(FactorModel::cyclic(3), FactorModel::cyclic(3), d)
}

fn dumbbell_suite(r: &mut Runner, opts: &VerifyOptions) {
    r.check("z3z3_closed_form", || {
        let mut worst: f64 = 0.0;
        for d in [1.0, 2.0, 4.0, 8.0] {
            let h = fp::dumbbell_entropy_exact(&z3z3(d)?)?;
            worst = worst.max((h - 2f64.ln() / (1.0 + 2.0 * d)).abs());
        }
        Ok((worst <= 1e-9, format!("max error {}", f(worst))))
    });

    r.check("z3z3_ball_slope", || {
        let mut ok = true;
        let mut detail = Vec::new();
        for d in [1.0, 2.0] {
            let m = z3z3(d)?;
            let e = fp::ball_count_slope(&m, 60.0 * (1.0 + 2.0 * d), opts.budget)?;
            let h = fp::dumbbell_entropy_exact(&m)?;
            ok &= e.lower - 1e-9 <= h && h <= e.upper + 1e-9;
            detail.push(format!("d={} [{}, {}]", f(d), f(e.lower), f(e.upper)));
        }
        Ok((ok, detail.join("; ")))
    });

    r.check("z2z2_flat", || {
        let m = DumbbellModel::new(FactorModel::cyclic(2), FactorModel::cyclic(2), 3.0)?;
        let h = fp::dumbbell_entropy_exact(&m)?;
        Ok((h == 0.0, format!("h {}", f(h))))
    });

    let f8 = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial);
    let f8 = match f8 {
        Ok(x) => x,
        Err(e) => {
            r.check("figure_eight_factor", || Err(e));
            return;
        }
    };

    r.check("balanced_figure_eight", || {
        let ds = [1.0, 2.0, 4.0, 8.0, 16.0];
        let rep = fp::additivity_report(&f8, &f8, &ds)?;
        let last = rep.rows.last().unwrap();
        let ok = rep.balanced && rep.lower_ok && rep.monotone && last.h_d - rep.alpha < 0.1 * rep.alpha;
        let hs: Vec<String> = rep.rows.iter().map(|row| f(row.h_d)).collect();
        Ok((ok, format!("alpha {}, h {}", f(rep.alpha), hs.join(" "))))
    });

    r.check("counting_bound", || {
        let mut worst = f64::NEG_INFINITY;
        let mut n = 0;
        let alpha1_pad = 0.05;
        for d in [0.75, 1.0, 2.0] {
            let m = DumbbellModel::balanced(&f8, &f8, d)?;
            let a1 = m.alpha + alpha1_pad;
            for t in [2.0, 4.0, 6.0, 8.0] {
                let t0 = fp::choose_t0(&m, a1, t)?;
                let c = m.f1.ball_count(t0)?.max(m.f2.ball_count(t0)?);
                let v = fp::exact_ball_count(&m, t)?;
                let b = fp::analytic_ball_log_bound(&m, t, a1, c, t0)?;
                worst = worst.max(v.ln() - b);
                n += 1;
            }
        }
        Ok((worst <= 1e-12, format!("{n} (t,d) pairs, max log excess {}", f(worst))))
    });

    r.check("sandwich", || {
        let base = DumbbellModel::balanced(&f8, &f8, 1.0)?.extended(40.0, opts.budget)?;
        let a = base.alpha;
        let a1 = a + 0.05;
        let t0 = fp::choose_t0(&base, a1, 40.0)?;
        let c = base.f1.ball_count(t0)?.max(base.f2.ball_count(t0)?);
        let mut rows = Vec::new();
        let mut ok = true;
        for d in [8.0, 16.0, 32.0] {
            // threshold C·d·e^{-α1(2d-1)} < 1, in logs
            if c.ln() + f64::ln(d) - a1 * (2.0 * d - 1.0) >= 0.0 {
                continue;
            }
            let h = fp::dumbbell_entropy_exact(&base.with_d(d)?)?;
            ok &= a <= h + 1e-12 && h - a <= (a1 - a) + 1.0 / d;
            rows.push(format!("d={} gap {}", f(d), f(h - a)));
        }
        ok &= !rows.is_empty();
        Ok((ok, format!("t0 {}; {}", f(t0), rows.join("; "))))
    });

    r.check("swap_symmetry", || {
        let m = DumbbellModel::new(FactorModel::cyclic(3), f8.clone(), 1.0)?;
        let s = m.swapped();
        let dh = (fp::dumbbell_entropy_exact(&m)? - fp::dumbbell_entropy_exact(&s)?).abs();
        let mut same = true;
        for t in [3.0, 5.0, 8.0] {
            same &= fp::exact_ball_count(&m, t)? == fp::exact_ball_count(&s, t)?;
        }
        Ok((same && dh <= 1e-12, format!("entropy difference {}", f(dh))))
    });

    r.check("normal_form_uniqueness", || {
        let mut rng = rng_for(opts, 5);
        let mut bad = 0;
        for orders in [[3, 3], [4, 2]] {
            let m = DumbbellModel::new(FactorModel::cyclic(orders[0]), FactorModel::cyclic(orders[1]), 1.0)?;
            let nf_of = |w: &[(usize, usize)]| -> Result<fp::NormalForm> {
                let letters: Vec<(usize, Voltage)> = w.iter().map(|&(fac, k)| (fac, rot(orders[fac - 1], k))).collect();
                fp::normal_form(&letters, &m)
            };
            let flatten = |nf: &fp::NormalForm| -> Vec<(usize, usize)> {
                nf.letters()
                    .iter()
                    .map(|l| {
                        let k = (0..orders[l.factor - 1]).find(|&k| rot(orders[l.factor - 1], k) == l.element).unwrap();
                        (l.factor, k)
                    })
                    .collect()
            };
            for _ in 0..200 {
                let mut word = || -> Vec<(usize, usize)> {
                    let len = rng.gen_range(0..=8);
                    (0..len)
                        .map(|_| {
                            let fac = rng.gen_range(1..=2);
                            (fac, rng.gen_range(0..orders[fac - 1]))
                        })
                        .collect()
                };
                let (u, v) = (word(), word());
                let uv: Vec<_> = u.iter().chain(&v).copied().collect();
                let direct = nf_of(&uv)?;
                let mut staged = flatten(&nf_of(&u)?);
                staged.extend(flatten(&nf_of(&v)?));
                if direct != nf_of(&staged)? || flatten(&direct) != brute_reduce(&uv, orders) {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("400 products, {bad} mismatches")))
    });

    r.check("distance_formula", || {
        // radius 6·(2d + max ρ) for the finite pairs; the tree factor gets a fixed window
        let models = [
            (z3z3(1.0)?, 18.0),
            (DumbbellModel::new(FactorModel::cyclic(4), FactorModel::cyclic(2), 1.0)?, 24.0),
            (DumbbellModel::new(FactorModel::cyclic(3), f8.clone(), 0.75)?, 9.0),
        ];
        let mut worst: f64 = 0.0;
        let mut total = 0usize;
        let mut count_ok = true;
        for (m, radius) in &models {
            let (m, radius) = (m.extended(*radius, opts.budget)?, *radius);
            let found = fp::cover_orbit_distances(&m, radius, opts.budget)?;
            count_ok &= found.len() as f64 == fp::exact_ball_count(&m, radius)?;
            for (nf, d) in &found {
                worst = worst.max((fp::orbit_distance(nf, &m)? - d).abs());
            }
            total += found.len();
        }
        Ok((count_ok && worst <= 1e-9, format!("{total} orbit points, max deviation {}", f(worst))))
    });
}

fn random_simplicial(rng: &mut ChaCha8Rng) -> Result<DeltaComplex> {
    let n = rng.gen_range(4..8);
    let tops: Vec<Vec<usize>> = (0..rng.gen_range(1..6))
        .map(|_| {
            let k = rng.gen_range(2..=4.min(n));
            let mut s = index::sample(rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    DeltaComplex::from_simplicial(n, &tops)
}

fn random_chain(rng: &mut ChaCha8Rng, x: &DeltaComplex, k: usize) -> Chain {
    Chain::from_pairs(k, (0..x.count(k)).map(|i| (i, qf(rng.gen_range(-5..=5), rng.gen_range(1..=4)))))
}

fn betti(x: &DeltaComplex) -> Vec<usize> {
    (0..=x.dim()).map(|k| x.homology_rank(k).0).collect()
}

fn fundamental(x: &DeltaComplex) -> Result<Chain> {
    x.check_pseudomanifold().fundamental_cycle.ok_or_else(|| Error::Invariant("no fundamental cycle".into()))
}

fn l1_suite(r: &mut Runner, opts: &VerifyOptions) {
    r.check("boundary_squared", || {
        let mut rng = rng_for(opts, 6);
        let (mut tested, mut bad) = (0, 0);
        while tested < 1000 {
            let x = random_simplicial(&mut rng)?;
            for k in 2..=x.dim() {
                let c = random_chain(&mut rng, &x, k);
                if !x.boundary(&x.boundary(&c)?)?.is_empty() {
                    bad += 1;
                }
                tested += 1;
            }
        }
        Ok((bad == 0, format!("{tested} chains, {bad} nonzero")))
    });

    r.check("boundary_norm_bound", || {
        let mut rng = rng_for(opts, 7);
        let (mut tested, mut bad) = (0, 0);
        while tested < 1000 {
            let x = random_simplicial(&mut rng)?;
            for k in 1..=x.dim() {
                let c = random_chain(&mut rng, &x, k);
                if x.boundary(&c)?.l1_norm() > c.l1_norm() * q(k as i64 + 1) {
                    bad += 1;
                }
                tested += 1;
            }
        }
        Ok((bad == 0, format!("{tested} chains, {bad} violations")))
    });

    r.check("subdivision", || {
        let mut rng = rng_for(opts, 8);
        let mut xs = vec![fixtures::torus(), fixtures::pillow(), fixtures::projective_plane(), fixtures::simplex(3)];
        for _ in 0..5 {
            xs.push(random_simplicial(&mut rng)?);
        }
        let mut bad = 0;
        for x in &xs {
            let sd = x.barycentric_subdivide().complex;
            let fact: usize = (1..=x.dim() + 1).product();
            if sd.top_count() != fact * x.top_count() || betti(&sd) != betti(x) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{} complexes, {bad} mismatches", xs.len())))
    });

    r.check("orientability", || {
        let xs = [
            fixtures::torus(),
            fixtures::pillow(),
            fixtures::projective_plane(),
            fixtures::genus_surface(2),
            fixtures::circle(),
            fixtures::torus().barycentric_subdivide().complex,
        ];
        let mut bad = 0;
        for x in &xs {
            let rep = x.check_pseudomanifold();
            if rep.is_pseudomanifold && x.is_connected() && rep.orientable != (x.homology_rank(x.dim()).0 == 1) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{} complexes, {bad} disagreements", xs.len())))
    });

    r.check("wedge_counts", || {
        let pairs = [
            (fixtures::torus(), fixtures::pillow()),
            (fixtures::torus(), fixtures::genus_surface(2)),
            (fixtures::circle(), fixtures::bouquet(3)),
        ];
        let mut ok = true;
        for (a, b) in &pairs {
            ok &= a.wedge(0, b, 0)?.top_count() == a.top_count() + b.top_count();
        }
        Ok((ok, format!("{} wedges", pairs.len())))
    });

    let top = |x: DeltaComplex, ring: Ring| -> Result<NormProblem> {
        let z = fundamental(&x)?;
        NormProblem::new(x, z, ring)
    };

    r.check("surface_values", || {
        let mut got = Vec::new();
        let mut ok = true;
        for (x, want) in [(fixtures::torus(), 2), (fixtures::genus_surface(2), 6), (fixtures::pillow(), 2)] {
            let lp = l1norm::l1_lp(&top(x.clone(), Ring::Rationals)?)?.value;
            let ilp = l1norm::l1_ilp(&top(x, Ring::Integers)?)?.value;
            ok &= lp == q(want) && ilp == q(want);
            got.push(format!("{lp}/{ilp}"));
        }
        Ok((ok, format!("lp/ilp {}", got.join(" "))))
    });

    r.check("dual_certificates", || {
        let mut problems = Vec::new();
        for x in [fixtures::torus(), fixtures::genus_surface(2), fixtures::pillow()] {
            problems.push(top(x.clone(), Ring::Rationals)?);
            for z in x.homology_rank(1).1 {
                problems.push(NormProblem::new(x.clone(), z, Ring::Rationals)?);
            }
        }
        problems.push(NormProblem::new(fixtures::circle(), Chain::from_ints(1, &[(0, 1)]), Ring::Rationals)?);
        let mut failed = 0;
        for (i, p) in problems.iter().enumerate() {
            let mut res = l1norm::l1_lp(p)?;
            if opts.corrupt_dual && i == 0 {
                if let Some(c) = res.certificate.as_mut() {
                    c[0] += qf(1, 7);
                }
            }
            if !l1norm::dual_certificate_check(&res, p) {
                failed += 1;
            }
        }
        Ok((failed == 0, format!("{} instances, {failed} rejected", problems.len())))
    });

    r.check("zero_class", || {
        let t = fixtures::torus();
        let bd = t.boundary(&Chain::from_ints(2, &[(0, 1)]))?;
        let p = NormProblem::new(t, bd, Ring::Rationals)?;
        let res = l1norm::l1_lp(&p)?;
        Ok((res.value.is_zero() && l1norm::dual_certificate_check(&res, &p), format!("value {}", res.value)))
    });

    r.check("homogeneity_triangle", || {
        let t = fixtures::torus();
        let h1 = t.homology_rank(1).1;
        let val = |z: &Chain| -> Result<Q> { Ok(l1norm::l1_lp(&NormProblem::new(t.clone(), z.clone(), Ring::Rationals)?)?.value) };
        let mut rng = rng_for(opts, 9);
        let mut bad = 0;
        for _ in 0..20 {
            let (a, b, k) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3), rng.gen_range(1..=4));
            let z1 = h1[0].scale(&q(a)).add(&h1[1].scale(&q(b)));
            let z2 = h1[rng.gen_range(0..2)].scale(&q(rng.gen_range(-2..=2)));
            if val(&z1.scale(&q(k)))? != val(&z1)? * q(k) || val(&z1.add(&z2))? > val(&z1)? + val(&z2)? {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("20 samples, {bad} violations")))
    });

    r.check("lp_ilp_kappa_order", || {
        let mut ok = true;
        let mut rows = Vec::new();
        for x in [fixtures::torus(), fixtures::pillow(), fixtures::genus_surface(2), fixtures::circle()] {
            let lp = l1norm::l1_lp(&top(x.clone(), Ring::Rationals)?)?.value;
            let ilp = l1norm::l1_ilp(&top(x.clone(), Ring::Integers)?)?.value;
            let kappa = l1norm::kappa_of_cycle(&x)?;
            ok &= lp <= ilp && ilp <= q(kappa as i64);
            rows.push(format!("{lp}<={ilp}<={kappa}"));
        }
        Ok((ok, rows.join(" ")))
    });

    r.check("subdivided_value", || {
        let mut ok = true;
        let mut rows = Vec::new();
        for x in [fixtures::torus(), fixtures::pillow()] {
            let sd = x.barycentric_subdivide();
            let z = fundamental(&x)?;
            let v = l1norm::l1_lp(&NormProblem::new(x.clone(), z.clone(), Ring::Rationals)?)?.value;
            let vs = l1norm::l1_lp(&NormProblem::new(sd.complex.clone(), sd.push_chain(&z), Ring::Rationals)?)?.value;
            let fact: i64 = (1..=x.dim() as i64 + 1).product();
            ok &= vs == v.clone() * q(fact);
            rows.push(format!("{v}->{vs}"));
        }
        Ok((ok, rows.join(" ")))
    });

    r.check("kappa", || {
        let got = [
            l1norm::kappa_of_cycle(&fixtures::circle())?,
            l1norm::kappa_of_cycle(&fixtures::torus())?,
            l1norm::kappa_of_cycle(&fixtures::torus().disjoint_union(&fixtures::pillow()))?,
        ];
        Ok((got == [1, 2, 4], format!("{got:?}")))
    });

    r.check("fekete", || {
        let s: Vec<(u64, f64)> = (1..=32).map(|n| (n, 1.0)).collect();
        let mut prev = f64::INFINITY;
        let mut ok = true;
        for n in [4, 8, 16, 32] {
            let e = l1norm::fekete_estimate(&s[..n])?;
            let min_ratio = s[..n].iter().map(|&(k, v)| v / k as f64).fold(f64::INFINITY, f64::min);
            ok &= e.estimate == min_ratio && e.estimate < prev;
            prev = e.estimate;
        }
        Ok((ok, format!("final estimate {}", f(prev))))
    });

    r.check("rationalize", || {
        let t = fixtures::torus();
        let got = l1norm::rationalize_cycle(&[1.0000003, -0.9999997], 2, &t, 1e-6)?;
        let ok = got == Chain::from_ints(2, &[(0, 1), (1, -1)]) && l1norm::rationalize_cycle(&[1.0, 0.0], 2, &t, 1e-6).is_err();
        Ok((ok, "torus fundamental class recovered".into()))
    });
}

fn tomei_suite(r: &mut Runner, _opts: &VerifyOptions) {
    r.check("permutahedron_counts", || {
        let mut ok = true;
        for m in 1..=4usize {
            let p = perm::build_permutahedron(m)?;
            let fact: usize = (1..=m + 1).product();
            ok &= p.vertex_count() == fact && p.facet_count() == (1 << (m + 1)) - 2 && p.is_simple();
        }
        Ok((ok, "m = 1..4".into()))
    });

    r.check("truncated_simplex", || {
        let mut ok = true;
        for m in 1..=3 {
            ok &= perm::truncation_equivalence(m)?;
        }
        Ok((ok, "m = 1..3".into()))
    });

    r.check("volumes", || {
        let want = [2f64.sqrt(), 3.0 * 3f64.sqrt(), 32.0];
        let mut worst: f64 = 0.0;
        for (m, w) in (1..=3).zip(want) {
            worst = worst.max((perm::permutahedron_volume(m)? - w).abs());
        }
        let v4 = perm::permutahedron_volume(4)?;
        worst = worst.max((v4 - perm::permutahedron_volume_closed_form(4)).abs() / v4);
        Ok((worst <= 1e-9, format!("max error {}", f(worst))))
    });

    r.check("tomei_volume", || {
        let mut worst: f64 = 0.0;
        for m in 1..=3 {
            let v = perm::tomei_volume(m)?;
            worst = worst.max((v - f64::from(1u32 << m) * perm::permutahedron_volume(m)?).abs());
        }
        let v2 = perm::tomei_volume(2)?;
        worst = worst.max((v2 - 12.0 * 3f64.sqrt()).abs());
        Ok((worst <= 1e-9, format!("v(M0, m=2) {}", f(v2))))
    });

    r.check("euler_characteristic", || {
        let got: Vec<i64> = (1..=3).map(|m| perm::build_tomei(m).map(|t| t.euler_characteristic())).collect::<Result<_>>()?;
        Ok((got == [0, -2, 0], format!("{got:?}")))
    });

    r.check("gluing_and_dual_graph", || {
        let mut ok = true;
        for m in 1..=3 {
            let t = perm::build_tomei(m)?;
            let want = (1 << (m + 1)) - 2;
            ok &= t.is_closed_pseudomanifold() && t.dual_degrees().len() == 1 << m;
            ok &= t.dual_degrees().iter().all(|&d| d == want);
            for (a, b) in &t.gluing {
                ok &= a != b && t.gluing.get(b) == Some(a);
            }
        }
        Ok((ok, "m = 1..3".into()))
    });

    r.check("constants_report", || {
        let a = perm::constants_report(2, 30.0)?;
        let b = perm::constants_report(2, 30.0)?;
        let ok = a.to_text() == b.to_text()
            && a.c_prime > 0.0
            && a.c_prime.is_finite()
            && a.factor_ratio == qf(1, 27);
        Ok((ok, format!("C' {}, ratio {}", f(a.c_prime), a.factor_ratio)))
    });

    r.check("theta_map", || {
        let mut ok = true;
        for m in 1..=3 {
            let n = m + 1;
            let bary = vec![(n + 1) as f64 / 2.0; n];
            ok &= perm::theta_map(m, &bary)?.iter().all(|&v| (v - 1.0 / n as f64).abs() < 1e-12);
            for p in perm::permutations(n) {
                let x: Vec<f64> = p.iter().map(|&v| (v + 1) as f64).collect();
                let y = perm::theta_map(m, &x)?;
                let top = p.iter().position(|&v| v == m).unwrap();
                ok &= y.iter().enumerate().all(|(i, &yi)| (yi - if i == top { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        Ok((ok, "barycenter and vertices".into()))
    });

    r.check("skeleton_scaling", || {
        let t = perm::build_tomei(2)?;
        let (e, _) = perm::skeleton_growth(&t.skeleton, 30.0, entropy::DEFAULT_BUDGET)?;
        let (d, _) = perm::skeleton_growth(&t.skeleton.scaled(2.0), 60.0, entropy::DEFAULT_BUDGET)?;
        let ok = (d.value - e.value / 2.0).abs() < 1e-9 && e.contains(3f64.ln() / 2f64.sqrt());
        Ok((ok, format!("{} vs {}", f(e.value), f(d.value))))
    });
}

fn systole_suite(r: &mut Runner, opts: &VerifyOptions) {
    let f2 = MarkedGroup::free(2);

    r.check("indices_and_systoles", || {
        let a = Perm::parse_cycles("(0 1)(2 3)", 4).map_err(Error::Domain)?;
        let b = Perm::parse_cycles("(0 2)(1 3)", 4).map_err(Error::Domain)?;
        let got = [
            systole::cayley_systole(&f2, &SubgroupSpec::Whole)?,
            systole::cayley_systole(&f2, &SubgroupSpec::sl2_congruence(3))?,
            systole::cayley_systole(&f2, &SubgroupSpec::PermKernel(vec![a, b]))?,
        ];
        Ok((got == [1, 3, 2], format!("{got:?}")))
    });

    r.check("nested_kernels", || {
        let s3 = systole::cayley_systole(&f2, &SubgroupSpec::sl2_congruence(3))?;
        let s9 = systole::cayley_systole(&f2, &SubgroupSpec::sl2_congruence(9))?;
        Ok((s9 >= s3, format!("mod 3: {s3}, mod 9: {s9}")))
    });

    r.check("relabeling", || {
        let s = systole::schreier_graph(&f2, &SubgroupSpec::sl2_congruence(5))?;
        let mut rng = rng_for(opts, 10);
        let mut ok = true;
        for _ in 0..3 {
            let mut p: Vec<usize> = (1..s.index()).collect();
            p.shuffle(&mut rng);
            p.insert(0, 0);
            ok &= systole::schreier_systole(&s.relabeled(&p)) == systole::schreier_systole(&s);
        }
        Ok((ok, format!("index {}", s.index())))
    });

    r.check("graph_systole", || {
        let mut rng = rng_for(opts, 11);
        let mut worst = f64::NEG_INFINITY;
        for g in random_graphs(&mut rng, 10) {
            let s = systole::graph_systole_essential_with_budget(&g, &CoverSpec::Trivial, opts.budget)?
                .ok_or_else(|| Error::Invariant("no essential loop".into()))?;
            worst = worst.max(s - g.total_length());
        }
        let f8 = MetricGraph::figure_eight().with_lengths(&[0.5, 1.0])?;
        let kill_a = CoverSpec::free(&f8, 1, &[("a", FreeWord::identity()), ("b", FreeWord::generator(1))])?;
        let k = systole::graph_systole_essential(&f8, &kill_a)?;
        Ok((worst <= 1e-12 && k == Some(1.0), format!("max excess over length {}", f(worst.max(0.0)))))
    });

    r.check("sl2_family", || {
        let fam: Vec<SubgroupSpec> = [3, 5, 7, 11, 13].iter().map(|&p| SubgroupSpec::sl2_congruence(p)).collect();
        let scan = systole::sigma_scan_multiples(&f2, &fam, 1)?;
        let base = f2.generating_set_size() as f64 / 2.0;
        let vol_ok = scan.rows.iter().all(|row| row.vol == row.k as f64 * base);
        let ok = scan.rows[0].sys == 3
            && scan.sys_nondecreasing()
            && scan.fit_c > 0.0
            && scan.worst_ratio_factor() <= 3.0
            && vol_ok;
        let sys: Vec<String> = scan.rows.iter().map(|row| row.sys.to_string()).collect();
        Ok((ok, format!("sys {}, c {}, factor {}", sys.join(" "), f(scan.fit_c), f(scan.worst_ratio_factor()))))
    });

    r.check("seminorm", || {
        let samples: Vec<(u64, f64)> = (2..40).map(|k| (k, k as f64 / (k as f64).ln().powi(2))).collect();
        let one = systole::stabilized_seminorm(&samples, GrowthProfile::KOverLogPow(2))?;
        let zero: Vec<(u64, f64)> = (2..10).map(|k| (k, 0.0)).collect();
        let z = systole::stabilized_seminorm(&zero, GrowthProfile::Linear)?;
        let scaled: Vec<(u64, f64)> = samples.iter().map(|&(k, x)| (k, 2.5 * x)).collect();
        let a = systole::stabilized_seminorm(&samples, GrowthProfile::Linear)?;
        let b = systole::stabilized_seminorm(&scaled, GrowthProfile::Linear)?;
        let ok = (one - 1.0).abs() <= 1e-12 && z == 0.0 && (b - 2.5 * a).abs() <= 1e-12;
        Ok((ok, format!("unit profile {}", f(one))))
    });
}
