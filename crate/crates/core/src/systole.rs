//! Systoles of finite-index subgroups of free groups and of metric graphs.
//!
//! A subgroup Γ ⊂ F_r is given by a finite action of F_r (the kernel of a map to
//! permutations or to 2×2 matrices mod N, or the stabilizer of coset 0 in a coset
//! table). Nonempty reduced words are never trivial in F_r, so sys(Γ) is the
//! shortest non-backtracking closed walk at the base coset of the Schreier graph.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{explore_cover, CoverSpec, MetricGraph};
use crate::group::{Mat2, Perm};

pub const IMAGE_CAP: usize = 10_000_000;

/// The free group F_r with its symmetric generating set {a₁^±1, …, a_r^±1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarkedGroup {
    pub rank: usize,
}

impl MarkedGroup {
    pub fn free(rank: usize) -> Self {
        MarkedGroup { rank }
    }

    /// |S| counting inverses.
    pub fn generating_set_size(&self) -> usize {
        2 * self.rank
    }
}

#[derive(Clone, Debug)]
pub enum SubgroupSpec {
    Whole,
    /// kernel of a_i ↦ images[i] in a permutation group
    PermKernel(Vec<Perm>),
    /// kernel of a_i ↦ images[i] in SL₂(Z/N)
    MatrixKernel(Vec<Mat2>),
    /// stabilizer of coset 0; table[i][c] is the coset c·a_i
    CosetTable(Vec<Vec<usize>>),
}

impl SubgroupSpec {
    /// Kernel of F₂ → SL₂(Z/N), a ↦ [[1,2],[0,1]], b ↦ [[1,0],[2,1]].
    pub fn sl2_congruence(n: u64) -> Self {
        SubgroupSpec::MatrixKernel(vec![Mat2::new([1, 2, 0, 1], n), Mat2::new([1, 0, 2, 1], n)])
    }

    pub fn label(&self) -> String {
        match self {
            SubgroupSpec::Whole => "whole".into(),
            SubgroupSpec::PermKernel(p) => format!("perm-kernel(degree {})", p.first().map_or(0, Perm::degree)),
            SubgroupSpec::MatrixKernel(m) => format!("sl2-kernel(mod {})", m.first().map_or(0, |x| x.modulus)),
            SubgroupSpec::CosetTable(t) => format!("coset-table({})", t.first().map_or(0, Vec::len)),
        }
    }
}

/// Coset graph of Γ: vertex 0 is Γ itself, `action[i][c]` is c·a_i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchreierGraph {
    pub action: Vec<Vec<u32>>,
}

impl SchreierGraph {
    pub fn index(&self) -> usize {
        self.action.first().map_or(1, Vec::len)
    }

    /// Inverse action tables.
    fn inverse_action(&self) -> Vec<Vec<u32>> {
        self.action
            .iter()
            .map(|a| {
                let mut inv = vec![0u32; a.len()];
                for (c, &d) in a.iter().enumerate() {
                    inv[d as usize] = c as u32;
                }
                inv
            })
            .collect()
    }

    /// Same subgroup with the cosets other than the base renamed by `perm` (perm[0] = 0).
    pub fn relabeled(&self, perm: &[usize]) -> SchreierGraph {
        let action = self
            .action
            .iter()
            .map(|a| {
                let mut out = vec![0u32; a.len()];
                for (c, &d) in a.iter().enumerate() {
                    out[perm[c]] = perm[d as usize] as u32;
                }
                out
            })
            .collect();
        SchreierGraph { action }
    }
}

fn orbit_graph<T: Clone + Eq + std::hash::Hash>(
    start: T,
    gens: &[T],
    mul: impl Fn(&T, &T) -> T,
) -> Result<SchreierGraph> {
    let mut ids: HashMap<T, u32> = HashMap::new();
    let mut elems = vec![start.clone()];
    ids.insert(start, 0);
    let mut action: Vec<Vec<u32>> = vec![Vec::new(); gens.len()];
    let mut i = 0;
    while i < elems.len() {
        let x = elems[i].clone();
        for (k, g) in gens.iter().enumerate() {
            let y = mul(&x, g);
            let id = match ids.get(&y) {
                Some(&id) => id,
                None => {
                    if elems.len() >= IMAGE_CAP {
                        return Err(Error::BudgetExceeded(IMAGE_CAP));
                    }
                    let id = elems.len() as u32;
                    ids.insert(y.clone(), id);
                    elems.push(y);
                    id
                }
            };
            action[k].push(id);
        }
        i += 1;
    }
    Ok(SchreierGraph { action })
}

pub fn schreier_graph(g: &MarkedGroup, sub: &SubgroupSpec) -> Result<SchreierGraph> {
    let r = g.rank;
    let check = |n: usize| {
        if n != r {
            Err(Error::Domain(format!("{n} generator images for a group of rank {r}")))
        } else {
            Ok(())
        }
    };
    match sub {
        SubgroupSpec::Whole => Ok(SchreierGraph { action: vec![vec![0]; r] }),
        SubgroupSpec::PermKernel(images) => {
            check(images.len())?;
            let n = images.first().map_or(0, Perm::degree);
            if images.iter().any(|p| p.degree() != n) {
                return Err(Error::Domain("permutation images of different degrees".into()));
            }
            orbit_graph(Perm::identity(n), images, |a, b| a.then(b))
        }
        SubgroupSpec::MatrixKernel(images) => {
            check(images.len())?;
            let n = images.first().map_or(1, |m| m.modulus);
            if images.iter().any(|m| m.modulus != n || m.det() != 1 % n) {
                return Err(Error::Domain("matrix images must lie in SL2 over one modulus".into()));
            }
            orbit_graph(Mat2::identity(n), images, |a, b| a.mul(b))
        }
        SubgroupSpec::CosetTable(table) => {
            check(table.len())?;
            let n = table.first().map_or(0, Vec::len);
            for row in table {
                let mut seen = vec![false; n];
                if row.len() != n || row.iter().any(|&c| c >= n || std::mem::replace(&mut seen[c], true)) {
                    return Err(Error::Domain("coset table rows must be permutations".into()));
                }
            }
            Ok(SchreierGraph { action: table.iter().map(|r| r.iter().map(|&c| c as u32).collect()).collect() })
        }
    }
}

/// Shortest nonempty reduced word in Γ.
pub fn cayley_systole(g: &MarkedGroup, sub: &SubgroupSpec) -> Result<usize> {
    Ok(schreier_systole(&schreier_graph(g, sub)?))
}

/// BFS over (coset, last letter); letters 2i and 2i+1 are a_i and its inverse.
pub fn schreier_systole(s: &SchreierGraph) -> usize {
    let fwd = &s.action;
    let inv = s.inverse_action();
    let r = fwd.len();
    let n = s.index();
    let step = |c: usize, l: usize| if l.is_multiple_of(2) { fwd[l / 2][c] as usize } else { inv[l / 2][c] as usize };
    let mut dist = vec![usize::MAX; n * 2 * r];
    let mut queue = VecDeque::new();
    for l in 0..2 * r {
        let c = step(0, l);
        if c == 0 {
            return 1;
        }
        dist[c * 2 * r + l] = 1;
        queue.push_back((c, l));
    }
    while let Some((c, l)) = queue.pop_front() {
        let d = dist[c * 2 * r + l];
        for nl in 0..2 * r {
            if nl == (l ^ 1) {
                continue;
            }
            let nc = step(c, nl);
            if nc == 0 {
                return d + 1;
            }
            let slot = nc * 2 * r + nl;
            if dist[slot] == usize::MAX {
                dist[slot] = d + 1;
                queue.push_back((nc, nl));
            }
        }
    }
    unreachable!("a finite Schreier graph of a free group of positive rank has a reduced loop")
}

/// Least length of a loop whose image in the deck group of `spec` is nontrivial.
pub fn graph_systole_essential(g: &MetricGraph, spec: &CoverSpec) -> Result<Option<f64>> {
    graph_systole_essential_with_budget(g, spec, crate::entropy::DEFAULT_BUDGET)
}

pub fn graph_systole_essential_with_budget(g: &MetricGraph, spec: &CoverSpec, budget: usize) -> Result<Option<f64>> {
    spec.check_graph(g)?;
    let mut best: Option<f64> = None;
    for v in 0..g.vertex_count() {
        let cutoff = best.unwrap_or(f64::INFINITY);
        let mut found = None;
        explore_cover(g, spec, v, cutoff, budget, |w, el, d| {
            if w == v && !el.is_identity() {
                found = Some(d);
                return false;
            }
            true
        })?;
        if let Some(d) = found {
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystoleRow {
    pub k: usize,
    pub sys: usize,
    pub vol: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SystoleScan {
    pub m: u32,
    pub rows: Vec<SystoleRow>,
    /// least-squares c in sys ≈ c·log k
    pub fit_c: f64,
    /// geometric-mean C in ratio ≈ C·k/log k
    pub fit_ratio_c: f64,
    pub residuals: Vec<f64>,
}

impl SystoleScan {
    pub fn sys_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].sys <= w[1].sys)
    }

    /// Largest factor by which a ratio deviates from the fitted C·k/log k.
    pub fn worst_ratio_factor(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let model = self.fit_ratio_c * r.k as f64 / (r.k as f64).ln();
                let f = r.ratio / model;
                f.max(1.0 / f)
            })
            .fold(1.0, f64::max)
    }
}

/// Systoles along a family of finite-index subgroups; vol is index × |S|/2.
pub fn sigma_scan_multiples(g: &MarkedGroup, family: &[SubgroupSpec], m: u32) -> Result<SystoleScan> {
    let mut rows = Vec::new();
    for sub in family {
        let s = schreier_graph(g, sub)?;
        let k = s.index();
        let sys = schreier_systole(&s);
        let vol = k as f64 * g.generating_set_size() as f64 / 2.0;
        rows.push(SystoleRow { k, sys, vol, ratio: vol / (sys as f64).powi(m as i32) });
    }
    if rows.windows(2).any(|w| w[0].k >= w[1].k) {
        return Err(Error::Domain("family indices must increase".into()));
    }
    let fitted: Vec<&SystoleRow> = rows.iter().filter(|r| r.k >= 2).collect();
    let sxx: f64 = fitted.iter().map(|r| (r.k as f64).ln().powi(2)).sum();
    let sxy: f64 = fitted.iter().map(|r| (r.k as f64).ln() * r.sys as f64).sum();
    let fit_c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residuals = rows.iter().map(|r| r.sys as f64 - fit_c * (r.k as f64).ln()).collect();
    let logs: Vec<f64> =
        fitted.iter().map(|r| (r.ratio * (r.k as f64).ln() / r.k as f64).ln()).collect();
    let fit_ratio_c = if logs.is_empty() { 0.0 } else { (logs.iter().sum::<f64>() / logs.len() as f64).exp() };
    Ok(SystoleScan { m, rows, fit_c, fit_ratio_c, residuals })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthProfile {
    /// h(k) = k / (log k)^m
    KOverLogPow(u32),
    /// h(k) = k
    Linear,
}

impl GrowthProfile {
    pub fn eval(self, k: f64) -> f64 {
        match self {
            GrowthProfile::KOverLogPow(m) => k / k.ln().powi(m as i32),
            GrowthProfile::Linear => k,
        }
    }
}

/// Estimate of limsup ρ_k / h(k): the maximum over the upper half of the samples.
pub fn stabilized_seminorm(samples: &[(u64, f64)], h: GrowthProfile) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::Domain(format!("need at least 4 samples, got {}", samples.len())));
    }
    if samples.iter().any(|s| s.0 < 2) {
        return Err(Error::Domain("samples must have k ≥ 2".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by_key(|x| x.0);
    let tail = &s[s.len() / 2..];
    Ok(tail.iter().map(|&(k, r)| r / h.eval(k as f64)).fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FreeWord;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> MarkedGroup {
        MarkedGroup::free(2)
    }

    #[test]
    fn indices() {
        let z2 = Perm::parse_cycles("(0 1)", 2).unwrap();
        let s = schreier_graph(&f2(), &SubgroupSpec::PermKernel(vec![z2.clone(), z2])).unwrap();
        assert_eq!(s.index(), 2);
        assert_eq!(schreier_graph(&f2(), &SubgroupSpec::sl2_congruence(3)).unwrap().index(), 24);
        assert_eq!(schreier_graph(&f2(), &SubgroupSpec::Whole).unwrap().index(), 1);
    }

    /// Brute force: enumerate reduced words by length and evaluate them mod N.
    fn brute_systole_sl2(n: u64, max_len: usize) -> Option<usize> {
        let gens = [
            Mat2::new([1, 2, 0, 1], n),
            Mat2::new([1, 0, 2, 1], n),
        ];
        let letters: Vec<Mat2> = vec![gens[0], gens[0].inverse_sl(), gens[1], gens[1].inverse_sl()];
        let mut frontier: Vec<(Mat2, usize)> = (0..4).map(|l| (letters[l], l)).collect();
        for len in 1..=max_len {
            if frontier.iter().any(|(x, _)| x.is_identity()) {
                return Some(len);
            }
            let mut next = Vec::new();
            for (x, last) in &frontier {
                for l in 0..4 {
                    if l != (last ^ 1) {
                        next.push((x.mul(&letters[l]), l));
                    }
                }
            }
            frontier = next;
        }
        None
    }

    #[test]
    fn systoles() {
        assert_eq!(cayley_systole(&f2(), &SubgroupSpec::Whole).unwrap(), 1);
        assert_eq!(cayley_systole(&f2(), &SubgroupSpec::sl2_congruence(3)).unwrap(), 3);
        assert_eq!(brute_systole_sl2(3, 6), Some(3));
        assert_eq!(brute_systole_sl2(5, 8).unwrap(), cayley_systole(&f2(), &SubgroupSpec::sl2_congruence(5)).unwrap());
        let a = Perm::parse_cycles("(0 1)(2 3)", 4).unwrap();
        let b = Perm::parse_cycles("(0 2)(1 3)", 4).unwrap();
        assert_eq!(cayley_systole(&f2(), &SubgroupSpec::PermKernel(vec![a, b])).unwrap(), 2);
    }

    #[test]
    fn nested_kernels() {
        let s3 = cayley_systole(&f2(), &SubgroupSpec::sl2_congruence(3)).unwrap();
        let s9 = cayley_systole(&f2(), &SubgroupSpec::sl2_congruence(9)).unwrap();
        assert!(s9 >= s3);
    }

    #[test]
    fn relabeling_cosets() {
        let s = schreier_graph(&f2(), &SubgroupSpec::sl2_congruence(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut perm: Vec<usize> = (1..s.index()).collect();
        perm.shuffle(&mut rng);
        perm.insert(0, 0);
        let r = s.relabeled(&perm);
        assert_eq!(schreier_systole(&r), schreier_systole(&s));
        let table: Vec<Vec<usize>> = r.action.iter().map(|a| a.iter().map(|&c| c as usize).collect()).collect();
        assert_eq!(cayley_systole(&f2(), &SubgroupSpec::CosetTable(table)).unwrap(), schreier_systole(&s));
    }

    #[test]
    fn graph_systoles() {
        let f8 = MetricGraph::figure_eight();
        assert_eq!(graph_systole_essential(&f8, &CoverSpec::identity_free(&f8)).unwrap(), Some(1.0));
        let c = MetricGraph::circle(2.5);
        let z2 = Perm::parse_cycles("(0 1)", 2).unwrap();
        let spec = CoverSpec::finite(&c, 2, &[("e0", z2)]).unwrap();
        assert_eq!(graph_systole_essential(&c, &spec).unwrap(), Some(2.5));
        let f8 = f8.with_lengths(&[0.5, 1.0]).unwrap();
        let kill_a = CoverSpec::free(&f8, 1, &[("a", FreeWord::identity()), ("b", FreeWord::generator(1))]).unwrap();
        assert_eq!(graph_systole_essential(&f8, &kill_a).unwrap(), Some(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let rank = rng.gen_range(2..=4);
            let g = MetricGraph::random(&mut rng, rank, 0.5, 2.0);
            let s = graph_systole_essential(&g, &CoverSpec::Trivial).unwrap().unwrap();
            assert!(s <= g.total_length() + 1e-12);
        }
    }

    #[test]
    fn sl2_family() {
        let fam: Vec<SubgroupSpec> = [3, 5, 7, 11, 13].iter().map(|&p| SubgroupSpec::sl2_congruence(p)).collect();
        let scan = sigma_scan_multiples(&f2(), &fam, 1).unwrap();
        assert_eq!(scan.rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![24, 120, 336, 1320, 2184]);
        assert_eq!(scan.rows[0].sys, 3);
        assert!(scan.sys_nondecreasing());
        assert!(scan.fit_c > 0.0);
        assert!(scan.worst_ratio_factor() <= 3.0);
        for r in &scan.rows {
            assert_eq!(r.vol, r.k as f64 * 2.0);
        }
        let samples: Vec<(u64, f64)> = scan.rows.iter().map(|r| (r.k as u64, r.ratio)).collect();
        let est = stabilized_seminorm(&samples, GrowthProfile::KOverLogPow(1)).unwrap();
        assert!(est > 0.0 && est.is_finite());
    }

    #[test]
    fn seminorm_estimator() {
        let samples: Vec<(u64, f64)> = (2..40).map(|k| (k, k as f64 / (k as f64).ln().powi(2))).collect();
        assert!((stabilized_seminorm(&samples, GrowthProfile::KOverLogPow(2)).unwrap() - 1.0).abs() < 1e-12);
        let zero: Vec<(u64, f64)> = (2..10).map(|k| (k, 0.0)).collect();
        assert_eq!(stabilized_seminorm(&zero, GrowthProfile::Linear).unwrap(), 0.0);
        assert!(stabilized_seminorm(&samples[..3], GrowthProfile::Linear).is_err());
        let scaled: Vec<(u64, f64)> = samples.iter().map(|&(k, r)| (k, 2.5 * r)).collect();
        let a = stabilized_seminorm(&samples, GrowthProfile::Linear).unwrap();
        let b = stabilized_seminorm(&scaled, GrowthProfile::Linear).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12);
    }
}
