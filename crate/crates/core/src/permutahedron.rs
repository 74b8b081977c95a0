//! The permutahedron Π^m, its face lattice and volume, and the Tomei complex
//! M₀ tiled by 2^m copies of Π^m.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use num_traits::{One, Zero};

use crate::entropy::{orbit_count_scan, EntropyEstimate, GrowthRow, Method, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::graph::{CoverSpec, MetricGraph};
use crate::linalg::{self, det, qf, to_f64, Matrix, Q};

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else { return out };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
        out.push(p.clone());
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub dim: usize,
    /// bit k set when the face lies in facet k
    pub facets: u64,
    pub vertices: Vec<usize>,
}

/// Faces of a simple polytope, closed under intersection, sorted by (dim, facets).
#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub faces: Vec<Face>,
}

impl FaceLattice {
    /// Closure of the facet vertex sets under intersection.
    fn from_incidence(dim: usize, n_vertices: usize, facet_vertices: &[Vec<usize>]) -> Self {
        let words = n_vertices.div_ceil(64);
        let to_bits = |vs: &[usize]| {
            let mut b = vec![0u64; words];
            for &v in vs {
                b[v / 64] |= 1 << (v % 64);
            }
            b
        };
        let facet_bits: Vec<Vec<u64>> = facet_vertices.iter().map(|vs| to_bits(vs)).collect();
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut queue: VecDeque<Vec<u64>> = VecDeque::new();
        let all = to_bits(&(0..n_vertices).collect::<Vec<_>>());
        seen.insert(all.clone());
        queue.push_back(all);
        while let Some(f) = queue.pop_front() {
            for fb in &facet_bits {
                let g: Vec<u64> = f.iter().zip(fb).map(|(a, b)| a & b).collect();
                if g.iter().any(|&w| w != 0) && seen.insert(g.clone()) {
                    queue.push_back(g);
                }
            }
        }
        let mut faces: Vec<Face> = seen
            .into_iter()
            .map(|bits| {
                let vertices: Vec<usize> = (0..n_vertices).filter(|&v| bits[v / 64] >> (v % 64) & 1 == 1).collect();
                let facets = facet_bits
                    .iter()
                    .enumerate()
                    .filter(|(_, fb)| bits.iter().zip(fb.iter()).all(|(a, b)| a & !b == 0))
                    .fold(0u64, |acc, (k, _)| acc | 1 << k);
                Face { dim: dim.saturating_sub(facets.count_ones() as usize), facets, vertices }
            })
            .collect();
        faces.sort_by_key(|f| (f.dim, f.facets));
        FaceLattice { faces }
    }

    pub fn count(&self, dim: usize) -> usize {
        self.faces.iter().filter(|f| f.dim == dim).count()
    }

    /// f-vector (f₀, …, f_m).
    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.faces.iter().map(|f| f.dim).max().unwrap_or(0);
        (0..=top).map(|k| self.count(k)).collect()
    }

    fn signature(&self) -> BTreeSet<u64> {
        self.faces.iter().map(|f| f.facets).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Permutahedron {
    pub m: usize,
    /// permutations of (1, …, m+1)
    pub vertices: Vec<Vec<u32>>,
    /// ω as a bitmask over coordinates, ordered by (|ω|, mask)
    pub facets: Vec<u32>,
    /// vertex → facets containing it
    pub incidence: Vec<Vec<usize>>,
    pub lattice: FaceLattice,
}

fn proper_subsets(n: usize) -> Vec<u32> {
    let mut s: Vec<u32> = (1..(1u32 << n) - 1).collect();
    s.sort_by_key(|&w| (w.count_ones(), w));
    s
}

/// Sum of the k largest values of (1, …, n).
fn top_sum(n: usize, k: usize) -> u32 {
    (0..k).map(|j| (n - j) as u32).sum()
}

pub fn build_permutahedron(m: usize) -> Result<Permutahedron> {
    if !(1..=5).contains(&m) {
        return Err(Error::Domain(format!("m = {m} outside 1..=5")));
    }
    let n = m + 1;
    let vertices: Vec<Vec<u32>> =
        permutations(n).into_iter().map(|p| p.into_iter().map(|x| x as u32 + 1).collect()).collect();
    let facets = proper_subsets(n);
    let incidence: Vec<Vec<usize>> = vertices
        .iter()
        .map(|v| {
            facets
                .iter()
                .enumerate()
                .filter(|&(_, &w)| {
                    let s: u32 = (0..n).filter(|&i| w >> i & 1 == 1).map(|i| v[i]).sum();
                    s == top_sum(n, w.count_ones() as usize)
                })
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let mut facet_vertices = vec![Vec::new(); facets.len()];
    for (v, fs) in incidence.iter().enumerate() {
        for &k in fs {
            facet_vertices[k].push(v);
        }
    }
    let lattice = FaceLattice::from_incidence(m, vertices.len(), &facet_vertices);
    Ok(Permutahedron { m, vertices, facets, incidence, lattice })
}

impl Permutahedron {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Every vertex lies on exactly m facets.
    pub fn is_simple(&self) -> bool {
        self.incidence.iter().all(|fs| fs.len() == self.m)
    }

    pub fn on_hyperplane(&self) -> bool {
        let n = self.m as u32 + 1;
        self.vertices.iter().all(|v| v.iter().sum::<u32>() == n * (n + 1) / 2)
    }

    pub fn facet_index(&self, omega: u32) -> Option<usize> {
        self.facets.iter().position(|&w| w == omega)
    }
}

/// Simplex truncated near each face Δ_ω at level Σ_{i∈ω} x_i = 1 − 4^{−|ω|}; its face
/// lattice is compared with the permutahedron's under F_ω ↔ cut of Δ_ω.
pub fn truncation_equivalence(m: usize) -> Result<bool> {
    if !(1..=3).contains(&m) {
        return Err(Error::Domain(format!("m = {m} outside 1..=3")));
    }
    let n = m + 1;
    let omegas = proper_subsets(n);
    let level = |w: u32| Q::one() - qf(1, 4i64.pow(w.count_ones()));
    let mut verts: Vec<Vec<Q>> = Vec::new();
    let mut seen = HashSet::new();
    for combo in combinations(omegas.len(), m) {
        // m tight cuts plus Σx = 1
        let mut a: Matrix = combo
            .iter()
            .map(|&k| {
                let mut row: Vec<Q> = (0..n).map(|i| if omegas[k] >> i & 1 == 1 { Q::one() } else { Q::zero() }).collect();
                row.push(level(omegas[k]));
                row
            })
            .collect();
        let mut last = vec![Q::one(); n];
        last.push(Q::one());
        a.push(last);
        let piv = linalg::rref(&mut a);
        if piv.len() != n || piv.iter().any(|&c| c >= n) {
            continue;
        }
        let x: Vec<Q> = (0..n).map(|i| a[i][n].clone()).collect();
        let feasible = omegas.iter().all(|&w| {
            let s: Q = (0..n).filter(|&i| w >> i & 1 == 1).map(|i| x[i].clone()).sum();
            s <= level(w)
        });
        if feasible && seen.insert(x.clone()) {
            verts.push(x);
        }
    }
    let mut facet_vertices = vec![Vec::new(); omegas.len()];
    for (v, x) in verts.iter().enumerate() {
        for (k, &w) in omegas.iter().enumerate() {
            let s: Q = (0..n).filter(|&i| w >> i & 1 == 1).map(|i| x[i].clone()).sum();
            if s == level(w) {
                facet_vertices[k].push(v);
            }
        }
    }
    let trunc = FaceLattice::from_incidence(m, verts.len(), &facet_vertices);
    let perm = build_permutahedron(m)?;
    Ok(verts.len() == perm.vertex_count() && trunc.signature() == perm.lattice.signature())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Barycenter of the face at the vertex given by `order` (coordinate indices by
/// decreasing value) whose tight facets are the top-k sets for k in `cuts`.
fn face_barycenter(order: &[usize], cuts: &[usize]) -> Vec<Q> {
    let n = order.len();
    let mut x = vec![Q::zero(); n];
    let mut bounds: Vec<usize> = cuts.to_vec();
    bounds.sort_unstable();
    bounds.push(n);
    let mut start = 0;
    for &end in &bounds {
        // positions start..end carry values n−start, …, n−end+1
        let avg = qf((2 * n - start - end + 1) as i64, 2);
        for &i in &order[start..end] {
            x[i] = avg.clone();
        }
        start = end;
    }
    x
}

/// Kuhn simplices of the cube around the vertex `order`: one per order of dropping its m facets.
fn flag_simplices(order: &[usize]) -> Vec<(Vec<usize>, Vec<Vec<Q>>)> {
    let m = order.len() - 1;
    permutations(m)
        .into_iter()
        .map(|tau| {
            let mut cuts: Vec<usize> = (1..=m).collect();
            let mut pts = vec![face_barycenter(order, &cuts)];
            for &t in &tau {
                cuts.retain(|&c| c != t + 1);
                pts.push(face_barycenter(order, &cuts));
            }
            (tau, pts)
        })
        .collect()
}

/// Euclidean m-volume of Π^m from its flag triangulation, with exact Gram determinants.
pub fn permutahedron_volume(m: usize) -> Result<f64> {
    if !(1..=5).contains(&m) {
        return Err(Error::Domain(format!("m = {m} outside 1..=5")));
    }
    let mut by_gram: BTreeMap<Q, u64> = BTreeMap::new();
    for order in permutations(m + 1) {
        for (_, pts) in flag_simplices(&order) {
            let edges: Vec<Vec<Q>> =
                pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect()).collect();
            let gram: Matrix =
                edges.iter().map(|a| edges.iter().map(|b| linalg::dot(a, b)).collect()).collect();
            *by_gram.entry(det(&gram)).or_default() += 1;
        }
    }
    let mf = factorial(m) as f64;
    Ok(by_gram.iter().map(|(g, &c)| c as f64 * to_f64(g).sqrt()).sum::<f64>() / mf)
}

/// (m+1)^{m−1}·√(m+1).
pub fn permutahedron_volume_closed_form(m: usize) -> f64 {
    let n = (m + 1) as f64;
    n.powi(m as i32 - 1) * n.sqrt()
}

/// Face-to-face map Θ: Π^m → Δ^m, F_ω into Δ_ω, injective on the interior.
///
/// Piecewise linear from the flag triangulation onto the cube around each vertex,
/// then stick-breaking from the cube onto the matching barycentric simplex of Δ^m.
pub fn theta_map(m: usize, x: &[f64]) -> Result<Vec<f64>> {
    let n = m + 1;
    if x.len() != n {
        return Err(Error::DegreeMismatch { expected: n, found: x.len() });
    }
    let tol = 1e-9;
    let total = (n * (n + 1) / 2) as f64;
    if (x.iter().sum::<f64>() - total).abs() > tol * total {
        return Err(Error::Domain("point outside polytope: off the hyperplane".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut s = 0.0;
    for k in 1..n {
        s += x[order[k - 1]];
        if s > top_sum(n, k) as f64 + tol {
            return Err(Error::Domain("point outside polytope".into()));
        }
    }
    let mut u = None;
    for (tau, pts) in flag_simplices(&order) {
        let a = nalgebra::DMatrix::from_fn(n + 1, n, |i, j| if i < n { to_f64(&pts[j][i]) } else { 1.0 });
        let mut rhs = nalgebra::DVector::from_fn(n + 1, |i, _| if i < n { x[i] } else { 1.0 });
        // the n coordinate rows are dependent with the Σ row; drop the first coordinate row
        let a = a.remove_row(0);
        rhs = rhs.remove_row(0);
        let Some(lam) = a.lu().solve(&rhs) else { continue };
        if lam.iter().all(|&l| l >= -1e-9) {
            // cube coordinate k is the weight on faces still inside facet k
            let mut uk = vec![0.0; m];
            for (k, slot) in uk.iter_mut().enumerate() {
                let drop_step = tau.iter().position(|&t| t == k).unwrap();
                *slot = lam.iter().take(drop_step + 1).sum::<f64>().clamp(0.0, 1.0);
            }
            u = Some(uk);
            break;
        }
    }
    let u = u.ok_or_else(|| Error::Domain("point outside polytope".into()))?;
    let mut y = vec![0.0; n];
    let mut rest = 1.0;
    for j in 0..n {
        let w = if j < m { rest * u[j] } else { rest };
        rest -= w;
        for &i in &order[..=j] {
            y[i] += w / (j + 1) as f64;
        }
    }
    Ok(y)
}

#[derive(Clone, Debug)]
pub struct TomeiComplex {
    pub m: usize,
    pub tile: Permutahedron,
    /// facet (cell, facet index) → partner
    pub gluing: HashMap<(u32, usize), (u32, usize)>,
    /// number of cells of M₀ in each dimension
    pub cell_counts: Vec<usize>,
    pub skeleton: MetricGraph,
    /// (cell, cell, facet index), one per glued facet pair
    pub dual_edges: Vec<(u32, u32, usize)>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

pub fn build_tomei(m: usize) -> Result<TomeiComplex> {
    if !(1..=4).contains(&m) {
        return Err(Error::Domain(format!("m = {m} outside 1..=4")));
    }
    let tile = build_permutahedron(m)?;
    let cells = 1u32 << m;
    let flip = |w: u32| 1u32 << (w.count_ones() - 1);
    let mut gluing = HashMap::new();
    let mut dual_edges = Vec::new();
    for s in 0..cells {
        for (k, &w) in tile.facets.iter().enumerate() {
            gluing.insert((s, k), (s ^ flip(w), k));
            if s < s ^ flip(w) {
                dual_edges.push((s, s ^ flip(w), k));
            }
        }
    }
    for (&a, &b) in &gluing {
        if a == b || gluing.get(&b) != Some(&a) {
            return Err(Error::Invariant("facet gluing is not a fixed-point-free involution".into()));
        }
    }

    // cells of M₀: classes of (s, face) under the flips of the facets containing the face
    let faces = &tile.lattice.faces;
    let nf = faces.len();
    let mut uf = UnionFind((0..cells as usize * nf).collect());
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..tile.facets.len() {
            if f.facets >> k & 1 == 1 {
                for s in 0..cells {
                    uf.union(s as usize * nf + fi, (s ^ flip(tile.facets[k])) as usize * nf + fi);
                }
            }
        }
    }
    let mut cell_counts = vec![0usize; m + 1];
    let mut class_id: HashMap<usize, usize> = HashMap::new();
    for s in 0..cells as usize {
        for (fi, f) in faces.iter().enumerate() {
            let r = uf.find(s * nf + fi);
            if let std::collections::hash_map::Entry::Vacant(e) = class_id.entry(r) {
                e.insert(cell_counts[f.dim]);
                cell_counts[f.dim] += 1;
            }
        }
    }

    // 1-skeleton: vertex classes joined by edge classes of length √2
    let mut edges = Vec::new();
    let mut done = HashSet::new();
    for s in 0..cells as usize {
        for (fi, f) in faces.iter().enumerate() {
            if f.dim != 1 {
                continue;
            }
            let r = uf.find(s * nf + fi);
            if !done.insert(r) {
                continue;
            }
            let end = |v: usize, uf: &mut UnionFind| {
                let vi = faces.iter().position(|g| g.dim == 0 && g.vertices == [v]).unwrap();
                class_id[&uf.find(s * nf + vi)]
            };
            let a = end(f.vertices[0], &mut uf);
            let b = end(f.vertices[1], &mut uf);
            edges.push((a, b, std::f64::consts::SQRT_2));
        }
    }
    let skeleton = MetricGraph::from_edges(cell_counts[0], &edges, 0)?;
    Ok(TomeiComplex { m, tile, gluing, cell_counts, skeleton, dual_edges })
}

impl TomeiComplex {
    pub fn cell_count(&self) -> usize {
        1 << self.m
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cell_counts.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
    }

    /// Degrees of the dual graph, one per cell.
    pub fn dual_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.cell_count()];
        for &(a, b, _) in &self.dual_edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    /// Each codimension-one cell of M₀ borders exactly two top cells.
    pub fn is_closed_pseudomanifold(&self) -> bool {
        self.dual_edges.len() * 2 == self.cell_count() * self.tile.facet_count()
            && self.dual_edges.iter().all(|&(a, b, _)| a != b)
    }
}

pub fn tomei_volume(m: usize) -> Result<f64> {
    Ok((1u64 << m) as f64 * permutahedron_volume(m)?)
}

/// Entropy of the universal cover of the 1-skeleton of M₀ (a proxy for ent(M₀)).
pub fn tomei_entropy_estimate(m: usize, t_max: f64) -> Result<EntropyEstimate> {
    Ok(tomei_growth(m, t_max, DEFAULT_BUDGET)?.0)
}

/// Skeleton entropy estimate together with its growth rows.
pub fn tomei_growth(m: usize, t_max: f64, budget: usize) -> Result<(EntropyEstimate, Vec<GrowthRow>)> {
    let t = build_tomei(m)?;
    skeleton_growth(&t.skeleton, t_max, budget)
}

pub fn skeleton_growth(g: &MetricGraph, t_max: f64, budget: usize) -> Result<(EntropyEstimate, Vec<GrowthRow>)> {
    if g.rank() <= 1 {
        let est = EntropyEstimate { horizon: Some(t_max), ..EntropyEstimate::exact_zero(Method::OrbitCount) };
        return Ok((est, Vec::new()));
    }
    let scan = orbit_count_scan(g, &CoverSpec::Trivial, t_max, budget)?;
    Ok((scan.estimate, scan.rows))
}

#[derive(Clone, Debug)]
pub struct ConstantReport {
    pub m: usize,
    pub v_m: f64,
    pub entropy: EntropyEstimate,
    /// ent^m · v_m, with the bracket ends
    pub c_prime: f64,
    pub c_prime_lower: f64,
    pub c_prime_upper: f64,
    /// (m!)³ · C′
    pub c_factorial: f64,
    /// ((m+1)!)³ · C′
    pub c_measured: f64,
    /// (m!/(m+1)!)³
    pub factor_ratio: Q,
}

pub fn constants_report(m: usize, t_max: f64) -> Result<ConstantReport> {
    constants_report_with_budget(m, t_max, DEFAULT_BUDGET)
}

pub fn constants_report_with_budget(m: usize, t_max: f64, budget: usize) -> Result<ConstantReport> {
    let v_m = permutahedron_volume(m)?;
    let (entropy, _) = tomei_growth(m, t_max, budget)?;
    let pow = |h: f64| h.max(0.0).powi(m as i32) * v_m;
    let c_prime = pow(entropy.value);
    let fm = factorial(m);
    let fm1 = factorial(m + 1);
    let factor_ratio = {
        let r = Q::new((fm as i64).into(), (fm1 as i64).into());
        &r * &r * &r
    };
    Ok(ConstantReport {
        m,
        v_m,
        c_prime,
        c_prime_lower: pow(entropy.lower),
        c_prime_upper: pow(entropy.upper),
        c_factorial: (fm as f64).powi(3) * c_prime,
        c_measured: (fm1 as f64).powi(3) * c_prime,
        factor_ratio,
        entropy,
    })
}

impl ConstantReport {
    pub fn to_text(&self) -> String {
        let e = &self.entropy;
        format!(
            "m = {}\n\
             v_m (flag triangulation) = {:.12}\n\
             ent(M0) skeleton proxy = {:.12} in [{:.12}, {:.12}] ({})\n\
             C'_m = ent^m * v_m = {:.12} in [{:.12}, {:.12}]\n\
             C_m with factor (m!)^3 = {:.12}\n\
             C_m with measured subdivision factor ((m+1)!)^3 = {:.12}\n\
             ratio of the two = {}\n",
            self.m,
            self.v_m,
            e.value,
            e.lower,
            e.upper,
            e.method.label(),
            self.c_prime,
            self.c_prime_lower,
            self.c_prime_upper,
            self.c_factorial,
            self.c_measured,
            self.factor_ratio
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts() {
        for m in 1..=4 {
            let p = build_permutahedron(m).unwrap();
            assert_eq!(p.vertex_count() as u64, factorial(m + 1));
            assert_eq!(p.facet_count(), (1 << (m + 1)) - 2);
            assert!(p.is_simple() && p.on_hyperplane());
            assert_eq!(p.lattice.count(m), 1);
        }
        assert_eq!(build_permutahedron(2).unwrap().lattice.f_vector(), vec![6, 6, 1]);
        assert_eq!(build_permutahedron(3).unwrap().lattice.f_vector(), vec![24, 36, 14, 1]);
        assert!(build_permutahedron(0).is_err() && build_permutahedron(6).is_err());
    }

    #[test]
    fn truncated_simplex() {
        for m in 1..=3 {
            assert!(truncation_equivalence(m).unwrap());
        }
    }

    #[test]
    fn volumes() {
        assert!((permutahedron_volume(1).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((permutahedron_volume(2).unwrap() - 3.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((permutahedron_volume(3).unwrap() - 32.0).abs() < 1e-9);
        for m in 1..=4 {
            let v = permutahedron_volume(m).unwrap();
            assert!((v - permutahedron_volume_closed_form(m)).abs() < 1e-9 * v);
        }
        assert!((tomei_volume(2).unwrap() - 12.0 * 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn tomei_complexes() {
        let t1 = build_tomei(1).unwrap();
        assert_eq!(t1.euler_characteristic(), 0);
        assert!((t1.skeleton.total_length() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let t2 = build_tomei(2).unwrap();
        assert_eq!(t2.cell_counts, vec![6, 12, 4]);
        assert_eq!(t2.euler_characteristic(), -2);
        let t3 = build_tomei(3).unwrap();
        assert_eq!(t3.euler_characteristic(), 0);
        for t in [&t1, &t2, &t3] {
            assert!(t.is_closed_pseudomanifold());
            let want = (1 << (t.m + 1)) - 2;
            assert!(t.dual_degrees().iter().all(|&d| d == want));
        }
    }

    #[test]
    fn skeleton_entropy() {
        assert_eq!(tomei_entropy_estimate(1, 30.0).unwrap().value, 0.0);
        let e = tomei_entropy_estimate(2, 30.0).unwrap();
        assert!(e.lower > 0.0);
        // the m = 2 skeleton is 4-regular with edges √2
        assert!(e.contains(3f64.ln() / 2f64.sqrt()));
        let t = build_tomei(2).unwrap();
        let (d, _) = skeleton_growth(&t.skeleton.scaled(2.0), 60.0, DEFAULT_BUDGET).unwrap();
        assert!((d.value - e.value / 2.0).abs() < 1e-9);
        assert!((d.upper - e.upper / 2.0).abs() < 1e-9);
    }

    #[test]
    fn constants() {
        let c1 = constants_report(1, 30.0).unwrap();
        assert_eq!(c1.c_prime, 0.0);
        let c2 = constants_report(2, 30.0).unwrap();
        assert!(c2.c_prime > 0.0 && c2.c_prime.is_finite());
        assert_eq!(c2.factor_ratio, qf(1, 27));
        assert!((c2.c_factorial / c2.c_measured - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn theta() {
        for m in 1..=3 {
            let n = m + 1;
            let bary = vec![(n + 1) as f64 / 2.0; n];
            let y = theta_map(m, &bary).unwrap();
            assert!(y.iter().all(|&v| (v - 1.0 / n as f64).abs() < 1e-12));
            for p in permutations(n) {
                let x: Vec<f64> = p.iter().map(|&v| (v + 1) as f64).collect();
                let y = theta_map(m, &x).unwrap();
                let top = p.iter().position(|&v| v == m).unwrap();
                for (i, &yi) in y.iter().enumerate() {
                    assert!((yi - if i == top { 1.0 } else { 0.0 }).abs() < 1e-12, "{x:?} -> {y:?}");
                }
            }
        }
        assert!(theta_map(2, &[3.5, 2.0, 0.5]).is_err());
        assert!(theta_map(2, &[3.0, 3.0, 3.0]).is_err());
    }

    fn random_interior(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // convex combination of vertices with full support
        let verts = permutations(m + 1);
        let w: Vec<f64> = verts.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        (0..=m).map(|i| verts.iter().zip(&w).map(|(p, wi)| wi * (p[i] + 1) as f64).sum::<f64>() / s).collect()
    }

    #[test]
    fn theta_faces_and_injectivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 2..=3 {
            let mut images = Vec::new();
            for _ in 0..100 {
                let x = random_interior(m, &mut rng);
                let y = theta_map(m, &x).unwrap();
                assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(y.iter().all(|&v| v > 0.0));
                images.push((x, y));
            }
            for i in 0..images.len() {
                for j in 0..i {
                    let d: f64 = images[i].1.iter().zip(&images[j].1).map(|(a, b)| (a - b).abs()).sum();
                    assert!(d > 1e-9);
                }
            }
        }
        // a point of F_{0,1} in the hexagon lands on the edge Δ_{0,1}
        let y = theta_map(2, &[2.5, 2.5, 1.0]).unwrap();
        assert!(y[2].abs() < 1e-12 && y[0] > 0.0 && y[1] > 0.0);
        // a point of F_{0} lands on the vertex e_0
        let y = theta_map(2, &[3.0, 1.6, 1.4]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12);
    }
}
