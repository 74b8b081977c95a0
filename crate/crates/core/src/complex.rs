//! Finite Δ-complexes.
//!
//! A k-simplex (k ≥ 1) stores the ordered tuple of its k+1 faces; face `i`
//! is the face opposite vertex `i`. Faces may repeat, so loops, pillows and
//! one-vertex surfaces are all expressible.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::linalg::{self, q, Echelon, Matrix, Q};

/// (dimension, index) of a simplex.
pub type SimplexId = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaComplex {
    names: Vec<Vec<String>>,
    faces: Vec<Vec<Vec<usize>>>,
}

fn default_name(k: usize, i: usize) -> String {
    match k {
        0 => format!("v{i}"),
        1 => format!("e{i}"),
        2 => format!("f{i}"),
        _ => format!("s{k}_{i}"),
    }
}

impl DeltaComplex {
    /// Build from face tables; `faces[k][i]` lists the faces of the i-th k-simplex
    /// (`faces[0]` holds one empty entry per vertex). Names are generated.
    pub fn from_faces(faces: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let names = faces
            .iter()
            .enumerate()
            .map(|(k, row)| (0..row.len()).map(|i| default_name(k, i)).collect())
            .collect();
        Self::with_names(names, faces)
    }

    pub fn with_names(names: Vec<Vec<String>>, faces: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidComplex("no vertices".into()));
        }
        let x = DeltaComplex { names, faces };
        x.validate()?;
        Ok(x)
    }

    /// Δ-complex of an abstract simplicial complex given by its maximal simplices.
    pub fn from_simplicial(n_vertices: usize, maximal: &[Vec<usize>]) -> Result<Self> {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new()];
        for v in 0..n_vertices {
            by_dim[0].insert(vec![v]);
        }
        for s in maximal {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.iter().any(|&v| v >= n_vertices) {
                return Err(Error::InvalidComplex(format!("vertex out of range in {s:?}")));
            }
            let n = s.len();
            for mask in 1u32..(1 << n) {
                let sub: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
                let k = sub.len() - 1;
                while by_dim.len() <= k {
                    by_dim.push(BTreeSet::new());
                }
                by_dim[k].insert(sub);
            }
        }
        let lists: Vec<Vec<Vec<usize>>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let index: Vec<HashMap<&Vec<usize>, usize>> =
            lists.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s, i)).collect()).collect();
        let mut faces = vec![vec![Vec::new(); lists[0].len()]];
        for k in 1..lists.len() {
            let row = lists[k]
                .iter()
                .map(|s| {
                    (0..=k)
                        .map(|i| {
                            let mut f = s.clone();
                            f.remove(i);
                            index[k - 1][&f]
                        })
                        .collect()
                })
                .collect();
            faces.push(row);
        }
        Self::from_faces(faces)
    }

    fn validate(&self) -> Result<()> {
        if self.names.len() != self.faces.len() {
            return Err(Error::InvalidComplex("name table does not match face table".into()));
        }
        let mut seen = HashMap::new();
        for (k, row) in self.names.iter().enumerate() {
            if row.len() != self.faces[k].len() {
                return Err(Error::InvalidComplex(format!("name table size mismatch in dimension {k}")));
            }
            for n in row {
                if seen.insert(n.clone(), k).is_some() {
                    return Err(Error::InvalidComplex(format!("duplicate simplex id {n}")));
                }
            }
        }
        for k in 0..self.faces.len() {
            for (i, fs) in self.faces[k].iter().enumerate() {
                let want = if k == 0 { 0 } else { k + 1 };
                if fs.len() != want {
                    return Err(Error::InvalidComplex(format!(
                        "simplex {} has {} faces, expected {want}",
                        self.names[k][i],
                        fs.len()
                    )));
                }
                if k > 0 && fs.iter().any(|&f| f >= self.faces[k - 1].len()) {
                    return Err(Error::InvalidComplex(format!("simplex {}: face out of range", self.names[k][i])));
                }
                if k >= 2 {
                    for a in 0..=k {
                        for b in a + 1..=k {
                            // d_a d_b = d_{b-1} d_a
                            let lhs = self.faces[k - 1][fs[b]][a];
                            let rhs = self.faces[k - 1][fs[a]][b - 1];
                            if lhs != rhs {
                                return Err(Error::InvalidComplex(format!(
                                    "simplex {}: face identity fails for d{a}d{b}",
                                    self.names[k][i]
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        struct Pending {
            line: usize,
            k: usize,
            name: String,
            faces: Vec<String>,
        }
        let mut dim: Option<usize> = None;
        let mut pending: Vec<Pending> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line, msg };
            let (head, tail) = match body.split_once(':') {
                Some((h, t)) => (h, Some(t)),
                None => (body, None),
            };
            let words: Vec<&str> = head.split_whitespace().collect();
            match words.as_slice() {
                ["dim", m] => {
                    if dim.is_some() {
                        return Err(perr("repeated dim line".into()));
                    }
                    dim = Some(m.parse().map_err(|_| perr(format!("bad dimension {m:?}")))?);
                }
                ["vertex", id] => {
                    if tail.is_some() {
                        return Err(perr("vertex takes no faces".into()));
                    }
                    pending.push(Pending { line, k: 0, name: id.to_string(), faces: vec![] });
                }
                ["simplex", k, id] => {
                    let k: usize = k.parse().map_err(|_| perr(format!("bad simplex dimension {k:?}")))?;
                    let faces: Vec<String> =
                        tail.unwrap_or("").split_whitespace().map(str::to_string).collect();
                    let want = if k == 0 { 0 } else { k + 1 };
                    if faces.len() != want {
                        return Err(perr(format!("simplex {id} needs {want} faces, got {}", faces.len())));
                    }
                    pending.push(Pending { line, k, name: id.to_string(), faces });
                }
                _ => return Err(perr(format!("unrecognized line {body:?}"))),
            }
        }
        let m = dim.ok_or(Error::Parse { line: 0, msg: "missing dim line".into() })?;
        let mut names = vec![Vec::new(); m + 1];
        let mut lookup: Vec<HashMap<String, usize>> = vec![HashMap::new(); m + 1];
        for p in &pending {
            if p.k > m {
                return Err(Error::Parse { line: p.line, msg: format!("simplex dimension {} exceeds dim {m}", p.k) });
            }
            if lookup.iter().any(|l| l.contains_key(&p.name)) {
                return Err(Error::Parse { line: p.line, msg: format!("duplicate simplex id {}", p.name) });
            }
            lookup[p.k].insert(p.name.clone(), names[p.k].len());
            names[p.k].push(p.name.clone());
        }
        let mut faces: Vec<Vec<Vec<usize>>> = names.iter().map(|r| vec![Vec::new(); r.len()]).collect();
        for p in &pending {
            if p.k == 0 {
                continue;
            }
            let idx = lookup[p.k][&p.name];
            let mut fs = Vec::with_capacity(p.faces.len());
            for f in &p.faces {
                match lookup[p.k - 1].get(f) {
                    Some(&j) => fs.push(j),
                    None => {
                        return Err(Error::Parse {
                            line: p.line,
                            msg: format!("simplex {}: face out of range ({f} is not a {}-simplex)", p.name, p.k - 1),
                        })
                    }
                }
            }
            faces[p.k][idx] = fs;
        }
        Self::with_names(names, faces)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim());
        for n in &self.names[0] {
            let _ = writeln!(s, "vertex {n}");
        }
        for k in 1..=self.dim() {
            for (i, fs) in self.faces[k].iter().enumerate() {
                let _ = write!(s, "simplex {k} {} :", self.names[k][i]);
                for &f in fs {
                    let _ = write!(s, " {}", self.names[k - 1][f]);
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn count(&self, k: usize) -> usize {
        self.faces.get(k).map_or(0, Vec::len)
    }

    pub fn top_count(&self) -> usize {
        self.count(self.dim())
    }

    pub fn faces_of(&self, k: usize, i: usize) -> &[usize] {
        &self.faces[k][i]
    }

    pub fn name(&self, k: usize, i: usize) -> &str {
        &self.names[k][i]
    }

    pub fn lookup(&self, name: &str) -> Option<SimplexId> {
        self.names
            .iter()
            .enumerate()
            .find_map(|(k, row)| row.iter().position(|n| n == name).map(|i| (k, i)))
    }

    /// The face of the n-simplex `i` spanned by the vertex subset `mask`.
    pub fn face_spanned(&self, n: usize, i: usize, mask: u32) -> SimplexId {
        let (mut k, mut cur) = (n, i);
        for j in (0..=n).rev() {
            if mask >> j & 1 == 0 {
                cur = self.faces[k][cur][j];
                k -= 1;
            }
        }
        (k, cur)
    }

    /// The ordered vertices of a simplex.
    pub fn vertices_of(&self, k: usize, i: usize) -> Vec<usize> {
        (0..=k).map(|j| self.face_spanned(k, i, 1 << j).1).collect()
    }

    pub fn boundary(&self, c: &Chain) -> Result<Chain> {
        let k = c.degree();
        if k == 0 || k > self.dim() {
            return Err(Error::DegreeMismatch { expected: 1.max(k.min(self.dim())), found: k });
        }
        let mut out = Chain::zero(k - 1);
        for (i, x) in c.iter() {
            if i >= self.count(k) {
                return Err(Error::InvalidComplex(format!("chain references missing {k}-simplex {i}")));
            }
            for (j, &f) in self.faces[k][i].iter().enumerate() {
                out.add_term(f, if j % 2 == 0 { x.clone() } else { -x.clone() });
            }
        }
        Ok(out)
    }

    /// Matrix of ∂_k with rows indexed by (k-1)-simplices.
    pub fn boundary_matrix(&self, k: usize) -> Matrix {
        let mut m = linalg::zeros(self.count(k - 1), self.count(k));
        for (i, fs) in self.faces[k].iter().enumerate() {
            for (j, &f) in fs.iter().enumerate() {
                if j % 2 == 0 {
                    m[f][i] += Q::one();
                } else {
                    m[f][i] -= Q::one();
                }
            }
        }
        m
    }

    /// Rational Betti number in degree k and cycles representing a basis of H_k.
    pub fn homology_rank(&self, k: usize) -> (usize, Vec<Chain>) {
        let n = self.count(k);
        let cycles = if k == 0 {
            (0..n)
                .map(|i| {
                    let mut v = vec![Q::zero(); n];
                    v[i] = Q::one();
                    v
                })
                .collect()
        } else {
            linalg::nullspace(&self.boundary_matrix(k), n)
        };
        let mut ech = Echelon::new();
        if k < self.dim() {
            let d = self.boundary_matrix(k + 1);
            for col in 0..self.count(k + 1) {
                let v: Vec<Q> = d.iter().map(|row| row[col].clone()).collect();
                ech.insert(&v);
            }
        }
        let basis: Vec<Chain> = cycles
            .into_iter()
            .filter(|z| ech.insert(z))
            .map(|z| Chain::from_dense(k, &z))
            .collect();
        (basis.len(), basis)
    }

    pub fn check_pseudomanifold(&self) -> PseudomanifoldReport {
        let m = self.dim();
        let mut failures = Vec::new();

        // P1: every simplex lies in a top simplex
        let mut covered: Vec<Vec<bool>> = (0..=m).map(|k| vec![false; self.count(k)]).collect();
        covered[m].iter_mut().for_each(|c| *c = true);
        for k in (1..=m).rev() {
            for i in 0..self.count(k) {
                if covered[k][i] {
                    for &f in &self.faces[k][i] {
                        covered[k - 1][f] = true;
                    }
                }
            }
        }
        let uncovered: Vec<SimplexId> = (0..m)
            .flat_map(|k| (0..self.count(k)).map(move |i| (k, i)))
            .filter(|&(k, i)| !covered[k][i])
            .collect();
        if !uncovered.is_empty() {
            failures.push(Failure { condition: Condition::P1, witnesses: uncovered });
        }

        // P2: each facet has exactly two top incidences, with multiplicity
        let mut incid: Vec<Vec<(usize, usize)>> = vec![Vec::new(); if m > 0 { self.count(m - 1) } else { 0 }];
        if m > 0 {
            for (s, fs) in self.faces[m].iter().enumerate() {
                for (j, &f) in fs.iter().enumerate() {
                    incid[f].push((s, j));
                }
            }
            for (f, inc) in incid.iter().enumerate() {
                if inc.len() != 2 {
                    failures.push(Failure { condition: Condition::P2, witnesses: vec![(m - 1, f)] });
                }
            }
        }
        let p2 = !failures.iter().any(|f| f.condition == Condition::P2);

        // P3: top simplices connected through facets
        let n = self.top_count();
        let mut comp = vec![usize::MAX; n];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for inc in &incid {
            for a in inc {
                for b in inc {
                    if a.0 != b.0 {
                        adj[a.0].push(b.0);
                    }
                }
            }
        }
        let mut ncomp = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut queue = VecDeque::from([s]);
            comp[s] = ncomp;
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = ncomp;
                        queue.push_back(w);
                    }
                }
            }
            ncomp += 1;
        }
        if ncomp != 1 {
            let reps = (0..ncomp).map(|c| (m, comp.iter().position(|&x| x == c).unwrap())).collect();
            failures.push(Failure { condition: Condition::P3, witnesses: reps });
        }

        let (orientable, fundamental_cycle) = if p2 && n > 0 {
            match self.propagate_orientation(&incid) {
                Some(eps) => (true, Some(Chain::from_ints(m, &eps.iter().copied().enumerate().collect::<Vec<_>>()))),
                None => (false, None),
            }
        } else {
            (false, None)
        };
        PseudomanifoldReport { is_pseudomanifold: failures.is_empty(), failures, orientable, fundamental_cycle }
    }

    fn propagate_orientation(&self, incid: &[Vec<(usize, usize)>]) -> Option<Vec<i64>> {
        let m = self.dim();
        let n = self.top_count();
        let sgn = |j: usize| if j.is_multiple_of(2) { 1i64 } else { -1 };
        let mut nbrs: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for inc in incid {
            let [(s, i), (t, j)] = [inc[0], inc[1]];
            // eps(s)(-1)^i + eps(t)(-1)^j = 0
            let rel = -sgn(i) * sgn(j);
            if s == t {
                if rel != 1 {
                    return None;
                }
                continue;
            }
            nbrs[s].push((t, rel));
            nbrs[t].push((s, rel));
        }
        let _ = m;
        let mut eps = vec![0i64; n];
        for s0 in 0..n {
            if eps[s0] != 0 {
                continue;
            }
            eps[s0] = 1;
            let mut queue = VecDeque::from([s0]);
            while let Some(u) = queue.pop_front() {
                for &(w, rel) in &nbrs[u] {
                    let want = eps[u] * rel;
                    if eps[w] == 0 {
                        eps[w] = want;
                        queue.push_back(w);
                    } else if eps[w] != want {
                        return None;
                    }
                }
            }
        }
        Some(eps)
    }

    /// Second orientability test, through the top homology of each component.
    pub fn orientation_double_check(&self) -> bool {
        self.components().iter().all(|c| c.homology_rank(c.dim()).0 == 1)
    }

    pub fn barycentric_subdivide(&self) -> Subdivision {
        Subdivision::new(self)
    }

    /// Disjoint union, with `v2` of `other` identified to `v1` of `self`.
    pub fn wedge(&self, v1: usize, other: &DeltaComplex, v2: usize) -> Result<DeltaComplex> {
        if v1 >= self.count(0) || v2 >= other.count(0) {
            return Err(Error::InvalidComplex(format!("wedge vertex out of range ({v1}, {v2})")));
        }
        self.glue(other, Some((v1, v2)))
    }

    pub fn disjoint_union(&self, other: &DeltaComplex) -> DeltaComplex {
        self.glue(other, None).expect("union of valid complexes is valid")
    }

    fn glue(&self, other: &DeltaComplex, ident: Option<(usize, usize)>) -> Result<DeltaComplex> {
        let dim = self.dim().max(other.dim());
        let mut names = self.names.clone();
        let mut faces = self.faces.clone();
        names.resize(dim + 1, Vec::new());
        faces.resize(dim + 1, Vec::new());
        let mut taken: BTreeSet<String> = self.names.iter().flatten().cloned().collect();
        let mut remap: Vec<Vec<usize>> = Vec::new();
        for k in 0..=other.dim() {
            let mut map = Vec::with_capacity(other.count(k));
            for i in 0..other.count(k) {
                if k == 0 {
                    if let Some((v1, v2)) = ident {
                        if i == v2 {
                            map.push(v1);
                            continue;
                        }
                    }
                }
                let mut name = other.names[k][i].clone();
                while taken.contains(&name) {
                    name.push('\'');
                }
                taken.insert(name.clone());
                let fs = if k == 0 { vec![] } else { other.faces[k][i].iter().map(|&f| remap[k - 1][f]).collect() };
                map.push(faces[k].len());
                names[k].push(name);
                faces[k].push(fs);
            }
            remap.push(map);
        }
        DeltaComplex::with_names(names, faces)
    }

    /// Connected components, each as its own complex (names kept).
    pub fn components(&self) -> Vec<DeltaComplex> {
        let offs: Vec<usize> = (0..=self.dim())
            .scan(0, |acc, k| {
                let o = *acc;
                *acc += self.count(k);
                Some(o)
            })
            .collect();
        let total = offs[self.dim()] + self.top_count();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for k in 1..=self.dim() {
            for i in 0..self.count(k) {
                for &f in &self.faces[k][i] {
                    let (a, b) = (find(&mut parent, offs[k] + i), find(&mut parent, offs[k - 1] + f));
                    parent[a] = b;
                }
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        for v in 0..self.count(0) {
            let r = find(&mut parent, v);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        roots
            .iter()
            .map(|&r| {
                let mut names = Vec::new();
                let mut faces = Vec::new();
                let mut remap: Vec<HashMap<usize, usize>> = Vec::new();
                for k in 0..=self.dim() {
                    let mut nk = Vec::new();
                    let mut fk = Vec::new();
                    let mut map = HashMap::new();
                    for i in 0..self.count(k) {
                        if find(&mut parent, offs[k] + i) == r {
                            map.insert(i, nk.len());
                            nk.push(self.names[k][i].clone());
                            fk.push(if k == 0 {
                                vec![]
                            } else {
                                self.faces[k][i].iter().map(|f| remap[k - 1][f]).collect()
                            });
                        }
                    }
                    names.push(nk);
                    faces.push(fk);
                    remap.push(map);
                }
                while faces.len() > 1 && faces.last().is_some_and(Vec::is_empty) {
                    faces.pop();
                    names.pop();
                }
                DeltaComplex { names, faces }
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Euler characteristic.
    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim()).map(|k| if k % 2 == 0 { 1 } else { -1 } * self.count(k) as i64).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    P1,
    P2,
    P3,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub condition: Condition,
    pub witnesses: Vec<SimplexId>,
}

#[derive(Clone, Debug)]
pub struct PseudomanifoldReport {
    pub is_pseudomanifold: bool,
    pub failures: Vec<Failure>,
    pub orientable: bool,
    pub fundamental_cycle: Option<Chain>,
}

/// Barycentric subdivision together with its chain map.
///
/// A k-simplex of the subdivision is a strict flag S_0 ⊊ … ⊊ S_k of vertex
/// subsets of some n-simplex σ with S_k the full set.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub complex: DeltaComplex,
    keys: Vec<HashMap<(usize, usize, Vec<u32>), usize>>,
}

fn flags_ending_at(full: u32, len: usize, out: &mut Vec<Vec<u32>>) {
    fn rec(top: u32, remaining: usize, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            let mut f = acc.clone();
            f.reverse();
            out.push(f);
            return;
        }
        // proper nonempty subsets of `top`
        let mut sub = (top - 1) & top;
        let mut subs = Vec::new();
        while sub != 0 {
            subs.push(sub);
            sub = (sub - 1) & top;
        }
        subs.reverse();
        for s in subs {
            acc.push(s);
            rec(s, remaining - 1, acc, out);
            acc.pop();
        }
    }
    let mut acc = vec![full];
    rec(full, len - 1, &mut acc, out);
}

fn compress(mask: u32, within: u32) -> u32 {
    let mut out = 0;
    let mut pos = 0;
    for b in 0..32 {
        if within >> b & 1 == 1 {
            if mask >> b & 1 == 1 {
                out |= 1 << pos;
            }
            pos += 1;
        }
    }
    out
}

impl Subdivision {
    fn new(x: &DeltaComplex) -> Self {
        let m = x.dim();
        let mut keys: Vec<HashMap<(usize, usize, Vec<u32>), usize>> = Vec::new();
        let mut faces: Vec<Vec<Vec<usize>>> = Vec::new();
        for k in 0..=m {
            let mut map = HashMap::new();
            let mut fk = Vec::new();
            for n in k..=m {
                let full = (1u32 << (n + 1)) - 1;
                for i in 0..x.count(n) {
                    let mut flags = Vec::new();
                    flags_ending_at(full, k + 1, &mut flags);
                    for flag in flags {
                        let fs = if k == 0 {
                            vec![]
                        } else {
                            (0..=k)
                                .map(|j| {
                                    let key = if j < k {
                                        let mut f = flag.clone();
                                        f.remove(j);
                                        (n, i, f)
                                    } else {
                                        let within = flag[k - 1];
                                        let (d, t) = x.face_spanned(n, i, within);
                                        (d, t, flag[..k].iter().map(|&s| compress(s, within)).collect())
                                    };
                                    keys[k - 1][&key]
                                })
                                .collect()
                        };
                        map.insert((n, i, flag), fk.len());
                        fk.push(fs);
                    }
                }
            }
            keys.push(map);
            faces.push(fk);
        }
        let complex = DeltaComplex::from_faces(faces).expect("subdivision of a valid complex is valid");
        Subdivision { complex, keys }
    }

    /// The subdivision chain map, commuting with ∂.
    pub fn push_chain(&self, c: &Chain) -> Chain {
        let n = c.degree();
        let full = (1u32 << (n + 1)) - 1;
        let mut flags = Vec::new();
        flags_ending_at(full, n + 1, &mut flags);
        let signed: Vec<(Vec<u32>, i64)> = flags
            .into_iter()
            .map(|f| {
                let mut s = 1i64;
                for j in (1..=n).rev() {
                    let removed = f[j] & !f[j - 1];
                    let pos = (f[j] & (removed - 1)).count_ones() as usize;
                    if (j + pos) % 2 == 1 {
                        s = -s;
                    }
                }
                (f, s)
            })
            .collect();
        let mut out = Chain::zero(n);
        for (i, x) in c.iter() {
            for (f, s) in &signed {
                let idx = self.keys[n][&(n, i, f.clone())];
                out.add_term(idx, x * q(*s));
            }
        }
        out
    }
}

/// Standard small complexes used throughout tests and examples.
pub mod fixtures {
    use super::DeltaComplex;

    fn named(spec: &[(&str, usize, &[&str])], dim: usize) -> DeltaComplex {
        let mut text = format!("dim {dim}\n");
        for (name, k, faces) in spec {
            if *k == 0 {
                text.push_str(&format!("vertex {name}\n"));
            } else {
                text.push_str(&format!("simplex {k} {name} : {}\n", faces.join(" ")));
            }
        }
        DeltaComplex::parse(&text).expect("fixture is valid")
    }

    pub fn circle() -> DeltaComplex {
        named(&[("v", 0, &[]), ("e", 1, &["v", "v"])], 1)
    }

    /// Wedge of `n` one-edge loops at a single vertex.
    pub fn bouquet(n: usize) -> DeltaComplex {
        let faces = vec![vec![vec![]], vec![vec![0, 0]; n]];
        DeltaComplex::from_faces(faces).expect("bouquet")
    }

    /// One-vertex torus from two triangles.
    pub fn torus() -> DeltaComplex {
        named(
            &[
                ("v", 0, &[]),
                ("a", 1, &["v", "v"]),
                ("b", 1, &["v", "v"]),
                ("c", 1, &["v", "v"]),
                ("U", 2, &["a", "c", "b"]),
                ("L", 2, &["b", "c", "a"]),
            ],
            2,
        )
    }

    /// Two triangles glued along their whole boundary.
    pub fn pillow() -> DeltaComplex {
        named(
            &[
                ("x", 0, &[]),
                ("y", 0, &[]),
                ("z", 0, &[]),
                ("e0", 1, &["z", "y"]),
                ("e1", 1, &["z", "x"]),
                ("e2", 1, &["y", "x"]),
                ("T1", 2, &["e0", "e1", "e2"]),
                ("T2", 2, &["e0", "e1", "e2"]),
            ],
            2,
        )
    }

    /// Two-triangle projective plane.
    pub fn projective_plane() -> DeltaComplex {
        named(
            &[
                ("p", 0, &[]),
                ("q", 0, &[]),
                ("a", 1, &["p", "p"]),
                ("b", 1, &["p", "p"]),
                ("c", 1, &["p", "q"]),
                ("A", 2, &["a", "b", "a"]),
                ("B", 2, &["b", "c", "c"]),
            ],
            2,
        )
    }

    pub fn simplex(n: usize) -> DeltaComplex {
        DeltaComplex::from_simplicial(n + 1, &[(0..=n).collect()]).expect("simplex")
    }

    /// One-vertex closed surface from a polygon word, fan-triangulated from
    /// the first corner. Letters are `(generator, inverted)`; the word must
    /// start with a positive letter and end with an inverted one.
    pub fn polygon_surface(gens: usize, word: &[(usize, bool)]) -> DeltaComplex {
        let s = word.len();
        assert!(s >= 4 && !word[0].1 && word[s - 1].1, "word must start positive and end inverted");
        let mut faces = vec![vec![vec![]], vec![vec![0, 0]; gens], vec![]];
        // diagonal from corner 0 to corner i, for 2 <= i <= s-2
        let diag = |i: usize| gens + i - 2;
        for _ in 2..=s - 2 {
            faces[1].push(vec![0, 0]);
        }
        // edge from corner 0 to corner i (sides at both ends, diagonals in between)
        let spoke = |i: usize| {
            if i == 1 {
                word[0].0
            } else if i == s - 1 {
                word[s - 1].0
            } else {
                diag(i)
            }
        };
        for i in 1..s - 1 {
            let (g, inv) = word[i];
            // corner 0 is the source of both spokes; order the other two by the side's direction
            let (a, b) = if inv { (i + 1, i) } else { (i, i + 1) };
            faces[2].push(vec![g, spoke(b), spoke(a)]);
        }
        DeltaComplex::from_faces(faces).expect("polygon surface")
    }

    /// Orientable genus-g surface with one vertex and 4g-2 triangles.
    pub fn genus_surface(g: usize) -> DeltaComplex {
        let mut word = Vec::new();
        for j in 0..g {
            let (a, b) = (2 * j, 2 * j + 1);
            word.extend([(a, false), (b, false), (a, true), (b, true)]);
        }
        polygon_surface(2 * g, &word)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_circle_and_roundtrip() {
        let x = DeltaComplex::parse("# loop\ndim 1\nvertex v\nsimplex 1 e : v v\n").unwrap();
        assert_eq!((x.count(0), x.count(1)), (1, 1));
        assert_eq!(DeltaComplex::parse(&x.to_text()).unwrap(), x);
        let t = torus();
        assert_eq!((t.count(0), t.count(1), t.count(2)), (1, 3, 2));
        assert_eq!(DeltaComplex::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn dangling_face_is_rejected() {
        let err = DeltaComplex::parse("dim 2\nvertex v\nsimplex 1 a : v v\nsimplex 2 T : a a zz\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("face out of range"), "{msg}");
        assert!(msg.starts_with("line 4"), "{msg}");
    }

    #[test]
    fn face_identity_is_enforced() {
        // edge with distinct endpoints but triangle closing it up inconsistently
        let text = "dim 2\nvertex p\nvertex q\nsimplex 1 a : q p\nsimplex 1 b : p p\nsimplex 2 T : b a a\n";
        assert!(DeltaComplex::parse(text).is_err());
    }

    #[test]
    fn boundary_of_a_triangle() {
        let s = simplex(2);
        let d = s.boundary(&Chain::from_ints(2, &[(0, 1)])).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.l1_norm(), q(3));
        assert!(s.boundary(&Chain::from_ints(0, &[(0, 1)])).is_err());
    }

    #[test]
    fn torus_cycle_is_closed() {
        let t = torus();
        let z = Chain::from_ints(2, &[(0, 1), (1, -1)]);
        assert!(t.boundary(&z).unwrap().is_empty());
    }

    #[test]
    fn pseudomanifold_examples() {
        let r = circle().check_pseudomanifold();
        assert!(r.is_pseudomanifold && r.orientable);

        let r = simplex(2).check_pseudomanifold();
        assert!(!r.is_pseudomanifold);
        let p2: Vec<_> = r.failures.iter().filter(|f| f.condition == Condition::P2).collect();
        assert_eq!(p2.len(), 3);

        let r = pillow().check_pseudomanifold();
        assert!(r.is_pseudomanifold && r.orientable);
        assert_eq!(r.fundamental_cycle.unwrap(), Chain::from_ints(2, &[(0, 1), (1, -1)]));

        let r = projective_plane().check_pseudomanifold();
        assert!(r.is_pseudomanifold && !r.orientable);
    }

    #[test]
    fn homology_ranks() {
        assert_eq!(circle().homology_rank(1).0, 1);
        let t = torus();
        assert_eq!(t.homology_rank(0).0, 1);
        assert_eq!(t.homology_rank(1).0, 2);
        assert_eq!(t.homology_rank(2).0, 1);
        assert_eq!(pillow().homology_rank(2).0, 1);
        let rp = projective_plane();
        assert_eq!(rp.homology_rank(1).0, 0);
        assert_eq!(rp.homology_rank(2).0, 0);
        let g2 = genus_surface(2);
        assert_eq!(g2.top_count(), 6);
        assert_eq!(g2.homology_rank(1).0, 4);
        assert_eq!(g2.homology_rank(2).0, 1);
        assert!(g2.check_pseudomanifold().orientable);
    }

    #[test]
    fn orientation_checks_agree() {
        for x in [circle(), pillow(), torus(), projective_plane(), genus_surface(2), genus_surface(3)] {
            assert_eq!(x.check_pseudomanifold().orientable, x.orientation_double_check());
        }
        assert!(!projective_plane().orientation_double_check());
    }

    #[test]
    fn subdivision_counts() {
        let seg = simplex(1).barycentric_subdivide().complex;
        assert_eq!(seg.count(1), 2);
        assert_eq!(simplex(2).barycentric_subdivide().complex.count(2), 6);
        let t = torus().barycentric_subdivide().complex;
        assert_eq!(t.count(2), 12);
        for k in 0..=2 {
            assert_eq!(t.homology_rank(k).0, torus().homology_rank(k).0);
        }
        let rp = projective_plane().barycentric_subdivide().complex;
        assert_eq!(rp.homology_rank(1).0, 0);
        assert_eq!(rp.euler_characteristic(), 1);
        assert_eq!(simplex(3).barycentric_subdivide().complex.count(3), 24);
    }

    #[test]
    fn subdivision_chain_map_commutes_with_boundary() {
        for x in [simplex(3), torus(), projective_plane(), pillow()] {
            let sd = x.barycentric_subdivide();
            for k in 1..=x.dim() {
                for i in 0..x.count(k) {
                    let c = Chain::from_ints(k, &[(i, 1)]);
                    let lhs = sd.complex.boundary(&sd.push_chain(&c)).unwrap();
                    let rhs = sd.push_chain(&x.boundary(&c).unwrap());
                    assert_eq!(lhs, rhs, "k={k} i={i}");
                }
            }
        }
        let t = torus();
        let z = t.check_pseudomanifold().fundamental_cycle.unwrap();
        let sd = t.barycentric_subdivide();
        let pushed = sd.push_chain(&z);
        assert!(sd.complex.boundary(&pushed).unwrap().is_empty());
        assert_eq!(pushed.l1_norm(), q(12));
    }

    #[test]
    fn wedges() {
        let f8 = circle().wedge(0, &circle(), 0).unwrap();
        assert_eq!((f8.count(0), f8.count(1)), (1, 2));
        let w3 = f8.wedge(0, &circle(), 0).unwrap();
        assert_eq!(w3.count(1), 3);
        assert_eq!(w3.homology_rank(1).0, 3);
        let tt = torus().wedge(0, &torus(), 0).unwrap();
        assert_eq!(tt.homology_rank(1).0, 4);
        assert_eq!(tt.top_count(), 4);
        assert!(torus().wedge(3, &torus(), 0).is_err());
    }

    #[test]
    fn components_split() {
        let u = torus().disjoint_union(&pillow());
        let cs = u.components();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].top_count() + cs[1].top_count(), 4);
        assert!(!u.check_pseudomanifold().is_pseudomanifold);
    }

    fn random_complex() -> impl Strategy<Value = DeltaComplex> {
        (4usize..8, proptest::collection::vec(proptest::collection::vec(0usize..8, 2..5), 1..6)).prop_map(
            |(n, tops)| {
                let tops: Vec<Vec<usize>> = tops.into_iter().map(|t| t.into_iter().map(|v| v % n).collect()).collect();
                DeltaComplex::from_simplicial(n, &tops).unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn boundary_squares_to_zero(x in random_complex(), seed in proptest::collection::vec(-5i64..6, 40)) {
            for k in 2..=x.dim() {
                let pairs: Vec<(usize, i64)> = (0..x.count(k)).map(|i| (i, seed[i % seed.len()])).collect();
                let c = Chain::from_ints(k, &pairs);
                let dd = x.boundary(&x.boundary(&c).unwrap()).unwrap();
                prop_assert!(dd.is_empty());
            }
        }

        #[test]
        fn boundary_norm_bound(x in random_complex(), seed in proptest::collection::vec(-5i64..6, 40)) {
            for k in 1..=x.dim() {
                let pairs: Vec<(usize, i64)> = (0..x.count(k)).map(|i| (i, seed[i % seed.len()])).collect();
                let c = Chain::from_ints(k, &pairs);
                let d = x.boundary(&c).unwrap();
                prop_assert!(d.l1_norm() <= c.l1_norm() * q(k as i64 + 1));
            }
        }

        #[test]
        fn subdivision_preserves_betti(x in random_complex()) {
            let sd = x.barycentric_subdivide().complex;
            let fact: usize = (1..=x.dim() + 1).product();
            prop_assert_eq!(sd.top_count(), x.top_count() * fact);
            for k in 0..=x.dim() {
                prop_assert_eq!(sd.homology_rank(k).0, x.homology_rank(k).0);
            }
        }

        #[test]
        fn wedge_adds_top_counts(a in random_complex(), b in random_complex()) {
            let w = a.wedge(0, &b, 0).unwrap();
            if a.dim() == b.dim() && a.dim() > 0 {
                prop_assert_eq!(w.top_count(), a.top_count() + b.top_count());
            }
            prop_assert_eq!(w.count(0), a.count(0) + b.count(0) - 1);
        }
    }
}
