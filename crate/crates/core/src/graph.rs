//! Metric graphs and covering data.
//!
//! Edge `i` yields the directed edges `2i` (u → v) and `2i + 1` (v → u), so
//! reversal is `d ^ 1`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{FreeWord, Perm};

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub name: String,
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    n: usize,
    edges: Vec<Edge>,
    basepoint: usize,
}

impl MetricGraph {
    pub fn new(n: usize, edges: Vec<Edge>, basepoint: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if basepoint >= n {
            return Err(Error::InvalidGraph(format!("basepoint {basepoint} out of range")));
        }
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!("edge {} has an endpoint out of range", e.name)));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidGraph(format!("edge {} has non-positive length", e.name)));
            }
        }
        let g = MetricGraph { n, edges, basepoint };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(g)
    }

    /// Unnamed edges `(u, v, length)`; names are `e0, e1, …`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], basepoint: usize) -> Result<Self> {
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v, length))| Edge { name: format!("e{i}"), u, v, length })
            .collect();
        Self::new(n, edges, basepoint)
    }

    pub fn circle(length: f64) -> Self {
        Self::from_edges(1, &[(0, 0, length)], 0).expect("circle")
    }

    /// One vertex with a loop of each given length.
    pub fn bouquet(lengths: &[f64]) -> Self {
        let edges: Vec<_> = lengths.iter().map(|&l| (0, 0, l)).collect();
        Self::from_edges(1, &edges, 0).expect("bouquet")
    }

    pub fn figure_eight() -> Self {
        let mut g = Self::bouquet(&[1.0, 1.0]);
        g.edges[0].name = "a".into();
        g.edges[1].name = "b".into();
        g
    }

    /// Two vertices joined by edges of the given lengths.
    pub fn theta(lengths: &[f64]) -> Self {
        let edges: Vec<_> = lengths.iter().map(|&l| (0, 1, l)).collect();
        Self::from_edges(2, &edges, 0).expect("theta")
    }

    /// Random connected graph of the given rank with lengths drawn uniformly from `lo..=hi`.
    pub fn random<R: Rng>(rng: &mut R, rank: usize, lo: f64, hi: f64) -> Self {
        let n = rng.gen_range(1..=3);
        let mut edges = Vec::new();
        for v in 1..n {
            edges.push((rng.gen_range(0..v), v, rng.gen_range(lo..=hi)));
        }
        for _ in 0..rank {
            edges.push((rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(lo..=hi)));
        }
        Self::from_edges(n, &edges, 0).expect("random graph is connected")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn with_basepoint(&self, p: usize) -> Result<Self> {
        Self::new(self.n, self.edges.clone(), p)
    }

    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.n
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        let mut edges = self.edges.clone();
        for (e, &l) in edges.iter_mut().zip(lengths) {
            e.length = l;
        }
        Self::new(self.n, edges, self.basepoint)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let ls: Vec<f64> = self.lengths().iter().map(|l| l * lambda).collect();
        self.with_lengths(&ls).expect("positive scaling")
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    // directed edges
    pub fn tail(&self, d: usize) -> usize {
        let e = &self.edges[d / 2];
        if d.is_multiple_of(2) { e.u } else { e.v }
    }

    pub fn head(&self, d: usize) -> usize {
        let e = &self.edges[d / 2];
        if d.is_multiple_of(2) { e.v } else { e.u }
    }

    pub fn dlen(&self, d: usize) -> f64 {
        self.edges[d / 2].length
    }

    /// Directed edges leaving each vertex.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for d in 0..2 * self.edges.len() {
            out[self.tail(d)].push(d);
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| (e.u == v) as usize + (e.v == v) as usize).sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let out = self.out_edges();
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &out[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Edge indices of the 2-core (repeatedly strip degree-one vertices).
    pub fn core_edges(&self) -> Vec<usize> {
        let mut alive = vec![true; self.edges.len()];
        let mut deg: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| deg[v] == 1).collect();
        while let Some(v) = queue.pop_front() {
            if deg[v] != 1 {
                continue;
            }
            if let Some(i) = (0..self.edges.len()).find(|&i| alive[i] && (self.edges[i].u == v || self.edges[i].v == v)) {
                alive[i] = false;
                let e = &self.edges[i];
                deg[e.u] -= 1;
                deg[e.v] -= 1;
                let w = if e.u == v { e.v } else { e.u };
                if deg[w] == 1 {
                    queue.push_back(w);
                }
            }
        }
        (0..self.edges.len()).filter(|&i| alive[i]).collect()
    }

    /// Shortest-path distances from `src` (Dijkstra).
    pub fn distances_from(&self, src: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n];
        let mut heap = std::collections::BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem(0.0, src));
        let out = self.out_edges();
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &e in &out[v] {
                let w = self.head(e);
                let nd = d + self.dlen(e);
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        dist
    }

    /// Upper bound on how far any point of the graph lies from the basepoint.
    pub fn covering_radius(&self) -> f64 {
        let d = self.distances_from(self.basepoint);
        self.edges.iter().map(|e| (d[e.u] + d[e.v] + e.length) / 2.0).fold(0.0, f64::max)
    }

    /// Spanning tree (BFS from the basepoint) as a flag per edge.
    pub fn spanning_tree(&self) -> Vec<bool> {
        let mut in_tree = vec![false; self.edges.len()];
        let mut seen = vec![false; self.n];
        let out = self.out_edges();
        let mut queue = VecDeque::from([self.basepoint]);
        seen[self.basepoint] = true;
        while let Some(v) = queue.pop_front() {
            for &d in &out[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    in_tree[d / 2] = true;
                    queue.push_back(w);
                }
            }
        }
        in_tree
    }

    /// Based loops generating π₁: for each non-tree edge, tree path out, the edge, tree path back.
    pub fn fundamental_loops(&self) -> Vec<Vec<usize>> {
        let tree = self.spanning_tree();
        // parent directed edge into each vertex along the tree
        let mut parent: Vec<Option<usize>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let out = self.out_edges();
        let mut queue = VecDeque::from([self.basepoint]);
        seen[self.basepoint] = true;
        while let Some(v) = queue.pop_front() {
            for &d in &out[v] {
                let w = self.head(d);
                if tree[d / 2] && !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        let path_to = |mut v: usize| {
            let mut p = Vec::new();
            while let Some(d) = parent[v] {
                p.push(d);
                v = self.tail(d);
            }
            p.reverse();
            p
        };
        (0..self.edges.len())
            .filter(|&i| !tree[i])
            .map(|i| {
                let d = 2 * i;
                let mut w = path_to(self.tail(d));
                w.push(d);
                w.extend(path_to(self.head(d)).iter().rev().map(|&x| x ^ 1));
                w
            })
            .collect()
    }

    /// Explicit finite cover: sheet `s` over edge `i` runs from `(u, s)` to `(v, perm_i(s))`.
    pub fn covering_graph(&self, perms: &[Perm]) -> Result<Self> {
        let deg = perms.first().map_or(1, Perm::degree);
        if perms.len() != self.edges.len() || perms.iter().any(|p| p.degree() != deg) {
            return Err(Error::InvalidCover("one permutation of common degree per edge is required".into()));
        }
        let mut edges = Vec::new();
        for (e, p) in self.edges.iter().zip(perms) {
            for s in 0..deg {
                edges.push(Edge {
                    name: format!("{}_{s}", e.name),
                    u: e.u * deg + s,
                    v: e.v * deg + p.apply(s),
                    length: e.length,
                });
            }
        }
        Self::new(self.n * deg, edges, self.basepoint * deg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = false;
        let mut n: Option<usize> = None;
        let mut base = 0;
        let mut edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line, msg };
            let w: Vec<&str> = body.split_whitespace().collect();
            match w.as_slice() {
                ["graph"] => header = true,
                ["vertices", k] => n = Some(k.parse().map_err(|_| perr(format!("bad vertex count {k:?}")))?),
                ["basepoint", v] => base = v.parse().map_err(|_| perr(format!("bad basepoint {v:?}")))?,
                ["edge", name, u, v, len] => {
                    let len = len
                        .strip_prefix("length=")
                        .ok_or_else(|| perr("expected length=<x>".into()))?;
                    let length = parse_number(len).ok_or_else(|| perr(format!("bad length {len:?}")))?;
                    let u = u.parse().map_err(|_| perr(format!("bad endpoint {u:?}")))?;
                    let v = v.parse().map_err(|_| perr(format!("bad endpoint {v:?}")))?;
                    if edges.iter().any(|e: &Edge| e.name == *name) {
                        return Err(perr(format!("duplicate edge {name}")));
                    }
                    edges.push(Edge { name: name.to_string(), u, v, length });
                }
                _ => return Err(perr(format!("unrecognized line {body:?}"))),
            }
        }
        if !header {
            return Err(Error::Parse { line: 1, msg: "missing `graph` header".into() });
        }
        let n = n.ok_or(Error::Parse { line: 0, msg: "missing `vertices` line".into() })?;
        Self::new(n, edges, base)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("graph\nvertices {}\n", self.n);
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {} length={}", e.name, e.u, e.v, e.length);
        }
        let _ = writeln!(s, "basepoint {}", self.basepoint);
        s
    }
}

/// Accepts decimals and fractions `p/q`.
pub fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct HeapItem(pub f64, pub usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // min-heap on distance, ties by id
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Which normal subgroup of π₁ to quotient the universal cover by.
///
/// Images are voltages on edges: a closed walk maps to the ordered product of
/// the images of its edges (inverted when an edge is traversed backwards).
/// Edges without an image map to the identity.
#[derive(Clone, Debug, PartialEq)]
pub enum CoverSpec {
    /// The universal cover.
    Trivial,
    /// Kernel of a map to a finite permutation group.
    FiniteQuotient { degree: usize, images: Vec<Perm> },
    /// Kernel of a map to the free group of the given rank.
    FreeQuotient { rank: usize, images: Vec<FreeWord> },
}

impl CoverSpec {
    pub fn finite(g: &MetricGraph, degree: usize, images: &[(&str, Perm)]) -> Result<Self> {
        let mut out = vec![Perm::identity(degree); g.edge_count()];
        for (name, p) in images {
            let i = g.edge_index(name).ok_or_else(|| Error::InvalidCover(format!("unknown edge {name}")))?;
            if p.degree() != degree {
                return Err(Error::InvalidCover(format!("permutation for {name} has the wrong degree")));
            }
            out[i] = p.clone();
        }
        Ok(CoverSpec::FiniteQuotient { degree, images: out })
    }

    pub fn free(g: &MetricGraph, rank: usize, images: &[(&str, FreeWord)]) -> Result<Self> {
        let mut out = vec![FreeWord::identity(); g.edge_count()];
        for (name, w) in images {
            let i = g.edge_index(name).ok_or_else(|| Error::InvalidCover(format!("unknown edge {name}")))?;
            if w.max_generator() > rank {
                return Err(Error::InvalidCover(format!("word for {name} uses a generator beyond rank {rank}")));
            }
            out[i] = w.clone();
        }
        Ok(CoverSpec::FreeQuotient { rank, images: out })
    }

    /// The identity map of π₁ onto a free group on the non-tree edges.
    pub fn identity_free(g: &MetricGraph) -> Self {
        let tree = g.spanning_tree();
        let mut images = vec![FreeWord::identity(); g.edge_count()];
        let mut r = 0;
        for (i, &t) in tree.iter().enumerate() {
            if !t {
                r += 1;
                images[i] = FreeWord::generator(r);
            }
        }
        CoverSpec::FreeQuotient { rank: r, images }
    }

    /// Parse `quotient trivial`, `quotient finite <degree>` or `quotient free <rank>`
    /// followed by `<edge> -> <image>` lines.
    pub fn parse(text: &str, g: &MetricGraph) -> Result<Self> {
        let mut kind: Option<(String, usize)> = None;
        let mut lines: Vec<(usize, String, String)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some((lhs, rhs)) = body.split_once("->") {
                lines.push((line, lhs.trim().to_string(), rhs.trim().to_string()));
                continue;
            }
            let w: Vec<&str> = body.split_whitespace().collect();
            match w.as_slice() {
                ["quotient", "trivial"] => kind = Some(("trivial".into(), 0)),
                ["quotient", k @ ("finite" | "free"), n] => {
                    let n = n.parse().map_err(|_| Error::Parse { line, msg: format!("bad size {n:?}") })?;
                    kind = Some((k.to_string(), n));
                }
                _ => return Err(Error::Parse { line, msg: format!("unrecognized line {body:?}") }),
            }
        }
        let (kind, n) = kind.ok_or(Error::Parse { line: 0, msg: "missing `quotient` line".into() })?;
        match kind.as_str() {
            "trivial" => {
                if let Some((line, ..)) = lines.first() {
                    return Err(Error::Parse { line: *line, msg: "trivial quotient takes no images".into() });
                }
                Ok(CoverSpec::Trivial)
            }
            "finite" => {
                let mut imgs = Vec::new();
                for (line, e, rhs) in &lines {
                    let p = Perm::parse_cycles(rhs, n).map_err(|msg| Error::Parse { line: *line, msg })?;
                    imgs.push((e.as_str(), p));
                }
                Self::finite(g, n, &imgs)
            }
            _ => {
                let mut imgs = Vec::new();
                for (line, e, rhs) in &lines {
                    let w = FreeWord::parse(rhs).map_err(|msg| Error::Parse { line: *line, msg })?;
                    imgs.push((e.as_str(), w));
                }
                Self::free(g, n, &imgs)
            }
        }
    }

    pub fn to_text(&self, g: &MetricGraph) -> String {
        match self {
            CoverSpec::Trivial => "quotient trivial\n".into(),
            CoverSpec::FiniteQuotient { degree, images } => {
                let mut s = format!("quotient finite {degree}\n");
                for (e, p) in g.edges().iter().zip(images) {
                    let _ = writeln!(s, "{} -> {}", e.name, p.to_cycles());
                }
                s
            }
            CoverSpec::FreeQuotient { rank, images } => {
                let mut s = format!("quotient free {rank}\n");
                for (e, w) in g.edges().iter().zip(images) {
                    let _ = writeln!(s, "{} -> {}", e.name, w);
                }
                s
            }
        }
    }

    pub(crate) fn check_graph(&self, g: &MetricGraph) -> Result<()> {
        let n = match self {
            CoverSpec::Trivial => return Ok(()),
            CoverSpec::FiniteQuotient { images, .. } => images.len(),
            CoverSpec::FreeQuotient { images, .. } => images.len(),
        };
        if n != g.edge_count() {
            return Err(Error::InvalidCover(format!("{n} images for {} edges", g.edge_count())));
        }
        Ok(())
    }

    /// Images of the fundamental loops as free words (free quotients only).
    pub fn loop_images(&self, g: &MetricGraph) -> Option<Vec<FreeWord>> {
        let CoverSpec::FreeQuotient { images, .. } = self else { return None };
        Some(
            g.fundamental_loops()
                .iter()
                .map(|l| {
                    l.iter().fold(FreeWord::identity(), |acc, &d| {
                        let w = if d % 2 == 0 { images[d / 2].clone() } else { images[d / 2].inverse() };
                        acc.mul(&w)
                    })
                })
                .collect(),
        )
    }
}

/// Element of the deck group of a regular cover.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Voltage {
    Perm(Perm),
    Word(FreeWord),
}

impl Voltage {
    pub fn mul(&self, other: &Voltage) -> Voltage {
        match (self, other) {
            (Voltage::Perm(a), Voltage::Perm(b)) => Voltage::Perm(a.then(b)),
            (Voltage::Word(a), Voltage::Word(b)) => Voltage::Word(a.mul(b)),
            _ => panic!("mixed voltage types"),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Voltage::Perm(p) => p.is_identity(),
            Voltage::Word(w) => w.is_identity(),
        }
    }
}

/// Voltage of each directed edge; the universal cover uses one free generator per edge.
pub fn directed_voltages(g: &MetricGraph, spec: &CoverSpec) -> Vec<Voltage> {
    (0..2 * g.edge_count())
        .map(|d| {
            let i = d / 2;
            let fwd = d % 2 == 0;
            match spec {
                CoverSpec::Trivial => {
                    let w = FreeWord::generator(i + 1);
                    Voltage::Word(if fwd { w } else { w.inverse() })
                }
                CoverSpec::FiniteQuotient { images, .. } => {
                    Voltage::Perm(if fwd { images[i].clone() } else { images[i].inverse() })
                }
                CoverSpec::FreeQuotient { images, .. } => {
                    Voltage::Word(if fwd { images[i].clone() } else { images[i].inverse() })
                }
            }
        })
        .collect()
}

pub fn identity_voltage(spec: &CoverSpec) -> Voltage {
    match spec {
        CoverSpec::FiniteQuotient { degree, .. } => Voltage::Perm(Perm::identity(*degree)),
        _ => Voltage::Word(FreeWord::identity()),
    }
}

/// Lazy Dijkstra in the regular cover determined by `spec`, started at the
/// lift `(source, identity)`. Calls `visit(vertex, element, distance)` on each
/// settled cover vertex up to distance `t_max`; returns the number settled.
pub fn explore_cover(
    g: &MetricGraph,
    spec: &CoverSpec,
    source: usize,
    t_max: f64,
    budget: usize,
    mut visit: impl FnMut(usize, &Voltage, f64) -> bool,
) -> Result<usize> {
    let volt = directed_voltages(g, spec);
    let out = g.out_edges();
    let mut ids: HashMap<(usize, Voltage), usize> = HashMap::new();
    let mut nodes: Vec<(usize, Voltage)> = Vec::new();
    let mut dist: Vec<f64> = Vec::new();
    let mut done: Vec<bool> = Vec::new();
    let mut heap = std::collections::BinaryHeap::new();
    let start = (source, identity_voltage(spec));
    ids.insert(start.clone(), 0);
    nodes.push(start);
    dist.push(0.0);
    done.push(false);
    heap.push(HeapItem(0.0, 0));
    let mut settled = 0;
    while let Some(HeapItem(d, id)) = heap.pop() {
        if done[id] || d > dist[id] {
            continue;
        }
        done[id] = true;
        settled += 1;
        let (v, g_el) = nodes[id].clone();
        if !visit(v, &g_el, d) {
            break;
        }
        for &e in &out[v] {
            let nd = d + g.dlen(e);
            if nd > t_max {
                continue;
            }
            let key = (g.head(e), g_el.mul(&volt[e]));
            let nid = match ids.get(&key) {
                Some(&x) => x,
                None => {
                    if nodes.len() >= budget {
                        return Err(Error::BudgetExceeded(budget));
                    }
                    let x = nodes.len();
                    ids.insert(key.clone(), x);
                    nodes.push(key);
                    dist.push(f64::INFINITY);
                    done.push(false);
                    x
                }
            };
            if nd < dist[nid] {
                dist[nid] = nd;
                heap.push(HeapItem(nd, nid));
            }
        }
    }
    Ok(settled)
}

/// Rank of the subgroup generated by `words`, by Stallings folding.
pub fn subgroup_rank(words: &[FreeWord]) -> usize {
    let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (from, generator, to)
    let mut nv = 1;
    for w in words {
        let letters = w.letters();
        if letters.is_empty() {
            continue;
        }
        let mut cur = 0;
        for (k, &x) in letters.iter().enumerate() {
            let next = if k + 1 == letters.len() {
                0
            } else {
                nv += 1;
                nv - 1
            };
            let g = x.unsigned_abs() as usize;
            if x > 0 {
                edges.push((cur, g, next));
            } else {
                edges.push((next, g, cur));
            }
            cur = next;
        }
    }
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    loop {
        let mut changed = false;
        let mut seen: BTreeMap<(usize, usize, bool), usize> = BTreeMap::new();
        for &(a, g, b) in &edges {
            let (a, b) = (find(&mut parent, a), find(&mut parent, b));
            for (key, target) in [((a, g, true), b), ((b, g, false), a)] {
                match seen.get(&key) {
                    Some(&t) => {
                        let (t, target) = (find(&mut parent, t), find(&mut parent, target));
                        if t != target {
                            parent[t] = target;
                            changed = true;
                        }
                    }
                    None => {
                        seen.insert(key, target);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut canon: Vec<(usize, usize, usize)> =
        edges.iter().map(|&(a, g, b)| (find(&mut parent, a), g, find(&mut parent, b))).collect();
    canon.sort_unstable();
    canon.dedup();
    let mut verts: Vec<usize> = canon.iter().flat_map(|&(a, _, b)| [a, b]).collect();
    verts.push(find(&mut parent, 0));
    verts.sort_unstable();
    verts.dedup();
    canon.len() + 1 - verts.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_figure_eight() {
        let text = "graph\nvertices 1\nedge a 0 0 length=1\nedge b 0 0 length=1/2\nbasepoint 0\n";
        let g = MetricGraph::parse(text).unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.lengths(), vec![1.0, 0.5]);
        assert_eq!(MetricGraph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(MetricGraph::from_edges(2, &[(0, 0, 1.0)], 0).is_err());
        assert!(MetricGraph::from_edges(1, &[(0, 0, 0.0)], 0).is_err());
        assert!(MetricGraph::parse("graph\nvertices 1\nedge a 0 0 len=1\n").is_err());
    }

    #[test]
    fn core_strips_trees() {
        // a loop with a pendant path
        let g = MetricGraph::from_edges(3, &[(0, 0, 1.0), (0, 1, 1.0), (1, 2, 1.0)], 2).unwrap();
        assert_eq!(g.core_edges(), vec![0]);
        assert_eq!(MetricGraph::theta(&[1.0; 3]).core_edges().len(), 3);
    }

    #[test]
    fn fundamental_loops_are_closed() {
        let g = MetricGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (1, 1, 2.0)], 0).unwrap();
        let loops = g.fundamental_loops();
        assert_eq!(loops.len(), g.rank());
        for l in loops {
            assert_eq!(g.tail(l[0]), 0);
            assert_eq!(g.head(*l.last().unwrap()), 0);
            for w in l.windows(2) {
                assert_eq!(g.head(w[0]), g.tail(w[1]));
            }
        }
    }

    #[test]
    fn cover_spec_parsing() {
        let g = MetricGraph::figure_eight();
        let s = CoverSpec::parse("quotient finite 2\na -> (0 1)\n", &g).unwrap();
        let CoverSpec::FiniteQuotient { images, .. } = &s else { panic!() };
        assert!(images[1].is_identity());
        assert_eq!(CoverSpec::parse(&s.to_text(&g), &g).unwrap(), s);
        let f = CoverSpec::parse("quotient free 1\nb -> g1\n", &g).unwrap();
        assert_eq!(CoverSpec::parse(&f.to_text(&g), &g).unwrap(), f);
        assert!(CoverSpec::parse("quotient free 1\nc -> g1\n", &g).is_err());
        assert!(CoverSpec::parse("quotient free 1\na -> g2\n", &g).is_err());
    }

    #[test]
    fn stallings_rank() {
        let a = FreeWord::generator(1);
        let b = FreeWord::generator(2);
        assert_eq!(subgroup_rank(&[a.clone(), b.clone()]), 2);
        assert_eq!(subgroup_rank(&[a.clone(), a.mul(&a)]), 1);
        assert_eq!(subgroup_rank(&[a.clone(), FreeWord::identity()]), 1);
        // <ab, ba> is free of rank 2
        assert_eq!(subgroup_rank(&[a.mul(&b), b.mul(&a)]), 2);
        // <a, bab^-1, b^2 a b^-2> has rank 3
        let conj = |k: i32| {
            let bk = FreeWord::from_letters(vec![2; k as usize]);
            bk.mul(&a).mul(&bk.inverse())
        };
        assert_eq!(subgroup_rank(&[conj(0), conj(1), conj(2)]), 3);
    }

    #[test]
    fn explicit_cover() {
        let g = MetricGraph::figure_eight();
        let c = g.covering_graph(&[Perm::from_images(vec![1, 2, 0]), Perm::identity(3)]).unwrap();
        assert_eq!(c.vertex_count(), 3);
        assert_eq!(c.edge_count(), 6);
        assert!((c.total_length() - 3.0 * g.total_length()).abs() < 1e-12);
    }

    #[test]
    fn cover_exploration_is_finite_for_finite_quotients() {
        let g = MetricGraph::circle(1.0);
        let spec = CoverSpec::finite(&g, 2, &[("e0", Perm::from_images(vec![1, 0]))]).unwrap();
        let mut pts = 0;
        explore_cover(&g, &spec, 0, 100.0, 1000, |_, _, _| {
            pts += 1;
            true
        })
        .unwrap();
        assert_eq!(pts, 2);
    }
}
