//! Free products of orbit-counting factors joined by a bridge ("dumbbells").
//!
//! Two metric graphs K₁, K₂ with covers are joined by a segment of length 2d
//! between their basepoints. The deck group of the resulting cover is the free
//! product G₁ ∗ G₂, and the orbit of the bridge midpoint is counted through
//! normal forms: an element γ₁…γ_l sits at distance 2dl + Σ ρ(γ_s).

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::entropy::{entropy_relative, EntropyEstimate, Method};
use crate::error::{Error, Result};
use crate::graph::{directed_voltages, explore_cover, subgroup_rank, CoverSpec, MetricGraph, Voltage};

/// Distances are compared on an integer grid of this many units per length unit.
const UNITS: f64 = 1e9;
pub const DEFAULT_BUDGET: usize = 10_000_000;

fn to_units(x: f64) -> i64 {
    (x * UNITS).round() as i64
}

fn from_units(u: i64) -> f64 {
    u as f64 / UNITS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// Finite deck group; the whole orbit is enumerated.
    Finite,
    /// The universal cover; the deck group is π₁ itself.
    Tree,
}

#[derive(Clone, Debug)]
pub struct FactorModel {
    graph: MetricGraph,
    spec: CoverSpec,
    kind: FactorKind,
    entropy: f64,
    radius: f64,
    /// (distance in units, multiplicity) of non-identity orbit points, sorted
    spectrum: Vec<(i64, f64)>,
    finite_dist: HashMap<Voltage, i64>,
}

impl FactorModel {
    /// Factor with the default spectrum radius (40 × shortest edge).
    pub fn new(graph: MetricGraph, spec: CoverSpec) -> Result<Self> {
        let r = 40.0 * graph.min_length();
        Self::with_radius(graph, spec, r, DEFAULT_BUDGET)
    }

    pub fn with_radius(graph: MetricGraph, spec: CoverSpec, radius: f64, budget: usize) -> Result<Self> {
        spec.check_graph(&graph)?;
        let (kind, spec) = match &spec {
            CoverSpec::Trivial => (FactorKind::Tree, CoverSpec::Trivial),
            CoverSpec::FiniteQuotient { .. } => (FactorKind::Finite, spec),
            CoverSpec::FreeQuotient { .. } => {
                let r = subgroup_rank(&spec.loop_images(&graph).expect("free spec"));
                if r == graph.rank() {
                    (FactorKind::Tree, CoverSpec::Trivial)
                } else {
                    return Err(Error::Domain(
                        "series not computable: free quotient with nontrivial kernel".into(),
                    ));
                }
            }
        };
        let entropy = entropy_relative(&graph, &spec)?.value;
        let mut f = FactorModel {
            graph,
            spec,
            kind,
            entropy,
            radius,
            spectrum: Vec::new(),
            finite_dist: HashMap::new(),
        };
        match kind {
            FactorKind::Finite => f.enumerate_finite(budget)?,
            FactorKind::Tree => f.enumerate_tree(budget)?,
        }
        Ok(f)
    }

    /// Z/n acting on a circle of length n (unit steps).
    pub fn cyclic(n: usize) -> Self {
        let g = MetricGraph::circle(1.0);
        let rot = crate::group::Perm::from_images((0..n).map(|i| (i + 1) % n).collect());
        let spec = CoverSpec::finite(&g, n, &[("e0", rot)]).expect("cyclic spec");
        Self::new(g, spec).expect("cyclic factor")
    }

    fn enumerate_finite(&mut self, budget: usize) -> Result<()> {
        let p = self.graph.basepoint();
        let mut dist = HashMap::new();
        explore_cover(&self.graph, &self.spec, p, f64::INFINITY, budget, |v, g, d| {
            if v == p {
                dist.insert(g.clone(), to_units(d));
            }
            true
        })?;
        let mut hist: BTreeMap<i64, f64> = BTreeMap::new();
        for (g, &d) in &dist {
            if !g.is_identity() {
                *hist.entry(d).or_default() += 1.0;
            }
        }
        self.spectrum = hist.into_iter().collect();
        self.radius = self.spectrum.last().map_or(0.0, |s| from_units(s.0)).max(self.radius);
        self.finite_dist = dist;
        Ok(())
    }

    fn enumerate_tree(&mut self, budget: usize) -> Result<()> {
        let g = &self.graph;
        let p = g.basepoint();
        let nd = 2 * g.edge_count();
        let cap = to_units(self.radius);
        let lens: Vec<i64> = (0..nd).map(|d| to_units(g.dlen(d))).collect();
        let mut frontier: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for d in 0..nd {
            if g.tail(d) == p && lens[d] <= cap {
                frontier.entry(lens[d]).or_insert_with(|| vec![0.0; nd])[d] += 1.0;
            }
        }
        let mut hist: BTreeMap<i64, f64> = BTreeMap::new();
        let mut work = 0usize;
        while let Some((k, counts)) = frontier.pop_first() {
            work += nd;
            if work > budget {
                return Err(Error::BudgetExceeded(budget));
            }
            let closed: f64 = (0..nd).filter(|&d| g.head(d) == p).map(|d| counts[d]).sum();
            if closed > 0.0 {
                *hist.entry(k).or_default() += closed;
            }
            for d in 0..nd {
                if counts[d] == 0.0 {
                    continue;
                }
                for e in 0..nd {
                    if g.tail(e) == g.head(d) && e != (d ^ 1) && k + lens[e] <= cap {
                        frontier.entry(k + lens[e]).or_insert_with(|| vec![0.0; nd])[e] += counts[d];
                    }
                }
            }
        }
        self.spectrum = hist.into_iter().collect();
        Ok(())
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn spec(&self) -> &CoverSpec {
        &self.spec
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn volume(&self) -> f64 {
        self.graph.total_length()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `(distance, multiplicity)` of non-identity orbit points within the radius.
    pub fn spectrum(&self) -> Vec<(f64, f64)> {
        self.spectrum.iter().map(|&(u, c)| (from_units(u), c)).collect()
    }

    pub fn min_distance(&self) -> Option<f64> {
        self.spectrum.first().map(|s| from_units(s.0))
    }

    /// Number of orbit points (identity included) within distance `t`.
    pub fn ball_count(&self, t: f64) -> Result<f64> {
        if self.kind == FactorKind::Tree && t > self.radius + 1e-12 {
            return Err(Error::Domain(format!("spectrum cap {} exceeded by radius {t}", self.radius)));
        }
        let u = to_units(t);
        Ok(1.0 + self.spectrum.iter().take_while(|s| s.0 <= u).map(|s| s.1).sum::<f64>())
    }

    /// Same factor with all lengths multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::with_radius(self.graph.scaled(lambda), self.spec.clone(), self.radius * lambda, DEFAULT_BUDGET)
    }

    /// Same factor with a larger spectrum radius.
    pub fn extended(&self, radius: f64, budget: usize) -> Result<Self> {
        if radius <= self.radius {
            return Ok(self.clone());
        }
        Self::with_radius(self.graph.clone(), self.spec.clone(), radius, budget)
    }

    /// Poincaré series Σ_{γ≠e} exp(−h ρ(γ)); `None` where it diverges.
    pub fn poincare(&self, h: f64) -> Option<f64> {
        match self.kind {
            FactorKind::Finite => Some(self.spectrum.iter().map(|&(u, c)| c * (-h * from_units(u)).exp()).sum()),
            FactorKind::Tree => self.resolvent_series(h),
        }
    }

    fn resolvent_series(&self, h: f64) -> Option<f64> {
        // sum over reduced closed walks at p of exp(-h length), through (I - B(h))^{-1}
        let g = &self.graph;
        let p = g.basepoint();
        let nd = 2 * g.edge_count();
        let w: Vec<f64> = (0..nd).map(|d| (-h * g.dlen(d)).exp()).collect();
        let mut m = DMatrix::<f64>::identity(nd, nd);
        for a in 0..nd {
            for b in 0..nd {
                if g.head(a) == g.tail(b) && b != (a ^ 1) {
                    m[(a, b)] -= w[b];
                }
            }
        }
        let rhs = DVector::from_fn(nd, |b, _| if g.head(b) == p { 1.0 } else { 0.0 });
        let x = m.lu().solve(&rhs)?;
        if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return None;
        }
        let s: f64 = (0..nd).filter(|&a| g.tail(a) == p).map(|a| w[a] * x[a]).sum();
        (s.is_finite() && s > 0.0).then_some(s)
    }

    /// Whether `x` is an element of this factor's deck group.
    pub fn contains(&self, x: &Voltage) -> bool {
        match (self.kind, x) {
            (FactorKind::Finite, _) => self.finite_dist.contains_key(x),
            (FactorKind::Tree, Voltage::Word(w)) => self.walk_of(w).is_some(),
            _ => false,
        }
    }

    fn walk_of(&self, w: &crate::group::FreeWord) -> Option<Vec<usize>> {
        let g = &self.graph;
        let p = g.basepoint();
        let mut at = p;
        let mut darts = Vec::new();
        for &x in w.letters() {
            let i = x.unsigned_abs() as usize - 1;
            if i >= g.edge_count() {
                return None;
            }
            let d = if x > 0 { 2 * i } else { 2 * i + 1 };
            if g.tail(d) != at {
                return None;
            }
            at = g.head(d);
            darts.push(d);
        }
        (at == p).then_some(darts)
    }

    /// Orbit distance ρ(p, p·x) in units.
    fn distance_units(&self, x: &Voltage) -> Result<i64> {
        match self.kind {
            FactorKind::Finite => {
                self.finite_dist.get(x).copied().ok_or_else(|| Error::Domain("element not in stated factor".into()))
            }
            FactorKind::Tree => {
                let Voltage::Word(w) = x else {
                    return Err(Error::Domain("element not in stated factor".into()));
                };
                let walk = self.walk_of(w).ok_or_else(|| Error::Domain("element not in stated factor".into()))?;
                let d: i64 = walk.iter().map(|&d| to_units(self.graph.dlen(d))).sum();
                if from_units(d) > self.radius + 1e-12 {
                    return Err(Error::Domain("spectrum cap exceeded".into()));
                }
                Ok(d)
            }
        }
    }

    /// Voltage of the basepoint loop through a single edge (for finite factors and loop edges).
    pub fn edge_element(&self, edge: usize) -> Voltage {
        directed_voltages(&self.graph, &self.spec)[2 * edge].clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    /// 1 or 2
    pub factor: usize,
    pub element: Voltage,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NormalForm {
    letters: Vec<Letter>,
}

impl NormalForm {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct DumbbellModel {
    pub f1: FactorModel,
    pub f2: FactorModel,
    /// half the bridge length
    pub d: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
}

impl DumbbellModel {
    /// Factors used as given (no rescaling).
    pub fn new(f1: FactorModel, f2: FactorModel, d: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::Domain("bridge half-length must be positive".into()));
        }
        let alpha = f1.entropy.max(f2.entropy);
        Ok(DumbbellModel { f1, f2, d, lambda1: 1.0, lambda2: 1.0, alpha })
    }

    /// Factors rescaled so both have entropy α and total length one.
    pub fn balanced(f1: &FactorModel, f2: &FactorModel, d: f64) -> Result<Self> {
        let (l1, l2, alpha) = balance_scalings(f1, f2)?;
        let mut m = Self::new(f1.scaled(l1)?, f2.scaled(l2)?, d)?;
        m.lambda1 = l1;
        m.lambda2 = l2;
        m.alpha = alpha;
        Ok(m)
    }

    pub fn with_d(&self, d: f64) -> Result<Self> {
        let mut m = self.clone();
        if !(d > 0.0) {
            return Err(Error::Domain("bridge half-length must be positive".into()));
        }
        m.d = d;
        Ok(m)
    }

    pub fn swapped(&self) -> Self {
        DumbbellModel {
            f1: self.f2.clone(),
            f2: self.f1.clone(),
            d: self.d,
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            alpha: self.alpha,
        }
    }

    fn factor(&self, tag: usize) -> Result<&FactorModel> {
        match tag {
            1 => Ok(&self.f1),
            2 => Ok(&self.f2),
            _ => Err(Error::Domain(format!("factor tag {tag} is not 1 or 2"))),
        }
    }

    /// Both factors with spectra reaching at least `radius`.
    pub fn extended(&self, radius: f64, budget: usize) -> Result<Self> {
        let mut m = self.clone();
        m.f1 = self.f1.extended(radius, budget)?;
        m.f2 = self.f2.extended(radius, budget)?;
        Ok(m)
    }

    /// Upper bound on the distance from any point of the dumbbell to the nearest orbit point.
    pub fn covering_radius(&self) -> f64 {
        self.f1.graph.covering_radius().max(self.f2.graph.covering_radius()) + self.d
    }
}

/// Multiply adjacent letters of the same factor and drop identities.
pub fn normal_form(letters: &[(usize, Voltage)], model: &DumbbellModel) -> Result<NormalForm> {
    for (tag, x) in letters {
        if !model.factor(*tag)?.contains(x) {
            return Err(Error::Domain(format!("element not in stated factor {tag}")));
        }
    }
    Ok(reduce_letters(letters))
}

fn reduce_letters(letters: &[(usize, Voltage)]) -> NormalForm {
    let mut stack: Vec<Letter> = Vec::new();
    for (tag, x) in letters {
        if x.is_identity() {
            continue;
        }
        match stack.last() {
            Some(top) if top.factor == *tag => {
                let merged = top.element.mul(x);
                stack.pop();
                if !merged.is_identity() {
                    stack.push(Letter { factor: *tag, element: merged });
                }
            }
            _ => stack.push(Letter { factor: *tag, element: x.clone() }),
        }
    }
    NormalForm { letters: stack }
}

/// Orbit of the bridge midpoint found by Dijkstra in the assembled dumbbell cover,
/// with each element's distance; independent of the normal-form distance formula.
pub fn cover_orbit_distances(model: &DumbbellModel, radius: f64, budget: usize) -> Result<Vec<(NormalForm, f64)>> {
    // vertices: factor 1, factor 2, then the midpoint q
    let (g1, g2) = (&model.f1.graph, &model.f2.graph);
    let n1 = g1.vertex_count();
    let q = n1 + g2.vertex_count();
    // (from, to, length, voltage letter)
    let mut arcs: Vec<Vec<(usize, f64, Option<(usize, Voltage)>)>> = vec![Vec::new(); q + 1];
    for (tag, f, off) in [(1usize, &model.f1, 0usize), (2, &model.f2, n1)] {
        let volt = directed_voltages(&f.graph, &f.spec);
        for d in 0..2 * f.graph.edge_count() {
            let x = volt[d].clone();
            arcs[off + f.graph.tail(d)].push((off + f.graph.head(d), f.graph.dlen(d), Some((tag, x))));
        }
        let p = off + f.graph.basepoint();
        arcs[q].push((p, model.d, None));
        arcs[p].push((q, model.d, None));
    }
    let mut ids: HashMap<(usize, NormalForm), usize> = HashMap::new();
    let mut nodes: Vec<(usize, NormalForm)> = vec![(q, NormalForm::default())];
    let mut dist = vec![0.0];
    ids.insert(nodes[0].clone(), 0);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((OrdF64(0.0), 0usize)));
    let mut done = vec![false];
    let mut out = Vec::new();
    while let Some(std::cmp::Reverse((OrdF64(d), id))) = heap.pop() {
        if done[id] {
            continue;
        }
        done[id] = true;
        let (v, gamma) = nodes[id].clone();
        if v == q {
            out.push((gamma.clone(), d));
        }
        for (w, len, letter) in &arcs[v] {
            let nd = d + len;
            if nd > radius + 1e-9 {
                continue;
            }
            let ng = match letter {
                None => gamma.clone(),
                Some((tag, x)) => {
                    let mut ls: Vec<(usize, Voltage)> =
                        gamma.letters.iter().map(|l| (l.factor, l.element.clone())).collect();
                    ls.push((*tag, x.clone()));
                    reduce_letters(&ls)
                }
            };
            let key = (*w, ng);
            let nid = match ids.get(&key) {
                Some(&x) => x,
                None => {
                    if nodes.len() >= budget {
                        return Err(Error::BudgetExceeded(budget));
                    }
                    ids.insert(key.clone(), nodes.len());
                    nodes.push(key);
                    dist.push(f64::INFINITY);
                    done.push(false);
                    nodes.len() - 1
                }
            };
            if nd < dist[nid] {
                dist[nid] = nd;
                heap.push(std::cmp::Reverse((OrdF64(nd), nid)));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Distance from the bridge midpoint to its translate: 2dl + Σρ.
pub fn orbit_distance(nf: &NormalForm, model: &DumbbellModel) -> Result<f64> {
    let mut rho = 0i64;
    for l in &nf.letters {
        rho += model.factor(l.factor)?.distance_units(&l.element)?;
    }
    Ok(2.0 * model.d * nf.len() as f64 + from_units(rho))
}

/// Histogram convolution truncated at `limit` units.
fn convolve(a: &BTreeMap<i64, f64>, b: &[(i64, f64)], limit: i64, work: &mut usize, budget: usize) -> Result<BTreeMap<i64, f64>> {
    let mut out = BTreeMap::new();
    for (&x, &cx) in a {
        for &(y, cy) in b {
            if x + y > limit {
                break;
            }
            *work += 1;
            if *work > budget {
                return Err(Error::BudgetExceeded(budget));
            }
            *out.entry(x + y).or_default() += cx * cy;
        }
    }
    Ok(out)
}

/// Distance histogram of all normal forms within distance `t`; when `only_from_first`
/// is set, only forms that start in factor 1 are kept and the result is split by length.
fn form_histograms(
    model: &DumbbellModel,
    t: f64,
    only_from_first: bool,
    budget: usize,
) -> Result<Vec<[BTreeMap<i64, f64>; 2]>> {
    let need = t - 2.0 * model.d;
    for f in [&model.f1, &model.f2] {
        if f.kind == FactorKind::Tree && need > f.radius + 1e-12 {
            return Err(Error::Domain(format!("spectrum cap {} exceeded (need {need})", f.radius)));
        }
    }
    let spectra = [&model.f1.spectrum, &model.f2.spectrum];
    let two_d = to_units(2.0 * model.d);
    let tu = to_units(t);
    let mut layers = Vec::new();
    let mut work = 0usize;
    let mut cur: [BTreeMap<i64, f64>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for i in 0..2 {
        if only_from_first && i == 1 {
            continue;
        }
        for &(u, c) in spectra[i].iter() {
            if u + two_d <= tu {
                *cur[i].entry(u).or_default() += c;
            }
        }
    }
    let mut l = 1i64;
    while !(cur[0].is_empty() && cur[1].is_empty()) {
        let next_limit = tu - two_d * (l + 1);
        let next = [
            convolve(&cur[1], spectra[0], next_limit, &mut work, budget)?,
            convolve(&cur[0], spectra[1], next_limit, &mut work, budget)?,
        ];
        layers.push(cur);
        cur = next;
        l += 1;
    }
    // shift each layer by its bridge crossings
    Ok(layers
        .into_iter()
        .enumerate()
        .map(|(k, layer)| {
            let shift = two_d * (k as i64 + 1);
            layer.map(|h| h.into_iter().map(|(u, c)| (u + shift, c)).collect())
        })
        .collect())
}

/// v(t; d): orbit points of the bridge midpoint within distance `t`, identity included.
pub fn exact_ball_count(model: &DumbbellModel, t: f64) -> Result<f64> {
    exact_ball_count_with_budget(model, t, DEFAULT_BUDGET)
}

pub fn exact_ball_count_with_budget(model: &DumbbellModel, t: f64, budget: usize) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain("negative radius".into()));
    }
    let layers = form_histograms(model, t, false, budget)?;
    Ok(1.0 + layers.iter().flat_map(|l| l.iter()).flat_map(|h| h.values()).sum::<f64>())
}

/// Orbit counting function v(·; d) sampled on `[t_max/2, t_max]`, with its growth bracket.
pub fn ball_count_slope(model: &DumbbellModel, t_max: f64, budget: usize) -> Result<EntropyEstimate> {
    let layers = form_histograms(model, t_max, false, budget)?;
    let mut all: BTreeMap<i64, f64> = BTreeMap::new();
    for layer in &layers {
        for h in layer {
            for (&u, &c) in h {
                *all.entry(u).or_default() += c;
            }
        }
    }
    let mut cum = Vec::with_capacity(all.len());
    let mut acc = 1.0;
    for (&u, &c) in &all {
        acc += c;
        cum.push((u, acc));
    }
    let count_at = |t: f64| {
        let u = to_units(t);
        let i = cum.partition_point(|&(x, _)| x <= u);
        if i == 0 { 1.0 } else { cum[i - 1].1 }
    };
    let samples: Vec<(f64, f64)> =
        (0..=100).map(|j| t_max * (0.5 + 0.5 * j as f64 / 100.0)).map(|t| (t, count_at(t).ln())).collect();
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let slope = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum::<f64>()
        / samples.iter().map(|s| (s.0 - mx).powi(2)).sum::<f64>();

    let reach = model.covering_radius();
    let upper = if t_max > 2.0 * reach { count_at(t_max).ln() / (t_max - 2.0 * reach) } else { f64::INFINITY };
    // forms starting in factor 1 and ending in factor 2 concatenate freely
    let first = form_histograms(model, t_max, true, budget)?;
    let mut lower: f64 = 0.0;
    for (k, layer) in first.iter().enumerate() {
        if k % 2 == 1 {
            let nk: f64 = layer[1].values().sum();
            if nk > 0.0 {
                lower = lower.max(nk.ln() / t_max);
            }
        }
    }
    Ok(EntropyEstimate {
        value: slope.clamp(lower, upper),
        method: Method::OrbitCount,
        horizon: Some(t_max),
        tolerance: None,
        lower,
        upper,
    })
}

/// Smallest integer t0 such that both factor counts stay below e^{α1 s} for integers s in (t0, t_max].
pub fn choose_t0(model: &DumbbellModel, alpha1: f64, t_max: f64) -> Result<f64> {
    let top = t_max.floor() as i64;
    let mut t0 = 0i64;
    for s in 1..=top {
        for f in [&model.f1, &model.f2] {
            if f.ball_count(s as f64)? > (alpha1 * s as f64).exp() {
                t0 = s;
            }
        }
    }
    Ok(t0 as f64)
}

/// Natural log of the counting bound Σ_l C^l e^{α1 X_l} X_l^l / l!, X_l = t − (2d−1)l.
pub fn analytic_ball_log_bound(model: &DumbbellModel, t: f64, alpha1: f64, c: f64, t0: f64) -> Result<f64> {
    let d = model.d;
    if d <= 0.5 {
        return Err(Error::Domain(format!("bound requires d > 1/2 (got {d})")));
    }
    if alpha1 <= model.alpha {
        return Err(Error::Domain(format!("alpha1 = {alpha1} must exceed alpha = {}", model.alpha)));
    }
    let need = model.f1.ball_count(t0)?.max(model.f2.ball_count(t0)?);
    if c < need {
        return Err(Error::Domain(format!("C = {c} is below the factor ball count {need} at t0 = {t0}")));
    }
    let mut s = t0.floor() as i64 + 1;
    while (s as f64) <= t {
        for f in [&model.f1, &model.f2] {
            if f.ball_count(s as f64)? > (alpha1 * s as f64).exp() {
                return Err(Error::Domain(format!("factor growth exceeds e^(alpha1 t) at t = {s} > t0")));
            }
        }
        s += 1;
    }
    let mut terms = vec![alpha1 * t];
    let mut l = 1usize;
    loop {
        let x = t - (2.0 * d - 1.0) * l as f64;
        if x <= 0.0 {
            break;
        }
        let lf: f64 = (1..=l).map(|k| (k as f64).ln()).sum();
        terms.push(l as f64 * c.ln() + alpha1 * x + l as f64 * x.ln() - lf);
        l += 1;
    }
    let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(mx + terms.iter().map(|v| (v - mx).exp()).sum::<f64>().ln())
}

pub fn analytic_ball_bound(model: &DumbbellModel, t: f64, alpha1: f64, c: f64, t0: f64) -> Result<f64> {
    Ok(analytic_ball_log_bound(model, t, alpha1, c, t0)?.exp())
}

/// Scalings λ_i = e_i / (e₁v₁ + e₂v₂) giving both factors entropy α and total length one.
pub fn balance_scalings(f1: &FactorModel, f2: &FactorModel) -> Result<(f64, f64, f64)> {
    let (e1, e2) = (f1.entropy, f2.entropy);
    if e1 <= 0.0 || e2 <= 0.0 {
        return Err(Error::Domain("zero factor entropy".into()));
    }
    let (v1, v2) = (f1.volume(), f2.volume());
    let alpha = e1 * v1 + e2 * v2;
    let (l1, l2) = (e1 / alpha, e2 / alpha);
    for (f, l) in [(f1, l1), (f2, l2)] {
        let h = entropy_relative(&f.graph.scaled(l), &f.spec)?.value;
        if (h - alpha).abs() > 1e-9 * alpha.max(1.0) {
            return Err(Error::Invariant(format!("rescaled factor entropy {h} differs from alpha {alpha}")));
        }
    }
    if (l1 * v1 + l2 * v2 - 1.0).abs() > 1e-9 {
        return Err(Error::Invariant("rescaled volumes do not sum to one".into()));
    }
    Ok((l1, l2, alpha))
}

/// The root h of F₁(h)·F₂(h)·e^{−4hd} = 1.
pub fn dumbbell_entropy_exact(model: &DumbbellModel) -> Result<f64> {
    let d = model.d;
    let g = |h: f64| -> Option<f64> {
        let a = model.f1.poincare(h)?;
        let b = model.f2.poincare(h)?;
        Some(a.ln() + b.ln() - 4.0 * h * d)
    };
    let floor = model.f1.entropy.max(model.f2.entropy);
    if model.f1.spectrum.is_empty() || model.f2.spectrum.is_empty() {
        // a trivial factor: the product is the other factor
        return Ok(floor);
    }
    let mut lo = floor;
    if floor == 0.0 {
        match g(0.0) {
            Some(v) if v <= 0.0 => return Ok(0.0),
            Some(_) => {}
            None => {}
        }
    }
    let mut hi = floor + 1.0;
    let mut guard = 0;
    while g(hi).is_none_or(|v| v >= 0.0) {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Domain("series not computable: no sign change".into()));
        }
    }
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        match g(mid) {
            Some(v) if v < 0.0 => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdditivityRow {
    pub d: f64,
    pub h_d: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub balanced: bool,
    pub rows: Vec<AdditivityRow>,
    /// α ≤ h(d) for every row
    pub lower_ok: bool,
    /// h(d) non-increasing in d
    pub monotone: bool,
}

/// Root scan over bridge lengths; factors are balanced when both have positive entropy.
pub fn additivity_report(f1: &FactorModel, f2: &FactorModel, d_list: &[f64]) -> Result<AdditivityReport> {
    let base = match DumbbellModel::balanced(f1, f2, 1.0) {
        Ok(m) => m,
        Err(Error::Domain(msg)) if msg.contains("zero factor entropy") => DumbbellModel::new(f1.clone(), f2.clone(), 1.0)?,
        Err(e) => return Err(e),
    };
    let balanced = base.lambda1 != 1.0 || base.lambda2 != 1.0 || (f1.entropy > 0.0 && f2.entropy > 0.0);
    let mut ds = d_list.to_vec();
    ds.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &d in &ds {
        let h = dumbbell_entropy_exact(&base.with_d(d)?)?;
        rows.push(AdditivityRow { d, h_d: h, gap: h - base.alpha });
    }
    let tol = 1e-9;
    let lower_ok = rows.iter().all(|r| r.gap >= -tol);
    let monotone = rows.windows(2).all(|w| w[1].h_d <= w[0].h_d + tol);
    Ok(AdditivityReport { alpha: base.alpha, lambda1: base.lambda1, lambda2: base.lambda2, balanced, rows, lower_ok, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Perm;
    use proptest::prelude::*;

    fn z3z3(d: f64) -> DumbbellModel {
        DumbbellModel::new(FactorModel::cyclic(3), FactorModel::cyclic(3), d).unwrap()
    }

    fn rot(n: usize, k: usize) -> Voltage {
        Voltage::Perm(Perm::from_images((0..n).map(|i| (i + k) % n).collect()))
    }

    #[test]
    fn cyclic_spectrum() {
        let f = FactorModel::cyclic(3);
        assert_eq!(f.spectrum(), vec![(1.0, 2.0)]);
        assert!((f.poincare(0.3).unwrap() - 2.0 * (-0.3f64).exp()).abs() < 1e-15);
        assert_eq!(FactorModel::cyclic(4).spectrum(), vec![(1.0, 2.0), (2.0, 1.0)]);
    }

    #[test]
    fn normal_form_examples() {
        let m = z3z3(1.0);
        let a = rot(3, 1);
        let a_inv = rot(3, 2);
        assert!(normal_form(&[(1, a.clone()), (1, a_inv)], &m).unwrap().is_empty());
        let nf = normal_form(&[(1, a.clone()), (2, a.clone()), (2, a.clone())], &m).unwrap();
        assert_eq!(nf.len(), 2);
        assert_eq!(nf.letters()[1].element, rot(3, 2));
        assert!(normal_form(&[(1, rot(4, 1))], &m).is_err());
        assert!(normal_form(&[(3, a)], &m).is_err());
    }

    #[test]
    fn orbit_distance_examples() {
        let m = z3z3(1.0);
        let empty = normal_form(&[], &m).unwrap();
        assert_eq!(orbit_distance(&empty, &m).unwrap(), 0.0);
        let one = normal_form(&[(1, rot(3, 1))], &m).unwrap();
        assert_eq!(orbit_distance(&one, &m).unwrap(), 3.0);
        let two = normal_form(&[(1, rot(3, 1)), (2, rot(3, 2))], &m).unwrap();
        assert_eq!(orbit_distance(&two, &m).unwrap(), 6.0);
    }

    #[test]
    fn ball_counts_small() {
        let m = z3z3(1.0);
        assert_eq!(exact_ball_count(&m, 3.0).unwrap(), 5.0);
        assert_eq!(exact_ball_count(&m, 2.9).unwrap(), 1.0);
        assert_eq!(exact_ball_count(&m, 6.0).unwrap(), 13.0);
    }

    #[test]
    fn z3z3_closed_form() {
        for d in [1.0, 2.0, 4.0, 8.0] {
            let h = dumbbell_entropy_exact(&z3z3(d)).unwrap();
            assert!((h - 2f64.ln() / (1.0 + 2.0 * d)).abs() < 1e-9);
        }
        assert!((dumbbell_entropy_exact(&z3z3(1.0)).unwrap() - 4f64.ln() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn distance_formula_matches_cover_dijkstra() {
        let f8 = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial).unwrap();
        let models = [
            (z3z3(1.0), 18.0),
            (DumbbellModel::new(FactorModel::cyclic(4), FactorModel::cyclic(2), 1.0).unwrap(), 24.0),
            (DumbbellModel::new(FactorModel::cyclic(3), f8, 0.75).unwrap(), 9.0),
        ];
        for (m, r) in models {
            let found = cover_orbit_distances(&m, r, 1_000_000).unwrap();
            assert_eq!(found.len() as f64, exact_ball_count(&m, r).unwrap());
            for (nf, d) in &found {
                assert!((orbit_distance(nf, &m).unwrap() - d).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn z2z2_is_flat() {
        let m = DumbbellModel::new(FactorModel::cyclic(2), FactorModel::cyclic(2), 3.0).unwrap();
        assert_eq!(dumbbell_entropy_exact(&m).unwrap(), 0.0);
    }

    #[test]
    fn z3z3_slope_bracket() {
        for d in [1.0, 2.0] {
            let m = z3z3(d);
            let e = ball_count_slope(&m, 60.0 * (1.0 + 2.0 * d), DEFAULT_BUDGET).unwrap();
            let h = dumbbell_entropy_exact(&m).unwrap();
            assert!(e.lower - 1e-9 <= h && h <= e.upper + 1e-9, "{e:?} vs {h}");
        }
    }

    #[test]
    fn tree_factor_series_matches_closed_form() {
        // figure-8: Σ_{γ≠e} x^{|γ|} = 4x/(1-3x) with x = e^{-h}
        let f = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial).unwrap();
        for h in [1.2, 1.5, 2.0] {
            let x = (-h as f64).exp();
            assert!((f.poincare(h).unwrap() - 4.0 * x / (1.0 - 3.0 * x)).abs() < 1e-10);
        }
        assert!(f.poincare(1.0).is_none());
        // enumerated spectrum: 4·3^{k-1} elements at distance k
        let s = f.spectrum();
        assert_eq!(s[0], (1.0, 4.0));
        assert_eq!(s[2], (3.0, 36.0));
    }

    #[test]
    fn balancing_figure_eights() {
        let f8 = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial).unwrap();
        let (l1, l2, a) = balance_scalings(&f8, &f8).unwrap();
        assert!((l1 - 0.25).abs() < 1e-12 && (l2 - 0.25).abs() < 1e-12);
        assert!((a - 4.0 * 3f64.ln()).abs() < 1e-9);
        let w3 = FactorModel::new(MetricGraph::bouquet(&[1.0; 3]), CoverSpec::Trivial).unwrap();
        let (_, _, a) = balance_scalings(&f8, &w3).unwrap();
        assert!((a - (2.0 * 3f64.ln() + 3.0 * 5f64.ln())).abs() < 1e-9);
        let c = FactorModel::new(MetricGraph::circle(1.0), CoverSpec::Trivial).unwrap();
        assert!(balance_scalings(&f8, &c).is_err());
    }

    #[test]
    fn circle_factors_degenerate() {
        let c = FactorModel::new(MetricGraph::circle(1.0), CoverSpec::Trivial).unwrap();
        let r = additivity_report(&c, &c, &[1.0, 4.0, 16.0, 64.0]).unwrap();
        assert_eq!(r.alpha, 0.0);
        assert!(r.monotone && r.lower_ok);
        assert!(r.rows.last().unwrap().h_d < 0.1);
    }

    #[test]
    fn non_injective_free_factor_is_rejected() {
        let g = MetricGraph::figure_eight();
        let spec = CoverSpec::free(&g, 1, &[("a", crate::group::FreeWord::generator(1))]).unwrap();
        let err = FactorModel::new(g, spec).unwrap_err();
        assert!(err.to_string().contains("series not computable"));
    }

    #[test]
    fn analytic_bound_checks() {
        let m = z3z3(1.0);
        assert!(analytic_ball_bound(&m.with_d(0.5).unwrap(), 5.0, 0.1, 3.0, 0.0).is_err());
        // finite factors have α = 0; any α1 > 0 works once C covers the whole factor
        let t0 = choose_t0(&m, 0.05, 20.0).unwrap();
        let c = 3.0;
        assert!(analytic_ball_bound(&m, 0.0, 0.05, c, t0).unwrap() >= 1.0);
        for t in [5.0, 10.0, 20.0] {
            let v = exact_ball_count(&m, t).unwrap();
            let b = analytic_ball_bound(&m, t, 0.05, c, t0).unwrap();
            assert!(v <= b, "t={t}: {v} > {b}");
        }
        assert!(analytic_ball_bound(&m, 5.0, 0.05, 2.0, t0).is_err());
    }

    #[test]
    fn swapping_factors_is_harmless() {
        let f8 = FactorModel::new(MetricGraph::figure_eight(), CoverSpec::Trivial).unwrap();
        let m = DumbbellModel::new(FactorModel::cyclic(3), f8, 1.0).unwrap();
        let s = m.swapped();
        assert!((dumbbell_entropy_exact(&m).unwrap() - dumbbell_entropy_exact(&s).unwrap()).abs() < 1e-12);
        for t in [3.0, 5.0, 8.0] {
            assert_eq!(exact_ball_count(&m, t).unwrap(), exact_ball_count(&s, t).unwrap());
        }
    }

    /// Independent reducer for Z_p ∗ Z_q on exponent pairs.
    fn oracle_reduce(word: &[(usize, usize)], orders: [usize; 2]) -> Vec<(usize, usize)> {
        let mut w: Vec<(usize, usize)> = word.to_vec();
        loop {
            let before = w.len();
            w.retain(|&(f, k)| k % orders[f - 1] != 0);
            let mut out: Vec<(usize, usize)> = Vec::new();
            for (f, k) in w {
                if let Some(last) = out.last_mut() {
                    if last.0 == f {
                        last.1 = (last.1 + k) % orders[f - 1];
                        continue;
                    }
                }
                out.push((f, k));
            }
            w = out;
            if w.len() == before && w.iter().all(|&(f, k)| k % orders[f - 1] != 0) {
                return w;
            }
        }
    }

    proptest! {
        #[test]
        fn normal_forms_match_oracle(word in proptest::collection::vec((1usize..=2, 0usize..4), 0..20), which in 0usize..2) {
            let orders = if which == 0 { [3, 3] } else { [4, 2] };
            let m = DumbbellModel::new(FactorModel::cyclic(orders[0]), FactorModel::cyclic(orders[1]), 1.0).unwrap();
            let word: Vec<(usize, usize)> = word.into_iter().map(|(f, k)| (f, k % orders[f - 1])).collect();
            let letters: Vec<(usize, Voltage)> = word.iter().map(|&(f, k)| (f, rot(orders[f - 1], k))).collect();
            let nf = normal_form(&letters, &m).unwrap();
            let want = oracle_reduce(&word, orders);
            prop_assert_eq!(nf.len(), want.len());
            for (l, &(f, k)) in nf.letters().iter().zip(&want) {
                prop_assert_eq!(l.factor, f);
                prop_assert_eq!(&l.element, &rot(orders[f - 1], k));
            }
        }
    }
}
