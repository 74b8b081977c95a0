//! Volume entropy of metric graphs.
//!
//! Two independent routes: the root of the spectral radius of the weighted
//! non-backtracking operator, and direct counting of orbit points in a cover.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{explore_cover, subgroup_rank, CoverSpec, MetricGraph};

pub const PERRON_TOL: f64 = 1e-10;
pub const DEFAULT_BUDGET: usize = 10_000_000;
const GRID_STEPS_PER_MIN_EDGE: f64 = 1000.0;
const SCAN_ROWS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Perron,
    OrbitCount,
    /// The cover is finite, so balls are bounded and the entropy is exactly zero.
    FiniteCover,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Perron => "perron",
            Method::OrbitCount => "orbit-count",
            Method::FiniteCover => "finite-cover",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: Method,
    /// Counting horizon, for orbit counts.
    pub horizon: Option<f64>,
    /// Root tolerance, for the spectral method.
    pub tolerance: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl EntropyEstimate {
    pub fn exact_zero(method: Method) -> Self {
        EntropyEstimate { value: 0.0, method, horizon: None, tolerance: None, lower: 0.0, upper: 0.0 }
    }

    pub fn contains(&self, h: f64) -> bool {
        self.lower <= h && h <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Same estimate for the graph with every length multiplied by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        EntropyEstimate {
            value: self.value / lambda,
            lower: self.lower / lambda,
            upper: self.upper / lambda,
            horizon: self.horizon.map(|t| t * lambda),
            ..self.clone()
        }
    }
}

/// Non-backtracking transitions restricted to a set of edges.
struct NbOperator {
    /// directed edge ids (into the graph's numbering)
    darts: Vec<usize>,
    lens: Vec<f64>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl NbOperator {
    fn new(g: &MetricGraph, edges: &[usize]) -> Self {
        let darts: Vec<usize> = edges.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let lens = darts.iter().map(|&d| g.dlen(d)).collect();
        let mut succ = vec![Vec::new(); darts.len()];
        let mut pred = vec![Vec::new(); darts.len()];
        for (a, &da) in darts.iter().enumerate() {
            for (b, &db) in darts.iter().enumerate() {
                if g.head(da) == g.tail(db) && db != (da ^ 1) {
                    succ[a].push(b);
                    pred[b].push(a);
                }
            }
        }
        NbOperator { darts, lens, succ, pred }
    }

    /// Collatz–Wielandt bounds on the spectral radius of B(h), refining `x` in place.
    fn radius_bounds(&self, h: f64, x: &mut [f64]) -> (f64, f64) {
        let w: Vec<f64> = self.lens.iter().map(|l| (-h * l).exp()).collect();
        let n = x.len();
        let mut y = vec![0.0; n];
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        for it in 0..200_000 {
            // y = (I + B) x
            for a in 0..n {
                y[a] = x[a] + self.succ[a].iter().map(|&b| w[b] * x[b]).sum::<f64>();
            }
            lo = f64::INFINITY;
            hi = 0.0;
            for a in 0..n {
                let r = y[a] / x[a];
                lo = f64::min(lo, r);
                hi = f64::max(hi, r);
            }
            let norm = y.iter().cloned().fold(0.0, f64::max);
            for a in 0..n {
                x[a] = y[a] / norm;
            }
            if hi - lo <= 1e-14 * hi && it > 2 {
                break;
            }
        }
        (lo - 1.0, hi - 1.0)
    }
}

/// Entropy as the root of ρ(B(h)) = 1.
pub fn entropy_perron(g: &MetricGraph) -> Result<EntropyEstimate> {
    if g.rank() <= 1 {
        return Ok(EntropyEstimate { tolerance: Some(PERRON_TOL), ..EntropyEstimate::exact_zero(Method::Perron) });
    }
    let core = g.core_edges();
    let op = NbOperator::new(g, &core);
    let max_out = op.succ.iter().map(Vec::len).max().unwrap_or(1).max(2) as f64;
    let lmin = op.lens.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lo = 0.0;
    let mut hi = max_out.ln() / lmin + 1.0;
    let mut x = vec![1.0; op.darts.len()];
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let (rlo, rhi) = op.radius_bounds(mid, &mut x);
        if rlo > 1.0 {
            lo = mid;
        } else if rhi < 1.0 {
            hi = mid;
        } else {
            // the radius is 1 to within the eigenvalue tolerance
            let slack = 1e-12;
            lo = (mid - slack).max(lo);
            hi = (mid + slack).min(hi);
            break;
        }
    }
    Ok(EntropyEstimate {
        value: 0.5 * (lo + hi),
        method: Method::Perron,
        horizon: None,
        tolerance: Some(PERRON_TOL),
        lower: lo,
        upper: hi,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub t: f64,
    pub count: f64,
    pub log_count: f64,
    pub slope_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct GrowthScan {
    pub estimate: EntropyEstimate,
    pub rows: Vec<GrowthRow>,
}

#[derive(Clone, Copy)]
enum Rounding {
    Down,
    Nearest,
    Up,
}

fn grid_lengths(op: &NbOperator, delta: f64, r: Rounding) -> Vec<usize> {
    op.lens
        .iter()
        .map(|l| {
            let x = l / delta;
            let k = match r {
                Rounding::Down => x.floor(),
                Rounding::Nearest => x.round(),
                Rounding::Up => x.ceil(),
            };
            (k as usize).max(1)
        })
        .collect()
}

/// Counts of non-backtracking walks by exact grid length `0..=n_max`.
///
/// `start(a)` seeds walks whose first dart is `a`; `weight(a)` is what a walk
/// ending in dart `a` contributes to the output. A ring buffer of the last
/// `max_len` layers keeps memory small.
fn walk_counts(
    op: &NbOperator,
    lens: &[usize],
    n_max: usize,
    start: impl Fn(usize) -> bool,
    weight: impl Fn(usize) -> bool,
) -> Result<Vec<f64>> {
    let d = op.darts.len();
    let span = lens.iter().copied().max().unwrap_or(1) + 1;
    let mut ring = vec![0.0f64; span * d];
    let mut out = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let row = n % span;
        for a in 0..d {
            let l = lens[a];
            let mut v = 0.0;
            if n == l && start(a) {
                v += 1.0;
            }
            if n > l {
                let prev = (n - l) % span;
                v += op.pred[a].iter().map(|&b| ring[prev * d + b]).sum::<f64>();
            }
            ring[row * d + a] = v;
            if weight(a) {
                out[n] += v;
            }
        }
        if !out[n].is_finite() {
            return Err(Error::Domain("walk count overflow; reduce the horizon".into()));
        }
    }
    Ok(out)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 { 0.0 } else { sxy / sxx }
}

/// Sample a nondecreasing counting function on a uniform time grid.
fn scan_rows(t_max: f64, count_at: impl Fn(f64) -> f64) -> Vec<GrowthRow> {
    let samples: Vec<(f64, f64)> = (1..=SCAN_ROWS)
        .map(|j| {
            let t = t_max * j as f64 / SCAN_ROWS as f64;
            (t, count_at(t))
        })
        .collect();
    samples
        .iter()
        .enumerate()
        .map(|(j, &(t, c))| {
            let window: Vec<(f64, f64)> =
                samples[..=j].iter().filter(|p| p.0 >= t / 2.0).map(|p| (p.0, p.1.ln())).collect();
            let slope = if window.len() >= 2 { least_squares_slope(&window) } else { c.ln() / t };
            GrowthRow { t, count: c, log_count: c.ln(), slope_estimate: slope }
        })
        .collect()
}

fn tail_slope(rows: &[GrowthRow], t_max: f64) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.t >= t_max / 2.0).map(|r| (r.t, r.log_count)).collect();
    least_squares_slope(&pts)
}

pub fn entropy_orbit_count(g: &MetricGraph, spec: &CoverSpec, t_max: f64) -> Result<EntropyEstimate> {
    Ok(orbit_count_scan(g, spec, t_max, DEFAULT_BUDGET)?.estimate)
}

/// Growth of `#{orbit points within distance t}` in the cover given by `spec`.
pub fn orbit_count_scan(g: &MetricGraph, spec: &CoverSpec, t_max: f64, budget: usize) -> Result<GrowthScan> {
    spec.check_graph(g)?;
    if !(t_max >= 5.0 * g.max_length()) {
        return Err(Error::Domain(format!(
            "horizon {t_max} is shorter than five times the longest edge ({})",
            g.max_length()
        )));
    }
    match spec {
        CoverSpec::Trivial => universal_scan(g, t_max, budget),
        CoverSpec::FiniteQuotient { .. } => finite_scan(g, spec, t_max, budget),
        CoverSpec::FreeQuotient { .. } => {
            let imgs = spec.loop_images(g).expect("free spec");
            let r = subgroup_rank(&imgs);
            if r == g.rank() {
                universal_scan(g, t_max, budget)
            } else if r <= 1 {
                let mut scan = lazy_scan(g, spec, t_max, budget)?;
                scan.estimate = EntropyEstimate { horizon: Some(t_max), ..EntropyEstimate::exact_zero(Method::OrbitCount) };
                Ok(scan)
            } else {
                lazy_scan(g, spec, t_max, budget)
            }
        }
    }
}

fn universal_scan(g: &MetricGraph, t_max: f64, budget: usize) -> Result<GrowthScan> {
    let all: Vec<usize> = (0..g.edge_count()).collect();
    let full = NbOperator::new(g, &all);
    let delta = g.min_length() / GRID_STEPS_PER_MIN_EDGE;
    let n_max = (t_max / delta).floor() as usize;
    let states = (n_max + 1) * full.darts.len();
    if states > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    let p = g.basepoint();
    let near = grid_lengths(&full, delta, Rounding::Nearest);
    let closed = walk_counts(&full, &near, n_max, |a| g.tail(full.darts[a]) == p, |a| g.head(full.darts[a]) == p)?;
    let mut cumulative = Vec::with_capacity(closed.len());
    let mut acc = 1.0;
    for c in &closed {
        acc += c;
        cumulative.push(acc);
    }
    let rows = scan_rows(t_max, |t| cumulative[((t / delta).floor() as usize).min(n_max)]);

    let (lower, upper) = if g.rank() <= 1 {
        (0.0, 0.0)
    } else {
        let core = NbOperator::new(g, &g.core_edges());
        let dc = delta;
        // lower: superadditive loop counts through a fixed dart, lengths rounded up
        let up = grid_lengths(&core, dc, Rounding::Up);
        let mut lower: f64 = 0.0;
        for e0 in 0..core.darts.len().min(4) {
            let closing: Vec<bool> = (0..core.darts.len()).map(|a| core.succ[a].contains(&e0)).collect();
            let loops = walk_counts(&core, &up, n_max, |a| a == e0, |a| closing[a])?;
            for (n, &a_n) in loops.iter().enumerate().skip(1) {
                if a_n > 0.0 {
                    lower = lower.max(a_n.ln() / (n as f64 * dc));
                }
            }
        }
        // upper: submultiplicative counts of all walks, lengths rounded down
        let down = grid_lengths(&core, dc, Rounding::Down);
        let lmax = down.iter().copied().max().unwrap_or(1);
        let walks = walk_counts(&core, &down, n_max, |_| true, |_| true)?;
        let mut cum = Vec::with_capacity(walks.len());
        let mut acc = 1.0;
        for w in &walks {
            acc += w;
            cum.push(acc);
        }
        let mut upper = f64::INFINITY;
        for n in 1..=n_max.saturating_sub(lmax) {
            upper = upper.min(cum[n + lmax].ln() / (n as f64 * dc));
        }
        (lower, upper)
    };
    let value = tail_slope(&rows, t_max).clamp(lower, upper);
    Ok(GrowthScan {
        estimate: EntropyEstimate { value, method: Method::OrbitCount, horizon: Some(t_max), tolerance: None, lower, upper },
        rows,
    })
}

fn orbit_distances(g: &MetricGraph, spec: &CoverSpec, t_max: f64, budget: usize) -> Result<Vec<f64>> {
    let p = g.basepoint();
    let mut dists = Vec::new();
    explore_cover(g, spec, p, t_max, budget, |v, _, d| {
        if v == p {
            dists.push(d);
        }
        true
    })?;
    Ok(dists)
}

fn finite_scan(g: &MetricGraph, spec: &CoverSpec, t_max: f64, budget: usize) -> Result<GrowthScan> {
    let dists = orbit_distances(g, spec, t_max, budget)?;
    let rows = scan_rows(t_max, |t| dists.partition_point(|&d| d <= t) as f64);
    Ok(GrowthScan {
        estimate: EntropyEstimate { horizon: Some(t_max), ..EntropyEstimate::exact_zero(Method::OrbitCount) },
        rows,
    })
}

fn lazy_scan(g: &MetricGraph, spec: &CoverSpec, t_max: f64, budget: usize) -> Result<GrowthScan> {
    let dists = orbit_distances(g, spec, t_max, budget)?;
    let rows = scan_rows(t_max, |t| dists.partition_point(|&d| d <= t) as f64);
    let reach = g.covering_radius();
    let upper = if t_max > 2.0 * reach {
        (dists.len() as f64).ln() / (t_max - 2.0 * reach)
    } else {
        f64::INFINITY
    };
    let value = tail_slope(&rows, t_max).clamp(0.0, upper);
    Ok(GrowthScan {
        estimate: EntropyEstimate { value, method: Method::OrbitCount, horizon: Some(t_max), tolerance: None, lower: 0.0, upper },
        rows,
    })
}

/// Relative entropy for the cover given by `spec`.
pub fn entropy_relative(g: &MetricGraph, spec: &CoverSpec) -> Result<EntropyEstimate> {
    spec.check_graph(g)?;
    match spec {
        CoverSpec::Trivial => entropy_perron(g),
        CoverSpec::FiniteQuotient { .. } => Ok(EntropyEstimate::exact_zero(Method::FiniteCover)),
        CoverSpec::FreeQuotient { .. } => {
            let r = subgroup_rank(&spec.loop_images(g).expect("free spec"));
            if r <= 1 {
                Ok(EntropyEstimate::exact_zero(Method::Perron))
            } else if r == g.rank() {
                entropy_perron(g)
            } else {
                entropy_orbit_count(g, spec, 20.0 * g.max_length())
            }
        }
    }
}

/// Ω = entropy × total length (dimension one).
pub fn omega_value(g: &MetricGraph, spec: &CoverSpec) -> Result<f64> {
    Ok(entropy_relative(g, spec)?.value * g.total_length())
}

/// Coordinate descent on edge lengths for the smallest Ω at fixed total length.
pub fn minimize_omega_lengths(g: &MetricGraph, total_length: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    let e = g.edge_count();
    let mut ls = vec![total_length / e as f64; e];
    let omega = |ls: &[f64]| -> Result<f64> { omega_value(&g.with_lengths(ls)?, &CoverSpec::Trivial) };
    let mut best = omega(&ls)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut step = 0.25;
    let mut order: Vec<usize> = (0..e).collect();
    while step > 1e-4 {
        let mut improved = false;
        order.shuffle(&mut rng);
        for &i in &order {
            for sign in [1.0, -1.0] {
                let mut trial = ls.clone();
                trial[i] *= 1.0 + sign * step;
                let s: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|x| *x *= total_length / s);
                let val = omega(&trial)?;
                if val < best - 1e-13 {
                    best = val;
                    ls = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok((ls, best))
}
