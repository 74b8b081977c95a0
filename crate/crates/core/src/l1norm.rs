//! ℓ¹ norms of homology classes on a fixed Δ-complex.
//!
//! For a cycle c₀ of degree m the value is min ‖c₀ + ∂y‖₁ over (m+1)-chains y,
//! rational or integral. Values on a fixed complex only bound the singular
//! semi-norm from above.

use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::chain::Chain;
use crate::complex::DeltaComplex;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Q};
use crate::lp::{minimize, minimize_integer, LpOutcome};

pub const DEFAULT_TOP_CAP: usize = 64;
const NODE_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ring {
    Integers,
    Rationals,
}

#[derive(Clone, Debug)]
pub struct NormProblem {
    pub complex: DeltaComplex,
    pub cycle: Chain,
    pub ring: Ring,
}

impl NormProblem {
    pub fn new(complex: DeltaComplex, cycle: Chain, ring: Ring) -> Result<Self> {
        let m = cycle.degree();
        if m > complex.dim() {
            return Err(Error::DegreeMismatch { expected: complex.dim(), found: m });
        }
        if let Some(i) = cycle.support().find(|&i| i >= complex.count(m)) {
            return Err(Error::InvalidComplex(format!("cycle references missing {m}-simplex {i}")));
        }
        if m > 0 && !complex.boundary(&cycle)?.is_empty() {
            return Err(Error::Domain("representative is not a cycle".into()));
        }
        if ring == Ring::Integers && cycle.iter().any(|(_, x)| !x.is_integer()) {
            return Err(Error::Domain("integral problem needs an integral cycle".into()));
        }
        Ok(NormProblem { complex, cycle, ring })
    }

    pub fn degree(&self) -> usize {
        self.cycle.degree()
    }

    fn fillers(&self) -> usize {
        let m = self.degree();
        if m < self.complex.dim() { self.complex.count(m + 1) } else { 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofTag {
    /// the class is zero; no certificate
    ZeroClass,
    /// primal and dual objectives agree
    LpDuality,
    /// exhaustive branch-and-bound
    BranchAndBound,
}

#[derive(Clone, Debug)]
pub struct NormResult {
    pub value: Q,
    /// the minimizing representative c₀ + ∂y
    pub chain: Chain,
    pub filling: Chain,
    /// α/value: pairs to 1 with c₀, kills boundaries, sup norm 1/value
    pub certificate: Option<Vec<Q>>,
    pub proof: ProofTag,
}

/// Columns: u (n), v (n), y⁺ (f), y⁻ (f); rows: u − v − ∂y = c₀.
fn split_system(p: &NormProblem) -> (Matrix, Vec<Q>, Vec<Q>) {
    let m = p.degree();
    let n = p.complex.count(m);
    let f = p.fillers();
    let d = if f > 0 { p.complex.boundary_matrix(m + 1) } else { linalg::zeros(n, 0) };
    let cols = 2 * n + 2 * f;
    let mut a = linalg::zeros(n, cols);
    for i in 0..n {
        a[i][i] = Q::one();
        a[i][n + i] = -Q::one();
        for j in 0..f {
            if !d[i][j].is_zero() {
                a[i][2 * n + j] = -d[i][j].clone();
                a[i][2 * n + f + j] = d[i][j].clone();
            }
        }
    }
    let mut c = vec![Q::one(); 2 * n];
    c.extend(std::iter::repeat_n(Q::zero(), 2 * f));
    (a, p.cycle.to_dense(n), c)
}

fn assemble(p: &NormProblem, x: &[Q]) -> Result<(Chain, Chain)> {
    let m = p.degree();
    let n = p.complex.count(m);
    let f = p.fillers();
    let y: Vec<Q> = (0..f).map(|j| &x[2 * n + j] - &x[2 * n + f + j]).collect();
    let filling = Chain::from_dense(m + 1, &y);
    let chain = if f > 0 { p.cycle.add(&p.complex.boundary(&filling)?) } else { p.cycle.clone() };
    Ok((chain, filling))
}

/// Rational optimum with a dual certificate.
pub fn l1_lp(p: &NormProblem) -> Result<NormResult> {
    let (a, b, c) = split_system(p);
    let LpOutcome::Optimal(sol) = minimize(&a, &b, &c)? else {
        return Err(Error::Invariant("ℓ1 program reported infeasible".into()));
    };
    let (chain, filling) = assemble(p, &sol.x)?;
    if chain.l1_norm() != sol.value {
        return Err(Error::Invariant("primal chain disagrees with objective".into()));
    }
    if sol.value.is_zero() {
        return Ok(NormResult { value: sol.value, chain, filling, certificate: None, proof: ProofTag::ZeroClass });
    }
    let cert: Vec<Q> = sol.dual.iter().map(|a| a / &sol.value).collect();
    Ok(NormResult { value: sol.value, chain, filling, certificate: Some(cert), proof: ProofTag::LpDuality })
}

/// Integral optimum by branch-and-bound; at most `DEFAULT_TOP_CAP` top simplices.
pub fn l1_ilp(p: &NormProblem) -> Result<NormResult> {
    l1_ilp_with_cap(p, DEFAULT_TOP_CAP)
}

pub fn l1_ilp_with_cap(p: &NormProblem, cap: usize) -> Result<NormResult> {
    if p.ring != Ring::Integers {
        return Err(Error::Domain("integral solver needs an integral problem".into()));
    }
    if p.complex.top_count() > cap {
        return Err(Error::BudgetExceeded(cap));
    }
    let (a, b, c) = split_system(p);
    let Some((value, x)) = minimize_integer(&a, &b, &c, NODE_CAP)? else {
        return Err(Error::Invariant("integral ℓ1 program reported infeasible".into()));
    };
    let (chain, filling) = assemble(p, &x)?;
    let proof = if value.is_zero() { ProofTag::ZeroClass } else { ProofTag::BranchAndBound };
    Ok(NormResult { value, chain, filling, certificate: None, proof })
}

/// Exact check of a normalized certificate β: β(c₀) = 1, β∘∂ = 0, value·‖β‖∞ = 1.
pub fn dual_certificate_check(r: &NormResult, p: &NormProblem) -> bool {
    let Some(beta) = &r.certificate else {
        return r.value.is_zero() && r.proof == ProofTag::ZeroClass;
    };
    let m = p.degree();
    if beta.len() != p.complex.count(m) || r.value.is_zero() {
        return false;
    }
    if p.cycle.pair(beta) != Q::one() {
        return false;
    }
    for j in 0..p.fillers() {
        let mut s = Chain::zero(m + 1);
        s.add_term(j, Q::one());
        match p.complex.boundary(&s) {
            Ok(bd) if bd.pair(beta).is_zero() => {}
            _ => return false,
        }
    }
    let sup = beta.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero);
    &r.value * sup == Q::one()
}

/// Number of top simplices of a geometric cycle (orientable pseudomanifold components).
pub fn kappa_of_cycle(p: &DeltaComplex) -> Result<usize> {
    let mut total = 0;
    for comp in p.components() {
        if comp.dim() != p.dim() {
            return Err(Error::InvalidComplex("component of lower dimension".into()));
        }
        let rep = comp.check_pseudomanifold();
        if !rep.is_pseudomanifold {
            let conds: Vec<String> = rep.failures.iter().map(|f| format!("{:?}", f.condition)).collect();
            return Err(Error::InvalidComplex(format!("not a geometric cycle: fails {}", conds.join(", "))));
        }
        if !rep.orientable {
            return Err(Error::InvalidComplex("not a geometric cycle: non-orientable component".into()));
        }
        total += comp.top_count();
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableSequence {
    pub samples: Vec<(u64, f64)>,
    /// inf value/n over the samples; the stable limit is at most this
    pub estimate: f64,
    pub argmin: u64,
}

/// Fekete estimate inf f(n)/n after checking subadditivity on the sampled pairs.
pub fn fekete_estimate(samples: &[(u64, f64)]) -> Result<StableSequence> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by_key(|x| x.0);
    if s[0].0 == 0 || s.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Domain("sample indices must be distinct and positive".into()));
    }
    let at = |n: u64| s.binary_search_by_key(&n, |x| x.0).ok().map(|i| s[i].1);
    for &(a, fa) in &s {
        for &(b, fb) in &s {
            if let Some(fab) = at(a + b) {
                if fab > fa + fb + 1e-12 * (fa.abs() + fb.abs()).max(1.0) {
                    return Err(Error::Domain(format!("subadditivity violated: f({}) > f({a}) + f({b})", a + b)));
                }
            }
        }
    }
    let (argmin, estimate) = s
        .iter()
        .map(|&(n, v)| (n, v / n as f64))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    Ok(StableSequence { samples: s, estimate, argmin })
}

/// Rational cycle near a real one, within (m+2)·ε in ℓ¹.
pub fn rationalize_cycle(c: &[f64], degree: usize, x: &DeltaComplex, eps: f64) -> Result<Chain> {
    let n = x.count(degree);
    if c.len() != n {
        return Err(Error::DegreeMismatch { expected: n, found: c.len() });
    }
    if !(eps > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let basis: Vec<Vec<Q>> = if degree == 0 {
        (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
    } else {
        linalg::nullspace(&x.boundary_matrix(degree), n)
    };
    let mut coeffs = Vec::new();
    if !basis.is_empty() {
        let z = nalgebra::DMatrix::from_fn(n, basis.len(), |i, j| linalg::to_f64(&basis[j][i]));
        let rhs = nalgebra::DVector::from_column_slice(c);
        let svd = z.clone().svd(true, true);
        let a = svd.solve(&rhs, 1e-12).map_err(|e| Error::Invariant(e.to_string()))?;
        let weight: f64 = basis.iter().map(|b| b.iter().map(|x| linalg::to_f64(&x.abs())).sum::<f64>()).sum();
        let tol = eps / weight.max(1.0);
        coeffs = a.iter().map(|&v| linalg::simplest_within(v, tol)).collect();
    }
    let mut out = vec![Q::zero(); n];
    for (a, b) in coeffs.iter().zip(&basis) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += a * x;
        }
    }
    let dist: f64 = out.iter().zip(c).map(|(q, v)| (linalg::to_f64(q) - v).abs()).sum();
    let bound = (degree as f64 + 2.0) * eps;
    if dist > bound + 1e-12 {
        return Err(Error::Domain(format!("input not approximately a cycle: ℓ1 distance {dist} > {bound}")));
    }
    Ok(Chain::from_dense(degree, &out))
}

/// Chain file: one `<simplex-name> <rational>` per line, `#` comments.
pub fn parse_chain(text: &str, x: &DeltaComplex) -> Result<Chain> {
    let mut degree = None;
    let mut pairs = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: ln + 1, msg };
        let mut parts = line.split_whitespace();
        let (Some(name), Some(coef), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err("expected `<simplex> <rational>`".into()));
        };
        let (k, i) = x.lookup(name).ok_or_else(|| err(format!("unknown simplex {name:?}")))?;
        if *degree.get_or_insert(k) != k {
            return Err(err("mixed degrees in chain".into()));
        }
        let v = Q::from_str(coef).map_err(|_| err(format!("bad coefficient {coef:?}")))?;
        pairs.push((i, v));
    }
    let degree = degree.ok_or_else(|| Error::Parse { line: 0, msg: "empty chain".into() })?;
    Ok(Chain::from_pairs(degree, pairs))
}

pub fn chain_to_text(c: &Chain, x: &DeltaComplex) -> String {
    c.iter().map(|(i, v)| format!("{} {}\n", x.name(c.degree(), i), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures;
    use crate::linalg::{q, qf};
    use proptest::prelude::*;

    fn top_problem(x: DeltaComplex, ring: Ring) -> NormProblem {
        let z = x.check_pseudomanifold().fundamental_cycle.unwrap();
        NormProblem::new(x, z, ring).unwrap()
    }

    #[test]
    fn surfaces() {
        for (x, want) in [(fixtures::torus(), 2), (fixtures::pillow(), 2), (fixtures::genus_surface(2), 6)] {
            let p = top_problem(x.clone(), Ring::Rationals);
            let r = l1_lp(&p).unwrap();
            assert_eq!(r.value, q(want));
            assert!(dual_certificate_check(&r, &p));
            let pi = top_problem(x, Ring::Integers);
            assert_eq!(l1_ilp(&pi).unwrap().value, q(want));
        }
    }

    #[test]
    fn torus_certificate_is_half() {
        let p = top_problem(fixtures::torus(), Ring::Rationals);
        let r = l1_lp(&p).unwrap();
        let cert = r.certificate.clone().unwrap();
        assert!(cert.iter().all(|x| x.abs() == qf(1, 2)));
        let mut bad = r.clone();
        bad.certificate.as_mut().unwrap()[0] += qf(1, 7);
        assert!(!dual_certificate_check(&bad, &p));
    }

    #[test]
    fn circle_and_scaling() {
        let c = fixtures::circle();
        let p = NormProblem::new(c, Chain::from_ints(1, &[(0, 1)]), Ring::Rationals).unwrap();
        assert_eq!(l1_lp(&p).unwrap().value, q(1));
        let t = fixtures::torus();
        let z = t.check_pseudomanifold().fundamental_cycle.unwrap().scale(&q(3));
        let p = NormProblem::new(t, z, Ring::Integers).unwrap();
        assert_eq!(l1_ilp(&p).unwrap().value, q(6));
    }

    #[test]
    fn boundaries_have_norm_zero() {
        let t = fixtures::torus();
        let y = Chain::from_ints(2, &[(0, 1)]);
        let bd = t.boundary(&y).unwrap();
        let p = NormProblem::new(t, bd, Ring::Rationals).unwrap();
        let r = l1_lp(&p).unwrap();
        assert!(r.value.is_zero());
        assert_eq!(r.proof, ProofTag::ZeroClass);
        assert!(dual_certificate_check(&r, &p));
    }

    #[test]
    fn one_cycles_in_a_surface() {
        // the boundary of a filled triangle is null; torus classes are not
        let tri = fixtures::simplex(2);
        let z = tri.boundary(&Chain::from_ints(2, &[(0, 1)])).unwrap();
        let p = NormProblem::new(tri, z, Ring::Rationals).unwrap();
        assert!(l1_lp(&p).unwrap().value.is_zero());
        let t = fixtures::torus();
        let (_, h1) = t.homology_rank(1);
        for z in h1 {
            let p = NormProblem::new(t.clone(), z, Ring::Rationals).unwrap();
            let r = l1_lp(&p).unwrap();
            assert_eq!(r.value, q(1));
            assert!(dual_certificate_check(&r, &p));
        }
    }

    #[test]
    fn kappa_counts() {
        assert_eq!(kappa_of_cycle(&fixtures::circle()).unwrap(), 1);
        assert_eq!(kappa_of_cycle(&fixtures::torus()).unwrap(), 2);
        assert_eq!(kappa_of_cycle(&fixtures::torus().disjoint_union(&fixtures::pillow())).unwrap(), 4);
        assert!(kappa_of_cycle(&fixtures::projective_plane()).is_err());
        assert!(kappa_of_cycle(&fixtures::simplex(2)).is_err());
    }

    #[test]
    fn fekete() {
        let s: Vec<(u64, f64)> = (1..=16).map(|n| (n, 1.0)).collect();
        let r = fekete_estimate(&s).unwrap();
        assert_eq!(r.estimate, 1.0 / 16.0);
        assert_eq!(fekete_estimate(&[(1, 2.0), (2, 4.0), (3, 6.0)]).unwrap().estimate, 2.0);
        assert!(fekete_estimate(&[(1, 1.0), (2, 3.0)]).is_err());
    }

    #[test]
    fn rationalize() {
        let t = fixtures::torus();
        let r = rationalize_cycle(&[1.0000003, -0.9999997], 2, &t, 1e-6).unwrap();
        assert_eq!(r, Chain::from_ints(2, &[(0, 1), (1, -1)]));
        let exact = rationalize_cycle(&[0.5, -0.5], 2, &t, 1e-9).unwrap();
        assert_eq!(exact, Chain::from_pairs(2, [(0, qf(1, 2)), (1, qf(-1, 2))]));
        assert!(rationalize_cycle(&[1.0, 0.0], 2, &t, 1e-6).is_err());
    }

    #[test]
    fn chain_files() {
        let t = fixtures::torus();
        let z = parse_chain("U 1\nL -1 # lower\n", &t).unwrap();
        assert_eq!(z, Chain::from_ints(2, &[(0, 1), (1, -1)]));
        assert_eq!(parse_chain(&chain_to_text(&z, &t), &t).unwrap(), z);
        assert!(parse_chain("U 1\na 1\n", &t).is_err());
        assert!(parse_chain("Q 1\n", &t).is_err());
    }

    proptest! {
        #[test]
        fn homogeneity_and_triangle(k in 1i64..5, a in -3i64..4, b in -3i64..4) {
            let t = fixtures::torus();
            let (_, h1) = t.homology_rank(1);
            let z1 = h1[0].scale(&q(a)).add(&h1[1].scale(&q(b)));
            let z2 = h1[1].clone();
            let val = |z: &Chain| l1_lp(&NormProblem::new(t.clone(), z.clone(), Ring::Rationals).unwrap()).unwrap().value;
            prop_assert_eq!(val(&z1.scale(&q(k))), val(&z1) * q(k));
            prop_assert!(val(&z1.add(&z2)) <= val(&z1) + val(&z2));
        }
    }
}
