//! Exact rational linear programming: two-phase tableau simplex with Bland's rule,
//! and a small branch-and-bound on top of it.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Q};

/// Optimal vertex of `min cᵀx, Ax = b, x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: Q,
    pub x: Vec<Q>,
    /// Optimal dual `π` with `Aᵀπ ≤ c` and `πᵀb = value`.
    pub dual: Vec<Q>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
}

struct Tableau {
    /// rows × (n + rows + 1); the last column is the right-hand side
    t: Matrix,
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        self.t[i].last().unwrap()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.t[r][c].recip();
        for x in self.t[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimize `cost` over the current basis; columns at or beyond `allowed` never enter.
    fn optimize(&mut self, cost: &[Q], allowed: usize) -> Result<()> {
        loop {
            let m = self.t.len();
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for i in 0..m {
                    if !self.t[i][j].is_zero() {
                        rc -= &cost[self.basis[i]] * &self.t[i][j];
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return Ok(()) };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..m {
                if self.t[i][j].is_positive() {
                    let ratio = self.rhs(i) / &self.t[i][j];
                    let better = match &leave {
                        None => true,
                        Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Invariant("linear program is unbounded".into()));
            };
            self.pivot(r, j);
        }
    }
}

/// Solve `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
pub fn minimize(a: &Matrix, b: &[Q], c: &[Q]) -> Result<LpOutcome> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut sign = vec![Q::one(); m];
    let mut t = vec![vec![Q::zero(); width]; m];
    for i in 0..m {
        if b[i].is_negative() {
            sign[i] = -Q::one();
        }
        for j in 0..n {
            t[i][j] = &a[i][j] * &sign[i];
        }
        t[i][n + i] = Q::one();
        t[i][width - 1] = &b[i] * &sign[i];
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), n };

    let mut phase1 = vec![Q::zero(); n + m];
    for x in &mut phase1[n..] {
        *x = Q::one();
    }
    tab.optimize(&phase1, n + m)?;
    let infeas: Q = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.rhs(i).clone()).sum();
    if infeas.is_positive() {
        return Ok(LpOutcome::Infeasible);
    }
    // drive zero-level artificials out where a structural column is available
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !tab.t[i][j].is_zero() && !tab.basis.contains(&j)) {
                tab.pivot(i, j);
            }
        }
    }

    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(Q::zero(), m));
    tab.optimize(&cost, tab.n)?;

    let mut x = vec![Q::zero(); n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).clone();
        }
    }
    let value: Q = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // the artificial block of the tableau holds B⁻¹
    let dual: Vec<Q> = (0..m)
        .map(|k| {
            let pk: Q = (0..m).map(|i| &cost[tab.basis[i]] * &tab.t[i][n + k]).sum();
            pk * &sign[k]
        })
        .collect();
    Ok(LpOutcome::Optimal(LpSolution { value, x, dual }))
}

/// Integer optimum of `min cᵀx, Ax = b, x ≥ 0, x integral` by depth-first branch-and-bound.
///
/// Branches on the most fractional variable, ties to the lowest index. `c` must be
/// integral so objective values can be rounded up when pruning.
pub fn minimize_integer(a: &Matrix, b: &[Q], c: &[Q], node_cap: usize) -> Result<Option<(Q, Vec<Q>)>> {
    let n = c.len();
    let mut best: Option<(Q, Vec<Q>)> = None;
    // bounds: (var, is_upper, level)
    let mut stack: Vec<Vec<(usize, bool, Q)>> = vec![Vec::new()];
    let mut nodes = 0usize;
    while let Some(bounds) = stack.pop() {
        nodes += 1;
        if nodes > node_cap {
            return Err(Error::BudgetExceeded(node_cap));
        }
        let extra = bounds.len();
        let mut aa: Matrix = a.iter().map(|row| {
            let mut r = row.clone();
            r.extend(std::iter::repeat_n(Q::zero(), extra));
            r
        }).collect();
        let mut bb = b.to_vec();
        for (k, (var, upper, level)) in bounds.iter().enumerate() {
            let mut row = vec![Q::zero(); n + extra];
            row[*var] = Q::one();
            row[n + k] = if *upper { Q::one() } else { -Q::one() };
            aa.push(row);
            bb.push(level.clone());
        }
        let mut cc = c.to_vec();
        cc.extend(std::iter::repeat_n(Q::zero(), extra));
        let LpOutcome::Optimal(sol) = minimize(&aa, &bb, &cc)? else { continue };
        if let Some((v, _)) = &best {
            if sol.value.ceil() >= *v {
                continue;
            }
        }
        let mut pick: Option<(usize, Q)> = None;
        let half = Q::new(1.into(), 2.into());
        for j in 0..n {
            let f = sol.x[j].fract();
            if f.is_zero() {
                continue;
            }
            let dist = (&f - &half).abs();
            if pick.as_ref().is_none_or(|(_, d)| dist < *d) {
                pick = Some((j, dist));
            }
        }
        match pick {
            None => best = Some((sol.value.clone(), sol.x[..n].to_vec())),
            Some((j, _)) => {
                let lo = sol.x[j].floor();
                let mut up = bounds.clone();
                up.push((j, false, &lo + Q::one()));
                let mut down = bounds;
                down.push((j, true, lo));
                stack.push(up);
                stack.push(down);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qf};

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn small_lp() {
        // min x + y s.t. x + 2y = 3 (with slack form): optimum y = 3/2
        let a = m(&[&[1, 2]]);
        let LpOutcome::Optimal(s) = minimize(&a, &[q(3)], &[q(1), q(1)]).unwrap() else { panic!() };
        assert_eq!(s.value, qf(3, 2));
        assert_eq!(s.x, vec![q(0), qf(3, 2)]);
        assert_eq!(s.dual, vec![qf(1, 2)]);
    }

    #[test]
    fn infeasible_and_negative_rhs() {
        let a = m(&[&[1, 1]]);
        assert!(matches!(minimize(&a, &[q(-1)], &[q(1), q(1)]).unwrap(), LpOutcome::Infeasible));
        let a = m(&[&[1, -1]]);
        let LpOutcome::Optimal(s) = minimize(&a, &[q(-2)], &[q(1), q(1)]).unwrap() else { panic!() };
        assert_eq!(s.value, q(2));
        assert_eq!(s.dual, vec![q(-1)]);
    }

    #[test]
    fn redundant_rows() {
        let a = m(&[&[1, 1], &[2, 2]]);
        let LpOutcome::Optimal(s) = minimize(&a, &[q(1), q(2)], &[q(1), q(3)]).unwrap() else { panic!() };
        assert_eq!(s.value, q(1));
        let dual_obj = &s.dual[0] * q(1) + &s.dual[1] * q(2);
        assert_eq!(dual_obj, q(1));
    }

    #[test]
    fn integer_program() {
        // min x + y s.t. 2x + 2y - s = 3: LP gives 3/2, integers give 2
        let a = m(&[&[2, 2, -1]]);
        let c = [q(1), q(1), q(0)];
        let (v, x) = minimize_integer(&a, &[q(3)], &c, 1000).unwrap().unwrap();
        assert_eq!(v, q(2));
        assert!(x.iter().all(|xi| xi.is_integer()));
    }
}
