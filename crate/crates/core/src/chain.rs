use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::linalg::Q;

/// Sparse simplicial chain with exact rational coefficients.
///
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chain {
    degree: usize,
    coeffs: BTreeMap<usize, Q>,
}

impl Chain {
    pub fn zero(degree: usize) -> Self {
        Chain { degree, coeffs: BTreeMap::new() }
    }

    pub fn from_pairs(degree: usize, pairs: impl IntoIterator<Item = (usize, Q)>) -> Self {
        let mut c = Chain::zero(degree);
        for (i, x) in pairs {
            c.add_term(i, x);
        }
        c
    }

    pub fn from_ints(degree: usize, pairs: &[(usize, i64)]) -> Self {
        Self::from_pairs(degree, pairs.iter().map(|&(i, x)| (i, crate::linalg::q(x))))
    }

    /// Build from a dense coefficient vector.
    pub fn from_dense(degree: usize, v: &[Q]) -> Self {
        Self::from_pairs(degree, v.iter().cloned().enumerate())
    }

    pub fn to_dense(&self, len: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); len];
        for (&i, x) in &self.coeffs {
            if i < len {
                v[i] = x.clone();
            }
        }
        v
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, i: usize) -> Q {
        self.coeffs.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, i: usize, x: Q) {
        if x.is_zero() {
            return;
        }
        let e = self.coeffs.entry(i).or_insert_with(Q::zero);
        *e += x;
        if e.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.coeffs.iter().map(|(&i, x)| (i, x))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn l1_norm(&self) -> Q {
        self.coeffs.values().fold(Q::zero(), |acc, x| acc + x.abs())
    }

    pub fn sup_norm(&self) -> Q {
        self.coeffs.values().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, k: &Q) -> Chain {
        Chain::from_pairs(self.degree, self.coeffs.iter().map(|(&i, x)| (i, x * k)))
    }

    pub fn add(&self, other: &Chain) -> Chain {
        assert_eq!(self.degree, other.degree, "adding chains of different degree");
        let mut c = self.clone();
        for (i, x) in other.iter() {
            c.add_term(i, x.clone());
        }
        c
    }

    pub fn sub(&self, other: &Chain) -> Chain {
        self.add(&other.scale(&-crate::linalg::q(1)))
    }

    /// Pairing with a cochain given densely by simplex index.
    pub fn pair(&self, cochain: &[Q]) -> Q {
        self.iter().fold(Q::zero(), |acc, (i, x)| acc + x * &cochain[i])
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, x) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{x}*s{i}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn zeros_are_dropped() {
        let mut c = Chain::from_ints(1, &[(0, 2), (3, -1)]);
        c.add_term(0, q(-2));
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(0), q(0));
        assert_eq!(c.l1_norm(), q(1));
    }

    #[test]
    fn arithmetic() {
        let a = Chain::from_ints(2, &[(0, 1), (1, -1)]);
        let b = Chain::from_ints(2, &[(1, 1)]);
        assert_eq!(a.add(&b), Chain::from_ints(2, &[(0, 1)]));
        assert_eq!(a.sub(&a), Chain::zero(2));
        assert_eq!(a.scale(&q(3)).l1_norm(), q(6));
    }
}
