//! Small concrete groups: permutations, free words, and 2×2 matrices mod N.

use std::fmt;

/// Permutation of `0..n`, composed left to right: `a.then(b)` applies `a` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Self {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            assert!(x < n && !seen[x], "not a permutation: {images:?}");
            seen[x] = true;
        }
        Perm(images.into_iter().map(|x| x as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn then(&self, b: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| b.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// Parse cycle notation such as `(0 1)(2 3)`; `()` is the identity.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Perm, String> {
        let mut img: Vec<usize> = (0..n).collect();
        let mut seen = vec![false; n];
        let mut rest = s.trim();
        while !rest.is_empty() {
            let inner = rest.strip_prefix('(').ok_or_else(|| format!("expected '(' in {s:?}"))?;
            let close = inner.find(')').ok_or_else(|| format!("unclosed cycle in {s:?}"))?;
            let cyc: Vec<usize> = inner[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| format!("bad point {t:?}")))
                .collect::<Result<_, _>>()?;
            for (k, &x) in cyc.iter().enumerate() {
                if x >= n {
                    return Err(format!("point {x} out of range for degree {n}"));
                }
                if seen[x] {
                    return Err(format!("point {x} repeated"));
                }
                seen[x] = true;
                img[x] = cyc[(k + 1) % cyc.len()];
            }
            rest = inner[close + 1..].trim_start();
        }
        Ok(Perm::from_images(img))
    }

    pub fn to_cycles(&self) -> String {
        let mut seen = vec![false; self.0.len()];
        let mut s = String::new();
        for i in 0..self.0.len() {
            if seen[i] || self.0[i] as usize == i {
                continue;
            }
            let mut cyc = vec![i];
            seen[i] = true;
            let mut j = self.0[i] as usize;
            while j != i {
                seen[j] = true;
                cyc.push(j);
                j = self.0[j] as usize;
            }
            let body: Vec<String> = cyc.iter().map(ToString::to_string).collect();
            s.push_str(&format!("({})", body.join(" ")));
        }
        if s.is_empty() { "()".into() } else { s }
    }
}

/// Reduced word in a free group; letter `±k` is generator `k` (1-based) or its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord(Vec<i32>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn generator(k: usize) -> Self {
        assert!(k >= 1);
        FreeWord(vec![k as i32])
    }

    pub fn from_letters(letters: Vec<i32>) -> Self {
        let mut out: Vec<i32> = Vec::with_capacity(letters.len());
        for x in letters {
            assert!(x != 0, "letter 0 is not a generator");
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        FreeWord(out)
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.0.clone();
        for &x in &other.0 {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        FreeWord(out)
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Parse `g1 g2^-1 g1`; `1` or an empty string is the identity.
    pub fn parse(s: &str) -> Result<FreeWord, String> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (base, inv) = match tok.strip_suffix("^-1") {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let k: i32 = base
                .strip_prefix('g')
                .and_then(|n| n.parse().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(|| format!("bad generator {tok:?}"))?;
            letters.push(if inv { -k } else { k });
        }
        Ok(FreeWord::from_letters(letters))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.0.iter().map(|&x| if x > 0 { format!("g{x}") } else { format!("g{}^-1", -x) }).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// 2×2 matrix over Z/N, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub a: [u64; 4],
    pub modulus: u64,
}

impl Mat2 {
    pub fn new(entries: [i64; 4], modulus: u64) -> Self {
        let m = modulus as i64;
        Mat2 { a: entries.map(|x| x.rem_euclid(m) as u64), modulus }
    }

    pub fn identity(modulus: u64) -> Self {
        Self::new([1, 0, 0, 1], modulus)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let n = self.modulus;
        let [a, b, c, d] = self.a;
        let [e, f, g, h] = o.a;
        Mat2 { a: [(a * e + b * g) % n, (a * f + b * h) % n, (c * e + d * g) % n, (c * f + d * h) % n], modulus: n }
    }

    pub fn det(&self) -> u64 {
        let n = self.modulus;
        let [a, b, c, d] = self.a;
        (a * d % n + n - b * c % n) % n
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl(&self) -> Mat2 {
        debug_assert_eq!(self.det(), 1 % self.modulus);
        let n = self.modulus;
        let [a, b, c, d] = self.a;
        Mat2 { a: [d, (n - b) % n, (n - c) % n, a], modulus: n }
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::identity(self.modulus)
    }
}
