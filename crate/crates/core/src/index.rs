//! Index conventions shared by the oracle, the affine maps and the solver.
//!
//! Spin orbitals are numbered site-major, spin-minor: `2 * site + spin`
//! with spin 0 = up and 1 = down. Antisymmetric pairs `i < j` are packed
//! lexicographically; T2 triples `(i < j, k)` are `pair * r + k`; the
//! particle-hole space of G2 uses ordered pairs `i * r + j`.

/// Spin-orbital index of `(site, spin)`.
pub fn spin_orbital(site: usize, spin: usize) -> usize {
    2 * site + spin
}

/// Number of upper-triangle entries of an `n x n` symmetric matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)` (any order) in column-major upper-triangle storage.
pub fn sym_index(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

/// Inverse of [`sym_index`], returning `(i, j)` with `i <= j`.
pub fn sym_unindex(k: usize) -> (usize, usize) {
    let mut hi = ((((8 * k + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while hi * (hi + 1) / 2 > k {
        hi -= 1;
    }
    while (hi + 1) * (hi + 2) / 2 <= k {
        hi += 1;
    }
    (k - hi * (hi + 1) / 2, hi)
}

/// Bijection between ordered pairs `i < j` of spin orbitals and packed indices.
#[derive(Debug, Clone)]
pub struct PairIndexer {
    rank: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndexer {
    pub fn new(rank: usize) -> Self {
        let mut pairs = Vec::with_capacity(rank * rank.saturating_sub(1) / 2);
        for i in 0..rank {
            for j in i + 1..rank {
                pairs.push((i, j));
            }
        }
        Self { rank, pairs }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Packed index of `(i, j)`; requires `i < j < r`.
    pub fn pack(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.rank);
        i * (2 * self.rank - i - 1) / 2 + (j - i - 1)
    }

    pub fn unpack(&self, p: usize) -> (usize, usize) {
        self.pairs[p]
    }

    /// Packed index and antisymmetry sign for an unordered pair, `None` if `i == j`.
    pub fn signed(&self, i: usize, j: usize) -> Option<(usize, f64)> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Some((self.pack(i, j), 1.0)),
            std::cmp::Ordering::Greater => Some((self.pack(j, i), -1.0)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

/// Triples `(i < j, k)` labelling the two-particle/one-hole operators of T2.
#[derive(Debug, Clone)]
pub struct TripleIndexer {
    pairs: PairIndexer,
}

impl TripleIndexer {
    pub fn new(rank: usize) -> Self {
        Self { pairs: PairIndexer::new(rank) }
    }

    pub fn len(&self) -> usize {
        self.pairs.len() * self.pairs.rank()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pack(&self, i: usize, j: usize, k: usize) -> usize {
        self.pairs.pack(i, j) * self.pairs.rank() + k
    }

    pub fn unpack(&self, t: usize) -> (usize, usize, usize) {
        let r = self.pairs.rank();
        let (i, j) = self.pairs.unpack(t / r);
        (i, j, t % r)
    }
}
