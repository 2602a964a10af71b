//! Fixed-particle-number sector of the hardcore Hilbert space.
//!
//! Configurations are 64-bit occupation words (bit `j - 1` set iff site `j`
//! is occupied). Ranking uses the combinatorial number system: with occupied
//! positions `p_0 < p_1 < ... < p_{m-1}` the rank is `Σ_k C(p_k, k + 1)`,
//! which orders configurations by their integer value.

use crate::error::{Error, Result};

/// Hard limit on the number of sites.
pub const MAX_SITES: usize = 64;

/// Occupation word of an `N`-site configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration(pub u64);

impl Configuration {
    /// Builds a configuration from 1-based occupied sites.
    pub fn from_sites(sites: &[usize]) -> Self {
        Self(sites.iter().fold(0u64, |acc, &s| acc | 1 << (s - 1)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn particles(self) -> u32 {
        self.0.count_ones()
    }

    /// Occupation of 1-based site `j`.
    pub fn occupied(self, j: usize) -> bool {
        self.0 >> (j - 1) & 1 == 1
    }

    /// 1-based occupied sites in increasing order.
    pub fn sites(self) -> impl Iterator<Item = usize> {
        BitIter(self.0).map(|p| p + 1)
    }
}

/// Iterator over set bit positions, lowest first.
#[derive(Clone, Copy)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }
}

/// Next larger word with the same popcount (Gosper's hack).
#[inline]
pub fn next_combination(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x.wrapping_add(c);
    if r == 0 {
        return 0;
    }
    (((r ^ x) >> 2) / c) | r
}

/// Pascal triangle `C(n, k)` for `0 <= n, k <= 64`.
#[derive(Clone, Debug)]
struct Binomials {
    table: Vec<u64>,
}

impl Binomials {
    const W: usize = MAX_SITES + 1;

    fn new() -> Self {
        let mut table = vec![0u64; Self::W * Self::W];
        for n in 0..Self::W {
            table[n * Self::W] = 1;
            for k in 1..=n {
                let above = table[(n - 1) * Self::W + k - 1];
                let left = if k < n {
                    table[(n - 1) * Self::W + k]
                } else {
                    0
                };
                table[n * Self::W + k] = above.saturating_add(left);
            }
        }
        Self { table }
    }

    #[inline]
    fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n * Self::W + k]
        }
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Sector dimension `C(N, N/q)`.
pub fn dimension(n: usize, q: u32) -> Result<u64> {
    if q == 0 || !n.is_multiple_of(q as usize) {
        return Err(Error::InvalidModel(format!(
            "q = {q} does not divide N = {n}"
        )));
    }
    Ok(binomial(n, n / q as usize))
}

/// Bijection between the `C(N, M)` configurations with `M` particles and `0..D`.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    m: usize,
    dim: u64,
    binom: Binomials,
}

impl SectorBasis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n > MAX_SITES {
            return Err(Error::Size(format!(
                "{n} sites exceeds the {MAX_SITES}-site limit"
            )));
        }
        if m > n {
            return Err(Error::InvalidModel(format!("{m} particles on {n} sites")));
        }
        Ok(Self {
            n,
            m,
            dim: binomial(n, m),
            binom: Binomials::new(),
        })
    }

    /// The `N/q`-particle sector of an `N`-site chain.
    pub fn for_model(n: usize, q: u32) -> Result<Self> {
        dimension(n, q)?;
        Self::new(n, n / q as usize)
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn particles(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dim as usize
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    pub fn contains(&self, c: Configuration) -> bool {
        c.particles() as usize == self.m && (self.n == 64 || c.0 >> self.n == 0)
    }

    pub fn rank(&self, c: Configuration) -> Result<u64> {
        if !self.contains(c) {
            return Err(Error::OutOfSector {
                bits: c.0,
                found: c.particles(),
                expected: self.m as u32,
            });
        }
        Ok(self.rank_unchecked(c.0))
    }

    /// Rank of an in-sector word; no validation.
    #[inline]
    pub fn rank_unchecked(&self, bits: u64) -> u64 {
        BitIter(bits)
            .enumerate()
            .map(|(k, p)| self.binom.get(p, k + 1))
            .sum()
    }

    pub fn unrank(&self, index: u64) -> Result<Configuration> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim,
            });
        }
        Ok(Configuration(self.unrank_unchecked(index)))
    }

    #[inline]
    pub fn unrank_unchecked(&self, mut index: u64) -> u64 {
        let mut bits = 0u64;
        let mut p = self.n;
        for k in (1..=self.m).rev() {
            // largest p with C(p, k) <= index
            p -= 1;
            while self.binom.get(p, k) > index {
                p -= 1;
            }
            bits |= 1 << p;
            index -= self.binom.get(p, k);
        }
        bits
    }

    /// Rank of `bits` with the particle at `from` moved to the empty site `to`
    /// (0-based positions), given `rank = rank(bits)`. Costs one step per
    /// particle strictly between the two sites.
    #[inline]
    pub fn rank_after_move(&self, bits: u64, rank: u64, from: usize, to: usize) -> u64 {
        debug_assert!(bits >> from & 1 == 1 && bits >> to & 1 == 0);
        let b = |n: usize, k: usize| self.binom.get(n, k) as i64;
        // ordinal of the moving particle
        let k = (bits & ((1u64 << from) - 1)).count_ones() as usize;
        let mut delta = -b(from, k + 1);
        if from < to {
            let between = bits & low_mask(to) & !low_mask(from + 1);
            let mut ord = k + 1;
            for p in BitIter(between) {
                delta += b(p, ord) - b(p, ord + 1);
                ord += 1;
            }
            delta += b(to, ord);
        } else {
            let between = bits & low_mask(from) & !low_mask(to + 1);
            let shift = between.count_ones() as usize;
            for (ord, p) in (k - shift..).zip(BitIter(between)) {
                delta += b(p, ord + 2) - b(p, ord + 1);
            }
            delta += b(to, k - shift + 1);
        }
        (rank as i64 + delta) as u64
    }

    /// All configurations in rank order.
    pub fn iter(&self) -> SectorIter {
        SectorIter {
            next: self.first_bits(),
            remaining: self.dim,
        }
    }

    /// Configurations starting at `index`, in rank order.
    pub fn iter_from(&self, index: u64) -> SectorIter {
        let remaining = self.dim.saturating_sub(index);
        let next = if remaining == 0 {
            0
        } else {
            self.unrank_unchecked(index)
        };
        SectorIter { next, remaining }
    }

    fn first_bits(&self) -> u64 {
        low_mask(self.m)
    }
}

#[inline]
pub(crate) fn low_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Walks a sector in rank order without re-ranking.
pub struct SectorIter {
    next: u64,
    remaining: u64,
}

impl Iterator for SectorIter {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let cur = self.next;
        self.remaining -= 1;
        if self.remaining > 0 {
            self.next = next_combination(cur);
        }
        Some(cur)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}
