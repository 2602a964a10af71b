//! Reference construction of the Hamiltonian from literal Kronecker products.
//!
//! Every `d_j` is assembled as the `N`-fold tensor product
//! `1 ⊗ ... ⊗ 1 ⊗ [[0,0],[1,0]] ⊗ S ⊗ ... ⊗ S` with `S = diag((-1)^q, 1)`,
//! in the local basis where index 0 is the occupied state. The Hamiltonian is
//! then formed by sparse matrix algebra on the full `2^N` space and projected
//! onto the sector. Nothing here shares code with the row generator, so the
//! two constructions check each other's sign and ordering conventions.

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64;

use super::ModelSpec;
use crate::basis::SectorBasis;
use crate::error::{Error, Result};

/// Largest chain accepted by the full-space construction.
pub const MAX_DENSE_SITES: usize = 14;

/// Sparse matrix on a `2^N`-dimensional tensor-product space, stored as a map
/// from `(row, col)` to value.
#[derive(Clone, Debug, Default)]
pub struct KronMatrix {
    dim: usize,
    entries: HashMap<(usize, usize), Complex64>,
}

impl KronMatrix {
    fn from_2x2(m: [[f64; 2]; 2]) -> Self {
        let mut entries = HashMap::new();
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    entries.insert((r, c), Complex64::new(*v, 0.0));
                }
            }
        }
        Self { dim: 2, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries.get(&(r, c)).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn kron(&self, other: &KronMatrix) -> KronMatrix {
        let mut entries = HashMap::with_capacity(self.entries.len() * other.entries.len());
        for (&(r1, c1), &v1) in &self.entries {
            for (&(r2, c2), &v2) in &other.entries {
                entries.insert((r1 * other.dim + r2, c1 * other.dim + c2), v1 * v2);
            }
        }
        KronMatrix {
            dim: self.dim * other.dim,
            entries,
        }
    }

    pub fn matmul(&self, other: &KronMatrix) -> KronMatrix {
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); other.dim];
        for (&(r, c), &v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut entries: HashMap<(usize, usize), Complex64> = HashMap::new();
        for (&(r, k), &v) in &self.entries {
            for &(c, w) in &by_row[k] {
                *entries.entry((r, c)).or_default() += v * w;
            }
        }
        KronMatrix {
            dim: self.dim,
            entries,
        }
    }

    pub fn adjoint(&self) -> KronMatrix {
        let entries = self
            .entries
            .iter()
            .map(|(&(r, c), v)| ((c, r), v.conj()))
            .collect();
        KronMatrix {
            dim: self.dim,
            entries,
        }
    }

    pub fn add_scaled(&mut self, other: &KronMatrix, alpha: Complex64) {
        for (&k, &v) in &other.entries {
            *self.entries.entry(k).or_default() += alpha * v;
        }
    }
}

/// The annihilator `d_j` (1-based `j`) where Kronecker slot `k` carries
/// site `order[k]`.
pub fn annihilator(j: usize, q: u32, order: &[usize]) -> KronMatrix {
    let identity = KronMatrix::from_2x2([[1.0, 0.0], [0.0, 1.0]]);
    let lower = KronMatrix::from_2x2([[0.0, 0.0], [1.0, 0.0]]);
    let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    let string = KronMatrix::from_2x2([[sign, 0.0], [0.0, 1.0]]);
    let slot_of_j = order
        .iter()
        .position(|&s| s == j)
        .expect("site missing from order");
    let mut acc = KronMatrix {
        dim: 1,
        entries: HashMap::from([((0, 0), Complex64::new(1.0, 0.0))]),
    };
    for slot in 0..order.len() {
        let factor = match slot.cmp(&slot_of_j) {
            std::cmp::Ordering::Less => &identity,
            std::cmp::Ordering::Equal => &lower,
            std::cmp::Ordering::Greater => &string,
        };
        acc = acc.kron(factor);
    }
    acc
}

/// Full-space Hamiltonian with the natural site order `1..=N`.
pub fn build_full_space(spec: &ModelSpec) -> Result<KronMatrix> {
    let order: Vec<usize> = (1..=spec.n).collect();
    build_full_space_ordered(spec, &order)
}

/// Full-space Hamiltonian with Kronecker slot `k` holding site `order[k]`.
/// Couplings are computed by complex division of `z_i + z_j` by `z_i - z_j`.
pub fn build_full_space_ordered(spec: &ModelSpec, order: &[usize]) -> Result<KronMatrix> {
    let n = spec.n;
    if n > MAX_DENSE_SITES {
        return Err(Error::Size(format!(
            "dense construction limited to {MAX_DENSE_SITES} sites, got {n}"
        )));
    }
    if order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: order.len(),
        });
    }
    // z_i ± z_j = 2 e^{iσ} (cos τ, i sin τ) with σ = π(i'+j)/N, τ = π(i'-j)/N,
    // where i' ≡ i (mod N) keeps |i' - j| <= N/2; this avoids the cancellation
    // of subtracting nearby positions
    let pm = |i: usize, j: usize| {
        let pi = std::f64::consts::PI;
        let half = (n / 2) as isize;
        let mut i = i as isize;
        let j = j as isize;
        if i - j > half {
            i -= n as isize;
        } else if j - i > half {
            i += n as isize;
        }
        let sigma = Complex64::from_polar(2.0, pi * (i + j) as f64 / n as f64);
        let tau = pi * (i - j) as f64 / n as f64;
        (sigma * tau.cos(), sigma * Complex64::new(0.0, tau.sin()))
    };
    let d: Vec<KronMatrix> = (1..=n).map(|j| annihilator(j, spec.q, order)).collect();
    let dag: Vec<KronMatrix> = d.iter().map(KronMatrix::adjoint).collect();
    let number: Vec<KronMatrix> = (0..n).map(|j| dag[j].matmul(&d[j])).collect();
    let q = spec.q as f64;

    let mut h = KronMatrix {
        dim: 1 << n,
        entries: HashMap::new(),
    };
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let sep = (i as isize - j as isize).unsigned_abs();
            let dist = sep.min(n - sep);
            if spec.kind.range().is_some_and(|r| dist > r) {
                continue;
            }
            let (sum, diff) = pm(i, j);
            let w = sum / diff;
            let c1 = (q - 2.0) * w - w * w;
            let c2 = -0.5 * (q * q - q) * w * w * spec.u;
            h.add_scaled(&dag[i - 1].matmul(&d[j - 1]), c1);
            h.add_scaled(&number[i - 1].matmul(&number[j - 1]), c2);
        }
    }
    Ok(h)
}

/// Occupation word of full-space index `f` (slot 0 is the most significant
/// tensor factor, local index 0 means occupied).
pub fn full_index_to_bits(f: usize, order: &[usize]) -> u64 {
    let n = order.len();
    let mut bits = 0u64;
    for (slot, &site) in order.iter().enumerate() {
        if (f >> (n - 1 - slot)) & 1 == 0 {
            bits |= 1 << (site - 1);
        }
    }
    bits
}

/// Restricts a full-space operator to the sector of `basis`.
pub fn project(h: &KronMatrix, basis: &SectorBasis, order: &[usize]) -> Mat<Complex64> {
    let dim = basis.len();
    let index: Vec<Option<usize>> = (0..h.dim())
        .map(|f| {
            let bits = full_index_to_bits(f, order);
            basis
                .rank(crate::basis::Configuration(bits))
                .ok()
                .map(|r| r as usize)
        })
        .collect();
    let mut m = Mat::zeros(dim, dim);
    for (r, c, v) in h.entries() {
        if let (Some(a), Some(b)) = (index[r], index[c]) {
            m[(a, b)] += v;
        }
    }
    m
}

/// Sector matrix of `spec` from the Kronecker construction.
pub fn build_dense(spec: &ModelSpec) -> Result<Mat<Complex64>> {
    let order: Vec<usize> = (1..=spec.n).collect();
    build_dense_ordered(spec, &order)
}

pub fn build_dense_ordered(spec: &ModelSpec, order: &[usize]) -> Result<Mat<Complex64>> {
    let h = build_full_space_ordered(spec, order)?;
    let basis = SectorBasis::for_model(spec.n, spec.q)?;
    Ok(project(&h, &basis, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{binomial, Configuration};
    use crate::hamiltonian::{build, hop_sign, ModelKind};

    #[test]
    fn number_operator_is_diagonal_occupation() {
        let order: Vec<usize> = (1..=5).collect();
        for q in [2, 3] {
            for j in 1..=5 {
                let d = annihilator(j, q, &order);
                let n = d.adjoint().matmul(&d);
                for f in 0..32 {
                    let occ = full_index_to_bits(f, &order) >> (j - 1) & 1;
                    for g in 0..32 {
                        let expect = if f == g { occ as f64 } else { 0.0 };
                        assert_eq!(n.get(f, g), Complex64::new(expect, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn sector_projection_dimension() {
        for (q, n) in [(2, 6), (3, 6), (2, 8), (4, 8)] {
            let m = build_dense(&ModelSpec::exact(q, n).unwrap()).unwrap();
            assert_eq!(m.nrows() as u64, binomial(n, n / q as usize));
        }
        assert!(build_dense(&ModelSpec::exact(3, 15).unwrap()).is_err());
    }

    #[test]
    fn hop_signs_agree_with_kronecker_products() {
        for n in [6usize, 7, 8] {
            let order: Vec<usize> = (1..=n).collect();
            let d: Vec<KronMatrix> = (1..=n).map(|j| annihilator(j, 3, &order)).collect();
            let bits_to_full: HashMap<u64, usize> = (0..1usize << n)
                .map(|f| (full_index_to_bits(f, &order), f))
                .collect();
            for i in 1..=n {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let op = d[i - 1].adjoint().matmul(&d[j - 1]);
                    for (r, c, v) in op.entries() {
                        let before = Configuration(full_index_to_bits(c, &order));
                        let sign = hop_sign(before, i, j, 3).unwrap();
                        assert_eq!(v, Complex64::new(sign as f64, 0.0));
                        let after = before.bits() & !(1 << (j - 1)) | 1 << (i - 1);
                        assert_eq!(bits_to_full[&after], r);
                    }
                }
            }
        }
    }

    #[test]
    fn stored_matches_kronecker_small() {
        for (q, n) in [(2, 6), (3, 6), (2, 8), (4, 8)] {
            for kind in ModelKind::ALL {
                let spec = ModelSpec::with_default_u(q, n, kind).unwrap();
                let dense = build_dense(&spec).unwrap();
                let basis = SectorBasis::for_model(n, q).unwrap();
                let sparse = build(&spec, &basis).unwrap().to_dense();
                let err = (0..basis.len())
                    .flat_map(|a| (0..basis.len()).map(move |b| (a, b)))
                    .map(|(a, b)| (dense[(a, b)] - sparse[(a, b)]).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "q={q} n={n} {kind}: {err}");
            }
        }
    }
}
