//! Sector Hamiltonians of the long-range model and its NN/NNN truncations.
//!
//! `H = Σ_{i≠j} C1(i,j) d_i^† d_j + U Σ_{i≠j} C2(i,j) n_i n_j`, where both
//! sums run over *ordered* pairs inside the model's interaction range. The
//! density sum therefore counts each unordered pair twice. `U` is 1 except
//! for the optimized truncations.
//!
//! Operators are available stored (row-compressed, sorted columns, diagonal
//! kept separately) or matrix-free; both use the same row generator.

pub mod dense;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{low_mask, BitIter, Configuration, SectorBasis};
use crate::error::{Error, Result};
use crate::lattice::{ring_distance, CouplingTable};
use crate::state::StateVector;

const ROW_CHUNK: usize = 1024;

/// Which truncation of the long-range Hamiltonian to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Exact,
    Nn,
    Nnn,
    NnOpt,
    NnnOpt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Exact,
        ModelKind::Nn,
        ModelKind::Nnn,
        ModelKind::NnOpt,
        ModelKind::NnnOpt,
    ];

    /// Largest ring distance with nonzero couplings; `None` means all pairs.
    pub fn range(self) -> Option<usize> {
        match self {
            ModelKind::Exact => None,
            ModelKind::Nn | ModelKind::NnOpt => Some(1),
            ModelKind::Nnn | ModelKind::NnnOpt => Some(2),
        }
    }

    pub fn is_optimized(self) -> bool {
        matches!(self, ModelKind::NnOpt | ModelKind::NnnOpt)
    }

    /// Tabulated overlap-optimal density scale for `q = 2, 3, 4`.
    pub fn tabulated_u(self, q: u32) -> Option<f64> {
        match (self, q) {
            (ModelKind::NnOpt | ModelKind::NnnOpt, 2) => Some(1.0),
            (ModelKind::NnOpt, 3) => Some(1.70),
            (ModelKind::NnnOpt, 3) => Some(0.70),
            (ModelKind::NnOpt, 4) => Some(5.36),
            (ModelKind::NnnOpt, 4) => Some(0.60),
            (k, _) if !k.is_optimized() => Some(1.0),
            _ => None,
        }
    }

    pub fn tag(self) -> u32 {
        match self {
            ModelKind::Exact => 0,
            ModelKind::Nn => 1,
            ModelKind::Nnn => 2,
            ModelKind::NnOpt => 3,
            ModelKind::NnnOpt => 4,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Exact => "exact",
            ModelKind::Nn => "nn",
            ModelKind::Nnn => "nnn",
            ModelKind::NnOpt => "nn-opt",
            ModelKind::NnnOpt => "nnn-opt",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "exact" => Ok(ModelKind::Exact),
            "nn" => Ok(ModelKind::Nn),
            "nnn" => Ok(ModelKind::Nnn),
            "nn-opt" | "nnopt" => Ok(ModelKind::NnOpt),
            "nnn-opt" | "nnnopt" => Ok(ModelKind::NnnOpt),
            other => Err(Error::Parse(format!("unknown model kind {other:?}"))),
        }
    }
}

/// `(q, N, kind, U)`: everything needed to assemble a Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub q: u32,
    pub n: usize,
    pub kind: ModelKind,
    pub u: f64,
}

impl ModelSpec {
    pub fn new(q: u32, n: usize, kind: ModelKind, u: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModel(format!("q = {q}, need q >= 2")));
        }
        if n < 2 || !n.is_multiple_of(q as usize) {
            return Err(Error::InvalidModel(format!(
                "q = {q} does not divide N = {n}"
            )));
        }
        if n > crate::basis::MAX_SITES {
            return Err(Error::Size(format!(
                "N = {n} exceeds {} sites",
                crate::basis::MAX_SITES
            )));
        }
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::InvalidModel(format!("U = {u} must be positive")));
        }
        if !kind.is_optimized() && u != 1.0 {
            return Err(Error::InvalidModel(format!(
                "kind {kind} fixes U = 1, got {u}"
            )));
        }
        Ok(Self { q, n, kind, u })
    }

    /// Uses `U = 1` for unoptimized kinds and the tabulated value otherwise.
    pub fn with_default_u(q: u32, n: usize, kind: ModelKind) -> Result<Self> {
        let u = kind.tabulated_u(q).ok_or_else(|| {
            Error::InvalidModel(format!("no tabulated U for kind {kind} at q = {q}"))
        })?;
        Self::new(q, n, kind, u)
    }

    pub fn exact(q: u32, n: usize) -> Result<Self> {
        Self::new(q, n, ModelKind::Exact, 1.0)
    }

    pub fn particles(&self) -> usize {
        self.n / self.q as usize
    }

    /// Closed-form ground energy of the exact model,
    /// `-(q-1)/(6q) N (3N + q - 8)`.
    pub fn exact_ground_energy(&self) -> f64 {
        let (q, n) = (self.q as f64, self.n as f64);
        -(q - 1.0) / (6.0 * q) * n * (3.0 * n + q - 8.0)
    }

    pub fn canonical(&self) -> String {
        format!("q={};n={};kind={};u={}", self.q, self.n, self.kind, self.u)
    }

    /// Deterministic seed derived from the canonical form.
    pub fn default_seed(&self) -> u64 {
        use std::hash::Hasher;
        let mut h = fnv::FnvHasher::default();
        h.write(self.canonical().as_bytes());
        h.finish()
    }
}

/// String sign of `d_i^† d_j` acting on `c` (1-based sites, particle hops
/// from `j` to `i`). For odd `q` it is `(-1)` to the number of particles
/// strictly between `i` and `j` in linear site order; for even `q` it is 1.
pub fn hop_sign(c: Configuration, i: usize, j: usize, q: u32) -> Result<i8> {
    if i == j {
        return Err(Error::IllegalMove {
            from: j,
            to: i,
            reason: "source equals target",
        });
    }
    if i == 0 || j == 0 || i > 64 || j > 64 {
        return Err(Error::IllegalMove {
            from: j,
            to: i,
            reason: "site out of range",
        });
    }
    if !c.occupied(j) {
        return Err(Error::IllegalMove {
            from: j,
            to: i,
            reason: "source site empty",
        });
    }
    if c.occupied(i) {
        return Err(Error::IllegalMove {
            from: j,
            to: i,
            reason: "target site occupied",
        });
    }
    Ok(string_sign(c.bits(), i - 1, j - 1, q))
}

#[inline]
fn string_sign(bits: u64, a: usize, b: usize, q: u32) -> i8 {
    if q.is_multiple_of(2) {
        return 1;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let between = bits & low_mask(hi) & !low_mask(lo + 1);
    if between.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Coefficient tables plus interaction range: generates matrix rows.
#[derive(Clone, Debug)]
pub struct RowGenerator {
    spec: ModelSpec,
    table: CouplingTable,
    /// Displacements `d` in `1..n` inside the interaction range.
    displacements: Vec<usize>,
    c1: Vec<Complex64>,
    c2: Vec<f64>,
}

impl RowGenerator {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let table = CouplingTable::new(spec.q, spec.n)?;
        let n = spec.n;
        let displacements: Vec<usize> = (1..n)
            .filter(|&d| {
                spec.kind
                    .range()
                    .is_none_or(|r| ring_distance(d, 0, n) <= r)
            })
            .collect();
        let mut c1 = vec![Complex64::new(0.0, 0.0); n];
        let mut c2 = vec![0.0; n];
        for &d in &displacements {
            let p = table.at(d);
            c1[d] = p.c1;
            c2[d] = p.c2;
        }
        Ok(Self {
            spec,
            table,
            displacements,
            c1,
            c2,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn table(&self) -> &CouplingTable {
        &self.table
    }

    /// Unscaled density-density energy `Σ_{i≠j} C2 n_i n_j` of a configuration.
    #[inline]
    pub fn density_energy(&self, bits: u64) -> f64 {
        let n = self.spec.n;
        let mut e = 0.0;
        for s in BitIter(bits) {
            for &d in &self.displacements {
                let t = (s + n - d) % n;
                if bits >> t & 1 == 1 {
                    e += self.c2[d];
                }
            }
        }
        e
    }

    /// Calls `emit(column, value)` for every off-diagonal entry of the row of
    /// configuration `bits` (with rank `rank`). Entries are emitted in a fixed
    /// order.
    #[inline]
    pub fn off_diagonal_row(
        &self,
        basis: &SectorBasis,
        bits: u64,
        rank: u64,
        mut emit: impl FnMut(u64, Complex64),
    ) {
        let n = self.spec.n;
        let q = self.spec.q;
        // <a| d_s^† d_t |b>: s occupied in a, t empty in a.
        for s in BitIter(bits) {
            for &d in &self.displacements {
                let t = (s + n - d) % n;
                if bits >> t & 1 == 1 {
                    continue;
                }
                let col = basis.rank_after_move(bits, rank, s, t);
                let v = self.c1[d];
                if string_sign(bits, s, t, q) < 0 {
                    emit(col, -v);
                } else {
                    emit(col, v);
                }
            }
        }
    }

    /// Upper bound on off-diagonal entries per row.
    pub fn max_row_entries(&self) -> usize {
        let m = self.spec.particles();
        (m * self.displacements.len()).min(m * (self.spec.n - m))
    }
}

/// Anything that can be applied to a vector in the sector basis.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. `x` and `y` both have length `dim()`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

/// Row-compressed Hermitian operator with a separately stored real diagonal.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    diag: Vec<f64>,
    diag_scale: f64,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len() + self.diag.iter().filter(|d| **d != 0.0).count()
    }

    /// Sets the factor `U` multiplying the density-density term.
    pub fn set_density_scale(&mut self, scale: f64) {
        self.diag_scale = scale;
    }

    pub fn density_scale(&self) -> f64 {
        self.diag_scale
    }

    pub fn diagonal(&self, a: usize) -> f64 {
        self.diag[a] * self.diag_scale
    }

    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[a]..self.row_ptr[a + 1];
        self.cols[r.clone()]
            .iter()
            .map(|&c| c as usize)
            .zip(self.vals[r].iter().copied())
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        if a == b {
            v += self.diagonal(a);
        }
        let r = self.row_ptr[a]..self.row_ptr[a + 1];
        if let Ok(k) = self.cols[r.clone()].binary_search(&(b as u32)) {
            v += self.vals[r.start + k];
        }
        v
    }

    /// Largest `|H_ab - conj(H_ba)|` over stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        (0..self.dim)
            .into_par_iter()
            .map(|a| {
                self.row(a)
                    .map(|(b, v)| (v - self.entry(b, a).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn to_dense(&self) -> faer::Mat<Complex64> {
        let mut m = faer::Mat::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            m[(a, a)] += Complex64::new(self.diagonal(a), 0.0);
            for (b, v) in self.row(a) {
                m[(a, b)] += v;
            }
        }
        m
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.par_chunks_mut(ROW_CHUNK)
            .enumerate()
            .for_each(|(chunk, ys)| {
                let start = chunk * ROW_CHUNK;
                for (off, out) in ys.iter_mut().enumerate() {
                    let a = start + off;
                    let mut acc = x[a] * (self.diag[a] * self.diag_scale);
                    for k in self.row_ptr[a]..self.row_ptr[a + 1] {
                        acc += self.vals[k] * x[self.cols[k] as usize];
                    }
                    *out = acc;
                }
            });
    }
}

/// Regenerates matrix rows on every application; memory is one basis.
#[derive(Clone, Debug)]
pub struct MatrixFreeOperator {
    rows: RowGenerator,
    basis: SectorBasis,
    diag_scale: f64,
}

impl MatrixFreeOperator {
    pub fn new(spec: ModelSpec, basis: SectorBasis) -> Result<Self> {
        check_basis(&spec, &basis)?;
        Ok(Self {
            rows: RowGenerator::new(spec)?,
            basis,
            diag_scale: spec.u,
        })
    }

    pub fn set_density_scale(&mut self, scale: f64) {
        self.diag_scale = scale;
    }
}

impl LinearOperator for MatrixFreeOperator {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.par_chunks_mut(ROW_CHUNK)
            .enumerate()
            .for_each(|(chunk, ys)| {
                let start = (chunk * ROW_CHUNK) as u64;
                for ((off, out), bits) in ys.iter_mut().enumerate().zip(self.basis.iter_from(start))
                {
                    let a = start + off as u64;
                    let mut acc =
                        x[a as usize] * (self.rows.density_energy(bits) * self.diag_scale);
                    self.rows.off_diagonal_row(&self.basis, bits, a, |col, v| {
                        acc += v * x[col as usize];
                    });
                    *out = acc;
                }
            });
    }
}

/// Stored or matrix-free Hamiltonian.
#[derive(Clone, Debug)]
pub enum Hamiltonian {
    Stored(SparseOperator),
    MatrixFree(MatrixFreeOperator),
}

impl Hamiltonian {
    pub fn set_density_scale(&mut self, scale: f64) {
        match self {
            Hamiltonian::Stored(h) => h.set_density_scale(scale),
            Hamiltonian::MatrixFree(h) => h.set_density_scale(scale),
        }
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(self, Hamiltonian::MatrixFree(_))
    }
}

impl LinearOperator for Hamiltonian {
    fn dim(&self) -> usize {
        match self {
            Hamiltonian::Stored(h) => h.dim(),
            Hamiltonian::MatrixFree(h) => LinearOperator::dim(h),
        }
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        match self {
            Hamiltonian::Stored(h) => h.apply(x, y),
            Hamiltonian::MatrixFree(h) => h.apply(x, y),
        }
    }
}

/// Memory policy for operator assembly.
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Bytes the stored matrix may occupy.
    pub memory_budget: u64,
    /// Sector dimensions above this use the matrix-free operator.
    pub matrix_free_above: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            memory_budget: 3 << 30,
            matrix_free_above: 2_000_000,
        }
    }
}

/// Bytes needed to store the operator of `spec` (upper bound).
pub fn stored_bytes_estimate(spec: &ModelSpec) -> Result<u64> {
    let rows = RowGenerator::new(*spec)?;
    let d = crate::basis::dimension(spec.n, spec.q)?;
    let per_row = rows.max_row_entries() as u64 * 20 + 16;
    Ok(d.saturating_mul(per_row))
}

fn check_basis(spec: &ModelSpec, basis: &SectorBasis) -> Result<()> {
    if basis.sites() != spec.n || basis.particles() != spec.particles() {
        return Err(Error::InvalidModel(format!(
            "basis ({} sites, {} particles) does not match model {}",
            basis.sites(),
            basis.particles(),
            spec.canonical()
        )));
    }
    if basis.dim() > u32::MAX as u64 {
        return Err(Error::Size(format!(
            "sector dimension {} exceeds 2^32",
            basis.dim()
        )));
    }
    Ok(())
}

/// Assembles the stored operator with the default memory budget.
pub fn build(spec: &ModelSpec, basis: &SectorBasis) -> Result<SparseOperator> {
    build_with(spec, basis, &BuildOptions::default())
}

pub fn build_with(
    spec: &ModelSpec,
    basis: &SectorBasis,
    opts: &BuildOptions,
) -> Result<SparseOperator> {
    check_basis(spec, basis)?;
    let required = stored_bytes_estimate(spec)?;
    if required > opts.memory_budget {
        return Err(Error::Resource {
            required,
            budget: opts.memory_budget,
        });
    }
    let rows = RowGenerator::new(*spec)?;
    let dim = basis.len();
    let n_chunks = dim.div_ceil(ROW_CHUNK);

    // Pass 1: row lengths.
    let mut counts = vec![0usize; dim];
    counts
        .par_chunks_mut(ROW_CHUNK)
        .enumerate()
        .for_each(|(chunk, cs)| {
            let start = (chunk * ROW_CHUNK) as u64;
            for ((off, c), bits) in cs.iter_mut().enumerate().zip(basis.iter_from(start)) {
                rows.off_diagonal_row(basis, bits, start + off as u64, |_, _| *c += 1);
            }
        });
    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    for c in &counts {
        row_ptr.push(row_ptr.last().unwrap() + c);
    }
    drop(counts);
    let nnz = row_ptr[dim];

    // Pass 2: fill disjoint slices chunk by chunk.
    let mut cols = vec![0u32; nnz];
    let mut vals = vec![Complex64::new(0.0, 0.0); nnz];
    let mut diag = vec![0.0; dim];
    let mut pieces = Vec::with_capacity(n_chunks);
    {
        let (mut cr, mut vr, mut dr) = (&mut cols[..], &mut vals[..], &mut diag[..]);
        for chunk in 0..n_chunks {
            let (r0, r1) = (chunk * ROW_CHUNK, ((chunk + 1) * ROW_CHUNK).min(dim));
            let len = row_ptr[r1] - row_ptr[r0];
            let (c, crest) = std::mem::take(&mut cr).split_at_mut(len);
            let (v, vrest) = std::mem::take(&mut vr).split_at_mut(len);
            let (dg, drest) = std::mem::take(&mut dr).split_at_mut(r1 - r0);
            pieces.push((r0, c, v, dg));
            cr = crest;
            vr = vrest;
            dr = drest;
        }
    }
    pieces.into_par_iter().for_each(|(r0, c, v, dg)| {
        let base = row_ptr[r0];
        let mut entries: Vec<(u32, Complex64)> = Vec::new();
        for (off, bits) in basis.iter_from(r0 as u64).take(dg.len()).enumerate() {
            let a = r0 + off;
            dg[off] = rows.density_energy(bits);
            entries.clear();
            rows.off_diagonal_row(basis, bits, a as u64, |col, val| {
                entries.push((col as u32, val))
            });
            entries.sort_unstable_by_key(|e| e.0);
            let s = row_ptr[a] - base;
            for (k, (col, val)) in entries.iter().enumerate() {
                c[s + k] = *col;
                v[s + k] = *val;
            }
        }
    });
    merge_duplicates(&mut row_ptr, &mut cols, &mut vals);
    Ok(SparseOperator {
        dim,
        row_ptr,
        cols,
        vals,
        diag,
        diag_scale: spec.u,
    })
}

/// Sums entries that share a column within a row (rows already sorted).
fn merge_duplicates(row_ptr: &mut [usize], cols: &mut Vec<u32>, vals: &mut Vec<Complex64>) {
    let dup = (0..row_ptr.len() - 1).any(|a| {
        cols[row_ptr[a]..row_ptr[a + 1]]
            .windows(2)
            .any(|w| w[0] == w[1])
    });
    if !dup {
        return;
    }
    let mut w = 0;
    let mut start = 0;
    for a in 0..row_ptr.len() - 1 {
        let end = row_ptr[a + 1];
        let row_start = w;
        for k in start..end {
            if w > row_start && cols[w - 1] == cols[k] {
                let v = vals[k];
                vals[w - 1] += v;
            } else {
                cols[w] = cols[k];
                vals[w] = vals[k];
                w += 1;
            }
        }
        start = end;
        row_ptr[a + 1] = w;
    }
    cols.truncate(w);
    vals.truncate(w);
}

/// Stored operator when it fits the budget and the sector is below the
/// matrix-free threshold; matrix-free otherwise.
pub fn build_operator(
    spec: &ModelSpec,
    basis: &SectorBasis,
    opts: &BuildOptions,
) -> Result<Hamiltonian> {
    check_basis(spec, basis)?;
    if basis.dim() > opts.matrix_free_above || stored_bytes_estimate(spec)? > opts.memory_budget {
        // the matrix-free operator needs only the basis, but the caller still
        // has to hold state vectors
        let vector_bytes = basis.dim() * 16;
        if vector_bytes > opts.memory_budget {
            return Err(Error::Resource {
                required: vector_bytes,
                budget: opts.memory_budget,
            });
        }
        return Ok(Hamiltonian::MatrixFree(MatrixFreeOperator::new(
            *spec,
            basis.clone(),
        )?));
    }
    Ok(Hamiltonian::Stored(build_with(spec, basis, opts)?))
}

/// `y = H v` with a dimension check.
pub fn matvec<H: LinearOperator + ?Sized>(h: &H, v: &StateVector) -> Result<StateVector> {
    if v.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.len(),
        });
    }
    let mut y = StateVector::zeros(v.len());
    h.apply(v.as_slice(), y.as_mut_slice());
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q: u32, n: usize, kind: ModelKind) -> ModelSpec {
        ModelSpec::with_default_u(q, n, kind).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::new(3, 16, ModelKind::Exact, 1.0).is_err());
        assert!(ModelSpec::new(1, 16, ModelKind::Exact, 1.0).is_err());
        assert!(ModelSpec::new(2, 16, ModelKind::Nn, 1.5).is_err());
        assert!(ModelSpec::new(2, 16, ModelKind::NnOpt, -1.0).is_err());
        assert!(ModelSpec::new(2, 16, ModelKind::NnOpt, 1.5).is_ok());
        assert_eq!(spec(3, 15, ModelKind::NnnOpt).u, 0.70);
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
            assert_eq!(ModelKind::from_tag(k.tag()), Some(k));
        }
    }

    #[test]
    fn closed_form_energies() {
        assert_eq!(
            ModelSpec::exact(2, 16).unwrap().exact_ground_energy(),
            -56.0
        );
        assert!(
            (ModelSpec::exact(3, 15).unwrap().exact_ground_energy() + 200.0 / 3.0).abs() < 1e-12
        );
        assert_eq!(
            ModelSpec::exact(2, 12).unwrap().exact_ground_energy(),
            -30.0
        );
    }

    #[test]
    fn hop_sign_examples() {
        let c = Configuration::from_sites(&[2, 3, 5]);
        assert_eq!(hop_sign(c, 1, 5, 3).unwrap(), 1);
        assert_eq!(hop_sign(c, 1, 5, 2).unwrap(), 1);
        assert_eq!(hop_sign(c, 4, 2, 3).unwrap(), -1);
        assert_eq!(hop_sign(c, 6, 2, 3).unwrap(), 1);
        let c = Configuration::from_sites(&[2, 5]);
        assert_eq!(hop_sign(c, 1, 5, 3).unwrap(), -1);
        assert_eq!(hop_sign(c, 1, 5, 4).unwrap(), 1);
        assert!(hop_sign(c, 2, 5, 3).is_err());
        assert!(hop_sign(c, 1, 3, 3).is_err());
        assert!(hop_sign(c, 5, 5, 3).is_err());
    }

    #[test]
    fn stored_operator_is_hermitian_and_real_for_q2() {
        for (q, n) in [(2, 12), (3, 12), (4, 12), (3, 9)] {
            let basis = SectorBasis::for_model(n, q).unwrap();
            for kind in ModelKind::ALL {
                let h = build(&spec(q, n, kind), &basis).unwrap();
                assert!(h.hermiticity_error() < 1e-12);
                if q == 2 {
                    assert!(h.vals.iter().all(|v| v.im == 0.0));
                }
            }
        }
    }

    #[test]
    fn matrix_free_matches_stored() {
        let basis = SectorBasis::for_model(15, 3).unwrap();
        for kind in ModelKind::ALL {
            let s = spec(3, 15, kind);
            let stored = build(&s, &basis).unwrap();
            let free = MatrixFreeOperator::new(s, basis.clone()).unwrap();
            let x: Vec<Complex64> = (0..basis.len())
                .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
                .collect();
            let mut y1 = vec![Complex64::new(0.0, 0.0); x.len()];
            let mut y2 = y1.clone();
            stored.apply(&x, &mut y1);
            free.apply(&x, &mut y2);
            let err = y1
                .iter()
                .zip(&y2)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-11, "{kind}: {err}");
        }
    }

    #[test]
    fn matvec_basics() {
        let basis = SectorBasis::for_model(12, 3).unwrap();
        let h = build(&spec(3, 12, ModelKind::Exact), &basis).unwrap();
        let zero = StateVector::zeros(basis.len());
        assert!(matvec(&h, &zero).unwrap().norm() == 0.0);
        assert!(matvec(&h, &StateVector::zeros(3)).is_err());
        let v: StateVector = (0..basis.len())
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 1.3).cos()))
            .collect::<Vec<_>>()
            .into();
        let hv = matvec(&h, &v).unwrap();
        let form = v.inner(&hv).unwrap();
        assert!(form.im.abs() < 1e-10 * form.re.abs().max(1.0));
    }

    #[test]
    fn budget_is_enforced() {
        let basis = SectorBasis::for_model(16, 2).unwrap();
        let s = ModelSpec::exact(2, 16).unwrap();
        let opts = BuildOptions {
            memory_budget: 1 << 20,
            matrix_free_above: 2_000_000,
        };
        assert!(matches!(
            build_with(&s, &basis, &opts),
            Err(Error::Resource { .. })
        ));
        assert!(build_operator(&s, &basis, &opts).unwrap().is_matrix_free());
        let opts = BuildOptions {
            memory_budget: 1 << 10,
            matrix_free_above: 2_000_000,
        };
        assert!(matches!(
            build_operator(&s, &basis, &opts),
            Err(Error::Resource { .. })
        ));
        let opts = BuildOptions {
            memory_budget: 1 << 30,
            matrix_free_above: 1000,
        };
        assert!(build_operator(&s, &basis, &opts).unwrap().is_matrix_free());
    }

    #[test]
    fn merge_sums_duplicates() {
        let mut ptr = vec![0, 3, 4];
        let mut cols = vec![1, 1, 2, 0];
        let one = Complex64::new(1.0, 0.0);
        let mut vals = vec![one, one, one, one];
        merge_duplicates(&mut ptr, &mut cols, &mut vals);
        assert_eq!(ptr, vec![0, 2, 3]);
        assert_eq!(cols, vec![1, 2, 0]);
        assert_eq!(vals[0], Complex64::new(2.0, 0.0));
    }
}
