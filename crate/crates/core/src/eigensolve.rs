//! Lowest eigenpairs of Hermitian sector operators.
//!
//! [`lowest_k`] runs thick-restart Lanczos with full reorthogonalization
//! (classical Gram-Schmidt, two passes). A single Krylov sequence sees only
//! one direction of each degenerate eigenspace, so converged pairs are locked
//! and the solve is repeated from fresh random vectors in their orthogonal
//! complement until a round finds nothing below the current `k`-th level.
//! [`dense_all`] is the full diagonalization used as an oracle.

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::LinearOperator;
use crate::state::{axpy, dot, norm, scale, StateVector};

/// Largest matrix accepted by [`dense_all`].
pub const MAX_DENSE_DIM: usize = 4000;

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Number of eigenpairs.
    pub k: usize,
    /// Residual norm `‖H v - E v‖` every returned pair must reach.
    pub tol: f64,
    pub seed: u64,
    /// Krylov basis size; defaults to `max(2k + 12, 20)`.
    pub max_basis: Option<usize>,
    /// Restarts allowed within one locking round.
    pub max_restarts: usize,
    /// Locking rounds (fresh start vectors) allowed.
    pub max_rounds: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            k: 8,
            tol: 1e-10,
            seed: 0,
            max_basis: None,
            max_restarts: 1000,
            max_rounds: 12,
        }
    }
}

impl LanczosOptions {
    pub fn new(k: usize, tol: f64, seed: u64) -> Self {
        Self {
            k,
            tol,
            seed,
            ..Self::default()
        }
    }

    fn basis_size(&self, nev: usize) -> usize {
        self.max_basis
            .unwrap_or((2 * nev + 12).max(20))
            .max(nev + 2)
    }
}

/// Bytes of state vectors [`lowest_k`] holds for `k` pairs in dimension `dim`.
pub fn solver_bytes_estimate(dim: u64, opts: &LanczosOptions) -> u64 {
    let vectors = (opts.basis_size(opts.k) + 2 * opts.k + 3) as u64;
    dim.saturating_mul(16).saturating_mul(vectors)
}

/// Eigenpairs in ascending order of energy.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    pub vectors: Vec<StateVector>,
    /// `‖H v_m - E_m v_m‖` of each returned pair.
    pub residuals: Vec<f64>,
    /// Matrix-vector products used.
    pub iterations: usize,
    /// Lowest Ritz value after each restart of the first round.
    pub ritz_trace: Vec<f64>,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// `E_1 - E_0`, when at least two levels were computed.
    pub fn gap(&self) -> Option<f64> {
        (self.energies.len() >= 2).then(|| self.energies[1] - self.energies[0])
    }
}

struct RitzPair {
    value: f64,
    vector: Vec<Complex64>,
    residual: f64,
}

/// The `opts.k` lowest eigenpairs of `op`.
pub fn lowest_k<H: LinearOperator + ?Sized>(op: &H, opts: &LanczosOptions) -> Result<EigenResult> {
    let dim = op.dim();
    if opts.k == 0 || opts.k > dim {
        return Err(Error::InvalidModel(format!(
            "cannot compute {} eigenpairs in dimension {dim}",
            opts.k
        )));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "tolerance {} must be positive",
            opts.tol
        )));
    }
    let k = opts.k;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<RitzPair> = Vec::new();
    let mut matvecs = 0usize;
    let mut trace = Vec::new();

    for round in 0..opts.max_rounds {
        let avail = dim - locked.len();
        if avail == 0 {
            break;
        }
        let nev = if round == 0 { k } else { (k / 2).max(1) }.min(avail);
        let locked_vecs: Vec<&[Complex64]> = locked.iter().map(|p| p.vector.as_slice()).collect();
        let Some(start) = random_orthogonal(dim, &locked_vecs, &[], &mut rng) else {
            break;
        };
        let found = thick_restart(
            op,
            &locked_vecs,
            start,
            nev,
            opts,
            &mut rng,
            &mut matvecs,
            (round == 0).then_some(&mut trace),
        )?;
        drop(locked_vecs);

        if locked.len() < k {
            locked.extend(found);
            locked.sort_by(|a, b| a.value.total_cmp(&b.value));
            continue;
        }
        let threshold = locked[k - 1].value;
        let eps = opts.tol.max(1e-12 * threshold.abs().max(1.0));
        let below: Vec<RitzPair> = found
            .into_iter()
            .filter(|p| p.value < threshold - eps)
            .collect();
        if below.is_empty() {
            break;
        }
        locked.extend(below);
        locked.sort_by(|a, b| a.value.total_cmp(&b.value));
    }
    if locked.len() < k {
        return Err(Error::NoConvergence {
            iterations: matvecs,
            residuals: locked.iter().map(|p| p.residual).collect(),
        });
    }
    locked.truncate(k);
    Ok(EigenResult {
        energies: locked.iter().map(|p| p.value).collect(),
        residuals: locked.iter().map(|p| p.residual).collect(),
        vectors: locked
            .into_iter()
            .map(|p| StateVector::new(p.vector))
            .collect(),
        iterations: matvecs,
        ritz_trace: trace,
    })
}

/// Removes the components along `against` (assumed orthonormal), twice.
///
/// Each pass sweeps memory once per row chunk: all inner products are
/// accumulated chunk by chunk and summed in chunk order, so the result does
/// not depend on the thread count.
fn orthogonalize(w: &mut [Complex64], against: &[&[Complex64]]) {
    const CH: usize = 4096;
    if against.is_empty() {
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    for _ in 0..2 {
        let partial: Vec<Vec<Complex64>> = w
            .par_chunks(CH)
            .enumerate()
            .map(|(k, wc)| {
                let lo = k * CH;
                against
                    .iter()
                    .map(|v| {
                        v[lo..lo + wc.len()]
                            .iter()
                            .zip(wc)
                            .map(|(a, b)| a.conj() * b)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut coeffs = vec![zero; against.len()];
        for p in &partial {
            for (c, x) in coeffs.iter_mut().zip(p) {
                *c += x;
            }
        }
        w.par_chunks_mut(CH).enumerate().for_each(|(k, wc)| {
            let lo = k * CH;
            let hi = lo + wc.len();
            for (v, c) in against.iter().zip(&coeffs) {
                for (o, a) in wc.iter_mut().zip(&v[lo..hi]) {
                    *o -= c * a;
                }
            }
        });
    }
}

fn random_orthogonal(
    dim: usize,
    locked: &[&[Complex64]],
    basis: &[Vec<Complex64>],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Complex64>> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let before = norm(&v);
    let mut against: Vec<&[Complex64]> = locked.to_vec();
    against.extend(basis.iter().map(|b| b.as_slice()));
    orthogonalize(&mut v, &against);
    let after = norm(&v);
    if after <= 1e-8 * before {
        return None;
    }
    scale(&mut v, Complex64::new(1.0 / after, 0.0));
    Some(v)
}

/// Eigen-decomposition of the leading `size × size` block of the row-major
/// real symmetric matrix `t` (stride `stride`). Returns ascending values and
/// the eigenvector matrix with `y[j * size + c]` = component `j` of vector `c`.
fn small_eigen(t: &[f64], stride: usize, size: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = Mat::<f64>::from_fn(size, size, |i, j| t[i * stride + j]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Decomposition)?;
    let values: Vec<f64> = (0..size).map(|i| evd.S()[i]).collect();
    let u = evd.U();
    let mut y = vec![0.0; size * size];
    for j in 0..size {
        for c in 0..size {
            y[j * size + c] = u[(j, c)];
        }
    }
    Ok((values, y))
}

/// `basis[c] <- Σ_j y[j][c] basis[j]` for `c < keep`, row chunk by row chunk.
fn rotate_in_place(basis: &mut [Vec<Complex64>], y: &[f64], size: usize, keep: usize) {
    const CH: usize = 2048;
    let dim = basis[0].len();
    let n_chunks = dim.div_ceil(CH);
    let mut per_chunk: Vec<Vec<&mut [Complex64]>> =
        (0..n_chunks).map(|_| Vec::with_capacity(size)).collect();
    for v in basis.iter_mut().take(size) {
        for (k, piece) in v.chunks_mut(CH).enumerate() {
            per_chunk[k].push(piece);
        }
    }
    per_chunk.into_par_iter().for_each(|mut pieces| {
        let len = pieces[0].len();
        let mut out = vec![Complex64::new(0.0, 0.0); keep * len];
        for c in 0..keep {
            let dst = &mut out[c * len..(c + 1) * len];
            for (j, src) in pieces.iter().enumerate() {
                let coef = y[j * size + c];
                if coef == 0.0 {
                    continue;
                }
                for (o, s) in dst.iter_mut().zip(src.iter()) {
                    *o += s * coef;
                }
            }
        }
        for (c, piece) in pieces.iter_mut().take(keep).enumerate() {
            piece.copy_from_slice(&out[c * len..(c + 1) * len]);
        }
    });
}

fn residual_norm<H: LinearOperator + ?Sized>(
    op: &H,
    x: &[Complex64],
    theta: f64,
    work: &mut [Complex64],
) -> f64 {
    op.apply(x, work);
    axpy(Complex64::new(-theta, 0.0), x, work);
    norm(work)
}

/// One locking round: the `nev` lowest eigenpairs of `op` restricted to the
/// orthogonal complement of `locked`.
#[allow(clippy::too_many_arguments)]
fn thick_restart<H: LinearOperator + ?Sized>(
    op: &H,
    locked: &[&[Complex64]],
    start: Vec<Complex64>,
    nev: usize,
    opts: &LanczosOptions,
    rng: &mut ChaCha8Rng,
    matvecs: &mut usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Vec<RitzPair>> {
    let dim = op.dim();
    let avail = dim - locked.len();
    let m = opts.basis_size(nev).min(avail);
    let nev = nev.min(m);
    let inner_tol = 0.5 * opts.tol;

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    basis.push(start);
    let mut t = vec![0.0f64; m * m];
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut best = vec![f64::INFINITY; nev];

    for _restart in 0..opts.max_restarts {
        let mut j = basis.len() - 1;
        let beta_last;
        loop {
            op.apply(&basis[j], &mut w);
            *matvecs += 1;
            let alpha = dot(&basis[j], &w).re;
            t[j * m + j] = alpha;
            {
                let mut refs: Vec<&[Complex64]> = locked.to_vec();
                refs.extend(basis.iter().map(|b| b.as_slice()));
                orthogonalize(&mut w, &refs);
            }
            let beta = norm(&w);
            if basis.len() == m {
                beta_last = beta;
                break;
            }
            let prev = if j > 0 { t[(j - 1) * m + j] } else { 0.0 };
            if beta <= 1e-12 * alpha.abs().max(prev).max(1.0) {
                // invariant subspace; continue with a fresh orthogonal direction
                match random_orthogonal(dim, locked, &basis, rng) {
                    Some(v) => basis.push(v),
                    None => {
                        beta_last = 0.0;
                        break;
                    }
                }
            } else {
                scale(&mut w, Complex64::new(1.0 / beta, 0.0));
                t[j * m + j + 1] = beta;
                t[(j + 1) * m + j] = beta;
                basis.push(w.clone());
            }
            j += 1;
        }

        let size = basis.len();
        let (theta, y) = small_eigen(&t, m, size)?;
        let estimates: Vec<f64> = (0..size)
            .map(|c| (beta_last * y[(size - 1) * size + c]).abs())
            .collect();
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(theta[0]);
        }
        let want = nev.min(size);
        // a basis spanning the whole available space makes every Ritz pair exact
        let exhausted = beta_last == 0.0 || size == avail;
        let keep = if exhausted {
            want
        } else {
            (nev + (size - nev) / 2).clamp(want, size - 1)
        };
        // residual vector for the restart, before the basis is overwritten
        let next = if exhausted {
            None
        } else {
            let mut r = w.clone();
            scale(&mut r, Complex64::new(1.0 / beta_last, 0.0));
            Some(r)
        };
        rotate_in_place(&mut basis, &y, size, keep);
        basis.truncate(keep);

        if exhausted || (0..want).all(|c| estimates[c] < inner_tol) {
            let mut ok = true;
            let mut residuals = Vec::with_capacity(want);
            for c in 0..want {
                let r = residual_norm(op, &basis[c], theta[c], &mut w);
                *matvecs += 1;
                best[c] = best[c].min(r);
                ok &= r < opts.tol;
                residuals.push(r);
            }
            if ok || exhausted {
                if !ok {
                    return Err(Error::NoConvergence {
                        iterations: *matvecs,
                        residuals,
                    });
                }
                return Ok(basis
                    .into_iter()
                    .take(want)
                    .zip(theta.iter().zip(residuals))
                    .map(|(vector, (&value, residual))| RitzPair {
                        value,
                        vector,
                        residual,
                    })
                    .collect());
            }
        }

        t.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..keep {
            t[i * m + i] = theta[i];
            let s = beta_last * y[(size - 1) * size + i];
            t[i * m + keep] = s;
            t[keep * m + i] = s;
        }
        basis.push(next.expect("restart vector exists unless exhausted"));
    }
    Err(Error::NoConvergence {
        iterations: *matvecs,
        residuals: best,
    })
}

/// Full spectrum of a dense Hermitian matrix.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    /// Column `c` is the eigenvector of `values[c]`.
    pub vectors: Mat<Complex64>,
}

fn check_dense(h: &Mat<Complex64>) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    if h.nrows() > MAX_DENSE_DIM {
        return Err(Error::Size(format!(
            "dense diagonalization limited to {MAX_DENSE_DIM}, got {}",
            h.nrows()
        )));
    }
    Ok(())
}

/// Complete eigendecomposition (ascending eigenvalues).
pub fn dense_all(h: &Mat<Complex64>) -> Result<DenseSpectrum> {
    check_dense(h)?;
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Decomposition)?;
    let values = (0..h.nrows()).map(|i| evd.S()[i].re).collect();
    Ok(DenseSpectrum {
        values,
        vectors: evd.U().to_owned(),
    })
}

/// Eigenvalues only (ascending).
pub fn dense_eigenvalues(h: &Mat<Complex64>) -> Result<Vec<f64>> {
    check_dense(h)?;
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Decomposition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::build_state;
    use crate::basis::SectorBasis;
    use crate::hamiltonian::{build, ModelKind, ModelSpec};

    struct Diagonal(Vec<f64>);

    impl LinearOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
            for ((o, v), d) in y.iter_mut().zip(x).zip(&self.0) {
                *o = v * d;
            }
        }
    }

    #[test]
    fn one_by_one() {
        let m = Mat::from_fn(1, 1, |_, _| Complex64::new(2.5, 0.0));
        assert_eq!(dense_all(&m).unwrap().values, vec![2.5]);
        let r = lowest_k(&Diagonal(vec![2.5]), &LanczosOptions::new(1, 1e-10, 0)).unwrap();
        assert!((r.energies[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn resolves_degenerate_levels() {
        // triply degenerate bottom, then a doubly degenerate level
        let mut d: Vec<f64> = (0..400).map(|k| 1.0 + k as f64 * 0.01).collect();
        d[5] = -1.0;
        d[17] = -1.0;
        d[250] = -1.0;
        d[33] = -0.5;
        d[90] = -0.5;
        let r = lowest_k(&Diagonal(d), &LanczosOptions::new(6, 1e-10, 7)).unwrap();
        let expect = [-1.0, -1.0, -1.0, -0.5, -0.5, 1.0];
        for (e, x) in r.energies.iter().zip(expect) {
            assert!((e - x).abs() < 1e-9, "{:?}", r.energies);
        }
        for a in 0..6 {
            for b in 0..6 {
                let ip = r.vectors[a].inner(&r.vectors[b]).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let op = Diagonal(vec![1.0, 2.0]);
        assert!(lowest_k(&op, &LanczosOptions::new(3, 1e-10, 0)).is_err());
        assert!(lowest_k(&op, &LanczosOptions::new(0, 1e-10, 0)).is_err());
        assert!(lowest_k(&op, &LanczosOptions::new(1, 0.0, 0)).is_err());
        let big = Mat::<Complex64>::zeros(MAX_DENSE_DIM + 1, MAX_DENSE_DIM + 1);
        assert!(matches!(dense_all(&big), Err(Error::Size(_))));
    }

    #[test]
    fn exact_model_q2_n12() {
        let spec = ModelSpec::exact(2, 12).unwrap();
        let basis = SectorBasis::for_model(12, 2).unwrap();
        let h = build(&spec, &basis).unwrap();
        let r = lowest_k(&h, &LanczosOptions::new(8, 1e-10, spec.default_seed())).unwrap();
        assert!((r.energies[0] + 30.0).abs() < 1e-9);
        assert!(r.residuals.iter().all(|&x| x < 1e-10));
        let dense = dense_eigenvalues(&h.to_dense()).unwrap();
        for (a, b) in r.energies.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(r.ritz_trace.windows(2).all(|p| p[1] <= p[0] + 1e-12));

        let psi = build_state(12, 2, &basis).unwrap();
        let ov = r.vectors[0].inner(&psi).unwrap().norm_sqr();
        assert!(ov > 1.0 - 1e-8);
        assert!(r.gap().unwrap() > 1e-6);
    }

    #[test]
    fn whole_spectrum() {
        for (q, n, k) in [(2, 6, 20), (3, 9, 84), (4, 8, 28)] {
            let spec = ModelSpec::with_default_u(q, n, ModelKind::NnOpt).unwrap();
            let basis = SectorBasis::for_model(n, q).unwrap();
            let h = build(&spec, &basis).unwrap();
            let r = lowest_k(&h, &LanczosOptions::new(k, 1e-10, 3)).unwrap();
            let dense = dense_eigenvalues(&h.to_dense()).unwrap();
            assert_eq!(r.len(), dense.len());
            for (a, b) in r.energies.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn reproducible_with_seed() {
        let spec = ModelSpec::with_default_u(3, 12, ModelKind::NnnOpt).unwrap();
        let basis = SectorBasis::for_model(12, 3).unwrap();
        let h = build(&spec, &basis).unwrap();
        let opts = LanczosOptions::new(4, 1e-10, 11);
        let a = lowest_k(&h, &opts).unwrap();
        let b = lowest_k(&h, &opts).unwrap();
        assert_eq!(a.energies, b.energies);
    }
}
