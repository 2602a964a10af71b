use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{BitIter, SectorBasis};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Translation-averaged density correlation `g2(d)` for `d = 0..=N/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub sites: usize,
    /// `(d, g2(d))`
    pub points: Vec<(usize, f64)>,
}

/// `G(i, j) = ⟨n_i n_j⟩ - ⟨n_i⟩⟨n_j⟩` as a row-major `N × N` matrix
/// (0-based sites).
pub fn pair_correlation_matrix(v: &StateVector, basis: &SectorBasis) -> Result<Vec<f64>> {
    if v.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: v.len(),
        });
    }
    let n = basis.sites();
    const CHUNK: usize = 8192;
    let partial: Vec<Vec<f64>> = v
        .as_slice()
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(k, amps)| {
            let mut acc = vec![0.0; n * n];
            for (bits, a) in basis.iter_from((k * CHUNK) as u64).zip(amps) {
                let p = a.norm_sqr();
                for i in BitIter(bits) {
                    for j in BitIter(bits) {
                        acc[i * n + j] += p;
                    }
                }
            }
            acc
        })
        .collect();
    let mut pair = vec![0.0; n * n];
    for p in &partial {
        for (x, y) in pair.iter_mut().zip(p) {
            *x += y;
        }
    }
    let density: Vec<f64> = (0..n).map(|i| pair[i * n + i]).collect();
    for i in 0..n {
        for j in 0..n {
            pair[i * n + j] -= density[i] * density[j];
        }
    }
    Ok(pair)
}

/// `g2(d) = (1/N) Σ_i G(i, i + d)`.
pub fn g2_curve(v: &StateVector, basis: &SectorBasis) -> Result<CorrelationCurve> {
    let n = basis.sites();
    let g = pair_correlation_matrix(v, basis)?;
    let points = (0..=n / 2)
        .map(|d| {
            (
                d,
                (0..n).map(|i| g[i * n + (i + d) % n]).sum::<f64>() / n as f64,
            )
        })
        .collect();
    Ok(CorrelationCurve { sites: n, points })
}
