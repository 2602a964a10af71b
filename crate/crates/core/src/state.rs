//! Amplitude vectors over a sector basis and the reductions used on them.
//!
//! Reductions are summed over fixed-size chunks and the partial sums are
//! combined in order, so results do not depend on the rayon thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const CHUNK: usize = 1 << 13;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// Unit vector along basis index `k`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(dot(&self.0, &other.0))
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            scale(&mut self.0, Complex64::new(1.0 / n, 0.0));
        }
    }

    /// Multiplies by a global phase so the first nonzero amplitude is real
    /// and positive.
    pub fn fix_phase(&mut self) {
        if let Some(first) = self.0.iter().find(|a| a.norm_sqr() > 0.0).copied() {
            let phase = first.conj() / first.norm();
            scale(&mut self.0, phase);
        }
    }
}

impl From<Vec<Complex64>> for StateVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// `Σ conj(a_i) b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let partial: Vec<Complex64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.conj() * v).sum())
        .collect();
    partial.into_iter().sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|x| x.iter().map(|u| u.norm_sqr()).sum())
        .collect();
    partial.into_iter().sum::<f64>().sqrt()
}

/// `y += alpha x`.
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(yc, xc)| {
            for (u, v) in yc.iter_mut().zip(xc) {
                *u += alpha * v;
            }
        });
}

pub fn scale(x: &mut [Complex64], alpha: Complex64) {
    x.par_chunks_mut(CHUNK)
        .for_each(|c| c.iter_mut().for_each(|u| *u *= alpha));
}
