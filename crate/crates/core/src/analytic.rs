//! The Jastrow-type analytic ground state
//! `ψ(n) ∝ δ_n χ_n Π_{i<j} (z_i - z_j)^{q n_i n_j - n_i - n_j}`.
//!
//! Amplitudes are evaluated in log space. For `i < j`,
//! `z_i - z_j = 2 sin(π (j - i) / N) · exp(iπ (2(i + j) - N) / (2N))`, so the
//! phase of every factor is an integer multiple of `π / (2N)` and is
//! accumulated exactly in integer arithmetic.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::basis::{BitIter, Configuration, SectorBasis};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// `ln |ψ|` and `arg ψ ∈ (-π, π]` of one amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAmplitude {
    pub logmag: f64,
    pub phase: f64,
}

impl LogAmplitude {
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.logmag.exp(), self.phase)
    }
}

/// `χ_n = (-1)^{Σ_j (j - 1) n_j}` with 1-based sites.
pub fn chi(c: Configuration) -> i8 {
    let exponent: usize = BitIter(c.bits()).sum();
    if exponent.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Per-`(N, q)` tables shared by all amplitude evaluations.
#[derive(Clone, Debug)]
pub struct AmplitudeEvaluator {
    n: usize,
    q: u32,
    m: usize,
    /// `ln(2 sin(π d / N))` for `d = 0..N` (entry 0 unused)
    log_chord: Vec<f64>,
}

impl AmplitudeEvaluator {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        crate::basis::dimension(n, q)?;
        if n > crate::basis::MAX_SITES {
            return Err(Error::Size(format!("{n} sites exceeds the 64-site limit")));
        }
        let log_chord = (0..n)
            .map(|d| {
                if d == 0 {
                    0.0
                } else {
                    (2.0 * (PI * d as f64 / n as f64).sin()).ln()
                }
            })
            .collect();
        Ok(Self {
            n,
            q,
            m: n / q as usize,
            log_chord,
        })
    }

    /// `None` for configurations outside the `N/q` sector (zero amplitude).
    pub fn amplitude(&self, c: Configuration) -> Option<LogAmplitude> {
        let bits = c.bits();
        if bits.count_ones() as usize != self.m || (self.n < 64 && bits >> self.n != 0) {
            return None;
        }
        let n = self.n as i64;
        let both = self.q as i64 - 2;
        let mut logmag = 0.0;
        // phase in units of π / (2N)
        let mut units: i64 = 0;
        for p in BitIter(bits) {
            for t in 0..self.n {
                if t == p {
                    continue;
                }
                let occupied = bits >> t & 1 == 1;
                // each doubly occupied pair is visited from its lower site only
                let e = match (occupied, t > p) {
                    (true, true) => both,
                    (true, false) => continue,
                    (false, _) => -1,
                };
                if e == 0 {
                    continue;
                }
                let (i, j) = if p < t {
                    (p + 1, t + 1)
                } else {
                    (t + 1, p + 1)
                };
                logmag += e as f64 * self.log_chord[j - i];
                units += e * (2 * (i + j) as i64 - n);
            }
        }
        if chi(c) < 0 {
            units += 2 * n;
        }
        let mut u = units.rem_euclid(4 * n);
        if u > 2 * n {
            u -= 4 * n;
        }
        Some(LogAmplitude {
            logmag,
            phase: u as f64 * PI / (2 * n) as f64,
        })
    }
}

/// Log-space amplitude of `c`; `None` outside the sector.
pub fn amplitude(c: Configuration, n: usize, q: u32) -> Result<Option<LogAmplitude>> {
    Ok(AmplitudeEvaluator::new(n, q)?.amplitude(c))
}

/// Normalized analytic state over `basis`, phase-fixed so that the first
/// nonzero amplitude is real and positive.
pub fn build_state(n: usize, q: u32, basis: &SectorBasis) -> Result<StateVector> {
    let eval = AmplitudeEvaluator::new(n, q)?;
    if basis.sites() != n || basis.particles() != n / q as usize {
        return Err(Error::InvalidModel(format!(
            "basis ({} sites, {} particles) is not the N/q sector of N = {n}, q = {q}",
            basis.sites(),
            basis.particles()
        )));
    }
    const CHUNK: usize = 4096;
    let mut logs = vec![
        LogAmplitude {
            logmag: 0.0,
            phase: 0.0
        };
        basis.len()
    ];
    logs.par_chunks_mut(CHUNK).enumerate().for_each(|(k, out)| {
        let configs = basis.iter_from((k * CHUNK) as u64);
        for (slot, bits) in out.iter_mut().zip(configs) {
            *slot = eval
                .amplitude(Configuration(bits))
                .expect("basis configurations are in sector");
        }
    });
    let max = logs
        .iter()
        .map(|a| a.logmag)
        .fold(f64::NEG_INFINITY, f64::max);
    let amps: Vec<Complex64> = logs
        .par_iter()
        .map(|a| Complex64::from_polar((a.logmag - max).exp(), a.phase))
        .collect();
    let mut v = StateVector::new(amps);
    v.normalize();
    v.fix_phase();
    Ok(v)
}
