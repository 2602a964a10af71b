//! Ring geometry and the coupling coefficients of the long-range model.
//!
//! Site `j` (1-based) sits at `z_j = exp(2πi j / N)` on the unit circle. The
//! pair function `w(i, j) = (z_i + z_j) / (z_i - z_j)` depends only on the
//! ring displacement `d = (i - j) mod N` and is evaluated through the closed
//! form `-i / tan(π d / N)`, which stays accurate next to the antipode where
//! the direct quotient loses digits.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform lattice of `n` sites on the unit circle.
#[derive(Clone, Debug)]
pub struct LatticeGeometry {
    n: usize,
    z: Vec<Complex64>,
}

impl LatticeGeometry {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel(
                "lattice needs at least one site".into(),
            ));
        }
        let z = (1..=n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
            .collect();
        Ok(Self { n, z })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    /// Position of site `j` (1-based, taken cyclically).
    pub fn z(&self, j: isize) -> Complex64 {
        let idx = (j - 1).rem_euclid(self.n as isize) as usize;
        self.z[idx]
    }

    pub fn positions(&self) -> &[Complex64] {
        &self.z
    }
}

/// Hopping and density-density coefficients for one ordered pair of sites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingPair {
    /// Coefficient of `d_i^† d_j`.
    pub c1: Complex64,
    /// Coefficient of `n_i n_j`.
    pub c2: f64,
}

/// Displacement `(i - j) mod n` in `0..n`.
pub fn displacement(i: usize, j: usize, n: usize) -> usize {
    (i as isize - j as isize).rem_euclid(n as isize) as usize
}

/// Ring distance `min(d, n - d)` between two sites.
pub fn ring_distance(i: usize, j: usize, n: usize) -> usize {
    let d = displacement(i, j, n);
    d.min(n - d)
}

/// `w` as a function of the displacement `d = (i - j) mod n`, `d != 0`.
pub fn w_of_displacement(d: usize, n: usize) -> Complex64 {
    debug_assert!(!d.is_multiple_of(n));
    let d = d % n;
    if 2 * d == n {
        // tan(π/2) is not representable; the limit is exactly zero.
        return Complex64::new(0.0, 0.0);
    }
    if 2 * d > n {
        // w(N - d) = -w(d), bit for bit
        return -w_of_displacement(n - d, n);
    }
    let t = (PI * d as f64 / n as f64).tan();
    Complex64::new(0.0, -1.0 / t)
}

/// `w(i, j) = (z_i + z_j) / (z_i - z_j) = -i / tan(π (i - j) / N)`.
pub fn w(i: usize, j: usize, n: usize) -> Result<Complex64> {
    let d = displacement(i, j, n);
    if d == 0 {
        return Err(Error::Diagonal { i, j, n });
    }
    Ok(w_of_displacement(d, n))
}

fn coupling_from_w(q: u32, w: Complex64) -> CouplingPair {
    let q = q as f64;
    let w2 = w * w;
    CouplingPair {
        c1: (q - 2.0) * w - w2,
        c2: -0.5 * (q * q - q) * w2.re,
    }
}

/// Coefficients `C1 = (q-2) w - w^2` and `C2 = -(q^2 - q) w^2 / 2` of the pair `(i, j)`.
pub fn couplings(q: u32, i: usize, j: usize, n: usize) -> Result<CouplingPair> {
    Ok(coupling_from_w(q, w(i, j, n)?))
}

/// Couplings for every displacement `1..n` of a fixed `(q, n)`.
///
/// Entry `d - 1` holds the coefficients of any ordered pair `(i, j)` with
/// `(i - j) mod n = d`.
#[derive(Clone, Debug)]
pub struct CouplingTable {
    q: u32,
    n: usize,
    pairs: Vec<CouplingPair>,
}

impl CouplingTable {
    pub fn new(q: u32, n: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModel(format!("q = {q}, need q >= 2")));
        }
        if n < 2 {
            return Err(Error::InvalidModel(format!("N = {n}, need N >= 2")));
        }
        let pairs = (1..n)
            .map(|d| coupling_from_w(q, w_of_displacement(d, n)))
            .collect();
        Ok(Self { q, n, pairs })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    /// Coefficients for displacement `d` in `1..n`.
    #[inline]
    pub fn at(&self, d: usize) -> CouplingPair {
        self.pairs[d - 1]
    }

    /// Rows `(distance, C1, C2)` for distances `1..=n/2`.
    pub fn by_distance(&self) -> impl Iterator<Item = (usize, CouplingPair)> + '_ {
        (1..=self.n / 2).map(move |d| (d, self.at(d)))
    }
}
