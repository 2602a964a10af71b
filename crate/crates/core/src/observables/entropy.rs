use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{binomial, low_mask, SectorBasis};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Entanglement entropy (nats) of blocks of `L` consecutive sites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyCurve {
    pub sites: usize,
    /// `(L, S(L))`
    pub points: Vec<(usize, f64)>,
}

/// Entropy of the block of sites `1..=l` (or of sites `l+1..=N` when
/// `complement` is set; both must agree for a pure state).
///
/// The amplitudes are split by the number of particles inside the block; each
/// split is a `C(l, n_A) × C(N - l, M - n_A)` matrix whose squared singular
/// values are Schmidt weights.
pub fn block_entropy(
    v: &StateVector,
    basis: &SectorBasis,
    l: usize,
    complement: bool,
) -> Result<f64> {
    let n = basis.sites();
    let m = basis.particles();
    if v.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: v.len(),
        });
    }
    if l > n {
        return Err(Error::InvalidModel(format!(
            "block of {l} sites on a {n}-site chain"
        )));
    }
    let lo = n_a_range(l, n, m);
    let mut blocks: Vec<Mat<Complex64>> = lo
        .clone()
        .map(|na| Mat::zeros(binomial(l, na) as usize, binomial(n - l, m - na) as usize))
        .collect();
    let inner: Vec<SectorBasis> = lo
        .clone()
        .map(|na| SectorBasis::new(l, na))
        .collect::<Result<_>>()?;
    let outer: Vec<SectorBasis> = lo
        .clone()
        .map(|na| SectorBasis::new(n - l, m - na))
        .collect::<Result<_>>()?;
    let mask = low_mask(l);
    for (bits, amp) in basis.iter().zip(v.as_slice()) {
        let a = bits & mask;
        let b = if l == 64 { 0 } else { bits >> l };
        let na = a.count_ones() as usize;
        let k = na - lo.start;
        let r = inner[k].rank_unchecked(a) as usize;
        let c = outer[k].rank_unchecked(b) as usize;
        blocks[k][(r, c)] = *amp;
    }
    if complement {
        blocks = blocks
            .into_iter()
            .map(|b| b.transpose().to_owned())
            .collect();
    }
    let parts: Vec<f64> = blocks
        .par_iter()
        .map(|b| -> Result<f64> {
            if b.nrows() == 0 || b.ncols() == 0 {
                return Ok(0.0);
            }
            let sv = b.singular_values().map_err(|_| Error::Decomposition)?;
            Ok(sv
                .iter()
                .map(|s| s * s)
                .filter(|&p| p > 0.0)
                .map(|p| -p * p.ln())
                .sum())
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<f64>().max(0.0))
}

fn n_a_range(l: usize, n: usize, m: usize) -> std::ops::Range<usize> {
    let min = m.saturating_sub(n - l);
    let max = m.min(l);
    min..max + 1
}

/// `S(L)` for `L = 1..=⌈N/2⌉`.
pub fn entropy_curve(v: &StateVector, basis: &SectorBasis) -> Result<EntropyCurve> {
    let n = basis.sites();
    let points = (1..=n.div_ceil(2))
        .map(|l| Ok((l, block_entropy(v, basis, l, false)?)))
        .collect::<Result<_>>()?;
    Ok(EntropyCurve { sites: n, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::build_state;
    use crate::basis::Configuration;
    use crate::state::scale;

    #[test]
    fn product_state_has_zero_entropy() {
        let basis = SectorBasis::new(10, 4).unwrap();
        let k = basis
            .rank(Configuration::from_sites(&[1, 4, 5, 9]))
            .unwrap() as usize;
        let v = StateVector::basis_state(basis.len(), k);
        for (_, s) in entropy_curve(&v, &basis).unwrap().points {
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn bell_pair_gives_ln2() {
        // (|1> + |2>)/√2 on two sites, one particle
        let basis = SectorBasis::new(2, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = StateVector::new(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]);
        let s = block_entropy(&v, &basis, 1, false).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn complement_and_gauge() {
        for (n, q) in [(12, 2), (12, 3), (12, 4), (14, 2)] {
            let basis = SectorBasis::for_model(n, q).unwrap();
            let v = build_state(n, q, &basis).unwrap();
            let mut w = v.clone();
            scale(w.as_mut_slice(), Complex64::from_polar(1.0, 1.3));
            for l in 1..n {
                let a = block_entropy(&v, &basis, l, false).unwrap();
                let b = block_entropy(&v, &basis, l, true).unwrap();
                let c = block_entropy(&v, &basis, n - l, false).unwrap();
                let g = block_entropy(&w, &basis, l, false).unwrap();
                assert!((a - b).abs() < 1e-12);
                assert!((a - c).abs() < 1e-10, "n={n} l={l}: {a} vs {c}");
                assert!((a - g).abs() < 1e-12);
                // bounded by the log of the Schmidt rank
                let m = basis.particles();
                let rank: u64 = n_a_range(l, n, m)
                    .map(|na| binomial(l, na).min(binomial(n - l, m - na)))
                    .sum();
                assert!(a >= 0.0 && a <= (rank as f64).ln() + 1e-12);
            }
        }
    }
}
