use serde::Serialize;

use crate::error::Result;
use crate::state::StateVector;

/// Fidelity `Δ = |⟨a|b⟩|²` and its per-site root `Δ^{1/N}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    pub delta: f64,
    pub delta_per_site: f64,
}

impl OverlapReport {
    pub fn new(delta: f64, sites: usize) -> Self {
        Self {
            delta,
            delta_per_site: delta.powf(1.0 / sites as f64),
        }
    }
}

/// `|⟨a|b⟩|²` for normalized states on an `sites`-site chain.
pub fn overlap(a: &StateVector, b: &StateVector, sites: usize) -> Result<OverlapReport> {
    let ip = a.inner(b)?;
    Ok(OverlapReport::new(ip.norm_sqr(), sites))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use num_complex::Complex64;

    fn state(v: &[(f64, f64)]) -> StateVector {
        let mut s = StateVector::new(v.iter().map(|&(r, i)| Complex64::new(r, i)).collect());
        s.normalize();
        s
    }

    #[test]
    fn identical_and_symmetric() {
        let a = state(&[(1.0, 0.5), (0.0, -2.0), (0.3, 0.1)]);
        let b = state(&[(0.2, 0.0), (1.0, 1.0), (-0.5, 0.7)]);
        assert!((overlap(&a, &a, 3).unwrap().delta - 1.0).abs() < 1e-15);
        assert_eq!(overlap(&a, &b, 3).unwrap(), overlap(&b, &a, 3).unwrap());
        let r = overlap(&a, &b, 3).unwrap();
        assert!(r.delta_per_site >= r.delta);
    }

    #[test]
    fn phase_independent() {
        let a = state(&[(1.0, 0.5), (0.0, -2.0)]);
        let b = state(&[(0.3, 0.0), (1.0, 0.2)]);
        let mut c = b.clone();
        crate::state::scale(c.as_mut_slice(), Complex64::from_polar(1.0, 0.7));
        let (x, y) = (
            overlap(&a, &b, 2).unwrap().delta,
            overlap(&a, &c, 2).unwrap().delta,
        );
        assert!((x - y).abs() < 1e-15);
    }

    #[test]
    fn mismatch() {
        let a = state(&[(1.0, 0.0)]);
        let b = state(&[(1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(
            overlap(&a, &b, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
