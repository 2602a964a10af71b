use num_complex::Complex64;
use proptest::prelude::*;

use critchain::basis::{dimension, Configuration};
use critchain::hamiltonian::{build, RowGenerator};
use critchain::lattice::{w, LatticeGeometry};
use critchain::observables::{block_entropy, match_excited, overlap, DEFAULT_DEG_TOL};
use critchain::{EigenResult, ModelKind, ModelSpec, SectorBasis, StateVector};

fn chain() -> impl Strategy<Value = (u32, usize)> {
    (2u32..=4).prop_flat_map(|q| {
        (Just(q), 1usize..=(20 / q as usize)).prop_map(|(q, m)| (q, m * q as usize))
    })
}

fn small_model() -> impl Strategy<Value = ModelSpec> {
    (
        chain(),
        prop::sample::select(ModelKind::ALL.to_vec()),
        0.1f64..8.0,
    )
        .prop_filter("small", |((_, n), _, _)| *n <= 12)
        .prop_map(|((q, n), kind, u)| {
            let u = if kind.is_optimized() { u } else { 1.0 };
            ModelSpec::new(q, n, kind, u).unwrap()
        })
}

fn random_state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("nonzero", |v| {
        let mut s = StateVector::new(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect());
        (s.norm() > 1e-3).then(|| {
            s.normalize();
            s
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w_matches_quotient_form(n in 2usize..=64, a in 0usize..64, b in 0usize..64) {
        let (i, j) = (a % n + 1, b % n + 1);
        prop_assume!(i != j);
        let g = LatticeGeometry::new(n).unwrap();
        let (zi, zj) = (g.z(i as isize), g.z(j as isize));
        let direct = (zi + zj) / (zi - zj);
        let closed = w(i, j, n).unwrap();
        prop_assert!((closed - direct).norm() < 1e-12);
        prop_assert!(closed.re.abs() < 1e-15);
    }

    #[test]
    fn rank_and_unrank_are_inverse((q, n) in chain(), x in any::<u64>()) {
        let basis = SectorBasis::for_model(n, q).unwrap();
        let dim = dimension(n, q).unwrap();
        prop_assert_eq!(basis.dim(), dim);
        let index = x % dim;
        let c = basis.unrank(index).unwrap();
        prop_assert_eq!(c.particles() as usize, n / q as usize);
        prop_assert_eq!(basis.rank(c).unwrap(), index);
    }

    #[test]
    fn rows_conserve_particles(spec in small_model(), x in any::<u64>()) {
        let basis = SectorBasis::for_model(spec.n, spec.q).unwrap();
        let rows = RowGenerator::new(spec).unwrap();
        let rank = x % basis.dim();
        let bits = basis.unrank(rank).unwrap().bits();
        let mut cols = Vec::new();
        rows.off_diagonal_row(&basis, bits, rank, |c, _| cols.push(c));
        for c in cols {
            let target = basis.unrank(c).unwrap();
            prop_assert_eq!(target.particles(), Configuration(bits).particles());
            prop_assert_ne!(target.bits(), bits);
        }
    }

    #[test]
    fn assembled_operator_is_hermitian(spec in small_model()) {
        let basis = SectorBasis::for_model(spec.n, spec.q).unwrap();
        let h = build(&spec, &basis).unwrap();
        prop_assert!(h.hermiticity_error() < 1e-12);
        if spec.q == 2 {
            for a in 0..h.dim() {
                for (_, v) in h.row(a) {
                    prop_assert!(v.im == 0.0);
                }
            }
        }
    }

    #[test]
    fn overlap_is_symmetric(pair in (2usize..40).prop_flat_map(|d| (random_state(d), random_state(d)))) {
        let (a, b) = pair;
        prop_assert_eq!(overlap(&a, &b, 10).unwrap(), overlap(&b, &a, 10).unwrap());
    }

    #[test]
    fn entropy_is_gauge_invariant_and_bounded(v in random_state(70), phase in -3.2f64..3.2, l in 0usize..=8) {
        let basis = SectorBasis::for_model(8, 2).unwrap();
        let s = block_entropy(&v, &basis, l, false).unwrap();
        let mut rotated = v.clone();
        critchain::state::scale(rotated.as_mut_slice(), Complex64::from_polar(1.0, phase));
        prop_assert!((block_entropy(&rotated, &basis, l, false).unwrap() - s).abs() < 1e-12);
        // the Schmidt rank is at most the number of block states with an
        // admissible particle count
        let m = 4;
        let rank: u64 = (0..=l.min(m))
            .filter(|na| m - na <= 8 - l)
            .map(|na| critchain::basis::binomial(l, na).min(critchain::basis::binomial(8 - l, m - na)))
            .sum();
        prop_assert!(s >= -1e-12 && s <= (rank as f64).ln() + 1e-12);
    }

    #[test]
    fn matching_ignores_rotations_inside_multiplets(theta in -3.2f64..3.2, phi in -3.2f64..3.2, alpha in 0.0f64..1.5) {
        let unit = |k: usize| StateVector::basis_state(6, k);
        let mix = |a: usize, ca: f64, b: usize, cb: f64| {
            let mut v = StateVector::zeros(6);
            v.as_mut_slice()[a] = ca.into();
            v.as_mut_slice()[b] = cb.into();
            v
        };
        let (ca, sa) = (alpha.cos(), alpha.sin());
        // levels 0, 1, 1, 2 in both sets; the exact pair leaks into a state
        // outside the local window
        let mut local = vec![unit(0), unit(1), unit(2), unit(3)];
        let exact = vec![unit(0), mix(1, ca, 4, sa), unit(2), mix(3, ca, 5, sa)];
        let result = |vectors: Vec<StateVector>| EigenResult {
            energies: vec![0.0, 1.0, 1.0, 2.0],
            residuals: vec![0.0; 4],
            vectors,
            iterations: 0,
            ritz_trace: Vec::new(),
        };
        let before = match_excited(&result(local.clone()), &result(exact.clone()), DEFAULT_DEG_TOL, 6).unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let ph = Complex64::from_polar(1.0, phi);
        let (a, b) = (local[1].clone(), local[2].clone());
        local[1] = StateVector::new(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * c + y * s * ph).collect());
        local[2] = StateVector::new(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| -x * s * ph.conj() + y * c).collect());
        let after = match_excited(&result(local), &result(exact), DEFAULT_DEG_TOL, 6).unwrap();
        for (x, y) in before.overlaps.iter().zip(&after.overlaps) {
            prop_assert!((x.delta - y.delta).abs() < 1e-12);
        }
        prop_assert!((before.overlaps[1].delta - 1.0).abs() < 1e-12);
        prop_assert!((before.overlaps[2].delta - ca * ca).abs() < 1e-12);
    }
}
