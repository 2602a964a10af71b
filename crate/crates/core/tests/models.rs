use critchain::analytic::build_state;
use critchain::eigensolve::dense_eigenvalues;
use critchain::hamiltonian::dense::{build_dense, build_dense_ordered};
use critchain::hamiltonian::{build_operator, BuildOptions};
use critchain::optimize::{optimize_u, OptimizeOptions};
use critchain::{lowest_k, LanczosOptions, ModelKind, ModelSpec, SectorBasis};

#[test]
fn exact_ground_energies_match_closed_form() {
    for q in [2u32, 3, 4] {
        for n in (2 * q as usize..=18).step_by(q as usize) {
            let spec = ModelSpec::exact(q, n).unwrap();
            let basis = SectorBasis::for_model(n, q).unwrap();
            let h = build_operator(&spec, &basis, &BuildOptions::default()).unwrap();
            let r = lowest_k(&h, &LanczosOptions::new(2, 1e-9, spec.default_seed())).unwrap();
            let e0 = spec.exact_ground_energy();
            assert!(
                (r.energies[0] - e0).abs() <= 1e-8 * e0.abs(),
                "q={q} N={n}: {} vs {e0}",
                r.energies[0]
            );
            assert!(
                r.gap().unwrap() > 1e-6,
                "q={q} N={n}: ground state not unique"
            );
            let psi = build_state(n, q, &basis).unwrap();
            assert!(r.vectors[0].inner(&psi).unwrap().norm_sqr() > 1.0 - 1e-8);
        }
    }
}

#[test]
fn spectrum_is_invariant_under_cyclic_relabeling() {
    for (q, n) in [(2u32, 6usize), (2, 8), (3, 6), (3, 9), (4, 8), (2, 10)] {
        for kind in ModelKind::ALL {
            let spec = ModelSpec::with_default_u(q, n, kind).unwrap();
            let reference = dense_eigenvalues(&build_dense(&spec).unwrap()).unwrap();
            for shift in [1, n / 2, n - 1] {
                let order: Vec<usize> = (0..n).map(|k| (k + shift) % n + 1).collect();
                let shifted =
                    dense_eigenvalues(&build_dense_ordered(&spec, &order).unwrap()).unwrap();
                let worst = reference
                    .iter()
                    .zip(&shifted)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(worst < 1e-10, "q={q} N={n} {kind} shift {shift}: {worst:e}");
            }
        }
    }
}

#[test]
fn optimal_u_does_not_depend_on_chain_length() {
    let a = optimize_u(3, 12, ModelKind::NnOpt, &OptimizeOptions::default()).unwrap();
    let b = optimize_u(3, 15, ModelKind::NnOpt, &OptimizeOptions::default()).unwrap();
    assert!(!a.boundary && !b.boundary);
    assert!(
        (a.best_u - b.best_u).abs() < 0.05,
        "{} vs {}",
        a.best_u,
        b.best_u
    );
    for r in [&a, &b] {
        assert!(r.samples.iter().all(|s| s.1 <= r.best_delta));
        assert!(r.best_u > r.bracket.0 && r.best_u < r.bracket.1);
        for &(lo, hi) in &r.crossings {
            let at = |u: f64| r.samples.iter().find(|s| s.0 == u).unwrap().1;
            assert!((at(hi) - at(lo)).abs() > critchain::optimize::CROSSING_JUMP);
        }
    }
}
