use std::ops::Range;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::OverlapReport;
use crate::eigensolve::EigenResult;
use crate::error::{Error, Result};
use crate::state::dot;

/// Relative degeneracy tolerance: levels closer than this fraction of the
/// spectral window `E_max - E_0` belong to the same multiplet.
pub const DEFAULT_DEG_TOL: f64 = 1e-7;

/// Spectrum shifted so `E_0 = 0` and scaled so the first excited level is 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

fn window_tolerance(energies: &[f64], deg_tol: f64) -> f64 {
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    deg_tol * (hi - lo)
}

/// `x ↦ (x - E_0) / (E_1 - E_0)` with `E_1` the lowest level outside the
/// ground multiplet.
pub fn normalized_spectrum(energies: &[f64], deg_tol: f64) -> Result<SpectrumReport> {
    if energies.len() < 2 {
        return Err(Error::DegenerateSpectrum(format!(
            "{} energies, need at least 2",
            energies.len()
        )));
    }
    let e0 = energies[0];
    let tol = window_tolerance(energies, deg_tol);
    let e1 = energies
        .iter()
        .copied()
        .find(|&e| e - e0 > tol)
        .ok_or_else(|| Error::DegenerateSpectrum("all energies coincide".into()))?;
    let scale = e1 - e0;
    Ok(SpectrumReport {
        raw: energies.to_vec(),
        normalized: energies.iter().map(|e| (e - e0) / scale).collect(),
    })
}

/// Consecutive index ranges of (numerically) degenerate levels of an
/// ascending spectrum.
pub fn multiplets(energies: &[f64], deg_tol: f64) -> Vec<Range<usize>> {
    let tol = window_tolerance(energies, deg_tol);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=energies.len() {
        if i == energies.len() || energies[i] - energies[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// State-by-state overlaps between two sets of eigenstates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcitedMatch {
    /// One report per local state, ground state first.
    pub overlaps: Vec<OverlapReport>,
    /// Exact multiplet (0-based state indices) matched to each local state.
    pub partners: Vec<Range<usize>>,
    /// Matches that are ambiguous or pair multiplets of different size.
    pub warnings: Vec<String>,
}

fn states(r: &Range<usize>) -> String {
    if r.len() == 1 {
        format!("state {}", r.start + 1)
    } else {
        format!("states {}..={}", r.start + 1, r.end)
    }
}

/// Matches every eigenstate of `local` to the eigenstates of `exact`.
///
/// Both spectra are split into multiplets. Each local multiplet `A` is paired
/// with the exact multiplet `B` carrying the largest weight
/// `Σ_{a∈A, b∈B} |⟨local_a|exact_b⟩|²`, so levels whose order differs between
/// the two models are still compared with their counterparts. The states of
/// `A` receive the squared singular values of the cross-Gram block
/// `G_ab = ⟨local_a|exact_b⟩`, in descending order (zero when `B` is smaller
/// than `A`). For nondegenerate levels this is `|⟨local_a|exact_b⟩|²`; for a
/// nondegenerate local level facing an exact multiplet it is the weight of
/// the local state inside that eigenspace. Neither weights nor singular
/// values depend on the basis chosen inside a degenerate eigenspace.
pub fn match_excited(
    local: &EigenResult,
    exact: &EigenResult,
    deg_tol: f64,
    sites: usize,
) -> Result<ExcitedMatch> {
    if local.is_empty() || exact.is_empty() {
        return Err(Error::InvalidModel(
            "matching needs at least one state on each side".into(),
        ));
    }
    let dim = local.vectors[0].len();
    if let Some(v) = local
        .vectors
        .iter()
        .chain(&exact.vectors)
        .find(|v| v.len() != dim)
    {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let la = multiplets(&local.energies, deg_tol);
    let lb = multiplets(&exact.energies, deg_tol);
    let g = Mat::<Complex64>::from_fn(local.len(), exact.len(), |a, b| {
        dot(local.vectors[a].as_slice(), exact.vectors[b].as_slice())
    });

    let mut overlaps = Vec::with_capacity(local.len());
    let mut partners = Vec::with_capacity(local.len());
    let mut warnings = Vec::new();
    let mut used: Vec<Option<Range<usize>>> = vec![None; lb.len()];
    for a in &la {
        let weight = |b: &Range<usize>| -> f64 {
            a.clone()
                .flat_map(|i| b.clone().map(move |j| (i, j)))
                .map(|(i, j)| g[(i, j)].norm_sqr())
                .sum()
        };
        let (ib, w) = lb.iter().enumerate().map(|(ib, b)| (ib, weight(b))).fold(
            (0, f64::NEG_INFINITY),
            |best, x| if x.1 > best.1 { x } else { best },
        );
        let b = lb[ib].clone();
        if w < 0.5 * a.len() as f64 {
            warnings.push(format!("local {} overlap weakly with every retrieved exact level (best weight {w:.3} with exact {})", states(a), states(&b)));
        }
        if a.len() != b.len() {
            warnings.push(format!(
                "multiplet structure differs: local {} matched to exact {}",
                states(a),
                states(&b)
            ));
        }
        if let Some(prev) = &used[ib] {
            warnings.push(format!(
                "exact {} matched by local {} and {}",
                states(&b),
                states(prev),
                states(a)
            ));
        }
        used[ib] = Some(a.clone());

        let block = g
            .subrows(a.start, a.len())
            .subcols(b.start, b.len())
            .to_owned();
        let mut sv: Vec<f64> = if block.nrows() == 1 && block.ncols() == 1 {
            vec![block[(0, 0)].norm()]
        } else {
            block.singular_values().map_err(|_| Error::Decomposition)?
        };
        sv.sort_by(|x, y| y.total_cmp(x));
        sv.resize(a.len(), 0.0);
        overlaps.extend(
            sv.into_iter()
                .map(|x| OverlapReport::new((x * x).min(1.0), sites)),
        );
        partners.extend(a.clone().map(|_| b.clone()));
    }
    Ok(ExcitedMatch {
        overlaps,
        partners,
        warnings,
    })
}
