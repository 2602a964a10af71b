//! Choice of the density-density scale `U` of the optimized local models.
//!
//! `Δ(U)` is the overlap of the model ground state with the analytic state. A
//! coarse grid locates the best sample; golden-section search then refines
//! the maximum inside the neighbouring grid cells.

use serde::Serialize;

use crate::analytic::build_state;
use crate::basis::SectorBasis;
use crate::eigensolve::{lowest_k, LanczosOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_operator, BuildOptions, Hamiltonian, ModelKind, ModelSpec};
use crate::state::StateVector;

/// Jump in `Δ` between neighbouring grid points reported as a level crossing.
pub const CROSSING_JUMP: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub struct OptimizeOptions {
    pub bracket: (f64, f64),
    pub coarse_step: f64,
    /// Final width of the golden-section interval.
    pub tol: f64,
    /// Residual tolerance of each ground-state solve.
    pub solver_tol: f64,
    pub seed: Option<u64>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            bracket: (0.1, 8.0),
            coarse_step: 0.1,
            tol: 1e-3,
            solver_tol: 1e-9,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub best_u: f64,
    pub best_delta: f64,
    /// Every evaluated `(U, Δ)`, grid points first.
    pub samples: Vec<(f64, f64)>,
    pub bracket: (f64, f64),
    /// The best grid point lies on the bracket edge.
    pub boundary: bool,
    /// Neighbouring grid points `(U_a, U_b)` whose overlaps jump by more than
    /// [`CROSSING_JUMP`].
    pub crossings: Vec<(f64, f64)>,
}

struct Objective {
    h: Hamiltonian,
    psi: StateVector,
    solver: LanczosOptions,
    samples: Vec<(f64, f64)>,
}

impl Objective {
    fn eval(&mut self, u: f64) -> Result<f64> {
        self.h.set_density_scale(u);
        let r = lowest_k(&self.h, &self.solver)?;
        let d = r.vectors[0].inner(&self.psi)?.norm_sqr();
        self.samples.push((u, d));
        Ok(d)
    }
}

/// Maximizes `Δ(U)` for an optimized kind on an `n`-site chain.
pub fn optimize_u(q: u32, n: usize, kind: ModelKind, opts: &OptimizeOptions) -> Result<ScanResult> {
    if !kind.is_optimized() {
        return Err(Error::InvalidModel(format!("{kind} has no free U")));
    }
    let (lo, hi) = opts.bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "bracket ({lo}, {hi}) must satisfy 0 < lo < hi"
        )));
    }
    if !(opts.coarse_step > 0.0 && opts.tol > 0.0) {
        return Err(Error::InvalidModel(
            "step and tolerance must be positive".into(),
        ));
    }
    let spec = ModelSpec::new(q, n, kind, 1.0)?;
    let basis = SectorBasis::for_model(n, q)?;
    let h = build_operator(&spec, &basis, &BuildOptions::default())?;
    let psi = build_state(n, q, &basis)?;
    let solver = LanczosOptions {
        max_rounds: 1,
        ..LanczosOptions::new(
            1,
            opts.solver_tol,
            opts.seed.unwrap_or_else(|| spec.default_seed()),
        )
    };
    let mut f = Objective {
        h,
        psi,
        solver,
        samples: Vec::new(),
    };

    let steps = ((hi - lo) / opts.coarse_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo + i as f64 * opts.coarse_step)
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for &u in &grid {
        values.push(f.eval(u)?);
    }
    let crossings = grid
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| (v[1] - v[0]).abs() > CROSSING_JUMP)
        .map(|(g, _)| (g[0], g[1]))
        .collect();
    let ib = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    let boundary = ib == 0 || ib == grid.len() - 1;

    // golden-section on the two grid cells around the best point
    let mut a = grid[ib.saturating_sub(1)];
    let mut b = grid[(ib + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f.eval(c)?, f.eval(d)?);
    while b - a > opts.tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f.eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f.eval(d)?;
        }
    }
    let (best_u, best_delta) = f
        .samples
        .iter()
        .copied()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("samples are nonempty");
    Ok(ScanResult {
        best_u,
        best_delta,
        samples: f.samples,
        bracket: (lo, hi),
        boundary,
        crossings,
    })
}
