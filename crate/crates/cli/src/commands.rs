//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use critchain::analytic::build_state;
use critchain::cache::{StateKind, VectorCacheFile};
use critchain::config::RunConfig;
use critchain::eigensolve::solver_bytes_estimate;
use critchain::hamiltonian::{build_operator, BuildOptions};
use critchain::lattice::CouplingTable;
use critchain::observables::{
    entropy_curve, g2_curve, match_excited, normalized_spectrum, overlap, OverlapReport,
    DEFAULT_DEG_TOL,
};
use critchain::optimize::{optimize_u, OptimizeOptions, ScanResult};
use critchain::reference::{Quantity, ReferenceKey, ReferenceTable};
use critchain::{
    lowest_k, EigenResult, Error, Hamiltonian, LanczosOptions, ModelKind, ModelSpec, SectorBasis,
    StateVector,
};

use crate::output::{emit, opt12, sig12, timestamp, Csv};
use crate::{Cli, Command, ModelArgs, ReferenceArg};

const BUNDLED_REFERENCE: [&str; 3] = [
    include_str!("../reference/optimal_u.csv"),
    include_str!("../reference/ground_overlaps.csv"),
    include_str!("../reference/excited_overlaps.csv"),
];

/// Process exit status for a failed command.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Resource { .. } | Error::Size(_) => 3,
                Error::NoConvergence { .. } => 4,
                Error::Io(_) | Error::Decomposition => 1,
                _ => 2,
            };
        }
    }
    1
}

pub fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number {x:?}"))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidModel(msg.into()).into()
}

struct Ctx {
    reproducible: bool,
    budget: u64,
}

pub fn run(cli: Cli) -> Result<()> {
    if !(cli.memory_gib > 0.0 && cli.memory_gib.is_finite()) {
        return Err(invalid(format!(
            "memory budget {} GiB must be positive",
            cli.memory_gib
        )));
    }
    let ctx = Ctx {
        reproducible: cli.reproducible,
        budget: (cli.memory_gib * (1u64 << 30) as f64) as u64,
    };
    match cli.command {
        Command::Coefficients(a) => coefficients(&ctx, a.q, a.n, a.out),
        Command::Ground { model, reference } => ground(&ctx, &model, &reference),
        Command::Entropy(m) => entropy(&ctx, &m),
        Command::G2(m) => g2(&ctx, &m),
        Command::Spectrum(m) => spectrum(&ctx, &m),
        Command::Excited { model, reference } => excited(&ctx, &model, &reference),
        Command::OptimizeU {
            model,
            reference,
            bracket,
            step,
            u_tol,
        } => optimize(&ctx, &model, &reference, bracket, step, u_tol),
        Command::AnalyticState {
            q,
            n,
            out,
            cache_dir,
        } => analytic_state(&ctx, q, n, out, cache_dir),
    }
}

fn check_q(q: u32) -> Result<()> {
    if !(2..=4).contains(&q) {
        return Err(invalid(format!("q = {q}: supported values are 2, 3 and 4")));
    }
    Ok(())
}

fn config(m: &ModelArgs, default_k: usize) -> Result<RunConfig> {
    check_q(m.q)?;
    let cfg = RunConfig {
        q: m.q,
        n: m.n,
        kind: m.kind,
        u: m.u,
        k: m.k.unwrap_or(default_k),
        tol: m.tol,
        seed: m.seed,
        out: m.out.clone(),
        cache_dir: m.cache_dir.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Operator for `spec`, refusing before allocation when the solver and
/// `extra_vectors` further state vectors would not fit the budget.
fn operator(
    ctx: &Ctx,
    spec: &ModelSpec,
    basis: &SectorBasis,
    opts: &LanczosOptions,
    extra_vectors: u64,
) -> Result<Hamiltonian> {
    let required = solver_bytes_estimate(basis.dim(), opts)
        .saturating_add(basis.dim().saturating_mul(16).saturating_mul(extra_vectors));
    if required > ctx.budget {
        return Err(Error::Resource {
            required,
            budget: ctx.budget,
        }
        .into());
    }
    let build = BuildOptions {
        memory_budget: ctx.budget - required,
        ..BuildOptions::default()
    };
    Ok(build_operator(spec, basis, &build)?)
}

fn solve(
    ctx: &Ctx,
    spec: &ModelSpec,
    basis: &SectorBasis,
    opts: &LanczosOptions,
    extra: u64,
) -> Result<EigenResult> {
    let h = operator(ctx, spec, basis, opts, extra)?;
    lowest_k(&h, opts).with_context(|| format!("solving {}", spec.canonical()))
}

fn cache_path(cfg: &RunConfig, spec: &ModelSpec) -> Option<PathBuf> {
    cfg.cache_dir.as_ref().map(|d| {
        d.join(VectorCacheFile::file_name(
            spec.q,
            spec.n,
            StateKind::Model(spec.kind),
            spec.u,
        ))
    })
}

fn load_cached(path: &Path, spec: &ModelSpec) -> Option<StateVector> {
    if !path.exists() {
        return None;
    }
    match VectorCacheFile::load(path) {
        Ok(f)
            if f.q == spec.q
                && f.n as usize == spec.n
                && f.kind == StateKind::Model(spec.kind)
                && f.u.to_bits() == spec.u.to_bits() =>
        {
            Some(f.vector)
        }
        Ok(_) => {
            eprintln!(
                "warning: {} holds a different model; recomputing",
                path.display()
            );
            None
        }
        Err(e) => {
            eprintln!("warning: ignoring {}: {e}", path.display());
            None
        }
    }
}

fn store(path: Option<&Path>, spec: &ModelSpec, v: StateVector) -> Result<StateVector> {
    let Some(path) = path else { return Ok(v) };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = VectorCacheFile::for_model(spec, v);
    file.save(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(file.vector)
}

/// Ground state of the configured model, from the cache when available.
fn ground_state(
    ctx: &Ctx,
    cfg: &RunConfig,
    spec: &ModelSpec,
    basis: &SectorBasis,
) -> Result<StateVector> {
    let path = cache_path(cfg, spec);
    if let Some(v) = path.as_deref().and_then(|p| load_cached(p, spec)) {
        return Ok(v);
    }
    let opts = LanczosOptions::new(cfg.k, cfg.tol, cfg.seed()?);
    let r = solve(ctx, spec, basis, &opts, 1)?;
    let v = r
        .vectors
        .into_iter()
        .next()
        .expect("at least one eigenpair");
    store(path.as_deref(), spec, v)
}

fn load_reference(arg: &ReferenceArg) -> Result<Option<ReferenceTable>> {
    let Some(path) = &arg.reference else {
        return Ok(None);
    };
    if path.as_os_str() == "bundled" {
        let mut table = ReferenceTable::default();
        for text in BUNDLED_REFERENCE {
            table.extend(ReferenceTable::parse(text).context("bundled reference table")?);
        }
        return Ok(Some(table));
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let table =
        ReferenceTable::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(table))
}

/// `reference, |value - reference|` for each pair, empty when unknown.
fn comparison(refs: &ReferenceTable, pairs: &[(ReferenceKey, f64)]) -> Vec<String> {
    pairs
        .iter()
        .flat_map(|(key, value)| {
            let r = refs.get(key);
            [opt12(r), opt12(r.map(|r| (value - r).abs()))]
        })
        .collect()
}

const COMPARISON_COLUMNS: [&str; 4] = [
    "reference_delta",
    "deviation_delta",
    "reference_delta_per_site",
    "deviation_delta_per_site",
];

fn overlap_keys(
    cfg: &RunConfig,
    state: Option<usize>,
    report: &OverlapReport,
    excited: bool,
) -> [(ReferenceKey, f64); 2] {
    let (d, ds) = if excited {
        (Quantity::ExcitedDelta, Quantity::ExcitedDeltaPerSite)
    } else {
        (Quantity::GroundDelta, Quantity::GroundDeltaPerSite)
    };
    let key = |quantity| ReferenceKey {
        quantity,
        q: cfg.q,
        n: Some(cfg.n),
        kind: cfg.kind,
        state,
    };
    [(key(d), report.delta), (key(ds), report.delta_per_site)]
}

fn columns<'a>(base: &[&'a str], with_reference: bool) -> Vec<&'a str> {
    let mut c = base.to_vec();
    if with_reference {
        c.extend(COMPARISON_COLUMNS);
    }
    c
}

fn coefficients(ctx: &Ctx, q: u32, n: usize, out: Option<PathBuf>) -> Result<()> {
    check_q(q)?;
    let cfg = RunConfig {
        out,
        ..RunConfig::new(q, n, ModelKind::Exact)
    };
    cfg.validate()?;
    let table = CouplingTable::new(q, n)?;
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &["distance", "re_c1", "im_c1", "c2"],
    );
    for (d, c) in table.by_distance() {
        csv.row(&[d.to_string(), sig12(c.c1.re), sig12(c.c1.im), sig12(c.c2)]);
    }
    emit(&csv.into_string(), cfg.out.as_deref())
}

fn ground(ctx: &Ctx, m: &ModelArgs, reference: &ReferenceArg) -> Result<()> {
    let cfg = config(m, 2)?;
    let refs = load_reference(reference)?;
    let spec = cfg.spec()?;
    let basis = SectorBasis::for_model(spec.n, spec.q)?;
    let opts = LanczosOptions::new(cfg.k, cfg.tol, cfg.seed()?);
    let mut r = solve(ctx, &spec, &basis, &opts, 1)?;
    let psi = build_state(spec.n, spec.q, &basis)?;
    let report = overlap(&r.vectors[0], &psi, spec.n)?;
    let gap = r.gap();
    let energy = r.ground_energy();
    store(
        cache_path(&cfg, &spec).as_deref(),
        &spec,
        r.vectors.swap_remove(0),
    )?;

    let base = [
        "q",
        "n",
        "kind",
        "u",
        "energy",
        "gap",
        "delta",
        "delta_per_site",
    ];
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &columns(&base, refs.is_some()),
    );
    let mut row = vec![
        spec.q.to_string(),
        spec.n.to_string(),
        spec.kind.to_string(),
        sig12(spec.u),
        sig12(energy),
        opt12(gap),
        sig12(report.delta),
        sig12(report.delta_per_site),
    ];
    if let Some(refs) = &refs {
        row.extend(comparison(refs, &overlap_keys(&cfg, None, &report, false)));
    }
    csv.row(&row);
    emit(&csv.into_string(), cfg.out.as_deref())
}

fn entropy(ctx: &Ctx, m: &ModelArgs) -> Result<()> {
    let cfg = config(m, 1)?;
    let spec = cfg.spec()?;
    let basis = SectorBasis::for_model(spec.n, spec.q)?;
    let v = ground_state(ctx, &cfg, &spec, &basis)?;
    let model = entropy_curve(&v, &basis)?;
    drop(v);
    let analytic = entropy_curve(&build_state(spec.n, spec.q, &basis)?, &basis)?;
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &["l", "s_model", "s_analytic", "abs_deviation"],
    );
    for (&(l, s), &(_, a)) in model.points.iter().zip(&analytic.points) {
        csv.row(&[l.to_string(), sig12(s), sig12(a), sig12((s - a).abs())]);
    }
    emit(&csv.into_string(), cfg.out.as_deref())
}

fn g2(ctx: &Ctx, m: &ModelArgs) -> Result<()> {
    let cfg = config(m, 1)?;
    let spec = cfg.spec()?;
    let basis = SectorBasis::for_model(spec.n, spec.q)?;
    let v = ground_state(ctx, &cfg, &spec, &basis)?;
    let model = g2_curve(&v, &basis)?;
    drop(v);
    let analytic = g2_curve(&build_state(spec.n, spec.q, &basis)?, &basis)?;
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &["d", "g2_model", "g2_analytic", "abs_deviation"],
    );
    for (&(d, g), &(_, a)) in model.points.iter().zip(&analytic.points) {
        csv.row(&[d.to_string(), sig12(g), sig12(a), sig12((g - a).abs())]);
    }
    emit(&csv.into_string(), cfg.out.as_deref())
}

fn spectrum(ctx: &Ctx, m: &ModelArgs) -> Result<()> {
    let cfg = config(m, critchain::config::DEFAULT_K)?;
    let spec = cfg.spec()?;
    let basis = SectorBasis::for_model(spec.n, spec.q)?;
    let opts = LanczosOptions::new(cfg.k, cfg.tol, cfg.seed()?);
    let r = solve(ctx, &spec, &basis, &opts, 0)?;
    let report = normalized_spectrum(&r.energies, DEFAULT_DEG_TOL)?;
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &["state", "energy", "normalized", "residual"],
    );
    for (i, ((e, x), res)) in report
        .raw
        .iter()
        .zip(&report.normalized)
        .zip(&r.residuals)
        .enumerate()
    {
        csv.row(&[(i + 1).to_string(), sig12(*e), sig12(*x), sig12(*res)]);
    }
    emit(&csv.into_string(), cfg.out.as_deref())
}

fn excited(ctx: &Ctx, m: &ModelArgs, reference: &ReferenceArg) -> Result<()> {
    let cfg = config(m, critchain::config::DEFAULT_K)?;
    let refs = load_reference(reference)?;
    let spec = cfg.spec()?;
    let exact = ModelSpec::exact(spec.q, spec.n)?;
    let basis = SectorBasis::for_model(spec.n, spec.q)?;
    let local_opts = LanczosOptions::new(cfg.k, cfg.tol, cfg.seed()?);
    let local = solve(ctx, &spec, &basis, &local_opts, cfg.k as u64)?;
    let exact_opts = LanczosOptions::new(
        cfg.k,
        cfg.tol,
        cfg.seed.unwrap_or_else(|| exact.default_seed()),
    );
    let reference_states = solve(ctx, &exact, &basis, &exact_opts, cfg.k as u64)?;
    let matched = match_excited(&local, &reference_states, DEFAULT_DEG_TOL, spec.n)?;

    let base = [
        "state",
        "exact_state",
        "energy_local",
        "energy_exact",
        "delta",
        "delta_per_site",
    ];
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &columns(&base, refs.is_some()),
    );
    for (i, (report, partner)) in matched.overlaps.iter().zip(&matched.partners).enumerate() {
        let exact_state = if partner.len() == 1 {
            partner.end.to_string()
        } else {
            format!("{}-{}", partner.start + 1, partner.end)
        };
        let mut row = vec![
            (i + 1).to_string(),
            exact_state,
            sig12(local.energies[i]),
            sig12(reference_states.energies[partner.start]),
            sig12(report.delta),
            sig12(report.delta_per_site),
        ];
        if let Some(refs) = &refs {
            row.extend(comparison(
                refs,
                &overlap_keys(&cfg, Some(i + 1), report, true),
            ));
        }
        csv.row(&row);
    }
    for w in &matched.warnings {
        eprintln!("warning: {w}");
        csv.comment(&format!("warning: {w}"));
    }
    emit(&csv.into_string(), cfg.out.as_deref())
}

#[derive(Serialize)]
struct Comparison {
    value: f64,
    abs_deviation: f64,
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    config: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated: Option<u64>,
    coarse_step: f64,
    u_tol: f64,
    result: &'a ScanResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<Comparison>,
}

fn optimize(
    ctx: &Ctx,
    m: &ModelArgs,
    reference: &ReferenceArg,
    bracket: (f64, f64),
    step: f64,
    u_tol: f64,
) -> Result<()> {
    if m.u.is_some() {
        return Err(invalid("optimize-u scans U; --u does not apply"));
    }
    if !m.kind.is_optimized() {
        return Err(invalid(format!(
            "{} has no free U; use nn-opt or nnn-opt",
            m.kind
        )));
    }
    let cfg = config(m, 1)?;
    if cfg.k != 1 {
        return Err(invalid(
            "optimize-u follows the ground state only; --k must be 1",
        ));
    }
    let refs = load_reference(reference)?;
    let spec = cfg.spec()?;
    let dim = critchain::basis::dimension(spec.n, spec.q)?;
    let required = solver_bytes_estimate(dim, &LanczosOptions::new(1, cfg.tol, 0))
        .saturating_add(dim.saturating_mul(16));
    if required > ctx.budget {
        return Err(Error::Resource {
            required,
            budget: ctx.budget,
        }
        .into());
    }
    let opts = OptimizeOptions {
        bracket,
        coarse_step: step,
        tol: u_tol,
        solver_tol: cfg.tol,
        seed: cfg.seed,
    };
    let result = optimize_u(spec.q, spec.n, spec.kind, &opts)?;
    let reference = refs.as_ref().and_then(|t| {
        let key = ReferenceKey {
            quantity: Quantity::OptimalU,
            q: spec.q,
            n: None,
            kind: spec.kind,
            state: None,
        };
        t.get(&key).map(|value| Comparison {
            value,
            abs_deviation: (result.best_u - value).abs(),
        })
    });
    if result.boundary {
        eprintln!("warning: best grid point lies on the bracket edge; consider widening --bracket");
    }
    let report = OptimizeReport {
        config: cfg.canonical(),
        generated: timestamp(ctx.reproducible),
        coarse_step: step,
        u_tol,
        result: &result,
        reference,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(&text, cfg.out.as_deref())
}

fn analytic_state(
    ctx: &Ctx,
    q: u32,
    n: usize,
    out: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
) -> Result<()> {
    check_q(q)?;
    let cfg = RunConfig {
        out,
        cache_dir,
        ..RunConfig::new(q, n, ModelKind::Exact)
    };
    cfg.validate()?;
    let target = match (&cfg.out, &cfg.cache_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join(VectorCacheFile::file_name(q, n, StateKind::Analytic, 1.0)),
        (None, None) => return Err(invalid("analytic-state needs --out or a cache directory")),
    };
    let dim = critchain::basis::dimension(n, q)?;
    let required = dim.saturating_mul(16 * 2);
    if required > ctx.budget {
        return Err(Error::Resource {
            required,
            budget: ctx.budget,
        }
        .into());
    }
    let basis = SectorBasis::for_model(n, q)?;
    let file = VectorCacheFile::analytic(q, n, build_state(n, q, &basis)?);
    if let Some(dir) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    file.save(&target)
        .with_context(|| format!("writing {}", target.display()))?;
    let mut csv = Csv::new(
        &cfg.canonical(),
        timestamp(ctx.reproducible),
        &["q", "n", "dim", "file"],
    );
    csv.row(&[
        q.to_string(),
        n.to_string(),
        dim.to_string(),
        target.display().to_string(),
    ]);
    emit(&csv.into_string(), None)
}
