//! Run configuration and its canonical one-line text form.
//!
//! The canonical form is `key=value` pairs joined by `;` in the fixed order
//! `q;n;kind;u;k;tol;seed;out;cache_dir`. Optional fields have empty values
//! when unset. Floats use the shortest representation that reads back to
//! the same value, so parsing and formatting are mutually inverse.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonian::{ModelKind, ModelSpec};

pub const DEFAULT_K: usize = 8;
pub const DEFAULT_TOL: f64 = 1e-10;

const KEYS: [&str; 9] = [
    "q",
    "n",
    "kind",
    "u",
    "k",
    "tol",
    "seed",
    "out",
    "cache_dir",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub q: u32,
    pub n: usize,
    pub kind: ModelKind,
    /// Overrides the tabulated density scale of optimized kinds.
    pub u: Option<f64>,
    pub k: usize,
    pub tol: f64,
    /// Defaults to a hash of the model.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(q: u32, n: usize, kind: ModelKind) -> Self {
        Self {
            q,
            n,
            kind,
            u: None,
            k: DEFAULT_K,
            tol: DEFAULT_TOL,
            seed: None,
            out: None,
            cache_dir: None,
        }
    }

    /// The model this configuration describes, with all checks applied.
    pub fn spec(&self) -> Result<ModelSpec> {
        match self.u {
            Some(u) => ModelSpec::new(self.q, self.n, self.kind, u),
            None => ModelSpec::with_default_u(self.q, self.n, self.kind),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(match self.seed {
            Some(s) => s,
            None => self.spec()?.default_seed(),
        })
    }

    /// Checks the model and that the solver settings and paths are usable.
    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.k == 0 {
            return Err(Error::InvalidModel("k must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        for p in [&self.out, &self.cache_dir].into_iter().flatten() {
            let s = p
                .to_str()
                .ok_or_else(|| Error::InvalidModel("paths must be valid UTF-8".into()))?;
            if s.is_empty() || s.contains([';', '\n', '\r']) {
                return Err(Error::InvalidModel(format!(
                    "path {s:?} cannot be represented"
                )));
            }
        }
        Ok(())
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn opt_path(v: &Option<PathBuf>) -> String {
    v.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q={};n={};kind={};u={};k={};tol={:?};seed={};out={};cache_dir={}",
            self.q,
            self.n,
            self.kind,
            self.u.map(|u| format!("{u:?}")).unwrap_or_default(),
            self.k,
            self.tol,
            opt(&self.seed),
            opt_path(&self.out),
            opt_path(&self.cache_dir),
        )
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("bad value {v:?} for {key}")))
}

impl FromStr for RunConfig {
    type Err = Error;

    /// Accepts the canonical form; fields may appear in any order and
    /// `u`, `k`, `tol`, `seed`, `out`, `cache_dir` may be omitted.
    fn from_str(s: &str) -> Result<Self> {
        let mut values: [Option<&str>; 9] = [None; 9];
        for part in s.trim().split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            let slot = KEYS
                .iter()
                .position(|k| *k == key.trim())
                .ok_or_else(|| Error::Parse(format!("unknown key {key:?}")))?;
            if values[slot].replace(value.trim()).is_some() {
                return Err(Error::Parse(format!("duplicate key {key:?}")));
            }
        }
        let get = |i: usize| values[i].filter(|v| !v.is_empty());
        let need = |i: usize| get(i).ok_or_else(|| Error::Parse(format!("missing {}", KEYS[i])));
        let cfg = RunConfig {
            q: parse_num("q", need(0)?)?,
            n: parse_num("n", need(1)?)?,
            kind: need(2)?.parse()?,
            u: get(3).map(|v| parse_num::<f64>("u", v)).transpose()?,
            k: get(4)
                .map(|v| parse_num("k", v))
                .transpose()?
                .unwrap_or(DEFAULT_K),
            tol: get(5)
                .map(|v| parse_num("tol", v))
                .transpose()?
                .unwrap_or(DEFAULT_TOL),
            seed: get(6).map(|v| parse_num("seed", v)).transpose()?,
            out: get(7).map(PathBuf::from),
            cache_dir: get(8).map(PathBuf::from),
        };
        cfg.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_example() {
        let mut c = RunConfig::new(3, 15, ModelKind::NnOpt);
        c.u = Some(1.7);
        c.seed = Some(42);
        c.out = Some("out/ground.csv".into());
        let s = c.canonical();
        assert_eq!(
            s,
            "q=3;n=15;kind=nn-opt;u=1.7;k=8;tol=1e-10;seed=42;out=out/ground.csv;cache_dir="
        );
        assert_eq!(s.parse::<RunConfig>().unwrap(), c);
        let minimal: RunConfig = "kind=nn;n=12;q=2".parse().unwrap();
        assert_eq!(minimal, RunConfig::new(2, 12, ModelKind::Nn));
    }

    #[test]
    fn rejects_invalid() {
        for s in [
            "q=3;n=16;kind=nn",
            "q=3;n=15",
            "q=3;n=15;kind=nn;k=0",
            "q=3;n=15;kind=nn;u=2",
            "q=3;n=15;kind=nn;q=3",
            "q=3;n=15;kind=nn;color=red",
            "q=x;n=15;kind=nn",
            "q=3;n=15;kind=nn;tol=-1",
            "garbage",
        ] {
            assert!(s.parse::<RunConfig>().is_err(), "{s}");
        }
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        let model = (2u32..=4, 1usize..=8, 0usize..5)
            .prop_map(|(q, m, kind)| (q, q as usize * m, ModelKind::ALL[kind]));
        (
            model,
            prop::option::of(0.01f64..100.0),
            1usize..20,
            1e-14f64..1e-2,
            prop::option::of(any::<u64>()),
            prop::option::of("[a-z0-9_/.]{1,12}"),
            prop::option::of("[a-z0-9_/.]{1,12}"),
        )
            .prop_map(|((q, n, kind), u, k, tol, seed, out, cache)| RunConfig {
                q,
                n,
                kind,
                u: if kind.is_optimized() {
                    u
                } else {
                    u.map(|_| 1.0)
                },
                k,
                tol,
                seed,
                out: out.map(PathBuf::from),
                cache_dir: cache.map(PathBuf::from),
            })
    }

    proptest! {
        #[test]
        fn canonical_round_trip(c in arb_config()) {
            let s = c.canonical();
            let back: RunConfig = s.parse().unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.canonical(), s);
        }
    }
}
