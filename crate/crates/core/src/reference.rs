//! Published reference values for comparison runs.
//!
//! A reference file is CSV with the header `quantity,q,n,kind,state,value`.
//! Lines that are blank or start with `#` are ignored; `n` and `state` may be
//! empty when they do not apply.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonian::ModelKind;

pub const HEADER: &str = "quantity,q,n,kind,state,value";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    OptimalU,
    GroundDelta,
    GroundDeltaPerSite,
    ExcitedDelta,
    ExcitedDeltaPerSite,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::OptimalU => "optimal-u",
            Quantity::GroundDelta => "ground-delta",
            Quantity::GroundDeltaPerSite => "ground-delta-per-site",
            Quantity::ExcitedDelta => "excited-delta",
            Quantity::ExcitedDeltaPerSite => "excited-delta-per-site",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Quantity::OptimalU,
            Quantity::GroundDelta,
            Quantity::GroundDeltaPerSite,
            Quantity::ExcitedDelta,
            Quantity::ExcitedDeltaPerSite,
        ]
        .into_iter()
        .find(|q| q.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown quantity {s:?}")))
    }
}

/// Identifies one reference value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReferenceKey {
    pub quantity: Quantity,
    pub q: u32,
    pub n: Option<usize>,
    pub kind: ModelKind,
    /// 1-based state index (1 is the ground state).
    pub state: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub key: ReferenceKey,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReferenceTable {
    rows: Vec<ReferenceRow>,
}

fn optional<T: FromStr>(field: &str, what: &str, line: usize) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} {field:?}")))
}

impl ReferenceTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                if line != HEADER {
                    return Err(Error::Parse(format!(
                        "line {line_no}: expected header {HEADER:?}"
                    )));
                }
                seen_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!(
                    "line {line_no}: expected 6 fields, got {}",
                    f.len()
                )));
            }
            let quantity: Quantity = f[0].parse()?;
            let q = f[1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {line_no}: bad q {:?}", f[1])))?;
            let n = optional(f[2], "n", line_no)?;
            let kind: ModelKind = f[3].parse()?;
            let state = optional(f[4], "state", line_no)?;
            let value: f64 = f[5]
                .parse()
                .map_err(|_| Error::Parse(format!("line {line_no}: bad value {:?}", f[5])))?;
            if !value.is_finite() {
                return Err(Error::Parse(format!(
                    "line {line_no}: value must be finite"
                )));
            }
            rows.push(ReferenceRow {
                key: ReferenceKey {
                    quantity,
                    q,
                    n,
                    kind,
                    state,
                },
                value,
            });
        }
        if !seen_header {
            return Err(Error::Parse("missing header".into()));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ReferenceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &ReferenceKey) -> Option<f64> {
        self.rows.iter().find(|r| r.key == *key).map(|r| r.value)
    }

    pub fn extend(&mut self, other: ReferenceTable) {
        self.rows.extend(other.rows);
    }
}
