//! Binary eigenvector cache.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `CCH1`                            |
//! | 4      | 4    | `q` (u32)                               |
//! | 8      | 4    | `N` (u32)                               |
//! | 12     | 4    | kind tag (u32), see [`StateKind`]       |
//! | 16     | 8    | `U` (f64)                               |
//! | 24     | 8    | `D` (u64)                               |
//! | 32     | 8    | FNV-1a 64 of the payload bytes (u64)    |
//! | 40     | 16 D | payload: `(Re, Im)` f64 pairs           |

use std::hash::Hasher;
use std::path::Path;

use num_complex::Complex64;

use crate::basis::dimension;
use crate::error::{Error, Result};
use crate::hamiltonian::{ModelKind, ModelSpec};
use crate::state::StateVector;

pub const MAGIC: [u8; 4] = *b"CCH1";
pub const HEADER_LEN: usize = 40;
/// Tag of the analytic state; model kinds use [`ModelKind::tag`].
pub const ANALYTIC_TAG: u32 = 5;

/// Which vector a cache file holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    /// Ground state of a model Hamiltonian.
    Model(ModelKind),
    /// The analytic state.
    Analytic,
}

impl StateKind {
    pub fn tag(self) -> u32 {
        match self {
            StateKind::Model(k) => k.tag(),
            StateKind::Analytic => ANALYTIC_TAG,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        if tag == ANALYTIC_TAG {
            Some(StateKind::Analytic)
        } else {
            ModelKind::from_tag(tag).map(StateKind::Model)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorCacheFile {
    pub q: u32,
    pub n: u32,
    pub kind: StateKind,
    pub u: f64,
    pub vector: StateVector,
}

/// FNV-1a 64 of `bytes`.
pub fn checksum(bytes: &[u8]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4-byte field"))
}

fn read_u64(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8-byte field"))
}

impl VectorCacheFile {
    pub fn for_model(spec: &ModelSpec, vector: StateVector) -> Self {
        Self {
            q: spec.q,
            n: spec.n as u32,
            kind: StateKind::Model(spec.kind),
            u: spec.u,
            vector,
        }
    }

    pub fn analytic(q: u32, n: usize, vector: StateVector) -> Self {
        Self {
            q,
            n: n as u32,
            kind: StateKind::Analytic,
            u: 1.0,
            vector,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let d = self.vector.len();
        let mut payload = Vec::with_capacity(16 * d);
        for a in self.vector.as_slice() {
            payload.extend_from_slice(&a.re.to_le_bytes());
            payload.extend_from_slice(&a.im.to_le_bytes());
        }
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.q.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.kind.tag().to_le_bytes());
        out.extend_from_slice(&self.u.to_le_bytes());
        out.extend_from_slice(&(d as u64).to_le_bytes());
        out.extend_from_slice(&checksum(&payload).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    /// Parses and validates a cache image: magic, sector dimension, payload
    /// length, checksum and unit norm (within `1e-10`).
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Parse(format!(
                "cache file of {} bytes is shorter than its header",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Parse("bad cache magic".into()));
        }
        let q = read_u32(bytes, 4);
        let n = read_u32(bytes, 8);
        let tag = read_u32(bytes, 12);
        let u = f64::from_le_bytes(bytes[16..24].try_into().expect("8-byte field"));
        let d = read_u64(bytes, 24);
        let sum = read_u64(bytes, 32);
        let kind = StateKind::from_tag(tag)
            .ok_or_else(|| Error::Parse(format!("unknown kind tag {tag}")))?;
        if q < 2 || n as usize > crate::basis::MAX_SITES {
            return Err(Error::Parse(format!("invalid header q = {q}, N = {n}")));
        }
        let expected = dimension(n as usize, q).map_err(|e| Error::Parse(e.to_string()))?;
        if d != expected {
            return Err(Error::Parse(format!(
                "header dimension {d}, sector has {expected}"
            )));
        }
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::Parse(format!("invalid U = {u}")));
        }
        let payload = &bytes[HEADER_LEN..];
        if (payload.len() as u64) != d.saturating_mul(16) {
            return Err(Error::Parse(format!(
                "payload of {} bytes, expected {}",
                payload.len(),
                d.saturating_mul(16)
            )));
        }
        if checksum(payload) != sum {
            return Err(Error::Parse("checksum mismatch".into()));
        }
        let amps: Vec<Complex64> = payload
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        let vector = StateVector::new(amps);
        let norm = vector.norm();
        if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Parse(format!("stored vector has norm {norm}")));
        }
        Ok(Self {
            q,
            n,
            kind,
            u,
            vector,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.encode())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }

    /// File name identifying the vector, e.g. `q3_n15_nn-opt_u1.7.cch`.
    pub fn file_name(q: u32, n: usize, kind: StateKind, u: f64) -> String {
        let label = match kind {
            StateKind::Model(k) => k.name(),
            StateKind::Analytic => "analytic",
        };
        format!("q{q}_n{n}_{label}_u{u}.cch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::build_state;
    use crate::basis::SectorBasis;

    fn sample() -> VectorCacheFile {
        let basis = SectorBasis::for_model(9, 3).unwrap();
        VectorCacheFile::analytic(3, 9, build_state(9, 3, &basis).unwrap())
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let bytes = f.encode();
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 84);
        assert_eq!(&bytes[..4], b"CCH1");
        let g = VectorCacheFile::decode(&bytes).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.encode(), bytes);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.cch");
        f.save(&path).unwrap();
        assert_eq!(VectorCacheFile::load(&path).unwrap(), f);
    }

    #[test]
    fn header_fields_are_little_endian() {
        let spec = ModelSpec::with_default_u(3, 9, ModelKind::NnOpt).unwrap();
        let f = VectorCacheFile::for_model(&spec, sample().vector);
        let b = f.encode();
        assert_eq!(b[4..8], [3, 0, 0, 0]);
        assert_eq!(b[8..12], [9, 0, 0, 0]);
        assert_eq!(b[12..16], [3, 0, 0, 0]);
        assert_eq!(b[16..24], 1.70f64.to_le_bytes());
        assert_eq!(b[24..32], 84u64.to_le_bytes());
        assert_eq!(b[32..40], checksum(&b[40..]).to_le_bytes());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(checksum(b""), 0xcbf29ce484222325);
        assert_eq!(checksum(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = sample().encode();
        let mut flipped = bytes.clone();
        flipped[100] ^= 1;
        assert!(VectorCacheFile::decode(&flipped).is_err());
        assert!(VectorCacheFile::decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(VectorCacheFile::decode(&bytes[..10]).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(VectorCacheFile::decode(&magic).is_err());
        let mut tag = bytes.clone();
        tag[12] = 9;
        assert!(VectorCacheFile::decode(&tag).is_err());
    }

    #[test]
    fn unnormalized_payload_is_rejected() {
        let mut f = sample();
        crate::state::scale(f.vector.as_mut_slice(), Complex64::new(2.0, 0.0));
        assert!(VectorCacheFile::decode(&f.encode()).is_err());
    }
}
