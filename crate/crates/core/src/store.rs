//! On-disk cache of Frobenius traces keyed by `(A, B, p)`.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "DSTABTRC" | version u8 | height_bound u64 | prime_bound u64 | count u64
//! count × (A i64, B i64, p u32, a_p i32), sorted by key
//! checksum u64 (first 8 bytes of SHA-256 over the record block)
//! ```

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::primes::primes_up_to;
use crate::traces::{hasse_bound, TraceContext, TraceSource};

pub const MAGIC: &[u8; 8] = b"DSTABTRC";
pub const VERSION: u8 = 1;
const RECORD_LEN: usize = 24;
const HEADER_LEN: usize = 8 + 1 + 8 * 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheMeta {
    pub height_bound: u64,
    pub prime_bound: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceCache {
    pub meta: CacheMeta,
    entries: BTreeMap<(i64, i64, u32), i32>,
}

impl TraceCache {
    pub fn new(meta: CacheMeta) -> Self {
        Self {
            meta,
            entries: BTreeMap::new(),
        }
    }

    /// Traces of every curve in `curves` at primes `5 <= p <= prime_bound`.
    pub fn build(curves: &[CurveModel], height_bound: u64, prime_bound: u64) -> Result<Self> {
        let ctx = TraceContext::new(prime_bound);
        let rows: Vec<((i64, i64, u32), i32)> = curves
            .par_iter()
            .flat_map_iter(|c| {
                let ctx = &ctx;
                (0..ctx.primes().len()).filter_map(move |i| {
                    ctx.trace_at(c, i)
                        .map(|t| ((c.a(), c.b(), ctx.primes()[i] as u32), t as i32))
                })
            })
            .collect();
        let mut cache = Self::new(CacheMeta {
            height_bound,
            prime_bound,
        });
        for (key, a_p) in rows {
            cache.insert(key.0, key.1, key.2, a_p)?;
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, a: i64, b: i64, p: u32) -> Option<i32> {
        self.entries.get(&(a, b, p)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64, u32), i32)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Rejects values outside the Hasse interval and conflicting rewrites.
    pub fn insert(&mut self, a: i64, b: i64, p: u32, a_p: i32) -> Result<()> {
        if (a_p as i64).abs() > hasse_bound(p as u64) {
            return Err(Error::OutOfHasseRange {
                p: p as u64,
                a: a_p as i64,
            });
        }
        match self.entries.get(&(a, b, p)) {
            Some(&old) if old != a_p => Err(Error::ConflictingEntry {
                a,
                b,
                p,
                left: old,
                right: a_p,
            }),
            _ => {
                self.entries.insert((a, b, p), a_p);
                Ok(())
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.entries.len() * RECORD_LEN + 8);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.meta.height_bound.to_le_bytes());
        out.extend_from_slice(&self.meta.prime_bound.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        let start = out.len();
        for (&(a, b, p), &a_p) in &self.entries {
            out.extend_from_slice(&a.to_le_bytes());
            out.extend_from_slice(&b.to_le_bytes());
            out.extend_from_slice(&p.to_le_bytes());
            out.extend_from_slice(&a_p.to_le_bytes());
        }
        let sum = checksum(&out[start..]);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |msg: &str| Error::CorruptFile(msg.to_string());
        if bytes.len() < HEADER_LEN + 8 {
            return Err(corrupt("file too short"));
        }
        if &bytes[..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        if bytes[8] != VERSION {
            return Err(corrupt(&format!("unsupported version {}", bytes[8])));
        }
        let u64_at = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let meta = CacheMeta {
            height_bound: u64_at(9),
            prime_bound: u64_at(17),
        };
        let count = u64_at(25) as usize;
        let body_len = count
            .checked_mul(RECORD_LEN)
            .filter(|&n| n.checked_add(HEADER_LEN + 8) == Some(bytes.len()))
            .ok_or_else(|| corrupt("record count does not match file length"))?;
        let body = &bytes[HEADER_LEN..HEADER_LEN + body_len];
        if checksum(body) != u64_at(HEADER_LEN + body_len) {
            return Err(corrupt("checksum mismatch"));
        }
        let mut cache = Self::new(meta);
        let mut prev = None;
        for rec in body.chunks_exact(RECORD_LEN) {
            let a = i64::from_le_bytes(rec[0..8].try_into().unwrap());
            let b = i64::from_le_bytes(rec[8..16].try_into().unwrap());
            let p = u32::from_le_bytes(rec[16..20].try_into().unwrap());
            let a_p = i32::from_le_bytes(rec[20..24].try_into().unwrap());
            if prev.is_some_and(|k| k >= (a, b, p)) {
                return Err(corrupt("records not strictly sorted"));
            }
            prev = Some((a, b, p));
            cache
                .insert(a, b, p, a_p)
                .map_err(|e| Error::CorruptFile(e.to_string()))?;
        }
        Ok(cache)
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_bytes())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Union of entries; metadata takes the larger of each bound.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.meta = CacheMeta {
            height_bound: self.meta.height_bound.max(other.meta.height_bound),
            prime_bound: self.meta.prime_bound.max(other.meta.prime_bound),
        };
        for (&(a, b, p), &a_p) in &other.entries {
            out.insert(a, b, p, a_p)?;
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["A", "B", "p", "a_p"]).map_err(io)?;
        for (&(a, b, p), &a_p) in &self.entries {
            w.serialize((a, b, p, a_p)).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lookups fall through to `None` for keys not in the cache.
impl TraceSource for TraceCache {
    fn trace(&self, c: &CurveModel, p: u64) -> Option<i64> {
        u32::try_from(p)
            .ok()
            .and_then(|p| self.get(c.a(), c.b(), p))
            .map(i64::from)
    }
}

fn checksum(block: &[u8]) -> u64 {
    let digest = Sha256::digest(block);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Primes a cache built with `prime_bound` is expected to cover.
pub fn cached_primes(prime_bound: u64) -> Vec<u64> {
    primes_up_to(prime_bound).into_iter().filter(|&p| p >= 5).collect()
}
