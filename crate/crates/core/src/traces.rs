//! Frobenius traces `a_p = -Σ_x ((x^3 + rx + s) / p)` over prime fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::primes::{is_prime, isqrt, mod_pow, primes_up_to, residue};

/// Quadratic residue symbol of `a` mod an odd prime `p`, by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i8 {
    let a = residue(a, p);
    if a == 0 {
        return 0;
    }
    if mod_pow(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// `⌊2√p⌋`, the largest `|a_p|` the Hasse bound allows.
pub fn hasse_bound(p: u64) -> i64 {
    isqrt(4 * p) as i64
}

/// Table of quadratic characters mod `p`, doubled in length so that a sum
/// of two residues can be looked up without reduction.
#[derive(Clone, Debug)]
pub struct ResidueTable {
    p: u64,
    chi: Vec<i8>,
}

impl ResidueTable {
    pub fn new(p: u64) -> Self {
        assert!(p >= 3 && p % 2 == 1, "ResidueTable needs an odd prime");
        let mut base = vec![-1i8; p as usize];
        base[0] = 0;
        for x in 1..=(p - 1) / 2 {
            base[(x * x % p) as usize] = 1;
        }
        let mut chi = base.clone();
        chi.extend_from_slice(&base);
        Self { p, chi }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn chi(&self, v: u64) -> i8 {
        self.chi[v as usize]
    }

    /// Trace of `y^2 = x^3 + rx + s`; no singularity check.
    ///
    /// The cubic is walked by forward differences so the loop is adds and
    /// conditional subtracts only.
    pub fn trace(&self, r: u64, s: u64) -> i64 {
        let p = self.p;
        let (r, s) = (r % p, s % p);
        // f(x) = x^3 + rx + s; Δf(x) = 3x^2 + 3x + 1 + r; Δ²f(x) = 6x + 6; Δ³f = 6
        let mut f = s;
        let mut d1 = (1 + r) % p;
        let mut d2 = 6 % p;
        let d3 = 6 % p;
        let mut sum = 0i64;
        for _ in 0..p {
            sum += self.chi[f as usize] as i64;
            f += d1;
            if f >= p {
                f -= p;
            }
            d1 += d2;
            if d1 >= p {
                d1 -= p;
            }
            d2 += d3;
            if d2 >= p {
                d2 -= p;
            }
        }
        -sum
    }
}

#[inline]
fn singular_mod(r: u64, s: u64, p: u64) -> bool {
    let (r, s) = (r as u128 % p as u128, s as u128 % p as u128);
    let p = p as u128;
    (4 * r * r % p * r + 27 * s * s).is_multiple_of(p)
}

/// `a_{r,s}(p)`; `SingularReduction` when `4r^3 + 27s^2 ≡ 0`.
pub fn frobenius_trace(r: u64, s: u64, p: u64) -> Result<i64> {
    if p < 5 || !is_prime(p) {
        return Err(Error::UnsupportedPrime(p));
    }
    if singular_mod(r, s, p) {
        return Err(Error::SingularReduction { r, s, p });
    }
    Ok(ResidueTable::new(p).trace(r, s))
}

/// Every trace `a_{r,s}(p)` for `(r, s) ∈ F_p^2`, indexed `r * p + s`.
#[derive(Clone, Debug)]
pub struct FullTraceTable {
    p: u64,
    traces: Vec<i16>,
}

impl FullTraceTable {
    pub const SINGULAR: i16 = i16::MIN;

    pub fn new(p: u64) -> Result<Self> {
        if p < 5 || !is_prime(p) {
            return Err(Error::UnsupportedPrime(p));
        }
        if p > 46_337 {
            return Err(Error::BudgetExceeded(format!("full trace table for p = {p}")));
        }
        let table = ResidueTable::new(p);
        let pu = p as usize;
        let mut traces = vec![0i16; pu * pu];
        let mut cubic = vec![0u64; pu];
        for r in 0..p {
            for (x, slot) in cubic.iter_mut().enumerate() {
                let x = x as u64;
                *slot = (x * x % p * x + r * x) % p;
            }
            let row = &mut traces[r as usize * pu..(r as usize + 1) * pu];
            for s in 0..p {
                if singular_mod(r, s, p) {
                    row[s as usize] = Self::SINGULAR;
                    continue;
                }
                let mut sum = 0i32;
                for &g in &cubic {
                    sum += table.chi(g + s) as i32;
                }
                row[s as usize] = (-sum) as i16;
            }
        }
        Ok(Self { p, traces })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `None` on the singular locus.
    #[inline]
    pub fn get(&self, r: u64, s: u64) -> Option<i64> {
        let v = self.traces[(r * self.p + s) as usize];
        (v != Self::SINGULAR).then_some(v as i64)
    }

    /// Histogram of traces over the nonsingular pairs.
    pub fn census(&self) -> BTreeMap<i64, u64> {
        let mut out = BTreeMap::new();
        for &v in &self.traces {
            if v != Self::SINGULAR {
                *out.entry(v as i64).or_insert(0) += 1;
            }
        }
        out
    }
}

/// `#{(r,s) nonsingular : a_{r,s}(p) = a}` for every trace value that occurs.
pub fn batch_trace_census(p: u64) -> Result<BTreeMap<i64, u64>> {
    Ok(FullTraceTable::new(p)?.census())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub p: u64,
    pub a_p: i64,
    /// `a_p mod ℓ`
    pub t: u64,
    /// `p mod ℓ`
    pub d: u64,
}

impl TraceRecord {
    pub fn new(p: u64, a_p: i64, ell: u64) -> Self {
        Self {
            p,
            a_p,
            t: residue(a_p, ell),
            d: p % ell,
        }
    }
}

/// Something that can produce `a_p(E)` at good primes.
pub trait TraceSource: Sync {
    /// `None` when `p` is a bad prime for `c` (or `p < 5`).
    fn trace(&self, c: &CurveModel, p: u64) -> Option<i64>;
}

/// Precomputed residue tables for every prime up to a bound, plus full
/// trace tables for the small primes where `p^2` entries are cheap.
pub struct TraceContext {
    primes: Vec<u64>,
    tables: Vec<ResidueTable>,
    full: Vec<Option<FullTraceTable>>,
}

impl TraceContext {
    /// Default cutoff below which full `p × p` tables are built.
    pub const FULL_TABLE_LIMIT: u64 = 128;

    pub fn new(prime_bound: u64) -> Self {
        Self::with_full_tables(prime_bound, Self::FULL_TABLE_LIMIT)
    }

    pub fn with_full_tables(prime_bound: u64, full_limit: u64) -> Self {
        use rayon::prelude::*;
        let primes: Vec<u64> = primes_up_to(prime_bound).into_iter().filter(|&p| p >= 5).collect();
        let tables = primes.iter().map(|&p| ResidueTable::new(p)).collect();
        let full = primes
            .par_iter()
            .map(|&p| (p <= full_limit).then(|| FullTraceTable::new(p).expect("prime >= 5")))
            .collect();
        Self { primes, tables, full }
    }

    /// Primes `5 <= p <= bound` covered by this context.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Trace at the `idx`-th prime of the context.
    #[inline]
    pub fn trace_at(&self, c: &CurveModel, idx: usize) -> Option<i64> {
        let p = self.primes[idx];
        let (r, s) = c.reduce_mod_p(p).ok()?;
        Some(match &self.full[idx] {
            Some(full) => full.get(r, s).expect("good reduction is nonsingular"),
            None => self.tables[idx].trace(r, s),
        })
    }
}

impl TraceSource for TraceContext {
    fn trace(&self, c: &CurveModel, p: u64) -> Option<i64> {
        match self.primes.binary_search(&p) {
            Ok(idx) => self.trace_at(c, idx),
            Err(_) => {
                let (r, s) = c.reduce_mod_p(p).ok()?;
                frobenius_trace(r, s, p).ok()
            }
        }
    }
}

/// One record per prime `5 <= p <= bound`, `p ∤ Δ`, `p ≠ ℓ`, increasing in `p`.
pub fn trace_table(c: &CurveModel, bound: u64, ell: u64) -> Result<Vec<TraceRecord>> {
    if ell < 5 || !is_prime(ell) {
        return Err(Error::UnsupportedPrime(ell));
    }
    Ok(primes_up_to(bound)
        .into_iter()
        .filter(|&p| p >= 5 && p != ell)
        .filter_map(|p| {
            let (r, s) = c.reduce_mod_p(p).ok()?;
            Some(TraceRecord::new(p, ResidueTable::new(p).trace(r, s), ell))
        })
        .collect())
}
