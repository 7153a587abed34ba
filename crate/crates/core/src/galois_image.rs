//! One-sided certification that the mod-ℓ image of a curve is all of `GL_2(F_ℓ)`.
//!
//! Each good prime `p` contributes a Frobenius element with known trace
//! `t = a_p mod ℓ` and determinant `d = p mod ℓ`. By Dickson's classification
//! a subgroup of `GL_2(F_ℓ)` not containing `SL_2(F_ℓ)` lies in a Borel, the
//! normaliser of a split or nonsplit Cartan, or has projective image `A_4`,
//! `S_4` or `A_5`. Witness classes:
//!
//! * split: `t ≠ 0`, `t^2 - 4d` a nonzero square (not in a nonsplit normaliser);
//! * nonsplit: `t ≠ 0`, `t^2 - 4d` a non-square (not Borel, not a split normaliser);
//! * exceptional: `u = t^2/d ∉ {0, 1, 2, 4}`, `u^2 - 3u + 1 ≠ 0` (projective
//!   order not in 1..=5);
//! * determinant: the observed `d` generate `F_ℓ^×`.
//!
//! With all four the image contains `SL_2` and has full determinant. Absence
//! of witnesses never becomes a non-surjectivity claim.

use serde::Serialize;

use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::primes::{factorize, is_prime, primes_up_to};
use crate::traces::{legendre, ResidueTable, TraceContext, TraceRecord, TraceSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ImageStatus {
    SurjectiveProven,
    Undetermined,
}

/// Which representation a verdict speaks about: `ρ̄` into `GL_2`, or its
/// composite `ρ̄'` with `GL_2 → GL_2/⟨-1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ImageTarget {
    #[serde(rename = "GL2")]
    Gl2,
    #[serde(rename = "GL2'")]
    Gl2Prime,
}

/// Primes supplying each witness class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    pub split: Option<u64>,
    pub nonsplit: Option<u64>,
    pub exceptional: Option<u64>,
    /// Primes whose `p mod ℓ` enlarged the determinant subgroup.
    pub determinant: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageVerdict {
    pub status: ImageStatus,
    pub target: ImageTarget,
    pub ell: u64,
    pub witnesses: Witnesses,
    pub sample_bound: u64,
}

impl ImageVerdict {
    pub fn is_surjective(&self) -> bool {
        self.status == ImageStatus::SurjectiveProven
    }
}

/// Per-record witness predicates, exposed so callers can recheck a verdict.
pub fn is_split_witness(t: u64, d: u64, ell: u64) -> bool {
    !t.is_multiple_of(ell) && legendre(disc(t, d), ell) == 1
}

pub fn is_nonsplit_witness(t: u64, d: u64, ell: u64) -> bool {
    !t.is_multiple_of(ell) && legendre(disc(t, d), ell) == -1
}

pub fn is_exceptional_witness(t: u64, d: u64, ell: u64) -> bool {
    let (t, d) = (t % ell, d % ell);
    if t == 0 || d == 0 {
        return false;
    }
    let d_inv = crate::primes::mod_pow(d, ell - 2, ell);
    let u = t * t % ell * d_inv % ell;
    if [0, 1, 2, 4].iter().any(|&v| v % ell == u) {
        return false;
    }
    !(u * u + 1 + 3 * (ell - u)).is_multiple_of(ell)
}

fn disc(t: u64, d: u64) -> i64 {
    (t * t) as i64 - 4 * d as i64
}

/// Accumulates witnesses from a stream of trace records.
pub struct WitnessCollector {
    ell: u64,
    witnesses: Witnesses,
    det_subgroup: Vec<bool>,
    det_order: usize,
}

impl WitnessCollector {
    pub fn new(ell: u64) -> Self {
        let mut det_subgroup = vec![false; ell as usize];
        det_subgroup[1] = true;
        Self {
            ell,
            witnesses: Witnesses::default(),
            det_subgroup,
            det_order: 1,
        }
    }

    pub fn complete(&self) -> bool {
        let w = &self.witnesses;
        w.split.is_some() && w.nonsplit.is_some() && w.exceptional.is_some() && self.det_order == self.ell as usize - 1
    }

    /// Feeds one record; returns `true` once every class is populated.
    pub fn observe(&mut self, rec: &TraceRecord) -> bool {
        let (t, d, ell) = (rec.t, rec.d, self.ell);
        if d == 0 {
            return self.complete();
        }
        let w = &mut self.witnesses;
        if w.split.is_none() && is_split_witness(t, d, ell) {
            w.split = Some(rec.p);
        }
        if w.nonsplit.is_none() && is_nonsplit_witness(t, d, ell) {
            w.nonsplit = Some(rec.p);
        }
        if w.exceptional.is_none() && is_exceptional_witness(t, d, ell) {
            w.exceptional = Some(rec.p);
        }
        if !self.det_subgroup[d as usize] {
            w.determinant.push(rec.p);
            self.extend_det_subgroup(d);
        }
        self.complete()
    }

    fn extend_det_subgroup(&mut self, d: u64) {
        let ell = self.ell;
        let mut frontier: Vec<u64> = (1..ell).filter(|&x| self.det_subgroup[x as usize]).collect();
        while let Some(x) = frontier.pop() {
            let y = x * d % ell;
            if !self.det_subgroup[y as usize] {
                self.det_subgroup[y as usize] = true;
                frontier.push(y);
            }
        }
        self.det_order = self.det_subgroup.iter().filter(|&&b| b).count();
    }

    pub fn finish(self, sample_bound: u64) -> ImageVerdict {
        let status = if self.complete() {
            ImageStatus::SurjectiveProven
        } else {
            ImageStatus::Undetermined
        };
        ImageVerdict {
            status,
            target: ImageTarget::Gl2,
            ell: self.ell,
            witnesses: self.witnesses,
            sample_bound,
        }
    }
}

fn check_ell(ell: u64) -> Result<()> {
    if ell < 5 || !is_prime(ell) {
        return Err(Error::UnsupportedPrime(ell));
    }
    Ok(())
}

/// Scans records until every witness class is filled.
pub fn classify_records<'a>(
    records: impl IntoIterator<Item = &'a TraceRecord>,
    ell: u64,
    sample_bound: u64,
) -> ImageVerdict {
    let mut collector = WitnessCollector::new(ell);
    for rec in records {
        if rec.p > sample_bound {
            break;
        }
        if collector.observe(rec) {
            break;
        }
    }
    collector.finish(sample_bound)
}

/// Certifies surjectivity of `ρ̄_{E,ℓ}` from traces at good primes `p <= bound`.
pub fn classify_image(c: &CurveModel, ell: u64, bound: u64) -> Result<ImageVerdict> {
    check_ell(ell)?;
    let mut collector = WitnessCollector::new(ell);
    for p in primes_up_to(bound) {
        if p < 5 || p == ell {
            continue;
        }
        let Ok((r, s)) = c.reduce_mod_p(p) else {
            continue;
        };
        let rec = TraceRecord::new(p, ResidueTable::new(p).trace(r, s), ell);
        if collector.observe(&rec) {
            break;
        }
    }
    Ok(collector.finish(bound))
}

/// As [`classify_image`], reusing a shared context (for sweeps over many curves).
pub fn classify_image_with(ctx: &TraceContext, c: &CurveModel, ell: u64, bound: u64) -> Result<ImageVerdict> {
    check_ell(ell)?;
    let mut collector = WitnessCollector::new(ell);
    for (idx, &p) in ctx.primes().iter().enumerate() {
        if p > bound {
            break;
        }
        if p == ell {
            continue;
        }
        let Some(a_p) = ctx.trace_at(c, idx) else {
            continue;
        };
        if collector.observe(&TraceRecord::new(p, a_p, ell)) {
            break;
        }
    }
    if bound > ctx.primes().last().copied().unwrap_or(0) && !collector.complete() {
        let start = ctx.primes().last().copied().unwrap_or(0);
        for p in primes_up_to(bound)
            .into_iter()
            .filter(|&p| p > start && p >= 5 && p != ell)
        {
            let Some(a_p) = ctx.trace(c, p) else { continue };
            if collector.observe(&TraceRecord::new(p, a_p, ell)) {
                break;
            }
        }
    }
    Ok(collector.finish(bound))
}

/// Passing to `ρ̄'` keeps a proven surjection proven (a quotient of a
/// surjection is onto) and never upgrades an undetermined verdict.
pub fn gl2prime_from_gl2(v: &ImageVerdict) -> ImageVerdict {
    ImageVerdict {
        target: ImageTarget::Gl2Prime,
        ..v.clone()
    }
}

/// The number field `K`, described by its degree and optionally the degree
/// of its Galois closure over Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    pub degree: u64,
    pub galois_closure_degree: Option<u64>,
}

impl FieldSpec {
    pub fn new(degree: u64, galois_closure_degree: Option<u64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidConfig("field degree must be >= 1".into()));
        }
        if let Some(g) = galois_closure_degree {
            if g == 0 || g % degree != 0 || !divides_factorial(g, degree) {
                return Err(Error::InvalidConfig(format!(
                    "closure degree {g} must be a multiple of {degree} dividing {degree}!"
                )));
            }
        }
        Ok(Self {
            degree,
            galois_closure_degree,
        })
    }

    /// Sufficient test for `Q(ρ̄') ⊄ K̃(μ_ℓ)`: containment would force
    /// `ℓ | [K̃ : Q]` because `ℓ` divides `|PSL_2(F_ℓ)|` and not `ℓ - 1`.
    pub fn certifies_disjointness(&self, ell: u64) -> bool {
        ell > self.degree || self.galois_closure_degree.is_some_and(|g| g % ell != 0)
    }
}

/// `g | n!`, via Legendre's formula for each prime power of `g`.
fn divides_factorial(g: u64, n: u64) -> bool {
    factorize(g).into_iter().all(|(q, e)| {
        let mut v = 0u64;
        let mut power = q;
        while power <= n {
            v += n / power;
            power = match power.checked_mul(q) {
                Some(x) => x,
                None => break,
            };
        }
        v >= e as u64
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TklStatus {
    Member,
    Undetermined,
}

pub fn t_kl_from_verdict(verdict: &ImageVerdict, field: &FieldSpec) -> TklStatus {
    if verdict.is_surjective() && field.certifies_disjointness(verdict.ell) {
        TklStatus::Member
    } else {
        TklStatus::Undetermined
    }
}

/// Membership in the set of curves with `ρ̄'` surjective and
/// `Q(ρ̄') ⊄ K̃(μ_ℓ)`.
pub fn t_kl_member(c: &CurveModel, ell: u64, field: &FieldSpec, bound: u64) -> Result<TklStatus> {
    let verdict = gl2prime_from_gl2(&classify_image(c, ell, bound)?);
    Ok(t_kl_from_verdict(&verdict, field))
}

/// Necessary condition for `ρ̄'_e ≅ ρ̄'_a`: `t_p(e) = ±t_p(a)` at every
/// prime `5 <= p <= bound` good for both and different from ℓ.
pub fn t_a_proxy_member(e: &CurveModel, a: &CurveModel, ell: u64, bound: u64) -> Result<bool> {
    check_ell(ell)?;
    let ctx = TraceContext::with_full_tables(bound, 0);
    Ok(t_a_proxy_with(&ctx, e, a, ell, bound))
}

pub fn t_a_proxy_with<S: TraceSource>(src: &S, e: &CurveModel, a: &CurveModel, ell: u64, bound: u64) -> bool {
    for p in primes_up_to(bound) {
        if p < 5 || p == ell {
            continue;
        }
        let (Some(te), Some(ta)) = (src.trace(e, p), src.trace(a, p)) else {
            continue;
        };
        let (te, ta) = (te.rem_euclid(ell as i64), ta.rem_euclid(ell as i64));
        if te != ta && (te + ta) % ell as i64 != 0 {
            return false;
        }
    }
    true
}
