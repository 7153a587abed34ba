//! Diophantine-stability verdicts from the five group-theoretic conditions.
//!
//! For a curve `E` whose `ρ̄'` is certified surjective and whose field
//! condition holds, the image of `G_K` is all of `GL_2(F_ℓ)` and the image
//! of `G_{K(μ_ℓ)}` contains `SL_2(F_ℓ)`. The conditions are therefore checked
//! once per ℓ on `G = GL_2`, `H = SL_2`:
//!
//! 1. `F_ℓ^2` is an irreducible `G`-module;
//! 2. `H^1(G, F_ℓ^2) = 0`;
//! 3. `H` has no quotient of order ℓ;
//! 4. some `τ0 ∈ H` has no eigenvalue 1;
//! 5. some `τ1 ∈ H` has `rank(τ1 - 1) = 1`.
//!
//! The verdict is `Satisfied` or `Undetermined`; the criterion is sufficient
//! only, so nothing here ever reports a failure of stability.

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::galois_image::{
    classify_image_with, gl2prime_from_gl2, t_kl_from_verdict, FieldSpec, ImageVerdict, TklStatus,
};
use crate::ingest::RankTable;
use crate::matgroup::{
    self, find_tau0, find_tau1, h1_vanishes, is_irreducible, no_abelian_ell_quotient, Mat2, MatGroup,
};
use crate::traces::TraceContext;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Conditions {
    pub irreducible: bool,
    pub h1_zero: bool,
    pub no_abelian_ell: bool,
    pub tau0_found: bool,
    pub tau1_found: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.irreducible && self.h1_zero && self.no_abelian_ell && self.tau0_found && self.tau1_found
    }
}

/// The five predicates evaluated on a pair `(G, H)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GroupPredicates {
    pub conditions: Conditions,
    pub tau0: Option<Mat2>,
    pub tau1: Option<Mat2>,
}

impl GroupPredicates {
    /// `g` is the image of `G_K`, `h` the image of `G_{K(μ_ℓ)}`.
    pub fn evaluate(g: &MatGroup, h: &MatGroup) -> Result<Self> {
        let tau0 = find_tau0(h);
        let tau1 = find_tau1(h);
        Ok(Self {
            conditions: Conditions {
                irreducible: is_irreducible(g),
                h1_zero: h1_vanishes(g)?,
                no_abelian_ell: no_abelian_ell_quotient(h)?,
                tau0_found: tau0.is_some(),
                tau1_found: tau1.is_some(),
            },
            tau0,
            tau1,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DsVerdict {
    Satisfied,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    #[serde(flatten)]
    pub curve: CurveModel,
    pub ell: u64,
    pub field: FieldSpec,
    pub image: ImageVerdict,
    pub t_kl: TklStatus,
    pub conditions: Conditions,
    pub tau0: Option<Mat2>,
    pub tau1: Option<Mat2>,
    pub ds_verdict: DsVerdict,
}

/// Holds the `GL_2`/`SL_2` predicates for one ℓ, computed once and shared.
pub struct StabilityChecker {
    ell: u64,
    predicates: GroupPredicates,
}

impl StabilityChecker {
    pub fn new(ell: u64) -> Result<Self> {
        if !matches!(ell, 5 | 7 | 11 | 13) {
            return Err(if ell > 13 && crate::primes::is_prime(ell) {
                Error::BudgetExceeded(format!("stability checks need ell <= 13, got {ell}"))
            } else {
                Error::UnsupportedPrime(ell)
            });
        }
        let g = matgroup::gl2(ell as u32)?;
        let h = matgroup::sl2(ell as u32)?;
        Ok(Self {
            ell,
            predicates: GroupPredicates::evaluate(&g, &h)?,
        })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn predicates(&self) -> &GroupPredicates {
        &self.predicates
    }

    pub fn check(&self, c: &CurveModel, field: &FieldSpec, bound: u64) -> Result<StabilityReport> {
        let ctx = TraceContext::with_full_tables(bound, 0);
        self.check_with(&ctx, c, field, bound)
    }

    pub fn check_with(
        &self,
        ctx: &TraceContext,
        c: &CurveModel,
        field: &FieldSpec,
        bound: u64,
    ) -> Result<StabilityReport> {
        let image = gl2prime_from_gl2(&classify_image_with(ctx, c, self.ell, bound)?);
        let t_kl = t_kl_from_verdict(&image, field);
        let p = &self.predicates;
        let ds_verdict = if t_kl == TklStatus::Member && p.conditions.all() {
            DsVerdict::Satisfied
        } else {
            DsVerdict::Undetermined
        };
        Ok(StabilityReport {
            curve: *c,
            ell: self.ell,
            field: *field,
            image,
            t_kl,
            conditions: p.conditions,
            tau0: p.tau0,
            tau1: p.tau1,
            ds_verdict,
        })
    }
}

pub fn check_ds(c: &CurveModel, field: &FieldSpec, ell: u64, bound: u64) -> Result<StabilityReport> {
    StabilityChecker::new(ell)?.check(c, field, bound)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SklCensus {
    pub ell: u64,
    pub members: u64,
    pub ds_satisfied: u64,
    pub rank1_ds: u64,
    pub total: u64,
    /// `rank1_ds / total`; absent for an empty input.
    #[serde(serialize_with = "serialize_opt_ratio")]
    pub ratio: Option<Rational>,
}

fn serialize_opt_ratio<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}

/// Curves with ingested rank exactly 1 and a `Satisfied` verdict, against
/// the number of curves supplied. Missing ranks count as unknown.
pub fn s_kl_census(
    curves: &[CurveModel],
    ranks: &RankTable,
    field: &FieldSpec,
    ell: u64,
    bound: u64,
) -> Result<SklCensus> {
    let checker = StabilityChecker::new(ell)?;
    let ctx = TraceContext::new(bound);
    let reports: Vec<StabilityReport> = curves
        .par_iter()
        .map(|c| checker.check_with(&ctx, c, field, bound))
        .collect::<Result<_>>()?;
    Ok(census_from_reports(&reports, ranks, ell))
}

pub fn census_from_reports(reports: &[StabilityReport], ranks: &RankTable, ell: u64) -> SklCensus {
    let members = reports.iter().filter(|r| r.t_kl == TklStatus::Member).count() as u64;
    let satisfied: Vec<&StabilityReport> = reports
        .iter()
        .filter(|r| r.ds_verdict == DsVerdict::Satisfied)
        .collect();
    let rank1_ds = satisfied.iter().filter(|r| ranks.get(&r.curve) == Some(1)).count() as u64;
    let total = reports.len() as u64;
    SklCensus {
        ell,
        members,
        ds_satisfied: satisfied.len() as u64,
        rank1_ds,
        total,
        ratio: (total > 0).then(|| Rational::new(rank1_ds as i64, total as i64)),
    }
}
