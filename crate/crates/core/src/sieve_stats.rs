//! Desk-scale statistics over the family of curves of height `<= X^6`:
//! pair counts of primes with prescribed traces, their variance about the
//! density prediction, the decay of a twist-class proxy, and the curve
//! count against `C_1 X^5`.
//!
//! Bad primes are detected by `p | Δ` and traces are only defined for
//! `p >= 5`, so pair counts range over primes `5 <= p <= X`; `π(X, d, ℓ)`
//! counts every prime `p <= X` in the residue class.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{count_curves, curves_with_a, discriminant_of, is_minimal, CurveModel, HeightBound};
use crate::error::{Error, Result};
use crate::matgroup::DensityParams;
use crate::primes::{is_prime, primes_up_to};
use crate::traces::{TraceContext, TraceSource};

/// Exhaustive evaluation is used while `#C(X)^2` stays below this.
pub const EXHAUSTIVE_PAIR_LIMIT: u64 = 1_000_000;

fn check_residue(d: u64, ell: u64) -> Result<()> {
    if ell < 5 || !is_prime(ell) {
        return Err(Error::UnsupportedPrime(ell));
    }
    if d.is_multiple_of(ell) {
        return Err(Error::ZeroResidue(d as i64));
    }
    Ok(())
}

/// `π(X, d, ℓ)`: primes `p <= X` with `p ≡ d (mod ℓ)`.
pub fn pi_count(x: u64, d: u64, ell: u64) -> Result<u64> {
    check_residue(d, ell)?;
    Ok(primes_up_to(x).into_iter().filter(|p| p % ell == d % ell).count() as u64)
}

/// The primes `5 <= p <= X`, `p ≡ d (mod ℓ)` at which pair conditions are tested.
fn pair_primes(x: u64, d: u64, ell: u64) -> Vec<u64> {
    primes_up_to(x)
        .into_iter()
        .filter(|&p| p >= 5 && p % ell == d % ell)
        .collect()
}

/// Primes `p <= X` with `p ≡ d`, good for both curves, and `t_p(E_i) = t_i`.
pub fn pi_pair(e1: &CurveModel, e2: &CurveModel, x: u64, t1: u64, t2: u64, d: u64, ell: u64) -> Result<u64> {
    check_residue(d, ell)?;
    let ctx = TraceContext::with_full_tables(x, 0);
    Ok(pi_pair_with(&ctx, e1, e2, x, t1, t2, d, ell))
}

#[allow(clippy::too_many_arguments)]
pub fn pi_pair_with<S: TraceSource>(
    src: &S,
    e1: &CurveModel,
    e2: &CurveModel,
    x: u64,
    t1: u64,
    t2: u64,
    d: u64,
    ell: u64,
) -> u64 {
    let l = ell as i64;
    pair_primes(x, d, ell)
        .into_iter()
        .filter(|&p| {
            let (Some(a1), Some(a2)) = (src.trace(e1, p), src.trace(e2, p)) else {
                return false;
            };
            a1.rem_euclid(l) as u64 == t1 % ell && a2.rem_euclid(l) as u64 == t2 % ell
        })
        .count() as u64
}

/// Bitsets over the pair primes: where `t_p(E) = t1` and where `t_p(E) = t2`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Signature {
    hits_t1: Vec<u64>,
    hits_t2: Vec<u64>,
}

impl Signature {
    fn new<S: TraceSource>(src: &S, c: &CurveModel, primes: &[u64], params: &DensityParams) -> Self {
        let words = primes.len().div_ceil(64).max(1);
        let mut hits_t1 = vec![0u64; words];
        let mut hits_t2 = vec![0u64; words];
        let l = params.ell as i64;
        for (i, &p) in primes.iter().enumerate() {
            if let Some(a) = src.trace(c, p) {
                let t = a.rem_euclid(l) as u64;
                if t == params.t1 {
                    hits_t1[i / 64] |= 1 << (i % 64);
                }
                if t == params.t2 {
                    hits_t2[i / 64] |= 1 << (i % 64);
                }
            }
        }
        Self { hits_t1, hits_t2 }
    }

    fn pair_count(first: &Signature, second: &Signature) -> u64 {
        first
            .hits_t1
            .iter()
            .zip(&second.hits_t2)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveStat {
    pub x: u64,
    /// Largest prime examined (equal to `x` for [`variance_stat`]).
    pub prime_bound: u64,
    pub params: DensityParams,
    pub pi: u64,
    pub num_pairs_sampled: u64,
    pub exhaustive: bool,
    /// Mean of `(π_{E1,E2} - δπ)^2`, exact.
    #[serde(serialize_with = "crate::serialize_ratio")]
    pub v: Ratio<i128>,
}

impl SieveStat {
    pub fn v_f64(&self) -> f64 {
        *self.v.numer() as f64 / *self.v.denom() as f64
    }

    pub fn v_over_x(&self) -> f64 {
        self.v_f64() / self.x as f64
    }

    pub const CSV_HEADER: &'static str = "X,ell,t1,t2,d,delta,pi,V,V_over_X";

    pub fn csv_row(&self) -> String {
        let p = &self.params;
        format!(
            "{},{},{},{},{},{},{},{:.12e},{:.12e}",
            self.x,
            p.ell,
            p.t1,
            p.t2,
            p.d,
            p.delta,
            self.pi,
            self.v_f64(),
            self.v_over_x()
        )
    }
}

/// Sum of squared deviations `(π_pair·den - num·π)^2`, scaled by `den^2`.
fn accumulate(pairs: impl ParallelIterator<Item = u64>, params: &DensityParams, pi: u64) -> i128 {
    let num = *params.delta.numer() as i128;
    let den = *params.delta.denom() as i128;
    let pi = pi as i128;
    pairs
        .map(|count| {
            let dev = count as i128 * den - num * pi;
            dev * dev
        })
        .sum()
}

fn finish(sum_sq: i128, pairs: u64, params: &DensityParams) -> Ratio<i128> {
    let den = *params.delta.denom() as i128;
    Ratio::new(sum_sq, den * den * pairs as i128)
}

/// Exact mean over every ordered pair of `curves`, primes up to `prime_bound`.
pub fn variance_exhaustive(
    curves: &[CurveModel],
    x: u64,
    prime_bound: u64,
    params: &DensityParams,
) -> Result<SieveStat> {
    check_residue(params.d, params.ell)?;
    let pi = pi_count(prime_bound, params.d, params.ell)?;
    let primes = pair_primes(prime_bound, params.d, params.ell);
    let ctx = TraceContext::with_full_tables(prime_bound, 0);
    let sigs: Vec<Signature> = curves
        .par_iter()
        .map(|c| Signature::new(&ctx, c, &primes, params))
        .collect();
    let n = sigs.len() as u64;
    let sum_sq = accumulate(
        sigs.par_iter()
            .flat_map_iter(|s1| sigs.iter().map(move |s2| Signature::pair_count(s1, s2))),
        params,
        pi,
    );
    Ok(SieveStat {
        x,
        prime_bound,
        params: *params,
        pi,
        num_pairs_sampled: n * n,
        exhaustive: true,
        v: if n == 0 {
            Ratio::from_integer(0)
        } else {
            finish(sum_sq, n * n, params)
        },
    })
}

/// Uniform sample from `C(X)` by rejection from the coefficient box.
pub fn sample_curve<R: Rng>(bound: HeightBound, rng: &mut R) -> CurveModel {
    loop {
        let a = rng.gen_range(-bound.max_a()..=bound.max_a());
        let b = rng.gen_range(-bound.max_b()..=bound.max_b());
        if discriminant_of(a, b) != 0 && is_minimal(a, b) {
            return CurveModel::new_unchecked(a, b);
        }
    }
}

/// Unbiased estimate of the pair mean from `samples` seeded uniform pairs.
pub fn variance_monte_carlo(
    bound: HeightBound,
    prime_bound: u64,
    params: &DensityParams,
    samples: u64,
    seed: u64,
) -> Result<SieveStat> {
    check_residue(params.d, params.ell)?;
    if samples == 0 {
        return Err(Error::InvalidConfig("sample size must be >= 1".into()));
    }
    let pi = pi_count(prime_bound, params.d, params.ell)?;
    let primes = pair_primes(prime_bound, params.d, params.ell);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(CurveModel, CurveModel)> = (0..samples)
        .map(|_| (sample_curve(bound, &mut rng), sample_curve(bound, &mut rng)))
        .collect();
    let ctx = TraceContext::with_full_tables(prime_bound, 0);
    let sum_sq = accumulate(
        pairs.par_iter().map(|(e1, e2)| {
            let s1 = Signature::new(&ctx, e1, &primes, params);
            let s2 = Signature::new(&ctx, e2, &primes, params);
            Signature::pair_count(&s1, &s2)
        }),
        params,
        pi,
    );
    Ok(SieveStat {
        x: bound.x(),
        prime_bound,
        params: *params,
        pi,
        num_pairs_sampled: samples,
        exhaustive: false,
        v: finish(sum_sq, samples, params),
    })
}

/// `(1/#C(X)^2) Σ (π_{E1,E2}(X, t1, t2, d, ℓ) - δ π(X, d, ℓ))^2`, exactly when
/// `#C(X)^2 <= 10^6` and by seeded Monte Carlo otherwise.
pub fn variance_stat(x: u64, t1: u64, t2: u64, d: u64, ell: u64, sample_size: u64, seed: u64) -> Result<SieveStat> {
    let params = DensityParams::new(t1, t2, d, ell)?;
    let bound = HeightBound::new(x)?;
    let n = count_curves(bound);
    if n * n <= EXHAUSTIVE_PAIR_LIMIT {
        let curves: Vec<CurveModel> = crate::curves::enumerate_curves(bound).collect();
        variance_exhaustive(&curves, x, x, &params)
    } else {
        variance_monte_carlo(bound, x, &params, sample_size, seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub x: u64,
    pub members: u64,
    pub total: u64,
    pub ratio: f64,
}

/// Share of `C(X)` passing the `t_p(E) = ±t_p(A)` proxy at primes `<= bound`.
pub fn t_a_density_curve(a: &CurveModel, x_values: &[u64], ell: u64, bound: u64) -> Result<Vec<DecayPoint>> {
    if ell < 5 || !is_prime(ell) {
        return Err(Error::UnsupportedPrime(ell));
    }
    let ctx = TraceContext::new(bound);
    let l = ell as i64;
    // (prime index, t_p(A)) at primes good for A and different from ℓ
    let reference: Vec<(usize, i64)> = ctx
        .primes()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != ell)
        .filter_map(|(i, _)| ctx.trace_at(a, i).map(|t| (i, t.rem_euclid(l))))
        .collect();
    let matches = |e: &CurveModel| {
        reference.iter().all(|&(i, ta)| match ctx.trace_at(e, i) {
            Some(te) => {
                let te = te.rem_euclid(l);
                te == ta || (te + ta) % l == 0
            }
            None => true,
        })
    };
    x_values
        .iter()
        .map(|&x| {
            let bound_x = HeightBound::new(x)?;
            let max_a = bound_x.max_a();
            let (members, total) = (-max_a..=max_a)
                .into_par_iter()
                .map(|col| curves_with_a(bound_x, col).fold((0u64, 0u64), |(m, t), e| (m + matches(&e) as u64, t + 1)))
                .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
            Ok(DecayPoint {
                x,
                members,
                total,
                ratio: if total == 0 { 0.0 } else { members as f64 / total as f64 },
            })
        })
        .collect()
}

/// Least-squares slope of `ln(ratio)` against `ln(X)`; points with zero
/// ratio are skipped. `None` with fewer than two usable points.
pub fn fitted_exponent(points: &[DecayPoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.ratio > 0.0)
        .map(|p| ((p.x as f64).ln(), p.ratio.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `ζ(10)` by partial summation; the tail after `N` terms lies in
/// `[1/(9(N+1)^9), 1/(9N^9)]`, and the midpoint is added.
pub fn zeta10() -> f64 {
    const N: u64 = 200;
    let head: f64 = (1..=N).rev().map(|n| (n as f64).powi(-10)).sum();
    let lo = 1.0 / (9.0 * ((N + 1) as f64).powi(9));
    let hi = 1.0 / (9.0 * (N as f64).powi(9));
    head + 0.5 * (lo + hi)
}

/// Leading constant of `#C(X) ~ C_1 X^5`: the box has `4X^5` points and
/// the minimality condition has density `1/ζ(10)`.
pub fn c1() -> f64 {
    4.0 / zeta10()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub x: u64,
    pub count: u64,
    pub main_term: f64,
    pub relative_error: f64,
}

pub fn curve_count_check(x_values: &[u64]) -> Result<Vec<CountRow>> {
    x_values
        .iter()
        .map(|&x| {
            let count = count_curves(HeightBound::new(x)?);
            let main_term = c1() * (x as f64).powi(5);
            Ok(CountRow {
                x,
                count,
                main_term,
                relative_error: (count as f64 / main_term - 1.0).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::enumerate_curves;
    use crate::traces::trace_table;

    fn curve(a: i64, b: i64) -> CurveModel {
        CurveModel::new(a, b).unwrap()
    }

    #[test]
    fn pi_count_examples() {
        assert_eq!(pi_count(10, 1, 5).unwrap(), 0);
        assert_eq!(pi_count(11, 1, 5).unwrap(), 1);
        assert_eq!(pi_count(2, 2, 5).unwrap(), 1);
        assert!(matches!(pi_count(10, 5, 5), Err(Error::ZeroResidue(_))));
    }

    #[test]
    fn pi_pair_examples() {
        let e = curve(1, 1);
        assert_eq!(pi_pair(&e, &e, 500, 1, 2, 1, 5).unwrap(), 0);
        assert_eq!(pi_pair(&e, &curve(0, 1), 4, 0, 0, 2, 5).unwrap(), 0);

        // independent double scan over two trace tables
        let (e1, e2) = (curve(1, 0), curve(0, 1));
        let rows1 = trace_table(&e1, 100, 5).unwrap();
        let rows2 = trace_table(&e2, 100, 5).unwrap();
        let expected = rows1
            .iter()
            .filter(|r| r.d == 2 && r.t == 2)
            .filter(|r| rows2.iter().any(|s| s.p == r.p && s.t == 0))
            .count() as u64;
        assert_eq!(pi_pair(&e1, &e2, 100, 2, 0, 2, 5).unwrap(), expected);
    }

    #[test]
    fn pair_counts_partition_admissible_primes() {
        let (e1, e2) = (curve(-2, 3), curve(1, 1));
        for d in 1..5u64 {
            let total: u64 = (0..5)
                .flat_map(|t1| (0..5).map(move |t2| (t1, t2)))
                .map(|(t1, t2)| pi_pair(&e1, &e2, 300, t1, t2, d, 5).unwrap())
                .sum();
            let admissible = primes_up_to(300)
                .into_iter()
                .filter(|&p| p % 5 == d && e1.has_good_reduction(p) && e2.has_good_reduction(p))
                .count() as u64;
            assert_eq!(total, admissible);
            assert!(total <= pi_count(300, d, 5).unwrap());
        }
    }

    #[test]
    fn degenerate_small_x() {
        // primes <= 4 congruent to 2 mod 5: just 2, which carries no trace
        for (x, exhaustive) in [(2, true), (4, false)] {
            let s = variance_stat(x, 1, 2, 2, 5, 10, 0).unwrap();
            assert_eq!(s.exhaustive, exhaustive);
            assert_eq!(s.pi, 1);
            let delta = s.params.delta;
            let expected = Ratio::new((*delta.numer() as i128).pow(2), (*delta.denom() as i128).pow(2));
            assert_eq!(s.v, expected);
        }
    }

    #[test]
    fn exhaustive_matches_direct_double_sum() {
        let curves: Vec<_> = enumerate_curves(HeightBound::new(2).unwrap()).take(40).collect();
        let params = DensityParams::new(1, 2, 1, 5).unwrap();
        let stat = variance_exhaustive(&curves, 2, 200, &params).unwrap();
        let pi = pi_count(200, 1, 5).unwrap() as i128;
        let (num, den) = (*params.delta.numer() as i128, *params.delta.denom() as i128);
        let mut sum = Ratio::from_integer(0i128);
        for e1 in &curves {
            for e2 in &curves {
                let c = pi_pair(e1, e2, 200, 1, 2, 1, 5).unwrap() as i128;
                sum += Ratio::new((c * den - num * pi).pow(2), den * den);
            }
        }
        assert_eq!(stat.v, sum / Ratio::from_integer((curves.len() * curves.len()) as i128));
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = variance_stat(8, 1, 2, 1, 5, 500, 7).unwrap();
        let b = variance_stat(8, 1, 2, 1, 5, 500, 7).unwrap();
        assert!(!a.exhaustive);
        assert_eq!(a.csv_row(), b.csv_row());
        let bound = HeightBound::new(6).unwrap();
        let params = DensityParams::new(1, 2, 1, 5).unwrap();
        let c = variance_monte_carlo(bound, 400, &params, 300, 11).unwrap();
        let d = variance_monte_carlo(bound, 400, &params, 300, 11).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn monte_carlo_tracks_exhaustive_mean() {
        let bound = HeightBound::new(2).unwrap();
        let curves: Vec<_> = enumerate_curves(bound).collect();
        let params = DensityParams::new(1, 2, 1, 5).unwrap();
        let exact = variance_exhaustive(&curves, 2, 300, &params).unwrap().v_f64();
        let runs: Vec<f64> = (0..20)
            .map(|seed| variance_monte_carlo(bound, 300, &params, 2000, seed).unwrap().v_f64())
            .collect();
        let mean = runs.iter().sum::<f64>() / runs.len() as f64;
        assert!((mean - exact).abs() / exact < 0.05, "mean {mean} exact {exact}");
    }

    #[test]
    fn decay_examples() {
        let a = enumerate_curves(HeightBound::new(1).unwrap()).next().unwrap();
        let pts = t_a_density_curve(&a, &[1, 2, 3], 5, 100).unwrap();
        for p in &pts {
            assert!(p.ratio > 0.0 && p.ratio <= 1.0);
            assert!(p.members >= 1);
            assert_eq!(p.total, count_curves(HeightBound::new(p.x).unwrap()));
        }
        let vacuous = t_a_density_curve(&a, &[2], 5, 0).unwrap();
        assert_eq!(vacuous[0].ratio, 1.0);
    }

    #[test]
    fn exponent_fit() {
        let pts: Vec<DecayPoint> = [2u64, 4, 8]
            .iter()
            .map(|&x| DecayPoint {
                x,
                members: 0,
                total: 0,
                ratio: (x as f64).powf(-1.5),
            })
            .collect();
        assert!((fitted_exponent(&pts).unwrap() + 1.5).abs() < 1e-12);
        assert_eq!(fitted_exponent(&pts[..1]), None);
    }

    #[test]
    fn zeta_against_closed_form() {
        let closed = std::f64::consts::PI.powi(10) / 93555.0;
        assert!((zeta10() - closed).abs() < 1e-14);
        assert!((c1() - 3.996).abs() < 1e-3);
    }

    #[test]
    fn count_rows() {
        let rows = curve_count_check(&[1, 2]).unwrap();
        assert_eq!(rows[0].count, 8);
        assert_eq!(rows[1].count, 150);
    }
}
