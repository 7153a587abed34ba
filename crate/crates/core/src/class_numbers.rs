//! Hurwitz class numbers and the point-count identities they satisfy.
//!
//! `H(n)` is the number of `SL_2(Z)`-classes of positive definite binary
//! quadratic forms of discriminant `-n`, primitive or not, with the classes
//! of `a(x^2 + y^2)` weighted `1/2` and those of `a(x^2 + xy + y^2)`
//! weighted `1/3`. Values are carried as the integer `6·H(n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matgroup::delta_density;
use crate::primes::{is_prime, isqrt};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HurwitzValue {
    pub n: u64,
    pub six_h: u64,
}

impl HurwitzValue {
    pub fn value(&self) -> Rational {
        Rational::new(self.six_h as i64, 6)
    }
}

fn check_discriminant(n: i64) -> Result<u64> {
    if n <= 0 || !(n % 4 == 0 || n % 4 == 3) {
        return Err(Error::InvalidDiscriminant(n));
    }
    Ok(n as u64)
}

/// Contribution of the reduced form `(a, b, c)` to `6·H`, or `None` when
/// the triple is not reduced.
#[inline]
fn reduced_weight(a: i64, b: i64, c: i64) -> Option<u64> {
    if b.abs() > a || a > c || (b < 0 && (-b == a || a == c)) {
        return None;
    }
    Some(if b == 0 && a == c {
        3
    } else if b == a && a == c {
        2
    } else {
        6
    })
}

/// `H(n)` by enumerating reduced forms `|b| <= a <= c`, `a <= √(n/3)`.
pub fn hurwitz(n: i64) -> Result<HurwitzValue> {
    let n = check_discriminant(n)?;
    let mut six_h = 0;
    let mut a = 1i64;
    while 3 * (a * a) as u64 <= n {
        // b ≡ n (mod 2) since b^2 ≡ -n (mod 4)
        let start = if (a + n as i64) % 2 == 0 { -a } else { -a + 1 };
        let mut b = start;
        while b <= a {
            let num = (b * b) as u64 + n;
            if num.is_multiple_of(4 * a as u64) {
                let c = (num / (4 * a as u64)) as i64;
                six_h += reduced_weight(a, b, c).unwrap_or(0);
            }
            b += 2;
        }
        a += 1;
    }
    Ok(HurwitzValue { n, six_h })
}

/// `6·H(n)` for every `n <= max_n`, filled by one pass over reduced forms.
#[derive(Clone, Debug)]
pub struct HurwitzTable {
    six_h: Vec<u64>,
}

impl HurwitzTable {
    pub fn new(max_n: u64) -> Self {
        let mut six_h = vec![0u64; max_n as usize + 1];
        let mut a = 1i64;
        while 3 * (a * a) as u64 <= max_n {
            for b in -a..=a {
                let mut c = a;
                loop {
                    let n = 4 * a * c - b * b;
                    if n as u64 > max_n {
                        break;
                    }
                    if let Some(w) = reduced_weight(a, b, c) {
                        six_h[n as usize] += w;
                    }
                    c += 1;
                }
            }
            a += 1;
        }
        Self { six_h }
    }

    pub fn max_n(&self) -> u64 {
        self.six_h.len() as u64 - 1
    }

    pub fn get(&self, n: i64) -> Result<HurwitzValue> {
        let n = check_discriminant(n)?;
        if n > self.max_n() {
            return hurwitz(n as i64);
        }
        Ok(HurwitzValue {
            n,
            six_h: self.six_h[n as usize],
        })
    }

    /// Exact `Σ_{a ≡ t (ℓ), a^2 < 4p} H(4p - a^2)` against `2δ(t, p mod ℓ, ℓ)p`.
    pub fn partial_sum(&self, p: u64, t: u64, ell: u64) -> Result<PartialSum> {
        check_prime(p)?;
        if ell < 5 || !is_prime(ell) {
            return Err(Error::UnsupportedPrime(ell));
        }
        if p == ell {
            return Err(Error::InvalidConfig(format!("p must differ from ell = {ell}")));
        }
        let t = t % ell;
        let bound = hasse_strict(p);
        let mut six_s = 0i64;
        for a in -bound..=bound {
            if a.rem_euclid(ell as i64) as u64 == t {
                six_s += self.get(4 * p as i64 - a * a)?.six_h as i64;
            }
        }
        let s = Rational::new(six_s, 6);
        let delta = delta_density(t, p % ell, ell)?;
        let main = delta * Rational::from_integer(2 * p as i64);
        let diff = s - main;
        let diff = *diff.numer() as f64 / *diff.denom() as f64;
        Ok(PartialSum {
            p,
            t,
            d: p % ell,
            ell,
            s,
            main,
            normalized_error: diff.abs() / (ell as f64 * (p as f64).sqrt()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub p: u64,
    pub t: u64,
    pub d: u64,
    pub ell: u64,
    #[serde(serialize_with = "crate::serialize_ratio")]
    pub s: Rational,
    #[serde(serialize_with = "crate::serialize_ratio")]
    pub main: Rational,
    pub normalized_error: f64,
}

fn check_prime(p: u64) -> Result<()> {
    if p < 5 || !is_prime(p) {
        return Err(Error::UnsupportedPrime(p));
    }
    Ok(())
}

/// Largest `a` with `a^2 < 4p` (strict: `4p` is never a square for prime `p`).
fn hasse_strict(p: u64) -> i64 {
    let r = isqrt(4 * p);
    if r * r == 4 * p {
        r as i64 - 1
    } else {
        r as i64
    }
}

/// Number of nonsingular `(r, s) ∈ F_p^2` with `a_{r,s}(p) = a`, predicted
/// as `((p - 1)/2)·H(4p - a^2)`.
pub fn deuring_count(p: u64, a: i64) -> Result<u64> {
    check_prime(p)?;
    if a * a >= 4 * p as i64 {
        return Err(Error::OutOfHasseRange { p, a });
    }
    let h = hurwitz(4 * p as i64 - a * a)?;
    let scaled = (p - 1) * h.six_h;
    debug_assert_eq!(scaled % 12, 0);
    Ok(scaled / 12)
}

/// `Σ_{a^2 < 4p} H(4p - a^2) = 2p`.
pub fn mass_check(p: u64) -> bool {
    if check_prime(p).is_err() {
        return false;
    }
    let bound = hasse_strict(p);
    let total: u64 = (-bound..=bound)
        .map(|a| hurwitz(4 * p as i64 - a * a).map(|h| h.six_h).unwrap_or(0))
        .sum();
    total == 12 * p
}

pub fn hurwitz_partial_sum(p: u64, t: u64, ell: u64) -> Result<PartialSum> {
    HurwitzTable::new(4 * p).partial_sum(p, t, ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::primes_up_to;

    /// All reduced forms of discriminant `-n`, by a box search independent
    /// of the enumeration order used above.
    fn forms_oracle(n: i64) -> u64 {
        let mut six = 0;
        for a in 1..=n {
            for b in -a..=a {
                for c in a..=n {
                    if 4 * a * c - b * b > n {
                        break;
                    }
                    if 4 * a * c - b * b != n {
                        continue;
                    }
                    if b < 0 && (-b == a || a == c) {
                        continue;
                    }
                    six += if a == c && b == 0 {
                        3
                    } else if a == c && b == a {
                        2
                    } else {
                        6
                    };
                }
            }
        }
        six
    }

    #[test]
    fn hurwitz_examples() {
        assert_eq!(hurwitz(3).unwrap().value(), Rational::new(1, 3));
        assert_eq!(hurwitz(4).unwrap().value(), Rational::new(1, 2));
        assert_eq!(hurwitz(23).unwrap().value(), Rational::from_integer(3));
        assert_eq!(hurwitz(19).unwrap().value(), Rational::from_integer(1));
        assert_eq!(hurwitz(20).unwrap().value(), Rational::from_integer(2));
        // (1,0,3), (2,2,2): 1 + 1/3
        assert_eq!(hurwitz(12).unwrap().value(), Rational::new(4, 3));
        // (1,0,4), (2,0,2): 1 + 1/2
        assert_eq!(hurwitz(16).unwrap().value(), Rational::new(3, 2));
    }

    #[test]
    fn hurwitz_rejects_bad_discriminants() {
        for n in [0, -3, 1, 2, 5, 6, 9, 10] {
            assert!(matches!(hurwitz(n), Err(Error::InvalidDiscriminant(_))), "{n}");
        }
    }

    #[test]
    fn hurwitz_matches_box_search() {
        for n in (1..=200).filter(|n| n % 4 == 0 || n % 4 == 3) {
            assert_eq!(hurwitz(n).unwrap().six_h, forms_oracle(n), "n={n}");
        }
    }

    #[test]
    fn table_matches_single_values() {
        let table = HurwitzTable::new(3000);
        for n in (1..=3000).filter(|n| n % 4 == 0 || n % 4 == 3) {
            assert_eq!(table.get(n).unwrap(), hurwitz(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn deuring_examples() {
        assert_eq!(deuring_count(5, 1).unwrap(), 2);
        assert_eq!(deuring_count(5, 0).unwrap(), 4);
        assert!(matches!(deuring_count(5, 5), Err(Error::OutOfHasseRange { .. })));
    }

    #[test]
    fn mass_examples() {
        assert!(mass_check(5));
        assert!(mass_check(7));
        assert!(mass_check(97));
        assert!(!mass_check(9));
        for p in primes_up_to(400).into_iter().filter(|&p| p >= 5) {
            assert!(mass_check(p), "p={p}");
        }
    }

    #[test]
    fn partial_sums_partition_the_mass() {
        let table = HurwitzTable::new(4 * 200);
        for p in [7u64, 11, 13, 101, 199] {
            let total: Rational = (0..5).map(|t| table.partial_sum(p, t, 5).unwrap().s).sum();
            assert_eq!(total, Rational::from_integer(2 * p as i64));
        }
        let ps = hurwitz_partial_sum(11, 0, 5).unwrap();
        assert_eq!(ps.d, 1);
        // a ∈ {-5, 0, 5}: H(19) + H(44) + H(19) = 1 + 4 + 1
        assert_eq!(ps.s, Rational::from_integer(6));
        assert_eq!(ps.main, Rational::new(11, 2));
        assert!(table.partial_sum(5, 0, 5).is_err());
    }
}
