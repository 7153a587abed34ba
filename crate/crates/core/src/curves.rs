//! Short Weierstrass models `y^2 = x^3 + Ax + B` over Q, ordered by naive height.
//!
//! A pair `(A, B)` is kept when the cubic is nonsingular and no prime `p`
//! has both `p^4 | A` and `p^6 | B`. This is the normalisation under which
//! every isomorphism class over Q has exactly one representative, so the box
//! `|A| <= X^2`, `|B| <= X^3` holds exactly the classes of height `<= X^6`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{primes_up_to, residue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCurve")]
pub struct CurveModel {
    #[serde(rename = "A")]
    a: i64,
    #[serde(rename = "B")]
    b: i64,
}

#[derive(Deserialize)]
struct RawCurve {
    #[serde(rename = "A")]
    a: i64,
    #[serde(rename = "B")]
    b: i64,
}

impl TryFrom<RawCurve> for CurveModel {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        CurveModel::new(raw.a, raw.b)
    }
}

impl CurveModel {
    /// Validating constructor: rejects singular and non-minimal pairs.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if discriminant_of(a, b) == 0 || !is_minimal(a, b) {
            return Err(Error::InvalidCurve { a, b });
        }
        Ok(Self { a, b })
    }

    /// Caller guarantees the invariants (used by the enumerator, which
    /// filters in bulk).
    pub(crate) fn new_unchecked(a: i64, b: i64) -> Self {
        debug_assert!(discriminant_of(a, b) != 0 && is_minimal(a, b));
        Self { a, b }
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn discriminant(&self) -> i128 {
        discriminant_of(self.a, self.b)
    }

    pub fn height(&self) -> u128 {
        let a = self.a.unsigned_abs() as u128;
        let b = self.b.unsigned_abs() as u128;
        (a * a * a).max(b * b)
    }

    /// Reduction mod a prime `p >= 5`; `BadReduction` when `p | Δ`.
    pub fn reduce_mod_p(&self, p: u64) -> Result<(u64, u64)> {
        if p < 5 {
            return Err(Error::UnsupportedPrime(p));
        }
        if self.discriminant().rem_euclid(p as i128) == 0 {
            return Err(Error::BadReduction {
                a: self.a,
                b: self.b,
                p,
            });
        }
        Ok((residue(self.a, p), residue(self.b, p)))
    }

    /// True when `p >= 5` and `p` does not divide the discriminant.
    #[inline]
    pub fn has_good_reduction(&self, p: u64) -> bool {
        p >= 5 && self.discriminant().rem_euclid(p as i128) != 0
    }

    pub fn csv_row(&self) -> String {
        format!("{},{}", self.a, self.b)
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// `-16(4A^3 + 27B^2)`.
pub fn discriminant_of(a: i64, b: i64) -> i128 {
    let a = a as i128;
    let b = b as i128;
    -16 * (4 * a * a * a + 27 * b * b)
}

pub fn discriminant(c: &CurveModel) -> i128 {
    c.discriminant()
}

pub fn height(c: &CurveModel) -> u128 {
    c.height()
}

pub fn reduce_mod_p(c: &CurveModel, p: u64) -> Result<(u64, u64)> {
    c.reduce_mod_p(p)
}

/// No prime `p` with `p^4 | A` and `p^6 | B`. `(0, 0)` is reported non-minimal.
pub fn is_minimal(a: i64, b: i64) -> bool {
    if a == 0 && b == 0 {
        return false;
    }
    let a = a.unsigned_abs() as u128;
    let b = b.unsigned_abs() as u128;
    // Composite candidates are harmless: if m^4 | A and m^6 | B then every
    // prime factor of m already fails the test.
    let mut p = 2u128;
    loop {
        let p4 = p.pow(4);
        let p6 = p4 * p * p;
        let exhausted = if a != 0 { p4 > a } else { p6 > b };
        if exhausted {
            return true;
        }
        if a.is_multiple_of(p4) && b.is_multiple_of(p6) {
            return false;
        }
        p += if p == 2 { 1 } else { 2 };
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightBound(u64);

impl HeightBound {
    pub fn new(x: u64) -> Result<Self> {
        if x == 0 {
            return Err(Error::InvalidConfig("height parameter X must be >= 1".into()));
        }
        if x > 2_000_000 {
            return Err(Error::InvalidConfig(format!("X = {x} overflows the coefficient box")));
        }
        Ok(Self(x))
    }

    pub fn x(&self) -> u64 {
        self.0
    }

    pub fn max_a(&self) -> i64 {
        (self.0 * self.0) as i64
    }

    pub fn max_b(&self) -> i64 {
        (self.0 * self.0 * self.0) as i64
    }

    pub fn contains(&self, c: &CurveModel) -> bool {
        c.a.abs() <= self.max_a() && c.b.abs() <= self.max_b()
    }
}

/// Filter data for one `A` column of the box.
struct Column {
    /// `p^6` for every prime with `p^4 | A` (or, for `A = 0`, every prime
    /// with `p^6 <= max_b`): `B` divisible by one of these is non-minimal.
    bad_moduli: Vec<i64>,
    /// `B` values making the cubic singular: `A = -3k^2`, `B = ±2k^3`.
    singular: [Option<i64>; 2],
}

impl Column {
    fn new(bound: HeightBound, a: i64) -> Self {
        let max_b = bound.max_b();
        let mut bad_moduli = Vec::new();
        if a == 0 {
            let mut p_limit = 1u64;
            while (p_limit + 1).pow(6) <= max_b as u64 {
                p_limit += 1;
            }
            for p in primes_up_to(p_limit) {
                bad_moduli.push((p as i64).pow(6));
            }
        } else {
            let abs_a = a.unsigned_abs();
            let mut p_limit = 1u64;
            while (p_limit + 1).pow(4) <= abs_a {
                p_limit += 1;
            }
            for p in primes_up_to(p_limit) {
                if abs_a.is_multiple_of(p.pow(4)) {
                    bad_moduli.push((p as i64).pow(6));
                }
            }
        }
        let mut singular = [None, None];
        if a <= 0 && (-a) % 3 == 0 {
            let k2 = -a / 3;
            let k = (k2 as f64).sqrt().round() as i64;
            if k * k == k2 {
                let b = 2 * k * k * k;
                singular = [Some(b), if b != 0 { Some(-b) } else { None }];
            }
        }
        Self { bad_moduli, singular }
    }

    #[inline]
    fn admits(&self, b: i64) -> bool {
        if self.singular[0] == Some(b) || self.singular[1] == Some(b) {
            return false;
        }
        self.bad_moduli.iter().all(|&m| b % m != 0)
    }

    fn count(&self, max_b: i64) -> u64 {
        if self.bad_moduli.is_empty() {
            let singular = self.singular.iter().flatten().filter(|b| b.abs() <= max_b).count();
            (2 * max_b + 1) as u64 - singular as u64
        } else {
            (-max_b..=max_b).filter(|&b| self.admits(b)).count() as u64
        }
    }
}

/// All curves in the `A = a` column of the box, increasing in `B`.
pub fn curves_with_a(bound: HeightBound, a: i64) -> impl Iterator<Item = CurveModel> {
    let column = Column::new(bound, a);
    let max_b = bound.max_b();
    (-max_b..=max_b)
        .filter(move |&b| column.admits(b))
        .map(move |b| CurveModel::new_unchecked(a, b))
}

/// Streams the curves of height `<= X^6` in lexicographic `(A, B)` order.
pub fn enumerate_curves(bound: HeightBound) -> impl Iterator<Item = CurveModel> {
    let max_a = bound.max_a();
    (-max_a..=max_a).flat_map(move |a| curves_with_a(bound, a))
}

/// Materialises the enumeration in parallel; order matches [`enumerate_curves`].
pub fn collect_curves(bound: HeightBound) -> Vec<CurveModel> {
    let max_a = bound.max_a();
    (-max_a..=max_a)
        .into_par_iter()
        .flat_map_iter(|a| curves_with_a(bound, a))
        .collect()
}

/// `#C(X)` without materialising the curves.
pub fn count_curves(bound: HeightBound) -> u64 {
    let max_a = bound.max_a();
    let max_b = bound.max_b();
    (-max_a..=max_a)
        .into_par_iter()
        .map(|a| Column::new(bound, a).count(max_b))
        .sum()
}
